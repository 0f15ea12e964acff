// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "skit/cap.hpp"
#include "skit/corpus.hpp"
#include "skit/gen.hpp"
#include "skit/lts.hpp"
#include "skit/measure.hpp"
#include "skit/qm.hpp"
#include "skit/relation.hpp"

using namespace skit;

namespace {

// Every verdict produced below passes through here; criterion 12 reads it.
struct VerdictLog {
  size_t yes = 0, yes_valid = 0, no = 0, no_replayed = 0, unknown = 0;
  std::vector<std::string> bad;

  void add(const Verdict& v, const std::string& where) {
    if (v.outcome == Outcome::Yes) {
      ++yes;
      if (v.witness && validate_witness(*v.witness, v.kind))
        ++yes_valid;
      else
        bad.push_back(where + ": yes without a valid witness");
    } else if (v.outcome == Outcome::No) {
      ++no;
      if (replay_counterexample(v))
        ++no_replayed;
      else
        bad.push_back(where + ": counterexample does not replay");
    } else {
      ++unknown;
    }
  }
} g_log;

Verdict chk(const TypeAutomaton& s, const TypeAutomaton& t, RelationKind k, const std::string& where,
            const Budget& b = {}, const CheckOptions& o = {}) {
  Verdict v = check(s, t, k, b, o);
  g_log.add(v, where);
  return v;
}

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << "first failure: " << why << "; ";
    pass = false;
  }
};

TypeAutomaton named(const std::string& file, const std::string& name) {
  return resolve(parse_types(embedded_text(file)), name);
}

// Related first-order fairly terminating pairs, shared by criteria 5 to 7.
std::vector<std::pair<TypeAutomaton, TypeAutomaton>>& ffst_pairs() {
  static std::vector<std::pair<TypeAutomaton, TypeAutomaton>> pairs = [] {
    std::mt19937_64 rng(5);
    std::vector<std::pair<TypeAutomaton, TypeAutomaton>> v;
    for (int i = 0; i < 300; ++i) v.push_back(random_ffst_pair(rng, 8));
    return v;
  }();
  return pairs;
}

// Type pairs named by the relation fixtures of the bundled corpus.
std::vector<std::pair<TypeAutomaton, TypeAutomaton>> fixture_pairs() {
  std::vector<std::pair<TypeAutomaton, TypeAutomaton>> out;
  for (auto& c : bundled_corpus())
    if (c.check == "relation" && c.name != "server-worker")
      out.emplace_back(named(c.file, c.spec["left"]), named(c.file, c.spec["right"]));
  return out;
}

std::vector<std::pair<TypeAutomaton, TypeAutomaton>> fair_yes;  // filled by criterion 5

Result c1_duality() {
  Result r;
  std::mt19937_64 rng(1);
  // Second pass without the up-to families. Non fairly terminating types
  // grow without bound under full-mode derivatives there, so many of those
  // end Unknown; what must not happen is a No.
  CheckOptions plain;
  plain.families = false;
  Budget small{300, 256};
  size_t fo = 0, ho = 0, plain_yes = 0, plain_unknown = 0;
  for (int i = 0; i < 250; ++i) {
    GenOptions o;
    o.higher_order = i >= 200;
    o.max_nodes = o.higher_order ? 6 : 8;
    TypeAutomaton s = random_type(rng, o);
    std::string where = "c1 #" + std::to_string(i);
    Verdict v = chk(dual(s), s, RelationKind::Compose, where);
    if (v.outcome != Outcome::Yes)
      r.fail("#" + std::to_string(i) + " " + show(s) + " gave " + outcome_name(v.outcome) + " " + v.reason);
    else
      ++(o.higher_order ? ho : fo);
    Verdict p = chk(dual(s), s, RelationKind::Compose, where + " plain", small, plain);
    if (p.outcome == Outcome::No)
      r.fail("#" + std::to_string(i) + " refuted without families: " + p.reason);
    else
      ++(p.outcome == Outcome::Yes ? plain_yes : plain_unknown);
  }
  r.detail << fo << "/200 first-order and " << ho << "/50 higher-order yes (validated witnesses); "
           << "families off: " << plain_yes << " yes, " << plain_unknown << " unknown, 0 no";
  return r;
}

Result c2_fas_oracle() {
  Result r;
  std::mt19937_64 rng(2);
  size_t labels = 0, present = 0;
  for (int i = 0; i < 500; ++i) {
    TypeAutomaton t = random_type(rng, {});
    for (Dir d : {Dir::In, Dir::Out})
      for (auto& l : candidate_labels(t, d)) {
        if (!l.first_order()) continue;
        ++labels;
        bool gis = enabled(t, l, Mode::Full).has_value();
        present += gis;
        if (gis != fas_oracle(t, l)) r.fail(show(t) + " on " + l.str());
      }
  }
  r.detail << labels << " labels on 500 automata, " << present << " enabled, 0 disagreements required";
  return r;
}

Result c3_diamond() {
  Result r;
  std::mt19937_64 rng(3);
  size_t squares = 0;
  for (int i = 0; i < 500; ++i) {
    GenOptions o;
    o.higher_order = i % 5 == 4;
    o.max_nodes = o.higher_order ? 6 : 8;
    TypeAutomaton t = random_type(rng, o);
    auto ins = transitions(t, Dir::In, Mode::Full);
    auto outs = transitions(t, Dir::Out, Mode::Full);
    for (auto& a : ins)
      for (auto& b : outs) {
        ++squares;
        auto ab = enabled(a.result, b.label, Mode::Full);
        auto ba = enabled(b.result, a.label, Mode::Full);
        if (!ab || !ba || !bisimilar(*ab, *ba)) r.fail(show(t) + " on " + a.label.str() + ", " + b.label.str());
      }
  }
  r.detail << squares << " input/output squares closed on 500 automata";
  return r;
}

Result c4_fixtures() {
  Result r;
  size_t n = 0;
  for (auto& c : bundled_corpus()) {
    if (c.check != "relation" || c.name == "server-worker") continue;
    ++n;
    RelationKind k = parse_kind(c.spec["rel"]);
    Verdict v = chk(named(c.file, c.spec["left"]), named(c.file, c.spec["right"]), k, "c4 " + c.name);
    if (outcome_name(v.outcome) != c.spec["expect"].get<std::string>())
      r.fail(c.name + " gave " + outcome_name(v.outcome));
    if (c.spec.contains("witness_max_pairs") && v.witness &&
        v.witness->pairs.size() > c.spec["witness_max_pairs"].get<size_t>())
      r.fail(c.name + " witness has " + std::to_string(v.witness->pairs.size()) + " pairs");
  }
  std::mt19937_64 rng(4);
  TypeAutomaton zero = named("zero.st", "Z"), top = named("zero.st", "Top");
  for (int i = 0; i < 50; ++i) {
    GenOptions o;
    o.higher_order = i % 2 == 1;
    TypeAutomaton t = random_type(rng, o);
    if (chk(zero, t, RelationKind::FairSub, "c4 zero").outcome != Outcome::Yes) r.fail("0 <= " + show(t));
    if (chk(t, top, RelationKind::FairSub, "c4 top").outcome != Outcome::Yes) r.fail(show(t) + " <= top");
  }
  r.detail << n << " named fixtures exact, 0 <= T and T <= top on 50 random T";
  return r;
}

Result c5_inclusions() {
  Result r;
  size_t sync_yes = 0, async_yes = 0, bz_yes = 0, fair_y = 0, fair_unknown = 0;
  auto& pairs = ffst_pairs();
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto& [s, t] = pairs[i];
    std::string at = "c5 #" + std::to_string(i);
    Outcome sync = chk(s, t, RelationKind::SyncSub, at).outcome;
    Outcome async = chk(s, t, RelationKind::AsyncSub, at).outcome;
    Outcome bz = chk(s, t, RelationKind::BzFairSub, at).outcome;
    Outcome fair = chk(s, t, RelationKind::FairSub, at).outcome;
    sync_yes += sync == Outcome::Yes;
    async_yes += async == Outcome::Yes;
    bz_yes += bz == Outcome::Yes;
    fair_y += fair == Outcome::Yes;
    fair_unknown += fair == Outcome::Unknown;
    if (fair == Outcome::Yes) fair_yes.emplace_back(s, t);
    if (sync == Outcome::Yes && async != Outcome::Yes) r.fail(at + " sync yes, async " + outcome_name(async));
    if (async == Outcome::Yes && fair != Outcome::Yes) r.fail(at + " async yes, fair " + outcome_name(fair));
    if (bz == Outcome::Yes && fair != Outcome::Yes) r.fail(at + " bzfair yes, fair " + outcome_name(fair));
  }
  r.detail << "300 pairs: sync yes " << sync_yes << ", async yes " << async_yes << ", bzfair yes " << bz_yes
           << ", fair yes " << fair_y << " (fair unknown " << fair_unknown << ")";
  return r;
}

Result c6_correct_subt() {
  Result r;
  auto pairs = ffst_pairs();
  for (auto& p : fixture_pairs()) pairs.push_back(p);
  size_t definitive = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto& [s, t] = pairs[i];
    CrossReport c = cross_check_correct_subt(s, t);
    g_log.add(c.compose, "c6 compose #" + std::to_string(i));
    g_log.add(c.fairsub, "c6 fairsub #" + std::to_string(i));
    definitive += c.compose.outcome != Outcome::Unknown && c.fairsub.outcome != Outcome::Unknown;
    if (!c.consistent) r.fail("#" + std::to_string(i) + " " + show(s) + " / " + show(t));
  }
  r.detail << pairs.size() << " pairs, " << definitive << " with both verdicts definitive, 0 contradictions required";
  return r;
}

Result c7_dual_closure() {
  Result r;
  auto yes = fair_yes;
  for (auto& [s, t] : fixture_pairs())
    if (check(s, t, RelationKind::FairSub).outcome == Outcome::Yes) yes.emplace_back(s, t);
  for (size_t i = 0; i < yes.size(); ++i) {
    DualClosureReport d = dual_closure_check(yes[i].first, yes[i].second);
    g_log.add(d.forward, "c7 forward #" + std::to_string(i));
    g_log.add(d.backward, "c7 backward #" + std::to_string(i));
    if (!d.applicable) r.fail("#" + std::to_string(i) + " forward no longer yes");
    if (!d.holds) r.fail("#" + std::to_string(i) + " dual pair " + outcome_name(d.backward.outcome));
    if (!d.dual_witness_valid) r.fail("#" + std::to_string(i) + " dualized witness invalid");
  }
  r.detail << yes.size() << " fair subtyping yes verdicts, dual swapped pairs all yes with dualized witnesses";
  return r;
}

Result c8_server_worker() {
  Result r;
  TypeAutomaton s = named("serverworker.st", "S"), u = named("serverworker.st", "U");
  size_t last = 0;
  for (size_t b : {500, 2000, 8000}) {
    Verdict v = chk(s, u, RelationKind::Compose, "c8 budget " + std::to_string(b), {b, Budget{}.max_nodes_per_type});
    r.detail << b << ": " << outcome_name(v.outcome) << " " << v.stats.pairs_explored << " pairs, "
             << v.stats.violations << " violations; ";
    if (v.outcome == Outcome::No) r.fail("said no at budget " + std::to_string(b));
    if (b == 2000 && v.outcome != Outcome::Unknown) r.fail("default budget gave " + std::string(outcome_name(v.outcome)));
    if (v.stats.violations != 0) r.fail("clause violations recorded");
    if (v.stats.pairs_explored <= last) r.fail("pairs explored did not grow");
    last = v.stats.pairs_explored;
  }
  return r;
}

Result c9_measures() {
  Result r;
  Program p = parse_program(embedded_text("server.cap"));
  auto m = infer_measures(p);
  for (auto [name, want] : std::vector<std::pair<std::string, uint64_t>>{{"Gather", 2}, {"Split", 4}, {"Worker", 2}, {"Server", 6}}) {
    r.detail << name << " " << m[name].str() << ", ";
    if (!(m[name] == MeasureValue::of(want))) r.fail(name + " = " + m[name].str());
  }
  auto z = infer_measures(parse_program(embedded_text("workerzero.cap")));
  r.detail << "zeroed Worker " << z["Worker"].str() << ", ";
  if (!z["Worker"].inf) r.fail("zeroed Worker is finite");
  MeasureSystem sys;
  int v = sys.add_var("m");
  sys.set(v, MExpr::min_plus(1, {MExpr::sum(1, {MExpr::variable(v)}), MExpr::constant(3)}));
  MeasureValue sol = sys.solve()[0];
  r.detail << "m = 1 + min(1 + m, 3) gives " << sol.str();
  if (!(sol == MeasureValue::of(4))) r.fail("micro-equation gave " + sol.str());
  return r;
}

Result c10_simulator() {
  Result r;
  Program p = parse_program(embedded_text("serverclient.cap"));
  TypecheckOptions o;
  o.assume_cuts = {"cut-y"};
  TypeReport rep = typecheck(p, o);
  for (auto& ob : rep.obligations)
    if (ob.verdict) g_log.add(*ob.verdict, "c10 " + ob.site);
  bool typed = rep.overall != Overall::IllTyped;
  for (auto& ob : rep.obligations) typed = typed && ob.status != ObligationStatus::Unknown && ob.status != ObligationStatus::No;
  if (!typed) r.fail("server+client does not type-check: " + report_text(rep));
  r.detail << "server+client " << overall_name(rep.overall) << " (cut-y assumed); ";
  BranchMeasure bm = branch_measure(p, rep.measures);
  Config start = to_configuration(p, p.main);

  Scheduler mm;
  mm.measure = bm;
  size_t probes = 0;
  auto probe_every_10 = [&](const TraceEvent& e, const Config& c) {
    if ((e.step + 1) % 10 != 0) return;
    ++probes;
    if (!is_weakly_terminating_probe(c, 2000, bm)) r.fail("prefix at step " + std::to_string(e.step + 1) + " not weakly terminating");
  };
  RunResult a = run(start, mm, 200, probe_every_10);
  r.detail << "minmeasure " << status_name(a.status) << " in " << a.steps << " steps; ";
  if (a.status != RunStatus::DoneReached) r.fail("minmeasure run " + std::string(status_name(a.status)));
  if (!is_weakly_terminating_probe(start, 2000, bm)) r.fail("initial configuration not weakly terminating");

  size_t longest = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Scheduler rs;
    rs.kind = Scheduler::Kind::Random;
    rs.seed = seed;
    RunResult x = run(start, rs, 5000, probe_every_10);
    longest = std::max(longest, x.steps);
    if (x.status != RunStatus::DoneReached) r.fail("seed " + std::to_string(seed) + " " + status_name(x.status));
  }
  r.detail << "50 random seeds done, longest " << longest << " steps, " << probes << " prefixes probed; ";

  Program bad = parse_program(embedded_text("deadlock.cap"));
  Scheduler rs;
  rs.kind = Scheduler::Kind::Random;
  RunResult d = run(to_configuration(bad, bad.main), rs, 100);
  TypeReport drep = typecheck(bad);
  r.detail << "deadlock fixture " << status_name(d.status) << " and " << overall_name(drep.overall);
  if (d.status != RunStatus::StuckNotDone) r.fail("deadlock fixture " + std::string(status_name(d.status)));
  if (drep.overall != Overall::IllTyped) r.fail("deadlock fixture type-checks");
  return r;
}

Result c11_queue_machines() {
  Result r;
  std::mt19937_64 rng(11);
  size_t steps = 0, accepted = 0, yes = 0, no = 0, unknown = 0;
  for (int i = 0; i < 20; ++i) {
    QueueMachine m = random_machine(rng, 3, 3);
    Word in = random_input(rng, m, 4);
    CorrespondenceResult c = check_correspondence(m, in, 200);
    steps += c.steps_checked;
    if (!c.holds) r.fail("machine " + std::to_string(i) + ": " + c.failure);
    QmFixture f = undecidability_corpus(m, in, 200, {500, Budget{}.max_nodes_per_type});
    g_log.add(f.compose, "c11 machine " + std::to_string(i));
    accepted += f.oracle.status == QmStatus::Accepted;
    yes += f.compose.outcome == Outcome::Yes;
    no += f.compose.outcome == Outcome::No;
    unknown += f.compose.outcome == Outcome::Unknown;
    if (f.oracle.status == QmStatus::Accepted && f.compose.outcome == Outcome::Yes)
      r.fail("machine " + std::to_string(i) + " accepts but composition is yes");
    if (!f.consistent) r.fail("machine " + std::to_string(i) + ": " + f.note);
  }
  r.detail << "20 machines, " << steps << " steps corresponded, " << accepted << " accepted; compose yes " << yes
           << ", no " << no << ", unknown " << unknown;
  return r;
}

Result c12_witnesses() {
  Result r;
  r.detail << g_log.yes_valid << "/" << g_log.yes << " yes verdicts validated, " << g_log.no_replayed << "/" << g_log.no
           << " no verdicts replayed, " << g_log.unknown << " unknown";
  for (auto& b : g_log.bad) r.fail(b);
  return r;
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"1 duality composition", c1_duality},
      {"2 full transitions vs fair-run oracle", c2_fas_oracle},
      {"3 diamond property", c3_diamond},
      {"4 subtyping fixtures", c4_fixtures},
      {"5 inclusions", c5_inclusions},
      {"6 composition/subtyping agreement", c6_correct_subt},
      {"7 duality closure of subtyping", c7_dual_closure},
      {"8 server/worker honesty", c8_server_worker},
      {"9 measures", c9_measures},
      {"10 simulator soundness and termination", c10_simulator},
      {"11 queue-machine bridge", c11_queue_machines},
      {"12 witness validation", c12_witnesses},
  };
  int failed = 0;
  for (auto& [name, fn] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !r.pass;
    std::printf("%s criterion %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", name, secs, r.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
