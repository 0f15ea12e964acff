#include "skit/corpus.hpp"

#include <chrono>
#include <set>

#include "skit/cap.hpp"
#include "skit/measure.hpp"
#include "skit/qm.hpp"
#include "skit/relation.hpp"

namespace skit {

std::string embedded_text(const std::string& name) {
  for (auto& f : embedded_files())
    if (name == f.name) return f.text;
  throw std::out_of_range("no bundled file '" + name + "'");
}

namespace {

const std::set<std::string> kChecks{"relation", "typecheck", "run",    "probe",     "parse-error",
                                    "qm-sim",   "qm-encode", "qm-compose"};

std::string str(const nlohmann::json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

std::string measure_str(const MeasureValue& m) { return m.str(); }

CaseResult relation_case(const FixtureCase& c) {
  auto& j = c.spec;
  auto g = parse_types(embedded_text(c.file));
  Budget b;
  b.max_pairs = j.value("max_pairs", b.max_pairs);
  RelationKind k = parse_kind(j.at("rel").get<std::string>());
  Verdict v = check(resolve(g, j.at("left")), resolve(g, j.at("right")), k, b);
  CaseResult r;
  std::string got = outcome_name(v.outcome);
  r.detail = got + " (" + std::to_string(v.stats.pairs_explored) + " pairs, " + v.stats.phase + ")";
  r.pass = got == j.at("expect").get<std::string>();
  if (v.witness) {
    bool ok = validate_witness(*v.witness, k);
    r.detail += ", witness " + std::to_string(v.witness->pairs.size()) + " pairs" + (ok ? "" : " INVALID");
    r.pass = r.pass && ok;
    if (j.contains("witness_max_pairs") && v.witness->pairs.size() > j["witness_max_pairs"].get<size_t>()) {
      r.pass = false;
      r.detail += ", witness too large";
    }
  }
  if (v.outcome == Outcome::No) {
    bool ok = replay_counterexample(v);
    r.detail += ", " + v.reason + (ok ? " (replays)" : " (DOES NOT REPLAY)");
    r.pass = r.pass && ok;
  }
  return r;
}

TypecheckOptions options_of(const nlohmann::json& j) {
  TypecheckOptions o;
  if (j.contains("assume"))
    for (auto& a : j["assume"]) o.assume_cuts.insert(a.get<std::string>());
  return o;
}

CaseResult typecheck_case(const FixtureCase& c) {
  auto& j = c.spec;
  Program p = parse_program(embedded_text(c.file));
  TypeReport rep = typecheck(p, options_of(j));
  CaseResult r;
  r.detail = overall_name(rep.overall);
  r.pass = r.detail == j.at("expect").get<std::string>();
  if (j.contains("measures"))
    for (auto& [name, want] : j["measures"].items()) {
      auto it = rep.measures.find(name);
      std::string got = it == rep.measures.end() ? "missing" : measure_str(it->second);
      if (got != str(want)) {
        r.pass = false;
        r.detail += ", measure " + name + " = " + got + " (want " + str(want) + ")";
      }
    }
  if (j.contains("assumed")) {
    size_t n = 0;
    for (auto& ob : rep.obligations) n += ob.status == ObligationStatus::Assumed;
    if (n != j["assumed"].get<size_t>()) {
      r.pass = false;
      r.detail += ", " + std::to_string(n) + " assumed obligations";
    }
  }
  for (auto& e : rep.errors) r.detail += "; " + e.message;
  return r;
}

CaseResult run_case_impl(const FixtureCase& c) {
  auto& j = c.spec;
  Program p = parse_program(embedded_text(c.file));
  Scheduler s;
  s.kind = parse_scheduler(j.at("scheduler").get<std::string>());
  s.seed = j.value("seed", uint64_t{0});
  if (s.kind == Scheduler::Kind::MinMeasure) s.measure = branch_measure(p, typecheck(p, options_of(j)).measures);
  RunResult res = run(to_configuration(p, p.main), s, j.at("max_steps").get<size_t>());
  CaseResult r;
  r.detail = std::string(status_name(res.status)) + " after " + std::to_string(res.steps) + " steps";
  r.pass = status_name(res.status) == j.at("expect").get<std::string>();
  return r;
}

CaseResult probe_case(const FixtureCase& c) {
  auto& j = c.spec;
  Program p = parse_program(embedded_text(c.file));
  bool got = is_weakly_terminating_probe(to_configuration(p, p.main), j.at("budget").get<size_t>());
  CaseResult r;
  r.detail = got ? "weakly terminating" : "no finite run found";
  r.pass = got == j.at("expect").get<bool>();
  return r;
}

CaseResult parse_error_case(const FixtureCase& c) {
  CaseResult r;
  try {
    parse_program(embedded_text(c.file));
    r.detail = "parsed without error";
  } catch (const ParseError& e) {
    r.detail = e.what();
    r.pass = r.detail.find(c.spec.at("expect").get<std::string>()) != std::string::npos;
  }
  return r;
}

CaseResult qm_case(const FixtureCase& c) {
  auto& j = c.spec;
  QueueMachine m = parse_machine_json(embedded_text(c.file));
  Word in = parse_word(j.value("input", std::string()));
  CaseResult r;
  if (c.check == "qm-sim") {
    QmRun run = simulate_qm(m, in, j.at("max_steps").get<size_t>());
    r.detail = std::string(qm_status_name(run.status)) + " after " + std::to_string(run.steps) + " steps";
    r.pass = qm_status_name(run.status) == j.at("expect").get<std::string>();
    if (j.contains("steps") && run.steps != j["steps"].get<size_t>()) r.pass = false;
  } else if (c.check == "qm-encode") {
    auto [q, s] = encode(m, in);
    bool qok = equiv(q, parse_type(j.at("expect").at("queue").get<std::string>()));
    bool sok = equiv(s, parse_type(j.at("expect").at("control").get<std::string>()));
    r.detail = "queue " + show(q) + (qok ? "" : " (differs)") + "; control " + show(s) + (sok ? "" : " (differs)");
    r.pass = qok && sok;
  } else {
    QmFixture f = undecidability_corpus(m, in, j.at("max_steps").get<size_t>());
    r.detail = std::string(qm_status_name(f.oracle.status)) + ", compose " + outcome_name(f.compose.outcome);
    if (!f.note.empty()) r.detail += ", " + f.note;
    bool not_yes = f.compose.outcome != Outcome::Yes;
    r.pass = f.consistent && (j.at("expect") != "not-yes" || not_yes);
  }
  return r;
}

}  // namespace

std::vector<FixtureCase> load_manifest(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("manifest is not JSON: ") + e.what());
  }
  if (!j.contains("fixtures") || !j["fixtures"].is_array()) throw CorpusError("manifest has no fixtures array");
  std::vector<FixtureCase> out;
  std::set<std::string> names;
  for (auto& e : j["fixtures"]) {
    for (const char* field : {"name", "file", "check", "expect"})
      if (!e.contains(field))
        throw CorpusError("fixture " + (e.contains("name") ? str(e["name"]) : std::string("?")) + " lacks '" + field + "'");
    FixtureCase c{e["name"].get<std::string>(), e["file"].get<std::string>(), e["check"].get<std::string>(), e};
    if (!kChecks.count(c.check)) throw CorpusError("fixture " + c.name + ": unknown check '" + c.check + "'");
    if (!names.insert(c.name).second) throw CorpusError("duplicate fixture name " + c.name);
    try {
      embedded_text(c.file);
    } catch (const std::out_of_range&) {
      throw CorpusError("fixture " + c.name + ": no bundled file " + c.file);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<FixtureCase> bundled_corpus() { return load_manifest(embedded_text("corpus.json")); }

CaseResult run_case(const FixtureCase& c) {
  auto t0 = std::chrono::steady_clock::now();
  CaseResult r;
  try {
    if (c.check == "relation")
      r = relation_case(c);
    else if (c.check == "typecheck")
      r = typecheck_case(c);
    else if (c.check == "run")
      r = run_case_impl(c);
    else if (c.check == "probe")
      r = probe_case(c);
    else if (c.check == "parse-error")
      r = parse_error_case(c);
    else
      r = qm_case(c);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.name = c.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace skit
