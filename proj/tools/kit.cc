// kit: command-line front end.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "skit/cap.hpp"
#include "skit/corpus.hpp"
#include "skit/lts.hpp"
#include "skit/measure.hpp"
#include "skit/qm.hpp"
#include "skit/relation.hpp"

using namespace skit;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kNo = 1, kUnknown = 2, kError = 3 };

bool g_json = false;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_program(const std::string& path) { return path.size() > 4 && path.substr(path.size() - 4) == ".cap"; }

// Type declarations of a .st file, or the `type` items of a .cap file.
TypeGrammarSource load_types(const std::string& path) {
  if (is_program(path)) return parse_program(slurp(path)).types;
  return parse_types(slurp(path));
}

void emit(const json& j, const std::string& text) {
  if (g_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

json label_json(const Label& l) { return l.str(); }

json verdict_json(const Verdict& v) {
  json j{{"relation", kind_name(v.kind)},
         {"outcome", outcome_name(v.outcome)},
         {"reason", v.reason},
         {"left", show(*v.root.s)},
         {"right", show(*v.root.t)},
         {"stats",
          {{"pairs_explored", v.stats.pairs_explored},
           {"max_automaton_size", v.stats.max_automaton_size},
           {"violations", v.stats.violations},
           {"max_pairs", v.stats.budget.max_pairs},
           {"max_nodes_per_type", v.stats.budget.max_nodes_per_type},
           {"phase", v.stats.phase}}}};
  if (v.witness) {
    json w{{"basis", v.witness->basis}, {"valid", validate_witness(*v.witness, v.kind)}};
    w["pairs"] = json::array();
    for (auto& p : v.witness->pairs) w["pairs"].push_back({show(*p.s), show(*p.t)});
    w["families"] = json::array();
    for (auto f : v.witness->families) w["families"].push_back(family_name(f));
    j["witness"] = w;
  }
  if (!v.counterexample.empty()) {
    json cx = json::array();
    for (auto& s : v.counterexample) {
      json e{{"left", show(*s.pair.s)}, {"right", show(*s.pair.t)}, {"clause", s.clause}, {"branch", s.branch}};
      if (s.label) e["label"] = label_json(*s.label);
      if (s.response) e["response"] = label_json(*s.response);
      cx.push_back(e);
    }
    j["counterexample"] = cx;
    j["replays"] = replay_counterexample(v);
  }
  if (!v.notes.empty()) j["notes"] = v.notes;
  return j;
}

std::string verdict_text(const Verdict& v) {
  std::ostringstream o;
  o << kind_name(v.kind) << ": " << outcome_name(v.outcome);
  if (!v.reason.empty()) o << " (" << v.reason << ")";
  o << "\n  pairs explored " << v.stats.pairs_explored << ", largest automaton " << v.stats.max_automaton_size
    << ", budget " << v.stats.budget.max_pairs << " pairs / " << v.stats.budget.max_nodes_per_type << " nodes, phase "
    << v.stats.phase << "\n";
  if (v.witness) {
    o << "  witness (" << v.witness->basis << ", " << (validate_witness(*v.witness, v.kind) ? "valid" : "INVALID")
      << "):\n";
    for (auto& p : v.witness->pairs) o << "    " << show(*p.s) << "  ~  " << show(*p.t) << "\n";
    for (auto f : v.witness->families) o << "    up to " << family_name(f) << "\n";
  }
  if (!v.counterexample.empty()) {
    o << "  counterexample (" << (replay_counterexample(v) ? "replays" : "DOES NOT REPLAY") << "):\n";
    for (auto& s : v.counterexample) {
      o << "    " << show(*s.pair.s) << "  ~  " << show(*s.pair.t) << "  [" << s.clause;
      if (s.label) o << " " << s.label->str();
      if (s.response) o << " / " << s.response->str();
      if (!s.branch.empty()) o << " -> " << s.branch;
      o << "]\n";
    }
  }
  for (auto& n : v.notes) o << "  note: " << n << "\n";
  return o.str();
}

int outcome_exit(Outcome o) { return o == Outcome::Yes ? kOk : o == Outcome::No ? kNo : kUnknown; }

struct BudgetFlags {
  size_t max_pairs = Budget{}.max_pairs;
  size_t max_nodes = Budget{}.max_nodes_per_type;
  bool no_families = false, no_shortcut = false;
  void add(CLI::App* c) {
    c->add_option("--max-pairs", max_pairs, "pairs the game may explore");
    c->add_option("--max-nodes", max_nodes, "largest automaton a pair may hold");
    c->add_flag("--no-families", no_families, "do not use closed families");
    c->add_flag("--no-shortcut", no_shortcut, "always play the full game");
  }
  Budget budget() const { return {max_pairs, max_nodes}; }
  CheckOptions options() const {
    CheckOptions o;
    o.families = !no_families;
    o.ffst_shortcut = !no_shortcut;
    return o;
  }
};

int relation(const std::string& file, const std::string& a, const std::string& b, RelationKind k, const BudgetFlags& f) {
  auto g = load_types(file);
  Verdict v = check(resolve(g, a), resolve(g, b), k, f.budget(), f.options());
  emit(verdict_json(v), verdict_text(v));
  return outcome_exit(v.outcome);
}

Program load_program(const std::string& file, const std::string& sigfile) {
  Program p = parse_program(slurp(file));
  if (!sigfile.empty()) merge_signatures(p, slurp(sigfile));
  return p;
}

int cmd_parse(const std::string& file) {
  json j;
  std::ostringstream o;
  if (is_program(file)) {
    Program p = parse_program(slurp(file));
    for (auto& d : p.types.decls) {
      std::string t = show(resolve(p.types, d.name));
      j["types"][d.name] = t;
      o << "type " << d.name << " = " << t << "\n";
    }
    for (auto& s : p.sigs) {
      std::string line = "sig " + s.name + "(";
      for (size_t i = 0; i < s.params.size(); ++i) {
        line += (i ? ", " : "") + s.params[i].first + ": " + show(*s.params[i].second);
        j["sigs"][s.name][s.params[i].first] = show(*s.params[i].second);
      }
      o << line << ")\n";
    }
    for (auto& d : p.defs) {
      std::string head = d.name + "(";
      for (size_t i = 0; i < d.params.size(); ++i) head += (i ? ", " : "") + d.params[i];
      head += ")";
      j["defs"][d.name] = {{"params", d.params}, {"body", show(*d.body)}};
      o << "def " << head << " = " << show(*d.body) << "\n";
    }
    if (p.main) {
      j["main"] = show(*p.main);
      o << "main = " << show(*p.main) << "\n";
    }
  } else {
    auto g = parse_types(slurp(file));
    for (auto& d : g.decls) {
      TypeAutomaton t = resolve(g, d.name);
      j["types"][d.name] = {{"text", show(t)}, {"states", t.size()}};
      o << d.name << " = " << show(t) << "   (" << t.size() << " states)\n";
    }
  }
  emit(j, o.str());
  return kOk;
}

int cmd_labels(const std::string& file, const std::string& name, const std::string& dir, const std::string& mode) {
  auto g = load_types(file);
  TypeAutomaton t = resolve(g, name);
  Dir d = dir == "in" ? Dir::In : dir == "out" ? Dir::Out : throw CLI::ValidationError("--dir", "in or out");
  json j = json::array();
  std::ostringstream o;
  for (auto& tr : transitions(t, d, parse_mode(mode))) {
    j.push_back({{"label", tr.label.str()}, {"target", show(tr.result)}});
    o << tr.label.str() << "  ->  " << show(tr.result) << "\n";
  }
  emit(j, o.str());
  return kOk;
}

int cmd_step(const std::string& file, const std::string& name, const std::string& label, const std::string& mode) {
  auto g = load_types(file);
  auto r = enabled(resolve(g, name), parse_label(label), parse_mode(mode));
  json j{{"label", label}, {"mode", mode}, {"enabled", r.has_value()}};
  if (r) j["target"] = show(*r);
  emit(j, r ? show(*r) + "\n" : "not enabled\n");
  return r ? kOk : kNo;
}

int cmd_crosscheck(const std::string& file, const std::string& a, const std::string& b, const BudgetFlags& f) {
  auto g = load_types(file);
  CrossReport rep = cross_check_correct_subt(resolve(g, a), resolve(g, b), f.budget());
  json j{{"compose", verdict_json(rep.compose)}, {"fairsub_dual", verdict_json(rep.fairsub)}, {"consistent", rep.consistent}};
  emit(j, verdict_text(rep.compose) + verdict_text(rep.fairsub) +
              (rep.consistent ? "consistent\n" : "CONTRADICTORY definitive verdicts\n"));
  if (!rep.consistent) return kNo;
  return rep.compose.outcome == Outcome::Unknown && rep.fairsub.outcome == Outcome::Unknown ? kUnknown : kOk;
}

int cmd_typecheck(const std::string& file, const std::string& sigfile, const std::vector<std::string>& assume,
                  size_t max_pairs) {
  Program p = load_program(file, sigfile);
  TypecheckOptions o;
  o.assume_cuts.insert(assume.begin(), assume.end());
  o.budget.max_pairs = max_pairs;
  auto known = p.cut_ids();
  for (auto& a : assume)
    if (std::find(known.begin(), known.end(), a) == known.end())
      std::cerr << "warning: --assume " << a << " names no cut in " << file << "\n";
  TypeReport r = typecheck(p, o);
  if (g_json)
    std::cout << report_json(r) << "\n";
  else
    std::cout << report_text(r);
  if (r.overall == Overall::IllTyped) return kNo;
  for (auto& ob : r.obligations)
    if (ob.status == ObligationStatus::Unknown) return kUnknown;
  return kOk;
}

int cmd_run(const std::string& file, const std::string& sigfile, const std::string& sched, uint64_t seed,
            size_t max_steps, const std::string& trace, const std::vector<std::string>& assume) {
  Program p = load_program(file, sigfile);
  if (!p.main) throw std::runtime_error(file + " has no main");
  Scheduler s;
  s.kind = parse_scheduler(sched);
  s.seed = seed;
  if (s.kind == Scheduler::Kind::MinMeasure) {
    TypecheckOptions o;
    o.assume_cuts.insert(assume.begin(), assume.end());
    // measures do not depend on the side conditions; skip the games
    for (auto& id : p.cut_ids()) o.assume_cuts.insert(id);
    o.budget.max_pairs = 1;
    s.measure = branch_measure(p, typecheck(p, o).measures);
  }
  std::ofstream out;
  if (!trace.empty()) {
    out.open(trace);
    if (!out) throw std::runtime_error("cannot write " + trace);
  }
  RunResult r = run(to_configuration(p, p.main), s, max_steps, [&](const TraceEvent& e, const Config&) {
    if (out) out << trace_json(e) << "\n";
  });
  json j{{"status", status_name(r.status)}, {"steps", r.steps}, {"scheduler", scheduler_name(s.kind)}, {"seed", seed}};
  std::string text = std::string(status_name(r.status)) + " after " + std::to_string(r.steps) + " steps\n";
  if (r.status != RunStatus::DoneReached) {
    j["final"] = describe(r.final);
    text += describe(r.final);
  }
  emit(j, text);
  return r.status == RunStatus::DoneReached ? kOk : r.status == RunStatus::StuckNotDone ? kNo : kUnknown;
}

int cmd_probe(const std::string& file, size_t budget) {
  Program p = parse_program(slurp(file));
  if (!p.main) throw std::runtime_error(file + " has no main");
  TypecheckOptions o;
  for (auto& id : p.cut_ids()) o.assume_cuts.insert(id);
  BranchMeasure m = branch_measure(p, typecheck(p, o).measures);
  bool ok = is_weakly_terminating_probe(to_configuration(p, p.main), budget, m);
  emit(json{{"weakly_terminating", ok}, {"budget", budget}},
       ok ? "weakly terminating\n" : "no finite run found within budget\n");
  return ok ? kOk : kUnknown;
}

int cmd_qm_encode(const std::string& file, const std::string& input) {
  QueueMachine m = parse_machine_json(slurp(file));
  auto [q, s] = encode(m, parse_word(input));
  emit(json{{"queue", show(q)}, {"control", show(s)}}, "queue:   " + show(q) + "\ncontrol: " + show(s) + "\n");
  return kOk;
}

int cmd_qm_sim(const std::string& file, const std::string& input, size_t max_steps) {
  QueueMachine m = parse_machine_json(slurp(file));
  QmRun r = simulate_qm(m, parse_word(input), max_steps);
  const QmConfig& last = r.trace.back();
  json j{{"status", qm_status_name(r.status)}, {"steps", r.steps}, {"state", last.state}, {"queue", show_word(last.queue)}};
  emit(j, std::string(qm_status_name(r.status)) + " after " + std::to_string(r.steps) + " steps, state " + last.state +
              ", queue [" + show_word(last.queue) + "]\n");
  return r.status == QmStatus::Accepted ? kOk : kUnknown;
}

int cmd_corpus(const std::string& action, const std::string& manifest, const std::string& filter) {
  std::vector<FixtureCase> cases = manifest.empty() ? bundled_corpus() : load_manifest(slurp(manifest));
  json j = json::array();
  std::ostringstream o;
  bool all = true;
  size_t n = 0;
  for (auto& c : cases) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    ++n;
    if (action == "list") {
      j.push_back({{"name", c.name}, {"file", c.file}, {"check", c.check}, {"expect", c.spec["expect"]}});
      o << c.name << "  " << c.check << "  " << c.file << "\n";
      continue;
    }
    CaseResult r = run_case(c);
    all = all && r.pass;
    j.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
    o << (r.pass ? "ok   " : "FAIL ") << r.name << ": " << r.detail << "\n";
  }
  if (action == "run") o << (all ? "all " : "some fixtures failed, ") << n << " fixtures run\n";
  emit(j, o.str());
  return all ? kOk : kNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kit: session types with fair asynchronous subtyping, CaP processes and queue machines"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json, "machine-readable output");

  std::string file, a, b, name, dir = "out", mode = "full", label, sigfile, sched = "minmeasure", trace, input, rel = "fair";
  std::string action, manifest, filter;
  std::vector<std::string> assume;
  uint64_t seed = 0;
  size_t max_steps = 1000, budget = 10000, qm_steps = 1000;
  BudgetFlags bf;
  std::function<int()> job;

  auto* parse = app.add_subcommand("parse", "parse a type file (.st) or a process file (.cap)");
  parse->add_option("FILE", file)->required();
  parse->callback([&] { job = [&] { return cmd_parse(file); }; });

  auto* du = app.add_subcommand("dual", "print the dual of a named type");
  du->add_option("FILE", file)->required();
  du->add_option("NAME", name)->required();
  du->callback([&] {
    job = [&] {
      TypeAutomaton d = dual(resolve(load_types(file), name));
      emit(json{{"dual", show(d)}}, show(d) + "\n");
      return int(kOk);
    };
  });

  auto* labels = app.add_subcommand("labels", "list transitions of a named type");
  labels->add_option("FILE", file)->required();
  labels->add_option("NAME", name)->required();
  labels->add_option("--dir", dir)->check(CLI::IsMember({"in", "out"}));
  labels->add_option("--mode", mode)->check(CLI::IsMember({"must", "ind", "full"}));
  labels->callback([&] { job = [&] { return cmd_labels(file, name, dir, mode); }; });

  auto* st = app.add_subcommand("step", "derivative of a named type along one label");
  st->add_option("FILE", file)->required();
  st->add_option("NAME", name)->required();
  st->add_option("--label", label, "e.g. '?a', '!b', '!(end!)'")->required();
  st->add_option("--mode", mode)->check(CLI::IsMember({"must", "ind", "full"}));
  st->callback([&] { job = [&] { return cmd_step(file, name, label, mode); }; });

  auto* comp = app.add_subcommand("compose", "correct asynchronous composition of S and T");
  comp->add_option("FILE", file)->required();
  comp->add_option("S", a)->required();
  comp->add_option("T", b)->required();
  bf.add(comp);
  comp->callback([&] { job = [&] { return relation(file, a, b, RelationKind::Compose, bf); }; });

  auto* sub = app.add_subcommand("subtype", "S <= T under the chosen relation");
  sub->add_option("--rel", rel)->check(CLI::IsMember({"fair", "sync", "async", "bzfair", "aux"}));
  sub->add_option("FILE", file)->required();
  sub->add_option("S", a)->required();
  sub->add_option("T", b)->required();
  bf.add(sub);
  sub->callback([&] { job = [&] { return relation(file, a, b, parse_kind(rel), bf); }; });

  auto* cross = app.add_subcommand("crosscheck", "compose(S, T) against fair subtyping S <= dual T");
  cross->add_option("FILE", file)->required();
  cross->add_option("S", a)->required();
  cross->add_option("T", b)->required();
  bf.add(cross);
  cross->callback([&] { job = [&] { return cmd_crosscheck(file, a, b, bf); }; });

  auto* tc = app.add_subcommand("typecheck", "type and measure check a process file");
  tc->add_option("FILE", file)->required();
  tc->add_option("--sig", sigfile, "extra file of type and sig items");
  tc->add_option("--assume", assume, "cut id whose side condition is assumed");
  tc->add_option("--budget", bf.max_pairs, "pairs per side-condition game");
  tc->callback([&] { job = [&] { return cmd_typecheck(file, sigfile, assume, bf.max_pairs); }; });

  auto* rn = app.add_subcommand("run", "run main under a scheduler");
  rn->add_option("FILE", file)->required();
  rn->add_option("--sig", sigfile, "extra file of type and sig items");
  rn->add_option("--scheduler", sched)->check(CLI::IsMember({"random", "minmeasure", "fair"}));
  rn->add_option("--seed", seed);
  rn->add_option("--max-steps", max_steps);
  rn->add_option("--trace", trace, "write one JSON line per step");
  rn->add_option("--assume", assume);
  rn->callback([&] { job = [&] { return cmd_run(file, sigfile, sched, seed, max_steps, trace, assume); }; });

  auto* pr = app.add_subcommand("probe", "search for a finite run of main");
  pr->add_option("FILE", file)->required();
  pr->add_option("--budget", budget);
  pr->callback([&] { job = [&] { return cmd_probe(file, budget); }; });

  auto* qe = app.add_subcommand("qm-encode", "queue and control types of a queue machine");
  qe->add_option("MACHINE", file)->required();
  qe->add_option("--input", input);
  qe->callback([&] { job = [&] { return cmd_qm_encode(file, input); }; });

  auto* qs = app.add_subcommand("qm-sim", "run a queue machine");
  qs->add_option("MACHINE", file)->required();
  qs->add_option("--input", input);
  qs->add_option("--max-steps", qm_steps);
  qs->callback([&] { job = [&] { return cmd_qm_sim(file, input, qm_steps); }; });

  auto* co = app.add_subcommand("corpus", "list or run the bundled fixtures");
  co->add_option("ACTION", action)->required()->check(CLI::IsMember({"list", "run"}));
  co->add_option("--manifest", manifest, "use this manifest instead of the bundled one");
  co->add_option("--filter", filter, "only fixtures whose name contains this");
  co->callback([&] { job = [&] { return cmd_corpus(action, manifest, filter); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kError;
  }
  try {
    return job();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
