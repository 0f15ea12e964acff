#include "skit/qm.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "skit/lts.hpp"

namespace skit {

void QueueMachine::validate() const {
  std::set<std::string> g(gamma.begin(), gamma.end()), st(states.begin(), states.end());
  if (!g.count(dollar)) throw QmError("initial symbol '" + dollar + "' is not in gamma");
  for (auto& a : sigma) {
    if (!g.count(a)) throw QmError("input symbol '" + a + "' is not in gamma");
    if (a == dollar) throw QmError("initial symbol must not be an input symbol");
  }
  if (!st.count(start)) throw QmError("start state '" + start + "' is not a state");
  for (auto& q : states)
    for (auto& a : gamma) {
      auto it = delta.find({q, a});
      if (it == delta.end()) throw QmError("delta is missing (" + q + ", " + a + ")");
      if (!st.count(it->second.first)) throw QmError("delta(" + q + ", " + a + ") goes to an unknown state");
      for (auto& b : it->second.second)
        if (!g.count(b)) throw QmError("delta(" + q + ", " + a + ") enqueues '" + b + "' outside gamma");
    }
}

const std::pair<std::string, Word>& QueueMachine::next(const std::string& q, const std::string& a) const {
  auto it = delta.find({q, a});
  if (it == delta.end()) throw QmError("no transition for (" + q + ", " + a + ")");
  return it->second;
}

Word parse_word(const std::string& w) {
  Word out;
  for (char c : w) out.emplace_back(1, c);
  return out;
}

std::string show_word(const Word& w) {
  std::string s;
  bool single = std::all_of(w.begin(), w.end(), [](const std::string& x) { return x.size() == 1; });
  for (size_t i = 0; i < w.size(); ++i) s += (single || i == 0 ? "" : " ") + w[i];
  return s;
}

namespace {

Word word_of(const nlohmann::json& j) {
  if (j.is_string()) return parse_word(j.get<std::string>());
  if (j.is_array()) return j.get<Word>();
  throw QmError("a word must be a string or an array of symbols");
}

}  // namespace

QueueMachine parse_machine_json(const std::string& text) {
  QueueMachine m;
  try {
    auto j = nlohmann::json::parse(text);
    m.states = j.at("states").get<std::vector<std::string>>();
    m.sigma = j.at("sigma").get<std::vector<std::string>>();
    m.gamma = j.at("gamma").get<std::vector<std::string>>();
    m.dollar = j.value("dollar", std::string("$"));
    m.start = j.at("start").get<std::string>();
    for (auto& [k, v] : j.at("delta").items()) {
      auto comma = k.find(',');
      if (comma == std::string::npos) throw QmError("delta key '" + k + "' is not \"state,symbol\"");
      if (!v.is_array() || v.size() != 2) throw QmError("delta value for '" + k + "' must be [state, word]");
      m.delta[{k.substr(0, comma), k.substr(comma + 1)}] = {v[0].get<std::string>(), word_of(v[1])};
    }
  } catch (const nlohmann::json::exception& e) {
    throw QmError(std::string("bad machine JSON: ") + e.what());
  }
  m.validate();
  return m;
}

std::string machine_json(const QueueMachine& m) {
  nlohmann::json j{{"states", m.states}, {"sigma", m.sigma}, {"gamma", m.gamma}, {"dollar", m.dollar}, {"start", m.start}};
  j["delta"] = nlohmann::json::object();
  for (auto& [k, v] : m.delta) j["delta"][k.first + "," + k.second] = {v.first, show_word(v.second)};
  return j.dump();
}

const char* qm_status_name(QmStatus s) { return s == QmStatus::Accepted ? "accepted" : "running"; }

QmRun simulate_qm(const QueueMachine& m, const Word& input, size_t max_steps) {
  std::set<std::string> sig(m.sigma.begin(), m.sigma.end());
  for (auto& a : input)
    if (!sig.count(a)) throw QmError("input symbol '" + a + "' is not in sigma");
  QmRun r;
  QmConfig c{m.start, input};
  c.queue.push_back(m.dollar);
  r.trace.push_back(c);
  while (!c.queue.empty()) {
    if (r.steps >= max_steps) return r;
    std::string a = c.queue.front();
    c.queue.erase(c.queue.begin());
    auto& [q, out] = m.next(c.state, a);
    c.state = q;
    c.queue.insert(c.queue.end(), out.begin(), out.end());
    ++r.steps;
    r.trace.push_back(c);
  }
  r.status = QmStatus::Accepted;
  return r;
}

namespace {

int add(TypeAutomaton& t, Kind k) {
  Node n;
  n.kind = k;
  t.nodes.push_back(n);
  return static_cast<int>(t.nodes.size() - 1);
}

void branch(TypeAutomaton& t, int at, const std::string& tag, int to) {
  auto& bs = t.nodes[static_cast<size_t>(at)].branches;
  bs.push_back({tag, 0, to});
  std::sort(bs.begin(), bs.end(), [](const Branch& a, const Branch& b) { return a.tag < b.tag; });
}

// Q^M = &{A: +{A: Q^M}} over gamma; returns its node.
int queue_loop(TypeAutomaton& t, const QueueMachine& m) {
  int qm = add(t, Kind::With);
  for (auto& a : m.gamma) {
    int echo = add(t, Kind::Plus);
    branch(t, echo, a, qm);
    branch(t, qm, a, echo);
  }
  return qm;
}

}  // namespace

TypeAutomaton encode_queue(const QueueMachine& m, const Word& contents) {
  TypeAutomaton t;
  int next = queue_loop(t, m);
  for (size_t i = contents.size(); i-- > 0;) {
    int n = add(t, Kind::Plus);
    branch(t, n, contents[i], next);
    next = n;
  }
  t.root = next;
  return canonicalize(t);
}

TypeAutomaton encode_control(const QueueMachine& m, const std::string& state) {
  TypeAutomaton t;
  std::map<std::string, int> id;
  for (auto& q : m.states) id[q] = add(t, Kind::With);
  for (auto& q : m.states)
    for (auto& a : m.gamma) {
      auto& [to, out] = m.next(q, a);
      int next = id.at(to);
      for (size_t i = out.size(); i-- > 0;) {
        int n = add(t, Kind::Plus);
        branch(t, n, out[i], next);
        next = n;
      }
      branch(t, id.at(q), a, next);
    }
  t.root = id.at(state);
  return canonicalize(t);
}

std::pair<TypeAutomaton, TypeAutomaton> encode(const QueueMachine& m, const Word& input) {
  Word w = input;
  w.push_back(m.dollar);
  return {encode_queue(m, w), encode_control(m, m.start)};
}

CorrespondenceResult check_correspondence(const QueueMachine& m, const Word& input, size_t max_steps) {
  CorrespondenceResult res;
  QmRun run = simulate_qm(m, input, max_steps);
  for (size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const QmConfig& from = run.trace[i];
    const QmConfig& to = run.trace[i + 1];
    const std::string& a = from.queue.front();
    const Word& out = m.next(from.state, a).second;
    std::vector<Label> qs{Label::tagged(Dir::Out, a)}, cs{Label::tagged(Dir::In, a)};
    for (auto& b : out) {
      qs.push_back(Label::tagged(Dir::In, b));
      cs.push_back(Label::tagged(Dir::Out, b));
    }
    auto qd = derivative_seq(encode_queue(m, from.queue), qs, Mode::Full);
    auto cd = derivative_seq(encode_control(m, from.state), cs, Mode::Full);
    if (!qd || !equiv(*qd, encode_queue(m, to.queue))) {
      res.holds = false;
      res.failure = "queue type misses step " + std::to_string(i) + " on " + a;
      return res;
    }
    if (!cd || !equiv(*cd, encode_control(m, to.state))) {
      res.holds = false;
      res.failure = "control type misses step " + std::to_string(i) + " on " + a;
      return res;
    }
    ++res.steps_checked;
  }
  return res;
}

QmFixture undecidability_corpus(const QueueMachine& m, const Word& input, size_t max_steps, const Budget& b) {
  QmFixture f;
  f.machine = m;
  f.input = input;
  std::tie(f.queue_type, f.control_type) = encode(m, input);
  f.oracle = simulate_qm(m, input, max_steps);
  f.compose = check(f.queue_type, f.control_type, RelationKind::Compose, b);
  switch (f.compose.outcome) {
    case Outcome::Yes:
      if (f.oracle.status == QmStatus::Accepted) {
        f.consistent = false;
        f.note = "accepting machine but composition says yes";
      } else if (!f.compose.witness || !validate_witness(*f.compose.witness, RelationKind::Compose)) {
        f.consistent = false;
        f.note = "yes without a valid witness";
      }
      break;
    case Outcome::No:
      if (!replay_counterexample(f.compose)) {
        f.consistent = false;
        f.note = "counterexample does not replay";
      }
      break;
    case Outcome::Unknown: break;
  }
  return f;
}

QueueMachine random_machine(std::mt19937_64& rng, size_t max_states, size_t max_gamma, size_t max_out) {
  auto pick = [&](size_t lo, size_t hi) { return std::uniform_int_distribution<size_t>(lo, hi)(rng); };
  QueueMachine m;
  size_t ns = pick(1, std::max<size_t>(1, max_states));
  size_t ng = pick(2, std::max<size_t>(2, max_gamma));  // at least one input symbol besides $
  for (size_t i = 0; i < ns; ++i) m.states.push_back("q" + std::to_string(i));
  for (size_t i = 0; i + 1 < ng; ++i) m.gamma.push_back(std::string(1, static_cast<char>('a' + i)));
  m.sigma = m.gamma;
  m.gamma.push_back(m.dollar);
  m.start = m.states[0];
  for (auto& q : m.states)
    for (auto& a : m.gamma) {
      Word out;
      size_t len = pick(0, max_out);
      for (size_t i = 0; i < len; ++i) out.push_back(m.gamma[pick(0, m.gamma.size() - 1)]);
      m.delta[{q, a}] = {m.states[pick(0, ns - 1)], out};
    }
  return m;
}

Word random_input(std::mt19937_64& rng, const QueueMachine& m, size_t max_len) {
  Word w;
  size_t len = std::uniform_int_distribution<size_t>(0, max_len)(rng);
  for (size_t i = 0; i < len; ++i)
    w.push_back(m.sigma[std::uniform_int_distribution<size_t>(0, m.sigma.size() - 1)(rng)]);
  return w;
}

}  // namespace skit
