#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "skit/cap.hpp"

namespace skit {

namespace {

TypeP share(TypeAutomaton t) { return std::make_shared<const TypeAutomaton>(std::move(t)); }

// Current type after an action at the root, or null when the type does not
// allow it (ill-typed input keeps running, untyped).
TypeP advance_tag(const TypeP& t, Kind want, const std::string& tag) {
  if (!t || t->top().kind != want) return nullptr;
  for (auto& b : t->top().branches)
    if (b.tag == tag) return share(canonicalize(t->rerooted(b.cont)));
  return nullptr;
}

std::pair<TypeP, TypeP> split_chan(const TypeP& t, Kind want) {
  if (!t || t->top().kind != want) return {nullptr, nullptr};
  return {share(canonicalize(t->rerooted(t->top().payload))), share(canonicalize(t->rerooted(t->top().cont)))};
}

Env restrict(const Env& env, const std::vector<std::string>& names) {
  Env out;
  for (auto& n : names) {
    auto it = env.find(n);
    if (it != env.end()) out.insert(*it);
  }
  return out;
}

const Endpoint& lookup(const Thread& th, const std::string& x) {
  auto it = th.env.find(x);
  if (it == th.env.end()) throw RunError("channel '" + x + "' is not bound in thread " + std::to_string(th.id));
  return it->second;
}

int new_channel(Config& c, const std::string& name, TypeP left, TypeP right) {
  int id = c.next_chan++;
  Channel ch;
  ch.name = name;
  ch.type[0] = std::move(left);
  ch.type[1] = std::move(right);
  c.channels.emplace(id, std::move(ch));
  return id;
}

int spawn(Config& c, ProcP term, Env env) {
  int id = c.next_thread++;
  c.threads.emplace(id, Thread{id, std::move(term), std::move(env)});
  return id;
}

// Structural moves until the thread is stuck on a guard: outputs go to the
// channel buffers, cuts split, calls unfold, done threads disappear.
void normalize(Config& c, int tid) {
  std::vector<int> work{tid};
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    for (size_t guard = 0;; ++guard) {
      if (guard > 100000) throw RunError("normalization does not terminate; unguarded recursion?");
      auto it = c.threads.find(id);
      if (it == c.threads.end()) break;
      Thread& th = it->second;
      const Proc& p = *th.term;
      if (p.k == Proc::K::Done) {
        c.threads.erase(it);
        break;
      }
      if (p.k == Proc::K::Select) {
        Endpoint e = lookup(th, p.x);
        Channel& ch = c.channels.at(e.chan);
        Message m;
        m.tag = p.tag;
        ch.q[e.side].push_back(std::move(m));
        ch.type[e.side] = advance_tag(ch.type[e.side], Kind::Plus, p.tag);
        th.term = p.p;
        th.env = restrict(th.env, th.term->fv);
        continue;
      }
      if (p.k == Proc::K::Fork) {
        Endpoint e = lookup(th, p.x);
        Channel& ch = c.channels.at(e.chan);
        Message m;
        m.k = Message::K::Fork;
        m.proc = p.p;
        m.bound = p.y;
        std::vector<std::string> others;
        for (auto& n : p.p->fv)
          if (n != p.y) others.push_back(n);
        m.env = restrict(th.env, others);
        auto [payload, cont] = split_chan(ch.type[e.side], Kind::Times);
        m.payload = payload;
        ch.q[e.side].push_back(std::move(m));
        ch.type[e.side] = cont;
        th.term = p.q;
        th.env = restrict(th.env, th.term->fv);
        continue;
      }
      if (p.k == Proc::K::Cut) {
        int chan = new_channel(c, p.x, p.left_type, p.right_type);
        Env l = restrict(th.env, p.p->fv), r = restrict(th.env, p.q->fv);
        l[p.x] = {chan, 0};
        r[p.x] = {chan, 1};
        ProcP right = p.q;
        th.term = p.p;
        th.env = std::move(l);
        work.push_back(spawn(c, right, std::move(r)));
        continue;
      }
      if (p.k == Proc::K::Call) {
        const Def* d = c.prog ? c.prog->find_def(p.name) : nullptr;
        if (!d) throw RunError("call to undefined process '" + p.name + "'");
        Env env;
        for (size_t i = 0; i < d->params.size(); ++i) env[d->params[i]] = lookup(th, p.args[i]);
        th.term = d->body;
        th.env = std::move(env);
        continue;
      }
      break;  // a guard
    }
  }
}

int owner_waiting(const Config& c, Endpoint e, Proc::K k) {
  for (auto& [id, th] : c.threads)
    if (th.term->k == k) {
      auto it = th.env.find(th.term->x);
      if (it != th.env.end() && it->second == e) return id;
    }
  return -1;
}

Endpoint peer(Endpoint e) { return {e.chan, 1 - e.side}; }

void replace_endpoint(Config& c, Endpoint from, Endpoint to) {
  auto fix = [&](Env& env) {
    for (auto& [_, e] : env)
      if (e == from) e = to;
  };
  for (auto& [_, th] : c.threads) fix(th.env);
  for (auto& [_, ch] : c.channels)
    for (auto& q : ch.q)
      for (auto& m : q) fix(m.env);
}

}  // namespace

Config to_configuration(const Program& prog, const ProcP& p) {
  Config c;
  c.prog = &prog;
  Env env;
  for (auto& n : p->fv) env[n] = {new_channel(c, n, nullptr, nullptr), 0};
  normalize(c, spawn(c, p, std::move(env)));
  return c;
}

std::string Redex::rule() const {
  switch (k) {
    case K::Choice: return "r-choice";
    case K::Link: return "r-link";
    case K::Close: return "r-close";
    case K::Select: return "r-select";
    case K::Fork: return "r-fork";
  }
  return "?";
}

std::string Redex::key() const {
  return rule() + "/" + std::to_string(thread) + "/" + std::to_string(side);
}

std::vector<Redex> enabled_redexes(const Config& c) {
  std::vector<Redex> out;
  for (auto& [id, th] : c.threads) {
    const Proc& p = *th.term;
    switch (p.k) {
      case Proc::K::Choice:
        out.push_back({Redex::K::Choice, id, 0, -1, -1});
        out.push_back({Redex::K::Choice, id, 1, -1, -1});
        break;
      case Proc::K::Link: {
        Endpoint a = lookup(th, p.x), b = lookup(th, p.y);
        if (a.chan != b.chan) out.push_back({Redex::K::Link, id, 0, -1, a.chan});
        break;
      }
      case Proc::K::Close: {
        Endpoint e = lookup(th, p.x);
        const Channel& ch = c.channels.at(e.chan);
        if (!ch.q[0].empty() || !ch.q[1].empty()) break;
        int w = owner_waiting(c, peer(e), Proc::K::Wait);
        if (w >= 0) out.push_back({Redex::K::Close, id, 0, w, e.chan});
        break;
      }
      case Proc::K::Case: {
        Endpoint e = lookup(th, p.x);
        const auto& q = c.channels.at(e.chan).q[1 - e.side];
        if (q.empty() || q.front().k != Message::K::Tag) break;
        for (auto& [tag, _] : p.arms)
          if (tag == q.front().tag) {
            out.push_back({Redex::K::Select, id, 0, -1, e.chan});
            break;
          }
        break;
      }
      case Proc::K::Join: {
        Endpoint e = lookup(th, p.x);
        const auto& q = c.channels.at(e.chan).q[1 - e.side];
        if (!q.empty() && q.front().k == Message::K::Fork) out.push_back({Redex::K::Fork, id, 0, -1, e.chan});
        break;
      }
      default: break;
    }
  }
  return out;
}

Config step(const Config& c0, const Redex& r) {
  bool ok = false;
  for (auto& e : enabled_redexes(c0))
    if (e.k == r.k && e.thread == r.thread && e.side == r.side && e.partner == r.partner) ok = true;
  if (!ok) throw RunError("stale redex " + r.key());
  Config c = c0;
  Thread& th = c.threads.at(r.thread);
  const Proc& p = *th.term;
  switch (r.k) {
    case Redex::K::Choice: {
      th.term = r.side == 0 ? p.p : p.q;
      th.env = restrict(th.env, th.term->fv);
      normalize(c, r.thread);
      break;
    }
    case Redex::K::Link: {
      Endpoint x = lookup(th, p.x), y = lookup(th, p.y);
      Channel cx = c.channels.at(x.chan);
      Channel& cy = c.channels.at(y.chan);
      // The peer of x takes over y's side of y's channel.
      auto& to_peer = cy.q[1 - y.side];
      to_peer.insert(to_peer.begin(), cx.q[x.side].begin(), cx.q[x.side].end());
      auto& from_peer = cy.q[y.side];
      from_peer.insert(from_peer.end(), cx.q[1 - x.side].begin(), cx.q[1 - x.side].end());
      cy.type[y.side] = cx.type[1 - x.side];
      c.channels.erase(x.chan);
      c.threads.erase(r.thread);
      replace_endpoint(c, peer(x), y);
      break;
    }
    case Redex::K::Close: {
      c.threads.erase(r.thread);
      c.channels.erase(r.chan);
      Thread& w = c.threads.at(r.partner);
      w.term = w.term->p;
      w.env = restrict(w.env, w.term->fv);
      normalize(c, r.partner);
      break;
    }
    case Redex::K::Select: {
      Endpoint e = lookup(th, p.x);
      Channel& ch = c.channels.at(e.chan);
      std::string tag = ch.q[1 - e.side].front().tag;
      ch.q[1 - e.side].pop_front();
      ch.type[e.side] = advance_tag(ch.type[e.side], Kind::With, tag);
      for (auto& [t, body] : p.arms)
        if (t == tag) th.term = body;
      th.env = restrict(th.env, th.term->fv);
      normalize(c, r.thread);
      break;
    }
    case Redex::K::Fork: {
      Endpoint e = lookup(th, p.x);
      Channel& ch = c.channels.at(e.chan);
      Message m = ch.q[1 - e.side].front();
      ch.q[1 - e.side].pop_front();
      auto [payload, cont] = split_chan(ch.type[e.side], Kind::Par);
      ch.type[e.side] = cont;
      int fresh = new_channel(c, m.bound, m.payload, payload);
      Env spawned = m.env;
      spawned[m.bound] = {fresh, 0};
      Thread& rx = c.threads.at(r.thread);
      std::string z = rx.term->y;
      rx.term = rx.term->p;
      rx.env[z] = {fresh, 1};
      rx.env = restrict(rx.env, rx.term->fv);
      int sid = spawn(c, m.proc, std::move(spawned));
      normalize(c, r.thread);
      normalize(c, sid);
      break;
    }
  }
  return c;
}

const char* scheduler_name(Scheduler::Kind k) {
  switch (k) {
    case Scheduler::Kind::Random: return "random";
    case Scheduler::Kind::MinMeasure: return "minmeasure";
    case Scheduler::Kind::Fair: return "fair";
  }
  return "?";
}

Scheduler::Kind parse_scheduler(const std::string& s) {
  if (s == "random") return Scheduler::Kind::Random;
  if (s == "minmeasure") return Scheduler::Kind::MinMeasure;
  if (s == "fair") return Scheduler::Kind::Fair;
  throw std::invalid_argument("unknown scheduler '" + s + "'");
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::DoneReached: return "done";
    case RunStatus::StuckNotDone: return "stuck";
    case RunStatus::BudgetExhausted: return "budget";
  }
  return "?";
}

std::string trace_json(const TraceEvent& e) {
  nlohmann::json j{{"step", e.step},       {"rule", e.rule},         {"channel", e.channel},
                   {"message", e.message}, {"decision", e.decision}, {"thread", e.thread}};
  return j.dump();
}

namespace {

std::map<std::string, TypeP> context_of(const Config& c, const Thread& th, const Proc& term) {
  std::map<std::string, TypeP> ctx;
  for (auto& n : term.fv) {
    auto it = th.env.find(n);
    if (it == th.env.end()) continue;
    ctx[n] = c.channels.at(it->second.chan).type[it->second.side];
  }
  return ctx;
}

TraceEvent describe_step(const Config& c, const Redex& r) {
  TraceEvent e;
  e.rule = r.rule();
  e.thread = r.thread;
  const Thread& th = c.threads.at(r.thread);
  const Proc& p = *th.term;
  switch (r.k) {
    case Redex::K::Choice:
      e.message = r.side == 0 ? "left" : "right";
      break;
    case Redex::K::Link:
      e.channel = p.x;
      e.message = p.x + "=" + p.y;
      break;
    case Redex::K::Close:
      e.channel = c.channels.at(r.chan).name;
      e.message = "close";
      break;
    case Redex::K::Select: {
      Endpoint ep = th.env.at(p.x);
      e.channel = c.channels.at(ep.chan).name;
      e.message = c.channels.at(ep.chan).q[1 - ep.side].front().tag;
      break;
    }
    case Redex::K::Fork: {
      Endpoint ep = th.env.at(p.x);
      e.channel = c.channels.at(ep.chan).name;
      e.message = "(" + c.channels.at(ep.chan).q[1 - ep.side].front().bound + ")";
      break;
    }
  }
  return e;
}

class Picker {
 public:
  explicit Picker(const Scheduler& s) : s_(s), rng_(s.seed) {}

  size_t pick(const Config& c, const std::vector<Redex>& rs, std::string& why) {
    switch (s_.kind) {
      case Scheduler::Kind::Random: {
        std::uniform_int_distribution<size_t> d(0, rs.size() - 1);
        size_t i = d(rng_);
        why = "random " + std::to_string(i) + "/" + std::to_string(rs.size());
        return i;
      }
      case Scheduler::Kind::Fair: {
        size_t best = 0;
        long best_t = 0;
        for (size_t i = 0; i < rs.size(); ++i) {
          auto it = last_.find(rs[i].key());
          long t = it == last_.end() ? -1 : it->second;
          if (i == 0 || t < best_t) best = i, best_t = t;
        }
        last_[rs[best].key()] = clock_++;
        why = best_t < 0 ? "fair: never served" : "fair: served at " + std::to_string(best_t);
        return best;
      }
      case Scheduler::Kind::MinMeasure: {
        for (size_t i = 0; i < rs.size(); ++i)
          if (rs[i].k != Redex::K::Choice) {
            why = "minmeasure: deterministic first";
            return i;
          }
        // Only choices: the branch with the least measure.
        const Redex& r = rs[0];
        const Thread& th = c.threads.at(r.thread);
        const Proc& p = *th.term;
        if (!s_.measure) {
          why = "minmeasure: no measures, left";
          return 0;
        }
        MeasureValue l = s_.measure(*p.p, context_of(c, th, *p.p));
        MeasureValue rm = s_.measure(*p.q, context_of(c, th, *p.q));
        why = "minmeasure: left " + l.str() + " right " + rm.str();
        return rm < l ? 1 : 0;
      }
    }
    return 0;
  }

 private:
  const Scheduler& s_;
  std::mt19937_64 rng_;
  std::map<std::string, long> last_;
  long clock_ = 0;
};

}  // namespace

RunResult run(Config c, const Scheduler& s, size_t max_steps, const TraceHook& on_trace) {
  Picker picker(s);
  RunResult res;
  for (size_t i = 0;; ++i) {
    if (c.done()) {
      res.status = RunStatus::DoneReached;
      break;
    }
    auto rs = enabled_redexes(c);
    if (rs.empty()) {
      res.status = RunStatus::StuckNotDone;
      break;
    }
    if (i >= max_steps) {
      res.status = RunStatus::BudgetExhausted;
      break;
    }
    std::string why;
    size_t k = picker.pick(c, rs, why);
    TraceEvent ev = describe_step(c, rs[k]);
    ev.step = i;
    ev.decision = why;
    c = step(c, rs[k]);
    res.steps = i + 1;
    if (on_trace) on_trace(ev, c);
  }
  res.final = std::move(c);
  return res;
}

std::string config_key(const Config& c) {
  // Threads sorted by their term and names, channels renumbered in that order.
  struct Row {
    std::string shape;
    const Thread* th;
  };
  std::vector<Row> rows;
  for (auto& [_, th] : c.threads) {
    std::ostringstream o;
    o << th.term.get();
    for (auto& [n, e] : th.env) o << ' ' << n << ':' << e.side;
    rows.push_back({o.str(), &th});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.shape < b.shape; });
  std::map<int, int> ren;
  auto chan = [&](int id) {
    auto [it, _] = ren.emplace(id, static_cast<int>(ren.size()));
    return it->second;
  };
  std::ostringstream o;
  for (auto& r : rows) {
    o << r.shape;
    for (auto& [_, e] : r.th->env) o << ' ' << chan(e.chan);
    o << ';';
  }
  std::vector<int> ids;
  for (auto& [id, _] : c.channels) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) { return chan(a) < chan(b); });
  for (int id : ids) {
    const Channel& ch = c.channels.at(id);
    o << '#' << chan(id);
    for (int s = 0; s < 2; ++s) {
      o << '[';
      for (auto& m : ch.q[s]) {
        if (m.k == Message::K::Tag)
          o << m.tag << ',';
        else {
          o << m.proc.get() << '(';
          for (auto& [n, e] : m.env) o << n << ':' << chan(e.chan) << '.' << e.side;
          o << "),";
        }
      }
      o << ']';
    }
  }
  return o.str();
}

bool is_weakly_terminating_probe(const Config& c, size_t budget, const BranchMeasure& m) {
  Scheduler mm;
  mm.kind = Scheduler::Kind::MinMeasure;
  mm.measure = m;
  if (run(c, mm, budget).status == RunStatus::DoneReached) return true;
  std::deque<Config> frontier{c};
  std::unordered_set<std::string> seen{config_key(c)};
  size_t expanded = 0;
  while (!frontier.empty() && expanded < budget) {
    Config cur = std::move(frontier.front());
    frontier.pop_front();
    ++expanded;
    if (cur.done()) return true;
    for (auto& r : enabled_redexes(cur)) {
      Config nx = step(cur, r);
      if (nx.done()) return true;
      if (seen.insert(config_key(nx)).second) frontier.push_back(std::move(nx));
    }
  }
  return false;
}

std::string describe(const Config& c) {
  std::ostringstream o;
  for (auto& [id, th] : c.threads) {
    o << "thread " << id << ": " << show(*th.term);
    for (auto& [n, e] : th.env) o << "  " << n << "=c" << e.chan << "." << e.side;
    o << "\n";
  }
  for (auto& [id, ch] : c.channels) {
    o << "channel c" << id << " (" << ch.name << ")";
    for (int s = 0; s < 2; ++s) {
      o << "  " << s << "->" << 1 - s << ":[";
      for (size_t i = 0; i < ch.q[s].size(); ++i)
        o << (i ? " " : "") << (ch.q[s][i].k == Message::K::Tag ? ch.q[s][i].tag : "(" + ch.q[s][i].bound + ")");
      o << "]";
    }
    o << "\n";
  }
  return o.str();
}

}  // namespace skit
