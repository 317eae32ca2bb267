#include "nwtk/two_vpt.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

namespace nwtk {

void TwoVpt::validate() const {
  a.validate();
  if (push_out.size() != a.push_rules.size() || pop_out.size() != a.pop_rules.size())
    throw Error("BadMachine", "output list size mismatch");
  auto chk = [&](const std::vector<int>& ids) {
    for (int id : ids)
      if (id < 0 || id >= (int)out_alph.size())
        throw Error("BadMachine", "output token out of range");
  };
  for (const auto& o : push_out) chk(o);
  for (const auto& o : pop_out) chk(o);
  if (has_lookaround) {
    checker.validate();
    if (!(*checker.alph == *a.alph))
      throw Error("BadMachine", "checker must read the machine's input alphabet");
    if (push_guard.size() != a.push_rules.size() || pop_guard.size() != a.pop_rules.size())
      throw Error("BadMachine", "guard list size mismatch");
    auto chk_g = [&](int g, int sym) {
      if (g < -1 || g >= checker.num_states()) throw Error("BadMachine", "guard out of range");
      if (g >= 0 && StructuredAlphabet::is_marker(sym))
        throw Error("BadMachine", "marker rules cannot be guarded");
    };
    for (size_t i = 0; i < push_guard.size(); ++i) chk_g(push_guard[i], a.push_rules[i].sym);
    for (size_t i = 0; i < pop_guard.size(); ++i) chk_g(pop_guard[i], a.pop_rules[i].sym);
  } else {
    if (!push_guard.empty() || !pop_guard.empty())
      throw Error("BadMachine", "guards without a checker");
  }
}

bool TwoVpt::deterministic() const {
  // Rules sharing a key are fine when all carry distinct guards (at most one
  // fires per position, since the checker run is unique).
  std::map<std::tuple<int, int, int>, std::set<int>> pk;
  for (size_t i = 0; i < a.push_rules.size(); ++i) {
    const auto& p = a.push_rules[i];
    int g = has_lookaround ? push_guard[i] : -1;
    auto& s = pk[{p.q, (int)p.d, p.sym}];
    if (s.count(g) || (g == -1 && !s.empty()) || s.count(-1)) return false;
    s.insert(g);
  }
  std::map<std::tuple<int, int, int, int>, std::set<int>> ok;
  for (size_t i = 0; i < a.pop_rules.size(); ++i) {
    const auto& p = a.pop_rules[i];
    int g = has_lookaround ? pop_guard[i] : -1;
    auto& s = ok[{p.q, (int)p.d, p.sym, p.gamma}];
    if (s.count(g) || (g == -1 && !s.empty()) || s.count(-1)) return false;
    s.insert(g);
  }
  return true;
}

std::vector<std::string> TwoVpt::out_tokens(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(out_alph[id]);
  return out;
}

namespace {

size_t sat_mul(size_t a, size_t b) {
  if (a != 0 && b > (size_t)-1 / a) return (size_t)-1;
  return a * b;
}

// Labels of the consumed positions (empty optional = checker rejects, so no
// guarded rule ever fires).
std::optional<std::vector<int>> labels_for(const TwoVpt& t, const NestedWord& w) {
  if (!t.has_lookaround) return std::vector<int>{};
  try {
    return lookaround_labeling(t.checker, w);
  } catch (const Error& e) {
    if (e.code == "NoAcceptingRun") return std::nullopt;
    throw;
  }
}

// Rules bucketed by (state, direction, consumed symbol), so stepping a
// configuration touches only the handful of candidate rules.
struct RuleIndex {
  std::unordered_map<uint64_t, std::vector<int>> push, pop;

  static uint64_t key(int q, Dir d, int sym) {
    return ((uint64_t)(uint32_t)q << 33) | ((uint64_t)(d == Dir::Fwd) << 32) |
           (uint32_t)(sym + 2);
  }
  explicit RuleIndex(const TwoVpa& a) {
    push.reserve(a.push_rules.size());
    pop.reserve(a.pop_rules.size());
    for (size_t i = 0; i < a.push_rules.size(); ++i) {
      const auto& p = a.push_rules[i];
      push[key(p.q, p.d, p.sym)].push_back((int)i);
    }
    for (size_t i = 0; i < a.pop_rules.size(); ++i) {
      const auto& p = a.pop_rules[i];
      pop[key(p.q, p.d, p.sym)].push_back((int)i);
    }
  }
};

// Determinism check sharing the index (the member function rescans all rules,
// which is wasteful for machines produced by composition).
bool deterministic_with(const TwoVpt& t, const RuleIndex& idx) {
  if (t.has_lookaround) return t.deterministic();
  for (const auto& [k, v] : idx.push)
    if (v.size() > 1) return false;
  std::set<int> gs;
  for (const auto& [k, v] : idx.pop) {
    if (v.size() <= 1) continue;
    gs.clear();
    for (int i : v)
      if (!gs.insert(t.a.pop_rules[i].gamma).second) return false;
  }
  return true;
}

// Applicable rules of t at config c on the tape; guard filtered via labels
// (labels index real positions; tape index j maps to labels[j-1]).
template <class F>
void for_each_applicable(const TwoVpt& t, const RuleIndex& idx, const std::vector<int>& tape,
                         const std::optional<std::vector<int>>& labels, const Config2& c, F f) {
  int j = c.d == Dir::Fwd ? c.pos : c.pos - 1;
  if (j < 0 || j >= (int)tape.size()) return;
  int sym = tape[j];
  bool marker = StructuredAlphabet::is_marker(sym);
  auto guard_ok = [&](int g) {
    if (g < 0) return true;
    if (marker || !labels) return false;
    return (*labels)[j - 1] == g;
  };
  bool is_push = (c.d == Dir::Fwd) == t.a.alph->is_call(sym);
  int npos = c.d == Dir::Fwd ? c.pos + 1 : c.pos - 1;
  if (is_push) {
    auto it = idx.push.find(RuleIndex::key(c.q, c.d, sym));
    if (it == idx.push.end()) return;
    for (int i : it->second) {
      const auto& p = t.a.push_rules[i];
      if (t.has_lookaround && !guard_ok(t.push_guard[i])) continue;
      Config2 n{p.q2, npos, p.d2, c.stack};
      n.stack.push_back(p.gamma);
      f(std::move(n), t.push_out[i]);
    }
  } else {
    if (c.stack.empty()) return;
    int top = c.stack.back();
    auto it = idx.pop.find(RuleIndex::key(c.q, c.d, sym));
    if (it == idx.pop.end()) return;
    for (int i : it->second) {
      const auto& p = t.a.pop_rules[i];
      if (p.gamma != top) continue;
      if (t.has_lookaround && !guard_ok(t.pop_guard[i])) continue;
      Config2 n{p.q2, npos, p.d2, c.stack};
      n.stack.pop_back();
      f(std::move(n), t.pop_out[i]);
    }
  }
}

}  // namespace

TwoVptRunner::TwoVptRunner(const TwoVpt& t) : t_(t) {
  t.validate();
  auto idx = std::make_shared<RuleIndex>(t.a);
  det_ = deterministic_with(t, *idx);
  idx_ = std::move(idx);
}

std::optional<std::vector<std::string>> TwoVptRunner::evaluate(const NestedWord& w,
                                                               EvalMode mode,
                                                               EvalStats* stats) const {
  const TwoVpt& t = t_;
  const RuleIndex& idx = *static_cast<const RuleIndex*>(idx_.get());
  if (!det_) throw Error("NotDeterministic", "evaluation needs a deterministic machine");
  auto labels = labels_for(t, w);
  if (t.has_lookaround && !labels) return std::nullopt;  // checker rejects: no run
  auto tape = marked_tape(w);
  const int T = (int)tape.size();
  // A deterministic run exceeding the number of distinct configurations must
  // be looping.
  size_t budget = sat_mul(
      sat_mul((size_t)t.a.num_states(), 2 * (size_t)(T + 1)),
      [&] {
        size_t p = 1;
        for (int i = 0; i < w.max_depth + 1; ++i)
          p = sat_mul(p, std::max<size_t>(1, t.a.stack_names.size()));
        return p;
      }());
  EvalStats local;
  EvalStats& st = stats ? *stats : local;
  st = EvalStats{};
  std::set<Config2> visited;
  Config2 cur{t.a.initial, 0, Dir::Fwd, {}};
  std::vector<int> out;
  for (;;) {
    if (cur.pos == T && cur.d == Dir::Fwd && cur.stack.empty())
      return t.a.finals[cur.q] ? std::optional(t.out_tokens(out)) : std::nullopt;
    if (mode == EvalMode::Checked) {
      if (!visited.insert(cur).second) return std::nullopt;  // diverged
      st.configs_stored = visited.size();
    } else if (st.steps >= budget) {
      return std::nullopt;  // diverged
    }
    int found = 0;
    Config2 next;
    const std::vector<int>* rule_out = nullptr;
    for_each_applicable(t, idx, tape, labels, cur, [&](Config2 n, const std::vector<int>& o) {
      ++found;
      next = std::move(n);
      rule_out = &o;
    });
    if (found == 0) return std::nullopt;
    if (found > 1) throw Error("NotDeterministic", "multiple rules fired");
    out.insert(out.end(), rule_out->begin(), rule_out->end());
    cur = std::move(next);
    ++st.steps;
    st.peak_stack = std::max(st.peak_stack, cur.stack.size());
  }
}

std::optional<std::vector<std::string>> evaluate_d2vpt(const TwoVpt& t, const NestedWord& w,
                                                       EvalMode mode, EvalStats* stats) {
  return TwoVptRunner(t).evaluate(w, mode, stats);
}

namespace {

void all_dfs(const TwoVpt& t, const RuleIndex& idx, const std::vector<int>& tape,
             const std::optional<std::vector<int>>& labels, const Config2& cur,
             std::set<Config2>& on_path, std::vector<int>& out,
             std::set<std::vector<std::string>>& results, size_t& budget) {
  if (budget-- == 0) throw Error("ResourceLimit", "run enumeration too large");
  if (cur.pos == (int)tape.size() && cur.d == Dir::Fwd && cur.stack.empty() && t.a.finals[cur.q])
    results.insert(t.out_tokens(out));
  for_each_applicable(t, idx, tape, labels, cur, [&](Config2 n, const std::vector<int>& o) {
    if (on_path.count(n)) return;
    on_path.insert(n);
    size_t mark = out.size();
    out.insert(out.end(), o.begin(), o.end());
    all_dfs(t, idx, tape, labels, n, on_path, out, results, budget);
    out.resize(mark);
    on_path.erase(n);
  });
}

}  // namespace

std::set<std::vector<std::string>> TwoVptRunner::all_outputs(const NestedWord& w) const {
  const TwoVpt& t = t_;
  const RuleIndex& idx = *static_cast<const RuleIndex*>(idx_.get());
  auto labels = labels_for(t, w);
  if (t.has_lookaround && !labels) return {};  // checker rejects: no run
  auto tape = marked_tape(w);
  std::set<std::vector<std::string>> results;
  Config2 start{t.a.initial, 0, Dir::Fwd, {}};
  std::set<Config2> on_path{start};
  std::vector<int> out;
  size_t budget = 20'000'000;
  all_dfs(t, idx, tape, labels, start, on_path, out, results, budget);
  return results;
}

std::set<std::vector<std::string>> evaluate_2vpt_all(const TwoVpt& t, const NestedWord& w) {
  return TwoVptRunner(t).all_outputs(w);
}

TwoVpa inverse_image(const TwoVpt& t, const Fsa& m) {
  t.validate();
  if (t.has_lookaround)
    throw Error("HasLookAround", "eliminate the look-around before inverse images");
  Fsa md = determinize_fsa(m);
  auto delta = [&](int p, const std::vector<int>& out_ids) -> std::optional<int> {
    for (int id : out_ids) {
      auto s = md.lookup_sym(t.out_alph[id]);
      if (!s) return std::nullopt;
      bool moved = false;
      for (auto [q, sym, q2] : md.trans)
        if (q == p && sym == *s) {
          p = q2;
          moved = true;
          break;
        }
      if (!moved) return std::nullopt;
    }
    return p;
  };
  const int np = md.num_states();
  TwoVpa out;
  out.alph = t.a.alph;
  auto sid = [&](int q, int p) { return q * np + p; };
  for (int q = 0; q < t.a.num_states(); ++q)
    for (int p = 0; p < np; ++p) out.states.push_back(t.a.states[q] + "&" + md.states[p]);
  out.initial = sid(t.a.initial, md.initial[0]);
  out.finals.assign(out.states.size(), 0);
  for (int q = 0; q < t.a.num_states(); ++q)
    if (t.a.finals[q])
      for (int p = 0; p < np; ++p)
        if (md.finals[p]) out.finals[sid(q, p)] = 1;
  out.stack_names = t.a.stack_names;
  for (size_t i = 0; i < t.a.push_rules.size(); ++i) {
    const auto& r = t.a.push_rules[i];
    for (int p = 0; p < np; ++p) {
      auto p2 = delta(p, t.push_out[i]);
      if (p2) out.push_rules.push_back({sid(r.q, p), r.d, r.sym, sid(r.q2, *p2), r.d2, r.gamma});
    }
  }
  for (size_t i = 0; i < t.a.pop_rules.size(); ++i) {
    const auto& r = t.a.pop_rules[i];
    for (int p = 0; p < np; ++p) {
      auto p2 = delta(p, t.pop_out[i]);
      if (p2) out.pop_rules.push_back({sid(r.q, p), r.d, r.sym, r.gamma, sid(r.q2, *p2), r.d2});
    }
  }
  return out;
}

TypeCheckResult type_check(const TwoVpt& t, const Vpa& domain, const Fsa& range) {
  Fsa md = determinize_fsa(range);
  Fsa mc = md;
  for (auto& f : mc.finals) f = f ? 0 : 1;
  TwoVpa bad_out = inverse_image(t, mc);
  Fsa uni;
  uni.alphabet = t.out_alph;
  uni.states = {"u"};
  uni.initial = {0};
  uni.finals = {1};
  for (int s = 0; s < (int)uni.alphabet.size(); ++s) uni.trans.emplace_back(0, s, 0);
  TwoVpa dom = inverse_image(t, uni);

  auto w1 = vpa_witness(intersect_vpa(domain, two_vpa_to_dvpa(bad_out)));
  auto w2 = vpa_witness(intersect_vpa(domain, complement_dvpa(two_vpa_to_dvpa(dom))));
  TypeCheckResult res;
  if (w1 && (!w2 || w1->size() <= w2->size()))
    res.counterexample = w1;
  else if (w2)
    res.counterexample = w2;
  res.ok = !res.counterexample.has_value();
  return res;
}

// ---------------------------------------------------------------------------
// Single-use: no accepting run consumes the same input position twice from
// the same tracked state. Decided by marking one position of the input (a
// doubled alphabet), guessing a tracked state, and counting how often the
// simulated machine consumes the marked position from it.

namespace {

AlphabetRef doubled_alphabet(const StructuredAlphabet& al) {
  std::vector<std::string> calls, rets;
  for (const auto& c : al.call_names()) {
    calls.push_back(c + "!0");
    calls.push_back(c + "!1");
  }
  for (const auto& r : al.return_names()) {
    rets.push_back(r + "!0");
    rets.push_back(r + "!1");
  }
  return make_alphabet(calls, rets);
}

}  // namespace

TwoVpa single_use_violation_machine(const TwoVpa& a, const std::vector<int>& tracked) {
  a.validate();
  std::vector<int> trk = tracked;
  std::sort(trk.begin(), trk.end());
  trk.erase(std::unique(trk.begin(), trk.end()), trk.end());
  for (int q : trk)
    if (q < 0 || q >= a.num_states()) throw Error("BadState", "tracked state out of range");
  const int K = (int)trk.size();
  const auto& al = *a.alph;
  AlphabetRef dal = doubled_alphabet(al);
  // Doubled ids: call c -> 2c + mark; return (id c0+j) -> 2*num_calls + 2j + mark.
  auto dsym = [&](int sym, int mark) {
    if (StructuredAlphabet::is_marker(sym)) return sym;
    if (al.is_call(sym)) return 2 * sym + mark;
    return 2 * al.num_calls() + 2 * (sym - al.num_calls()) + mark;
  };

  TwoVpa b;
  b.alph = dal;
  // 0: right sweep, no mark seen; 1: right sweep, one mark; 2: left sweep;
  // then simulation states (state of a, tracked choice, use count 0/1/2).
  b.states = {"sweepR0", "sweepR1", "sweepL"};
  auto sim = [&](int q, int k, int f) { return 3 + (q * K + k) * 3 + f; };
  for (int q = 0; q < a.num_states(); ++q)
    for (int k = 0; k < K; ++k)
      for (int f = 0; f < 3; ++f)
        b.states.push_back(a.states[q] + "?" + a.states[trk[k]] + "?" + std::to_string(f));
  b.initial = 0;
  b.finals.assign(b.states.size(), 0);
  for (int q = 0; q < a.num_states(); ++q)
    if (a.finals[q])
      for (int k = 0; k < K; ++k) b.finals[sim(q, k, 2)] = 1;
  b.stack_names.push_back("sweep");
  for (const auto& g : a.stack_names) b.stack_names.push_back(g);

  // Right sweep: push a dummy on the left marker and every call, pop it on
  // every return; count marks; bounce left at the right marker.
  b.push_rules.push_back({0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0});
  for (int cnt = 0; cnt < 2; ++cnt)
    for (int c = 0; c < al.num_calls(); ++c)
      for (int mark = 0; mark < 2; ++mark) {
        int nc = cnt + mark;
        if (nc > 1) continue;
        b.push_rules.push_back({cnt, Dir::Fwd, dsym(c, mark), nc, Dir::Fwd, 0});
      }
  for (int cnt = 0; cnt < 2; ++cnt)
    for (int ri = 0; ri < al.num_returns(); ++ri)
      for (int mark = 0; mark < 2; ++mark) {
        int nc = cnt + mark;
        if (nc > 1) continue;
        b.pop_rules.push_back({cnt, Dir::Fwd, dsym(al.return_id(ri), mark), 0, nc, Dir::Fwd});
      }
  b.pop_rules.push_back({1, Dir::Fwd, kMarkR, 0, 2, Dir::Bwd});
  // Left sweep back to the left marker, then start the simulation with a
  // guessed tracked state.
  b.push_rules.push_back({2, Dir::Bwd, kMarkR, 2, Dir::Bwd, 0});
  for (int ri = 0; ri < al.num_returns(); ++ri)
    for (int mark = 0; mark < 2; ++mark)
      b.push_rules.push_back({2, Dir::Bwd, dsym(al.return_id(ri), mark), 2, Dir::Bwd, 0});
  for (int c = 0; c < al.num_calls(); ++c)
    for (int mark = 0; mark < 2; ++mark)
      b.pop_rules.push_back({2, Dir::Bwd, dsym(c, mark), 0, 2, Dir::Bwd});
  for (int k = 0; k < K; ++k)
    b.pop_rules.push_back({2, Dir::Bwd, kMarkL, 0, sim(a.initial, k, 0), Dir::Fwd});

  // Simulation on the projection; a consumed marked symbol from the guessed
  // state bumps the use count (saturating at 2).
  auto bump = [&](int q, int k, int f, int mark) {
    return (mark && q == trk[k]) ? std::min(f + 1, 2) : f;
  };
  for (const auto& r : a.push_rules) {
    bool marker = StructuredAlphabet::is_marker(r.sym);
    for (int k = 0; k < K; ++k)
      for (int f = 0; f < 3; ++f)
        for (int mark = 0; mark < (marker ? 1 : 2); ++mark)
          b.push_rules.push_back({sim(r.q, k, f), r.d, dsym(r.sym, mark),
                                  sim(r.q2, k, marker ? f : bump(r.q, k, f, mark)), r.d2,
                                  r.gamma + 1});
  }
  for (const auto& r : a.pop_rules) {
    bool marker = StructuredAlphabet::is_marker(r.sym);
    for (int k = 0; k < K; ++k)
      for (int f = 0; f < 3; ++f)
        for (int mark = 0; mark < (marker ? 1 : 2); ++mark)
          b.pop_rules.push_back({sim(r.q, k, f), r.d, dsym(r.sym, mark), r.gamma + 1,
                                 sim(r.q2, k, marker ? f : bump(r.q, k, f, mark)), r.d2});
  }
  return b;
}

SingleUseResult is_single_use(const TwoVpa& a, const std::vector<int>& tracked) {
  TwoVpa b = single_use_violation_machine(a, tracked);
  SingleUseResult res;
  res.marked_alph = b.alph;
  res.witness = two_vpa_witness(b);
  res.single_use = !res.witness.has_value();
  return res;
}

SingleUseResult is_single_use(const TwoVpa& a) {
  std::vector<int> all(a.num_states());
  for (int i = 0; i < a.num_states(); ++i) all[i] = i;
  return is_single_use(a, all);
}

namespace {

bool su_dfs(const TwoVpa& a, const std::vector<int>& tape, const Config2& cur,
            std::map<Config2, int>& cfg_count, std::map<std::pair<int, int>, int>& visits,
            const std::set<int>& trk, size_t& budget) {
  if (budget-- == 0) throw Error("ResourceLimit", "run enumeration too large");
  if (cur.pos == (int)tape.size() && cur.d == Dir::Fwd && cur.stack.empty() && a.finals[cur.q]) {
    for (const auto& [key, cnt] : visits)
      if (cnt >= 2 && trk.count(key.first)) return true;  // violation found
  }
  int j = cur.d == Dir::Fwd ? cur.pos : cur.pos - 1;
  bool real = j >= 1 && j + 1 < (int)tape.size();
  for (const Config2& n : step_2vpa(a, tape, cur)) {
    auto& cc = cfg_count[n];
    if (cc >= 3) continue;
    ++cc;
    auto key = std::make_pair(cur.q, j);
    if (real) ++visits[key];
    bool bad = su_dfs(a, tape, n, cfg_count, visits, trk, budget);
    if (real) --visits[key];
    --cc;
    if (bad) return true;
  }
  return false;
}

}  // namespace

bool single_use_oracle(const TwoVpa& a, const NestedWord& w, const std::vector<int>& tracked) {
  auto tape = marked_tape(w);
  std::set<int> trk(tracked.begin(), tracked.end());
  Config2 start{a.initial, 0, Dir::Fwd, {}};
  std::map<Config2, int> cfg_count;
  cfg_count[start] = 1;
  std::map<std::pair<int, int>, int> visits;
  size_t budget = 50'000'000;
  return !su_dfs(a, tape, start, cfg_count, visits, trk, budget);
}

}  // namespace nwtk
