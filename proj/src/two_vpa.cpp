#include "nwtk/two_vpa.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace nwtk {

namespace {

bool push_role_ok(const StructuredAlphabet& a, Dir d, int sym) {
  return (d == Dir::Fwd && a.is_call(sym)) || (d == Dir::Bwd && a.is_return(sym));
}

void check_sym(const StructuredAlphabet& a, int sym) {
  if (sym == kMarkL || sym == kMarkR) return;
  if (sym < 0 || sym >= a.num_symbols()) throw Error("BadSymbol", "rule symbol out of range");
}

}  // namespace

void TwoVpa::validate() const {
  if (!alph) throw Error("BadMachine", "missing alphabet");
  if (states.empty()) throw Error("BadMachine", "no states");
  if ((int)finals.size() != num_states()) throw Error("BadMachine", "finals size mismatch");
  if (initial < 0 || initial >= num_states()) throw Error("BadMachine", "initial out of range");
  if (stack_names.empty()) throw Error("BadMachine", "no stack symbols");
  auto chk_q = [&](int q) {
    if (q < 0 || q >= num_states()) throw Error("BadMachine", "rule state out of range");
  };
  auto chk_g = [&](int g) {
    if (g < 0 || g >= (int)stack_names.size())
      throw Error("BadMachine", "rule stack symbol out of range");
  };
  for (const auto& p : push_rules) {
    chk_q(p.q);
    chk_q(p.q2);
    chk_g(p.gamma);
    check_sym(*alph, p.sym);
    if (!push_role_ok(*alph, p.d, p.sym))
      throw Error("BadMachine", "push rule must consume a call forward or a return backward");
  }
  for (const auto& p : pop_rules) {
    chk_q(p.q);
    chk_q(p.q2);
    chk_g(p.gamma);
    check_sym(*alph, p.sym);
    if (push_role_ok(*alph, p.d, p.sym))
      throw Error("BadMachine", "pop rule must consume a return forward or a call backward");
    if (p.sym == kMarkL && p.d2 != Dir::Fwd)
      throw Error("BadMachine", "popping the left marker must turn the head forward");
  }
}

bool TwoVpa::deterministic() const {
  std::set<std::tuple<int, int, int>> pk;
  for (const auto& p : push_rules)
    if (!pk.emplace(p.q, (int)p.d, p.sym).second) return false;
  std::set<std::tuple<int, int, int, int>> ok;
  for (const auto& p : pop_rules)
    if (!ok.emplace(p.q, (int)p.d, p.sym, p.gamma).second) return false;
  return true;
}

std::vector<int> marked_tape(const NestedWord& w) {
  std::vector<int> tape;
  tape.reserve(w.size() + 2);
  tape.push_back(kMarkL);
  tape.insert(tape.end(), w.syms.begin(), w.syms.end());
  tape.push_back(kMarkR);
  return tape;
}

std::vector<Config2> step_2vpa(const TwoVpa& a, const std::vector<int>& tape, const Config2& c) {
  std::vector<Config2> out;
  int j = c.d == Dir::Fwd ? c.pos : c.pos - 1;  // tape index of the consumed symbol
  if (j < 0 || j >= (int)tape.size()) return out;
  int sym = tape[j];
  bool is_push = (c.d == Dir::Fwd) == a.alph->is_call(sym);
  int npos = c.d == Dir::Fwd ? c.pos + 1 : c.pos - 1;
  if (is_push) {
    for (const auto& p : a.push_rules) {
      if (p.q != c.q || p.d != c.d || p.sym != sym) continue;
      Config2 n{p.q2, npos, p.d2, c.stack};
      n.stack.push_back(p.gamma);
      out.push_back(std::move(n));
    }
  } else {
    if (c.stack.empty()) return out;
    int top = c.stack.back();
    for (const auto& p : a.pop_rules) {
      if (p.q != c.q || p.d != c.d || p.sym != sym || p.gamma != top) continue;
      Config2 n{p.q2, npos, p.d2, c.stack};
      n.stack.pop_back();
      out.push_back(std::move(n));
    }
  }
  return out;
}

namespace {

constexpr size_t kOracleConfigCap = 2'000'000;

// All configurations reachable from the given starts on the tape.
std::set<Config2> reach_configs(const TwoVpa& a, const std::vector<int>& tape,
                                std::vector<Config2> starts) {
  std::set<Config2> seen;
  std::deque<Config2> work;
  for (auto& s : starts)
    if (seen.insert(s).second) work.push_back(std::move(s));
  while (!work.empty()) {
    Config2 c = std::move(work.front());
    work.pop_front();
    for (auto& n : step_2vpa(a, tape, c)) {
      if (seen.size() > kOracleConfigCap)
        throw Error("ResourceLimit", "configuration graph too large");
      if (seen.insert(n).second) work.push_back(std::move(n));
    }
  }
  return seen;
}

}  // namespace

bool accepts_2vpa_oracle(const TwoVpa& a, const NestedWord& w) {
  auto tape = marked_tape(w);
  int T = (int)tape.size();
  auto seen = reach_configs(a, tape, {Config2{a.initial, 0, Dir::Fwd, {}}});
  for (const auto& c : seen)
    if (c.pos == T && c.d == Dir::Fwd && c.stack.empty() && a.finals[c.q]) return true;
  return false;
}

namespace {

void runs_dfs(const TwoVpa& a, const std::vector<int>& tape, std::vector<Config2>& path,
              std::set<Config2>& on_path, std::vector<std::vector<Config2>>& out, size_t max_runs,
              size_t& budget) {
  if (out.size() >= max_runs) return;
  if (budget-- == 0) throw Error("ResourceLimit", "run enumeration too large");
  const Config2& c = path.back();
  if (c.pos == (int)tape.size() && c.d == Dir::Fwd && c.stack.empty() && a.finals[c.q])
    out.push_back(path);
  for (auto& n : step_2vpa(a, tape, c)) {
    if (on_path.count(n)) continue;
    on_path.insert(n);
    path.push_back(n);
    runs_dfs(a, tape, path, on_path, out, max_runs, budget);
    path.pop_back();
    on_path.erase(n);
  }
}

}  // namespace

std::vector<std::vector<Config2>> enumerate_accepting_runs(const TwoVpa& a, const NestedWord& w,
                                                           size_t max_runs) {
  auto tape = marked_tape(w);
  std::vector<std::vector<Config2>> out;
  Config2 start{a.initial, 0, Dir::Fwd, {}};
  std::vector<Config2> path{start};
  std::set<Config2> on_path{start};
  size_t budget = 20'000'000;
  runs_dfs(a, tape, path, on_path, out, max_runs, budget);
  return out;
}

bool Traversal::operator<(const Traversal& o) const {
  if (!(ll == o.ll)) return ll < o.ll;
  if (!(lr == o.lr)) return lr < o.lr;
  if (!(rl == o.rl)) return rl < o.rl;
  return rr < o.rr;
}

size_t Traversal::hash() const {
  size_t h = ll.hash();
  h = h * 31 + lr.hash();
  h = h * 31 + rl.hash();
  h = h * 31 + rr.hash();
  return h;
}

Traversal traversal_oracle(const TwoVpa& a, const NestedWord& w) {
  const int n = a.num_states();
  const int len = w.size();
  Traversal t{Rel(n), Rel(n), Rel(n), Rel(n)};
  for (int p = 0; p < n; ++p) {
    auto from_l = reach_configs(a, w.syms, {Config2{p, 0, Dir::Fwd, {}}});
    for (const auto& c : from_l) {
      if (!c.stack.empty()) continue;
      if (c.pos == 0 && c.d == Dir::Bwd) t.ll.set(p, c.q);
      if (c.pos == len && c.d == Dir::Fwd) t.lr.set(p, c.q);
    }
    auto from_r = reach_configs(a, w.syms, {Config2{p, len, Dir::Bwd, {}}});
    for (const auto& c : from_r) {
      if (!c.stack.empty()) continue;
      if (c.pos == 0 && c.d == Dir::Bwd) t.rl.set(p, c.q);
      if (c.pos == len && c.d == Dir::Fwd) t.rr.set(p, c.q);
    }
  }
  return t;
}

namespace {

Quad<Rel> to_quad(const Traversal& t) { return {t.ll, t.lr, t.rl, t.rr}; }
Traversal from_quad(const Quad<Rel>& q) { return {q.ll, q.lr, q.rl, q.rr}; }

// Traversal quad of the factor w[begin..end).
Quad<Rel> fold_range(const RelAlg& alg, const TwoVpa& a, const NestedWord& w, int begin, int end) {
  Quad<Rel> acc = epsilon_quad(alg);
  int i = begin;
  while (i < end) {
    int j = w.match[i];
    Quad<Rel> inner = fold_range(alg, a, w, i + 1, j);
    acc = concat_quad(alg, acc, wrap_quad(alg, a, w.syms[i], inner, w.syms[j]));
    i = j + 1;
  }
  return acc;
}

}  // namespace

Traversal fold_traversal(const TwoVpa& a, const NestedWord& w) {
  RelAlg alg{&a, a.num_states()};
  return from_quad(fold_range(alg, a, w, 0, w.size()));
}

namespace {

bool accepting_traversal(const TwoVpa& a, const Traversal& t) {
  RelAlg alg{&a, a.num_states()};
  Quad<Rel> full = wrap_quad(alg, a, kMarkL, to_quad(t), kMarkR);
  for (int f = 0; f < a.num_states(); ++f)
    if (a.finals[f] && full.lr.get(a.initial, f)) return true;
  return false;
}

}  // namespace

bool accepts_2vpa(const TwoVpa& a, const NestedWord& w) {
  return accepting_traversal(a, fold_traversal(a, w));
}

int TraversalAlgebra::intern(const Traversal& t) {
  auto it = index_.find(t);
  if (it != index_.end()) return it->second;
  int id = (int)elems.size();
  elems.push_back(t);
  index_.emplace(t, id);
  return id;
}

int TraversalAlgebra::concat_idx(int i, int j) const {
  auto key = std::make_tuple(i, j);
  auto it = concat_memo_.find(key);
  if (it != concat_memo_.end()) return it->second;
  RelAlg alg{&machine, machine.num_states()};
  Traversal t = from_quad(concat_quad(alg, to_quad(elems[i]), to_quad(elems[j])));
  auto f = index_.find(t);
  if (f == index_.end()) throw Error("Internal", "algebra not closed under concat");
  concat_memo_.emplace(key, f->second);
  return f->second;
}

int TraversalAlgebra::wrap_idx(int c, int i, int r) const {
  auto key = std::make_tuple(c, i, r);
  auto it = wrap_memo_.find(key);
  if (it != wrap_memo_.end()) return it->second;
  RelAlg alg{&machine, machine.num_states()};
  Traversal t = from_quad(wrap_quad(alg, machine, c, to_quad(elems[i]), r));
  auto f = index_.find(t);
  if (f == index_.end()) throw Error("Internal", "algebra not closed under wrap");
  wrap_memo_.emplace(key, f->second);
  return f->second;
}

TraversalAlgebra compute_algebra(const TwoVpa& a, size_t max_elements) {
  a.validate();
  TraversalAlgebra out;
  out.machine = a;
  RelAlg alg{&out.machine, a.num_states()};
  out.unit = out.intern(from_quad(epsilon_quad(alg)));
  std::deque<int> work{out.unit};
  auto add = [&](const Traversal& t) {
    int before = out.size();
    int id = out.intern(t);
    if (out.size() > (int)max_elements) throw Error("ResourceLimit", "traversal algebra too large");
    if (id == before) work.push_back(id);
    return id;
  };
  const auto& al = *a.alph;
  while (!work.empty()) {
    int e = work.front();
    work.pop_front();
    for (int c = 0; c < al.num_calls(); ++c)
      for (int ri = 0; ri < al.num_returns(); ++ri) {
        int r = al.return_id(ri);
        Traversal t =
            from_quad(wrap_quad(alg, out.machine, c, to_quad(out.elems[e]), r));
        add(t);
      }
    // Pair e with everything known so far, both orders; elements added later
    // will in turn be paired against e when they are processed.
    for (int x = 0; x < out.size(); ++x) {
      add(from_quad(concat_quad(alg, to_quad(out.elems[e]), to_quad(out.elems[x]))));
      add(from_quad(concat_quad(alg, to_quad(out.elems[x]), to_quad(out.elems[e]))));
    }
  }
  out.accepting.resize(out.size());
  for (int i = 0; i < out.size(); ++i)
    out.accepting[i] = accepting_traversal(out.machine, out.elems[i]) ? 1 : 0;
  return out;
}

Vpa algebra_to_dvpa(const TraversalAlgebra& alg) {
  const auto& al = *alg.machine.alph;
  Vpa d;
  d.alph = alg.machine.alph;
  for (int i = 0; i < alg.size(); ++i) d.states.push_back("m" + std::to_string(i));
  d.initial = {alg.unit};
  d.finals.assign(alg.size(), 0);
  for (int i = 0; i < alg.size(); ++i) d.finals[i] = alg.accepting[i];
  // Stack symbol (c, m): the call read and the element reached before it.
  auto gidx = [&](int c, int m) { return c * alg.size() + m; };
  for (int c = 0; c < al.num_calls(); ++c)
    for (int m = 0; m < alg.size(); ++m)
      d.stack_names.push_back(al.name(c) + "|m" + std::to_string(m));
  for (int m = 0; m < alg.size(); ++m)
    for (int c = 0; c < al.num_calls(); ++c)
      d.push_rules.push_back({m, c, alg.unit, gidx(c, m)});
  for (int inner = 0; inner < alg.size(); ++inner)
    for (int ri = 0; ri < al.num_returns(); ++ri) {
      int r = al.return_id(ri);
      for (int c = 0; c < al.num_calls(); ++c)
        for (int m = 0; m < alg.size(); ++m) {
          int tgt = alg.concat_idx(m, alg.wrap_idx(c, inner, r));
          d.pop_rules.push_back({inner, r, gidx(c, m), tgt});
        }
    }
  return d;
}

Vpa two_vpa_to_dvpa(const TwoVpa& a, size_t max_elements) {
  return algebra_to_dvpa(compute_algebra(a, max_elements));
}

std::optional<NestedWord> two_vpa_witness(const TwoVpa& a, size_t max_elements) {
  return vpa_witness(two_vpa_to_dvpa(a, max_elements));
}

}  // namespace nwtk
