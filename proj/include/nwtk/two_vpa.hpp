#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nwtk/rel.hpp"
#include "nwtk/vpa.hpp"

namespace nwtk {

enum class Dir : int { Bwd = 0, Fwd = 1 };
inline Dir flip(Dir d) { return d == Dir::Fwd ? Dir::Bwd : Dir::Fwd; }
inline const char* dir_token(Dir d) { return d == Dir::Fwd ? "fw" : "bw"; }

// Two-way VPA rules. A push rule fires when the head consumes a call moving
// forward or a return moving backward; a pop rule covers the two remaining
// cases. The head moves one step in the consumed direction, then continues
// in the rule's new direction.
struct Push2 {
  int q;
  Dir d;
  int sym;  // symbol id, or kMarkL / kMarkR
  int q2;
  Dir d2;
  int gamma;
};
struct Pop2 {
  int q;
  Dir d;
  int sym;
  int gamma;
  int q2;
  Dir d2;
};

// Two-way visibly pushdown automaton over marked words <L> w <R>. Head
// positions run 0..|w|+2 on the marked tape; a run starts in the initial
// state at position 0 moving forward with an empty stack and accepts in a
// final state at the rightmost position moving forward with an empty stack.
// Markers are ordinary symbols: the machine needs explicit rules for them
// (the left marker acts as a call, the right marker as a return). A pop rule
// reading <L> backward must turn the head forward again.
struct TwoVpa {
  AlphabetRef alph;
  std::vector<std::string> states;
  int initial = 0;
  std::vector<char> finals;
  std::vector<std::string> stack_names;
  std::vector<Push2> push_rules;
  std::vector<Pop2> pop_rules;

  int num_states() const { return (int)states.size(); }
  void validate() const;
  bool deterministic() const;  // at most one rule per (state, dir, symbol[, top])
};

// A configuration on a tape of length T: head position 0..T, next consume
// direction, current stack (bottom first).
struct Config2 {
  int q;
  int pos;
  Dir d;
  std::vector<int> stack;

  bool operator==(const Config2& o) const {
    return q == o.q && pos == o.pos && d == o.d && stack == o.stack;
  }
  bool operator<(const Config2& o) const {
    if (q != o.q) return q < o.q;
    if (pos != o.pos) return pos < o.pos;
    if (d != o.d) return (int)d < (int)o.d;
    return stack < o.stack;
  }
};

// The marked tape of w: <L> w <R> as symbol ids.
std::vector<int> marked_tape(const NestedWord& w);

// Successor configurations on the given tape.
std::vector<Config2> step_2vpa(const TwoVpa& a, const std::vector<int>& tape, const Config2& c);

// Reference acceptance by configuration-graph reachability on the marked tape.
bool accepts_2vpa_oracle(const TwoVpa& a, const NestedWord& w);

// All accepting runs on the marked tape that never repeat a configuration,
// as configuration sequences. Intended for small words only.
std::vector<std::vector<Config2>> enumerate_accepting_runs(const TwoVpa& a, const NestedWord& w,
                                                           size_t max_runs = (size_t)-1);

// ---------------------------------------------------------------------------
// Traversals: the behavior of a two-way machine on a factor, as four state
// relations indexed by the side the head enters (first index: l = from the
// left moving forward) and the side it leaves (second index: r = to the
// right moving forward).

struct Traversal {
  Rel ll, lr, rl, rr;

  bool operator==(const Traversal& o) const {
    return ll == o.ll && lr == o.lr && rl == o.rl && rr == o.rr;
  }
  bool operator<(const Traversal& o) const;
  size_t hash() const;
};

// Reference traversal by configuration-graph reachability on the bare
// (unmarked) factor w: reads past either end are stuck.
Traversal traversal_oracle(const TwoVpa& a, const NestedWord& w);

// ---------------------------------------------------------------------------
// Compositional traversal computation. The combinators are written once over
// a generic element algebra so that the same formulas drive both plain
// relations and relations annotated with output words.
//
// The algebra must provide:
//   using Elem = ...;
//   Elem zero(), id();
//   Elem compose(a, b)   -- diagrammatic: (x,z) if (x,y) in a and (y,z) in b
//   Elem unite(a, b), star(a);
//   Elem push_single(i), pop_single(i)  -- the single-edge element of rule i.

template <class E>
struct Quad {
  E ll, lr, rl, rr;
};

template <class A, class E = typename A::Elem>
Quad<E> epsilon_quad(const A& alg) {
  return {alg.zero(), alg.id(), alg.id(), alg.zero()};
}

template <class A, class E = typename A::Elem>
Quad<E> concat_quad(const A& alg, const Quad<E>& u, const Quad<E>& v) {
  E loop_l = alg.star(alg.compose(v.ll, u.rr));  // bounce between v's left wall and u's right wall
  E loop_r = alg.star(alg.compose(u.rr, v.ll));
  Quad<E> w;
  w.ll = alg.unite(u.ll, alg.compose(u.lr, alg.compose(loop_l, alg.compose(v.ll, u.rl))));
  w.lr = alg.compose(u.lr, alg.compose(loop_l, v.lr));
  w.rl = alg.compose(v.rl, alg.compose(loop_r, u.rl));
  w.rr = alg.unite(v.rr, alg.compose(v.rl, alg.compose(loop_r, alg.compose(u.rr, v.lr))));
  return w;
}

// Traversals of c w r from the traversals of w, where c is a call and r a
// return (markers allowed). Builds the elementary moves that consume c or r
// and then closes the bouncing behavior between the two ends.
template <class A, class E = typename A::Elem>
Quad<E> wrap_quad(const A& alg, const TwoVpa& m, int c, const Quad<E>& w, int r) {
  const int NG = (int)m.stack_names.size();
  auto zero = alg.zero();
  // Elementary factors, indexed by the exit direction (0 = Bwd, 1 = Fwd).
  // ZL[d]: enter at c from the left, come back out to the left.
  // ZR[d]: enter at r from the right, come back out to the right.
  // Tlr[d]: cross from c to r; Trl[d]: cross from r to c.
  E ZL[2] = {zero, zero}, ZR[2] = {zero, zero}, Tlr[2] = {zero, zero}, Trl[2] = {zero, zero};

  // Immediate U-turns on the wrapping symbols themselves (push then pop the
  // same symbol without entering w).
  for (size_t i = 0; i < m.push_rules.size(); ++i) {
    const auto& p = m.push_rules[i];
    for (size_t j = 0; j < m.pop_rules.size(); ++j) {
      const auto& o = m.pop_rules[j];
      if (p.gamma != o.gamma) continue;
      E e = alg.compose(alg.push_single((int)i), alg.pop_single((int)j));
      if (p.sym == c && p.d == Dir::Fwd && p.d2 == Dir::Bwd && o.sym == c && o.d == Dir::Bwd)
        ZL[(int)o.d2] = alg.unite(ZL[(int)o.d2], e);
      if (p.sym == r && p.d == Dir::Bwd && p.d2 == Dir::Fwd && o.sym == r && o.d == Dir::Fwd)
        ZR[(int)o.d2] = alg.unite(ZR[(int)o.d2], e);
    }
  }

  // Factors that traverse w, grouped by the stack symbol pushed on one end
  // and popped on the other.
  for (int g = 0; g < NG; ++g) {
    E c_in_fwd = zero, c_out_bwd[2] = {zero, zero};   // consume c fwd / bwd
    E r_in_bwd = zero, r_out_fwd[2] = {zero, zero};   // consume r bwd / fwd
    for (size_t i = 0; i < m.push_rules.size(); ++i) {
      const auto& p = m.push_rules[i];
      if (p.gamma != g) continue;
      if (p.sym == c && p.d == Dir::Fwd && p.d2 == Dir::Fwd)
        c_in_fwd = alg.unite(c_in_fwd, alg.push_single((int)i));
      if (p.sym == r && p.d == Dir::Bwd && p.d2 == Dir::Bwd)
        r_in_bwd = alg.unite(r_in_bwd, alg.push_single((int)i));
    }
    for (size_t j = 0; j < m.pop_rules.size(); ++j) {
      const auto& o = m.pop_rules[j];
      if (o.gamma != g) continue;
      if (o.sym == c && o.d == Dir::Bwd)
        c_out_bwd[(int)o.d2] = alg.unite(c_out_bwd[(int)o.d2], alg.pop_single((int)j));
      if (o.sym == r && o.d == Dir::Fwd)
        r_out_fwd[(int)o.d2] = alg.unite(r_out_fwd[(int)o.d2], alg.pop_single((int)j));
    }
    for (int d = 0; d < 2; ++d) {
      ZL[d] = alg.unite(ZL[d], alg.compose(c_in_fwd, alg.compose(w.ll, c_out_bwd[d])));
      ZR[d] = alg.unite(ZR[d], alg.compose(r_in_bwd, alg.compose(w.rr, r_out_fwd[d])));
      Tlr[d] = alg.unite(Tlr[d], alg.compose(c_in_fwd, alg.compose(w.lr, r_out_fwd[d])));
      Trl[d] = alg.unite(Trl[d], alg.compose(r_in_bwd, alg.compose(w.rl, c_out_bwd[d])));
    }
  }

  const int B = (int)Dir::Bwd, F = (int)Dir::Fwd;
  E zr_b_star = alg.star(ZR[B]);
  E zl_f_star = alg.star(ZL[F]);
  // Left-side loop: come back to the left wall still moving forward.
  E loop_l = alg.star(alg.unite(ZL[F], alg.compose(Tlr[B], alg.compose(zr_b_star, Trl[F]))));
  // Right-side loop: come back to the right wall still moving backward.
  E loop_r = alg.star(alg.unite(ZR[B], alg.compose(Trl[F], alg.compose(zl_f_star, Tlr[B]))));

  Quad<E> out;
  out.ll = alg.compose(
      loop_l, alg.unite(ZL[B], alg.compose(Tlr[B], alg.compose(zr_b_star, Trl[B]))));
  out.lr = alg.compose(
      loop_l, alg.unite(Tlr[F], alg.compose(Tlr[B], alg.compose(zr_b_star, ZR[F]))));
  out.rl = alg.compose(
      loop_r, alg.unite(Trl[B], alg.compose(Trl[F], alg.compose(zl_f_star, ZL[B]))));
  out.rr = alg.compose(
      loop_r, alg.unite(ZR[F], alg.compose(Trl[F], alg.compose(zl_f_star, Tlr[F]))));
  return out;
}

// Plain relation instance of the element algebra.
struct RelAlg {
  using Elem = Rel;
  const TwoVpa* m;
  int n;

  Rel zero() const { return Rel(n); }
  Rel id() const { return Rel::identity(n); }
  Rel compose(const Rel& a, const Rel& b) const { return a.compose(b); }
  Rel unite(const Rel& a, const Rel& b) const { return a.unite(b); }
  Rel star(const Rel& a) const { return a.star(); }
  Rel push_single(int i) const {
    Rel r(n);
    r.set(m->push_rules[i].q, m->push_rules[i].q2);
    return r;
  }
  Rel pop_single(int i) const {
    Rel r(n);
    r.set(m->pop_rules[i].q, m->pop_rules[i].q2);
    return r;
  }
};

// Traversal of w computed compositionally (top-level recursion over blocks).
Traversal fold_traversal(const TwoVpa& a, const NestedWord& w);

// Acceptance via the compositional semantics: wrap the traversal of w in the
// markers and ask for a path from the initial to a final state.
bool accepts_2vpa(const TwoVpa& a, const NestedWord& w);

// ---------------------------------------------------------------------------
// The finite algebra of all traversals reachable from the empty word under
// concatenation and wrapping, interned; drives determinization.

class TraversalAlgebra {
 public:
  TwoVpa machine;
  std::vector<Traversal> elems;
  int unit = 0;
  std::vector<char> accepting;  // per element

  int size() const { return (int)elems.size(); }
  int concat_idx(int i, int j) const;
  int wrap_idx(int c, int i, int r) const;  // c, r: proper symbol ids

 private:
  friend TraversalAlgebra compute_algebra(const TwoVpa&, size_t);
  int intern(const Traversal& t);
  std::map<Traversal, int> index_;
  mutable std::map<std::tuple<int, int>, int> concat_memo_;
  mutable std::map<std::tuple<int, int, int>, int> wrap_memo_;
};

TraversalAlgebra compute_algebra(const TwoVpa& a, size_t max_elements = (size_t)1 << 20);

// Deterministic one-way VPA equivalent to the two-way machine: states are
// algebra elements, the stack records (call, element before the call).
Vpa algebra_to_dvpa(const TraversalAlgebra& alg);
Vpa two_vpa_to_dvpa(const TwoVpa& a, size_t max_elements = (size_t)1 << 20);

std::optional<NestedWord> two_vpa_witness(const TwoVpa& a,
                                          size_t max_elements = (size_t)1 << 20);
inline bool is_empty_2vpa(const TwoVpa& a) { return !two_vpa_witness(a).has_value(); }

}  // namespace nwtk
