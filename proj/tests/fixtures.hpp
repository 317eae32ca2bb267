#pragma once

#include <vector>

#include "nwtk/machine_io.hpp"
#include "nwtk/stst.hpp"
#include "nwtk/two_vpt.hpp"
#include "nwtk/vpa.hpp"

namespace fixtures {

using namespace nwtk;

// calls {c}, returns {r}.
AlphabetRef ab1();
// calls {a, b}, returns {r, s}.
AlphabetRef ab2();
// calls {x, y}, returns {u, v} -- the relabelers' output side.
AlphabetRef abxy();

// The block-sorting transducer over calls {1..n}, returns {r}: emits the
// current hedge with sibling blocks reordered by label, recursively.
TwoVpt sorting_transducer(int n);

// Lift a one-way machine to a two-way one (left-to-right sweep; a fresh
// start state consumes the left marker, finals consume the right one).
TwoVpa lift_vpa(const Vpa& a);
TwoVpt lift_vpt(const Vpt& t);

// Seeded random two-way automaton with total-ish marker rules.
TwoVpa random_2vpa(const AlphabetRef& alph, int n_states, int n_stack,
                   unsigned long long seed);

// Small machines (<= 4 states, <= 2 stack symbols) for the congruence suite.
std::vector<TwoVpa> morphism_machines();

// Ten machines spanning empty-by-finals, empty-by-stuck and nonempty cases.
std::vector<TwoVpa> emptiness_machines();

struct SingleUseCase {
  TwoVpa machine;
  std::vector<int> tracked;  // empty = all states
  const char* name;
};
std::vector<SingleUseCase> single_use_cases();

// Letter-to-letter relabelers ab2 -> abxy.
Vpt relabel_det();     // deterministic
Vpt relabel_codet();   // co-deterministic, single final
Vpt relabel_unamb();   // unambiguous, neither (annotates empty subhedges)

// Deterministic two-way transducers over abxy (second stages for compose).
TwoVpt copy_2vpt(const AlphabetRef& alph);         // identity sweep
TwoVpt double_copy_2vpt(const AlphabetRef& alph);  // w -> w w (three sweeps)

// Guarded fixtures: {machine with look-around}.
TwoVpt lookaround_depth_tagger();   // checker total; tags top-level calls
TwoVpt lookaround_depth_limiter();  // checker restricts the domain to depth <= 1

// Plain deterministic 2VPTs for the translation suite (no look-around).
std::vector<TwoVpt> translation_machines();

struct TypeTriple {
  TwoVpt t;
  Vpa domain;
  Fsa range;
  bool expect_ok;
  const char* name;
};
std::vector<TypeTriple> typecheck_triples();

// The exponential streaming transducer: (cr)^n -> a^(2^n - 1).
Stst exponential_stst();

}  // namespace fixtures
