#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nwtk/nested_word.hpp"

namespace nwtk {

struct VpaPushRule {
  int q, sym, q2, gamma;
};
struct VpaPopRule {
  int q, sym, gamma, q2;
};

// One-way visibly pushdown automaton. Calls push, returns pop. Acceptance:
// a run from an initial state over the whole (well-nested) word ends in a
// final state (stack is necessarily empty).
struct Vpa {
  AlphabetRef alph;
  std::vector<std::string> states;
  std::vector<int> initial;
  std::vector<char> finals;  // size |states|
  std::vector<std::string> stack_names;
  std::vector<VpaPushRule> push_rules;
  std::vector<VpaPopRule> pop_rules;

  int num_states() const { return (int)states.size(); }
  void validate() const;
  bool deterministic() const;
  bool codeterministic() const;
};

// One-way transducer: a VPA plus an output word per rule. Outputs are plain
// tokens; for letter-to-letter machines each push rule emits exactly one
// token (a call of the output alphabet) and each pop rule one return token.
struct Vpt {
  Vpa a;
  std::vector<std::string> out_alph;               // token universe
  std::vector<std::vector<int>> push_out, pop_out;  // token ids per rule

  void validate() const;
  bool letter_to_letter() const;
  std::vector<std::string> out_tokens(const std::vector<int>& ids) const;
};

// Plain finite automaton over output tokens (for inverse image / typecheck).
struct Fsa {
  std::vector<std::string> alphabet;
  std::vector<std::string> states;
  std::vector<int> initial;
  std::vector<char> finals;
  std::vector<std::tuple<int, int, int>> trans;  // (q, sym, q')

  int num_states() const { return (int)states.size(); }
  std::optional<int> lookup_sym(const std::string& tok) const;
  bool accepts(const std::vector<std::string>& word) const;
};

Fsa determinize_fsa(const Fsa& m);  // total, single initial

std::vector<int> run_vpa(const Vpa& a, const NestedWord& w);
bool accepts_vpa(const Vpa& a, const NestedWord& w);

// nullopt when the language is empty; otherwise a shortest witness.
std::optional<NestedWord> vpa_witness(const Vpa& a);
inline bool is_empty_vpa(const Vpa& a) { return !vpa_witness(a).has_value(); }

Vpa determinize_vpa(const Vpa& a);
// Adds a sink so every (state, call) and (state, return, top) has a rule.
Vpa complete_vpa(const Vpa& a);
// Complement of a deterministic machine (completes it first).
Vpa complement_dvpa(const Vpa& a);
bool is_unambiguous(const Vpa& a);
Vpa product_vpa_fsa(const Vpa& a, const Fsa& m);
// Synchronized product: L(result) = L(a) n L(b); both over the same alphabet.
Vpa intersect_vpa(const Vpa& a, const Vpa& b);

std::set<std::vector<std::string>> evaluate_vpt(const Vpt& t, const NestedWord& w);

// For an unambiguous checker accepting w: the state of its unique accepting
// run just before each position (size |w|). Throws NoAcceptingRun.
std::vector<int> lookaround_labeling(const Vpa& checker, const NestedWord& w);

// Decomposition of an unambiguous VPT into a deterministic first stage and a
// co-deterministic letter-to-letter relabeling: t == t1 after t2 (t2 runs
// first). Throws NotUnambiguous.
std::pair<Vpt, Vpt> codeterminize_l2l(const Vpt& t);

}  // namespace nwtk
