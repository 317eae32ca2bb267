#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nwtk/two_vpa.hpp"
#include "nwtk/vpa.hpp"

namespace nwtk {

// Two-way visibly pushdown transducer: a two-way VPA with an output word per
// rule, plus an optional look-around: an unambiguous one-way checker whose
// unique accepting run labels every input position; a guarded rule only fires
// when the label of the consumed position matches. Guards never apply to
// marker rules.
struct TwoVpt {
  TwoVpa a;
  std::vector<std::string> out_alph;
  std::vector<std::vector<int>> push_out, pop_out;  // token ids per rule

  bool has_lookaround = false;
  Vpa checker;
  std::vector<int> push_guard, pop_guard;  // checker state, or -1 = unguarded

  void validate() const;
  bool deterministic() const;  // guards with the same key must differ
  std::vector<std::string> out_tokens(const std::vector<int>& ids) const;
};

struct EvalStats {
  size_t steps = 0;
  size_t peak_stack = 0;     // maximum stack height during the run
  size_t configs_stored = 0;  // checked mode: distinct configurations recorded
};

enum class EvalMode { Streaming, Checked };

// Prevalidated machine with its rules indexed by (state, direction, symbol).
// Amortizes the setup cost of evaluation when the same (possibly very large)
// machine runs on many words; evaluate_d2vpt / evaluate_2vpt_all are
// one-shot wrappers around this.
class TwoVptRunner {
 public:
  explicit TwoVptRunner(const TwoVpt& t);  // validates; keeps a reference

  bool deterministic() const { return det_; }
  // Deterministic evaluation; see evaluate_d2vpt.
  std::optional<std::vector<std::string>> evaluate(const NestedWord& w,
                                                   EvalMode mode = EvalMode::Streaming,
                                                   EvalStats* stats = nullptr) const;
  // All outputs of accepting runs; see evaluate_2vpt_all.
  std::set<std::vector<std::string>> all_outputs(const NestedWord& w) const;

 private:
  const TwoVpt& t_;
  std::shared_ptr<const void> idx_;
  bool det_ = false;
};

// Deterministic evaluation on the marked tape. Returns the output word, or
// nullopt when the machine rejects (stuck, or looping: detected by a visited
// set in Checked mode, by exhausting the configuration-count budget in
// Streaming mode). Throws NotDeterministic for nondeterministic machines.
std::optional<std::vector<std::string>> evaluate_d2vpt(const TwoVpt& t, const NestedWord& w,
                                                       EvalMode mode = EvalMode::Streaming,
                                                       EvalStats* stats = nullptr);

// All outputs of accepting runs that never repeat a configuration
// (nondeterministic reference semantics; small words only).
std::set<std::vector<std::string>> evaluate_2vpt_all(const TwoVpt& t, const NestedWord& w);

// Inputs on which some accepting run produces an output accepted by m.
// Consumes outputs in temporal order through a determinized, completed m.
// Rejects machines with look-around (eliminate it first).
TwoVpa inverse_image(const TwoVpt& t, const Fsa& m);

struct TypeCheckResult {
  bool ok = true;
  std::optional<NestedWord> counterexample;  // input in the domain language
                                             // whose image leaves the range
                                             // (or that the machine rejects)
};

// Checks that every word of L(domain) is transformed and every output lands
// in L(range).
TypeCheckResult type_check(const TwoVpt& t, const Vpa& domain, const Fsa& range);

struct SingleUseResult {
  bool single_use = true;
  // Witness over the doubled alphabet (one position marked with !1): some
  // accepting run consumes the marked position twice from the same tracked
  // state.
  std::optional<NestedWord> witness;
  AlphabetRef marked_alph;
};

// The marked-alphabet product machine whose nonemptiness witnesses a
// double use of some position from a tracked state.
TwoVpa single_use_violation_machine(const TwoVpa& a, const std::vector<int>& tracked);

SingleUseResult is_single_use(const TwoVpa& a, const std::vector<int>& tracked);
SingleUseResult is_single_use(const TwoVpa& a);  // all states tracked

// Reference check by run enumeration (small words): true iff no accepting
// run (configurations repeating at most 3 times) consumes the same position
// twice from the same tracked state.
bool single_use_oracle(const TwoVpa& a, const NestedWord& w, const std::vector<int>& tracked);

}  // namespace nwtk
