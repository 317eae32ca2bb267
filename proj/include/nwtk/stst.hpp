#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nwtk/two_vpt.hpp"

namespace nwtk {

// One term item: an output token, a current register, or a register saved on
// the stack (only meaningful inside pop updates).
struct RegItem {
  enum Kind { Tok, Reg, StackReg } kind;
  int id;
  bool operator==(const RegItem& o) const { return kind == o.kind && id == o.id; }
};
using Term = std::vector<RegItem>;

// Streaming tree transducer over nested words: a deterministic one-way
// machine with word-valued registers. A call evaluates the rule's store
// terms against the current registers, pushes (stack symbol, stored values)
// and resets every register to the empty word; a return pops and rebuilds
// the registers from a term over the popped values (StackReg) and the
// registers computed inside the subtree (Reg). Acceptance and output: a
// final term attached to the end state.
struct Stst {
  AlphabetRef alph;
  std::vector<std::string> states;
  int initial = 0;
  std::vector<std::string> stack_names;
  std::vector<std::string> registers;
  std::vector<std::string> out_alph;

  struct PushRule {
    int q, sym, q2, gamma;
    std::vector<Term> store;  // one term per register; StackReg items forbidden
  };
  struct PopRule {
    int q, sym, gamma, q2;
    std::vector<Term> update;  // one term per register
  };
  std::vector<PushRule> push_rules;
  std::vector<PopRule> pop_rules;
  std::vector<std::optional<Term>> final_out;  // per state; present = accepting

  int num_states() const { return (int)states.size(); }
  void validate() const;
  bool deterministic() const;
};

// Every register value is used at most once per rule (and per final term).
bool copyless(const Stst& s);

std::optional<std::vector<std::string>> evaluate_stst(const Stst& s, const NestedWord& w);

// Equivalent streaming transducer for a deterministic two-way transducer
// without look-around: states are traversal-algebra elements, registers hold
// the output produced along each traversal entry of the current hedge
// prefix. Throws ProducingCycle when some loop of the two-way machine can
// emit output (no bounded-register equivalent exists then).
Stst d2vpt_to_stst(const TwoVpt& t, size_t max_elements = (size_t)1 << 20);

}  // namespace nwtk
