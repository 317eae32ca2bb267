#pragma once

#include <string>
#include <vector>

#include "nwtk/alphabet.hpp"

namespace nwtk {

// A well-nested word over a structured alphabet, with its matching computed.
// Positions are 0-based internally; the text format uses whitespace-separated
// symbol tokens. Immutable after construction.
struct NestedWord {
  AlphabetRef alph;
  std::vector<int> syms;   // symbol ids (never markers)
  std::vector<int> match;  // match[i] = index of the partner of position i
  int max_depth = 0;

  int size() const { return (int)syms.size(); }
  bool empty() const { return syms.empty(); }

  // Nesting depth of the gap before position i (i in 0..size()): the number of
  // calls opened before i and not yet closed.
  int depth_before(int i) const;

  bool operator==(const NestedWord& o) const { return syms == o.syms && *alph == *o.alph; }
};

NestedWord parse_nested_word(const std::vector<std::string>& tokens, const AlphabetRef& alph);
NestedWord parse_nested_word(const std::string& text, const AlphabetRef& alph);
// Builds a word directly from symbol ids; validates well-nestedness.
NestedWord make_nested_word(std::vector<int> syms, const AlphabetRef& alph);

std::string serialize(const NestedWord& w);
std::vector<std::string> split_tokens(const std::string& text);

NestedWord concat(const NestedWord& u, const NestedWord& v);
NestedWord wrap(int call_sym, const NestedWord& w, int return_sym);

// Every well-nested word of length <= max_length, exactly once, in
// length-then-lexicographic order (lexicographic on symbol ids).
std::vector<NestedWord> enumerate_nested_words(const AlphabetRef& alph, int max_length);

// Splits a word into its top-level blocks: each block is [call .. matching
// return]; returns the list of (start, end) index pairs (end = match of start).
std::vector<std::pair<int, int>> top_level_blocks(const NestedWord& w);

// Seeded random well-nested word with length <= max_length and depth <= max_depth.
NestedWord random_nested_word(const AlphabetRef& alph, int max_length, int max_depth,
                              unsigned long long seed);

}  // namespace nwtk
