#include "nwtk/nested_word.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace nwtk {

int NestedWord::depth_before(int i) const {
  int d = 0;
  for (int k = 0; k < i && k < (int)syms.size(); ++k)
    d += alph->is_call(syms[k]) ? 1 : -1;
  return d;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

NestedWord make_nested_word(std::vector<int> syms, const AlphabetRef& alph) {
  NestedWord w;
  w.alph = alph;
  w.syms = std::move(syms);
  w.match.assign(w.syms.size(), -1);
  std::vector<int> stack;
  int depth = 0;
  for (int i = 0; i < (int)w.syms.size(); ++i) {
    int s = w.syms[i];
    if (s < 0 || s >= alph->num_symbols()) throw Error("UnknownSymbol", "symbol id out of range");
    if (alph->is_call(s)) {
      stack.push_back(i);
      ++depth;
      w.max_depth = std::max(w.max_depth, depth);
    } else {
      if (stack.empty())
        throw Error("NotWellNested", "unmatched return at position " + std::to_string(i + 1));
      int j = stack.back();
      stack.pop_back();
      --depth;
      w.match[j] = i;
      w.match[i] = j;
    }
  }
  if (!stack.empty())
    throw Error("NotWellNested",
                "unmatched call at position " + std::to_string(stack.back() + 1));
  return w;
}

NestedWord parse_nested_word(const std::vector<std::string>& tokens, const AlphabetRef& alph) {
  std::vector<int> syms;
  syms.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto id = alph->lookup(t);
    if (!id || StructuredAlphabet::is_marker(*id)) throw Error("UnknownSymbol", t);
    syms.push_back(*id);
  }
  return make_nested_word(std::move(syms), alph);
}

NestedWord parse_nested_word(const std::string& text, const AlphabetRef& alph) {
  return parse_nested_word(split_tokens(text), alph);
}

std::string serialize(const NestedWord& w) {
  std::string out;
  for (int i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += w.alph->name(w.syms[i]);
  }
  return out;
}

NestedWord concat(const NestedWord& u, const NestedWord& v) {
  if (!(*u.alph == *v.alph)) throw Error("AlphabetMismatch", "concat over different alphabets");
  NestedWord w;
  w.alph = u.alph;
  w.syms = u.syms;
  w.syms.insert(w.syms.end(), v.syms.begin(), v.syms.end());
  w.match = u.match;
  for (int m : v.match) w.match.push_back(m + u.size());
  w.max_depth = std::max(u.max_depth, v.max_depth);
  return w;
}

NestedWord wrap(int call_sym, const NestedWord& w, int return_sym) {
  if (!w.alph->is_call(call_sym) || !w.alph->is_return(return_sym) ||
      StructuredAlphabet::is_marker(call_sym) || StructuredAlphabet::is_marker(return_sym))
    throw Error("BadSymbol", "wrap needs a proper call and return symbol");
  NestedWord out;
  out.alph = w.alph;
  out.syms.reserve(w.size() + 2);
  out.syms.push_back(call_sym);
  out.syms.insert(out.syms.end(), w.syms.begin(), w.syms.end());
  out.syms.push_back(return_sym);
  out.match.assign(out.syms.size(), -1);
  out.match[0] = w.size() + 1;
  out.match[w.size() + 1] = 0;
  for (int i = 0; i < w.size(); ++i) out.match[i + 1] = w.match[i] + 1;
  out.max_depth = w.max_depth + 1;
  return out;
}

std::vector<std::pair<int, int>> top_level_blocks(const NestedWord& w) {
  std::vector<std::pair<int, int>> out;
  int i = 0;
  while (i < w.size()) {
    out.emplace_back(i, w.match[i]);
    i = w.match[i] + 1;
  }
  return out;
}

namespace {
// Generates symbol-id sequences of exactly length n that are well-nested,
// in lexicographic order, appending to out.
void gen_exact(const AlphabetRef& alph, int n, std::vector<int>& cur, int open,
               std::vector<NestedWord>& out) {
  if ((int)cur.size() == n) {
    if (open == 0) out.push_back(make_nested_word(cur, alph));
    return;
  }
  int remaining = n - (int)cur.size();
  for (int s = 0; s < alph->num_symbols(); ++s) {
    bool call = alph->is_call(s);
    int new_open = open + (call ? 1 : -1);
    if (new_open < 0 || new_open > remaining - 1) continue;
    cur.push_back(s);
    gen_exact(alph, n, cur, new_open, out);
    cur.pop_back();
  }
}
}  // namespace

std::vector<NestedWord> enumerate_nested_words(const AlphabetRef& alph, int max_length) {
  std::vector<NestedWord> out;
  std::vector<int> cur;
  for (int n = 0; n <= max_length; n += 2) gen_exact(alph, n, cur, 0, out);
  return out;
}

NestedWord random_nested_word(const AlphabetRef& alph, int max_length, int max_depth,
                              unsigned long long seed) {
  std::mt19937_64 rng(seed);
  int target = (int)(rng() % (unsigned)(max_length + 1)) & ~1;
  std::vector<int> syms;
  int open = 0;
  while ((int)syms.size() < target) {
    int remaining = target - (int)syms.size();
    bool can_call = open < max_depth && open + 1 <= remaining - 1;
    bool can_ret = open > 0;
    bool call;
    if (can_call && can_ret)
      call = (rng() & 1) != 0;
    else if (can_call)
      call = true;
    else if (can_ret)
      call = false;
    else
      break;
    if (call) {
      syms.push_back(alph->call_id((int)(rng() % (unsigned)alph->num_calls())));
      ++open;
    } else {
      syms.push_back(alph->return_id((int)(rng() % (unsigned)alph->num_returns())));
      --open;
    }
  }
  while (open > 0) {
    syms.push_back(alph->return_id((int)(rng() % (unsigned)alph->num_returns())));
    --open;
  }
  return make_nested_word(std::move(syms), alph);
}

}  // namespace nwtk
