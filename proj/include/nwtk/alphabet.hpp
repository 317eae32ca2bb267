#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nwtk/error.hpp"

namespace nwtk {

// Left/right end markers. They are not part of any user alphabet; two-way
// machines address them with these pseudo symbol ids. The left marker
// behaves like a call symbol, the right marker like a return symbol.
constexpr int kMarkL = -1;
constexpr int kMarkR = -2;

// Token spelling of the markers in words, rules and machine files.
inline const std::string kMarkLName = "<L>";
inline const std::string kMarkRName = "<R>";

// An alphabet split into call symbols and return symbols. Symbols are interned:
// ids 0..calls-1 are calls, then returns. Immutable after construction.
class StructuredAlphabet {
 public:
  StructuredAlphabet(std::vector<std::string> calls, std::vector<std::string> returns)
      : calls_(std::move(calls)), returns_(std::move(returns)) {
    if (calls_.empty() || returns_.empty())
      throw Error("BadAlphabet", "calls and returns must be nonempty");
    int id = 0;
    for (const auto& c : calls_) intern(c, id++);
    for (const auto& r : returns_) intern(r, id++);
  }

  int num_calls() const { return (int)calls_.size(); }
  int num_returns() const { return (int)returns_.size(); }
  int num_symbols() const { return num_calls() + num_returns(); }

  // True for calls, including the left marker.
  static bool is_marker(int sym) { return sym < 0; }
  bool is_call(int sym) const {
    if (sym == kMarkL) return true;
    if (sym == kMarkR) return false;
    return sym < num_calls();
  }
  bool is_return(int sym) const { return !is_call(sym); }

  const std::string& name(int sym) const {
    if (sym == kMarkL) return kMarkLName;
    if (sym == kMarkR) return kMarkRName;
    if (sym < 0 || sym >= num_symbols()) throw Error("BadSymbol", "symbol id out of range");
    return sym < num_calls() ? calls_[sym] : returns_[sym - num_calls()];
  }

  std::optional<int> lookup(const std::string& tok) const {
    if (tok == kMarkLName) return kMarkL;
    if (tok == kMarkRName) return kMarkR;
    auto it = by_name_.find(tok);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  int call_id(int call_index) const { return call_index; }
  int return_id(int return_index) const { return num_calls() + return_index; }
  const std::vector<std::string>& call_names() const { return calls_; }
  const std::vector<std::string>& return_names() const { return returns_; }

  bool operator==(const StructuredAlphabet& o) const {
    return calls_ == o.calls_ && returns_ == o.returns_;
  }

 private:
  void intern(const std::string& s, int id) {
    if (s.empty()) throw Error("BadAlphabet", "empty symbol name");
    if (s == kMarkLName || s == kMarkRName)
      throw Error("BadAlphabet", "marker token reserved: " + s);
    for (char ch : s)
      if (ch == ' ' || ch == '\t' || ch == '\n')
        throw Error("BadAlphabet", "symbol names may not contain whitespace");
    if (!by_name_.emplace(s, id).second)
      throw Error("BadAlphabet", "duplicate symbol: " + s);
  }

  std::vector<std::string> calls_, returns_;
  std::map<std::string, int> by_name_;
};

using AlphabetRef = std::shared_ptr<const StructuredAlphabet>;

inline AlphabetRef make_alphabet(std::vector<std::string> calls, std::vector<std::string> returns) {
  return std::make_shared<StructuredAlphabet>(std::move(calls), std::move(returns));
}

}  // namespace nwtk
