#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nwtk/error.hpp"

namespace nwtk {

// Binary relation over {0..n-1} as a bitset matrix (row-major).
class Rel {
 public:
  Rel() : n_(0), wpr_(0) {}
  explicit Rel(int n) : n_(n), wpr_((n + 63) / 64), bits_((size_t)n * wpr_, 0) {}

  static Rel identity(int n) {
    Rel r(n);
    for (int i = 0; i < n; ++i) r.set(i, i);
    return r;
  }

  int size() const { return n_; }

  bool get(int a, int b) const { return (bits_[(size_t)a * wpr_ + b / 64] >> (b % 64)) & 1; }
  void set(int a, int b) { bits_[(size_t)a * wpr_ + b / 64] |= 1ull << (b % 64); }

  bool empty() const {
    for (auto w : bits_)
      if (w) return false;
    return true;
  }

  // Diagrammatic composition: (a,c) in result iff exists b with (a,b) in this
  // and (b,c) in o.
  Rel compose(const Rel& o) const {
    Rel out(n_);
    for (int a = 0; a < n_; ++a) {
      const uint64_t* row = &bits_[(size_t)a * wpr_];
      uint64_t* orow = &out.bits_[(size_t)a * wpr_];
      for (int b = 0; b < n_; ++b) {
        if ((row[b / 64] >> (b % 64)) & 1) {
          const uint64_t* brow = &o.bits_[(size_t)b * wpr_];
          for (int w = 0; w < wpr_; ++w) orow[w] |= brow[w];
        }
      }
    }
    return out;
  }

  Rel unite(const Rel& o) const {
    Rel out = *this;
    for (size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= o.bits_[i];
    return out;
  }

  Rel transpose() const {
    Rel out(n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        if (get(a, b)) out.set(b, a);
    return out;
  }

  // Reflexive-transitive closure.
  Rel star() const {
    Rel acc = identity(n_).unite(*this);
    for (;;) {
      Rel next = acc.compose(acc).unite(acc);
      if (next == acc) return acc;
      acc = next;
    }
  }

  bool operator==(const Rel& o) const { return n_ == o.n_ && bits_ == o.bits_; }
  bool operator<(const Rel& o) const { return bits_ < o.bits_; }

  size_t hash() const {
    size_t h = (size_t)n_ * 1000003u;
    for (auto w : bits_) h = h * 1099511628211ull ^ (size_t)w;
    return h;
  }

  // True if every element has at most one image.
  bool functional() const {
    for (int a = 0; a < n_; ++a) {
      int cnt = 0;
      for (int b = 0; b < n_; ++b)
        if (get(a, b) && ++cnt > 1) return false;
    }
    return true;
  }

  std::vector<int> image_of(int a) const {
    std::vector<int> out;
    for (int b = 0; b < n_; ++b)
      if (get(a, b)) out.push_back(b);
    return out;
  }

 private:
  int n_, wpr_;
  std::vector<uint64_t> bits_;
};

}  // namespace nwtk
