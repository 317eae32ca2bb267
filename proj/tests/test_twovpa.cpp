#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"
#include "nwtk/two_vpa.hpp"

using namespace nwtk;
using fixtures::ab1;
using fixtures::ab2;

TEST_CASE("compositional traversals match the reachability oracle") {
  std::vector<TwoVpa> machines = fixtures::morphism_machines();
  for (unsigned long long s : {1ull, 2ull, 3ull})
    machines.push_back(fixtures::random_2vpa(ab2(), 3, 2, s));
  for (const TwoVpa& a : machines) {
    a.validate();
    for (const auto& w : enumerate_nested_words(a.alph, 6))
      CHECK(fold_traversal(a, w) == traversal_oracle(a, w));
  }
}

TEST_CASE("algebraic acceptance matches the run oracle") {
  std::vector<TwoVpa> machines = fixtures::morphism_machines();
  machines.push_back(fixtures::random_2vpa(ab1(), 3, 2, 7));
  machines.push_back(fixtures::random_2vpa(ab2(), 3, 2, 8));
  for (const TwoVpa& a : machines) {
    for (const auto& w : enumerate_nested_words(a.alph, 6))
      CHECK(accepts_2vpa(a, w) == accepts_2vpa_oracle(a, w));
    for (unsigned long long s = 0; s < 40; ++s) {
      NestedWord w = random_nested_word(a.alph, 10, 3, s);
      CHECK(accepts_2vpa(a, w) == accepts_2vpa_oracle(a, w));
    }
  }
}

TEST_CASE("conversion to a deterministic one-way machine") {
  std::vector<TwoVpa> machines = fixtures::morphism_machines();
  machines.push_back(fixtures::random_2vpa(ab2(), 3, 2, 21));
  for (const TwoVpa& a : machines) {
    TraversalAlgebra alg = compute_algebra(a);
    CHECK(alg.size() >= 1);
    Vpa d = two_vpa_to_dvpa(a);
    d.validate();
    CHECK(d.deterministic());
    for (const auto& w : enumerate_nested_words(a.alph, 8))
      CHECK(accepts_vpa(d, w) == accepts_2vpa_oracle(a, w));
    for (unsigned long long s = 0; s < 100; ++s) {
      NestedWord w = random_nested_word(a.alph, 12, 4, s);
      CHECK(accepts_vpa(d, w) == accepts_2vpa_oracle(a, w));
    }
  }
}

TEST_CASE("emptiness matches exhaustive search and witnesses replay") {
  for (const TwoVpa& a : fixtures::emptiness_machines()) {
    bool found = false;
    for (const auto& w : enumerate_nested_words(a.alph, 8)) {
      if (accepts_2vpa_oracle(a, w)) {
        found = true;
        break;
      }
    }
    auto wit = two_vpa_witness(a);
    CHECK(wit.has_value() == found);
    if (wit) CHECK(accepts_2vpa_oracle(a, *wit));
  }
}

TEST_CASE("run enumeration visits real runs") {
  TwoVpa a = fixtures::morphism_machines()[0];  // lifted parity sweep
  NestedWord w = parse_nested_word("c c r r", ab1());
  auto runs = enumerate_accepting_runs(a, w);
  REQUIRE(runs.size() == 1);
  const auto& run = runs[0];
  CHECK(run.front().pos == 0);
  CHECK(run.front().q == a.initial);
  CHECK(run.back().pos == (int)w.size() + 2);
  CHECK(a.finals[run.back().q]);
  CHECK(run.back().stack.empty());
  // Each adjacent pair really is one step of the machine.
  auto tape = marked_tape(w);
  for (size_t i = 0; i + 1 < run.size(); ++i) {
    auto next = step_2vpa(a, tape, run[i]);
    CHECK(std::find(next.begin(), next.end(), run[i + 1]) != next.end());
  }
}
