#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"
#include "nwtk/compose.hpp"

using namespace nwtk;
using fixtures::ab1;
using fixtures::ab2;
using fixtures::abxy;

namespace {

// Reference semantics of "first the relabeler, then the two-way machine".
std::optional<std::vector<std::string>> pipeline(const Vpt& first, const TwoVpt& second,
                                                 const NestedWord& w) {
  auto mids = evaluate_vpt(first, w);
  if (mids.empty()) return std::nullopt;
  REQUIRE(mids.size() == 1);  // all first stages here are unambiguous
  NestedWord mid = parse_nested_word(*mids.begin(), second.a.alph);
  return evaluate_d2vpt(second, mid, EvalMode::Checked);
}

std::optional<std::vector<std::string>> run_composed(const TwoVptRunner& r,
                                                     const NestedWord& w) {
  if (r.deterministic()) return r.evaluate(w, EvalMode::Checked);
  auto all = r.all_outputs(w);
  REQUIRE(all.size() <= 1);
  if (all.empty()) return std::nullopt;
  return *all.begin();
}

void check_equivalent(const Vpt& first, const TwoVpt& second, const TwoVpt& composed) {
  composed.validate();
  CHECK(!composed.has_lookaround);
  TwoVptRunner runner(composed);
  for (const auto& w : enumerate_nested_words(ab2(), 6))
    CHECK(run_composed(runner, w) == pipeline(first, second, w));
  for (unsigned long long s = 0; s < 40; ++s) {
    NestedWord w = random_nested_word(ab2(), 10, 4, s);
    CHECK(run_composed(runner, w) == pipeline(first, second, w));
  }
}

}  // namespace

TEST_CASE("composition with a deterministic relabeler") {
  Vpt a = fixtures::relabel_det();
  for (const TwoVpt& b : {fixtures::copy_2vpt(abxy()), fixtures::double_copy_2vpt(abxy())}) {
    TwoVpt c = compose_hu(a, b);
    CHECK(c.deterministic());
    check_equivalent(a, b, c);
  }
}

TEST_CASE("composition with a co-deterministic relabeler") {
  Vpt a = fixtures::relabel_codet();
  for (const TwoVpt& b : {fixtures::copy_2vpt(abxy()), fixtures::double_copy_2vpt(abxy())}) {
    TwoVpt c = compose_hu_codet(a, b);
    check_equivalent(a, b, c);
  }
}

TEST_CASE("composition with an unambiguous relabeler") {
  Vpt a = fixtures::relabel_unamb();
  for (const TwoVpt& b : {fixtures::copy_2vpt(abxy()), fixtures::double_copy_2vpt(abxy())}) {
    TwoVpt c = compose_relabeling(b, a);
    check_equivalent(a, b, c);
  }
}

TEST_CASE("look-around elimination preserves the transduction") {
  for (const TwoVpt& t :
       {fixtures::lookaround_depth_tagger(), fixtures::lookaround_depth_limiter()}) {
    TwoVpt plain = remove_lookaround(t);
    plain.validate();
    CHECK(!plain.has_lookaround);
    TwoVptRunner runner(plain);
    for (const auto& w : enumerate_nested_words(ab1(), 8)) {
      auto all = runner.all_outputs(w);
      REQUIRE(all.size() <= 1);
      std::optional<std::vector<std::string>> got;
      if (!all.empty()) got = *all.begin();
      CHECK(got == evaluate_d2vpt(t, w, EvalMode::Checked));
    }
  }
}

TEST_CASE("look-around elimination needs an unambiguous checker") {
  TwoVpt t = fixtures::lookaround_depth_tagger();
  // Duplicate a checker rule: two accepting runs per guarded word.
  t.checker.push_rules.push_back(t.checker.push_rules[0]);
  CHECK_THROWS_AS(remove_lookaround(t), Error);
}
