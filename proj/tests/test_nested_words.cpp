#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "nwtk/nested_word.hpp"

using namespace nwtk;

TEST_CASE("alphabet basics") {
  auto a = fixtures::ab2();
  CHECK(a->num_calls() == 2);
  CHECK(a->num_returns() == 2);
  CHECK(a->is_call(0));
  CHECK(a->is_return(2));
  CHECK(a->is_call(kMarkL));
  CHECK(a->is_return(kMarkR));
  CHECK(a->name(kMarkL) == "<L>");
  CHECK(*a->lookup("s") == 3);
  CHECK(!a->lookup("zzz"));
  CHECK_THROWS_AS(make_alphabet({"a", "a"}, {"r"}), Error);
  CHECK_THROWS_AS(make_alphabet({"<L>"}, {"r"}), Error);
  CHECK_THROWS_AS(make_alphabet({}, {"r"}), Error);
}

TEST_CASE("parse, matching and round trip") {
  auto a = fixtures::ab1();
  NestedWord w = parse_nested_word("c c r c r r", a);
  CHECK(w.size() == 6);
  CHECK(w.match[0] == 5);
  CHECK(w.match[1] == 2);
  CHECK(w.match[3] == 4);
  CHECK(w.max_depth == 2);
  CHECK(serialize(w) == "c c r c r r");
  CHECK(parse_nested_word(serialize(w), a) == w);
  CHECK(w.depth_before(0) == 0);
  CHECK(w.depth_before(2) == 2);
  CHECK(w.depth_before(6) == 0);

  CHECK_THROWS_AS(parse_nested_word("c", a), Error);        // unmatched call
  CHECK_THROWS_AS(parse_nested_word("r c", a), Error);      // unmatched return
  CHECK_THROWS_AS(parse_nested_word("c q r", a), Error);    // unknown symbol
  CHECK_THROWS_AS(parse_nested_word("<L> c r", a), Error);  // markers are not content
}

TEST_CASE("concat and wrap") {
  auto a = fixtures::ab1();
  NestedWord u = parse_nested_word("c r", a);
  NestedWord v = parse_nested_word("c c r r", a);
  CHECK(serialize(concat(u, v)) == "c r c c r r");
  CHECK(serialize(wrap(0, u, 1)) == "c c r r");
  auto blocks = top_level_blocks(parse_nested_word("c r c c r r", a));
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0] == std::pair<int, int>{0, 1});
  CHECK(blocks[1] == std::pair<int, int>{2, 5});
}

TEST_CASE("enumeration is exhaustive and duplicate-free") {
  auto a = fixtures::ab1();
  auto words = enumerate_nested_words(a, 8);
  std::set<std::string> seen;
  for (const auto& w : words) {
    CHECK(w.size() <= 8);
    CHECK(seen.insert(serialize(w)).second);
  }
  // Catalan numbers: 1 + 1 + 2 + 5 + 14 words of length 0, 2, 4, 6, 8.
  CHECK(words.size() == 23);

  auto words2 = enumerate_nested_words(fixtures::ab2(), 4);
  // Lengths 0, 2, 4 with 2 calls x 2 returns: 1 + 4 + 2*16 = 37.
  CHECK(words2.size() == 37);
}

TEST_CASE("random words are valid and reproducible") {
  auto a = fixtures::ab2();
  for (unsigned long long s = 0; s < 50; ++s) {
    NestedWord w = random_nested_word(a, 12, 3, s);
    CHECK(w.size() <= 12);
    CHECK(w.max_depth <= 3);
    CHECK(parse_nested_word(serialize(w), a) == w);
    CHECK(random_nested_word(a, 12, 3, s) == w);
  }
}
