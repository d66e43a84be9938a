#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>
#include <set>
#include <tuple>

#include "shadowkit/errors.hpp"
#include "shadowkit/group.hpp"

using namespace shadowkit;

namespace {

// Random word over a generating set, letters drawn uniformly.
std::vector<std::size_t> random_word(std::mt19937_64& rng, const GeneratingSet& s, std::size_t len) {
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  std::vector<std::size_t> w(len);
  for (auto& c : w) c = pick(rng);
  return w;
}

// Affine element x -> 2^k x + p / 2^q with p odd or zero, kept in lowest terms.
struct Aff {
  long k, p, q;
  auto key() const { return std::tuple(k, p, q); }
};

Aff normalize(long k, long p, long q) {
  if (p == 0) return {k, 0, 0};
  while (q > 0 && p % 2 == 0) {
    p /= 2;
    --q;
  }
  while (q < 0) {
    p *= 2;
    ++q;
  }
  return {k, p, q};
}

// g -> s g with a = x + 1, b = 2x, composition (s g)(x) = s(g(x)).
Aff left_mul(int s, const Aff& g) {
  switch (s) {
    case 0: return normalize(g.k, g.p + (1L << g.q), g.q);   // a
    case 1: return normalize(g.k + 1, g.p, g.q - 1);          // b: 2 * t
    case 2: return normalize(g.k, g.p - (1L << g.q), g.q);   // a^-1
    default: return normalize(g.k - 1, g.p, g.q + 1);         // b^-1: t / 2
  }
}

std::size_t bs_ball_size_oracle(std::size_t r) {
  std::set<std::tuple<long, long, long>> seen{{0, 0, 0}};
  std::vector<Aff> frontier{{0, 0, 0}};
  for (std::size_t d = 0; d < r; ++d) {
    std::vector<Aff> next;
    for (const Aff& g : frontier) {
      for (int s = 0; s < 4; ++s) {
        Aff h = left_mul(s, g);
        if (seen.insert(h.key()).second) next.push_back(h);
      }
    }
    frontier = std::move(next);
  }
  return seen.size();
}

}  // namespace

TEST_CASE("dyadic arithmetic stays normalized") {
  const Dyadic half = Dyadic::make(4, -3);
  CHECK(half.num == 1);
  CHECK(half.exp == -1);
  CHECK((half + half) == Dyadic::make(1, 0));
  CHECK((half + -half) == Dyadic{});
  CHECK(Dyadic::make(3, -2).to_double() == 0.75);
  CHECK(Dyadic::make(3, 0).shifted(-2) == Dyadic::make(3, -2));
}

TEST_CASE("free abelian normal forms") {
  const auto z2 = GroupFamily::free_abelian(2);
  const auto a = z2.exponents({1, -2});
  const auto b = z2.exponents({3, 5});
  CHECK(z2.multiply(a, b) == z2.exponents({4, 3}));
  CHECK(z2.multiply(a, z2.inverse(a)) == z2.identity());
  CHECK(z2.multiply(a, b) == z2.multiply(b, a));
}

TEST_CASE("free group reduces words") {
  const auto f2 = GroupFamily::free(2);
  CHECK(f2.letters({1, 2, -2, -1}) == f2.identity());
  const auto ab = f2.letters({1, 2});
  CHECK(f2.multiply(ab, f2.inverse(ab)) == f2.identity());
  CHECK(f2.multiply(f2.letters({1}), f2.letters({2})) != f2.multiply(f2.letters({2}), f2.letters({1})));
}

TEST_CASE("solvable group relation b a = a^2 b") {
  const auto g = GroupFamily::solvable_bs();
  const auto s = GeneratingSet::standard(g);
  CHECK(reduce("b a", s).normal_form == reduce("a a b", s).normal_form);
  CHECK(reduce("b a b^-1 a^-2", s).normal_form == g.identity());
  CHECK(reduce("a b", s).normal_form != reduce("b a", s).normal_form);
  // a^(1/2) = b^-1 a b is the affine map x -> x + 1/2
  const auto [k, t] = g.affine_pair(reduce("b^-1 a b", s).normal_form);
  CHECK(k == 0);
  CHECK(t == Dyadic::make(1, -1));
}

TEST_CASE("group axioms on random words") {
  std::mt19937_64 rng(11);
  for (const auto& fam : {GroupFamily::free_abelian(3), GroupFamily::free(2), GroupFamily::solvable_bs()}) {
    const auto s = GeneratingSet::standard(fam);
    for (int trial = 0; trial < 200; ++trial) {
      const auto g = reduce(random_word(rng, s, 1 + trial % 9), s);
      const auto h = reduce(random_word(rng, s, 1 + trial % 7), s);
      const auto k = reduce(random_word(rng, s, 1 + trial % 5), s);
      CHECK(fam.multiply(fam.multiply(g.normal_form, h.normal_form), k.normal_form) ==
            fam.multiply(g.normal_form, fam.multiply(h.normal_form, k.normal_form)));
      CHECK(fam.multiply(g.normal_form, inverse(g, s).normal_form) == fam.identity());
      CHECK(multiply(g, h, s).normal_form == fam.multiply(g.normal_form, h.normal_form));
      CHECK(reduce(g.inverse_word(s), s).normal_form == fam.inverse(g.normal_form));
    }
  }
}

TEST_CASE("word parsing and formatting") {
  const auto s = GeneratingSet::standard(GroupFamily::solvable_bs());
  CHECK(s.parse_word("a b^-1 a") == s.parse_word("a*b^-1*a"));
  CHECK(s.parse_word("b^3").size() == 3);
  CHECK(s.parse_word("e").empty());
  CHECK(s.parse_word(s.format_word(s.parse_word("a b^-2 a^-1"))) == s.parse_word("a b^-2 a^-1"));
  CHECK_THROWS_AS(s.parse_word("c"), InputError);
  const auto renamed = GeneratingSet::standard(GroupFamily::free_abelian(1), {"b"});
  CHECK(renamed.index_of("b").has_value());
  CHECK(renamed.index_of("b^-1").has_value());
}

TEST_CASE("custom generating sets") {
  const auto z2 = GroupFamily::free_abelian(2);
  const auto t = GeneratingSet::from_elements(z2, {{"u", z2.exponents({1, 0})}, {"v", z2.exponents({1, 1})}});
  CHECK(t.size() == 4);
  CHECK(word_length(z2.exponents({0, 1}), t) == 2);
  CHECK(word_length(z2.exponents({2, 2}), t) == 2);
  CHECK_THROWS_AS(GeneratingSet::from_elements(z2, {{"u", z2.exponents({2, 0})}, {"v", z2.exponents({0, 1})}}),
                  InputError);
  CHECK_THROWS_AS(GeneratingSet::from_elements(z2, {{"u", z2.identity()}, {"v", z2.exponents({0, 1})}}),
                  InputError);
  const auto w = geodesic_word(z2.exponents({0, 1}), t);
  CHECK(w.size() == 2);
  CHECK(reduce(w, t).normal_form == z2.exponents({0, 1}));
}

TEST_CASE("ball sizes match closed-form counts") {
  // Z^2, standard set: |n1| + |n2| <= r has 2r^2 + 2r + 1 points.
  const auto z2 = GeneratingSet::standard(GroupFamily::free_abelian(2));
  for (std::size_t r = 0; r <= 8; ++r) CHECK(CayleyBall::build(z2, r)->size() == 2 * r * r + 2 * r + 1);
  // F_2: 1 + 4 (3^r - 1) / 2.
  const auto f2 = GeneratingSet::standard(GroupFamily::free(2));
  std::size_t p = 1;
  for (std::size_t r = 0; r <= 6; ++r, p *= 3) CHECK(CayleyBall::build(f2, r)->size() == 2 * p - 1);
}

TEST_CASE("solvable ball matches an independent affine BFS") {
  const auto s = GeneratingSet::standard(GroupFamily::solvable_bs());
  REQUIRE(s[0].name == "a");
  REQUIRE(s[1].name == "b");
  for (std::size_t r = 0; r <= 7; ++r) CHECK(CayleyBall::build(s, r)->size() == bs_ball_size_oracle(r));
}

TEST_CASE("ball order, lengths and adjacency") {
  for (const auto& fam : {GroupFamily::free_abelian(2), GroupFamily::solvable_bs()}) {
    const auto s = GeneratingSet::standard(fam);
    const auto ball = CayleyBall::build(s, 5);
    CHECK(fam.is_identity(ball->element(0).normal_form));
    for (std::size_t i = 0; i < ball->size(); ++i) {
      const auto& g = ball->element(i);
      CHECK(ball->length(i) == g.word.size());
      CHECK(word_length(g.normal_form, s) == ball->length(i));
      if (i > 0) {
        CHECK(ball->length(i - 1) <= ball->length(i));
        if (ball->length(i - 1) == ball->length(i)) CHECK(ball->element(i - 1).normal_form < g.normal_form);
      }
      for (std::size_t k = 0; k < s.size(); ++k) {
        const auto target = fam.multiply(s[k].element, g.normal_form);
        const auto j = ball->neighbor(i, k);
        if (j == CayleyBall::npos) {
          CHECK(word_length(target, s) > 5);
        } else {
          CHECK(ball->element(j).normal_form == target);
        }
      }
    }
    CHECK(ball->prefix_size(5) == ball->size());
  }
}

TEST_CASE("free abelian word length is the l1 norm") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-6, 6);
  const auto fam = GroupFamily::free_abelian(3);
  const auto s = GeneratingSet::standard(fam);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t a = d(rng), b = d(rng), c = d(rng);
    CHECK(word_length(fam.exponents({a, b, c}), s) ==
          static_cast<std::size_t>(std::llabs(a) + std::llabs(b) + std::llabs(c)));
  }
}

TEST_CASE("search budgets are enforced") {
  const auto s = GeneratingSet::standard(GroupFamily::free(3));
  CHECK_THROWS_AS(CayleyBall::build(s, 12, 1000), ResourceError);
}
