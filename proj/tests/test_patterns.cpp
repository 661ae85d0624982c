#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "lps/patterns.hpp"

using namespace lps;

namespace {

std::uint64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * static_cast<std::uint64_t>(n - i) / (i + 1);
  return c;
}

BinaryDataset tiny_dataset(std::initializer_list<std::initializer_list<int>> rows,
                           std::initializer_list<int> ys) {
  BinaryDataset d;
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(rows.begin()->size());
  d.X.resize(n, p);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (int v : row) d.X(i, j++) = static_cast<std::uint8_t>(v);
    ++i;
  }
  d.y.resize(n);
  i = 0;
  for (int v : ys) d.y[i++] = v;
  for (Index j = 0; j < p; ++j) d.var_names.push_back("x" + std::to_string(j + 1));
  return d;
}

PatternModel random_model(std::mt19937_64& rng, int p, int max_terms) {
  PatternModel m;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  m.mu = coef(rng);
  const int terms = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_terms));
  for (int t = 0; t < terms; ++t) {
    std::vector<std::int32_t> idx;
    for (int j = 1; j <= p; ++j)
      if (rng() % 3 == 0) idx.push_back(j);
    if (idx.empty()) idx.push_back(1 + static_cast<std::int32_t>(rng() % p));
    Pattern pat(idx);
    if (!m.has_term(pat)) m.terms.emplace_back(pat, coef(rng));
  }
  return m;
}

// exhaustive evaluation over {0,1}^p with optional recoding of S
double eval_at(const PatternModel& m, int p, unsigned mask, const std::set<std::int32_t>& S) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    std::uint8_t v = (mask >> j) & 1u;
    if (S.count(j + 1)) v = 1 - v;
    x[static_cast<std::size_t>(j)] = v;
  }
  return evaluate_model(m, x, p);
}

}  // namespace

TEST_CASE("pattern type invariants") {
  CHECK_THROWS_AS(Pattern({2, 2}), ArgumentError);
  CHECK_THROWS_AS(Pattern({3, 1}), ArgumentError);
  CHECK_THROWS_AS(Pattern({0}), ArgumentError);
  CHECK(Pattern{}.is_constant());
  CHECK(Pattern({1, 5}).order() == 2);
  CHECK(to_string(Pattern{}, {"a"}) == "constant");
  CHECK(to_string(Pattern({1, 2}), {"pky", "vtm"}) == "pky×vtm");
}

TEST_CASE("enumeration order and exact small case") {
  const auto pats = enumerate_patterns(3, 2);
  REQUIRE(pats.size() == 6);
  CHECK(pats[0] == Pattern({1}));
  CHECK(pats[1] == Pattern({2}));
  CHECK(pats[2] == Pattern({3}));
  CHECK(pats[3] == Pattern({1, 2}));
  CHECK(pats[4] == Pattern({1, 3}));
  CHECK(pats[5] == Pattern({2, 3}));
}

TEST_CASE("enumeration counts") {
  CHECK(enumerate_patterns(7, 7).size() == 127);
  CHECK(enumerate_patterns(20, 4).size() == 6195);
  CHECK(enumeration_size(20, 4) == 6196);
  CHECK(enumeration_size(7, 7) == 128);
  CHECK_THROWS_AS(enumerate_patterns(3, 4), ArgumentError);
  CHECK_THROWS_AS(enumerate_patterns(3, 0), ArgumentError);

  // per-order counts match binomials for every p <= 20 (one full sweep at q=p)
  for (int p : {1, 2, 5, 11, 16, 20}) {
    const auto all = enumerate_patterns(p, p);
    std::map<int, std::uint64_t> by_order;
    for (const auto& pat : all) ++by_order[pat.order()];
    for (int q = 1; q <= p; ++q) {
      std::uint64_t expect = 0, got = 0;
      for (int v = 1; v <= q; ++v) {
        expect += binom(p, v);
        got += by_order[v];
      }
      CHECK(got == expect);
      CHECK(enumeration_size(p, q) == expect + 1);
    }
    CHECK(std::is_sorted(all.begin(), all.end()));
  }
}

TEST_CASE("design construction basics") {
  const auto data = tiny_dataset({{1, 0, 1}, {1, 1, 1}, {0, 0, 0}, {1, 1, 0}}, {1, 0, 1, 0});
  SUBCASE("single row membership") {
    const auto design = build_design(data, {Pattern({1, 3}), Pattern({1, 2})});
    // row 0 = (1,0,1): satisfies {1,3} but not {1,2}
    CHECK(std::binary_search(design.col_support(1).begin(), design.col_support(1).end(), 0));
    CHECK(!std::binary_search(design.col_support(2).begin(), design.col_support(2).end(), 0));
    CHECK(design.pattern_of_column(0).is_constant());
    CHECK(design.col_support(0).size() == 4);  // constant column all ones
  }
  SUBCASE("all-ones data gives all-ones columns") {
    auto ones = tiny_dataset({{1, 1}, {1, 1}, {1, 1}, {1, 1}}, {0, 1, 0, 1});
    const auto design = build_design(ones, {Pattern({1, 2})});
    CHECK(design.col_support(1).size() == 4);
  }
  SUBCASE("column support equals the AND of variable supports") {
    std::mt19937_64 rng(7);
    BinaryDataset d;
    d.X.resize(40, 6);
    for (Index i = 0; i < 40; ++i)
      for (Index j = 0; j < 6; ++j) d.X(i, j) = rng() % 2;
    d.y = Array::Zero(40);
    d.y[0] = 1.0;
    const auto pats = enumerate_patterns(6, 3);
    const auto design = build_design(d, pats);
    for (Index c = 1; c < design.cols(); ++c) {
      const auto& pat = design.pattern_of_column(c);
      for (Index i = 0; i < 40; ++i) {
        bool expect = true;
        for (auto j : pat.indices()) expect = expect && d.X(i, j - 1) != 0;
        const bool got = std::binary_search(design.col_support(c).begin(),
                                            design.col_support(c).end(), i);
        REQUIRE(got == expect);
      }
    }
  }
  SUBCASE("deterministic rebuild") {
    const auto pats = enumerate_patterns(3, 2);
    const auto d1 = build_design(data, pats);
    const auto d2 = build_design(data, pats);
    REQUIRE(d1.cols() == d2.cols());
    for (Index c = 0; c < d1.cols(); ++c) CHECK(d1.col_support(c) == d2.col_support(c));
  }
  SUBCASE("out-of-range pattern rejected") {
    CHECK_THROWS_AS(build_design(data, {Pattern({4})}), ArgumentError);
  }
}

TEST_CASE("model evaluation") {
  PatternModel m;
  m.mu = -2.0;
  m.terms = {{Pattern({1}), 1.5}, {Pattern({2, 3}), 1.5}, {Pattern({4, 5, 6}), 2.0}};
  CHECK(evaluate_model(m, {1, 1, 1, 1, 1, 1, 0}, 7) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(evaluate_model(m, {0, 1, 0, 1, 1, 1, 1}, 7) == doctest::Approx(0.0).epsilon(1e-15));

  PatternModel empty;
  CHECK(evaluate_model(empty, {1, 0}, 2) == 0.0);

  PatternModel quad;
  quad.mu = -2.0;
  quad.terms = {{Pattern({1, 2, 3, 4}), 2.0}};
  CHECK(evaluate_model(quad, {1, 1, 1, 1}, 4) == doctest::Approx(0.0));

  CHECK_THROWS_AS(evaluate_model(m, {1, 0}, 7), ArgumentError);
}

TEST_CASE("coding flip: worked example and identity") {
  PatternModel m;
  m.mu = -2.0;
  m.terms = {{Pattern({1}), 1.5}};
  const auto g = flip_coding(m, {1});
  CHECK(g.mu == doctest::Approx(-0.5).epsilon(1e-15));
  REQUIRE(g.terms.size() == 1);
  CHECK(g.terms[0].first == Pattern({1}));
  CHECK(g.terms[0].second == doctest::Approx(-1.5).epsilon(1e-15));

  const auto same = flip_coding(m, {});
  CHECK(same.mu == m.mu);
  REQUIRE(same.terms.size() == 1);
  CHECK(same.terms[0].second == m.terms[0].second);
}

TEST_CASE("coding flip: round trip, pointwise equivalence, sign proposition") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 3 + static_cast<int>(rng() % 4);  // p in 3..6
    const auto m = random_model(rng, p, 5);
    for (unsigned smask = 0; smask < (1u << p); ++smask) {
      std::set<std::int32_t> S;
      for (int j = 0; j < p; ++j)
        if (smask & (1u << j)) S.insert(j + 1);

      const auto g = flip_coding(m, S);
      // pointwise: g(recoded x) == m(x) over every x
      for (unsigned mask = 0; mask < (1u << p); ++mask) {
        const double lhs = eval_at(g, p, mask, S);
        const double rhs = eval_at(m, p, mask, {});
        REQUIRE(std::abs(lhs - rhs) < 1e-10);
      }
      // round trip to 1e-12 on coefficients
      const auto back = flip_coding(g, S);
      REQUIRE(std::abs(back.mu - m.mu) < 1e-12);
      REQUIRE(back.terms.size() == m.terms.size());
      for (const auto& [pat, c] : m.terms) {
        bool found = false;
        for (const auto& [bp, bc] : back.terms)
          if (bp == pat) {
            found = true;
            REQUIRE(std::abs(bc - c) < 1e-12);
          }
        REQUIRE(found);
      }
    }
  }
}

TEST_CASE("coding flip: all-positive models gain a negative coefficient") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 3 + static_cast<int>(rng() % 4);
    PatternModel m = random_model(rng, p, 4);
    for (auto& [pat, c] : m.terms) c = coef(rng);  // strictly positive

    std::set<std::int32_t> S;
    for (int j = 1; j <= p; ++j)
      if (rng() % 2) S.insert(j);
    bool touches = false;
    for (const auto& [pat, c] : m.terms)
      for (auto j : pat.indices()) touches = touches || S.count(j) > 0;
    if (!touches) continue;

    const auto g = flip_coding(m, S);
    CHECK(g.terms.size() >= m.terms.size());
    bool has_negative = false;
    for (const auto& [pat, c] : g.terms) has_negative = has_negative || c < 0;
    CHECK(has_negative);
  }
}
