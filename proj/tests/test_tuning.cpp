#include <doctest.h>

#include <cmath>
#include <random>

#include "lps/simgen.hpp"
#include "lps/tuning.hpp"
#include "oracles.hpp"

using namespace lps;

namespace {

// small bernoulli dataset with a sparse true logit, for LOO comparisons
SimData small_instance(Index n, int p, std::uint64_t seed) {
  Rng rng(seed);
  SimData out;
  out.data.X.resize(n, p);
  for (Index i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) out.data.X(i, j) = rng.bernoulli(0.5) ? 1 : 0;
  out.truth.mu = -0.5;
  out.truth.terms = {{Pattern{1}, 1.6}, {Pattern{2, 3}, 1.8}};
  std::vector<std::uint8_t> row(static_cast<std::size_t>(p));
  out.data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = out.data.X(i, j);
    const double f = evaluate_model(out.truth, row, p);
    out.data.y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-f))) ? 1.0 : 0.0;
  }
  if (out.data.y.mean() == 0.0) out.data.y[0] = 1.0;
  if (out.data.y.mean() == 1.0) out.data.y[0] = 0.0;
  for (int j = 0; j < p; ++j) out.data.var_names.push_back("x" + std::to_string(j + 1));
  return out;
}

}  // namespace

TEST_CASE("H trace against the dense oracle") {
  SUBCASE("constant column only, scaled weights") {
    DesignMatrix design(10, {Pattern{}}, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}});
    const Array w = Array::Constant(10, 0.21);
    const auto ht = compute_h_trace(design, {0}, w);
    const Matrix B = design.dense_block({0});
    const auto dense = oracle::dense_h_trace(B, w);
    CHECK(ht.trace_H == doctest::Approx(dense.trace_H).epsilon(1e-10));
    CHECK(ht.trace_H == doctest::Approx(1.0 / 0.21).epsilon(1e-10));
    CHECK(ht.trace_WH == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("random supports at several sizes") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 15; ++trial) {
      const Index n = 12 + static_cast<Index>(rng() % 19);  // up to 30
      const auto inst = oracle::random_instance(n, 6, 0.45, 900 + trial);
      Array w(n);
      for (Index i = 0; i < n; ++i)
        w[i] = 0.05 + 0.2 * static_cast<double>(rng() % 1000) / 1000.0;
      std::vector<Index> cols = {1, 2, 4};
      const Matrix B = inst.design.dense_block(cols);
      if (Eigen::FullPivLU<Matrix>(B.transpose() * B).rank() < 3) continue;
      const auto ht = compute_h_trace(inst.design, cols, w);
      const auto dense = oracle::dense_h_trace(B, w);
      CHECK(ht.trace_H == doctest::Approx(dense.trace_H).epsilon(1e-8));
      CHECK(ht.trace_WH == doctest::Approx(dense.trace_WH).epsilon(1e-8));
      CHECK(ht.trace_WH == doctest::Approx(3.0).epsilon(1e-8));  // tr(WH) = column count
    }
  }
  SUBCASE("n <= model size is a scoring error") {
    const auto inst = oracle::random_instance(4, 6, 0.5, 3);
    CHECK_THROWS_AS(compute_h_trace(inst.design, {1, 2, 3, 4}, Array::Constant(4, 0.2)),
                    NumericalError);
  }
}

TEST_CASE("score records: identities and hand computation") {
  // n = 8, ybar = 1/2, constant-only model
  DesignMatrix design(8, {Pattern{}, Pattern{1}}, {{0, 1, 2, 3, 4, 5, 6, 7}, {0, 2, 4, 6}});
  Array y(8);
  y << 1, 0, 1, 0, 1, 0, 1, 0;
  ModelFit fit;
  fit.lambda = 0.5;
  fit.mu = 0.0;  // intercept MLE at ybar = 1/2
  fit.converged = true;

  const ScoreRecord rec = gacv(fit, design, y);
  CHECK(rec.obs == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // W = I/4, B* = [1]: trace_H = 1 / 0.25 = 4, tr(WH) = 1
  CHECK(rec.trace_H == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(rec.trace_WH == doctest::Approx(1.0).epsilon(1e-10));
  // gamma = 4 * (4 * 0.5) / (8 - 1); gacv = obs + gamma / 8
  CHECK(rec.gamma == doctest::Approx(8.0 / 7.0).epsilon(1e-10));
  CHECK(rec.gacv == doctest::Approx(std::log(2.0) + 1.0 / 7.0).epsilon(1e-10));
  CHECK(rec.n_b0 == 0);

  // bgacv - obs = (log n / 2)(gacv - obs); at n = 8 the ratio is 1.0397
  const ScoreRecord rb = bgacv(fit, design, y);
  CHECK(rb.bgacv - rb.obs ==
        doctest::Approx(0.5 * std::log(8.0) * (rb.gacv - rb.obs)).epsilon(1e-12));
  CHECK((rb.bgacv - rb.obs) / (rb.gacv - rb.obs) == doctest::Approx(1.0397).epsilon(1e-3));
  CHECK(rec.gacv >= rec.obs);
}

TEST_CASE("score identities hold on fitted paths") {
  const auto sim = small_instance(40, 6, 77);
  const auto design = build_design(sim.data, enumerate_patterns(6, 2));
  SolverConfig config;
  const auto grid = make_lambda_grid(design, sim.data.y, 20, 1e-3);
  const auto path = solve_path(design, sim.data.y, grid, config);
  int scored = 0;
  for (const auto& fit : path) {
    if (!fit.converged) continue;
    ScoreRecord rec;
    try {
      rec = gacv(fit, design, sim.data.y);
    } catch (const NumericalError&) {
      continue;
    }
    ++scored;
    CHECK(rec.gacv >= rec.obs);
    CHECK(rec.bgacv - rec.obs ==
          doctest::Approx(0.5 * std::log(40.0) * (rec.gacv - rec.obs)).epsilon(1e-12));
    const double expected_s = rec.n_b0 > 0 ? static_cast<double>(rec.n_b0) : 1.0;
    CHECK(std::abs(rec.trace_WH - expected_s) < 1e-8);
  }
  CHECK(scored > 10);
}

TEST_CASE("perfect-fit limit sends the optimism term to zero") {
  DesignMatrix design(6, {Pattern{}, Pattern{1}}, {{0, 1, 2, 3, 4, 5}, {0, 1, 2}});
  Array y(6);
  y << 1, 1, 1, 0, 0, 0;  // y equals the pattern column
  ModelFit fit;
  fit.lambda = 1e-8;
  fit.mu = -18.0;
  fit.support = {1};
  fit.coefficients = {36.0};  // p ~ y at double precision
  fit.converged = true;
  const ScoreRecord rec = gacv(fit, design, y);
  CHECK(rec.gacv - rec.obs < 1e-10);
  CHECK(rec.obs < 1e-7);
}

TEST_CASE("lambda selection") {
  const auto sim = small_instance(60, 6, 123);
  const auto design = build_design(sim.data, enumerate_patterns(6, 2));
  SolverConfig config;
  const auto grid = make_lambda_grid(design, sim.data.y, 25, 1e-3);
  auto path = solve_path(design, sim.data.y, grid, config);

  SUBCASE("single-element path returns that element") {
    std::vector<ModelFit> one = {path[3]};
    const auto sel = select_lambda(one, design, sim.data.y, Criterion::bgacv);
    CHECK(sel.index == 0);
  }
  SUBCASE("selected fit minimizes the criterion") {
    const auto sel = select_lambda(path, design, sim.data.y, Criterion::gacv);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < sel.records.size(); ++i) {
      if (!sel.records[i].scored) continue;
      if (sel.records[i].gacv < best) {
        best = sel.records[i].gacv;
        best_i = i;
      }
    }
    CHECK(sel.index == best_i);
  }
  SUBCASE("unconverged fits are skipped with a warning") {
    path[2].converged = false;
    const auto sel = select_lambda(path, design, sim.data.y, Criterion::bgacv);
    CHECK(!sel.records[2].scored);
    REQUIRE(!sel.warnings.empty());
    CHECK(sel.warnings[0].find("unconverged") != std::string::npos);
    CHECK(sel.index != 2);
  }
  SUBCASE("empty path is an error") {
    std::vector<ModelFit> none;
    CHECK_THROWS_AS(select_lambda(none, design, sim.data.y, Criterion::bgacv), ArgumentError);
  }
}

TEST_CASE("score curves jump where the support changes") {
  const auto sim = gen_example1(800, 1);
  const auto design = build_design(sim.data, enumerate_patterns(7, 7));
  SolverConfig config;
  const auto grid = make_lambda_grid(design, sim.data.y, 50, 1e-4);
  const auto path = solve_path(design, sim.data.y, grid, config);
  const auto sel = select_lambda(path, design, sim.data.y, Criterion::bgacv);

  double across_sum = 0.0, within_sum = 0.0;
  int across_n = 0, within_n = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!sel.records[i].scored || !sel.records[i - 1].scored) continue;
    const double diff = std::abs(sel.records[i].bgacv - sel.records[i - 1].bgacv);
    if (path[i].support != path[i - 1].support) {
      across_sum += diff;
      ++across_n;
    } else {
      within_sum += diff;
      ++within_n;
    }
  }
  REQUIRE(across_n > 0);
  REQUIRE(within_n > 0);
  CHECK(across_sum / across_n > 10.0 * (within_sum / within_n));
}

TEST_CASE("GACV tracks exact leave-one-out CV") {
  SolverConfig config;
  int within_one = 0;
  const int instances = 6;
  double mean_rho = 0.0;
  for (int t = 0; t < instances; ++t) {
    const auto sim = small_instance(30, 6, 4000 + 13 * t);
    const auto patterns = enumerate_patterns(6, 1);
    const auto design = build_design(sim.data, patterns);
    const auto grid = make_lambda_grid(design, sim.data.y, 15, 0.02);
    const auto path = solve_path(design, sim.data.y, grid, config);

    std::vector<double> gacv_vals, loo_vals;
    std::size_t gacv_arg = 0, loo_arg = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!path[i].converged) continue;
      ScoreRecord rec;
      try {
        rec = gacv(path[i], design, sim.data.y);
      } catch (const NumericalError&) {
        continue;
      }
      const double loo = oracle::exact_loo_cv(sim.data, patterns, path[i].lambda, config);
      gacv_vals.push_back(rec.gacv);
      loo_vals.push_back(loo);
      if (rec.gacv < gacv_vals[gacv_arg]) gacv_arg = gacv_vals.size() - 1;
      if (loo < loo_vals[loo_arg]) loo_arg = loo_vals.size() - 1;
    }
    REQUIRE(gacv_vals.size() >= 10);
    if (std::abs(static_cast<int>(gacv_arg) - static_cast<int>(loo_arg)) <= 1) ++within_one;
    const double rho = oracle::spearman(gacv_vals, loo_vals);
    CHECK(rho >= 0.8);
    mean_rho += rho;
  }
  CHECK(within_one >= instances - 1);
  CHECK(mean_rho / instances >= 0.9);
}
