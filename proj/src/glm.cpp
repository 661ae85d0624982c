#include "lps/glm.hpp"

#include <cmath>
#include <optional>
#include <ostream>

namespace lps {

namespace {

constexpr double kIrlsTol = 1e-10;
constexpr int kIrlsMaxIter = 100;
constexpr double kSeparationLogit = 30.0;

Matrix model_matrix(const DesignMatrix& design, const std::vector<Index>& columns) {
  const Index n = design.rows();
  Matrix D = Matrix::Zero(n, static_cast<Index>(columns.size()) + 1);
  D.col(0).setOnes();
  for (std::size_t k = 0; k < columns.size(); ++k)
    for (Index i : design.col_support(columns[k])) D(i, static_cast<Index>(k) + 1) = 1.0;
  return D;
}

void check_rank(const Matrix& D, const DesignMatrix& design,
                const std::vector<Index>& columns) {
  Eigen::ColPivHouseholderQR<Matrix> qr(D);
  const Index rank = qr.rank();
  if (rank == D.cols()) return;
  const auto& perm = qr.colsPermutation().indices();
  for (Index k = rank; k < D.cols(); ++k) {
    const Index orig = perm[k];
    if (orig == 0) continue;  // blame a pattern column, not the intercept
    const Pattern& pat = design.pattern_of_column(columns[static_cast<std::size_t>(orig - 1)]);
    throw ArgumentError("collinear design: pattern " + to_string(pat) +
                        " is linearly dependent on the others");
  }
  throw ArgumentError("collinear design: intercept is linearly dependent");
}

}  // namespace

GlmFit fit_logistic(const DesignMatrix& design, const std::vector<Index>& columns,
                    const Array& y) {
  const Index n = design.rows();
  const double dn = static_cast<double>(n);
  const Matrix D = model_matrix(design, columns);
  const Index q = D.cols();
  check_rank(D, design, columns);

  GlmFit fit;
  fit.columns = columns;
  Vector beta = Vector::Zero(q);
  Vector f = D * beta;
  double nll = neg_log_lik_value(f, y) * dn;

  for (int it = 0; it < kIrlsMaxIter; ++it) {
    const Array p = probabilities(f);
    const Vector grad = D.transpose() * (y - p).matrix();  // ascent direction
    if (grad.norm() <= kIrlsTol * dn) {
      fit.converged = true;
      break;
    }
    const Array w = p * (1.0 - p);
    const Matrix H = D.transpose() * w.matrix().asDiagonal() * D;
    Vector step = Eigen::LDLT<Matrix>(H).solve(grad);
    if (!step.allFinite()) break;

    // step halving keeps the deviance monotone
    double scale = 1.0;
    Vector beta_new, f_new;
    double nll_new = nll;
    for (int h = 0; h < 40; ++h) {
      beta_new = beta + scale * step;
      f_new = D * beta_new;
      nll_new = neg_log_lik_value(f_new, y) * dn;
      if (nll_new <= nll) break;
      scale *= 0.5;
    }
    if (nll_new > nll) break;  // no progress in any halving
    const bool falling = nll_new < nll;
    beta = beta_new;
    f = f_new;
    nll = nll_new;
    fit.iterations = it + 1;
    if (falling && f.cwiseAbs().maxCoeff() > kSeparationLogit) {
      fit.separation_flag = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.deviance = 2.0 * nll;
  const Array p = probabilities(f);
  const Matrix info = D.transpose() * (p * (1.0 - p)).matrix().asDiagonal() * D;
  const Matrix cov = Eigen::LDLT<Matrix>(info).solve(Matrix::Identity(q, q));
  fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.p_values.resize(q);
  for (Index k = 0; k < q; ++k) {
    const double z = fit.std_errors[k] > 0 ? std::abs(beta[k]) / fit.std_errors[k] : 0.0;
    fit.p_values[k] = std::erfc(z / std::sqrt(2.0));
  }
  return fit;
}

double bgacv_parametric(const GlmFit& fit, const DesignMatrix& design, const Array& y) {
  if (!fit.converged) throw NumericalError("bgacv_parametric requires a converged fit");
  const Index n = design.rows();
  const double dn = static_cast<double>(n);

  const Matrix D = model_matrix(design, fit.columns);
  const Vector f = D * fit.coefficients;
  const Array p = probabilities(f);

  std::vector<Index> cols = fit.columns;
  if (cols.empty()) cols.push_back(DesignMatrix::constant_column_index);
  const HTraceResult ht = compute_h_trace(design, cols, p * (1.0 - p));

  const double obs = neg_log_lik_value(f, y);
  const double denom = dn - static_cast<double>(cols.size());
  const double gamma = ht.trace_H * (y * (y - p)).sum() / denom;
  return obs + 0.5 * std::log(dn) * gamma / dn;
}

EliminationResult backward_eliminate(const std::vector<Index>& step1_columns,
                                     const DesignMatrix& design, const Array& y) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  EliminationResult res;

  auto try_fit = [&](const std::vector<Index>& cols)
      -> std::pair<double, std::optional<GlmFit>> {
    ++res.glm_fits;
    try {
      GlmFit fit = fit_logistic(design, cols, y);
      if (!fit.converged || fit.separation_flag) return {inf, std::move(fit)};
      return {bgacv_parametric(fit, design, y), std::move(fit)};
    } catch (const ArgumentError&) {  // collinear candidate: excluded, not fatal
      return {inf, std::nullopt};
    } catch (const NumericalError&) {
      return {inf, std::nullopt};
    }
  };

  std::vector<std::optional<GlmFit>> stage_fits;
  {
    auto [score, fit] = try_fit(step1_columns);
    EliminationStage st;
    st.columns = step1_columns;
    st.bgacv = score;
    res.stages.push_back(std::move(st));
    stage_fits.push_back(std::move(fit));
  }

  std::vector<Index> current = step1_columns;
  while (!current.empty()) {
    std::size_t best_k = current.size();
    double best_score = inf;
    std::optional<GlmFit> best_fit;
    auto& trials = res.stages.back().candidate_scores;

    std::vector<Index> cand;
    cand.reserve(current.size() - 1);
    for (std::size_t k = 0; k < current.size(); ++k) {
      cand.clear();
      for (std::size_t t = 0; t < current.size(); ++t)
        if (t != k) cand.push_back(current[t]);
      auto [score, fit] = try_fit(cand);
      trials.emplace_back(current[k], score);
      bool better = score < best_score;
      if (!better && score == best_score && best_k < current.size() && score < inf) {
        // tie: remove the higher-order pattern, then the lexicographically last
        const Pattern& a = design.pattern_of_column(current[k]);
        const Pattern& b = design.pattern_of_column(current[best_k]);
        better = b < a;
      }
      if (better) {
        best_k = k;
        best_score = score;
        best_fit = std::move(fit);
      }
    }
    if (best_k == current.size() || best_score == inf) break;  // every refit failed

    EliminationStage st;
    st.removed = current[best_k];
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(best_k));
    st.columns = current;
    st.bgacv = best_score;
    res.stages.push_back(std::move(st));
    stage_fits.push_back(std::move(best_fit));
  }

  res.best_stage = 0;
  bool have = false;
  for (std::size_t i = 0; i < res.stages.size(); ++i) {
    if (!stage_fits[i] || !std::isfinite(res.stages[i].bgacv)) continue;
    // <= walks ties toward the sparser stage
    if (!have || res.stages[i].bgacv <= res.stages[res.best_stage].bgacv) {
      res.best_stage = i;
      have = true;
    }
  }
  if (!have) throw NumericalError("backward elimination: no scorable stage");

  res.final_fit = *stage_fits[res.best_stage];
  res.final_model.mu = res.final_fit.intercept();
  for (std::size_t k = 0; k < res.final_fit.columns.size(); ++k)
    res.final_model.terms.emplace_back(design.pattern_of_column(res.final_fit.columns[k]),
                                       res.final_fit.coefficients[static_cast<Index>(k) + 1]);
  return res;
}

}  // namespace lps
