#ifndef LPS_SOLVER_HPP
#define LPS_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "lps/patterns.hpp"
#include "lps/types.hpp"

namespace lps {

/// Knobs for the l1-penalized Bernoulli-likelihood minimizer. The objective
/// is T_lambda(z) = L(y, Bz) + lambda * сsum of |z_j| over penalized columns,
/// with L the mean negative log likelihood; the constant column is never
/// penalized.
struct SolverConfig {
  double tol = 1e-6;          // convergence threshold on the subgradient norm delta
  double eta = 0.5;           // damping update factor, in (0,1)
  double alpha0 = 1.0;        // initial first-order damping, > 0
  std::optional<double> sigma;  // working-set sampling fraction in (0,1]; unset = auto
  int newton_max_inactive = 500;  // skip the reduced Newton step above this size
  int max_iters = 1000;
  std::uint64_t seed = 1;     // working-set RNG stream
  std::ostream* diagnostics = nullptr;  // per-iteration CSV rows if set

  void validate() const;
  /// Auto rule: 0.1 when the column count exceeds 10n, else full gradient.
  double resolve_sigma(Index n_cols, Index n_rows) const;
};

/// Mutable optimizer state; exposed so the step primitives can be tested in
/// isolation. The active set holds the columns estimated to be zero at the
/// minimizer; the constant column is always inactive.
struct SolverState {
  Vector z;            // length N_B, intercept at the constant column
  double alpha = 1.0;
  int iteration = 0;
  double delta = 0.0;  // last near-optimality value
  std::vector<Index> active;
  std::vector<Index> inactive;
  std::mt19937_64 rng;
};

/// One fitted model on the lambda path.
struct ModelFit {
  double lambda = 0.0;
  double mu = 0.0;                   // intercept (constant-column coefficient)
  std::vector<Index> support;        // nonzero non-constant columns, ascending
  std::vector<double> coefficients;  // aligned with support
  double neg_log_lik = 0.0;          // mean negative log likelihood at the fit
  double objective = 0.0;            // neg_log_lik + lambda * l1(coefficients)
  bool converged = false;
  double delta_final = 0.0;          // subgradient norm on the full gradient
  int iterations = 0;

  Index support_size() const { return static_cast<Index>(support.size()); }
  /// Dense coefficient vector (constant column included) of the given length.
  Vector dense(Index n_cols) const;
  PatternModel to_pattern_model(const DesignMatrix& design) const;
};

/// Mean negative log likelihood, its gradient and optional Hessian block
/// restricted to `subset`, all computed with overflow-safe logistic forms.
struct LikelihoodParts {
  double value = 0.0;
  Vector gradient;          // aligned with subset
  std::optional<Matrix> hessian;  // subset x subset block of (1/n) B'WB
};
LikelihoodParts neg_log_lik_grad_hess(const DesignMatrix& design, const Array& y,
                                      const Vector& z, const std::vector<Index>& subset,
                                      bool want_hessian);

/// Stable sigmoid of the logits; |f| is capped at 36 so the result never
/// reaches an exact 0 or 1.
Array probabilities(const Vector& f);

/// Mean negative log likelihood at logits f.
double neg_log_lik_value(const Vector& f, const Array& y);

/// Closed-form minimizer of the separable first-order model over the working
/// set: soft-threshold for penalized columns, a plain gradient step for the
/// intercept. Returns the step d aligned with `working`.
Vector first_order_step(const Vector& z, const Vector& grad_w,
                        const std::vector<Index>& working, double alpha, double lambda);

/// delta(z): minimal norm of the penalized-objective subgradient over the
/// evaluated components. Zero exactly at a minimizer.
double optimality_measure(const Vector& z, const Vector& grad_w,
                          const std::vector<Index>& working, double lambda);

/// Damped reduced-Newton direction on the inactive set: solves
/// (H_II + delta_k I) p = -g_I - lambda w_I by LDLT. w holds the l1
/// subgradient signs at z+d (0 for the intercept).
Vector reduced_newton_step(const Matrix& hess_block, const Vector& grad_i,
                           const Vector& w_i, double lambda, double delta_k);

/// Minimize T_lambda by the first-order / reduced-Newton active-set scheme,
/// warm-started if given. Returns the best iterate flagged unconverged if the
/// iteration cap is reached.
ModelFit solve_single(const DesignMatrix& design, const Array& y, double lambda,
                      const SolverConfig& config, const Vector* warm_start = nullptr);

/// Largest penalty with an all-zero solution: max_j |grad_j L| at z = 0 with
/// the intercept at its MLE.
double lambda_max(const DesignMatrix& design, const Array& y);

/// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> make_lambda_grid(const DesignMatrix& design, const Array& y,
                                     int n_lambda, double min_ratio);

/// Fit a strictly decreasing lambda path, warm-starting each fit from the
/// previous solution.
std::vector<ModelFit> solve_path(const DesignMatrix& design, const Array& y,
                                 const std::vector<double>& lambdas,
                                 const SolverConfig& config);

}  // namespace lps

#endif  // LPS_SOLVER_HPP
