#ifndef LPS_TEST_ORACLES_HPP
#define LPS_TEST_ORACLES_HPP

// Independent reference implementations used only by tests. Everything here
// works on dense Eigen matrices and deliberately shares no code with the
// library's solve path.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "lps/patterns.hpp"
#include "lps/solver.hpp"

namespace oracle {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ProxResult {
  VectorXd z;
  double objective = 0.0;
  double delta = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated proximal gradient (FISTA with adaptive restart) for
/// min (1/n) sum[-y f + log(1+e^f)] + lambda * sum_{j>=1} |z_j|,
/// column 0 unpenalized. Runs until its own subgradient measure <= tol.
ProxResult prox_gradient_solve(const MatrixXd& B, const ArrayXd& y, double lambda,
                               double tol, int max_iter = 2000000);

/// Objective value of the penalized problem at z (dense route).
double penalized_objective(const MatrixXd& B, const ArrayXd& y, double lambda,
                           const VectorXd& z);

/// trace of B*(B*' W B*)^{-1} B*' by explicit construction of the n x n
/// matrix, and trace(W H) the same way.
struct DenseH {
  double trace_H = 0.0;
  double trace_WH = 0.0;
};
DenseH dense_h_trace(const MatrixXd& B_star, const ArrayXd& w);

/// Newton-with-halving logistic MLE on a dense design (intercept included
/// as a column of D). Gradient norm driven to 1e-12 * n.
VectorXd reference_logistic(const MatrixXd& D, const ArrayXd& y, int max_iter = 200);

/// Exact leave-one-out CV score at one lambda: n refits with one row
/// removed; the log-partition term uses the full-data fit.
double exact_loo_cv(const lps::BinaryDataset& data, const std::vector<lps::Pattern>& patterns,
                    double lambda, const lps::SolverConfig& config);

/// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, double k);

/// Spearman rank correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Random sparse-logit test instance on a binary design: column 0 is the
/// constant, the rest are iid Bernoulli(density) columns; y is drawn from a
/// sparse true model.
struct RandomInstance {
  MatrixXd B;         // dense, n x m
  ArrayXd y;
  lps::DesignMatrix design;  // same matrix, column-sparse
};
RandomInstance random_instance(std::int64_t n, std::int64_t m, double density,
                               std::uint64_t seed);

}  // namespace oracle

#endif  // LPS_TEST_ORACLES_HPP
