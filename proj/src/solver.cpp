#include "lps/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lps {

namespace {

constexpr double kLogitCap = 36.0;  // sigmoid(36) rounds to 1 at double precision

double soft_threshold(double u, double t) {
  if (u > t) return u - t;
  if (u < -t) return u + t;
  return 0.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double penalized_l1(const Vector& z) {
  double s = 0.0;
  for (Index j = 1; j < z.size(); ++j) s += std::abs(z[j]);
  return s;
}

// (1/n) B_s' W B_s via column-support intersections against a scatter buffer;
// never materializes an n x |s| dense block.
Matrix hessian_block(const DesignMatrix& design, const std::vector<Index>& cols,
                     const Array& w) {
  const Index m = static_cast<Index>(cols.size());
  const double n = static_cast<double>(design.rows());
  Matrix H = Matrix::Zero(m, m);
  Vector buf = Vector::Zero(design.rows());
  for (Index a = 0; a < m; ++a) {
    for (Index i : design.col_support(cols[a])) buf[i] = w[i];
    for (Index b = a; b < m; ++b) {
      double s = 0.0;
      for (Index i : design.col_support(cols[b])) s += buf[i];
      H(a, b) = H(b, a) = s / n;
    }
    for (Index i : design.col_support(cols[a])) buf[i] = 0.0;
  }
  return H;
}

struct WorkingSet {
  std::vector<Index> cols;   // sorted, unique; always contains the constant
  bool full = false;
};

WorkingSet select_working_set(const Vector& z, double sigma, std::mt19937_64& rng,
                              std::vector<Index>& shuffle_pool, bool force_full) {
  const Index m = z.size();
  WorkingSet ws;
  if (force_full || sigma >= 1.0) {
    ws.full = true;
    ws.cols.resize(m);
    for (Index j = 0; j < m; ++j) ws.cols[j] = j;
    return ws;
  }
  const Index k = std::max<Index>(1, static_cast<Index>(std::llround(sigma * double(m))));
  // partial Fisher-Yates over a persistent pool: a fresh random selection of
  // k distinct columns each iteration
  for (Index t = 0; t < k; ++t) {
    const Index r = t + static_cast<Index>(rng() % static_cast<std::uint64_t>(m - t));
    std::swap(shuffle_pool[t], shuffle_pool[r]);
  }
  ws.cols.assign(shuffle_pool.begin(), shuffle_pool.begin() + k);
  ws.cols.push_back(DesignMatrix::constant_column_index);
  for (Index j = 1; j < m; ++j)
    if (z[j] != 0.0) ws.cols.push_back(j);
  std::sort(ws.cols.begin(), ws.cols.end());
  ws.cols.erase(std::unique(ws.cols.begin(), ws.cols.end()), ws.cols.end());
  return ws;
}

}  // namespace

void SolverConfig::validate() const {
  if (tol < 0) throw ArgumentError("solver: tol must be nonnegative");
  if (!(eta > 0 && eta < 1)) throw ArgumentError("solver: eta must lie in (0,1)");
  if (!(alpha0 > 0)) throw ArgumentError("solver: alpha0 must be positive");
  if (sigma && !(*sigma > 0 && *sigma <= 1))
    throw ArgumentError("solver: sigma must lie in (0,1]");
  if (newton_max_inactive <= 0) throw ArgumentError("solver: newton_max_inactive must be positive");
  if (max_iters <= 0) throw ArgumentError("solver: max_iters must be positive");
}

double SolverConfig::resolve_sigma(Index n_cols, Index n_rows) const {
  if (sigma) return *sigma;
  return n_cols > 10 * n_rows ? 0.1 : 1.0;
}

Vector ModelFit::dense(Index n_cols) const {
  Vector z = Vector::Zero(n_cols);
  z[DesignMatrix::constant_column_index] = mu;
  for (std::size_t k = 0; k < support.size(); ++k) z[support[k]] = coefficients[k];
  return z;
}

PatternModel ModelFit::to_pattern_model(const DesignMatrix& design) const {
  PatternModel m;
  m.mu = mu;
  for (std::size_t k = 0; k < support.size(); ++k)
    m.terms.emplace_back(design.pattern_of_column(support[k]), coefficients[k]);
  return m;
}

Array probabilities(const Vector& f) {
  Array p(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    const double fc = std::clamp(f[i], -kLogitCap, kLogitCap);
    p[i] = fc >= 0 ? 1.0 / (1.0 + std::exp(-fc))
                   : std::exp(fc) / (1.0 + std::exp(fc));
  }
  return p;
}

double neg_log_lik_value(const Vector& f, const Array& y) {
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i)
    s += -y[i] * f[i] + std::max(f[i], 0.0) + std::log1p(std::exp(-std::abs(f[i])));
  return s / static_cast<double>(f.size());
}

LikelihoodParts neg_log_lik_grad_hess(const DesignMatrix& design, const Array& y,
                                      const Vector& z, const std::vector<Index>& subset,
                                      bool want_hessian) {
  const double n = static_cast<double>(design.rows());
  const Vector f = design.logits(z);
  const Array p = probabilities(f);
  const Array resid = p - y;

  LikelihoodParts parts;
  parts.value = neg_log_lik_value(f, y);
  parts.gradient.resize(static_cast<Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k)
    parts.gradient[static_cast<Index>(k)] = design.column_dot(subset[k], resid) / n;
  if (want_hessian) parts.hessian = hessian_block(design, subset, p * (1.0 - p));
  return parts;
}

Vector first_order_step(const Vector& z, const Vector& grad_w,
                        const std::vector<Index>& working, double alpha, double lambda) {
  if (grad_w.size() != static_cast<Index>(working.size()))
    throw ArgumentError("first_order_step: gradient/working-set length mismatch");
  if (!(alpha > 0)) throw ArgumentError("first_order_step: alpha must be positive");
  Vector d(grad_w.size());
  for (std::size_t k = 0; k < working.size(); ++k) {
    const Index j = working[k];
    const double u = z[j] - grad_w[static_cast<Index>(k)] / alpha;
    const double target = (j == DesignMatrix::constant_column_index)
                              ? u
                              : soft_threshold(u, lambda / alpha);
    d[static_cast<Index>(k)] = target - z[j];
  }
  return d;
}

double optimality_measure(const Vector& z, const Vector& grad_w,
                          const std::vector<Index>& working, double lambda) {
  double ss = 0.0;
  for (std::size_t k = 0; k < working.size(); ++k) {
    const Index j = working[k];
    const double g = grad_w[static_cast<Index>(k)];
    double r;
    if (j == DesignMatrix::constant_column_index)
      r = g;
    else if (z[j] != 0.0)
      r = g + lambda * sign(z[j]);
    else
      r = sign(g) * std::max(std::abs(g) - lambda, 0.0);
    ss += r * r;
  }
  return std::sqrt(ss);
}

Vector reduced_newton_step(const Matrix& hess_block, const Vector& grad_i,
                           const Vector& w_i, double lambda, double delta_k) {
  Matrix A = hess_block;
  A.diagonal().array() += delta_k;
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("reduced Newton factorization failed (size " +
                         std::to_string(hess_block.rows()) + ", damping " +
                         std::to_string(delta_k) + ")");
  return ldlt.solve(-(grad_i + lambda * w_i));
}

double lambda_max(const DesignMatrix& design, const Array& y) {
  const double ybar = y.mean();
  if (!(ybar > 0.0 && ybar < 1.0))
    throw ArgumentError("lambda_max: response is constant (degenerate fit)");
  const double n = static_cast<double>(design.rows());
  const Vector f = Vector::Constant(design.rows(), std::log(ybar / (1.0 - ybar)));
  const Array resid = probabilities(f) - y;
  double lmax = 0.0;
  for (Index j = 1; j < design.cols(); ++j)
    lmax = std::max(lmax, std::abs(design.column_dot(j, resid) / n));
  return lmax;
}

std::vector<double> make_lambda_grid(const DesignMatrix& design, const Array& y,
                                     int n_lambda, double min_ratio) {
  if (n_lambda < 1) throw ArgumentError("lambda grid needs at least one point");
  if (!(min_ratio > 0 && min_ratio <= 1)) throw ArgumentError("lambda grid ratio must be in (0,1]");
  const double lmax = lambda_max(design, y);
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  for (int i = 0; i < n_lambda; ++i) {
    const double t = n_lambda == 1 ? 0.0 : double(i) / double(n_lambda - 1);
    grid[static_cast<std::size_t>(i)] = lmax * std::pow(min_ratio, t);
  }
  return grid;
}

ModelFit solve_single(const DesignMatrix& design, const Array& y, double lambda,
                      const SolverConfig& config, const Vector* warm_start) {
  config.validate();
  if (lambda < 0) throw ArgumentError("solve_single: lambda must be nonnegative");
  const Index m = design.cols();
  const Index n = design.rows();
  const double dn = static_cast<double>(n);
  const double sigma = config.resolve_sigma(m, n);

  SolverState st;
  st.rng.seed(config.seed);
  st.alpha = config.alpha0;
  if (warm_start) {
    if (warm_start->size() != m) throw ArgumentError("solve_single: warm start length mismatch");
    st.z = *warm_start;
  } else {
    const double ybar = y.mean();
    if (!(ybar > 0.0 && ybar < 1.0))
      throw ArgumentError("solve_single: response is constant (degenerate fit)");
    st.z = Vector::Zero(m);
    st.z[DesignMatrix::constant_column_index] = std::log(ybar / (1.0 - ybar));
  }

  std::vector<Index> pool(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) pool[static_cast<std::size_t>(j)] = j;

  Vector f = design.logits(st.z);
  double obj = neg_log_lik_value(f, y) + lambda * penalized_l1(st.z);

  bool converged = false;
  bool force_full = false;
  bool prev_below_tol = false;

  Vector f_cand(n), f_newton(n);
  while (st.iteration < config.max_iters) {
    WorkingSet ws = select_working_set(st.z, sigma, st.rng, pool, force_full);
    const Array p = probabilities(f);
    const Array resid = p - y;
    Vector g(static_cast<Index>(ws.cols.size()));
    for (std::size_t k = 0; k < ws.cols.size(); ++k)
      g[static_cast<Index>(k)] = design.column_dot(ws.cols[k], resid) / dn;

    st.delta = optimality_measure(st.z, g, ws.cols, lambda);
    if (st.delta < config.tol) {
      if (prev_below_tol && ws.full) {
        converged = true;
        break;
      }
      prev_below_tol = true;
      force_full = true;
    } else {
      prev_below_tol = false;
      force_full = false;
    }

    // first-order proposal over the working set
    const Vector d = first_order_step(st.z, g, ws.cols, st.alpha, lambda);
    f_cand = f;
    double l1_d = penalized_l1(st.z);
    for (std::size_t k = 0; k < ws.cols.size(); ++k) {
      const Index j = ws.cols[k];
      const double dk = d[static_cast<Index>(k)];
      if (dk != 0.0) {
        design.add_scaled_column(f_cand, j, dk);
        if (j != DesignMatrix::constant_column_index)
          l1_d += std::abs(st.z[j] + dk) - std::abs(st.z[j]);
      }
    }
    const double obj_d = neg_log_lik_value(f_cand, y) + lambda * l1_d;

    // active-set estimate from z+d; constant column is always inactive
    st.inactive.clear();
    st.active.clear();
    std::vector<double> zd_i;  // z+d on the inactive set
    for (std::size_t k = 0; k < ws.cols.size(); ++k) {
      const Index j = ws.cols[k];
      const double zd = st.z[j] + d[static_cast<Index>(k)];
      if (j == DesignMatrix::constant_column_index || zd != 0.0) {
        st.inactive.push_back(j);
        zd_i.push_back(zd);
      } else {
        st.active.push_back(j);
      }
    }

    const char* step_type = "rejected";
    bool moved = false;
    const double obj_before = obj;

    if (static_cast<int>(st.inactive.size()) <= config.newton_max_inactive) {
      // reduced Newton on the inactive estimate
      Vector g_i(static_cast<Index>(st.inactive.size()));
      Vector w_i(static_cast<Index>(st.inactive.size()));
      {
        std::size_t kw = 0;
        for (std::size_t k = 0; k < st.inactive.size(); ++k) {
          while (ws.cols[kw] != st.inactive[k]) ++kw;
          g_i[static_cast<Index>(k)] = g[static_cast<Index>(kw)];
          w_i[static_cast<Index>(k)] =
              st.inactive[k] == DesignMatrix::constant_column_index ? 0.0 : sign(zd_i[k]);
        }
      }
      const Matrix hess = hessian_block(design, st.inactive, p * (1.0 - p));
      const double delta_k = std::min(st.delta, hess.diagonal().mean());
      const Vector step = reduced_newton_step(hess, g_i, w_i, lambda, delta_k);

      auto try_newton = [&](double gamma) {
        f_newton = f;
        double l1 = 0.0;
        for (std::size_t k = 0; k < st.inactive.size(); ++k) {
          const Index j = st.inactive[k];
          const double znew = st.z[j] + gamma * step[static_cast<Index>(k)];
          if (znew != st.z[j]) design.add_scaled_column(f_newton, j, znew - st.z[j]);
          if (j != DesignMatrix::constant_column_index) l1 += std::abs(znew);
        }
        for (Index j : st.active)
          if (st.z[j] != 0.0) design.add_scaled_column(f_newton, j, -st.z[j]);
        return neg_log_lik_value(f_newton, y) + lambda * l1;
      };
      auto commit_newton = [&](double gamma) {
        for (std::size_t k = 0; k < st.inactive.size(); ++k)
          st.z[st.inactive[k]] += gamma * step[static_cast<Index>(k)];
        for (Index j : st.active) st.z[j] = 0.0;
        f.swap(f_newton);
        moved = true;
      };

      const double obj_newton = try_newton(1.0);
      if (obj_newton < std::min(obj_d, obj)) {
        commit_newton(1.0);
        obj = obj_newton;
        step_type = "newton";
      } else {
        // longest sign-preserving damping of the Newton step
        double gamma = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < st.inactive.size(); ++k) {
          const double zj = st.z[st.inactive[k]];
          const double pk = step[static_cast<Index>(k)];
          if (zj != 0.0 && pk != 0.0 && sign(pk) == -sign(zj))
            gamma = std::min(gamma, -zj / pk);
        }
        if (std::isfinite(gamma) && gamma < 1.0) {
          gamma *= 1.0 - 1e-12;
          const double obj_damped = try_newton(gamma);
          if (obj_damped < std::min(obj_d, obj)) {
            commit_newton(gamma);
            obj = obj_damped;
            step_type = "damped_newton";
          }
        }
      }
    }

    if (!moved && obj_d < obj) {
      for (std::size_t k = 0; k < ws.cols.size(); ++k)
        st.z[ws.cols[k]] += d[static_cast<Index>(k)];
      f.swap(f_cand);
      obj = obj_d;
      step_type = "first_order";
      moved = true;
    }

    // alpha follows the first-order step's own success only
    if (obj_d < obj_before)
      st.alpha *= config.eta;
    else
      st.alpha /= config.eta;

    ++st.iteration;
    if (config.diagnostics)
      (*config.diagnostics) << st.iteration << ',' << obj << ',' << st.delta << ','
                            << st.inactive.size() << ',' << step_type << '\n';
  }

  ModelFit fit;
  fit.lambda = lambda;
  fit.mu = st.z[DesignMatrix::constant_column_index];
  for (Index j = 1; j < m; ++j)
    if (st.z[j] != 0.0) {
      fit.support.push_back(j);
      fit.coefficients.push_back(st.z[j]);
    }
  fit.neg_log_lik = neg_log_lik_value(f, y);
  fit.objective = fit.neg_log_lik + lambda * penalized_l1(st.z);
  fit.converged = converged;
  fit.iterations = st.iteration;

  // certificate: always report delta on the full gradient
  {
    const Array resid = probabilities(f) - y;
    std::vector<Index> all(static_cast<std::size_t>(m));
    Vector g(m);
    for (Index j = 0; j < m; ++j) {
      all[static_cast<std::size_t>(j)] = j;
      g[j] = design.column_dot(j, resid) / dn;
    }
    fit.delta_final = optimality_measure(st.z, g, all, lambda);
  }
  return fit;
}

std::vector<ModelFit> solve_path(const DesignMatrix& design, const Array& y,
                                 const std::vector<double>& lambdas,
                                 const SolverConfig& config) {
  if (lambdas.empty()) throw ArgumentError("solve_path: empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 0) throw ArgumentError("solve_path: lambdas must be nonnegative");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw ArgumentError("solve_path: lambdas must be strictly decreasing");
  }
  std::vector<ModelFit> fits;
  fits.reserve(lambdas.size());
  Vector warm;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i == 0) {
      fits.push_back(solve_single(design, y, lambdas[i], config));
    } else {
      warm = fits.back().dense(design.cols());
      fits.push_back(solve_single(design, y, lambdas[i], config, &warm));
    }
  }
  return fits;
}

}  // namespace lps
