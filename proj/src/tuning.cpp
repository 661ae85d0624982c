#include "lps/tuning.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace lps {

HTraceResult compute_h_trace(const DesignMatrix& design, const std::vector<Index>& cols,
                             const Array& w) {
  const Index n = design.rows();
  const Index s = static_cast<Index>(cols.size());
  if (s == 0) throw ArgumentError("compute_h_trace: empty column set");
  if (n <= s)
    throw NumericalError("scoring requires n > model size (n=" + std::to_string(n) +
                         ", size=" + std::to_string(s) + ")");

  const Matrix B = design.dense_block(cols);
  const Matrix U = B.transpose() * w.matrix().asDiagonal() * B;
  const Matrix G = B.transpose() * B;

  auto factor = [&](const Matrix& A) { return Eigen::LDLT<Matrix>(A); };
  Eigen::LDLT<Matrix> ldlt = factor(U);
  auto ill = [&](const Eigen::LDLT<Matrix>& f) {
    if (f.info() != Eigen::Success) return true;
    const Vector dvec = f.vectorD();
    const double dmax = dvec.maxCoeff();
    const double dmin = dvec.minCoeff();
    return !(dmin > 0.0) || dmax / dmin > 1e14;
  };
  if (ill(ldlt)) {
    Matrix Ur = U;
    Ur.diagonal().array() += 1e-10 * U.diagonal().mean();
    ldlt = factor(Ur);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("compute_h_trace: B*'WB* factorization failed");
  }

  HTraceResult res;
  res.trace_H = ldlt.solve(G).trace();
  // tr(WH) = sum_i w_i * b_i' U^{-1} b_i, without the n x n matrix
  const Matrix X = ldlt.solve(B.transpose());  // s x n
  res.trace_WH = ((B.array() * X.transpose().array()).rowwise().sum() * w).sum();
  return res;
}

namespace {

ScoreRecord score_fit(const ModelFit& fit, const DesignMatrix& design, const Array& y) {
  if (!fit.converged) throw NumericalError("scoring requires a converged fit");
  const Index n = design.rows();
  const double dn = static_cast<double>(n);

  const Vector f = design.logits(fit.dense(design.cols()));
  const Array p = probabilities(f);

  // B* = nonzero penalized columns; constant-only fallback keeps the null
  // model scorable
  std::vector<Index> cols = fit.support;
  if (cols.empty()) cols.push_back(DesignMatrix::constant_column_index);
  const HTraceResult ht = compute_h_trace(design, cols, p * (1.0 - p));

  ScoreRecord rec;
  rec.lambda = fit.lambda;
  rec.n_b0 = fit.support_size();
  rec.obs = neg_log_lik_value(f, y);
  rec.trace_H = ht.trace_H;
  rec.trace_WH = ht.trace_WH;
  const double denom = dn - static_cast<double>(cols.size());
  rec.gamma = ht.trace_H * (y * (y - p)).sum() / denom;
  rec.gacv = rec.obs + rec.gamma / dn;
  rec.bgacv = rec.obs + 0.5 * std::log(dn) * rec.gamma / dn;
  rec.scored = true;
  return rec;
}

}  // namespace

ScoreRecord gacv(const ModelFit& fit, const DesignMatrix& design, const Array& y) {
  return score_fit(fit, design, y);
}

ScoreRecord bgacv(const ModelFit& fit, const DesignMatrix& design, const Array& y) {
  return score_fit(fit, design, y);
}

SelectionResult select_lambda(const std::vector<ModelFit>& path, const DesignMatrix& design,
                              const Array& y, Criterion criterion) {
  if (path.empty()) throw ArgumentError("select_lambda: empty path");
  SelectionResult sel;
  sel.records.resize(path.size());
  bool have = false;
  double best = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const ModelFit& fit = path[i];
    if (!fit.converged) {
      std::ostringstream msg;
      msg << "skipping unconverged fit at lambda=" << fit.lambda;
      sel.warnings.push_back(msg.str());
      sel.records[i].lambda = fit.lambda;
      continue;
    }
    try {
      sel.records[i] = score_fit(fit, design, y);
    } catch (const NumericalError& e) {
      sel.warnings.push_back("skipping fit at lambda=" + std::to_string(fit.lambda) +
                             ": " + e.what());
      sel.records[i].lambda = fit.lambda;
      continue;
    }
    const double v = sel.records[i].value(criterion);
    // strict < keeps the earlier (larger-lambda, sparser) fit on ties
    if (!have || v < best) {
      have = true;
      best = v;
      sel.index = i;
    }
  }
  if (!have) throw NumericalError("select_lambda: no scorable fit on the path");
  return sel;
}

void write_score_csv(std::ostream& out, const std::vector<ScoreRecord>& records,
                     std::optional<std::size_t> selected) {
  out << "lambda,obs,trace_H,gamma,gacv,bgacv,N_B0";
  if (selected) out << ",selected";
  out << '\n';
  out.precision(12);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.scored) continue;
    out << r.lambda << ',' << r.obs << ',' << r.trace_H << ',' << r.gamma << ','
        << r.gacv << ',' << r.bgacv << ',' << r.n_b0;
    if (selected) out << ',' << (i == *selected ? 1 : 0);
    out << '\n';
  }
}

}  // namespace lps
