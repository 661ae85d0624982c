#ifndef LPS_TUNING_HPP
#define LPS_TUNING_HPP

#include <utility>
#include <vector>

#include "lps/solver.hpp"

namespace lps {

enum class Criterion { gacv, bgacv };

/// Per-lambda scoring record. obs is the in-sample mean negative log
/// likelihood; gamma = trace_H * sum y_i(y_i - p_i) / (n - N_B0) plays the
/// role of degrees of freedom; bgacv weights the optimism term by (log n)/2.
struct ScoreRecord {
  double lambda = 0.0;
  double obs = 0.0;
  double trace_H = 0.0;
  double trace_WH = 0.0;  // equals the column count of B* up to roundoff
  double gamma = 0.0;
  double gacv = 0.0;
  double bgacv = 0.0;
  Index n_b0 = 0;        // penalized support size (constant excluded)
  bool scored = false;   // false when the fit was unscorable (skipped)

  double value(Criterion c) const { return c == Criterion::gacv ? gacv : bgacv; }
};

struct HTraceResult {
  double trace_H = 0.0;
  double trace_WH = 0.0;
};

/// trace of H = B*(B*'WB*)^{-1}B*' without forming the n x n matrix, plus
/// the tr(WH) diagnostic. B* holds the given columns; a nearly singular
/// B*'WB* is ridged by 1e-10 times its mean diagonal. Throws NumericalError
/// when n <= |cols| (nonpositive optimism denominator).
HTraceResult compute_h_trace(const DesignMatrix& design, const std::vector<Index>& cols,
                             const Array& w);

/// GACV/BGACV record for a converged fit. B* is the support; an empty
/// support falls back to the constant column (denominator n - 1) so the
/// null model stays scorable.
ScoreRecord gacv(const ModelFit& fit, const DesignMatrix& design, const Array& y);
ScoreRecord bgacv(const ModelFit& fit, const DesignMatrix& design, const Array& y);

/// Pick the path fit with the smallest score; ties break toward larger
/// lambda. Unconverged or unscorable fits are skipped with a warning note.
struct SelectionResult {
  std::size_t index = 0;
  std::vector<ScoreRecord> records;  // aligned with the path
  std::vector<std::string> warnings;
};
SelectionResult select_lambda(const std::vector<ModelFit>& path, const DesignMatrix& design,
                              const Array& y, Criterion criterion);

/// ScorePath CSV: lambda,obs,trace_H,gamma,gacv,bgacv,N_B0. Passing the
/// selected path index appends a 0/1 `selected` marker column.
void write_score_csv(std::ostream& out, const std::vector<ScoreRecord>& records,
                     std::optional<std::size_t> selected = std::nullopt);

}  // namespace lps

#endif  // LPS_TUNING_HPP
