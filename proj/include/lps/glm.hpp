#ifndef LPS_GLM_HPP
#define LPS_GLM_HPP

#include <limits>
#include <string>
#include <vector>

#include "lps/tuning.hpp"

namespace lps {

/// Unpenalized logistic regression fit on a pattern subset (intercept always
/// included). p-values are Wald, from the observed information; after model
/// search they are post-selection quantities, not honest significance levels.
struct GlmFit {
  std::vector<Index> columns;        // design columns in the model (constant excluded)
  Vector coefficients;               // intercept first, then one per column
  Vector std_errors;
  Vector p_values;
  double deviance = 0.0;
  bool converged = false;
  bool separation_flag = false;
  int iterations = 0;

  double intercept() const { return coefficients[0]; }
};

/// IRLS to tolerance 1e-10 (at most 100 iterations), with step halving and
/// quasi-separation detection (|f| beyond 30 while the deviance still falls).
/// Throws ArgumentError naming the offending pattern if the design columns
/// are collinear over the data.
GlmFit fit_logistic(const DesignMatrix& design, const std::vector<Index>& columns,
                    const Array& y);

/// BGACV for the parametric fit: same score as the penalized case with
/// H built from B_s = the model's pattern columns.
double bgacv_parametric(const GlmFit& fit, const DesignMatrix& design, const Array& y);

/// One backward-elimination stage decision.
struct EliminationStage {
  std::vector<Index> columns;   // model after this stage
  double bgacv = std::numeric_limits<double>::infinity();
  Index removed = -1;           // column removed entering this stage (-1 for the full model)
  std::vector<std::pair<Index, double>> candidate_scores;  // scores of each trial removal
};

struct EliminationResult {
  std::vector<EliminationStage> stages;  // full model first, constant-only last
  std::size_t best_stage = 0;            // global BGACV argmin over the stages
  GlmFit final_fit;                      // refit of the winning stage
  PatternModel final_model;
  int glm_fits = 0;                      // fit counter: quadratic in the support size
};

/// Remove one pattern at a time, scoring each trial removal by parametric
/// BGACV, until no patterns remain; the final model is the stage with the
/// globally smallest score. Candidate refits that separate or lose rank
/// score +inf. Ties between removals drop the higher-order pattern, then the
/// lexicographically last.
EliminationResult backward_eliminate(const std::vector<Index>& step1_columns,
                                     const DesignMatrix& design, const Array& y);

}  // namespace lps

#endif  // LPS_GLM_HPP
