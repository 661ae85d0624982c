#ifndef LPS_PIPELINE_HPP
#define LPS_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lps/glm.hpp"
#include "lps/patterns.hpp"
#include "lps/solver.hpp"
#include "lps/tuning.hpp"

namespace lps {

struct LpsConfig {
  Criterion criterion = Criterion::bgacv;
  int n_lambda = 50;
  double lambda_min_ratio = 1e-4;
  std::uint64_t column_budget = 2'000'000;    // cap on design columns incl. constant
  std::optional<bool> screen;                 // unset = auto (on when p > 30)
  double screen_alpha = 0.05;
  SolverConfig solver;
  int threads = 0;                            // 0 = hardware concurrency
  std::uint64_t seed = 1;

  bool screening_enabled(Index p) const { return screen ? *screen : p > 30; }
};

struct ScreenResult {
  BinaryDataset data;               // retained variables, original order
  std::vector<Index> kept;          // original 0-based column indices
  std::vector<std::string> notes;   // dropped-degenerate warnings etc.
};

/// Per-source-variable logistic screen: dummy pairs (same var_group) enter
/// one model together; a variable is kept when any of its coefficients has
/// Wald p < alpha. Separated fits retain by convention; constant columns are
/// dropped with a warning.
ScreenResult screen_variables(const BinaryDataset& data, double alpha);

struct LpsReport {
  std::string dataset_digest;
  Index n = 0;
  Index p_original = 0;
  Index p_used = 0;
  int q = 0;
  Index n_columns = 0;

  bool screened = false;
  std::vector<std::string> screen_kept_names;
  std::vector<std::string> notes;   // warnings and degeneracy reports

  // Step 1: l1 path + score-based lambda choice
  double step1_lambda = 0.0;
  PatternModel step1_model;
  std::vector<ScoreRecord> score_path;

  // Step 2: backward elimination
  PatternModel final_model;
  std::vector<double> final_p_values;  // intercept first, then per term
  EliminationResult elimination;
  std::map<Index, Pattern> support_patterns;  // design column -> pattern (step-1 support)

  bool degenerate_response = false;  // constant y: null report, nothing fitted

  double seconds_screen = 0.0;
  double seconds_step1 = 0.0;
  double seconds_step2 = 0.0;

  std::vector<std::string> var_names;  // names in effect for pattern printing

  std::string pattern_name(const Pattern& pat) const { return to_string(pat, var_names); }

  /// Elimination trace CSV: stage,removed_pattern,bgacv,remaining_patterns
  void write_trace_csv(std::ostream& out) const;
};

/// Full two-step run: optional screen, pattern expansion within the column
/// budget, the penalized path tuned by the configured criterion, then
/// backward elimination on the survivors.
LpsReport run_lps(const BinaryDataset& data, int q, const LpsConfig& config);

/// Response-scrambling false-alarm study: permute y uniformly `reps` times,
/// rerun the full pipeline, and tabulate every discovered pattern by order.
struct ScrambleTable {
  int reps = 0;
  std::map<int, int> by_order;                    // pattern order -> total count
  std::vector<std::vector<std::string>> per_rep;  // discovered pattern names per rep
  int total() const;
};
ScrambleTable scramble_study(const BinaryDataset& data, int q, const LpsConfig& config,
                             int reps, std::uint64_t seed);

void write_scramble_csv(std::ostream& out, const ScrambleTable& table);

/// FNV-1a digest of the attribute matrix, responses and names.
std::string dataset_digest(const BinaryDataset& data);

}  // namespace lps

#endif  // LPS_PIPELINE_HPP
