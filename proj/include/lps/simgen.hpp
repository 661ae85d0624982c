#ifndef LPS_SIMGEN_HPP
#define LPS_SIMGEN_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lps/pipeline.hpp"
#include "lps/types.hpp"

namespace lps {

/// Self-contained RNG so generated datasets are bit-identical under a fixed
/// seed across standard libraries (no std::*_distribution involved).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform();                 // (0,1)
  double normal();                  // standard normal, Box-Muller
  bool bernoulli(double prob) { return uniform() < prob; }
  std::uint64_t integer(std::uint64_t bound);  // uniform on [0, bound)

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SimData {
  BinaryDataset data;
  PatternModel truth;
};

enum class ExampleId { ex1, ex2, ex3, gaw };

/// One simulation scenario: which generator, the sample size, correlation
/// parameters where applicable, and the seed.
struct SimSpec {
  ExampleId id = ExampleId::ex1;
  Index n = 800;
  double rho = 0.0;    // ex2 copy probability
  double rho1 = 0.0;   // ex3 within-block correlation
  double rho2 = 0.0;   // ex3 copy probability
  std::uint64_t seed = 1;

  SimData generate() const;
};

/// Seven binary attributes: three thresholded bivariate-normal pairs
/// (covariance 0.7) plus an independent coin; logit -2 + 1.5*B1 + 1.5*B23 + 2*B456.
SimData gen_example1(Index n, std::uint64_t seed);

/// Eight attributes: four thresholded equicorrelated (0.7) normals with mean 1,
/// echoed into x5..x8 with copy probability rho; logit -2 + 2*B1234.
SimData gen_example2(Index n, double rho, std::uint64_t seed);

/// Twenty attributes: the example-2 block with correlations (rho1, rho2) plus
/// twelve independent coins; logit -2 + 2*B9 + 2*B67 + 2*B1234.
SimData gen_example3(Index n, double rho1, double rho2, std::uint64_t seed);

struct GawOptions {
  int n_snps = 674;
  double p_one_variant = 0.25;  // default marginal of a 1-variant dummy
  double p_two_variant = 0.05;  // default marginal of a 2-variant dummy
  // per-SNP (1-based) marginal overrides for scenarios with common variants
  std::map<int, std::pair<double, double>> snp_overrides;
};

/// Wide SNP-style panel: sex/smoking/age plus dummy pairs for each
/// three-level SNP (mutually exclusive within a pair, shared var_group).
/// The generating logit has a -4.8546 constant, a smoking main effect,
/// three SNP main effects, five second-order patterns and a third-order
/// sex x SNP108_2 x SNP334_2 pattern with coefficient 3. SNP marginals are
/// synthetic stand-ins and configurable.
SimData gen_gaw_style(Index n, std::uint64_t seed, const GawOptions& opts = {});

/// Null-association panel shaped like a small demographic study: p = 7
/// attributes with fixed marginals and a response with exactly
/// round(0.137 n) ones, independent of the attributes.
BinaryDataset gen_myopia_shape(Index n, std::uint64_t seed);

/// Detection table from running the full pipeline on `reps` fresh datasets:
/// a true pattern counts as detected only on an exact term match in the
/// final model; every other discovered pattern counts as noise.
struct FrequencyTable {
  std::vector<std::string> pattern_names;  // true patterns, in truth order
  std::vector<int> counts;                 // detections per true pattern
  int noise_total = 0;
  int reps = 0;
};
FrequencyTable replicate(const SimSpec& spec, int reps, const LpsConfig& config);

void write_frequency_csv(std::ostream& out, const FrequencyTable& table);

}  // namespace lps

#endif  // LPS_SIMGEN_HPP
