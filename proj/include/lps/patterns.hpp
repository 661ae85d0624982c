#ifndef LPS_PATTERNS_HPP
#define LPS_PATTERNS_HPP

#include <cstdint>
#include <set>
#include <vector>

#include "lps/types.hpp"

namespace lps {

/// Column-sparse 0/1 design matrix: one column per pattern, the constant
/// column first. Each column stores the sorted row indices where it is 1;
/// values are never materialized as floats until a solver contracts them.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(Index n_rows, std::vector<Pattern> patterns,
               std::vector<std::vector<Index>> col_support);

  Index rows() const { return n_; }
  Index cols() const { return static_cast<Index>(support_.size()); }
  static constexpr Index constant_column_index = 0;

  const std::vector<Index>& col_support(Index j) const { return support_[j]; }
  const Pattern& pattern_of_column(Index j) const { return patterns_[j]; }
  const std::vector<Pattern>& patterns() const { return patterns_; }

  /// f = sum_j z_j * B_j over all columns (z dense, length cols()).
  Vector logits(const Vector& z) const;

  /// f += a * B_j, in place.
  void add_scaled_column(Vector& f, Index j, double a) const;

  /// sum_{i in support(j)} v_i
  double column_dot(Index j, const Array& v) const;

  /// Dense n x |cols| contraction of selected columns (for Newton blocks and scoring).
  Matrix dense_block(const std::vector<Index>& cols) const;

 private:
  Index n_ = 0;
  std::vector<Pattern> patterns_;
  std::vector<std::vector<Index>> support_;
};

/// All non-constant patterns of order 1..q over p variables, ordered by
/// order then lexicographically. The constant column is the design
/// builder's job.
std::vector<Pattern> enumerate_patterns(int p, int q);

/// Number of design columns including the constant: sum_{v=0}^{q} C(p,v),
/// saturating at 2^63-1.
std::uint64_t enumeration_size(int p, int q);

/// Evaluate the patterns on the data. Column order = input order with the
/// constant (all-ones) column prepended.
DesignMatrix build_design(const BinaryDataset& data, const std::vector<Pattern>& patterns);

/// Logit of the model at a single attribute vector (0-based, length p).
double evaluate_model(const PatternModel& m, const std::vector<std::uint8_t>& x, int p);

/// Recode x_j -> 1-x_j for every j in S. Returns the unique model g with
/// g(recoded x) == m(x) on {0,1}^p, via the signed subset-sum expansion of
/// each term; exact-zero coefficients are dropped (dyadic arithmetic, no
/// epsilon).
PatternModel flip_coding(const PatternModel& m, const std::set<std::int32_t>& S);

}  // namespace lps

#endif  // LPS_PATTERNS_HPP
