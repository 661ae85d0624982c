#ifndef LPS_TYPES_HPP
#define LPS_TYPES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lps {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;

/// Bad caller input (bounds, shapes, malformed config). CLI maps this to exit code 1.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure surfaced with context. CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Boolean AND monomial over binary attributes: evaluates to 1 iff every
/// listed variable equals 1. Indices are 1-based and strictly increasing;
/// the empty index list is the constant pattern.
class Pattern {
 public:
  Pattern() = default;
  explicit Pattern(std::vector<std::int32_t> indices) : idx_(std::move(indices)) {
    for (std::size_t k = 0; k < idx_.size(); ++k) {
      if (idx_[k] < 1 || (k > 0 && idx_[k] <= idx_[k - 1]))
        throw ArgumentError("Pattern indices must be strictly increasing and >= 1");
    }
  }
  Pattern(std::initializer_list<std::int32_t> indices)
      : Pattern(std::vector<std::int32_t>(indices)) {}

  const std::vector<std::int32_t>& indices() const { return idx_; }
  int order() const { return static_cast<int>(idx_.size()); }
  bool is_constant() const { return idx_.empty(); }
  std::int32_t max_index() const { return idx_.empty() ? 0 : idx_.back(); }

  /// True iff every variable of the pattern equals 1 in x (x is 0-based).
  template <typename Vec>
  bool satisfied_by(const Vec& x) const {
    for (auto j : idx_)
      if (!(x[j - 1] != 0)) return false;
    return true;
  }

  // Order-then-lexicographic; this is the canonical enumeration order.
  friend bool operator<(const Pattern& a, const Pattern& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.idx_ < b.idx_;
  }
  friend bool operator==(const Pattern& a, const Pattern& b) { return a.idx_ == b.idx_; }
  friend bool operator!=(const Pattern& a, const Pattern& b) { return !(a == b); }

 private:
  std::vector<std::int32_t> idx_;
};

/// Report form: variable names joined by "×"; the constant prints as "constant".
std::string to_string(const Pattern& p, const std::vector<std::string>& var_names);
std::string to_string(const Pattern& p);

/// Binary attribute matrix with responses. Entries are validated {0,1};
/// missing values are rejected upstream at ingestion.
struct BinaryDataset {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> X;  // n x p
  Array y;                               // length n, entries 0/1
  std::vector<std::string> var_names;    // p labels
  std::vector<std::string> coding_notes; // per-variable risky-direction note
  std::vector<int> var_groups;           // source-variable grouping (dummy pairs share a group)

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  /// Throws unless shapes line up and all entries are 0/1.
  void validate() const;
};

/// Intercept plus sparse pattern expansion of the logit.
struct PatternModel {
  double mu = 0.0;
  std::vector<std::pair<Pattern, double>> terms;

  bool has_term(const Pattern& p) const {
    return std::any_of(terms.begin(), terms.end(),
                       [&](const auto& t) { return t.first == p; });
  }
};

}  // namespace lps

#endif  // LPS_TYPES_HPP
