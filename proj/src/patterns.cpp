#include "lps/patterns.hpp"

#include <limits>
#include <map>
#include <sstream>

namespace lps {

std::string to_string(const Pattern& p, const std::vector<std::string>& var_names) {
  if (p.is_constant()) return "constant";
  std::ostringstream out;
  bool first = true;
  for (auto j : p.indices()) {
    if (!first) out << "×";
    first = false;
    if (j >= 1 && static_cast<std::size_t>(j) <= var_names.size())
      out << var_names[j - 1];
    else
      out << "x" << j;
  }
  return out.str();
}

std::string to_string(const Pattern& p) { return to_string(p, {}); }

void BinaryDataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw ArgumentError("dataset must have n >= 1 and p >= 1");
  if (y.size() != X.rows()) throw ArgumentError("response length does not match row count");
  for (Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0) throw ArgumentError("responses must be exactly 0 or 1");
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i)
      if (X(i, j) > 1) throw ArgumentError("attributes must be exactly 0 or 1");
  if (!var_names.empty() && static_cast<Index>(var_names.size()) != X.cols())
    throw ArgumentError("var_names length does not match column count");
  if (!var_groups.empty() && static_cast<Index>(var_groups.size()) != X.cols())
    throw ArgumentError("var_groups length does not match column count");
}

DesignMatrix::DesignMatrix(Index n_rows, std::vector<Pattern> patterns,
                           std::vector<std::vector<Index>> col_support)
    : n_(n_rows), patterns_(std::move(patterns)), support_(std::move(col_support)) {
  if (patterns_.size() != support_.size())
    throw ArgumentError("design: one pattern per column required");
}

Vector DesignMatrix::logits(const Vector& z) const {
  if (z.size() != cols()) throw ArgumentError("design: coefficient length mismatch");
  Vector f = Vector::Zero(n_);
  for (Index j = 0; j < cols(); ++j)
    if (z[j] != 0.0) add_scaled_column(f, j, z[j]);
  return f;
}

void DesignMatrix::add_scaled_column(Vector& f, Index j, double a) const {
  for (Index i : support_[j]) f[i] += a;
}

double DesignMatrix::column_dot(Index j, const Array& v) const {
  double s = 0.0;
  for (Index i : support_[j]) s += v[i];
  return s;
}

Matrix DesignMatrix::dense_block(const std::vector<Index>& cols) const {
  Matrix B = Matrix::Zero(n_, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (Index i : support_[cols[k]]) B(i, static_cast<Index>(k)) = 1.0;
  return B;
}

std::vector<Pattern> enumerate_patterns(int p, int q) {
  if (q < 1 || q > p) throw ArgumentError("enumerate_patterns requires 1 <= q <= p");
  std::vector<Pattern> out;
  std::vector<std::int32_t> comb;
  for (int r = 1; r <= q; ++r) {
    // lexicographic r-combinations of {1..p}
    comb.resize(r);
    for (int k = 0; k < r; ++k) comb[k] = k + 1;
    while (true) {
      out.emplace_back(comb);
      int k = r - 1;
      while (k >= 0 && comb[k] == p - (r - 1 - k)) --k;
      if (k < 0) break;
      ++comb[k];
      for (int t = k + 1; t < r; ++t) comb[t] = comb[t - 1] + 1;
    }
  }
  return out;
}

std::uint64_t enumeration_size(int p, int q) {
  if (q < 0 || q > p) throw ArgumentError("enumeration_size requires 0 <= q <= p");
  const std::uint64_t cap = std::numeric_limits<std::int64_t>::max();
  std::uint64_t total = 0, c = 1;  // C(p,0)
  for (int v = 0; v <= q; ++v) {
    if (total > cap - c) return cap;
    total += c;
    if (v < q) {
      // C(p,v+1) = C(p,v)*(p-v)/(v+1); guard the multiply
      if (c > cap / static_cast<std::uint64_t>(p - v)) return cap;
      c = c * static_cast<std::uint64_t>(p - v) / static_cast<std::uint64_t>(v + 1);
    }
  }
  return total;
}

DesignMatrix build_design(const BinaryDataset& data, const std::vector<Pattern>& patterns) {
  const Index n = data.n();
  const Index p = data.p();
  for (const auto& pat : patterns)
    if (pat.max_index() > p) throw ArgumentError("pattern index exceeds variable count");

  // per-variable row supports, reused across patterns
  std::vector<std::vector<Index>> var_rows(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i)
      if (data.X(i, j) != 0) var_rows[static_cast<std::size_t>(j)].push_back(i);

  std::vector<Pattern> cols;
  cols.reserve(patterns.size() + 1);
  std::vector<std::vector<Index>> support;
  support.reserve(patterns.size() + 1);

  cols.emplace_back(Pattern{});
  std::vector<Index> all(n);
  for (Index i = 0; i < n; ++i) all[i] = i;
  support.push_back(std::move(all));

  std::vector<Index> acc, tmp;
  for (const auto& pat : patterns) {
    const auto& idx = pat.indices();
    acc = var_rows[static_cast<std::size_t>(idx[0] - 1)];
    for (std::size_t k = 1; k < idx.size() && !acc.empty(); ++k) {
      const auto& v = var_rows[static_cast<std::size_t>(idx[k] - 1)];
      tmp.clear();
      std::set_intersection(acc.begin(), acc.end(), v.begin(), v.end(),
                            std::back_inserter(tmp));
      acc.swap(tmp);
    }
    cols.push_back(pat);
    support.push_back(acc);
  }
  return DesignMatrix(n, std::move(cols), std::move(support));
}

double evaluate_model(const PatternModel& m, const std::vector<std::uint8_t>& x, int p) {
  if (static_cast<int>(x.size()) != p) throw ArgumentError("attribute vector length mismatch");
  double f = m.mu;
  for (const auto& [pat, c] : m.terms) {
    if (pat.max_index() > p) throw ArgumentError("model term index exceeds variable count");
    if (pat.satisfied_by(x)) f += c;
  }
  return f;
}

PatternModel flip_coding(const PatternModel& m, const std::set<std::int32_t>& S) {
  // Each term c_T * B_T expands under x_j -> 1-x_j (j in S) into signed
  // contributions on every J = (T \ S) u U with U inside T n S:
  //   coeff(J) += (-1)^|U| * c_T.
  std::map<std::vector<std::int32_t>, double> out;
  out[{}] = m.mu;

  std::vector<std::int32_t> fixed, flip, J;
  for (const auto& [pat, c] : m.terms) {
    fixed.clear();
    flip.clear();
    for (auto j : pat.indices())
      (S.count(j) ? flip : fixed).push_back(j);
    const std::size_t r = flip.size();
    for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
      J = fixed;
      int bits = 0;
      for (std::size_t k = 0; k < r; ++k)
        if (mask & (1u << k)) {
          J.push_back(flip[k]);
          ++bits;
        }
      std::sort(J.begin(), J.end());
      out[J] += (bits % 2 == 0 ? c : -c);
    }
  }

  PatternModel g;
  g.mu = out[{}];
  out.erase(std::vector<std::int32_t>{});
  for (auto& [idx, c] : out)
    if (c != 0.0) g.terms.emplace_back(Pattern(idx), c);
  return g;
}

}  // namespace lps
