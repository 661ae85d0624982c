#include "lps/simgen.hpp"

#include <cmath>
#include <ostream>

#include "lps/parallel.hpp"

namespace lps {

double Rng::uniform() {
  // 53-bit mantissa draw, strictly inside (0,1)
  const std::uint64_t bits = eng_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::integer(std::uint64_t bound) {
  // rejection sampling keeps the draw exactly uniform
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = eng_();
  } while (v >= limit);
  return v % bound;
}

namespace {

double logistic(double f) { return 1.0 / (1.0 + std::exp(-f)); }

void draw_response(BinaryDataset& data, const PatternModel& truth, Rng& rng) {
  const Index n = data.X.rows();
  const int p = static_cast<int>(data.X.cols());
  data.y.resize(n);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(p));
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = data.X(i, j);
    const double f = evaluate_model(truth, row, p);
    data.y[i] = rng.bernoulli(logistic(f)) ? 1.0 : 0.0;
  }
}

void default_groups(BinaryDataset& data) {
  data.var_groups.resize(static_cast<std::size_t>(data.X.cols()));
  for (std::size_t j = 0; j < data.var_groups.size(); ++j)
    data.var_groups[j] = static_cast<int>(j);
}

// Lower Cholesky factor of an equicorrelated covariance (unit variance).
Matrix equicorrelated_chol(int dim, double rho) {
  Matrix C = Matrix::Constant(dim, dim, rho);
  C.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success)
    throw ArgumentError("equicorrelated covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

SimData gen_example1(Index n, std::uint64_t seed) {
  Rng rng(seed);
  SimData out;
  out.data.X.resize(n, 7);
  out.data.var_names = {"x1", "x2", "x3", "x4", "x5", "x6", "x7"};
  const double a = 0.7, b = std::sqrt(1.0 - 0.7 * 0.7);
  for (Index i = 0; i < n; ++i) {
    // pairs (x1,x4), (x2,x5), (x3,x6): mean 0, variance 1, covariance 0.7
    for (int k = 0; k < 3; ++k) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      out.data.X(i, k) = z1 > 0 ? 1 : 0;
      out.data.X(i, k + 3) = a * z1 + b * z2 > 0 ? 1 : 0;
    }
    out.data.X(i, 6) = rng.bernoulli(0.5) ? 1 : 0;
  }
  out.truth.mu = -2.0;
  out.truth.terms = {{Pattern{1}, 1.5}, {Pattern{2, 3}, 1.5}, {Pattern{4, 5, 6}, 2.0}};
  draw_response(out.data, out.truth, rng);
  default_groups(out.data);
  return out;
}

SimData gen_example2(Index n, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ArgumentError("gen_example2: rho must be in [0,1]");
  Rng rng(seed);
  SimData out;
  out.data.X.resize(n, 8);
  out.data.var_names.clear();
  for (int j = 1; j <= 8; ++j) out.data.var_names.push_back("x" + std::to_string(j));
  const Matrix L = equicorrelated_chol(4, 0.7);
  Vector z(4), x(4);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) z[k] = rng.normal();
    x = L * z;
    for (int k = 0; k < 4; ++k) out.data.X(i, k) = x[k] + 1.0 > 0 ? 1 : 0;  // mean 1
    for (int k = 0; k < 4; ++k)
      out.data.X(i, k + 4) = rng.bernoulli(rho) ? out.data.X(i, k)
                                                : (rng.bernoulli(0.84) ? 1 : 0);
  }
  out.truth.mu = -2.0;
  out.truth.terms = {{Pattern{1, 2, 3, 4}, 2.0}};
  draw_response(out.data, out.truth, rng);
  default_groups(out.data);
  return out;
}

SimData gen_example3(Index n, double rho1, double rho2, std::uint64_t seed) {
  if (!(rho1 >= 0.0 && rho1 < 1.0)) throw ArgumentError("gen_example3: rho1 must be in [0,1)");
  if (!(rho2 >= 0.0 && rho2 <= 1.0)) throw ArgumentError("gen_example3: rho2 must be in [0,1]");
  Rng rng(seed);
  SimData out;
  out.data.X.resize(n, 20);
  out.data.var_names.clear();
  for (int j = 1; j <= 20; ++j) out.data.var_names.push_back("x" + std::to_string(j));
  const Matrix L = equicorrelated_chol(4, rho1);
  Vector z(4), x(4);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) z[k] = rng.normal();
    x = L * z;
    for (int k = 0; k < 4; ++k) out.data.X(i, k) = x[k] + 1.0 > 0 ? 1 : 0;
    for (int k = 0; k < 4; ++k)
      out.data.X(i, k + 4) = rng.bernoulli(rho2) ? out.data.X(i, k)
                                                 : (rng.bernoulli(0.84) ? 1 : 0);
    for (int k = 8; k < 20; ++k) out.data.X(i, k) = rng.bernoulli(0.5) ? 1 : 0;
  }
  out.truth.mu = -2.0;
  out.truth.terms = {{Pattern{9}, 2.0}, {Pattern{6, 7}, 2.0}, {Pattern{1, 2, 3, 4}, 2.0}};
  draw_response(out.data, out.truth, rng);
  default_groups(out.data);
  return out;
}

SimData gen_gaw_style(Index n, std::uint64_t seed, const GawOptions& opts) {
  if (opts.n_snps < 1) throw ArgumentError("gen_gaw_style: need at least one SNP");
  Rng rng(seed);
  SimData out;
  const int p = 3 + 2 * opts.n_snps;  // sex, smoking, age, then dummy pairs
  out.data.X.resize(n, p);
  out.data.var_names = {"sex", "smoking", "age"};
  out.data.var_groups = {0, 1, 2};
  for (int s = 1; s <= opts.n_snps; ++s) {
    out.data.var_names.push_back("SNP6_" + std::to_string(s) + "_1");
    out.data.var_names.push_back("SNP6_" + std::to_string(s) + "_2");
    out.data.var_groups.push_back(2 + s);
    out.data.var_groups.push_back(2 + s);
  }

  auto snp_marginals = [&](int s) {
    auto it = opts.snp_overrides.find(s);
    return it != opts.snp_overrides.end() ? it->second
                                          : std::make_pair(opts.p_one_variant, opts.p_two_variant);
  };

  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) out.data.X(i, j) = rng.bernoulli(0.5) ? 1 : 0;
    for (int s = 1; s <= opts.n_snps; ++s) {
      const auto [p1, p2] = snp_marginals(s);
      // genotype in {none, one variant, two variants}; dummies are exclusive
      const double u = rng.uniform();
      const int col = 3 + 2 * (s - 1);
      out.data.X(i, col) = u < p1 ? 1 : 0;
      out.data.X(i, col + 1) = (u >= p1 && u < p1 + p2) ? 1 : 0;
    }
  }

  auto snp1 = [&](int s) { return static_cast<std::int32_t>(3 + 2 * (s - 1) + 1); };
  auto snp2 = [&](int s) { return static_cast<std::int32_t>(3 + 2 * (s - 1) + 2); };
  const std::int32_t sex = 1, smoking = 2;
  auto make = [](std::vector<std::int32_t> idx) {
    std::sort(idx.begin(), idx.end());
    return Pattern(std::move(idx));
  };

  out.truth.mu = -4.8546;
  out.truth.terms = {
      {make({smoking}), 0.8603},
      {make({snp1(153)}), 1.8911},
      {make({snp1(162)}), 2.2013},
      {make({snp2(154)}), 0.7700},
      {make({sex, snp1(153)}), 0.7848},
      {make({sex, snp2(154)}), 0.9330},
      {make({snp2(153), snp2(154)}), 4.5877},
      {make({snp1(153), snp2(553)}), 0.4021},
      {make({snp1(490), snp2(154)}), 0.3888},
      {make({sex, snp2(108), snp2(334)}), 3.0},
  };
  draw_response(out.data, out.truth, rng);
  return out;
}

BinaryDataset gen_myopia_shape(Index n, std::uint64_t seed) {
  Rng rng(seed);
  BinaryDataset data;
  const std::vector<double> marginals = {0.45, 0.30, 0.10, 0.12, 0.25, 0.55, 0.60};
  data.var_names = {"sex", "inc", "jomyop", "catct", "pky", "asa", "vtm"};
  data.X.resize(n, 7);
  for (Index i = 0; i < n; ++i)
    for (int j = 0; j < 7; ++j)
      data.X(i, j) = rng.bernoulli(marginals[static_cast<std::size_t>(j)]) ? 1 : 0;
  // response independent of the attributes, incidence pinned at 0.137
  const Index ones = static_cast<Index>(std::llround(0.137 * static_cast<double>(n)));
  data.y = Array::Zero(n);
  for (Index i = 0; i < ones; ++i) data.y[i] = 1.0;
  for (Index i = n - 1; i > 0; --i) {
    const Index k = static_cast<Index>(rng.integer(static_cast<std::uint64_t>(i) + 1));
    std::swap(data.y[i], data.y[k]);
  }
  default_groups(data);
  return data;
}

SimData SimSpec::generate() const {
  switch (id) {
    case ExampleId::ex1:
      return gen_example1(n, seed);
    case ExampleId::ex2:
      return gen_example2(n, rho, seed);
    case ExampleId::ex3:
      return gen_example3(n, rho1, rho2, seed);
    case ExampleId::gaw:
      return gen_gaw_style(n, seed);
  }
  throw ArgumentError("unknown simulation example");
}

FrequencyTable replicate(const SimSpec& spec, int reps, const LpsConfig& config) {
  if (reps < 1) throw ArgumentError("replicate: reps must be >= 1");
  // q: all orders for the small examples, capped at 4 for the wide ones
  const int q = spec.id == ExampleId::ex1 ? 7
              : spec.id == ExampleId::ex2 ? 8
              : spec.id == ExampleId::ex3 ? 4
                                          : 3;

  const SimData probe = [&] {
    SimSpec s = spec;
    s.n = 1;
    return s.generate();
  }();

  FrequencyTable table;
  table.reps = reps;
  for (const auto& [pat, c] : probe.truth.terms)
    table.pattern_names.push_back(to_string(pat, probe.data.var_names));
  table.counts.assign(probe.truth.terms.size(), 0);

  std::vector<std::vector<int>> hits(static_cast<std::size_t>(reps));
  std::vector<int> noise(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t r) {
    SimSpec s = spec;
    s.seed = derive_seed(spec.seed, r);
    const SimData sim = s.generate();
    LpsConfig c = config;
    c.threads = 1;
    c.seed = derive_seed(spec.seed, r ^ 0x5117ULL);
    const LpsReport report = run_lps(sim.data, q, c);
    hits[r].assign(sim.truth.terms.size(), 0);
    for (const auto& [pat, coef] : report.final_model.terms) {
      bool matched = false;
      for (std::size_t t = 0; t < sim.truth.terms.size(); ++t)
        if (pat == sim.truth.terms[t].first) {
          hits[r][t] = 1;
          matched = true;
          break;
        }
      if (!matched) ++noise[r];
    }
  });
  for (std::size_t r = 0; r < hits.size(); ++r) {
    for (std::size_t t = 0; t < hits[r].size(); ++t) table.counts[t] += hits[r][t];
    table.noise_total += noise[r];
  }
  return table;
}

void write_frequency_csv(std::ostream& out, const FrequencyTable& table) {
  out << "pattern,count,reps\n";
  for (std::size_t t = 0; t < table.pattern_names.size(); ++t)
    out << '"' << table.pattern_names[t] << "\"," << table.counts[t] << ',' << table.reps
        << '\n';
  out << "other," << table.noise_total << ',' << table.reps << '\n';
}

}  // namespace lps
