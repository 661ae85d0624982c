#include "lps/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "lps/parallel.hpp"

namespace lps {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool column_degenerate(const BinaryDataset& data, Index j) {
  const std::uint8_t first = data.X(0, j);
  for (Index i = 1; i < data.n(); ++i)
    if (data.X(i, j) != first) return false;
  return true;
}

}  // namespace

ScreenResult screen_variables(const BinaryDataset& data, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ArgumentError("screen_variables: alpha must be in (0,1)");
  data.validate();
  const Index p = data.p();

  // single-variable design reused across all per-group fits
  std::vector<Pattern> singles;
  singles.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) singles.emplace_back(Pattern{static_cast<std::int32_t>(j + 1)});
  const DesignMatrix design = build_design(data, singles);

  // collect member columns per source variable, in first-appearance order
  std::vector<int> groups = data.var_groups;
  if (groups.empty()) {
    groups.resize(static_cast<std::size_t>(p));
    std::iota(groups.begin(), groups.end(), 0);
  }
  std::vector<std::vector<Index>> members;
  std::map<int, std::size_t> slot;
  for (Index j = 0; j < p; ++j) {
    auto [it, fresh] = slot.try_emplace(groups[static_cast<std::size_t>(j)], members.size());
    if (fresh) members.emplace_back();
    members[it->second].push_back(j);
  }

  ScreenResult out;
  std::vector<bool> keep(static_cast<std::size_t>(p), false);
  for (const auto& group : members) {
    std::vector<Index> cols;
    for (Index j : group) {
      if (column_degenerate(data, j)) {
        out.notes.push_back("screen: dropped constant variable " +
                            data.var_names[static_cast<std::size_t>(j)]);
        continue;
      }
      cols.push_back(j + 1);  // design column for variable j (constant at 0)
    }
    if (cols.empty()) continue;

    bool retain = false;
    try {
      const GlmFit fit = fit_logistic(design, cols, data.y);
      if (fit.separation_flag || !fit.converged) {
        retain = true;  // perfectly predictive variables stay in
      } else {
        for (Index k = 1; k < fit.p_values.size(); ++k)
          if (fit.p_values[k] < alpha) retain = true;
      }
    } catch (const ArgumentError&) {
      // collinear dummies: fall back to one fit per column
      for (Index c : cols) {
        try {
          const GlmFit fit = fit_logistic(design, {c}, data.y);
          if (fit.separation_flag || !fit.converged ||
              (fit.p_values.size() > 1 && fit.p_values[1] < alpha))
            retain = true;
        } catch (const ArgumentError&) {
        }
      }
    }
    if (retain)
      for (Index j : cols) keep[static_cast<std::size_t>(j - 1)] = true;
  }

  for (Index j = 0; j < p; ++j)
    if (keep[static_cast<std::size_t>(j)]) out.kept.push_back(j);

  out.data.X.resize(data.n(), static_cast<Index>(out.kept.size()));
  for (std::size_t k = 0; k < out.kept.size(); ++k) {
    out.data.X.col(static_cast<Index>(k)) = data.X.col(out.kept[k]);
    out.data.var_names.push_back(data.var_names[static_cast<std::size_t>(out.kept[k])]);
    if (!data.coding_notes.empty())
      out.data.coding_notes.push_back(data.coding_notes[static_cast<std::size_t>(out.kept[k])]);
    out.data.var_groups.push_back(groups[static_cast<std::size_t>(out.kept[k])]);
  }
  out.data.y = data.y;
  return out;
}

LpsReport run_lps(const BinaryDataset& data, int q, const LpsConfig& config) {
  data.validate();
  LpsReport report;
  report.dataset_digest = dataset_digest(data);
  report.n = data.n();
  report.p_original = data.p();
  report.var_names = data.var_names;

  const double ybar = data.y.mean();
  if (ybar == 0.0 || ybar == 1.0) {
    // constant response: the intercept MLE diverges, so report a null model
    report.degenerate_response = true;
    report.notes.push_back("response is constant: null model reported (separated intercept)");
    report.final_model.mu = ybar == 0.0 ? -std::numeric_limits<double>::infinity()
                                        : std::numeric_limits<double>::infinity();
    report.p_used = data.p();
    return report;
  }

  const BinaryDataset* active = &data;
  BinaryDataset screened;
  auto t0 = std::chrono::steady_clock::now();
  if (config.screening_enabled(data.p())) {
    ScreenResult sr = screen_variables(data, config.screen_alpha);
    report.screened = true;
    report.screen_kept_names = sr.data.var_names;
    for (auto& note : sr.notes) report.notes.push_back(note);
    screened = std::move(sr.data);
    active = &screened;
    report.var_names = active->var_names;
    if (active->p() == 0) {
      report.notes.push_back("screening removed every variable: null model reported");
      report.p_used = 0;
      const double mu = std::log(ybar / (1.0 - ybar));
      report.step1_model.mu = mu;
      report.final_model.mu = mu;
      return report;
    }
  }
  report.seconds_screen = seconds_since(t0);
  report.p_used = active->p();
  report.q = std::min<int>(q, static_cast<int>(active->p()));

  const std::uint64_t n_cols = enumeration_size(static_cast<int>(active->p()), report.q);
  if (n_cols > config.column_budget) {
    std::ostringstream msg;
    msg << "pattern expansion needs " << n_cols << " columns, over the budget of "
        << config.column_budget << "; lower q or enable screening";
    throw ArgumentError(msg.str());
  }

  t0 = std::chrono::steady_clock::now();
  const std::vector<Pattern> patterns =
      enumerate_patterns(static_cast<int>(active->p()), report.q);
  const DesignMatrix design = build_design(*active, patterns);
  report.n_columns = design.cols();

  SolverConfig solver = config.solver;
  solver.seed = config.seed;
  const std::vector<double> grid =
      make_lambda_grid(design, active->y, config.n_lambda, config.lambda_min_ratio);
  const std::vector<ModelFit> path = solve_path(design, active->y, grid, solver);

  const SelectionResult sel = select_lambda(path, design, active->y, config.criterion);
  for (const auto& w : sel.warnings) report.notes.push_back(w);
  report.score_path = sel.records;
  const ModelFit& chosen = path[sel.index];
  report.step1_lambda = chosen.lambda;
  report.step1_model = chosen.to_pattern_model(design);
  report.seconds_step1 = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  report.elimination = backward_eliminate(chosen.support, design, active->y);
  report.final_model = report.elimination.final_model;
  for (Index col : chosen.support)
    report.support_patterns.emplace(col, design.pattern_of_column(col));
  const auto& ff = report.elimination.final_fit;
  report.final_p_values.assign(ff.p_values.data(), ff.p_values.data() + ff.p_values.size());
  report.seconds_step2 = seconds_since(t0);
  return report;
}

void LpsReport::write_trace_csv(std::ostream& out) const {
  out << "stage,removed_pattern,bgacv,remaining_patterns\n";
  out.precision(12);
  auto name_of = [&](Index col) {
    const auto it = support_patterns.find(col);
    return it != support_patterns.end() ? to_string(it->second, var_names)
                                        : "column_" + std::to_string(col);
  };
  for (std::size_t i = 0; i < elimination.stages.size(); ++i) {
    const auto& st = elimination.stages[i];
    out << i << ",\"" << (st.removed >= 0 ? name_of(st.removed) : "") << "\","
        << st.bgacv << ",\"";
    for (std::size_t k = 0; k < st.columns.size(); ++k) {
      if (k) out << ';';
      out << name_of(st.columns[k]);
    }
    out << "\"\n";
  }
}

int ScrambleTable::total() const {
  int t = 0;
  for (const auto& [order, count] : by_order) t += count;
  return t;
}

ScrambleTable scramble_study(const BinaryDataset& data, int q, const LpsConfig& config,
                             int reps, std::uint64_t seed) {
  if (reps < 1) throw ArgumentError("scramble_study: reps must be >= 1");
  data.validate();
  const Index n = data.n();

  ScrambleTable table;
  table.reps = reps;
  table.per_rep.resize(static_cast<std::size_t>(reps));
  std::vector<std::vector<int>> orders(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    BinaryDataset scrambled = data;
    bool moved = n <= 1;
    while (!moved) {
      for (Index i = n - 1; i > 0; --i) {
        const Index k = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(scrambled.y[i], scrambled.y[k]);
      }
      for (Index i = 0; i < n; ++i)
        if (scrambled.y[i] != data.y[i]) {
          moved = true;
          break;
        }
    }
    LpsConfig c = config;
    c.threads = 1;
    c.seed = derive_seed(seed, r ^ 0x5CA1ULL);
    const LpsReport report = run_lps(scrambled, q, c);
    for (const auto& [pat, coef] : report.final_model.terms) {
      orders[r].push_back(pat.order());
      table.per_rep[r].push_back(to_string(pat, data.var_names));
    }
  });
  for (const auto& rep : orders)
    for (int o : rep) ++table.by_order[o];
  return table;
}

void write_scramble_csv(std::ostream& out, const ScrambleTable& table) {
  out << "order,count,reps\n";
  for (const auto& [order, count] : table.by_order)
    out << order << ',' << count << ',' << table.reps << '\n';
  out << "total," << table.total() << ',' << table.reps << '\n';
}

std::string dataset_digest(const BinaryDataset& data) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  auto mix = [&](const void* bytes, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const Index n = data.n(), p = data.p();
  mix(&n, sizeof n);
  mix(&p, sizeof p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) mix(&data.X(i, j), 1);
  for (Index i = 0; i < n; ++i) {
    const std::uint8_t yi = data.y[i] != 0.0;
    mix(&yi, 1);
  }
  for (const auto& name : data.var_names) mix(name.data(), name.size());
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace lps
