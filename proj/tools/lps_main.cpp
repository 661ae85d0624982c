// lps: two-step sparse Boolean-pattern search for binary outcomes.
// Subcommands wrap the library modules; all randomness is seed-driven
// (LPS_SEED provides the default seed).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lps/io.hpp"
#include "lps/simgen.hpp"

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LPS_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw lps::ArgumentError("LPS_SEED is not an unsigned integer");
    }
  }
  return 1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lps::ArgumentError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw lps::ArgumentError("cannot write file: " + path);
  return out;
}

lps::BinaryDataset load_dataset(const std::string& csv, const std::string& config_path,
                                std::ostream& log) {
  const lps::IngestConfig cfg = lps::parse_ingest_config(slurp(config_path));
  lps::IngestResult res = lps::ingest_file(csv, cfg);
  if (res.rows_dropped_missing > 0)
    log << "dropped " << res.rows_dropped_missing << " of " << res.rows_read
        << " rows with missing values\n";
  return std::move(res.data);
}

struct DataArgs {
  std::string csv;
  std::string config;
  void attach(CLI::App* cmd) {
    cmd->add_option("csv", csv, "input CSV (header row required)")->required();
    cmd->add_option("--config", config, "cutpoint config JSON")->required();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LASSO-Patternsearch: sparse high-order Boolean risk patterns"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--seed", seed, "RNG seed (default: LPS_SEED env or 1)");
  app.add_option("--threads", threads, "worker cap for replicates/scrambles (0 = all cores)");

  // expand: enumerate patterns and summarize the design
  DataArgs expand_data;
  int expand_q = 2;
  std::string expand_out, expand_binary;
  auto* cmd_expand = app.add_subcommand("expand", "enumerate patterns up to order q");
  expand_data.attach(cmd_expand);
  cmd_expand->add_option("--q", expand_q, "highest pattern order")->required();
  cmd_expand->add_option("--out", expand_out, "pattern summary CSV")->required();
  cmd_expand->add_option("--write-binary", expand_binary, "also write the canonical 0/1 CSV");

  // fit: penalized path (or a single lambda)
  DataArgs fit_data;
  int fit_q = 2, fit_nlambda = 50;
  double fit_lambda = -1.0, fit_min_ratio = 1e-4;
  std::string fit_out, fit_diag;
  auto* cmd_fit = app.add_subcommand("fit", "fit the l1-penalized path");
  fit_data.attach(cmd_fit);
  cmd_fit->add_option("--q", fit_q, "highest pattern order")->required();
  cmd_fit->add_option("--lambda", fit_lambda, "single penalty value (default: a full path)");
  cmd_fit->add_option("--n-lambda", fit_nlambda, "path length");
  cmd_fit->add_option("--min-ratio", fit_min_ratio, "smallest lambda as a fraction of lambda_max");
  cmd_fit->add_option("--out", fit_out, "fitted path JSON")->required();
  cmd_fit->add_option("--diagnostics", fit_diag, "per-iteration solver CSV");

  // tune: score a saved path
  DataArgs tune_data;
  int tune_q = 2;
  std::string tune_path, tune_out, tune_criterion = "bgacv";
  auto* cmd_tune = app.add_subcommand("tune", "score a saved path and mark the chosen lambda");
  tune_data.attach(cmd_tune);
  cmd_tune->add_option("--q", tune_q, "highest pattern order used for the fit")->required();
  cmd_tune->add_option("--path", tune_path, "fitted path JSON from `fit`")->required();
  cmd_tune->add_option("--criterion", tune_criterion, "gacv or bgacv")
      ->check(CLI::IsMember({"gacv", "bgacv"}));
  cmd_tune->add_option("--out", tune_out, "score CSV")->required();

  // lps: the full two-step pipeline
  DataArgs lps_data;
  int lps_q = 2;
  std::string lps_out, lps_scores, lps_trace, lps_criterion = "bgacv";
  bool lps_screen = false, lps_no_screen = false;
  auto* cmd_lps = app.add_subcommand("lps", "run the full two-step pipeline");
  lps_data.attach(cmd_lps);
  cmd_lps->add_option("--q", lps_q, "highest pattern order")->required();
  cmd_lps->add_option("--criterion", lps_criterion, "step-1 tuning criterion")
      ->check(CLI::IsMember({"gacv", "bgacv"}));
  cmd_lps->add_flag("--screen", lps_screen, "force the per-variable screen on");
  cmd_lps->add_flag("--no-screen", lps_no_screen, "force the per-variable screen off");
  cmd_lps->add_option("--out", lps_out, "report JSON")->required();
  cmd_lps->add_option("--scores", lps_scores, "score path CSV");
  cmd_lps->add_option("--trace", lps_trace, "elimination trace CSV");

  // scramble: response-permutation false-alarm study
  DataArgs scr_data;
  int scr_q = 2, scr_reps = 0;
  std::string scr_out;
  auto* cmd_scr = app.add_subcommand("scramble", "false-alarm study on permuted responses");
  scr_data.attach(cmd_scr);
  cmd_scr->add_option("--q", scr_q, "highest pattern order")->required();
  cmd_scr->add_option("--reps", scr_reps, "number of scrambles")->required();
  cmd_scr->add_option("--out", scr_out, "frequency CSV")->required();

  // simulate: seeded replication harness
  std::string sim_id, sim_out;
  int sim_reps = 1;
  lps::Index sim_n = 0;
  double sim_rho = 0.0, sim_rho1 = 0.2, sim_rho2 = 0.2;
  auto* cmd_sim = app.add_subcommand("simulate", "replicate a simulation example");
  cmd_sim->add_option("example", sim_id, "ex1, ex2, ex3 or gaw")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "gaw"}));
  cmd_sim->add_option("--reps", sim_reps, "replicates");
  cmd_sim->add_option("--n", sim_n, "sample size override");
  cmd_sim->add_option("--rho", sim_rho, "ex2 copy probability");
  cmd_sim->add_option("--rho1", sim_rho1, "ex3 block correlation");
  cmd_sim->add_option("--rho2", sim_rho2, "ex3 copy probability");
  cmd_sim->add_option("--out", sim_out, "frequency CSV")->required();

  // flip: recode variables in a saved model
  std::string flip_model, flip_out, flip_set;
  auto* cmd_flip = app.add_subcommand("flip", "apply a coding flip to a saved model");
  cmd_flip->add_option("model", flip_model, "model JSON")->required();
  cmd_flip->add_option("--set", flip_set, "comma-separated variables (names or 1-based indices)")
      ->required();
  cmd_flip->add_option("--out", flip_out, "transformed model JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!app.count("--seed")) seed = default_seed();

    if (*cmd_expand) {
      const lps::BinaryDataset data = load_dataset(expand_data.csv, expand_data.config, std::cerr);
      const auto patterns = lps::enumerate_patterns(static_cast<int>(data.p()), expand_q);
      const lps::DesignMatrix design = lps::build_design(data, patterns);
      auto out = open_out(expand_out);
      out << "pattern,order,support_count\n";
      for (lps::Index j = 0; j < design.cols(); ++j)
        out << '"' << to_string(design.pattern_of_column(j), data.var_names) << "\","
            << design.pattern_of_column(j).order() << ',' << design.col_support(j).size()
            << '\n';
      if (!expand_binary.empty()) {
        auto bin = open_out(expand_binary);
        lps::write_canonical_csv(bin, data);
      }
      std::cout << design.cols() << " design columns (constant included)\n";
    } else if (*cmd_fit) {
      const lps::BinaryDataset data = load_dataset(fit_data.csv, fit_data.config, std::cerr);
      const auto patterns = lps::enumerate_patterns(static_cast<int>(data.p()), fit_q);
      const lps::DesignMatrix design = lps::build_design(data, patterns);
      lps::SolverConfig config;
      config.seed = seed;
      std::ofstream diag;
      if (!fit_diag.empty()) {
        diag = open_out(fit_diag);
        diag << "iter,objective,delta,inactive,step_type\n";
        config.diagnostics = &diag;
      }
      std::vector<double> grid;
      if (fit_lambda >= 0)
        grid = {fit_lambda};
      else
        grid = lps::make_lambda_grid(design, data.y, fit_nlambda, fit_min_ratio);
      const auto path = lps::solve_path(design, data.y, grid, config);
      auto out = open_out(fit_out);
      out << lps::path_to_json(path);
      int unconverged = 0;
      for (const auto& f : path) unconverged += !f.converged;
      std::cout << path.size() << " fits written";
      if (unconverged) std::cout << " (" << unconverged << " unconverged)";
      std::cout << '\n';
    } else if (*cmd_tune) {
      const lps::BinaryDataset data = load_dataset(tune_data.csv, tune_data.config, std::cerr);
      const auto patterns = lps::enumerate_patterns(static_cast<int>(data.p()), tune_q);
      const lps::DesignMatrix design = lps::build_design(data, patterns);
      const auto path = lps::path_from_json(slurp(tune_path));
      const auto criterion =
          tune_criterion == "gacv" ? lps::Criterion::gacv : lps::Criterion::bgacv;
      const auto sel = lps::select_lambda(path, design, data.y, criterion);
      for (const auto& w : sel.warnings) std::cerr << w << '\n';
      auto out = open_out(tune_out);
      lps::write_score_csv(out, sel.records, sel.index);
      std::cout << "selected lambda = " << path[sel.index].lambda << " ("
                << tune_criterion << ")\n";
    } else if (*cmd_lps) {
      const lps::BinaryDataset data = load_dataset(lps_data.csv, lps_data.config, std::cerr);
      lps::LpsConfig config;
      config.seed = seed;
      config.threads = threads;
      config.criterion =
          lps_criterion == "gacv" ? lps::Criterion::gacv : lps::Criterion::bgacv;
      if (lps_screen) config.screen = true;
      if (lps_no_screen) config.screen = false;
      const lps::LpsReport report = lps::run_lps(data, lps_q, config);
      auto out = open_out(lps_out);
      out << lps::report_to_json(report);
      if (!lps_scores.empty()) {
        auto scores = open_out(lps_scores);
        lps::write_score_csv(scores, report.score_path);
      }
      if (!lps_trace.empty() && !report.degenerate_response) {
        auto trace = open_out(lps_trace);
        report.write_trace_csv(trace);
      }
      for (const auto& note : report.notes) std::cerr << note << '\n';
      std::cout << "final model: mu = " << report.final_model.mu << '\n';
      for (const auto& [pat, c] : report.final_model.terms)
        std::cout << "  " << report.pattern_name(pat) << " = " << c << '\n';
    } else if (*cmd_scr) {
      const lps::BinaryDataset data = load_dataset(scr_data.csv, scr_data.config, std::cerr);
      lps::LpsConfig config;
      config.threads = threads;
      const auto table = lps::scramble_study(data, scr_q, config, scr_reps, seed);
      auto out = open_out(scr_out);
      lps::write_scramble_csv(out, table);
      std::cout << table.total() << " patterns discovered in " << scr_reps << " scrambles\n";
    } else if (*cmd_sim) {
      lps::SimSpec spec;
      spec.seed = seed;
      if (sim_id == "ex1") {
        spec.id = lps::ExampleId::ex1;
        spec.n = sim_n > 0 ? sim_n : 800;
      } else if (sim_id == "ex2") {
        spec.id = lps::ExampleId::ex2;
        spec.n = sim_n > 0 ? sim_n : 2000;
        spec.rho = sim_rho;
      } else if (sim_id == "ex3") {
        spec.id = lps::ExampleId::ex3;
        spec.n = sim_n > 0 ? sim_n : 2000;
        spec.rho1 = sim_rho1;
        spec.rho2 = sim_rho2;
      } else {
        spec.id = lps::ExampleId::gaw;
        spec.n = sim_n > 0 ? sim_n : 3500;
      }
      lps::LpsConfig config;
      config.threads = threads;
      config.seed = seed;
      const auto table = lps::replicate(spec, sim_reps, config);
      auto out = open_out(sim_out);
      lps::write_frequency_csv(out, table);
      for (std::size_t t = 0; t < table.pattern_names.size(); ++t)
        std::cout << table.pattern_names[t] << ": " << table.counts[t] << '/' << table.reps
                  << '\n';
      std::cout << "noise: " << table.noise_total << '\n';
    } else if (*cmd_flip) {
      std::vector<std::string> names;
      const lps::PatternModel model = lps::model_from_json(slurp(flip_model), &names);
      std::set<std::int32_t> S;
      std::stringstream ss(flip_set);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
          S.insert(static_cast<std::int32_t>(std::stol(tok)));
        } catch (...) {
          const auto it = std::find(names.begin(), names.end(), tok);
          if (it == names.end())
            throw lps::ArgumentError("unknown variable in --set: " + tok);
          S.insert(static_cast<std::int32_t>(it - names.begin()) + 1);
        }
      }
      const lps::PatternModel flipped = lps::flip_coding(model, S);
      auto out = open_out(flip_out);
      out << lps::model_to_json(flipped, names);
      std::cout << flipped.terms.size() << " terms after the flip\n";
    }
  } catch (const lps::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lps::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
