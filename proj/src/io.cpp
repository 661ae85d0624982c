#include "lps/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lps {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool is_missing(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "NA" || t == "na" || t == "NaN" || t == "nan" || t == ".";
}

std::optional<double> parse_number(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

// One CSV record, honoring quoted fields (embedded commas, quotes, newlines).
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string cell;
  bool quoted = false, seen_any = false;
  int c;
  while ((c = in.get()) != EOF) {
    seen_any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          cell.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cell);
      cell.clear();
    } else if (c == '\r') {
      // swallow; a following \n ends the record
    } else if (c == '\n') {
      fields.push_back(cell);
      return true;
    } else {
      cell.push_back(static_cast<char>(c));
    }
  }
  if (!seen_any) return false;
  fields.push_back(cell);
  return true;
}

json pattern_to_json(const Pattern& pat, const std::vector<std::string>& var_names) {
  json j;
  j["variables"] = pat.indices();
  j["name"] = to_string(pat, var_names);
  return j;
}

}  // namespace

std::string CutRule::describe() const {
  switch (kind) {
    case Kind::passthrough:
      return "binary passthrough";
    case Kind::threshold:
      return std::string("1 iff value ") + direction + " " + std::to_string(cut);
    case Kind::categories: {
      std::string s = "1 iff value in {";
      bool first = true;
      for (const auto& r : risky) {
        if (!first) s += ", ";
        first = false;
        s += r;
      }
      return s + "}";
    }
  }
  return {};
}

IngestConfig parse_ingest_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("cutpoint config is not valid JSON: ") + e.what());
  }
  IngestConfig cfg;
  if (!j.contains("response") || !j["response"].is_string())
    throw ArgumentError("cutpoint config needs a \"response\" column name");
  cfg.response = j["response"].get<std::string>();
  if (!j.contains("variables") || !j["variables"].is_object())
    throw ArgumentError("cutpoint config needs a \"variables\" object");
  for (const auto& [name, rule] : j["variables"].items()) {
    CutRule r;
    const std::string kind = rule.value("type", "");
    if (kind == "binary") {
      r.kind = CutRule::Kind::passthrough;
    } else if (kind == "threshold") {
      r.kind = CutRule::Kind::threshold;
      if (!rule.contains("cut")) throw ArgumentError("threshold rule for " + name + " needs \"cut\"");
      r.cut = rule["cut"].get<double>();
      const std::string dir = rule.value("direction", ">");
      if (dir != ">" && dir != "<")
        throw ArgumentError("threshold direction for " + name + " must be \">\" or \"<\"");
      r.direction = dir[0];
    } else if (kind == "categories") {
      r.kind = CutRule::Kind::categories;
      if (!rule.contains("risky") || !rule["risky"].is_array())
        throw ArgumentError("categories rule for " + name + " needs a \"risky\" array");
      for (const auto& v : rule["risky"]) r.risky.insert(v.get<std::string>());
    } else {
      throw ArgumentError("variable " + name + ": unknown rule type \"" + kind + "\"");
    }
    cfg.variables.emplace_back(name, std::move(r));
  }
  if (cfg.variables.empty()) throw ArgumentError("cutpoint config lists no variables");
  return cfg;
}

IngestResult ingest(std::istream& csv, const IngestConfig& config) {
  std::vector<std::string> header;
  if (!read_record(csv, header)) throw ArgumentError("CSV is empty (header row required)");

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ArgumentError("column \"" + name + "\" from the config is not in the CSV");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t y_col = column_of(config.response);
  std::vector<std::size_t> var_cols;
  for (const auto& [name, rule] : config.variables) var_cols.push_back(column_of(name));

  const std::size_t p = config.variables.size();
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<double> ys;
  IngestResult result;

  std::vector<std::string> fields;
  std::vector<std::uint8_t> coded(p);
  while (read_record(csv, fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != header.size())
      throw ArgumentError("CSV row " + std::to_string(result.rows_read + 2) + " has " +
                          std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(header.size()));
    ++result.rows_read;

    bool missing = is_missing(fields[y_col]);
    for (std::size_t k = 0; k < p && !missing; ++k) missing = is_missing(fields[var_cols[k]]);
    if (missing) {
      ++result.rows_dropped_missing;
      continue;
    }

    const auto yv = parse_number(fields[y_col]);
    if (!yv || (*yv != 0.0 && *yv != 1.0))
      throw ArgumentError("response \"" + fields[y_col] + "\" is not 0/1 (row " +
                          std::to_string(result.rows_read + 1) + ")");

    for (std::size_t k = 0; k < p; ++k) {
      const auto& rule = config.variables[k].second;
      const std::string& cell = fields[var_cols[k]];
      switch (rule.kind) {
        case CutRule::Kind::passthrough: {
          const auto v = parse_number(cell);
          if (!v || (*v != 0.0 && *v != 1.0))
            throw ArgumentError("cell \"" + cell + "\" in column " +
                                config.variables[k].first + " is not 0/1");
          coded[k] = *v == 1.0;
          break;
        }
        case CutRule::Kind::threshold: {
          const auto v = parse_number(cell);
          if (!v)
            throw ArgumentError("cell \"" + cell + "\" in column " +
                                config.variables[k].first + " is not numeric");
          coded[k] = rule.direction == '>' ? *v > rule.cut : *v < rule.cut;
          break;
        }
        case CutRule::Kind::categories:
          coded[k] = rule.risky.count(trim(cell)) > 0;
          break;
      }
    }
    rows.push_back(coded);
    ys.push_back(*yv);
  }

  if (rows.empty()) throw ArgumentError("no usable rows after dropping missing values");

  BinaryDataset& data = result.data;
  data.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(p));
  data.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < p; ++k)
      data.X(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    data.y[static_cast<Index>(i)] = ys[i];
  }
  for (const auto& [name, rule] : config.variables) {
    data.var_names.push_back(name);
    data.coding_notes.push_back(name + ": " + rule.describe());
  }
  data.var_groups.resize(p);
  std::iota(data.var_groups.begin(), data.var_groups.end(), 0);
  data.validate();
  return result;
}

IngestResult ingest_file(const std::string& csv_path, const IngestConfig& config) {
  std::ifstream in(csv_path);
  if (!in) throw ArgumentError("cannot open CSV file: " + csv_path);
  return ingest(in, config);
}

void write_canonical_csv(std::ostream& out, const BinaryDataset& data,
                         const std::string& response_name) {
  for (std::size_t k = 0; k < data.var_names.size(); ++k) out << data.var_names[k] << ',';
  out << response_name << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) out << int(data.X(i, j)) << ',';
    out << int(data.y[i]) << '\n';
  }
}

IngestConfig make_passthrough_config(const BinaryDataset& data,
                                     const std::string& response_name) {
  IngestConfig cfg;
  cfg.response = response_name;
  for (const auto& name : data.var_names) cfg.variables.emplace_back(name, CutRule{});
  return cfg;
}

std::string model_to_json(const PatternModel& model, const std::vector<std::string>& var_names) {
  json j;
  j["mu"] = model.mu;
  j["terms"] = json::array();
  for (const auto& [pat, c] : model.terms) {
    json t = pattern_to_json(pat, var_names);
    t["coefficient"] = c;
    j["terms"].push_back(std::move(t));
  }
  j["var_names"] = var_names;
  return j.dump(2);
}

PatternModel model_from_json(const std::string& json_text, std::vector<std::string>* var_names) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model file is not valid JSON: ") + e.what());
  }
  PatternModel m;
  m.mu = j.at("mu").get<double>();
  for (const auto& t : j.at("terms")) {
    std::vector<std::int32_t> idx = t.at("variables").get<std::vector<std::int32_t>>();
    m.terms.emplace_back(Pattern(std::move(idx)), t.at("coefficient").get<double>());
  }
  if (var_names && j.contains("var_names"))
    *var_names = j["var_names"].get<std::vector<std::string>>();
  return m;
}

std::string report_to_json(const LpsReport& report) {
  json j;
  j["dataset"] = {{"digest", report.dataset_digest},
                  {"n", report.n},
                  {"p", report.p_original},
                  {"p_used", report.p_used}};
  j["config"] = {{"q", report.q}, {"n_columns", report.n_columns}, {"screened", report.screened}};
  j["notes"] = report.notes;
  if (report.screened) j["screen_kept"] = report.screen_kept_names;
  j["degenerate_response"] = report.degenerate_response;

  auto model_json = [&](const PatternModel& m) {
    json out;
    out["mu"] = m.mu;
    out["terms"] = json::array();
    for (const auto& [pat, c] : m.terms) {
      json t = pattern_to_json(pat, report.var_names);
      t["coefficient"] = c;
      out["terms"].push_back(std::move(t));
    }
    return out;
  };

  j["step1"] = {{"lambda", report.step1_lambda}, {"model", model_json(report.step1_model)}};
  json scores = json::array();
  for (const auto& r : report.score_path) {
    if (!r.scored) continue;
    scores.push_back({{"lambda", r.lambda},
                      {"obs", r.obs},
                      {"trace_H", r.trace_H},
                      {"gamma", r.gamma},
                      {"gacv", r.gacv},
                      {"bgacv", r.bgacv},
                      {"N_B0", r.n_b0}});
  }
  j["step1"]["score_path"] = std::move(scores);

  j["step2"] = {{"model", model_json(report.final_model)}};
  // Wald p-values after model search are post-selection, not honest levels
  j["step2"]["p_values"] = report.final_p_values;
  j["step2"]["p_values_note"] = "post-selection Wald p-values; not honest significance levels";
  json stages = json::array();
  for (std::size_t i = 0; i < report.elimination.stages.size(); ++i) {
    const auto& st = report.elimination.stages[i];
    json s;
    s["stage"] = i;
    s["bgacv"] = std::isfinite(st.bgacv) ? json(st.bgacv) : json("unscorable");
    s["removed"] = st.removed >= 0 ? json(st.removed) : json(nullptr);
    s["size"] = st.columns.size();
    stages.push_back(std::move(s));
  }
  j["step2"]["elimination"] = std::move(stages);
  j["step2"]["glm_fits"] = report.elimination.glm_fits;

  j["timing"] = {{"screen_s", report.seconds_screen},
                 {"step1_s", report.seconds_step1},
                 {"step2_s", report.seconds_step2}};
  return j.dump(2);
}

std::string path_to_json(const std::vector<ModelFit>& path) {
  json j = json::array();
  for (const auto& fit : path) {
    json f;
    f["lambda"] = fit.lambda;
    f["mu"] = fit.mu;
    f["support"] = fit.support;
    f["coefficients"] = fit.coefficients;
    f["neg_log_lik"] = fit.neg_log_lik;
    f["objective"] = fit.objective;
    f["converged"] = fit.converged;
    f["delta_final"] = fit.delta_final;
    f["iterations"] = fit.iterations;
    j.push_back(std::move(f));
  }
  return j.dump(2);
}

std::vector<ModelFit> path_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("path file is not valid JSON: ") + e.what());
  }
  std::vector<ModelFit> path;
  for (const auto& f : j) {
    ModelFit fit;
    fit.lambda = f.at("lambda").get<double>();
    fit.mu = f.at("mu").get<double>();
    fit.support = f.at("support").get<std::vector<Index>>();
    fit.coefficients = f.at("coefficients").get<std::vector<double>>();
    fit.neg_log_lik = f.value("neg_log_lik", 0.0);
    fit.objective = f.value("objective", 0.0);
    fit.converged = f.value("converged", true);
    fit.delta_final = f.value("delta_final", 0.0);
    fit.iterations = f.value("iterations", 0);
    path.push_back(std::move(fit));
  }
  return path;
}

}  // namespace lps
