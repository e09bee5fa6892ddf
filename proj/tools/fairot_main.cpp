// Command-line frontend: designs repair models on research extracts, applies
// them to archives as a stream, evaluates conditional dependence, and runs
// the synthetic-data studies.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairot/fairot.hpp"

namespace {

int exit_code_for(const fairot::Error& e) {
  const std::string& cls = e.error_class();
  if (cls == "validation") return 2;
  if (cls == "schema") return 3;
  if (cls == "format") return 4;
  if (cls == "io") return 5;
  return 70;
}

std::string utc_timestamp() {
  std::time_t now;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
    now = static_cast<std::time_t>(std::atoll(epoch));
  else
    now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// "adult" selects the built-in census schema; anything else is a JSON path.
fairot::TabularSchema resolve_schema(const std::string& arg) {
  if (arg == "adult") return fairot::TabularSchema::adult_default();
  return fairot::TabularSchema::from_json_file(arg);
}

// --nq takes either a plain integer or a JSON file with a default and
// per-(u, feature) overrides.
fairot::NqSpec resolve_nq(const std::string& arg, const fairot::TabularSchema& schema) {
  fairot::NqSpec nq;
  {
    std::size_t value = 0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (res.ec == std::errc() && res.ptr == arg.data() + arg.size()) {
      nq.value = value;
      return nq;
    }
  }
  nlohmann::json j = nlohmann::json::parse(fairot::read_file_to_string(arg), nullptr, false);
  if (j.is_discarded()) throw fairot::FormatError("'" + arg + "' is not valid JSON");
  try {
    if (j.contains("default")) nq.value = j.at("default").get<std::size_t>();
    if (j.contains("overrides")) {
      for (const auto& o : j.at("overrides")) {
        int u = o.at("u").get<int>();
        if (u != 0 && u != 1)
          throw fairot::SchemaError("support override: u must be 0 or 1");
        std::size_t k;
        if (o.contains("feature")) {
          std::string name = o.at("feature").get<std::string>();
          auto it = std::find(schema.features.begin(), schema.features.end(), name);
          if (it == schema.features.end())
            throw fairot::SchemaError("support override names unknown feature '" + name + "'");
          k = static_cast<std::size_t>(it - schema.features.begin());
        } else {
          k = o.at("k").get<std::size_t>();
          if (k == 0 || k > schema.features.size())
            throw fairot::SchemaError("support override: k is 1-based and must name a feature");
          k -= 1;
        }
        nq.overrides[{u, k}] = o.at("nq").get<std::size_t>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw fairot::FormatError(std::string("support-size config: ") + e.what());
  }
  return nq;
}

fairot::MixtureSpec mixture_from_json(const nlohmann::json& j) {
  fairot::MixtureSpec spec;
  try {
    if (j.contains("d")) spec.d = j.at("d").get<std::size_t>();
    if (j.contains("means")) {
      const auto& m = j.at("means");
      if (!m.is_array() || m.size() != fairot::kCellCount)
        throw fairot::SchemaError("mixture config: means must list 4 cell means "
                                  "in (u,s) = (0,0),(0,1),(1,0),(1,1) order");
      for (std::size_t c = 0; c < fairot::kCellCount; ++c)
        spec.means[c] = m[c].get<std::vector<double>>();
    } else {
      for (auto& m : spec.means) m.resize(spec.d, 0.0);
    }
    if (j.contains("covariances")) {
      const auto& cv = j.at("covariances");
      if (!cv.is_array() || cv.size() != fairot::kCellCount)
        throw fairot::SchemaError("mixture config: covariances must list 4 cell matrices");
      for (std::size_t c = 0; c < fairot::kCellCount; ++c) {
        std::vector<double> flat;
        for (const auto& row : cv[c])
          for (const auto& v : row) flat.push_back(v.get<double>());
        spec.covs[c] = std::move(flat);
      }
    }
    if (j.contains("pr_u0")) spec.pr_u0 = j.at("pr_u0").get<double>();
    if (j.contains("pr_s0_given_u")) {
      auto p = j.at("pr_s0_given_u").get<std::vector<double>>();
      if (p.size() != 2)
        throw fairot::SchemaError("mixture config: pr_s0_given_u needs two entries");
      spec.pr_s0_given_u = {p[0], p[1]};
    }
    if (j.contains("n_research")) spec.n_research = j.at("n_research").get<std::size_t>();
    if (j.contains("n_archive")) spec.n_archive = j.at("n_archive").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("resample_on_empty_cell"))
      spec.resample_on_empty_cell = j.at("resample_on_empty_cell").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw fairot::FormatError(std::string("mixture config: ") + e.what());
  }
  spec.validate();
  return spec;
}

struct SimulationConfig {
  fairot::MixtureSpec mixture;
  std::size_t n_q = 50;
  double t = 0.5;
  fairot::KldSettings kld;
};

SimulationConfig simulation_config_from_file(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(fairot::read_file_to_string(path), nullptr, false);
  if (j.is_discarded()) throw fairot::FormatError("'" + path + "' is not valid JSON");
  SimulationConfig cfg;
  cfg.mixture = mixture_from_json(j);
  try {
    if (j.contains("n_q")) cfg.n_q = j.at("n_q").get<std::size_t>();
    if (j.contains("t")) cfg.t = j.at("t").get<double>();
    if (j.contains("eval_grid")) cfg.kld.grid = j.at("eval_grid").get<std::size_t>();
    if (j.contains("eval_floor")) cfg.kld.floor = j.at("eval_floor").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw fairot::FormatError(std::string("simulation config: ") + e.what());
  }
  return cfg;
}

std::vector<std::size_t> parse_grid(const std::string& arg) {
  std::vector<std::size_t> out;
  for (const std::string& part : fairot::split(arg, ',')) {
    if (part.empty()) throw fairot::ValidationError("sweep grid has an empty entry");
    out.push_back(static_cast<std::size_t>(fairot::parse_u64(part, "sweep grid")));
  }
  return out;
}

// Raw rows of a tabular file that survived the schema's filters, together
// with the parsed dataset (index-aligned).
struct ParsedRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> fields;
  fairot::Dataset data;
};

ParsedRows read_rows(const std::string& path, const fairot::TabularSchema& schema,
                     fairot::DatasetRole role) {
  fairot::CsvReader reader(path);
  auto map = fairot::detail::resolve_columns(reader.header(), schema);
  ParsedRows out;
  out.header = reader.header();
  std::vector<fairot::LabeledRecord> records;
  std::vector<std::string> row;
  std::size_t rows_read = 0, bad = 0;
  while (reader.next(row)) {
    ++rows_read;
    if (row.size() != out.header.size()) {
      ++bad;
      continue;
    }
    bool missing = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != schema.missing_marker) continue;
      if (schema.missing_policy == fairot::MissingPolicy::drop_any || map.used[c]) {
        missing = true;
        break;
      }
    }
    if (missing) {
      if (schema.missing_policy == fairot::MissingPolicy::fail)
        throw fairot::FormatError("'" + path + "' line " + std::to_string(reader.line_number()) +
                                  ": missing value");
      continue;
    }
    fairot::LabeledRecord r;
    bool ok = true;
    for (std::size_t c : map.feature_cols) {
      auto v = fairot::detail::try_parse_number(row[c]);
      if (!v.has_value() || !std::isfinite(*v)) {
        ok = false;
        break;
      }
      r.features.push_back(*v);
    }
    if (ok) {
      auto s = fairot::detail::derive_attribute(schema.sensitive, row[map.sensitive_col]);
      auto u = fairot::detail::derive_attribute(schema.unprotected, row[map.unprotected_col]);
      ok = s.has_value() && u.has_value();
      if (ok) {
        r.s = *s;
        r.u = *u;
      }
    }
    if (!ok) {
      ++bad;
      continue;
    }
    records.push_back(std::move(r));
    out.fields.push_back(row);
  }
  if (rows_read == 0) throw fairot::FormatError("'" + path + "' has no data rows");
  if (bad > 0 &&
      static_cast<double>(bad) / static_cast<double>(rows_read) > schema.bad_row_tolerance)
    throw fairot::FormatError("'" + path + "': " + std::to_string(bad) + " of " +
                              std::to_string(rows_read) + " rows unparseable");
  if (records.empty()) throw fairot::FormatError("'" + path + "' has no usable rows");
  out.data = fairot::validate_dataset(std::move(records), schema.features.size(), role);
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "fairot: warning: " << w << "\n";
}

std::string join_fields(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

int run_design(const std::string& research_path, const std::string& schema_arg,
               const std::string& nq_arg, double t, std::uint64_t seed,
               const std::string& out_path) {
  fairot::TabularSchema schema = resolve_schema(schema_arg);
  fairot::NqSpec nq = resolve_nq(nq_arg, schema);
  fairot::LoadStats stats;
  fairot::Dataset research =
      fairot::load_labeled_csv(research_path, schema, fairot::DatasetRole::research, &stats);
  fairot::RepairModel model = fairot::design_repair_model(research, nq, t, seed);
  model.feature_names = schema.features;
  model.schema_json = schema.canonical_json();
  model.schema_fingerprint = schema.fingerprint();
  model.created = utc_timestamp();
  fairot::save_model(model, out_path);
  print_warnings(model.warnings);
  std::cout << "designed " << out_path << " from " << research.size() << " research records ("
            << stats.rows_dropped_missing << " dropped missing, " << stats.rows_bad << " bad)\n";
  return 0;
}

int run_repair(const fairot::RepairModel& model, const std::string& model_path,
               const std::string& input_path, const std::string& out_path, std::uint64_t seed,
               std::size_t batch_size, const std::string& report_path) {
  print_warnings(model.warnings);
  if (model.schema_json.empty())
    throw fairot::SchemaError("model '" + model_path +
                              "' carries no input schema; it cannot repair tabular files");
  fairot::TabularSchema schema = fairot::TabularSchema::from_json_text(model.schema_json);

  fairot::CsvReader reader(input_path);
  auto map = fairot::detail::resolve_columns(reader.header(), schema);

  std::string tmp_path = out_path + ".tmp";
  std::ofstream out(tmp_path, std::ios::binary);
  if (!out) throw fairot::IoError("cannot open '" + tmp_path + "' for writing");
  out << join_fields(reader.header());
  for (const std::string& f : schema.features) out << ',' << f << "_repaired";
  out << '\n';

  fairot::RepairReport report;
  report.init_groups(model.d);
  std::size_t rows_read = 0, dropped = 0, bad = 0, kept = 0;

  struct PendingRow {
    std::string raw;
    fairot::LabeledRecord record;
    std::uint64_t index;
  };
  std::vector<PendingRow> batch;
  batch.reserve(batch_size);

  auto flush = [&]() {
    for (PendingRow& p : batch) {
      out << p.raw;
      for (std::size_t k = 0; k < model.d; ++k) {
        double repaired =
            fairot::repair_value(p.record.features[k], p.record.u, p.record.s, k, model,
                                 fairot::RepairRng{seed, p.index}, &report);
        out << ',' << fairot::format_double(repaired);
      }
      out << '\n';
      report.records += 1;
    }
    batch.clear();
  };

  std::vector<std::string> row;
  while (reader.next(row)) {
    ++rows_read;
    if (row.size() != reader.header().size()) {
      ++bad;
      continue;
    }
    bool missing = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != schema.missing_marker) continue;
      if (schema.missing_policy == fairot::MissingPolicy::drop_any || map.used[c]) {
        missing = true;
        break;
      }
    }
    if (missing) {
      if (schema.missing_policy == fairot::MissingPolicy::fail)
        throw fairot::FormatError("'" + input_path + "' line " +
                                  std::to_string(reader.line_number()) + ": missing value");
      ++dropped;
      continue;
    }
    PendingRow p;
    bool ok = true;
    for (std::size_t c : map.feature_cols) {
      auto v = fairot::detail::try_parse_number(row[c]);
      if (!v.has_value() || !std::isfinite(*v)) {
        ok = false;
        break;
      }
      p.record.features.push_back(*v);
    }
    if (ok) {
      auto s = fairot::detail::derive_attribute(schema.sensitive, row[map.sensitive_col]);
      auto u = fairot::detail::derive_attribute(schema.unprotected, row[map.unprotected_col]);
      ok = s.has_value() && u.has_value();
      if (ok) {
        p.record.s = *s;
        p.record.u = *u;
      }
    }
    if (!ok) {
      ++bad;
      continue;
    }
    p.raw = join_fields(row);
    p.index = kept++;
    batch.push_back(std::move(p));
    if (batch.size() >= batch_size) flush();
  }
  flush();

  if (rows_read == 0) {
    out.close();
    std::remove(tmp_path.c_str());
    throw fairot::FormatError("'" + input_path + "' has no data rows");
  }
  if (bad > 0 &&
      static_cast<double>(bad) / static_cast<double>(rows_read) > schema.bad_row_tolerance) {
    out.close();
    std::remove(tmp_path.c_str());
    throw fairot::FormatError("'" + input_path + "': " + std::to_string(bad) + " of " +
                              std::to_string(rows_read) + " rows unparseable");
  }
  if (kept == 0) {
    out.close();
    std::remove(tmp_path.c_str());
    throw fairot::FormatError("'" + input_path + "' has no usable rows");
  }
  out.flush();
  if (!out) {
    out.close();
    std::remove(tmp_path.c_str());
    throw fairot::IoError("failed writing '" + tmp_path + "'");
  }
  out.close();
  if (std::rename(tmp_path.c_str(), out_path.c_str()) != 0) {
    std::remove(tmp_path.c_str());
    throw fairot::IoError("cannot rename '" + tmp_path + "' to '" + out_path + "'");
  }

  if (!report_path.empty()) {
    std::string text;
    text += "fairot-repair-report v1\n";
    text += "model " + model_path + "\n";
    if (!model.schema_fingerprint.empty()) text += "fingerprint " + model.schema_fingerprint + "\n";
    text += "seed " + std::to_string(seed) + "\n";
    text += "rows_read " + std::to_string(rows_read) + "\n";
    text += "rows_dropped_missing " + std::to_string(dropped) + "\n";
    text += "rows_bad " + std::to_string(bad) + "\n";
    text += "records_repaired " + std::to_string(report.records) + "\n";
    text += "values_repaired " + std::to_string(report.values) + "\n";
    text += "clamped_low " + std::to_string(report.clamped_low) + "\n";
    text += "clamped_high " + std::to_string(report.clamped_high) + "\n";
    text += "zero_row_fallbacks " + std::to_string(report.zero_row_fallbacks) + "\n";
    for (int u = 0; u < 2; ++u)
      for (std::size_t k = 0; k < model.d; ++k)
        text += "clamped u=" + std::to_string(u) + " k=" + std::to_string(k) + " " +
                std::to_string(report.clamped_by_group[static_cast<std::size_t>(u)][k]) + "\n";
    fairot::atomic_write_file(report_path, text);
  }
  std::cout << "repaired " << report.records << " records (" << dropped << " dropped missing, "
            << bad << " bad, " << (report.clamped_low + report.clamped_high) << " clamped) -> "
            << out_path << "\n";
  return 0;
}

int run_evaluate(const std::string& input_path, const std::string& schema_arg, std::size_t grid,
                 double floor, const std::string& out_path) {
  fairot::TabularSchema schema = resolve_schema(schema_arg);
  fairot::Dataset data =
      fairot::load_labeled_csv(input_path, schema, fairot::DatasetRole::research);
  fairot::FairnessReport report = fairot::conditional_fairness(data, {grid, floor});
  std::ostringstream os;
  fairot::write_fairness_report(os, report, schema.features);
  if (!out_path.empty()) fairot::atomic_write_file(out_path, os.str());
  for (std::size_t k = 0; k < report.d; ++k) {
    std::cout << "E[" << schema.features[k] << "] = ";
    if (report.e_k_defined[k])
      std::cout << fairot::format_double(report.e_k[k]) << "\n";
    else
      std::cout << "undefined\n";
  }
  std::cout << "E_total = " << fairot::format_double(report.e_total) << "\n";
  return 0;
}

int run_simulate(const std::string& config_path, std::size_t replications,
                 std::optional<std::uint64_t> seed, const std::string& out_path) {
  SimulationConfig cfg = simulation_config_from_file(config_path);
  if (seed.has_value()) cfg.mixture.seed = *seed;
  fairot::MonteCarloResult result =
      fairot::run_monte_carlo(cfg.mixture, replications, fairot::NqSpec{cfg.n_q, {}}, cfg.t, cfg.kld);
  std::ostringstream os;
  fairot::write_summary_table(os, result);
  fairot::atomic_write_file(out_path, os.str());
  std::cout << "simulated " << replications << " replications -> " << out_path << "\n";
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& variable_arg,
              const std::string& grid_arg, std::size_t replications,
              std::optional<std::uint64_t> seed, const std::string& out_path) {
  SimulationConfig cfg = simulation_config_from_file(config_path);
  if (seed.has_value()) cfg.mixture.seed = *seed;
  fairot::SweepSpec sweep;
  if (variable_arg == "nR" || variable_arg == "research_size")
    sweep.variable = fairot::SweepVariable::research_size;
  else if (variable_arg == "nQ" || variable_arg == "support_size")
    sweep.variable = fairot::SweepVariable::support_size;
  else
    throw fairot::ValidationError("unknown sweep variable '" + variable_arg +
                                  "' (expected nR or nQ)");
  sweep.grid = parse_grid(grid_arg);
  sweep.replications = replications;
  sweep.base = cfg.mixture;
  sweep.n_q = cfg.n_q;
  sweep.t = cfg.t;
  sweep.kld = cfg.kld;
  std::vector<fairot::SweepPoint> points = fairot::run_sweep(sweep);
  std::ostringstream os;
  fairot::write_curve_table(os, sweep, points);
  fairot::atomic_write_file(out_path, os.str());
  std::cout << "swept " << points.size() << " grid points -> " << out_path << "\n";
  return 0;
}

int run_baseline_geometric(const std::string& research_path, const std::string& schema_arg,
                           double t, const std::string& out_path) {
  fairot::TabularSchema schema = resolve_schema(schema_arg);
  ParsedRows rows = read_rows(research_path, schema, fairot::DatasetRole::research);
  fairot::Dataset repaired = fairot::geometric_repair(rows.data, t);
  std::string text = join_fields(rows.header);
  for (const std::string& f : schema.features) text += ',' + f + "_repaired";
  text += '\n';
  for (std::size_t i = 0; i < rows.fields.size(); ++i) {
    text += join_fields(rows.fields[i]);
    for (std::size_t k = 0; k < repaired.d; ++k)
      text += ',' + fairot::format_double(repaired.records[i].features[k]);
    text += '\n';
  }
  fairot::atomic_write_file(out_path, text);
  std::cout << "geometric repair of " << repaired.size() << " records -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal-transport repair of attribute dependence in tabular data"};
  app.require_subcommand(1);

  std::string research_path, schema_arg, nq_arg = "50", out_path, model_path, input_path;
  std::string report_path, config_path, variable_arg, grid_arg;
  double t = 0.5, floor = 1e-12;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t batch_size = 8192, grid_points = 1024, replications = 20;

  CLI::App* design = app.add_subcommand("design", "fit a repair model on research data");
  design->add_option("--research", research_path, "research CSV")->required();
  design->add_option("--schema", schema_arg, "schema JSON path, or 'adult'")->required();
  design->add_option("--nq", nq_arg, "support size: integer or per-group JSON config");
  design->add_option("--t", t, "interpolation weight in [0,1]")->capture_default_str();
  design->add_option("--seed", seed, "seed recorded as the model's default");
  design->add_option("--out", out_path, "model file to write")->required();

  CLI::App* repair = app.add_subcommand("repair", "apply a repair model to a tabular file");
  repair->add_option("--model", model_path, "model file from 'design'")->required();
  repair->add_option("--input", input_path, "CSV to repair")->required();
  repair->add_option("--out", out_path, "repaired CSV to write")->required();
  repair->add_option("--seed", seed, "stream seed (defaults to the model's)");
  auto* repair_seed_flag = repair->get_option("--seed");
  repair->add_option("--batch", batch_size, "records per in-memory batch")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  repair->add_option("--report", report_path, "also write a repair report here");

  CLI::App* evaluate = app.add_subcommand("evaluate", "measure conditional dependence on s");
  evaluate->add_option("--input", input_path, "CSV to evaluate")->required();
  evaluate->add_option("--schema", schema_arg, "schema JSON path, or 'adult'")->required();
  evaluate->add_option("--grid", grid_points, "density evaluation grid size")
      ->capture_default_str();
  evaluate->add_option("--floor", floor, "density floor")->capture_default_str();
  evaluate->add_option("--out", out_path, "report file to write");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo study on synthetic data");
  simulate->add_option("--spec,--config", config_path, "mixture config JSON")->required();
  simulate->add_option("--replications", replications, "independent replications")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "override the config seed");
  auto* simulate_seed_flag = simulate->get_option("--seed");
  simulate->add_option("--out", out_path, "summary table to write")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "sample-size or support-size sweep");
  sweep->add_option("--spec,--config", config_path, "mixture config JSON")->required();
  sweep->add_option("--variable", variable_arg, "nR or nQ")->required();
  sweep->add_option("--grid", grid_arg, "comma-separated values to sweep")->required();
  sweep->add_option("--replications", replications, "replications per grid point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "override the config seed");
  auto* sweep_seed_flag = sweep->get_option("--seed");
  sweep->add_option("--out", out_path, "curve table to write")->required();

  CLI::App* baseline =
      app.add_subcommand("baseline-geometric", "in-sample geometric repair of research data");
  baseline->add_option("--research", research_path, "research CSV")->required();
  baseline->add_option("--schema", schema_arg, "schema JSON path, or 'adult'")->required();
  baseline->add_option("--t", t, "interpolation weight in [0,1]")->capture_default_str();
  baseline->add_option("--out", out_path, "repaired CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (app.got_subcommand(design)) return run_design(research_path, schema_arg, nq_arg, t, seed, out_path);
    if (app.got_subcommand(repair)) {
      seed_given = repair_seed_flag->count() > 0;
      fairot::RepairModel model = fairot::load_model(model_path);
      std::uint64_t effective_seed = seed_given ? seed : model.seed;
      return run_repair(model, model_path, input_path, out_path, effective_seed, batch_size,
                        report_path);
    }
    if (app.got_subcommand(evaluate))
      return run_evaluate(input_path, schema_arg, grid_points, floor, out_path);
    if (app.got_subcommand(simulate)) {
      std::optional<std::uint64_t> s;
      if (simulate_seed_flag->count() > 0) s = seed;
      return run_simulate(config_path, replications, s, out_path);
    }
    if (app.got_subcommand(sweep)) {
      std::optional<std::uint64_t> s;
      if (sweep_seed_flag->count() > 0) s = seed;
      return run_sweep(config_path, variable_arg, grid_arg, replications, s, out_path);
    }
    if (app.got_subcommand(baseline))
      return run_baseline_geometric(research_path, schema_arg, t, out_path);
  } catch (const fairot::Error& e) {
    std::cerr << "fairot: [" << e.error_class() << "] " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "fairot: [internal] " << e.what() << "\n";
    return 70;
  }
  return 64;
}
