// Command line front end: generate, run, report, project.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>

#include "suq/experiment.hpp"

namespace {

using suq::Error;
using suq::ErrorKind;

suq::ExperimentConfig base_config(const std::string& path) {
  if (path.empty()) return suq::config_from_json(nlohmann::json::object());
  return suq::load_config(path);
}

suq::Normalization parse_normalization(const std::string& s) {
  if (s == "zscore") return suq::Normalization::ZScore;
  if (s == "minmax") return suq::Normalization::MinMax;
  if (s == "none") return suq::Normalization::None;
  throw Error(ErrorKind::InvalidConfig, "unknown normalization '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo expectations of spectral bi-clusterings under data corruption"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::int64_t samples = 0;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<double> eps;
  bool store_samples = false;
  std::string error_policy;

  auto* generate = app.add_subcommand("generate", "Write the reference data set as points.csv");
  generate->add_option("-c,--config", config_path, "Experiment config (JSON)");
  generate->add_option("-o,--out", out_path, "Output CSV path")->default_val("points.csv");

  auto* run = app.add_subcommand("run", "Run the full Monte Carlo experiment");
  run->add_option("-c,--config", config_path, "Experiment config (JSON)");
  run->add_option("-o,--out", out_path, "Output directory (overrides output_dir)");
  run->add_option("-M,--samples", samples, "Monte Carlo samples per noise level");
  run->add_option("-w,--workers", workers, "Worker threads");
  run->add_option("-s,--seed", seed, "Master seed for the corruption streams")->each([&](const std::string&) { seed_given = true; });
  run->add_option("-e,--eps", eps, "Noise levels (replaces epsilon_grid)");
  run->add_flag("--store-samples", store_samples, "Keep per-sample memberships and levels for `report`");
  run->add_option("--error-policy", error_policy, "abort | skip");

  std::string input;
  auto* report = app.add_subcommand("report", "Recompute expectations from stored samples");
  report->add_option("-i,--input", input, "Directory of a run made with --store-samples")->required();
  report->add_option("-o,--out", out_path, "Output directory (defaults to the input directory)");

  std::string normalization = "zscore";
  bool label_column = false;
  auto* project = app.add_subcommand("project", "PCA projection of a CSV data set to two dimensions");
  project->add_option("-i,--input", input, "Input CSV")->required();
  project->add_option("-o,--out", out_path, "Output CSV")->default_val("projection.csv");
  project->add_option("-n,--normalization", normalization, "zscore | minmax | none");
  project->add_flag("--label-column", label_column, "Last column holds integer labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      const auto cfg = base_config(config_path);
      const auto X = suq::make_reference(cfg.generator);
      std::optional<Eigen::MatrixXd> projection;
      if (X.dimension() > 2) projection = suq::pca_project(X, 2).points;
      suq::write_points(X, projection, out_path);
    } else if (run->parsed()) {
      auto cfg = base_config(config_path);
      if (samples > 0) cfg.mc_samples = samples;
      if (workers > 0) cfg.workers = workers;
      if (seed_given) cfg.corruption.master_seed = seed;
      if (!eps.empty()) cfg.epsilon_grid = eps;
      if (store_samples) cfg.store_samples = true;
      if (!error_policy.empty()) {
        auto j = suq::config_to_json(cfg, true);
        j["error_policy"] = error_policy;
        cfg = suq::config_from_json(j);
      }
      if (!out_path.empty()) cfg.output_dir = out_path;
      cfg.validate();
      const auto out = suq::run_experiment(cfg);
      suq::emit(out, cfg.output_dir);
      for (const auto& r : out.results) {
        std::cout << "epsilon " << suq::format_double(r.epsilon) << ": rate "
                  << suq::format_double(r.report.expected_misclustering_rate) << ", M " << r.report.M << ", skipped "
                  << r.skipped_samples << ", warnings " << r.report.warn_count << '\n';
      }
    } else if (report->parsed()) {
      const auto out = suq::recompute_from_samples(input);
      suq::emit(out, out_path.empty() ? input : out_path);
    } else if (project->parsed()) {
      suq::CsvOptions opts;
      opts.label_column = label_column;
      const auto X = suq::load_csv(input, parse_normalization(normalization), opts);
      const auto P = suq::pca_project(X, 2);
      std::ofstream f(out_path, std::ios::trunc);
      if (!f) throw Error(ErrorKind::Io, "cannot write '" + out_path + "'");
      f << "index,pca_x,pca_y" << (X.labeled() ? ",label" : "") << '\n';
      for (Eigen::Index i = 0; i < P.size(); ++i) {
        f << i << ',' << suq::format_double(P.points(i, 0)) << ',' << suq::format_double(P.points(i, 1));
        if (X.labeled()) f << ',' << X.labels[i];
        f << '\n';
      }
      if (!f) throw Error(ErrorKind::Io, "write failed for '" + out_path + "'");
    }
  } catch (const Error& e) {
    std::cerr << "error (" << suq::to_string(e.kind()) << "): " << e.what() << '\n';
    return suq::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << '\n';
    return 3;
  }
  return 0;
}
