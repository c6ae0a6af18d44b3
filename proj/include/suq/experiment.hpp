#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "suq/corruption.hpp"
#include "suq/datasets.hpp"
#include "suq/estimators.hpp"
#include "suq/kernel.hpp"
#include "suq/spectral.hpp"

namespace suq {

enum class ErrorPolicy { Abort, SkipAndCount };

enum class RegenerationKind { Auto, Generator, Bootstrap };

/// Samples per accumulation block. Blocks are the unit of work handed to
/// workers and are merged in ascending order, so floating sums do not depend
/// on the worker count.
inline constexpr std::int64_t kAccumulationBlock = 32;

struct ExperimentConfig {
  GeneratorSpec generator;
  CorruptionConfig corruption;
  RegenerationKind regeneration = RegenerationKind::Auto;
  SimilarityConfig similarity;
  ExtensionMode extension = ExtensionMode::Normalized;
  std::int64_t mc_samples = 100;
  std::vector<double> epsilon_grid{0.025, 0.05, 0.1, 0.2, 0.4};
  double gauge_tolerance = 1e-2;
  int workers = 1;
  std::string output_dir = "out";
  ErrorPolicy error_policy = ErrorPolicy::SkipAndCount;
  bool store_samples = false;

  void validate() const;
};

/// Reads a config object. Missing fields keep their defaults; for csv data
/// without an explicit deletion range the corruption is noise only.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Config echo. Scheduling fields (workers, output_dir) are left out unless
/// requested, since they do not influence any result.
nlohmann::json config_to_json(const ExperimentConfig& cfg, bool include_scheduling = false);

/// FNV-1a 64 of the canonical config echo, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Everything `report` needs to replay one accumulated sample.
struct SampleRecord {
  std::int64_t index = 0;
  Membership membership;
  Eigen::VectorXd levels;
  bool warned = false;
  bool degenerate_gap = false;
  double eigen_residual = 0.0;
  double spectrum_min = 0.0;
  double spectrum_max = 0.0;
};

struct EpsilonResult {
  double epsilon = 0.0;
  std::int64_t requested_samples = 0;
  std::int64_t skipped_samples = 0;
  ExpectationReport<double> report;
  double wall_time_s = 0.0;
  std::vector<SampleRecord> samples;
};

struct ExperimentOutput {
  ExperimentConfig config;
  std::string config_hash;
  DataSetd reference;
  ReferenceClustering<double> clustering;
  /// 2-D coordinates for plotting: PCA when d > 2, otherwise empty.
  std::optional<Eigen::MatrixXd> projection;
  std::vector<EpsilonResult> results;
  double wall_time_s = 0.0;
};

RegenerationSource regeneration_source(const ExperimentConfig& cfg);

/// Monte Carlo estimates of all expectations for one noise level against a
/// fixed reference clustering.
EpsilonResult run_epsilon(const ExperimentConfig& cfg, const DataSetd& X, const ReferenceClustering<double>& ref,
                          double epsilon);

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes points.csv, report_eps_<eps>.csv per noise level, summary.json and
/// timing.json, plus samples_eps_<eps>.bin when samples were stored.
void emit(const ExperimentOutput& out, const std::filesystem::path& dir);

/// points.csv: index, coordinates x0..x{d-1}, label (empty when unlabeled),
/// and pca_x, pca_y when a projection is given.
void write_points(const DataSetd& X, const std::optional<Eigen::MatrixXd>& projection,
                  const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

std::string report_file_name(double epsilon);
std::string samples_file_name(double epsilon);

nlohmann::json summary_json(const ExperimentOutput& out);

/// Per-noise-level summary fields as written to summary.json.
struct SummaryEntry {
  double epsilon = 0.0;
  std::int64_t M = 0;
  double expected_misclustering_rate = 0.0;
  double t_star = 0.0;
  double gamma = 0.0;
  std::int64_t reference_size = 0;
  std::int64_t vorobev_size = 0;
  std::int64_t odf_set_size = 0;
  std::int64_t spectral_set_size = 0;
  std::int64_t warn_count = 0;
  std::int64_t gap_warn_count = 0;
  std::int64_t odf_infinite_points = 0;
  std::int64_t skipped_samples = 0;
  double max_eigen_residual = 0.0;

  bool operator==(const SummaryEntry&) const = default;
};

struct Summary {
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::int64_t n = 0;
  std::int64_t dimension = 0;
  double sigma = 0.0;
  double reference_lambda = 0.0;
  std::vector<SummaryEntry> reports;

  bool operator==(const Summary&) const = default;
};

Summary parse_summary(const nlohmann::json& j);
Summary read_summary(const std::filesystem::path& path);

void write_samples(const std::filesystem::path& path, const EpsilonResult& result, Eigen::Index n);
/// Returns the stored records and the requested sample count.
std::pair<std::vector<SampleRecord>, std::int64_t> read_samples(const std::filesystem::path& path);

/// Reads points.csv as written by emit (coordinates and labels only).
DataSetd read_points(const std::filesystem::path& path, Eigen::Index dimension);

/// Recomputes every expectation of a stored run from its per-sample records,
/// without any eigensolve, and writes the same files as emit (no timing).
ExperimentOutput recompute_from_samples(const std::filesystem::path& input_dir);

}  // namespace suq
