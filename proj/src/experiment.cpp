#include "suq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace suq {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  generator.validate();
  corruption.validate();
  if (mc_samples < 1) throw Error(ErrorKind::InvalidConfig, "mc_samples must be at least 1");
  if (epsilon_grid.empty()) throw Error(ErrorKind::InvalidConfig, "epsilon_grid must not be empty");
  for (const double e : epsilon_grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw Error(ErrorKind::InvalidConfig, "epsilon values must be finite and >= 0");
  }
  if (!(gauge_tolerance >= 0.0)) throw Error(ErrorKind::InvalidConfig, "gauge_tolerance must be >= 0");
  if (workers < 1) throw Error(ErrorKind::InvalidConfig, "workers must be at least 1");
  if (!similarity.uses_mst() && !std::isfinite(similarity.sigma)) {
    throw Error(ErrorKind::InvalidConfig, "similarity.sigma must be finite");
  }
  if (!(similarity.scale > 0.0)) throw Error(ErrorKind::InvalidConfig, "similarity.scale must be positive");
  if (regeneration == RegenerationKind::Generator && generator.kind == DatasetKind::Csv) {
    throw Error(ErrorKind::InvalidConfig, "csv data cannot use generator regeneration");
  }
}

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<DatasetKind> kKinds[] = {
    {DatasetKind::PointInCircle, "point_in_circle"}, {DatasetKind::HalfCircles, "half_circles"}, {DatasetKind::Csv, "csv"}};
constexpr EnumName<Normalization> kNormalizations[] = {
    {Normalization::ZScore, "zscore"}, {Normalization::MinMax, "minmax"}, {Normalization::None, "none"}};
constexpr EnumName<HeaderMode> kHeaders[] = {
    {HeaderMode::Auto, "auto"}, {HeaderMode::Present, "present"}, {HeaderMode::Absent, "absent"}};
constexpr EnumName<GaussianParam> kParams[] = {{GaussianParam::Variance, "variance"}, {GaussianParam::StdDev, "std"}};
constexpr EnumName<RegenerationKind> kRegens[] = {
    {RegenerationKind::Auto, "auto"}, {RegenerationKind::Generator, "generator"}, {RegenerationKind::Bootstrap, "bootstrap"}};
constexpr EnumName<ExtensionMode> kExtensions[] = {{ExtensionMode::Normalized, "normalized"}, {ExtensionMode::Raw, "raw"}};
constexpr EnumName<ErrorPolicy> kPolicies[] = {{ErrorPolicy::Abort, "abort"}, {ErrorPolicy::SkipAndCount, "skip"}};

template <typename Enum, std::size_t N>
const char* name_of(const EnumName<Enum> (&table)[N], Enum v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <typename Enum, std::size_t N>
Enum parse_enum(const EnumName<Enum> (&table)[N], const json& j, const char* field) {
  const auto s = j.get<std::string>();
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  throw Error(ErrorKind::InvalidConfig, std::string("unknown value '") + s + "' for " + field);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorKind::InvalidConfig, std::string("unknown config field '") + where + "." + key + "'");
    }
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    reject_unknown(j,
                   {"generator", "corruption", "similarity", "mc_samples", "epsilon_grid", "gauge_tolerance", "workers",
                    "output_dir", "error_policy", "store_samples"},
                   "config");
    if (j.contains("generator")) {
      const json& g = j["generator"];
      reject_unknown(g, {"kind", "m", "seed", "csv_path", "normalization", "csv_header", "label_column", "gaussian_param"},
                     "generator");
      if (g.contains("kind")) cfg.generator.kind = parse_enum(kKinds, g["kind"], "generator.kind");
      cfg.generator.m = g.value("m", cfg.generator.m);
      cfg.generator.seed = g.value("seed", cfg.generator.seed);
      cfg.generator.csv_path = g.value("csv_path", cfg.generator.csv_path);
      if (g.contains("normalization")) {
        cfg.generator.normalization = parse_enum(kNormalizations, g["normalization"], "generator.normalization");
      }
      if (g.contains("csv_header")) cfg.generator.csv.header = parse_enum(kHeaders, g["csv_header"], "generator.csv_header");
      cfg.generator.csv.label_column = g.value("label_column", cfg.generator.csv.label_column);
      if (g.contains("gaussian_param")) {
        cfg.generator.gaussian_param = parse_enum(kParams, g["gaussian_param"], "generator.gaussian_param");
      }
    }
    if (cfg.generator.kind == DatasetKind::Csv) {
      cfg.corruption.regenerate = false;
    } else {
      cfg.corruption.deletion_lo = 0.01;
      cfg.corruption.deletion_hi = 0.07;
    }
    if (j.contains("corruption")) {
      const json& c = j["corruption"];
      reject_unknown(c, {"deletion_range", "regenerate", "additional_points", "master_seed", "regeneration"}, "corruption");
      if (c.contains("deletion_range")) {
        const auto range = c["deletion_range"].get<std::vector<double>>();
        if (range.size() != 2) throw Error(ErrorKind::InvalidConfig, "corruption.deletion_range needs two values");
        cfg.corruption.deletion_lo = range[0];
        cfg.corruption.deletion_hi = range[1];
      }
      cfg.corruption.regenerate = c.value("regenerate", cfg.corruption.regenerate);
      cfg.corruption.additional_points = c.value("additional_points", cfg.corruption.additional_points);
      cfg.corruption.master_seed = c.value("master_seed", cfg.corruption.master_seed);
      if (c.contains("regeneration")) cfg.regeneration = parse_enum(kRegens, c["regeneration"], "corruption.regeneration");
    }
    if (j.contains("similarity")) {
      const json& s = j["similarity"];
      reject_unknown(s, {"sigma", "scale", "recompute_per_sample", "extension"}, "similarity");
      if (s.contains("sigma")) {
        if (s["sigma"].is_string()) {
          if (s["sigma"].get<std::string>() != "mst") {
            throw Error(ErrorKind::InvalidConfig, "similarity.sigma must be a positive number or \"mst\"");
          }
          cfg.similarity.sigma = 0.0;
        } else {
          cfg.similarity.sigma = s["sigma"].get<double>();
          if (!(cfg.similarity.sigma > 0.0)) throw Error(ErrorKind::InvalidConfig, "similarity.sigma must be positive");
        }
      }
      cfg.similarity.scale = s.value("scale", cfg.similarity.scale);
      cfg.similarity.recompute_per_sample = s.value("recompute_per_sample", cfg.similarity.recompute_per_sample);
      if (s.contains("extension")) cfg.extension = parse_enum(kExtensions, s["extension"], "similarity.extension");
    }
    cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
    if (j.contains("epsilon_grid")) cfg.epsilon_grid = j["epsilon_grid"].get<std::vector<double>>();
    cfg.gauge_tolerance = j.value("gauge_tolerance", cfg.gauge_tolerance);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("error_policy")) cfg.error_policy = parse_enum(kPolicies, j["error_policy"], "error_policy");
    cfg.store_samples = j.value("store_samples", cfg.store_samples);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg, bool include_scheduling) {
  json g = {{"kind", name_of(kKinds, cfg.generator.kind)},
            {"m", cfg.generator.m},
            {"seed", cfg.generator.seed},
            {"gaussian_param", name_of(kParams, cfg.generator.gaussian_param)}};
  if (cfg.generator.kind == DatasetKind::Csv) {
    g["csv_path"] = cfg.generator.csv_path;
    g["normalization"] = name_of(kNormalizations, cfg.generator.normalization);
    g["csv_header"] = name_of(kHeaders, cfg.generator.csv.header);
    g["label_column"] = cfg.generator.csv.label_column;
  }
  json c = {{"deletion_range", {cfg.corruption.deletion_lo, cfg.corruption.deletion_hi}},
            {"regenerate", cfg.corruption.regenerate},
            {"additional_points", cfg.corruption.additional_points},
            {"master_seed", cfg.corruption.master_seed},
            {"regeneration", name_of(kRegens, cfg.regeneration)}};
  json s = {{"scale", cfg.similarity.scale},
            {"recompute_per_sample", cfg.similarity.recompute_per_sample},
            {"extension", name_of(kExtensions, cfg.extension)}};
  if (cfg.similarity.uses_mst()) {
    s["sigma"] = "mst";
  } else {
    s["sigma"] = cfg.similarity.sigma;
  }
  json j = {{"generator", g},
            {"corruption", c},
            {"similarity", s},
            {"mc_samples", cfg.mc_samples},
            {"epsilon_grid", cfg.epsilon_grid},
            {"gauge_tolerance", cfg.gauge_tolerance},
            {"error_policy", name_of(kPolicies, cfg.error_policy)},
            {"store_samples", cfg.store_samples}};
  if (include_scheduling) {
    j["workers"] = cfg.workers;
    j["output_dir"] = cfg.output_dir;
  }
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Monte Carlo driver

RegenerationSource regeneration_source(const ExperimentConfig& cfg) {
  RegenerationKind kind = cfg.regeneration;
  if (kind == RegenerationKind::Auto) {
    kind = cfg.generator.kind == DatasetKind::Csv ? RegenerationKind::Bootstrap : RegenerationKind::Generator;
  }
  if (kind == RegenerationKind::Bootstrap) return BootstrapSource{};
  return GeneratorSource{generator_sampler(cfg.generator)};
}

namespace {

struct Block {
  Accumulator<double> acc;
  std::int64_t skipped = 0;
};

ClusterSample<double> replay(const SampleRecord& r, const DataSetd& X) {
  ClusterSample<double> s;
  s.membership = r.membership;
  s.levels = r.levels;
  s.odf = odf_values(r.membership, X);
  s.sample_cardinality = r.membership.count();
  s.warned = r.warned;
  s.degenerate_gap = r.degenerate_gap;
  s.eigen_residual = r.eigen_residual;
  s.spectrum_min = r.spectrum_min;
  s.spectrum_max = r.spectrum_max;
  return s;
}

Accumulator<double> merge_blocks(const std::vector<Block>& blocks, Eigen::Index n) {
  Accumulator<double> total(n);
  for (const auto& b : blocks) total.merge(b.acc);
  return total;
}

std::int64_t block_count(std::int64_t samples) { return (samples + kAccumulationBlock - 1) / kAccumulationBlock; }

}  // namespace

EpsilonResult run_epsilon(const ExperimentConfig& cfg, const DataSetd& X, const ReferenceClustering<double>& ref,
                          double epsilon) {
  const auto start = std::chrono::steady_clock::now();
  CorruptionConfig corruption = cfg.corruption;
  corruption.noise_std = epsilon;
  const RegenerationSource source = regeneration_source(cfg);
  const Eigen::Index n = X.size();
  const std::int64_t M = cfg.mc_samples;
  const std::int64_t nblocks = block_count(M);

  std::vector<Block> blocks(static_cast<std::size_t>(nblocks), Block{Accumulator<double>(n), 0});
  std::vector<std::optional<SampleRecord>> records(cfg.store_samples ? static_cast<std::size_t>(M) : 0);

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::int64_t failed_index = -1;
  std::optional<Error> failure;

  auto work = [&] {
    while (!stop.load()) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      Block& block = blocks[static_cast<std::size_t>(b)];
      const std::int64_t end = std::min(M, (b + 1) * kAccumulationBlock);
      for (std::int64_t i = b * kAccumulationBlock; i < end; ++i) {
        try {
          const CorruptedSample cs = corrupt(X, corruption, source, static_cast<std::uint64_t>(i));
          const double sigma = cfg.similarity.recompute_per_sample && cfg.similarity.uses_mst()
                                   ? mst_sigma(cs.data, cfg.similarity.scale)
                                   : ref.sigma;
          const ClusterSample<double> s = cluster_reference_under_sample(X, cs.data, sigma, ref.gauge, cfg.extension);
          accumulate(block.acc, s, ref.membership);
          if (cfg.store_samples) {
            records[static_cast<std::size_t>(i)] = SampleRecord{i,
                                                                s.membership,
                                                                s.levels,
                                                                s.warned,
                                                                s.degenerate_gap,
                                                                s.eigen_residual,
                                                                s.spectrum_min,
                                                                s.spectrum_max};
          }
        } catch (const Error& e) {
          if (cfg.error_policy == ErrorPolicy::SkipAndCount) {
            ++block.skipped;
            continue;
          }
          std::lock_guard lock(failure_mutex);
          if (failed_index < 0 || i < failed_index) {
            failed_index = i;
            failure = Error(e.kind(), "sample " + std::to_string(i) + " at epsilon " + format_double(epsilon) + ": " + e.what());
          }
          stop = true;
          return;
        }
      }
    }
  };

  const int workers = static_cast<int>(std::min<std::int64_t>(cfg.workers, nblocks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) throw *failure;

  EpsilonResult result;
  result.epsilon = epsilon;
  result.requested_samples = M;
  for (const auto& b : blocks) result.skipped_samples += b.skipped;
  const Accumulator<double> total = merge_blocks(blocks, n);
  if (total.M == 0) {
    throw Error(ErrorKind::NoSamples, "every Monte Carlo sample failed at epsilon " + format_double(epsilon));
  }
  result.report = finalize(total, ref.membership);
  for (auto& r : records) {
    if (r) result.samples.push_back(std::move(*r));
  }
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  out.config = cfg;
  out.config_hash = config_hash(cfg);
  out.reference = make_reference(cfg.generator);
  const double sigma = resolve_sigma(cfg.similarity, out.reference);
  out.clustering = cluster_reference(out.reference, sigma, cfg.gauge_tolerance);
  if (out.reference.dimension() > 2) out.projection = pca_project(out.reference, 2).points;
  for (const double eps : cfg.epsilon_grid) {
    out.results.push_back(run_epsilon(cfg, out.reference, out.clustering, eps));
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string report_file_name(double epsilon) { return "report_eps_" + format_double(epsilon) + ".csv"; }

std::string samples_file_name(double epsilon) { return "samples_eps_" + format_double(epsilon) + ".bin"; }

namespace {

std::ofstream open_for_write(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return f;
}

void finish(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_for_write(path);
  f << text;
  finish(f, path);
}

SummaryEntry summary_entry(const EpsilonResult& r, const Membership& reference) {
  const auto& rep = r.report;
  SummaryEntry e;
  e.epsilon = r.epsilon;
  e.M = rep.M;
  e.expected_misclustering_rate = rep.expected_misclustering_rate;
  e.t_star = rep.t_star;
  e.gamma = rep.gamma;
  e.reference_size = reference.count();
  e.vorobev_size = rep.vorobev_set.count();
  e.odf_set_size = rep.odf_set.count();
  e.spectral_set_size = rep.spectral_set.count();
  e.warn_count = rep.warn_count;
  e.gap_warn_count = rep.gap_warn_count;
  e.odf_infinite_points = rep.odf_infinite_points;
  e.skipped_samples = r.skipped_samples;
  e.max_eigen_residual = rep.max_eigen_residual;
  return e;
}

json to_json(const SummaryEntry& e) {
  return {{"epsilon", e.epsilon},
          {"M", e.M},
          {"expected_misclustering_rate", e.expected_misclustering_rate},
          {"t_star", e.t_star},
          {"gamma", e.gamma},
          {"reference_size", e.reference_size},
          {"vorobev_size", e.vorobev_size},
          {"odf_set_size", e.odf_set_size},
          {"spectral_set_size", e.spectral_set_size},
          {"warn_count", e.warn_count},
          {"gap_warn_count", e.gap_warn_count},
          {"odf_infinite_points", e.odf_infinite_points},
          {"skipped_samples", e.skipped_samples},
          {"max_eigen_residual", e.max_eigen_residual}};
}

}  // namespace

json summary_json(const ExperimentOutput& out) {
  json reports = json::array();
  for (const auto& r : out.results) reports.push_back(to_json(summary_entry(r, out.clustering.membership)));
  return {{"config", config_to_json(out.config)},
          {"config_hash", out.config_hash},
          {"master_seed", out.config.corruption.master_seed},
          {"n", out.reference.size()},
          {"dimension", out.reference.dimension()},
          {"sigma", out.clustering.sigma},
          {"reference_lambda", out.clustering.pair.lambda},
          {"reports", reports}};
}

Summary parse_summary(const json& j) {
  try {
    Summary s;
    s.config = j.at("config");
    s.config_hash = j.at("config_hash").get<std::string>();
    s.master_seed = j.at("master_seed").get<std::uint64_t>();
    s.n = j.at("n").get<std::int64_t>();
    s.dimension = j.at("dimension").get<std::int64_t>();
    s.sigma = j.at("sigma").get<double>();
    s.reference_lambda = j.at("reference_lambda").get<double>();
    for (const auto& r : j.at("reports")) {
      SummaryEntry e;
      e.epsilon = r.at("epsilon").get<double>();
      e.M = r.at("M").get<std::int64_t>();
      e.expected_misclustering_rate = r.at("expected_misclustering_rate").get<double>();
      e.t_star = r.at("t_star").get<double>();
      e.gamma = r.at("gamma").get<double>();
      e.reference_size = r.at("reference_size").get<std::int64_t>();
      e.vorobev_size = r.at("vorobev_size").get<std::int64_t>();
      e.odf_set_size = r.at("odf_set_size").get<std::int64_t>();
      e.spectral_set_size = r.at("spectral_set_size").get<std::int64_t>();
      e.warn_count = r.at("warn_count").get<std::int64_t>();
      e.gap_warn_count = r.at("gap_warn_count").get<std::int64_t>();
      e.odf_infinite_points = r.at("odf_infinite_points").get<std::int64_t>();
      e.skipped_samples = r.at("skipped_samples").get<std::int64_t>();
      e.max_eigen_residual = r.at("max_eigen_residual").get<double>();
      s.reports.push_back(e);
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("summary.json: ") + e.what());
  }
}

Summary read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    json j;
    in >> j;
    return parse_summary(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "': " + e.what());
  }
}

namespace {

constexpr char kSamplesMagic[8] = {'S', 'U', 'Q', 'S', '0', '0', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const fs::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorKind::Parse, "truncated samples file '" + path.string() + "'");
  }
  return v;
}

void put_bits(std::ostream& os, const Membership& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) put<std::uint8_t>(os, m[i] ? 1 : 0);
}

Membership get_bits(std::istream& is, Eigen::Index n, const fs::path& path) {
  Membership m(n);
  for (Eigen::Index i = 0; i < n; ++i) m[i] = get<std::uint8_t>(is, path) != 0;
  return m;
}

}  // namespace

// Layout (host byte order): magic[8], u64 n, i64 requested, i64 count,
// f64 epsilon, then per record: i64 index, u8 warned, u8 degenerate_gap,
// f64 residual, f64 spectrum_min, f64 spectrum_max, n x u8 membership,
// n x f64 levels.
void write_samples(const fs::path& path, const EpsilonResult& result, Eigen::Index n) {
  auto f = open_for_write(path, std::ios::out | std::ios::binary);
  f.write(kSamplesMagic, sizeof kSamplesMagic);
  put<std::uint64_t>(f, static_cast<std::uint64_t>(n));
  put<std::int64_t>(f, result.requested_samples);
  put<std::int64_t>(f, static_cast<std::int64_t>(result.samples.size()));
  put<double>(f, result.epsilon);
  for (const auto& r : result.samples) {
    put<std::int64_t>(f, r.index);
    put<std::uint8_t>(f, r.warned ? 1 : 0);
    put<std::uint8_t>(f, r.degenerate_gap ? 1 : 0);
    put<double>(f, r.eigen_residual);
    put<double>(f, r.spectrum_min);
    put<double>(f, r.spectrum_max);
    put_bits(f, r.membership);
    f.write(reinterpret_cast<const char*>(r.levels.data()), static_cast<std::streamsize>(sizeof(double) * n));
  }
  finish(f, path);
}

std::pair<std::vector<SampleRecord>, std::int64_t> read_samples(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  char magic[8];
  if (!f.read(magic, sizeof magic) || std::memcmp(magic, kSamplesMagic, sizeof magic) != 0) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "' is not a samples file");
  }
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(f, path));
  const auto requested = get<std::int64_t>(f, path);
  const auto count = get<std::int64_t>(f, path);
  (void)get<double>(f, path);
  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t k = 0; k < count; ++k) {
    SampleRecord r;
    r.index = get<std::int64_t>(f, path);
    r.warned = get<std::uint8_t>(f, path) != 0;
    r.degenerate_gap = get<std::uint8_t>(f, path) != 0;
    r.eigen_residual = get<double>(f, path);
    r.spectrum_min = get<double>(f, path);
    r.spectrum_max = get<double>(f, path);
    r.membership = get_bits(f, n, path);
    r.levels.resize(n);
    if (!f.read(reinterpret_cast<char*>(r.levels.data()), static_cast<std::streamsize>(sizeof(double) * n))) {
      throw Error(ErrorKind::Parse, "truncated samples file '" + path.string() + "'");
    }
    records.push_back(std::move(r));
  }
  return {std::move(records), requested};
}

void write_points(const DataSetd& X, const std::optional<Eigen::MatrixXd>& projection, const fs::path& path) {
  const Eigen::Index n = X.size();
  const Eigen::Index d = X.dimension();
  std::ostringstream os;
  os << "index";
  for (Eigen::Index k = 0; k < d; ++k) os << ",x" << k;
  os << ",label";
  if (projection) os << ",pca_x,pca_y";
  os << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    os << i;
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << format_double(X.points(i, k));
    os << ',';
    if (X.labeled()) os << X.labels[i];
    if (projection) os << ',' << format_double((*projection)(i, 0)) << ',' << format_double((*projection)(i, 1));
    os << '\n';
  }
  write_text(path, os.str());
}

void emit(const ExperimentOutput& out, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());

  write_points(out.reference, out.projection, dir / "points.csv");
  const Eigen::Index n = out.reference.size();

  const Membership& ref = out.clustering.membership;
  for (const auto& r : out.results) {
    const auto& rep = r.report;
    std::ostringstream os;
    os << "index,coverage,mean_level,mean_odf,in_vorobev,in_odf_set,in_spectral_set,in_reference_cluster\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      os << i << ',' << format_double(rep.coverage[i]) << ',' << format_double(rep.mean_levels[i]) << ','
         << format_double(rep.mean_odf[i]) << ',' << int(rep.vorobev_set[i]) << ',' << int(rep.odf_set[i]) << ','
         << int(rep.spectral_set[i]) << ',' << int(ref[i]) << '\n';
    }
    write_text(dir / report_file_name(r.epsilon), os.str());
    if (out.config.store_samples) write_samples(dir / samples_file_name(r.epsilon), r, n);
  }

  write_text(dir / "summary.json", summary_json(out).dump(2) + "\n");

  json timing = {{"wall_time_s", out.wall_time_s}, {"workers", out.config.workers}, {"per_epsilon", json::array()}};
  for (const auto& r : out.results) timing["per_epsilon"].push_back({{"epsilon", r.epsilon}, {"wall_time_s", r.wall_time_s}});
  write_text(dir / "timing.json", timing.dump(2) + "\n");
}

DataSetd read_points(const fs::path& path, Eigen::Index dimension) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  bool labeled = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (static_cast<Eigen::Index>(cells.size()) < dimension + 2) {
      throw Error(ErrorKind::Parse, path.string() + " line " + std::to_string(line_no) + ": too few columns");
    }
    std::vector<double> coords(static_cast<std::size_t>(dimension));
    for (Eigen::Index k = 0; k < dimension; ++k) {
      const std::string& c = cells[static_cast<std::size_t>(k + 1)];
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), coords[static_cast<std::size_t>(k)]);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw Error(ErrorKind::Parse, path.string() + " line " + std::to_string(line_no) + ": bad coordinate '" + c + "'");
      }
    }
    const std::string& lab = cells[static_cast<std::size_t>(dimension + 1)];
    if (lab.empty()) {
      labeled = false;
    } else {
      labels.push_back(std::stoi(lab));
    }
    rows.push_back(std::move(coords));
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), dimension);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index k = 0; k < dimension; ++k) points(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return DataSetd(std::move(points), labeled ? std::move(labels) : std::vector<int>{});
}

ExperimentOutput recompute_from_samples(const fs::path& input_dir) {
  const Summary summary = read_summary(input_dir / "summary.json");
  ExperimentOutput out;
  out.config = config_from_json(summary.config);
  out.config_hash = summary.config_hash;
  out.reference = read_points(input_dir / "points.csv", static_cast<Eigen::Index>(summary.dimension));
  if (out.reference.size() != summary.n) throw Error(ErrorKind::Parse, "points.csv row count differs from summary.json");
  if (out.reference.dimension() > 2) out.projection = pca_project(out.reference, 2).points;
  out.clustering.sigma = summary.sigma;
  out.clustering.pair.lambda = summary.reference_lambda;

  const Eigen::Index n = out.reference.size();
  for (const auto& entry : summary.reports) {
    const fs::path report_path = input_dir / report_file_name(entry.epsilon);
    const fs::path samples_path = input_dir / samples_file_name(entry.epsilon);
    if (!fs::exists(samples_path)) {
      throw Error(ErrorKind::Io, "missing '" + samples_path.string() + "'; rerun with store_samples enabled");
    }
    // The reference clustering is recovered from the stored report.
    if (out.clustering.membership.size() == 0) {
      std::ifstream in(report_path);
      if (!in) throw Error(ErrorKind::Io, "cannot open '" + report_path.string() + "'");
      std::string line;
      std::getline(in, line);
      out.clustering.membership = Membership::Constant(n, false);
      Eigen::Index i = 0;
      while (std::getline(in, line) && i < n) {
        out.clustering.membership[i++] = !line.empty() && line.back() == '1';
      }
      if (i != n) throw Error(ErrorKind::Parse, "'" + report_path.string() + "' has too few rows");
    }

    auto [records, requested] = read_samples(samples_path);
    std::vector<Block> blocks(static_cast<std::size_t>(block_count(requested)), Block{Accumulator<double>(n), 0});
    for (const auto& r : records) {
      if (r.index < 0 || r.index >= requested || r.membership.size() != n) {
        throw Error(ErrorKind::Parse, "'" + samples_path.string() + "' has an inconsistent record");
      }
      accumulate(blocks[static_cast<std::size_t>(r.index / kAccumulationBlock)].acc, replay(r, out.reference),
                 out.clustering.membership);
    }
    EpsilonResult result;
    result.epsilon = entry.epsilon;
    result.requested_samples = requested;
    result.skipped_samples = requested - static_cast<std::int64_t>(records.size());
    result.report = finalize(merge_blocks(blocks, n), out.clustering.membership);
    result.samples = std::move(records);
    out.results.push_back(std::move(result));
  }
  return out;
}

}  // namespace suq
