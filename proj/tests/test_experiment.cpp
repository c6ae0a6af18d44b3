#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "suq/experiment.hpp"

using namespace suq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("suq_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

ExperimentConfig small_config() {
  json j = {{"generator", {{"kind", "point_in_circle"}, {"m", 10}, {"seed", 5}}},
            {"corruption", {{"master_seed", 17}}},
            {"mc_samples", 40},
            {"epsilon_grid", {0.05, 0.2}}};
  return config_from_json(j);
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("SUQ_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const auto def = config_from_json(json::object());
  CHECK(def.generator.kind == DatasetKind::PointInCircle);
  CHECK(def.mc_samples == 100);
  CHECK(def.epsilon_grid == std::vector<double>{0.025, 0.05, 0.1, 0.2, 0.4});
  CHECK(def.corruption.deletion_lo == 0.01);
  CHECK(def.corruption.deletion_hi == 0.07);
  CHECK(def.corruption.regenerate);
  CHECK(def.similarity.uses_mst());
  CHECK(def.gauge_tolerance == 1e-2);

  const auto csv = config_from_json({{"generator", {{"kind", "csv"}, {"csv_path", "x.csv"}}}});
  CHECK_FALSE(csv.corruption.regenerate);
  CHECK(csv.corruption.deletion_hi == 0.0);
  CHECK(std::holds_alternative<BootstrapSource>(regeneration_source(csv)));

  json full = {{"generator", {{"kind", "half_circles"}, {"m", 12}, {"seed", 3}, {"gaussian_param", "std"}}},
               {"corruption",
                {{"deletion_range", {0.02, 0.04}},
                 {"regenerate", true},
                 {"additional_points", 2},
                 {"master_seed", 99},
                 {"regeneration", "bootstrap"}}},
               {"similarity", {{"sigma", 0.7}, {"scale", 1.0}, {"recompute_per_sample", false}, {"extension", "raw"}}},
               {"mc_samples", 7},
               {"epsilon_grid", {0.1}},
               {"gauge_tolerance", 0.05},
               {"workers", 3},
               {"output_dir", "elsewhere"},
               {"error_policy", "abort"},
               {"store_samples", true}};
  const auto cfg = config_from_json(full);
  CHECK(cfg.similarity.sigma == 0.7);
  CHECK(cfg.extension == ExtensionMode::Raw);
  CHECK(cfg.error_policy == ErrorPolicy::Abort);
  CHECK(cfg.corruption.additional_points == 2u);
  const auto again = config_from_json(config_to_json(cfg, true));
  CHECK(config_to_json(again, true) == config_to_json(cfg, true));
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  // Scheduling fields do not enter the hash.
  auto other = cfg;
  other.workers = 8;
  other.output_dir = "x";
  CHECK(config_hash(other) == config_hash(cfg));
  other.mc_samples = 8;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("config errors") {
  auto kind_of = [](const json& j) {
    try {
      config_from_json(j);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Numeric;
  };
  CHECK(kind_of({{"mc_sample", 3}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"generator", {{"kind", "moons"}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"similarity", {{"sigma", "median"}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"similarity", {{"sigma", -1.0}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"mc_samples", "ten"}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"corruption", {{"deletion_range", {0.1}}}}}) == ErrorKind::InvalidConfig);

  auto cfg = small_config();
  cfg.mc_samples = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.epsilon_grid = {-0.1};
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(exit_code(ErrorKind::InvalidConfig) == 2);
  CHECK(exit_code(ErrorKind::EigenvalueOne) == 4);
  CHECK(exit_code(ErrorKind::Parse) == 3);
}

TEST_CASE("identity corruption gives zero misclustering") {
  auto cfg = small_config();
  cfg.corruption.deletion_lo = cfg.corruption.deletion_hi = 0.0;
  cfg.epsilon_grid = {0.0};
  cfg.mc_samples = 5;
  const auto out = run_experiment(cfg);
  const auto& rep = out.results.front().report;
  CHECK(rep.expected_misclustering_rate == 0.0);
  CHECK((rep.vorobev_set == out.clustering.membership).all());
  CHECK((rep.spectral_set == out.clustering.membership).all());
  CHECK((rep.odf_set == out.clustering.membership).all());
}

TEST_CASE("outputs do not depend on the worker count") {
  auto cfg = small_config();
  cfg.mc_samples = 100;
  const fs::path a = scratch("w1"), b = scratch("w8");
  cfg.workers = 1;
  emit(run_experiment(cfg), a);
  cfg.workers = 8;
  emit(run_experiment(cfg), b);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "timing.json") continue;
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name.string());
  }
}

TEST_CASE("output files and summary round trip") {
  auto cfg = small_config();
  cfg.store_samples = true;
  const fs::path dir = scratch("files");
  const auto out = run_experiment(cfg);
  emit(out, dir);

  const auto points = lines_of(dir / "points.csv");
  REQUIRE(points.size() == 31);
  CHECK(points[0] == "index,x0,x1,label");
  CHECK(points[1].substr(0, 2) == "0,");

  for (const double eps : cfg.epsilon_grid) {
    const auto rows = lines_of(dir / report_file_name(eps));
    REQUIRE(rows.size() == 31);
    CHECK(rows[0] == "index,coverage,mean_level,mean_odf,in_vorobev,in_odf_set,in_spectral_set,in_reference_cluster");
    for (std::size_t r = 1; r < rows.size(); ++r) CHECK(std::count(rows[r].begin(), rows[r].end(), ',') == 7);
    CHECK(fs::exists(dir / samples_file_name(eps)));
  }
  CHECK(report_file_name(0.05) == "report_eps_0.05.csv");

  const Summary s = read_summary(dir / "summary.json");
  CHECK(s.n == 30);
  CHECK(s.dimension == 2);
  CHECK(s.master_seed == 17);
  CHECK(s.config_hash == config_hash(cfg));
  REQUIRE(s.reports.size() == 2);
  CHECK(s.reports[0].epsilon == 0.05);
  CHECK(s.reports[0].M == 40);
  CHECK(s.reports[0].expected_misclustering_rate == out.results[0].report.expected_misclustering_rate);
  CHECK(s.reports[1].vorobev_size == out.results[1].report.vorobev_set.count());
  CHECK(parse_summary(summary_json(out)) == s);
  CHECK(config_from_json(s.config).mc_samples == 40);

  const json timing = json::parse(slurp(dir / "timing.json"));
  CHECK(timing["per_epsilon"].size() == 2);

  const auto [records, requested] = read_samples(dir / samples_file_name(0.2));
  CHECK(requested == 40);
  REQUIRE(records.size() == out.results[1].samples.size());
  CHECK(records[3].index == out.results[1].samples[3].index);
  CHECK(records[3].levels == out.results[1].samples[3].levels);
  CHECK((records[3].membership == out.results[1].samples[3].membership).all());
}

TEST_CASE("report recompute reproduces the run outputs") {
  auto cfg = small_config();
  cfg.store_samples = true;
  const fs::path run_dir = scratch("recompute_run"), rep_dir = scratch("recompute_report");
  emit(run_experiment(cfg), run_dir);
  emit(recompute_from_samples(run_dir), rep_dir);
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const auto name = entry.path().filename();
    if (name == "timing.json") continue;
    CHECK_MESSAGE(slurp(run_dir / name) == slurp(rep_dir / name), name.string());
  }

  const fs::path bare = scratch("recompute_bare");
  cfg.store_samples = false;
  emit(run_experiment(cfg), bare);
  CHECK_THROWS_AS(recompute_from_samples(bare), Error);
}

TEST_CASE("error policies") {
  // All points deleted without regeneration: every sample is empty.
  auto cfg = small_config();
  cfg.corruption.deletion_lo = cfg.corruption.deletion_hi = 1.0;
  cfg.corruption.regenerate = false;
  cfg.epsilon_grid = {0.1};
  cfg.mc_samples = 6;
  try {
    run_experiment(cfg);
    FAIL("expected no samples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoSamples);
  }
  cfg.error_policy = ErrorPolicy::Abort;
  cfg.workers = 3;
  try {
    run_experiment(cfg);
    FAIL("expected abort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySample);
    CHECK(std::string(e.what()).find("sample 0 ") != std::string::npos);
  }
}

TEST_CASE("command line interface") {
  const fs::path dir = scratch("cli");
  const fs::path config = dir / "config.json";
  {
    std::ofstream f(config);
    f << config_to_json(small_config()).dump(2);
  }
  const std::string cfg = " -c " + config.string();
  CHECK(run_cli("generate" + cfg + " -o " + (dir / "points.csv").string()) == 0);
  CHECK(lines_of(dir / "points.csv").size() == 31);

  CHECK(run_cli("run" + cfg + " -o " + (dir / "run").string() + " -M 32 -e 0.1 --store-samples") == 0);
  const Summary s = read_summary(dir / "run" / "summary.json");
  CHECK(s.reports.size() == 1);
  CHECK(s.reports[0].M == 32);
  CHECK(run_cli("report -i " + (dir / "run").string() + " -o " + (dir / "rep").string()) == 0);
  CHECK(slurp(dir / "run" / "summary.json") == slurp(dir / "rep" / "summary.json"));

  {
    std::ofstream f(dir / "data.csv");
    f << "a,b,c\n1,2,0\n2,1,1\n3,5,2\n4,4,0\n";
  }
  CHECK(run_cli("project -i " + (dir / "data.csv").string() + " -o " + (dir / "proj.csv").string()) == 0);
  const auto proj = lines_of(dir / "proj.csv");
  REQUIRE(proj.size() == 5);
  CHECK(proj[0] == "index,pca_x,pca_y");

  CHECK(run_cli("") == 2);
  CHECK(run_cli("run --bogus") == 2);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"mc_samples": 3, "nope": 1})";
  }
  CHECK(run_cli("run -c " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("report -i " + (dir / "missing").string()) == 3);
  {
    std::ofstream f(dir / "broken.csv");
    f << "1,2\n3,x\n";
  }
  CHECK(run_cli("project -i " + (dir / "broken.csv").string()) == 3);
}
