#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <string>

#include "suq/corruption.hpp"
#include "suq/dataset.hpp"
#include "suq/random.hpp"

namespace suq {

enum class DatasetKind { PointInCircle, HalfCircles, Csv };

/// How the second argument of N(a, b) in the generator laws is read.
enum class GaussianParam { Variance, StdDev };

enum class Normalization { ZScore, MinMax, None };

enum class HeaderMode { Auto, Present, Absent };

struct CsvOptions {
  HeaderMode header = HeaderMode::Auto;
  /// Last column holds integer cluster labels.
  bool label_column = false;
};

struct GeneratorSpec {
  DatasetKind kind = DatasetKind::PointInCircle;
  int m = 100;
  std::uint64_t seed = 1;
  std::string csv_path;
  Normalization normalization = Normalization::ZScore;
  CsvOptions csv;
  GaussianParam gaussian_param = GaussianParam::Variance;

  void validate() const;
};

/// Standard deviation implied by the second N(., .) parameter under `param`.
double gaussian_stddev(double parameter, GaussianParam param);

/// One point of the point-in-circle law. Label 1: N(0, I_2). Label 2:
/// (r cos phi, r sin phi) with r ~ N(2.5, 0.25), phi ~ U[0, 2 pi).
Eigen::VectorXd draw_point_in_circle(int label, Rng& rng, GaussianParam param = GaussianParam::Variance);

/// One point of the entangled half circles law. Label 1: x ~ U[0, pi),
/// y = 0.1 - 1.3 sin(x) + z. Label 2: x ~ U[0.4 pi, 1.4 pi), y = 1.3 sin(x - 0.4 pi) + z,
/// z ~ N(0, 0.2). `with_noise = false` sets z = 0.
Eigen::VectorXd draw_half_circle(int label, Rng& rng, GaussianParam param = GaussianParam::Variance,
                                 bool with_noise = true);

/// m points with label 1 followed by 2m points with label 2.
DataSetd gen_point_in_circle(int m, Rng& rng, GaussianParam param = GaussianParam::Variance);

/// m points with label 1 followed by m points with label 2.
DataSetd gen_half_circles(int m, Rng& rng, GaussianParam param = GaussianParam::Variance, bool with_noise = true);

/// Parses a rectangular numeric CSV. Errors name the 1-based row and column.
DataSetd parse_csv(std::istream& in, const CsvOptions& opts = {});

/// Per-column normalization in place. A constant column under z-score or
/// min-max is an error naming the 0-based column.
void normalize_columns(Eigen::MatrixXd& points, Normalization mode);

DataSetd load_csv(const std::string& path, Normalization mode = Normalization::ZScore, const CsvOptions& opts = {});

/// Projects centered data on the top-k principal directions. Each component is
/// signed so that its largest-magnitude loading is positive.
DataSetd pca_project(const DataSetd& X, int k = 2);

/// Reference data set described by `spec`.
DataSetd make_reference(const GeneratorSpec& spec);

/// Sampler for regenerating points of the synthetic laws; csv specs have none.
PointSampler generator_sampler(const GeneratorSpec& spec);

}  // namespace suq
