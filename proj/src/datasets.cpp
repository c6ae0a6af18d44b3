#include "suq/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>
#include <vector>

namespace suq {

void GeneratorSpec::validate() const {
  if (kind != DatasetKind::Csv && m < 1) {
    throw Error(ErrorKind::InvalidConfig, "generator: m must be at least 1");
  }
  if (kind == DatasetKind::Csv && csv_path.empty()) {
    throw Error(ErrorKind::InvalidConfig, "generator: csv kind needs csv_path");
  }
}

double gaussian_stddev(double parameter, GaussianParam param) {
  return param == GaussianParam::Variance ? std::sqrt(parameter) : parameter;
}

Eigen::VectorXd draw_point_in_circle(int label, Rng& rng, GaussianParam param) {
  Eigen::VectorXd p(2);
  if (label == 1) {
    p[0] = standard_normal(rng);
    p[1] = standard_normal(rng);
    return p;
  }
  if (label != 2) throw Error(ErrorKind::InvalidInput, "point_in_circle: label must be 1 or 2");
  const double r = normal(rng, 2.5, gaussian_stddev(0.25, param));
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  p[0] = r * std::cos(phi);
  p[1] = r * std::sin(phi);
  return p;
}

Eigen::VectorXd draw_half_circle(int label, Rng& rng, GaussianParam param, bool with_noise) {
  constexpr double pi = std::numbers::pi;
  const double z_std = gaussian_stddev(0.2, param);
  Eigen::VectorXd p(2);
  if (label == 1) {
    p[0] = uniform(rng, 0.0, pi);
    p[1] = 0.1 - 1.3 * std::sin(p[0]);
  } else if (label == 2) {
    p[0] = uniform(rng, 0.4 * pi, 1.4 * pi);
    p[1] = 1.3 * std::sin(p[0] - 0.4 * pi);
  } else {
    throw Error(ErrorKind::InvalidInput, "half_circles: label must be 1 or 2");
  }
  if (with_noise) p[1] += z_std * standard_normal(rng);
  return p;
}

namespace {

DataSetd draw_clusters(const std::vector<std::pair<int, int>>& sizes, Rng& rng,
                       const std::function<Eigen::VectorXd(int, Rng&)>& draw) {
  int total = 0;
  for (const auto& [label, count] : sizes) total += count;
  Eigen::MatrixXd points(total, 2);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (const auto& [label, count] : sizes) {
    for (int k = 0; k < count; ++k, ++row) {
      points.row(row) = draw(label, rng).transpose();
      labels.push_back(label);
    }
  }
  return DataSetd(std::move(points), std::move(labels));
}

}  // namespace

DataSetd gen_point_in_circle(int m, Rng& rng, GaussianParam param) {
  if (m < 1) throw Error(ErrorKind::InvalidInput, "gen_point_in_circle: m must be at least 1");
  return draw_clusters({{1, m}, {2, 2 * m}}, rng,
                       [param](int label, Rng& r) { return draw_point_in_circle(label, r, param); });
}

DataSetd gen_half_circles(int m, Rng& rng, GaussianParam param, bool with_noise) {
  if (m < 1) throw Error(ErrorKind::InvalidInput, "gen_half_circles: m must be at least 1");
  return draw_clusters({{1, m}, {2, m}}, rng, [param, with_noise](int label, Rng& r) {
    return draw_half_circle(label, r, param, with_noise);
  });
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

bool parse_int(std::string_view cell, int& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

[[noreturn]] void cell_error(std::size_t row, std::size_t col, std::string_view cell, const char* what) {
  std::ostringstream msg;
  msg << "csv row " << row << ", column " << col << ": " << what << " '" << cell << "'";
  throw Error(ErrorKind::Parse, msg.str());
}

}  // namespace

DataSetd parse_csv(std::istream& in, const CsvOptions& opts) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> row_numbers;
  std::vector<std::string> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    lines.push_back(line);
    row_numbers.push_back(line_no);
  }
  for (const auto& l : lines) rows.push_back(split(l));
  if (rows.empty()) throw Error(ErrorKind::Parse, "csv: no data rows");

  bool has_header = opts.header == HeaderMode::Present;
  if (opts.header == HeaderMode::Auto) {
    std::size_t numeric = 0;
    double dummy = 0.0;
    for (const auto cell : rows.front()) numeric += parse_double(cell, dummy) ? 1 : 0;
    if (numeric == 0) {
      has_header = true;
    } else if (numeric != rows.front().size()) {
      for (std::size_t c = 0; c < rows.front().size(); ++c) {
        if (!parse_double(rows.front()[c], dummy)) cell_error(row_numbers.front(), c + 1, rows.front()[c], "non-numeric cell");
      }
    }
  }
  const std::size_t first = has_header ? 1 : 0;
  if (rows.size() <= first) throw Error(ErrorKind::Parse, "csv: no data rows");

  const std::size_t width = rows[first].size();
  const std::size_t dim = opts.label_column ? width - 1 : width;
  if (dim < 1) throw Error(ErrorKind::Parse, "csv: no coordinate columns");
  if (has_header && rows.front().size() != width) {
    throw Error(ErrorKind::Parse, "csv: header width differs from data width");
  }

  const std::size_t n = rows.size() - first;
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<int> labels;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != width) {
      std::ostringstream msg;
      msg << "csv row " << row_numbers[r] << ": expected " << width << " columns, found " << cells.size();
      throw Error(ErrorKind::Parse, msg.str());
    }
    for (std::size_t c = 0; c < dim; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) cell_error(row_numbers[r], c + 1, cells[c], "non-numeric cell");
      points(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
    }
    if (opts.label_column) {
      int label = 0;
      if (!parse_int(cells[dim], label)) cell_error(row_numbers[r], dim + 1, cells[dim], "non-integer label");
      labels.push_back(label);
    }
  }
  return DataSetd(std::move(points), std::move(labels));
}

void normalize_columns(Eigen::MatrixXd& points, Normalization mode) {
  if (mode == Normalization::None) return;
  const double n = static_cast<double>(points.rows());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    auto col = points.col(c);
    if (mode == Normalization::ZScore) {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / n);
      if (!(sd > 0.0)) {
        throw Error(ErrorKind::DegenerateData, "csv: column " + std::to_string(c) + " is constant, cannot z-score");
      }
      col = (col.array() - mean) / sd;
    } else {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      if (!(hi > lo)) {
        throw Error(ErrorKind::DegenerateData, "csv: column " + std::to_string(c) + " is constant, cannot min-max");
      }
      col = (col.array() - lo) / (hi - lo);
    }
  }
}

DataSetd load_csv(const std::string& path, Normalization mode, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open csv file '" + path + "'");
  DataSetd X = parse_csv(in, opts);
  normalize_columns(X.points, mode);
  return X;
}

DataSetd pca_project(const DataSetd& X, int k) {
  if (k < 1 || X.dimension() < k) {
    throw Error(ErrorKind::InvalidInput, "pca_project: dimension is smaller than the number of components");
  }
  if (X.size() < 2) throw Error(ErrorKind::InvalidInput, "pca_project: need at least two points");
  const Eigen::MatrixXd centered = X.points.rowwise() - X.points.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(X.size() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "pca_project: eigensolver failed");

  const Eigen::Index d = X.dimension();
  const double largest = solver.eigenvalues()[d - 1];
  Eigen::MatrixXd basis(d, k);
  for (int c = 0; c < k; ++c) {
    const double value = solver.eigenvalues()[d - 1 - c];
    if (!(largest > 0.0) || value < 1e-12 * largest) {
      throw Error(ErrorKind::DegenerateData,
                  "pca_project: principal component " + std::to_string(c + 1) + " has (near) zero variance");
    }
    Eigen::VectorXd dir = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir[arg] < 0.0) dir = -dir;
    basis.col(c) = dir;
  }
  return DataSetd(centered * basis, X.labels);
}

DataSetd make_reference(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng = sample_stream(spec.seed, 0);
  switch (spec.kind) {
    case DatasetKind::PointInCircle:
      return gen_point_in_circle(spec.m, rng, spec.gaussian_param);
    case DatasetKind::HalfCircles:
      return gen_half_circles(spec.m, rng, spec.gaussian_param);
    case DatasetKind::Csv:
      return load_csv(spec.csv_path, spec.normalization, spec.csv);
  }
  throw Error(ErrorKind::InvalidConfig, "generator: unknown kind");
}

PointSampler generator_sampler(const GeneratorSpec& spec) {
  const GaussianParam param = spec.gaussian_param;
  switch (spec.kind) {
    case DatasetKind::PointInCircle:
      return [param](int label, Rng& rng) { return draw_point_in_circle(label, rng, param); };
    case DatasetKind::HalfCircles:
      return [param](int label, Rng& rng) { return draw_half_circle(label, rng, param); };
    case DatasetKind::Csv:
      break;
  }
  throw Error(ErrorKind::InvalidConfig, "generator: csv data has no generative law, use bootstrap regeneration");
}

}  // namespace suq
