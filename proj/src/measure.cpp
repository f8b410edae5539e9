#include "kdenoise/measure.hpp"

#include "kdenoise/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace kdenoise {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidMeasure: return "invalid_measure";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInvalidDomain: return "invalid_domain";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kScaleLimit: return "scale_limit";
  }
  return "unknown";
}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights,
                                 double weight_sum_tol)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorCode::kInvalidMeasure, "measure needs m >= 1 atoms in d >= 1");
  }
  if (weights_.size() != points_.rows()) {
    throw Error(ErrorCode::kInvalidMeasure, "weights and points disagree in size");
  }
  if (!points_.allFinite() || !weights_.allFinite()) {
    throw Error(ErrorCode::kInvalidMeasure, "non-finite coordinate or weight");
  }
  if ((weights_.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidMeasure, "negative weight");
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > weight_sum_tol) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "weights sum to " << total << ", not 1";
    throw Error(ErrorCode::kInvalidMeasure, msg.str());
  }
}

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
  const auto m = points.rows();
  if (m < 1) throw Error(ErrorCode::kInvalidMeasure, "empty point set");
  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  return DiscreteMeasure(std::move(points), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(const Vector& at) {
  Matrix p(1, at.size());
  p.row(0) = at.transpose();
  return DiscreteMeasure(std::move(p), Vector::Ones(1));
}

Vector barycenter(const DiscreteMeasure& mu) {
  return mu.points().transpose() * mu.weights();
}

double second_moment(const DiscreteMeasure& mu) {
  return mu.points().rowwise().squaredNorm().dot(mu.weights());
}

double variance(const DiscreteMeasure& mu) {
  // Computed about the barycenter rather than as M2 - |b|^2 to avoid
  // cancellation for far-off-center clouds.
  const Vector b = barycenter(mu);
  const Matrix c = mu.points().rowwise() - b.transpose();
  return c.rowwise().squaredNorm().dot(mu.weights());
}

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vector& k) {
  if (static_cast<std::size_t>(k.size()) != mu.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "translation vector has wrong dimension");
  }
  Matrix p = mu.points().rowwise() + k.transpose();
  return DiscreteMeasure(std::move(p), mu.weights(), std::numeric_limits<double>::infinity());
}

DiscreteMeasure dilate(const DiscreteMeasure& mu, double lambda) {
  if (!std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidConfig, "dilation factor must be finite");
  }
  return DiscreteMeasure(mu.points() * lambda, mu.weights(),
                         std::numeric_limits<double>::infinity());
}

DiscreteMeasure center(const DiscreteMeasure& mu) {
  return translate(mu, -barycenter(mu));
}

DiscreteMeasure normalize(const DiscreteMeasure& mu) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < mu.weights().size(); ++i) {
    if (mu.weights()(i) > 0.0) keep.push_back(i);
  }
  Matrix p(static_cast<Eigen::Index>(keep.size()), mu.points().cols());
  Vector w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    p.row(static_cast<Eigen::Index>(r)) = mu.points().row(keep[r]);
    w(static_cast<Eigen::Index>(r)) = mu.weights()(keep[r]);
  }
  w /= w.sum();
  return DiscreteMeasure(std::move(p), std::move(w));
}

double curve_length(const Matrix& points) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < points.rows(); ++i) {
    total += (points.row(i + 1) - points.row(i)).norm();
  }
  return total;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

DiscreteMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kIo, "measure CSV is empty");
  }
  const auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header.back()) != "w") {
    throw Error(ErrorCode::kIo, "measure CSV header must be x1,...,xd,w");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (trim(header[k]) != "x" + std::to_string(k + 1)) {
      throw Error(ErrorCode::kIo, "measure CSV header must be x1,...,xd,w");
    }
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != d + 1) {
      throw Error(ErrorCode::kIo, "measure CSV row " + std::to_string(rows + 1) +
                                      " has wrong number of fields");
    }
    for (const auto& c : cells) {
      try {
        std::size_t pos = 0;
        const std::string t = trim(c);
        values.push_back(std::stod(t, &pos));
        if (pos != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIo, "measure CSV row " + std::to_string(rows + 1) +
                                        " has a malformed number");
      }
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kIo, "measure CSV has no atoms");
  Matrix p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  Vector w(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < d; ++k) {
      p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = values[r * (d + 1) + k];
    }
    w(static_cast<Eigen::Index>(r)) = values[r * (d + 1) + d];
  }
  DiscreteMeasure checked(p, w, 1e-9);
  w /= w.sum();
  return DiscreteMeasure(std::move(p), std::move(w));
}

DiscreteMeasure load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_measure_csv(in);
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu) {
  for (std::size_t k = 0; k < mu.dim(); ++k) out << 'x' << (k + 1) << ',';
  out << "w\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < mu.dim(); ++k) {
      out << mu.points()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) << ',';
    }
    out << mu.weight(i) << '\n';
  }
}

void save_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_measure_csv(out, mu);
}

}  // namespace kdenoise
