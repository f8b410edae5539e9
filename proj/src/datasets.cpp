#include "kdenoise/datasets.hpp"

#include "kdenoise/error.hpp"
#include "kdenoise/rng.hpp"

#include <cmath>
#include <vector>

namespace kdenoise {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_sample(std::size_t n, double sigma) {
  if (n < 1) throw Error(ErrorCode::kInvalidConfig, "dataset needs n >= 1");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "dataset needs sigma >= 0");
}

DiscreteMeasure parabola(const Parabola& p, Rng& rng) {
  check_sample(p.n, p.noise_sigma);
  Matrix y(static_cast<Eigen::Index>(p.n), 2);
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    const double z = rng.uniform(-1.0, 1.0);
    // Draw both deviates even at sigma = 0 so the stream does not depend on it.
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    y(j, 0) = z + p.noise_sigma * e1;
    y(j, 1) = z * z + p.noise_sigma * e2;
  }
  return DiscreteMeasure::uniform(std::move(y));
}

DiscreteMeasure step_curve(const StepCurve& s, Rng& rng) {
  check_sample(s.n, s.noise_sigma);
  Matrix y(static_cast<Eigen::Index>(s.n), 2);
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    const double t = rng.uniform(0.0, 3.0);
    double a = 0.0;
    double b = 0.0;
    if (t < 1.0) {
      a = t;
    } else if (t < 2.0) {
      a = 1.0;
      b = t - 1.0;
    } else {
      a = t - 1.0;
      b = 1.0;
    }
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    y(j, 0) = a + s.noise_sigma * e1;
    y(j, 1) = b + s.noise_sigma * e2;
  }
  return DiscreteMeasure::uniform(std::move(y));
}

DiscreteMeasure instability(const InstabilityKernel& k) {
  if (!k.n_index) {
    Matrix p(5, 2);
    p << -2, 0, -1, 0, 0, 0, 1, 0, 2, 0;
    Vector w(5);
    w << 1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 6;
    return DiscreteMeasure(p, w);
  }
  if (*k.n_index < 1) throw Error(ErrorCode::kInvalidConfig, "instability index must be >= 1");
  const double t = M_PI * (1.0 - 1.0 / (2.0 * (*k.n_index + 1)));
  Matrix p(6, 2);
  for (int i = 0; i < 3; ++i) {
    const double x = i - 1.0;
    p.row(2 * i) << x + std::cos(t), std::sin(t);
    p.row(2 * i + 1) << x - std::cos(t), -std::sin(t);
  }
  return DiscreteMeasure(p, Vector::Constant(6, 1.0 / 6));
}

DiscreteMeasure factor_model(const FactorModel& f, Rng& rng) {
  check_sample(f.n, f.sigma);
  if (f.loadings.size() == 0) throw Error(ErrorCode::kInvalidConfig, "factor model needs loadings");
  const Eigen::Index d = f.loadings.rows();
  const Eigen::Index m = f.loadings.cols();
  Matrix y(static_cast<Eigen::Index>(f.n), d);
  Vector w(m);
  Vector r(d);
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    for (Eigen::Index k = 0; k < m; ++k) w(k) = rng.normal();
    for (Eigen::Index k = 0; k < d; ++k) r(k) = f.sigma * rng.normal();
    y.row(j) = (f.loadings * w + r).transpose();
  }
  return DiscreteMeasure::uniform(std::move(y));
}

}  // namespace

DiscreteMeasure generate(const DatasetSpec& spec) {
  Rng rng(spec.seed);
  return std::visit(Overloaded{
                        [&](const Parabola& p) { return parabola(p, rng); },
                        [&](const StepCurve& s) { return step_curve(s, rng); },
                        [&](const InstabilityKernel& k) { return instability(k); },
                        [&](const FactorModel& f) { return factor_model(f, rng); },
                        [&](const FromCsv& c) { return load_measure_csv(c.path); },
                    },
                    spec.variant);
}

Matrix default_factor_loadings() {
  Matrix u(5, 2);
  u.col(0) << 1, 1, 1, 1, 1;
  u.col(1) << 1, -1, 0, 1, -1;
  u.col(0).normalize();
  u.col(1).normalize();
  Matrix l = u;
  l.col(0) *= std::sqrt(2.0);
  return l;
}

}  // namespace kdenoise
