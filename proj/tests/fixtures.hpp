// Small hand-built measures shared by the test binaries.
#pragma once

#include "kdenoise/measure.hpp"
#include "kdenoise/rng.hpp"

#include <cmath>
#include <initializer_list>

namespace fixtures {

using kdenoise::DiscreteMeasure;
using kdenoise::Matrix;
using kdenoise::Vector;

inline DiscreteMeasure make(std::initializer_list<std::initializer_list<double>> pts,
                            std::initializer_list<double> ws) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  const auto d = static_cast<Eigen::Index>(pts.begin()->size());
  Matrix p(m, d);
  Eigen::Index i = 0;
  for (const auto& row : pts) {
    Eigen::Index k = 0;
    for (double v : row) p(i, k++) = v;
    ++i;
  }
  Vector w(m);
  i = 0;
  for (double v : ws) w(i++) = v;
  return DiscreteMeasure(p, w);
}

// 1D non-transitivity triple.
inline DiscreteMeasure mu1() { return make({{-4}, {2}}, {1.0 / 3, 2.0 / 3}); }
inline DiscreteMeasure nu1() { return make({{-4}, {0}, {4}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}); }
inline DiscreteMeasure theta1() { return make({{-3}, {6}}, {2.0 / 3, 1.0 / 3}); }

// 2D non-transitivity triple.
inline DiscreteMeasure mu2() { return make({{0, -1}, {0, 1}}, {0.5, 0.5}); }
inline DiscreteMeasure nu2() { return make({{-1, -1}, {1, 1}}, {0.5, 0.5}); }
inline DiscreteMeasure theta2() { return make({{-2, 0}, {2, 0}}, {0.5, 0.5}); }

// Instability example: three collinear atoms and the kernel image nu_n.
inline DiscreteMeasure instability_mu() {
  return make({{-1, 0}, {0, 0}, {1, 0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
}
inline double instability_angle(int n) { return M_PI * (1.0 - 1.0 / (2.0 * (n + 1))); }
inline DiscreteMeasure instability_nu(int n) {
  const double t = instability_angle(n);
  const double c = std::cos(t);
  const double s = std::sin(t);
  Matrix p(6, 2);
  for (int i = 0; i < 3; ++i) {
    const double x = i - 1.0;
    p.row(2 * i) << x + c, s;
    p.row(2 * i + 1) << x - c, -s;
  }
  return DiscreteMeasure(p, Vector::Constant(6, 1.0 / 6));
}

inline DiscreteMeasure random_measure(kdenoise::Rng& rng, Eigen::Index m, Eigen::Index d,
                                      double spread = 3.0) {
  Matrix p(m, d);
  Vector w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) p(i, k) = rng.uniform(-spread, spread);
    w(i) = rng.uniform(0.1, 1.0);
  }
  w /= w.sum();
  return DiscreteMeasure(p, w);
}

}  // namespace fixtures
