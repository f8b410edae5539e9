#include "doctest.h"

#include "fixtures.hpp"
#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"

#include <cmath>

using namespace kdenoise;
using namespace fixtures;

namespace {

// A random coupling of mu and nu (independent transport of random blocks).
Coupling random_coupling(Rng& rng, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Matrix k(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = rng.uniform(0.0, 1.0);
  }
  return {round_to_marginals(k / k.sum(), mu.weights(), nu.weights())};
}

}  // namespace

TEST_CASE("KDR verdicts on the 1D triple") {
  const auto mn = kdr_check(mu1(), nu1());
  const auto nt = kdr_check(nu1(), theta1());
  const auto mt = kdr_check(mu1(), theta1());
  CHECK(mn.dominated);
  CHECK(std::abs(mn.slack) <= 1e-9);
  CHECK(nt.dominated);
  CHECK_FALSE(mt.dominated);
  CHECK(mt.slack < -1.0);
  CHECK(std::abs(mt.slack - 2.0 * mt.correlation_gap) <= 1e-9);
}

TEST_CASE("KDR verdicts and slacks on the 2D triple") {
  const auto mn = kdr_check(mu2(), nu2());
  const auto nt = kdr_check(nu2(), theta2());
  const auto mt = kdr_check(mu2(), theta2());
  CHECK(mn.dominated);
  CHECK(nt.dominated);
  CHECK_FALSE(mt.dominated);
  CHECK(std::abs(mn.slack) <= 1e-9);
  CHECK(std::abs(nt.slack) <= 1e-9);
  CHECK(std::abs(mt.slack + 2.0) <= 1e-9);
  CHECK(std::abs(mt.correlation_gap + 1.0) <= 1e-9);
}

TEST_CASE("KDR of a point mass against a centered measure") {
  const auto nu = center(nu2());
  const auto v = kdr_check(DiscreteMeasure::dirac(Vector::Zero(2)), nu);
  CHECK(v.dominated);
  CHECK(std::abs(v.slack) <= 1e-12);
}

TEST_CASE("KDR is translation invariant") {
  Rng rng(41);
  for (int t = 0; t < 30; ++t) {
    const auto nu = random_measure(rng, 6, 2);
    const auto mu = random_measure(rng, 3, 2, 1.0);
    Vector a(2);
    a << rng.uniform(-10, 10), rng.uniform(-10, 10);
    const auto v0 = kdr_check(mu, nu);
    const auto v1 = kdr_check(translate(mu, a), translate(nu, a));
    CHECK(v0.dominated == v1.dominated);
    CHECK(std::abs(v0.slack - v1.slack) <= 1e-8);
  }
}

TEST_CASE("convex order on the instability example") {
  const auto mu = instability_mu();
  for (int n = 1; n <= 5; ++n) {
    const auto v = is_convex_order(mu, instability_nu(n));
    CHECK(v.dominated);
    REQUIRE(v.witness.has_value());
    CHECK(v.max_residual <= 1e-10);
  }
}

TEST_CASE("convex order negative and trivial cases") {
  const auto v = is_convex_order(mu2(), theta2());
  CHECK_FALSE(v.dominated);
  CHECK_FALSE(v.witness.has_value());

  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto nu = random_measure(rng, 7, 3);
    const auto point = DiscreteMeasure::dirac(barycenter(nu));
    const auto vp = is_convex_order(point, nu);
    CHECK(vp.dominated);
    CHECK(vp.max_residual <= 1e-10);
  }
  CHECK_THROWS_AS(is_convex_order(mu1(), mu2()), Error);
}

TEST_CASE("a measure is in convex order with itself at any coordinate scale") {
  Rng rng(12);
  for (double spread : {1.0, 100.0, 1e4}) {
    for (int t = 0; t < 20; ++t) {
      const auto nu = random_measure(rng, 9, 2, spread);
      const auto v = is_convex_order(nu, nu);
      CHECK(v.dominated);
      CHECK(v.max_residual <= 1e-9 * spread);
    }
  }
}

TEST_CASE("convex order implies KDR and recentering yields martingales") {
  Rng rng(17);
  int dominated = 0;
  for (int t = 0; t < 40; ++t) {
    const auto nu = random_measure(rng, 6, 2);
    const auto src = random_measure(rng, 1 + static_cast<Eigen::Index>(rng.index(4)), 2);
    const Coupling pi = random_coupling(rng, src, nu);
    const auto [mu, pic] = barycentric_recenter(pi, src, nu);
    CHECK(martingale_residual(pic, mu, nu) <= 1e-10);
    // Recentering does not increase the quadratic cost.
    const double before = coupling_cost(pi, squared_distance_cost(src.points(), nu.points()));
    const double after = coupling_cost(pic, squared_distance_cost(mu.points(), nu.points()));
    CHECK(after <= before + 1e-10);

    const auto co = is_convex_order(mu, nu);
    CHECK(co.dominated);
    // Arbitrary pairs: whenever the convex order holds, so does KDR.
    const auto other = random_measure(rng, 3, 2, 1.0);
    for (const auto* m : {&mu, &other}) {
      const auto c = is_convex_order(*m, nu);
      if (c.dominated) {
        ++dominated;
        CHECK(kdr_check(*m, nu).dominated);
      }
    }
  }
  CHECK(dominated >= 40);
}

TEST_CASE("moment bound for KDR-dominated pairs") {
  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    const auto nu = random_measure(rng, 8, 2);
    const Coupling pi = random_coupling(rng, random_measure(rng, 3, 2), nu);
    const auto mu = barycentric_recenter(pi, random_measure(rng, 3, 2), nu).first;
    const auto v = kdr_check(mu, nu);
    if (!v.dominated) continue;
    const double m2 = second_moment(nu);
    for (double alpha = 0.25; alpha <= 20.0; alpha *= 1.5) {
      double mass = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.atom(i).squaredNorm() >= alpha) mass += mu.weight(i);
      }
      CHECK(mass <= m2 / alpha + 1e-10);
    }
  }
}

TEST_CASE("barycentric recentering fixed points") {
  const auto nu = center(nu1());
  const auto mu = mu1();
  const auto [out, pic] = barycentric_recenter(product_coupling(mu, nu), mu, nu);
  CHECK(out.points().cwiseAbs().maxCoeff() <= 1e-15);

  const auto imu = instability_mu();
  const auto inu = instability_nu(2);
  const auto v = is_convex_order(imu, inu);
  REQUIRE(v.witness.has_value());
  const auto [same, same_pi] = barycentric_recenter(*v.witness, imu, inu);
  CHECK((same.points() - imu.points()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((same.weights() - imu.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((same_pi.mass - v.witness->mass).cwiseAbs().maxCoeff() <= 1e-12);

  // Zero-mass rows are dropped.
  const auto src = make({{0, 0}, {1, 1}}, {1.0, 0.0});
  Coupling pi{Matrix::Zero(2, 2)};
  pi.mass.row(0) = nu2().weights().transpose();
  const auto [dropped, dpi] = barycentric_recenter(pi, src, nu2());
  CHECK(dropped.size() == 1);
  CHECK(dpi.rows() == 1);
}

TEST_CASE("monotone support") {
  Matrix p(5, 2);
  p << -2, 0, -1, 0, 0, 0, 1, 0, 2, 0;
  Vector w(5);
  w << 1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 6;
  CHECK(is_monotone_support(DiscreteMeasure(p, w)));
  CHECK(is_monotone_support(make({{0, 0}, {1, 1}, {2, 5}}, {0.2, 0.3, 0.5})));
  CHECK_FALSE(is_monotone_support(make({{0, 0}, {1, -1}}, {0.5, 0.5})));
  CHECK(is_monotone_support(make({{0, 0}, {1, -1}}, {1.0, 0.0})));
  CHECK_FALSE(is_monotone_support(instability_nu(1)));
  CHECK_THROWS_AS(is_monotone_support(mu1()), Error);
}
