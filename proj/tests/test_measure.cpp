#include "doctest.h"

#include "kdenoise/error.hpp"
#include "kdenoise/measure.hpp"
#include "kdenoise/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace kdenoise;

namespace {

DiscreteMeasure line(std::initializer_list<double> xs, std::initializer_list<double> ws) {
  Matrix p(static_cast<Eigen::Index>(xs.size()), 1);
  Vector w(static_cast<Eigen::Index>(ws.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  i = 0;
  for (double v : ws) w(i++) = v;
  return DiscreteMeasure(p, w);
}

DiscreteMeasure random_measure(Rng& rng, Eigen::Index m, Eigen::Index d) {
  Matrix p(m, d);
  Vector w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) p(i, k) = rng.uniform(-3.0, 3.0);
    w(i) = rng.uniform(0.1, 1.0);
  }
  w /= w.sum();
  return DiscreteMeasure(p, w);
}

}  // namespace

TEST_CASE("barycenter and moments of small measures") {
  CHECK(barycenter(line({-1, 1}, {0.5, 0.5}))(0) == doctest::Approx(0.0));

  const auto mu = line({-4, 2}, {1.0 / 3, 2.0 / 3});
  CHECK(std::abs(barycenter(mu)(0)) <= 1e-15);
  CHECK(std::abs(second_moment(mu) - 8.0) <= 1e-12);

  const auto nu = line({-4, 0, 4}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(std::abs(second_moment(nu) - 32.0 / 3) <= 1e-12);

  Matrix p(4, 2);
  p << 0, 0, -3, 3, 2, 2, -1, 5;
  const auto sa = DiscreteMeasure::uniform(p);
  const Vector b = barycenter(sa);
  CHECK(b(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(b(1) == doctest::Approx(2.5).epsilon(1e-15));

  const auto centered = center(sa);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(centered.points()(i, 0) == doctest::Approx(p(i, 0) + 0.5));
    CHECK(centered.points()(i, 1) == doctest::Approx(p(i, 1) - 2.5));
  }

  Vector c(3);
  c << 1.5, -2.0, 7.0;
  CHECK(variance(DiscreteMeasure::dirac(c)) == 0.0);
}

TEST_CASE("dilation and translation") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = random_measure(rng, 1 + static_cast<Eigen::Index>(rng.index(12)), 3);
    const double lambda = rng.uniform(0.0, 2.0);
    CHECK(std::abs(variance(dilate(mu, lambda)) - lambda * lambda * variance(mu)) <= 1e-10);
    Vector k(3);
    k << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5);
    CHECK(std::abs(variance(translate(mu, k)) - variance(mu)) <= 1e-10);
    CHECK(barycenter(center(mu)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto mu = random_measure(rng, 5, 2);
  CHECK(dilate(mu, 1.0).points() == mu.points());
  const auto collapsed = dilate(mu, 0.0);
  CHECK(collapsed.points().cwiseAbs().maxCoeff() == 0.0);
  CHECK(collapsed.weights() == mu.weights());
}

TEST_CASE("invalid measures are rejected") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  Matrix p(2, 1);
  p << 0, 1;
  CHECK(code_of([&] { DiscreteMeasure(p, Vector::Constant(2, 0.4)); }) ==
        ErrorCode::kInvalidMeasure);
  Vector neg(2);
  neg << 1.5, -0.5;
  CHECK(code_of([&] { DiscreteMeasure(p, neg); }) == ErrorCode::kInvalidMeasure);
  Matrix bad = p;
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { DiscreteMeasure(bad, Vector::Constant(2, 0.5)); }) ==
        ErrorCode::kInvalidMeasure);
  CHECK(code_of([&] { DiscreteMeasure(p, Vector::Constant(3, 1.0 / 3)); }) ==
        ErrorCode::kInvalidMeasure);
  CHECK(code_of([&] { DiscreteMeasure(Matrix(0, 1), Vector(0)); }) ==
        ErrorCode::kInvalidMeasure);
}

TEST_CASE("normalize drops zero-weight atoms and keeps order") {
  Matrix p(4, 1);
  p << 3, 1, 2, 0;
  Vector w(4);
  w << 0.5, 0.0, 0.5, 0.0;
  const auto n = normalize(DiscreteMeasure(p, w));
  REQUIRE(n.size() == 2);
  CHECK(n.points()(0, 0) == 3.0);
  CHECK(n.points()(1, 0) == 2.0);
}

TEST_CASE("curve length") {
  Matrix p(3, 2);
  p << 0, 0, 3, 4, 3, 5;
  CHECK(curve_length(p) == doctest::Approx(6.0));
  CHECK(curve_length(p.topRows(1)) == 0.0);
}

TEST_CASE("measure CSV round trip and tolerance") {
  Rng rng(11);
  const auto mu = random_measure(rng, 6, 3);
  std::stringstream ss;
  write_measure_csv(ss, mu);
  const auto back = read_measure_csv(ss);
  CHECK((back.points() - mu.points()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.weights() - mu.weights()).cwiseAbs().maxCoeff() <= 1e-16);

  std::istringstream ok("x1,x2,w\n0,0,0.5\n1,1,0.5000000001\n");
  CHECK(read_measure_csv(ok).weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
  std::istringstream off("x1,w\n0,0.5\n1,0.51\n");
  CHECK_THROWS_AS(read_measure_csv(off), Error);
  std::istringstream ragged("x1,x2,w\n0,0.5\n");
  CHECK_THROWS_AS(read_measure_csv(ragged), Error);
  CHECK_THROWS_AS(load_measure_csv("/nonexistent/file.csv"), Error);
}
