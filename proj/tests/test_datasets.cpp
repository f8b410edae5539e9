#include "doctest.h"

#include "kdenoise/datasets.hpp"
#include "kdenoise/error.hpp"

#include <cmath>
#include <fstream>

using namespace kdenoise;

TEST_CASE("instability kernel atoms") {
  const DiscreteMeasure nu1 = generate({InstabilityKernel{1}, 0});
  REQUIRE(nu1.size() == 6);
  const double c = std::cos(3.0 * M_PI / 4.0);
  const double s = std::sin(3.0 * M_PI / 4.0);
  for (int i = 0; i < 3; ++i) {
    const double x = i - 1.0;
    int hits = 0;
    for (std::size_t k = 0; k < 6; ++k) {
      const auto a = nu1.atom(k);
      if (std::abs(a(0) - (x + c)) < 1e-15 && std::abs(a(1) - s) < 1e-15) ++hits;
      if (std::abs(a(0) - (x - c)) < 1e-15 && std::abs(a(1) + s) < 1e-15) ++hits;
    }
    CHECK(hits == 2);
  }
  for (std::size_t k = 0; k < 6; ++k) CHECK(nu1.weight(k) == doctest::Approx(1.0 / 6).epsilon(1e-15));

  const DiscreteMeasure lim = generate({InstabilityKernel{std::nullopt}, 0});
  REQUIRE(lim.size() == 5);
  const double xs[] = {-2, -1, 0, 1, 2};
  const double ws[] = {1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 6};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::abs(lim.atom(k)(0) - xs[k]) <= 1e-15);
    CHECK(std::abs(lim.atom(k)(1)) <= 1e-15);
    CHECK(std::abs(lim.weight(k) - ws[k]) <= 1e-15);
  }
  CHECK(std::abs(variance(lim) - 5.0 / 3.0) <= 1e-12);
  CHECK_THROWS_AS(generate({InstabilityKernel{0}, 0}), Error);
}

TEST_CASE("parabola without noise lies on the curve") {
  const DiscreteMeasure nu = generate({Parabola{500, 0.0}, 7});
  REQUIRE(nu.size() == 500);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto a = nu.atom(i);
    CHECK(std::abs(a(1) - a(0) * a(0)) <= 1e-15);
    CHECK(std::abs(a(0)) <= 1.0);
  }
}

TEST_CASE("generators are deterministic in the seed") {
  const DatasetSpec a{StepCurve{100, 0.1}, 3};
  CHECK(generate(a).points() == generate(a).points());
  const DatasetSpec b{StepCurve{100, 0.1}, 4};
  CHECK(generate(a).points() != generate(b).points());
  // The noise level does not shift the underlying sample.
  const auto clean = generate({Parabola{50, 0.0}, 9});
  const auto noisy = generate({Parabola{50, 0.1}, 9});
  CHECK((clean.points() - noisy.points()).cwiseAbs().maxCoeff() <= 0.6);
}

TEST_CASE("step curve without noise stays on the three segments") {
  const DiscreteMeasure nu = generate({StepCurve{400, 0.0}, 1});
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double x = nu.atom(i)(0);
    const double y = nu.atom(i)(1);
    const bool first = std::abs(y) <= 1e-15 && x >= 0.0 && x <= 1.0;
    const bool riser = std::abs(x - 1.0) <= 1e-15 && y >= 0.0 && y <= 1.0;
    const bool last = std::abs(y - 1.0) <= 1e-15 && x >= 1.0 && x <= 2.0;
    CHECK((first || riser || last));
  }
}

TEST_CASE("factor model covariance") {
  FactorModel f;
  f.loadings = default_factor_loadings();
  f.n = 40000;
  const Matrix& l = f.loadings;
  CHECK(l.rows() == 5);
  CHECK(l.cols() == 2);
  CHECK(std::abs((l.transpose() * l)(0, 1)) <= 1e-15);
  const DiscreteMeasure nu = generate({f, 5});
  const Matrix c = center(nu).points();
  const Matrix cov = c.transpose() * c / static_cast<double>(nu.size());
  const Matrix expected = l * l.transpose() + 0.25 * Matrix::Identity(5, 5);
  CHECK((cov - expected).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("CSV datasets") {
  const std::string path = "test_datasets_tmp.csv";
  {
    std::ofstream f(path);
    f << "x1,x2,w\n0,1,0.25\n2,3,0.75\n";
  }
  const DiscreteMeasure nu = generate({FromCsv{path}, 0});
  CHECK(nu.size() == 2);
  CHECK(nu.weight(1) == 0.75);
  CHECK_THROWS_AS(generate({FromCsv{"no_such_file.csv"}, 0}), Error);
}
