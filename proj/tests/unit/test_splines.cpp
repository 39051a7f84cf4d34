#include <iomanip>
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "../oracles/oracles.hpp"
#include "ordshift/error.hpp"
#include "ordshift/splines.hpp"

using namespace ordshift;
using Catch::Approx;

namespace {

std::vector<double> uniform_sample(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

// Type-7 empirical quantile computed independently of the library.
double quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double h = (x.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

}  // namespace

TEST_CASE("knot sequences", "[splines]") {
  auto x = uniform_sample(500, 0.0, 1.0, 1);
  x.push_back(0.0);
  x.push_back(1.0);
  const BasisDef bern = knot_sequence(x, 4);
  CHECK(bern.knots == std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1});

  const BasisDef six = knot_sequence(x, 6);
  REQUIRE(six.knots.size() == 10u);
  CHECK(six.knots[4] == Approx(quantile(x, 1.0 / 3.0)).margin(1e-12));
  CHECK(six.knots[5] == Approx(quantile(x, 2.0 / 3.0)).margin(1e-12));
  CHECK(std::is_sorted(six.knots.begin(), six.knots.end()));
  CHECK(six.lo == 0.0);
  CHECK(six.hi == 1.0);

  CHECK_THROWS_AS(knot_sequence(x, 3), SpecError);
  const std::vector<double> few{1, 2, 3, 1, 2, 3};
  CHECK_THROWS_AS(knot_sequence(few, 6), SpecError);
}

TEST_CASE("basis examples", "[splines]") {
  BasisDef step;
  step.degree = 0;
  step.count = 1;
  step.knots = {0.0, 1.0};
  step.lo = 0.0;
  step.hi = 1.0;
  CHECK(bspline_basis(0.4, step)[0] == 1.0);

  BasisDef bern;
  bern.degree = 3;
  bern.count = 4;
  bern.knots = {0, 0, 0, 0, 1, 1, 1, 1};
  const Eigen::VectorXd at0 = bspline_basis(0.0, bern);
  CHECK(at0[0] == 1.0);
  CHECK(at0.tail(3).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd at1 = bspline_basis(1.0, bern);
  CHECK(at1[3] == Approx(1.0).margin(1e-15));
  // Clamping outside the range.
  CHECK((bspline_basis(-3.0, bern) - at0).norm() == 0.0);
  CHECK((bspline_basis(7.0, bern) - at1).norm() == 0.0);
}

TEST_CASE("basis matches the recursive reference", "[splines]") {
  const auto x = uniform_sample(300, -2.0, 5.0, 2);
  for (int count : {4, 5, 6, 8, 10}) {
    const BasisDef def = knot_sequence(x, count);
    std::vector<double> points{def.lo, def.hi};
    for (int j = def.degree + 1; j < count; ++j) points.push_back(def.knots[j]);  // interior knots
    for (int g = 0; g <= 97; ++g) points.push_back(std::min(def.hi, def.lo + (def.hi - def.lo) * g / 97.0));
    for (double v : points) {
      const Eigen::VectorXd b = bspline_basis(v, def);
      for (int s = 0; s < count; ++s) {
        INFO("count " << count << " s " << s << " v " << std::setprecision(17) << v << " hi " << def.hi);
        CHECK(b[s] == Approx(oracle::cox_de_boor(s, def.degree, def.knots, v)).margin(1e-12));
      }
    }
  }
}

TEST_CASE("local support and nonnegativity", "[splines]") {
  const auto x = uniform_sample(200, 0.0, 10.0, 3);
  const BasisDef def = knot_sequence(x, 7);
  for (int g = 0; g <= 500; ++g) {
    const double v = def.lo + (def.hi - def.lo) * g / 500.0;
    const Eigen::VectorXd b = bspline_basis(v, def);
    for (int s = 0; s < def.count; ++s) {
      CHECK(b[s] >= 0.0);
      if (v < def.knots[s] || v > def.knots[s + def.degree + 1]) CHECK(b[s] == 0.0);
    }
  }
}

TEST_CASE("centering", "[splines]") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(8, 2, 3.5);
  CHECK(center_basis(constant).matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(center_basis(constant).means[0] == 3.5);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd random(10, 4);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 4; ++j) random(i, j) = normal(rng);
  const CenteredBasis c = center_basis(random);
  CHECK(c.matrix.colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
  const CenteredBasis again = center_basis(c.matrix);
  CHECK((again.matrix - c.matrix).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(((c.matrix.rowwise() + c.means.transpose()) - random).cwiseAbs().maxCoeff() < 1e-14);
}
