#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include <omp.h>

#include "../oracles/oracles.hpp"
#include "ordshift/error.hpp"
#include "ordshift/fit.hpp"
#include "ordshift/kernels.hpp"

using namespace ordshift;
using Catch::Approx;

namespace {

OrdinalDataset counts_dataset(const std::vector<int>& counts) {
  OrdinalDataset d;
  d.k = static_cast<int>(counts.size());
  for (int r = 0; r < d.k; ++r) d.response.insert(d.response.end(), counts[r], r + 1);
  return d;
}

Problem problem_for(const OrdinalDataset& data, Structure structure, Family family = {},
                    std::vector<std::string> x = {"x1", "x2"}) {
  ModelSpec spec;
  spec.family = family;
  spec.structure = structure;
  spec.location = oracle::linear_terms(x);
  spec.dispersion = spec.location;
  return make_problem(data, spec);
}

// A feasible random parameter point near the initial values.
Eigen::VectorXd random_point(const Problem& problem, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd p = initial_params(problem);
    for (int j = 0; j < p.size(); ++j) p[j] += scale * normal(rng) * (j < problem.k - 1 ? 0.2 : 1.0);
    if (kernels::first_ordering_violation(problem, p) < 0) return p;
  }
  throw std::runtime_error("no feasible point");
}

const std::vector<Family> kFamilies{{FamilyKind::cumulative, false},
                                    {FamilyKind::cumulative, true},
                                    {FamilyKind::adjacent, false},
                                    {FamilyKind::adjacent, true}};
const std::vector<Structure> kStructures{Structure::global, Structure::location_shift,
                                         Structure::category_specific};

}  // namespace

TEST_CASE("log-likelihood examples", "[fit]") {
  Problem one;
  one.k = 2;
  one.y = {1};
  one.design.X.resize(1, 0);
  one.design.Z.resize(1, 0);
  one.layout = make_layout(2, Structure::global, {}, {});
  CHECK(log_likelihood(one, Eigen::VectorXd::Zero(1)) == Approx(std::log(0.5)));

  const OrdinalDataset d = counts_dataset({10, 20, 30});
  ModelSpec spec;
  spec.structure = Structure::global;
  const Problem p = make_problem(d, spec);
  const Eigen::VectorXd start = initial_params(p);
  const double closed = 10 * std::log(10.0 / 60) + 20 * std::log(20.0 / 60) + 30 * std::log(30.0 / 60);
  CHECK(log_likelihood(p, start) == Approx(closed).epsilon(1e-12));
  CHECK(score(p, start).cwiseAbs().maxCoeff() < 1e-10);

  const FitResult f = fit(p);
  CHECK(f.converged);
  CHECK(f.params[0] == Approx(std::log(10.0 / 50.0)).epsilon(1e-9));
  CHECK(f.params[1] == Approx(0.0).margin(1e-9));
  CHECK(f.deviance == Approx(-2.0 * closed));
  CHECK(f.df_residual == 60 * 2 - 2);

  // A zero-width band containing observations hits the floor.
  Eigen::VectorXd flat(2);
  flat << 0.0, 0.0;
  const auto sums = kernels::evaluate_serial(p, flat, kernels::Want::loglik);
  CHECK(sums.floored == 20);
  CHECK(sums.loglik == Approx(40 * std::log(0.5) + 20 * std::log(kProbFloor)));

  Eigen::VectorXd bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(log_likelihood(p, bad), OrderingViolation);
}

TEST_CASE("score matches finite differences", "[fit]") {
  std::mt19937_64 rng(21);
  for (const Family& family : kFamilies) {
    for (Structure structure : kStructures) {
      const OrdinalDataset data = oracle::random_dataset(rng, 80, 4, 2);
      const Problem problem = problem_for(data, structure, family);
      const auto f = [&](const Eigen::VectorXd& x) { return oracle::loglik(problem, x); };
      for (int rep = 0; rep < 3; ++rep) {
        const Eigen::VectorXd x = random_point(problem, rng, 0.3);
        const Eigen::VectorXd g = score(problem, x);
        const Eigen::VectorXd fd = oracle::fd_gradient(f, x);
        CHECK((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()) < 1e-6);
        CHECK(log_likelihood(problem, x) == Approx(f(x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("dispersion score vanishes with zero scaling weights", "[fit]") {
  // For k = 2 the only weight is 1 - 2/2 = 0. make_problem rejects this
  // layout, so the problem is assembled by hand.
  Problem p;
  p.k = 2;
  p.y = {1, 2, 2, 1, 2};
  p.design.X = Eigen::MatrixXd(5, 0);
  p.design.Z = Eigen::MatrixXd::Random(5, 1);
  p.layout = make_layout(2, Structure::location_shift, {}, {{"z", "z", false}});
  Eigen::VectorXd params(2);
  params << 0.3, 0.7;
  CHECK(score(p, params)[1] == 0.0);
}

TEST_CASE("fisher information properties", "[fit]") {
  std::mt19937_64 rng(22);
  for (const Family& family : kFamilies) {
    for (Structure structure : kStructures) {
      const OrdinalDataset data = oracle::random_dataset(rng, 120, 5, 2);
      const Problem problem = problem_for(data, structure, family);
      const Eigen::VectorXd x = random_point(problem, rng, 0.2);
      const Eigen::MatrixXd info = fisher_info(problem, x);
      CHECK((info - info.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
      CHECK(eig.eigenvalues().minCoeff() > -1e-8);
    }
  }

  // Binary logit: sum of p(1-p) (1, x)(1, x)'.
  OrdinalDataset d;
  d.k = 2;
  Column x;
  x.name = "x1";
  std::normal_distribution<double> normal;
  for (int i = 0; i < 40; ++i) {
    x.numeric.push_back(normal(rng));
    d.response.push_back(i % 3 == 0 ? 1 : 2);
  }
  d.columns.push_back(x);
  const Problem binary = problem_for(d, Structure::global, {}, {"x1"});
  Eigen::VectorXd params(2);
  params << 0.4, -0.9;
  Eigen::Matrix2d hand = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 40; ++i) {
    const double pr = 1.0 / (1.0 + std::exp(-(0.4 - 0.9 * x.numeric[i])));
    Eigen::Vector2d v(1.0, x.numeric[i]);
    hand += pr * (1 - pr) * v * v.transpose();
  }
  CHECK((fisher_info(binary, params) - hand).cwiseAbs().maxCoeff() < 1e-12);

  // Standard errors of the binary fit equal the closed-form inverse.
  const FitResult f = fit(binary);
  Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 40; ++i) {
    const double pr = 1.0 / (1.0 + std::exp(-(f.params[0] + f.params[1] * x.numeric[i])));
    Eigen::Vector2d v(1.0, x.numeric[i]);
    info += pr * (1 - pr) * v * v.transpose();
  }
  const Eigen::Matrix2d cov = info.inverse();
  const auto se = standard_errors(f);
  CHECK(*se[0] == Approx(std::sqrt(cov(0, 0))).epsilon(1e-6));
  CHECK(*se[1] == Approx(std::sqrt(cov(1, 1))).epsilon(1e-6));
}

TEST_CASE("expected information equals the observed one for adjacent logits", "[fit]") {
  std::mt19937_64 rng(23);
  for (Structure structure : kStructures) {
    const OrdinalDataset data = oracle::random_dataset(rng, 150, 4, 2);
    const Problem problem = problem_for(data, structure, {FamilyKind::adjacent, false});
    const FitResult f = fit(problem);
    REQUIRE(f.converged);
    const auto ll = [&](const Eigen::VectorXd& x) { return oracle::loglik(problem, x); };
    const Eigen::MatrixXd hessian = -oracle::fd_hessian(ll, f.params);
    const Eigen::MatrixXd info = fisher_info(problem, f.params);
    CHECK((info - hessian).cwiseAbs().maxCoeff() / info.cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("standard errors flag singular directions", "[fit]") {
  std::mt19937_64 rng(24);
  OrdinalDataset data = oracle::random_dataset(rng, 100, 3, 1);
  Column dup = data.column("x1");
  dup.name = "x1copy";
  data.columns.push_back(dup);
  const Problem problem = problem_for(data, Structure::global, {}, {"x1", "x1copy"});
  const FitResult f = fit(problem);
  const auto se = standard_errors(f);
  CHECK(se[0].has_value());
  CHECK(se[1].has_value());
  CHECK_FALSE(se[2].has_value());
  CHECK_FALSE(se[3].has_value());
  for (const auto& s : se) {
    if (s) CHECK(*s >= 0.0);
  }
}

TEST_CASE("fit matches a derivative-free optimizer", "[fit]") {
  std::mt19937_64 rng(25);
  const OrdinalDataset data = oracle::random_dataset(rng, 50, 4, 1);
  const Problem problem = problem_for(data, Structure::global, {}, {"x1"});
  const FitResult f = fit(problem);
  REQUIRE(f.converged);
  const auto objective = [&](const Eigen::VectorXd& x) { return -oracle::loglik(problem, x); };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(problem.layout.size());
  start.head(3) << -1.0, 0.0, 1.0;
  const auto nm = oracle::nelder_mead(objective, start);
  CHECK(std::abs(f.loglik + nm.value) < 1e-6);
  CHECK(f.loglik >= -nm.value - 1e-9);
}

TEST_CASE("maximum on the ordering boundary", "[fit]") {
  // The fourth of these small datasets has its location-shift maximum where
  // two cumulative predictors coincide at some observations.
  std::mt19937_64 rng(3003);
  OrdinalDataset data = oracle::random_dataset(rng, 50, 4, 2);
  for (int rep = 1; rep <= 3; ++rep) data = oracle::random_dataset(rng, 50, 4, 2);
  const Problem problem = problem_for(data, Structure::location_shift);
  const FitResult f = fit(problem);
  REQUIRE(f.converged);
  CHECK(f.boundary > 0);
  CHECK(std::any_of(f.warnings.begin(), f.warnings.end(),
                    [](const std::string& w) { return w.find("ordering boundary") != std::string::npos; }));

  const Eigen::VectorXd gaps = oracle::ordering_gaps(problem, f.params);
  CHECK(gaps.minCoeff() >= 0.0);
  CHECK(gaps.minCoeff() < 1e-6);

  // KKT: the score (checked against finite differences above; a difference
  // stencil would cross the wall here) is a nonnegative combination of the
  // active constraint normals, pointing out of the feasible set.
  const auto ll = [&](const Eigen::VectorXd& x) { return oracle::loglik(problem, x); };
  const Eigen::VectorXd g = score(problem, f.params);
  CHECK(g.cwiseAbs().maxCoeff() > 1e-2);
  const Eigen::MatrixXd normals = oracle::ordering_faces(problem, 1e-6)(f.params);
  REQUIRE(normals.rows() > 0);
  const Eigen::VectorXd mu = oracle::nnls(normals.transpose(), -g);
  CHECK((g + normals.transpose() * mu).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(mu.minCoeff() >= 0.0);

  const auto objective = [&](const Eigen::VectorXd& x) { return -ll(x); };
  const auto brute = oracle::minimize(objective, initial_params(problem), oracle::ordering_faces(problem));
  CHECK(std::abs(f.loglik + brute.value) < 1e-6);
}

TEST_CASE("parameter recovery on a large simulated sample", "[fit]") {
  std::mt19937_64 rng(26);
  oracle::SimulationSpec sim;
  sim.n = 2000;
  sim.k = 6;
  sim.intercepts = {-2, -1, 0, 1, 2};
  sim.beta = {1.0};
  sim.alpha = {0.3};
  const OrdinalDataset data = oracle::simulate(rng, sim);
  ModelSpec spec;
  spec.location = oracle::linear_terms({"x1"});
  spec.dispersion = oracle::linear_terms({"z1"});
  const Problem problem = make_problem(data, spec);
  const FitResult f = fit(problem);
  REQUIRE(f.converged);
  const auto se = standard_errors(f);
  CHECK(std::abs(f.params[problem.layout.location(0)] - 1.0) < 3.0 * *se[problem.layout.location(0)]);
  CHECK(std::abs(f.params[problem.layout.dispersion(0)] - 0.3) < 3.0 * *se[problem.layout.dispersion(0)]);
  CHECK(f.max_score < 1e-4 * (1.0 + std::abs(f.loglik)));
}

TEST_CASE("serial and parallel kernels agree", "[fit][kernels]") {
  std::mt19937_64 rng(27);
  for (const Family& family : kFamilies) {
    for (Structure structure : kStructures) {
      const OrdinalDataset data = oracle::random_dataset(rng, 1000, 5, 2);
      const Problem problem = problem_for(data, structure, family);
      const Eigen::VectorXd x = random_point(problem, rng, 0.2);
      const auto s = kernels::evaluate_serial(problem, x, kernels::Want::information);
      const auto p = kernels::evaluate_parallel(problem, x, kernels::Want::information);
      CHECK(p.loglik == Approx(s.loglik).epsilon(1e-12));
      CHECK((p.score - s.score).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((p.information - s.information).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(p.floored == s.floored);

      const int saved = omp_get_max_threads();
      omp_set_num_threads(1);
      const auto one = kernels::evaluate_parallel(problem, x, kernels::Want::information);
      omp_set_num_threads(4);
      const auto four = kernels::evaluate_parallel(problem, x, kernels::Want::information);
      omp_set_num_threads(saved);
      CHECK(one.loglik == four.loglik);
      CHECK(one.score == four.score);
      CHECK(one.information == four.information);
    }
  }
}

TEST_CASE("kernels report ordering violations", "[kernels]") {
  std::mt19937_64 rng(28);
  const OrdinalDataset data = oracle::random_dataset(rng, 600, 4, 2);
  const Problem problem = problem_for(data, Structure::category_specific);
  Eigen::VectorXd x = initial_params(problem);
  CHECK(kernels::first_ordering_violation(problem, x) == -1);
  x[problem.layout.location(0, 1)] = 5.0;  // steep first threshold crosses the second
  const int bad = kernels::first_ordering_violation(problem, x);
  CHECK(bad >= 0);
  CHECK_THROWS_AS(kernels::evaluate_parallel(problem, x, kernels::Want::loglik), OrderingViolation);
  CHECK_THROWS_AS(kernels::evaluate_serial(problem, x, kernels::Want::loglik), OrderingViolation);
}

TEST_CASE("fits are invariant to observation order", "[fit]") {
  std::mt19937_64 rng(29);
  const OrdinalDataset data = oracle::random_dataset(rng, 700, 5, 2);
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  OrdinalDataset shuffled = data;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.response[i] = data.response[perm[i]];
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      shuffled.columns[c].numeric[i] = data.columns[c].numeric[perm[i]];
    }
  }
  for (Structure structure : kStructures) {
    const FitResult a = fit(problem_for(data, structure));
    const FitResult b = fit(problem_for(shuffled, structure));
    CHECK(std::abs(a.deviance - b.deviance) < 1e-10 * std::abs(a.deviance));
    CHECK((a.params - b.params).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("accepted steps never decrease the likelihood", "[fit]") {
  std::mt19937_64 rng(30);
  const OrdinalDataset data = oracle::random_dataset(rng, 300, 5, 2);
  const Problem problem = problem_for(data, Structure::location_shift);
  double previous = -INFINITY;
  for (int cap = 1; cap <= 10; ++cap) {
    FitOptions options;
    options.max_iter = cap;
    const FitResult f = fit(problem, options);
    CHECK(f.loglik >= previous);
    previous = f.loglik;
  }
}

TEST_CASE("fit diagnostics", "[fit]") {
  std::mt19937_64 rng(31);
  const OrdinalDataset data = oracle::random_dataset(rng, 300, 5, 2);
  const Problem problem = problem_for(data, Structure::location_shift);

  FitOptions one;
  one.max_iter = 1;
  const FitResult short_run = fit(problem, one);
  CHECK_FALSE(short_run.converged);
  CHECK_FALSE(short_run.warnings.empty());

  FitOptions bad;
  bad.start = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(fit(problem, bad), FitError);
  Eigen::VectorXd reversed = initial_params(problem);
  std::reverse(reversed.data(), reversed.data() + problem.k - 1);
  bad.start = reversed;
  CHECK_THROWS_AS(fit(problem, bad), FitError);

  // Complete separation drives a slope past the divergence bound.
  OrdinalDataset sep;
  sep.k = 3;
  Column x;
  x.name = "x1";
  for (int i = 0; i < 30; ++i) {
    x.numeric.push_back(i);
    sep.response.push_back(i < 10 ? 1 : (i < 20 ? 2 : 3));
  }
  sep.columns.push_back(x);
  const FitResult s = fit(problem_for(sep, Structure::global, {}, {"x1"}));
  const bool flagged = std::any_of(s.warnings.begin(), s.warnings.end(), [](const std::string& w) {
    return w.find("separation") != std::string::npos;
  });
  CHECK(flagged);

  ::setenv("ORDSHIFT_MAX_ITER", "7", 1);
  CHECK(max_iter_from_env() == 7);
  ::setenv("ORDSHIFT_MAX_ITER", "x", 1);
  CHECK_THROWS_AS(max_iter_from_env(), UsageError);
  ::unsetenv("ORDSHIFT_MAX_ITER");
  CHECK(max_iter_from_env() == 100);

  CHECK(residual_df(2225, 10, 90) == 19935);
}

TEST_CASE("category-specific fit seeded from the location-shift fit", "[fit]") {
  std::mt19937_64 rng(32);
  const OrdinalDataset data = oracle::random_dataset(rng, 500, 5, 2);
  const Problem shift = problem_for(data, Structure::location_shift);
  const Problem specific = problem_for(data, Structure::category_specific);
  const FitResult ls = fit(shift);
  REQUIRE(ls.converged);
  FitOptions options;
  options.start = embed_location_shift(shift.layout, ls.params, specific.layout, shift.family);
  const FitResult cs = fit(specific, options);
  CHECK(cs.deviance <= ls.deviance + 1e-9);
}
