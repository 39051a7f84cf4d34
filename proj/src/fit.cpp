#include "ordshift/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "ordshift/error.hpp"
#include "ordshift/kernels.hpp"

namespace ordshift {

namespace {

constexpr double kDivergenceBound = 30.0;
constexpr double kSingularRatio = 1e-10;

struct Covariance {
  Eigen::MatrixXd matrix;
  std::vector<bool> available;
};

// Generalized inverse through the eigendecomposition; slots loading on a
// numerically null direction are marked unavailable.
Covariance invert_information(const Eigen::MatrixXd& info) {
  const auto size = info.rows();
  Covariance out;
  out.available.assign(static_cast<std::size_t>(size), true);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (info + info.transpose()));
  const Eigen::VectorXd& values = eig.eigenvalues();
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  const double top = size > 0 ? std::max(values.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    if (values[j] > kSingularRatio * top) {
      inv[j] = 1.0 / values[j];
    } else {
      for (Eigen::Index i = 0; i < size; ++i) {
        if (std::abs(vectors(i, j)) > 1e-6) out.available[static_cast<std::size_t>(i)] = false;
      }
    }
  }
  out.matrix = vectors * inv.asDiagonal() * vectors.transpose();
  return out;
}

Eigen::VectorXd scoring_direction(const Eigen::MatrixXd& info, const Eigen::VectorXd& grad) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::VectorXd step = ldlt.solve(grad);
    if (step.allFinite()) return step;
  }
  return info.completeOrthogonalDecomposition().solve(grad);
}

// Cumulative predictors must stay ordered at every observation. Each gap
// sign * (eta_{r+1} - eta_r) is linear in the parameters; gap (i, r) is
// stored at index i * (k - 2) + (r - 1).
class OrderingGaps {
 public:
  explicit OrderingGaps(const Problem& problem)
      : problem_(problem),
        per_obs_(problem.family.kind == FamilyKind::cumulative ? problem.k - 2 : 0),
        sign_(problem.family.reverse ? -1.0 : 1.0) {}

  Eigen::Index count() const { return static_cast<Eigen::Index>(problem_.n()) * per_obs_; }

  // A v for every gap row.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(count());
    const auto& layout = problem_.layout;
    for (int i = 0; i < problem_.n(); ++i) {
      double zpart = 0.0;
      for (int j = 0; j < layout.m; ++j) zpart += problem_.design.Z(i, j) * v[layout.dispersion(j)];
      for (int r = 1; r <= per_obs_; ++r) {
        double value = v[layout.intercept(r + 1)] - v[layout.intercept(r)];
        if (layout.structure == Structure::category_specific) {
          for (int j = 0; j < layout.p; ++j) {
            value += problem_.design.X(i, j) * (v[layout.location(j, r + 1)] - v[layout.location(j, r)]);
          }
        }
        value += delta_s(r) * zpart;
        out[static_cast<Eigen::Index>(i) * per_obs_ + (r - 1)] = sign_ * value;
      }
    }
    return out;
  }

  Eigen::VectorXd row(Eigen::Index index) const {
    const auto& layout = problem_.layout;
    const int i = static_cast<int>(index / per_obs_);
    const int r = static_cast<int>(index % per_obs_) + 1;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(layout.size());
    a[layout.intercept(r + 1)] += sign_;
    a[layout.intercept(r)] -= sign_;
    if (layout.structure == Structure::category_specific) {
      for (int j = 0; j < layout.p; ++j) {
        a[layout.location(j, r + 1)] += sign_ * problem_.design.X(i, j);
        a[layout.location(j, r)] -= sign_ * problem_.design.X(i, j);
      }
    }
    for (int j = 0; j < layout.m; ++j) a[layout.dispersion(j)] += sign_ * delta_s(r) * problem_.design.Z(i, j);
    return a;
  }

 private:
  double delta_s(int r) const {
    return scaling_factor(problem_.family, r + 1, problem_.k) - scaling_factor(problem_.family, r, problem_.k);
  }

  const Problem& problem_;
  int per_obs_;
  double sign_;
};

// Iterates are kept this far inside the ordering boundary so that rounding
// never flips a gap negative.
constexpr double kGapMargin = 1e-9;

struct ScoringStep {
  Eigen::VectorXd direction;
  double stationarity = 0.0;  ///< max |score + A_W' lambda|
  int active = 0;
};

// Maximizes the quadratic model g'd - d'Hd/2 subject to every gap staying
// at least min(margin, current gap), by a primal active-set method started
// from d = 0. The unconstrained scoring step is returned unchanged when it
// is feasible.
ScoringStep scoring_step(const OrderingGaps& gaps, const Eigen::VectorXd& params,
                         const Eigen::MatrixXd& info, const Eigen::VectorXd& grad) {
  ScoringStep out;
  out.direction = scoring_direction(info, grad);
  out.stationarity = grad.cwiseAbs().maxCoeff();
  if (gaps.count() == 0) return out;

  const Eigen::VectorXd current = gaps.apply(params);
  const Eigen::VectorXd lower = current.cwiseMin(kGapMargin) - current;  // A d >= lower
  const Eigen::VectorXd moved = gaps.apply(out.direction);
  if (((moved - lower).array() >= 0.0).all()) return out;

  const Eigen::Index size = info.rows();
  const double ridge = 1e-10 * std::max(info.diagonal().cwiseAbs().maxCoeff(), 1.0);
  const Eigen::MatrixXd h = info + ridge * Eigen::MatrixXd::Identity(size, size);
  const Eigen::LDLT<Eigen::MatrixXd> hsolve(h);
  const Eigen::VectorXd h_grad = hsolve.solve(grad);

  Eigen::VectorXd d = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd ad = Eigen::VectorXd::Zero(gaps.count());
  std::vector<Eigen::Index> working;
  Eigen::VectorXd lambda;
  const int limit = 50 + 4 * static_cast<int>(size);
  for (int it = 0; it < limit; ++it) {
    // Equality-constrained subproblem on the working set.
    const auto w = static_cast<Eigen::Index>(working.size());
    Eigen::MatrixXd aw(w, size);
    Eigen::VectorXd bw(w);
    for (Eigen::Index j = 0; j < w; ++j) {
      aw.row(j) = gaps.row(working[j]).transpose();
      bw[j] = lower[working[j]];
    }
    Eigen::VectorXd target = h_grad;
    lambda.resize(w);
    if (w > 0) {
      const Eigen::MatrixXd h_aw = hsolve.solve(aw.transpose());
      const Eigen::MatrixXd schur = aw * h_aw;
      lambda = schur.completeOrthogonalDecomposition().solve(bw - aw * h_grad);
      target += h_aw * lambda;
    }
    const Eigen::VectorXd step = target - d;
    if (step.norm() <= 1e-12 * (1.0 + d.norm())) {
      Eigen::Index worst = -1;
      double most_negative = -1e-12 * (1.0 + grad.cwiseAbs().maxCoeff());
      for (Eigen::Index j = 0; j < w; ++j) {
        if (lambda[j] < most_negative) {
          most_negative = lambda[j];
          worst = j;
        }
      }
      if (worst < 0) break;
      working.erase(working.begin() + worst);
      continue;
    }
    const Eigen::VectorXd a_step = gaps.apply(step);
    double t = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index j = 0; j < a_step.size(); ++j) {
      if (a_step[j] >= 0.0 || std::find(working.begin(), working.end(), j) != working.end()) continue;
      const double limit_j = std::max(0.0, (lower[j] - ad[j]) / a_step[j]);
      if (limit_j < t) {
        t = limit_j;
        blocking = j;
      }
    }
    d += t * step;
    ad += t * a_step;
    if (blocking < 0) {
      if (w == 0) break;
      continue;  // re-check multipliers at the subproblem solution
    }
    working.push_back(blocking);
  }

  out.direction = d;
  out.active = static_cast<int>(working.size());
  // At the subproblem optimum H d = g + A_W' lambda, the score with the
  // active constraint forces removed.
  out.stationarity = (h * d).cwiseAbs().maxCoeff();
  return out;
}

// Log-likelihood at a candidate, or nullopt when the candidate is infeasible.
std::optional<double> try_loglik(const Problem& problem, const Eigen::VectorXd& params) {
  if (!params.allFinite()) return std::nullopt;
  if (kernels::first_ordering_violation(problem, params) >= 0) return std::nullopt;
  try {
    const double ll = kernels::evaluate_parallel(problem, params, kernels::Want::loglik).loglik;
    if (!std::isfinite(ll)) return std::nullopt;
    return ll;
  } catch (const OrderingViolation&) {
    return std::nullopt;
  }
}

}  // namespace

int max_iter_from_env(int fallback) {
  const char* value = std::getenv("ORDSHIFT_MAX_ITER");
  if (value == nullptr || *value == '\0') return fallback;
  char* end = nullptr;
  const long parsed = std::strtol(value, &end, 10);
  if (*end != '\0' || parsed <= 0) {
    throw UsageError(fmt::format("ORDSHIFT_MAX_ITER must be a positive integer, got '{}'", value));
  }
  return static_cast<int>(parsed);
}

double log_likelihood(const Problem& problem, const Eigen::VectorXd& params) {
  return kernels::evaluate_parallel(problem, params, kernels::Want::loglik).loglik;
}

Eigen::VectorXd score(const Problem& problem, const Eigen::VectorXd& params) {
  return kernels::evaluate_parallel(problem, params, kernels::Want::score).score;
}

Eigen::MatrixXd fisher_info(const Problem& problem, const Eigen::VectorXd& params) {
  return kernels::evaluate_parallel(problem, params, kernels::Want::information).information;
}

Eigen::VectorXd initial_params(const Problem& problem) {
  const int k = problem.k;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(problem.layout.size());
  std::vector<double> counts(k, 0.0);
  for (int y : problem.y) counts[y - 1] += 1.0;
  const double n = static_cast<double>(problem.n());
  const double sign = problem.family.reverse ? -1.0 : 1.0;
  double below = 0.0;
  for (int r = 1; r < k; ++r) {
    below += counts[r - 1];
    double value = 0.0;
    if (problem.family.kind == FamilyKind::cumulative) {
      value = link_inverse(problem.link, below / n);
    } else {
      value = std::log(counts[r] / counts[r - 1]);
    }
    start[problem.layout.intercept(r)] = sign * value;
  }
  return start;
}

FitResult fit(const Problem& problem, const FitOptions& options) {
  FitResult result;
  result.layout = problem.layout;
  result.family = problem.family;
  result.link = problem.link;
  result.n = problem.n();
  result.k = problem.k;
  result.smooths = problem.design.smooths;

  Eigen::VectorXd params = options.start ? *options.start : initial_params(problem);
  if (params.size() != problem.layout.size()) {
    throw FitError(fmt::format("start vector has {} entries, model has {}", params.size(),
                               problem.layout.size()));
  }
  const std::optional<double> start_ll = try_loglik(problem, params);
  if (!start_ll) {
    throw FitError("infeasible start: cumulative predictors are out of order at the start values");
  }
  double loglik = *start_ll;
  double rel_change = std::numeric_limits<double>::infinity();
  int failures = 0;

  const OrderingGaps gaps(problem);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const auto sums = kernels::evaluate_parallel(problem, params, kernels::Want::information);
    const ScoringStep scoring = scoring_step(gaps, params, sums.information, sums.score);
    if (rel_change < options.tol && scoring.stationarity < options.score_tol) {
      result.converged = true;
      break;
    }
    result.iterations = iter;
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      const Eigen::VectorXd candidate = params + step * scoring.direction;
      const std::optional<double> ll = try_loglik(problem, candidate);
      if (ll && *ll >= loglik) {
        const double dev_old = -2.0 * loglik;
        const double dev_new = -2.0 * *ll;
        rel_change = std::abs(dev_new - dev_old) / (std::abs(dev_new) + 0.1);
        params = candidate;
        loglik = *ll;
        accepted = true;
        break;
      }
    }
    if (accepted) {
      failures = 0;
    } else {
      rel_change = 0.0;
      if (++failures >= 2) break;
    }
  }

  const auto final_sums = kernels::evaluate_parallel(problem, params, kernels::Want::information);
  const ScoringStep final_step = scoring_step(gaps, params, final_sums.information, final_sums.score);
  if (!result.converged && failures < 2) {
    // The iteration cap ends the loop before the last step is checked.
    result.converged = rel_change < options.tol && final_step.stationarity < options.score_tol;
  }
  result.params = params;
  result.loglik = final_sums.loglik;
  result.deviance = -2.0 * final_sums.loglik;
  result.df_residual = residual_df(result.n, result.k, problem.layout.size());
  result.max_score = final_step.stationarity;
  if (gaps.count() > 0) {
    const Eigen::VectorXd at_fit = gaps.apply(params);
    result.boundary = static_cast<int>((at_fit.array() <= 10.0 * kGapMargin).count());
  }
  result.floored = final_sums.floored;
  Covariance cov = invert_information(final_sums.information);
  result.covariance = std::move(cov.matrix);
  result.se_available = std::move(cov.available);
  result.monotonicity_ok = kernels::first_ordering_violation(problem, params) < 0;

  if (!result.converged) {
    result.warnings.push_back(
        fmt::format("no convergence after {} iterations (max |score| = {:.3g})", result.iterations,
                    result.max_score));
  }
  for (int j = problem.k - 1; j < problem.layout.size(); ++j) {
    if (std::abs(params[j]) > kDivergenceBound) {
      result.warnings.push_back(fmt::format(
          "coefficient '{}' = {:.3g} exceeds {} on the link scale (possible separation)",
          problem.layout.names[j], params[j], kDivergenceBound));
    }
  }
  if (result.boundary > 0) {
    result.warnings.push_back(fmt::format(
        "the maximum lies on the ordering boundary: adjacent cumulative predictors coincide at {} "
        "observation-threshold pair(s)",
        result.boundary));
  }
  if (result.floored > 0) {
    result.warnings.push_back(fmt::format(
        "{} observations have fitted probability at the floor {:g}", result.floored, kProbFloor));
  }
  if (problem.family.kind == FamilyKind::cumulative &&
      problem.layout.structure == Structure::category_specific) {
    result.warnings.push_back(
        "category-specific cumulative predictors are ordered only at the observed covariate "
        "values; more extreme values can give negative probabilities");
  }
  return result;
}

int residual_df(int n, int k, int n_params) { return n * (k - 1) - n_params; }

DevianceReport deviance_report(const FitResult& fit) {
  return {fit.deviance, residual_df(fit.n, fit.k, static_cast<int>(fit.params.size()))};
}

std::vector<std::optional<double>> standard_errors(const FitResult& fit) {
  std::vector<std::optional<double>> se(static_cast<std::size_t>(fit.params.size()));
  for (Eigen::Index j = 0; j < fit.params.size(); ++j) {
    const auto slot = static_cast<std::size_t>(j);
    if (slot < fit.se_available.size() && fit.se_available[slot]) {
      se[slot] = std::sqrt(std::max(fit.covariance(j, j), 0.0));
    }
  }
  return se;
}

}  // namespace ordshift
