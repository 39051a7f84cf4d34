#include "ordshift/kernels.hpp"

#include <algorithm>
#include <exception>
#include <vector>

#include "ordshift/core_model.hpp"
#include "ordshift/error.hpp"

namespace ordshift::kernels {

namespace {

// Per-thread scratch space for one observation.
struct Workspace {
  Eigen::MatrixXd rows;
  Eigen::VectorXd eta;
  Eigen::MatrixXd weighted;
  std::vector<double> x;
  std::vector<double> z;
  ObservationTerms terms;

  explicit Workspace(const ParamLayout& layout)
      : rows(layout.k - 1, layout.size()),
        eta(layout.k - 1),
        weighted(layout.k - 1, layout.size()),
        x(layout.p),
        z(layout.m) {}
};

LikelihoodSums make_sums(const ParamLayout& layout, Want want) {
  LikelihoodSums sums;
  const int size = layout.size();
  if (want != Want::loglik) sums.score = Eigen::VectorXd::Zero(size);
  if (want == Want::information) sums.information = Eigen::MatrixXd::Zero(size, size);
  return sums;
}

void accumulate(const Problem& problem, const Eigen::VectorXd& params, Want want, int i,
                Workspace& ws, LikelihoodSums& sums) {
  const auto& design = problem.design;
  const int p = problem.layout.p;
  const int m = problem.layout.m;
  for (int j = 0; j < p; ++j) ws.x[j] = design.X(i, j);
  for (int j = 0; j < m; ++j) ws.z[j] = design.Z(i, j);
  build_design_rows(problem.layout, problem.family, ws.x, ws.z, ws.rows);
  ws.eta.noalias() = ws.rows * params;
  const bool want_weight = want == Want::information;
  observation_terms(problem.link, problem.family,
                    std::span<const double>(ws.eta.data(), static_cast<std::size_t>(ws.eta.size())),
                    problem.y[i], want_weight, ws.terms);
  sums.loglik += ws.terms.log_prob;
  if (ws.terms.floored) ++sums.floored;
  if (want == Want::loglik) return;
  sums.score.noalias() += ws.rows.transpose() * ws.terms.gradient;
  if (want_weight) {
    ws.weighted.noalias() = ws.terms.weight * ws.rows;
    sums.information.noalias() += ws.rows.transpose() * ws.weighted;
  }
}

void add_into(LikelihoodSums& total, const LikelihoodSums& part) {
  total.loglik += part.loglik;
  total.floored += part.floored;
  if (total.score.size() > 0) total.score += part.score;
  if (total.information.size() > 0) total.information += part.information;
}

}  // namespace

LikelihoodSums evaluate_serial(const Problem& problem, const Eigen::VectorXd& params, Want want) {
  LikelihoodSums sums = make_sums(problem.layout, want);
  Workspace ws(problem.layout);
  for (int i = 0; i < problem.n(); ++i) accumulate(problem, params, want, i, ws, sums);
  return sums;
}

LikelihoodSums evaluate_parallel(const Problem& problem, const Eigen::VectorXd& params, Want want) {
  const int n = problem.n();
  const int blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<LikelihoodSums> partial(blocks);
  std::vector<std::exception_ptr> errors(blocks);

#pragma omp parallel
  {
    Workspace ws(problem.layout);
#pragma omp for schedule(static)
    for (int b = 0; b < blocks; ++b) {
      try {
        partial[b] = make_sums(problem.layout, want);
        const int end = std::min(n, (b + 1) * kBlockSize);
        for (int i = b * kBlockSize; i < end; ++i) {
          accumulate(problem, params, want, i, ws, partial[b]);
        }
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  LikelihoodSums total = make_sums(problem.layout, want);
  for (const auto& part : partial) add_into(total, part);
  return total;
}

int first_ordering_violation(const Problem& problem, const Eigen::VectorXd& params) {
  if (problem.family.kind != FamilyKind::cumulative) return -1;
  const int k = problem.k;
  const int p = problem.layout.p;
  const int m = problem.layout.m;
  const auto& layout = problem.layout;
  const double sign = problem.family.reverse ? -1.0 : 1.0;
  for (int i = 0; i < problem.n(); ++i) {
    double previous = 0.0;
    for (int r = 1; r < k; ++r) {
      double eta = params[layout.intercept(r)];
      for (int j = 0; j < p; ++j) eta += problem.design.X(i, j) * params[layout.location(j, r)];
      if (m > 0) {
        const double s = scaling_factor(problem.family, r, k);
        for (int j = 0; j < m; ++j) eta += s * problem.design.Z(i, j) * params[layout.dispersion(j)];
      }
      eta *= sign;
      if (r > 1 && eta < previous) return i;
      previous = eta;
    }
  }
  return -1;
}

}  // namespace ordshift::kernels
