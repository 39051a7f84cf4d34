#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordshift/design.hpp"

namespace ordshift {

struct FitOptions {
  int max_iter = 100;
  double tol = 1e-8;         ///< relative deviance change
  double score_tol = 1e-4;   ///< max |score| at convergence
  int max_halvings = 10;
  std::optional<Eigen::VectorXd> start;
};

/// Iteration cap from ORDSHIFT_MAX_ITER, or `fallback` when unset.
int max_iter_from_env(int fallback = 100);

struct FitResult {
  ParamLayout layout;
  Family family;
  Link link;
  int n = 0;
  int k = 0;
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;       ///< generalized inverse of the information
  std::vector<bool> se_available;   ///< false where the information is singular
  double loglik = 0.0;
  double deviance = 0.0;
  int df_residual = 0;
  int iterations = 0;
  bool converged = false;
  bool monotonicity_ok = true;
  double max_score = 0.0;           ///< max |score| net of active ordering constraints
  int boundary = 0;                 ///< ordering gaps held at the boundary
  int floored = 0;
  std::vector<std::string> warnings;
  std::vector<SmoothTerm> smooths;
};

double log_likelihood(const Problem& problem, const Eigen::VectorXd& params);
Eigen::VectorXd score(const Problem& problem, const Eigen::VectorXd& params);
Eigen::MatrixXd fisher_info(const Problem& problem, const Eigen::VectorXd& params);

/// Starting values: intercepts at the empirical cumulative logits
/// (cumulative) or adjacent log-ratios (adjacent), slopes zero.
Eigen::VectorXd initial_params(const Problem& problem);

/// Fisher scoring with step-halving. For cumulative models each step solves
/// the quadratic model subject to the predictors staying ordered at every
/// observation, so maxima on the ordering boundary are reached; convergence
/// is then judged on the score net of the active constraints. Non-convergence is reported through `converged`; a start
/// that is already infeasible throws FitError.
FitResult fit(const Problem& problem, const FitOptions& options = {});

int residual_df(int n, int k, int n_params);

struct DevianceReport {
  double deviance = 0.0;
  int df_residual = 0;
};

DevianceReport deviance_report(const FitResult& fit);

/// sqrt of the covariance diagonal; empty where the information is singular.
std::vector<std::optional<double>> standard_errors(const FitResult& fit);

}  // namespace ordshift
