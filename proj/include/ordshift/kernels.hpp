#pragma once

#include <Eigen/Dense>

#include "ordshift/design.hpp"

namespace ordshift::kernels {

enum class Want { loglik, score, information };

/// Sums over observations of log pi_y, the score and the expected
/// information. Entries beyond what was requested are left empty.
struct LikelihoodSums {
  double loglik = 0.0;
  int floored = 0;  ///< observations whose probability hit the floor
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

/// Reference implementation: one pass in observation order.
LikelihoodSums evaluate_serial(const Problem& problem, const Eigen::VectorXd& params, Want want);

/// OpenMP implementation. Observations are split into fixed blocks whose
/// partial sums are combined in block order, so results do not depend on
/// the thread count.
LikelihoodSums evaluate_parallel(const Problem& problem, const Eigen::VectorXd& params, Want want);

/// Checks that cumulative predictors are ordered at every observation.
/// Returns the first offending observation (0-based) or -1.
int first_ordering_violation(const Problem& problem, const Eigen::VectorXd& params);

inline constexpr int kBlockSize = 256;

}  // namespace ordshift::kernels
