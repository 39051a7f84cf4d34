#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ordshift {

/// Clamped B-spline basis on [lo, hi].
struct BasisDef {
  int degree = 3;
  int count = 0;               ///< number of basis functions M
  std::vector<double> knots;   ///< count + degree + 1 nondecreasing knots
  double lo = 0.0;
  double hi = 1.0;
};

/// Knots for an M-function basis of the given degree: boundary knots at the
/// sample min/max repeated degree+1 times, interior knots at equally spaced
/// sample quantiles. Throws SpecError for M < degree+1 or fewer than M
/// distinct values.
BasisDef knot_sequence(std::span<const double> x, int count, int degree = 3);

/// Values of all M basis functions at x (Cox-de Boor). x is clamped to the
/// basis range; the right boundary belongs to the last interval.
Eigen::VectorXd bspline_basis(double x, const BasisDef& def);

/// Basis matrix for a sample, one row per value.
Eigen::MatrixXd bspline_matrix(std::span<const double> x, const BasisDef& def);

struct CenteredBasis {
  Eigen::MatrixXd matrix;   ///< columns with sample mean 0
  Eigen::VectorXd means;    ///< removed column means
};

CenteredBasis center_basis(const Eigen::MatrixXd& basis);

}  // namespace ordshift
