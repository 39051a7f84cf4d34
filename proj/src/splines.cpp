#include "ordshift/splines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

namespace {

// Sample quantile with linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Index i of the knot interval [t_i, t_{i+1}) containing x, with the right
// boundary assigned to the last non-empty interval.
int find_span(double x, const BasisDef& def) {
  const int n = def.count;
  const auto& t = def.knots;
  if (x >= t[n]) {
    int i = n - 1;
    while (i > def.degree && t[i] >= t[i + 1]) --i;
    return i;
  }
  const auto it = std::upper_bound(t.begin() + def.degree, t.begin() + n + 1, x);
  return static_cast<int>(it - t.begin()) - 1;
}

}  // namespace

BasisDef knot_sequence(std::span<const double> x, int count, int degree) {
  if (degree < 0) throw SpecError("spline degree must be nonnegative");
  if (count < degree + 1) {
    throw SpecError(fmt::format("B-spline basis needs at least {} functions for degree {}, got {}",
                                degree + 1, degree, count));
  }
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < count) {
    throw SpecError(fmt::format("smooth term needs at least {} distinct values, found {}", count,
                                distinct));
  }
  sorted.assign(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());

  BasisDef def;
  def.degree = degree;
  def.count = count;
  def.lo = sorted.front();
  def.hi = sorted.back();
  def.knots.assign(degree + 1, def.lo);
  const int interior = count - degree - 1;
  for (int j = 1; j <= interior; ++j) {
    def.knots.push_back(quantile_sorted(sorted, static_cast<double>(j) / (interior + 1)));
  }
  def.knots.insert(def.knots.end(), degree + 1, def.hi);
  return def;
}

Eigen::VectorXd bspline_basis(double x, const BasisDef& def) {
  const int p = def.degree;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(def.count);
  x = std::clamp(x, def.lo, def.hi);
  const auto& t = def.knots;
  const int span = find_span(x, def);

  // Triangular Cox-de Boor evaluation of the p+1 non-zero functions.
  std::vector<double> n(p + 1, 0.0), left(p + 1, 0.0), right(p + 1, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom > 0.0 ? n[r] / denom : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j <= p; ++j) out[span - p + j] = n[j];
  return out;
}

Eigen::MatrixXd bspline_matrix(std::span<const double> x, const BasisDef& def) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.size()), def.count);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = bspline_basis(x[i], def).transpose();
  }
  return out;
}

CenteredBasis center_basis(const Eigen::MatrixXd& basis) {
  CenteredBasis out;
  out.means = basis.colwise().mean().transpose();
  out.matrix = basis.rowwise() - out.means.transpose();
  return out;
}

}  // namespace ordshift
