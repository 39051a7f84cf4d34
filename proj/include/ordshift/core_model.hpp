#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ordshift {

/// Floor applied to probabilities before taking logs.
inline constexpr double kProbFloor = 1e-15;

enum class LinkKind { logit, probit };

/// Response function F: a strictly increasing distribution function.
struct Link {
  LinkKind kind = LinkKind::logit;
};

enum class FamilyKind { cumulative, adjacent };

/// Model family. With `reverse` set, the cumulative model describes
/// P(Y >= r+1) and the adjacent model log(pi_r / pi_{r+1}); the sign of the
/// scaling factor flips accordingly so dispersion keeps its meaning.
struct Family {
  FamilyKind kind = FamilyKind::cumulative;
  bool reverse = false;
};

std::string to_string(LinkKind kind);
std::string to_string(FamilyKind kind);

/// F(eta), clamped to [kProbFloor, 1 - kProbFloor].
double link_eval(Link link, double eta);
/// F^{-1}(p) for p in (0, 1).
double link_inverse(Link link, double p);
/// Density F'(eta).
double link_density(Link link, double eta);

/// pi_r = F(eta_r) - F(eta_{r-1}) with F(eta_0) = 0, F(eta_k) = 1.
/// Throws OrderingViolation when eta is decreasing anywhere.
std::vector<double> category_probs_cumulative(Link link, std::span<const double> eta);

/// pi_r proportional to exp(sum_{j<r} eta_j), computed in log space.
std::vector<double> category_probs_adjacent(Link link, std::span<const double> eta);

/// Category probabilities for a family, honouring the reverse representation.
std::vector<double> category_probs(Link link, Family family, std::span<const double> eta);

/// Weight multiplying z'alpha in predictor r (1 <= r <= k-1):
/// cumulative (r - k/2), adjacent (k/2 - r), sign flipped when reversed.
double scaling_factor(Family family, int r, int k);

/// Per-observation likelihood pieces on the predictor scale.
struct ObservationTerms {
  double log_prob = 0.0;     ///< log pi_y, floored
  bool floored = false;      ///< pi_y hit kProbFloor
  Eigen::VectorXd gradient;  ///< d log pi_y / d eta
  Eigen::MatrixXd weight;    ///< expected information E[g g'] on the eta scale
};

/// Evaluates log pi_y and its derivatives with respect to eta (length k-1).
/// `y` is the 1-based observed category. The weight matrix is filled only
/// when `want_weight` is set.
void observation_terms(Link link, Family family, std::span<const double> eta, int y,
                       bool want_weight, ObservationTerms& out);

}  // namespace ordshift
