#include "ordshift/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "E_INVALID_INPUT";
    case ErrorCode::ordering_violation: return "E_ORDERING";
    case ErrorCode::data: return "E_DATA";
    case ErrorCode::spec: return "E_SPEC";
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::fit: return "E_FIT";
    case ErrorCode::usage: return "E_USAGE";
    case ErrorCode::nesting_violation: return "E_NESTING";
  }
  return "E_UNKNOWN";
}

std::string to_string(LinkKind kind) {
  return kind == LinkKind::logit ? "logit" : "probit";
}

std::string to_string(FamilyKind kind) {
  return kind == FamilyKind::cumulative ? "cumulative" : "acat";
}

namespace {

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

void require_finite(double eta) {
  if (!std::isfinite(eta)) throw InvalidInput("predictor is not finite");
}

void require_finite(std::span<const double> eta) {
  for (double e : eta) require_finite(e);
}

}  // namespace

double link_eval(Link link, double eta) {
  require_finite(eta);
  switch (link.kind) {
    case LinkKind::logit: return clamp_prob(logistic(eta));
    case LinkKind::probit: return clamp_prob(0.5 * std::erfc(-eta / std::sqrt(2.0)));
  }
  return 0.5;
}

double link_inverse(Link link, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput(fmt::format("probability {} outside (0,1)", p));
  switch (link.kind) {
    case LinkKind::logit: return std::log(p) - std::log1p(-p);
    case LinkKind::probit: return boost::math::quantile(boost::math::normal_distribution<>(), p);
  }
  return 0.0;
}

double link_density(Link link, double eta) {
  require_finite(eta);
  switch (link.kind) {
    case LinkKind::logit: {
      const double f = logistic(eta);
      return f * (1.0 - f);
    }
    case LinkKind::probit:
      return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * M_PI);
  }
  return 0.0;
}

std::vector<double> category_probs_cumulative(Link link, std::span<const double> eta) {
  require_finite(eta);
  const std::size_t k = eta.size() + 1;
  for (std::size_t r = 1; r < eta.size(); ++r) {
    if (eta[r] < eta[r - 1]) {
      throw OrderingViolation(static_cast<int>(r + 1),
                              fmt::format("cumulative predictors out of order at threshold {}: "
                                          "eta_{} = {} < eta_{} = {}",
                                          r + 1, r + 1, eta[r], r, eta[r - 1]));
    }
  }
  std::vector<double> probs(k);
  double lower = 0.0;
  for (std::size_t r = 0; r + 1 < k; ++r) {
    const double upper = link_eval(link, eta[r]);
    probs[r] = std::max(upper - lower, 0.0);
    lower = upper;
  }
  probs[k - 1] = 1.0 - lower;
  return probs;
}

std::vector<double> category_probs_adjacent(Link link, std::span<const double> eta) {
  if (link.kind != LinkKind::logit) {
    throw InvalidInput("adjacent-categories family supports the logit link only");
  }
  require_finite(eta);
  const std::size_t k = eta.size() + 1;
  std::vector<double> log_w(k, 0.0);
  for (std::size_t r = 1; r < k; ++r) log_w[r] = log_w[r - 1] + eta[r - 1];
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double& w : log_w) {
    w = std::exp(w - top);
    total += w;
  }
  for (double& w : log_w) w /= total;
  return log_w;
}

std::vector<double> category_probs(Link link, Family family, std::span<const double> eta) {
  std::vector<double> work(eta.begin(), eta.end());
  if (family.reverse) {
    for (double& e : work) e = -e;
  }
  return family.kind == FamilyKind::cumulative ? category_probs_cumulative(link, work)
                                               : category_probs_adjacent(link, work);
}

double scaling_factor(Family family, int r, int k) {
  if (k < 2 || r < 1 || r > k - 1) {
    throw InvalidInput(fmt::format("category index {} outside 1..{}", r, k - 1));
  }
  double factor = static_cast<double>(r) - 0.5 * static_cast<double>(k);
  if (family.kind == FamilyKind::adjacent) factor = -factor;
  return family.reverse ? -factor : factor;
}

void observation_terms(Link link, Family family, std::span<const double> eta, int y,
                       bool want_weight, ObservationTerms& out) {
  const int m = static_cast<int>(eta.size());
  const int k = m + 1;
  out.gradient.setZero(m);
  if (want_weight) out.weight.setZero(m, m);

  // Everything below works on the forward representation; reversal negates eta.
  const double sign = family.reverse ? -1.0 : 1.0;
  Eigen::VectorXd e(m);
  for (int r = 0; r < m; ++r) e[r] = sign * eta[r];
  const std::span<const double> ev(e.data(), static_cast<std::size_t>(m));

  if (family.kind == FamilyKind::cumulative) {
    const std::vector<double> probs = category_probs_cumulative(link, ev);
    Eigen::VectorXd dens(m);
    for (int r = 0; r < m; ++r) dens[r] = link_density(link, e[r]);
    const double py = probs[y - 1];
    out.floored = py <= kProbFloor;
    const double py_safe = std::max(py, kProbFloor);
    out.log_prob = std::log(py_safe);
    // pi_y = F(e_y) - F(e_{y-1})
    if (y <= m) out.gradient[y - 1] = dens[y - 1] / py_safe;
    if (y >= 2) out.gradient[y - 2] = -dens[y - 2] / py_safe;
    if (want_weight) {
      // Tridiagonal: sum_c J_c J_c' / pi_c with J_c = f_c e_c - f_{c-1} e_{c-1}.
      for (int r = 0; r < m; ++r) {
        const double lo = std::max(probs[r], kProbFloor);
        const double hi = std::max(probs[r + 1], kProbFloor);
        out.weight(r, r) = dens[r] * dens[r] * (1.0 / lo + 1.0 / hi);
        if (r + 1 < m) {
          const double off = -dens[r] * dens[r + 1] / hi;
          out.weight(r, r + 1) = off;
          out.weight(r + 1, r) = off;
        }
      }
    }
  } else {
    const std::vector<double> probs = category_probs_adjacent(link, ev);
    // survivor[r] = P(Y > r+1) in 1-based categories, for threshold r+1.
    Eigen::VectorXd survivor(m);
    double tail = 0.0;
    for (int c = k - 1; c >= 1; --c) {
      tail += probs[c];
      survivor[c - 1] = tail;
    }
    const double py = probs[y - 1];
    out.floored = py <= kProbFloor;
    out.log_prob = std::log(std::max(py, kProbFloor));
    for (int r = 0; r < m; ++r) out.gradient[r] = (r + 1 < y ? 1.0 : 0.0) - survivor[r];
    if (want_weight) {
      for (int r = 0; r < m; ++r) {
        for (int s = r; s < m; ++s) {
          const double w = survivor[s] - survivor[r] * survivor[s];
          out.weight(r, s) = w;
          out.weight(s, r) = w;
        }
      }
    }
  }
  if (family.reverse) out.gradient = -out.gradient;
}

}  // namespace ordshift
