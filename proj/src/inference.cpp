#include "ordshift/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput(fmt::format("quantile level {} outside (0,1)", p));
  return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

double chisq_sf(double x, int df) {
  if (df < 1) throw InvalidInput(fmt::format("chi-square df must be positive, got {}", df));
  if (!(x >= 0.0)) throw InvalidInput(fmt::format("chi-square statistic must be >= 0, got {}", x));
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

TestResult lrt(const FitResult& nested, const FitResult& full) {
  if (nested.n != full.n || nested.k != full.k) {
    throw InvalidInput("likelihood-ratio test needs fits on the same data");
  }
  const int df = static_cast<int>(full.params.size() - nested.params.size());
  if (df <= 0) {
    throw NestingViolation(fmt::format("full model has {} parameters, nested model {}",
                                       full.params.size(), nested.params.size()));
  }
  double stat = nested.deviance - full.deviance;
  if (stat < -kNestingTolerance) {
    throw NestingViolation(fmt::format(
        "deviance of the larger model exceeds the nested one by {:.3g}; models are not nested or "
        "a fit did not converge",
        -stat));
  }
  stat = std::max(stat, 0.0);
  return {stat, df, chisq_sf(stat, df)};
}

std::string structure_label(Structure structure) {
  switch (structure) {
    case Structure::category_specific: return "Category-specific effects";
    case Structure::location_shift: return "Location-shift model";
    case Structure::global: return "Global effects";
  }
  return "?";
}

namespace {

// Global parameters placed into a location-shift layout with alpha = 0.
Eigen::VectorXd embed_global(const ParamLayout& global, const Eigen::VectorXd& params,
                             const ParamLayout& shift) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(shift.size());
  for (int r = 1; r < shift.k; ++r) out[shift.intercept(r)] = params[global.intercept(r)];
  for (int j = 0; j < global.p; ++j) {
    const auto it = std::find(shift.x_labels.begin(), shift.x_labels.end(), global.x_labels[j]);
    if (it == shift.x_labels.end()) throw SpecError("global column missing from shift layout");
    out[shift.location(static_cast<int>(it - shift.x_labels.begin()))] = params[global.location(j)];
  }
  return out;
}

bool better(const FitResult& a, const FitResult& b) {
  if (a.converged != b.converged) return a.converged;
  return a.loglik > b.loglik;
}

// Fits from `start` when given, falling back to the default start if that
// run does not converge.
FitResult fit_with_start(const Problem& problem, const FitOptions& options,
                         const std::optional<Eigen::VectorXd>& start) {
  if (!start) return fit(problem, options);
  FitOptions seeded = options;
  seeded.start = start;
  FitResult first = fit(problem, seeded);
  if (first.converged) return first;
  FitResult second = fit(problem, options);
  return better(second, first) ? second : first;
}

LadderRow run_row(const OrdinalDataset& data, ModelSpec spec, Structure structure,
                  const FitOptions& options,
                  const std::function<std::optional<Eigen::VectorXd>(const Problem&)>& start) {
  LadderRow row;
  row.structure = structure;
  row.label = structure_label(structure);
  spec.structure = structure;
  try {
    const Problem problem = make_problem(data, spec);
    row.fit = fit_with_start(problem, options, start(problem));
  } catch (const Error& e) {
    row.failure = e.what();
  }
  return row;
}

std::optional<TestResult> ladder_test(const LadderRow& nested, const LadderRow& full) {
  if (!nested.fit || !full.fit || !nested.fit->converged || !full.fit->converged) {
    return std::nullopt;
  }
  try {
    return lrt(*nested.fit, *full.fit);
  } catch (const NestingViolation&) {
    return std::nullopt;
  }
}

void add_smooth_tests(const OrdinalDataset& data, const ModelSpec& spec, const LadderRow& row,
                      const FitOptions& options, ComparisonTable& table) {
  if (!row.fit || !row.fit->converged) return;
  if (row.fit->smooths.empty()) return;
  ModelSpec shaped = spec;
  shaped.structure = row.structure;
  table.smooth_tests = smooth_term_tests(data, shaped, *row.fit, options);
}

}  // namespace

ComparisonTable model_ladder(const OrdinalDataset& data, const ModelSpec& base,
                             const FitOptions& options) {
  ModelSpec spec = base;
  if (spec.dispersion.empty()) spec.dispersion = spec.location;

  const auto no_start = [](const Problem&) { return std::optional<Eigen::VectorXd>(); };
  LadderRow global = run_row(data, spec, Structure::global, options, no_start);
  LadderRow shift = run_row(data, spec, Structure::location_shift, options,
                            [&](const Problem& problem) -> std::optional<Eigen::VectorXd> {
                              if (!global.fit || !global.fit->converged) return std::nullopt;
                              return embed_global(global.fit->layout, global.fit->params,
                                                  problem.layout);
                            });
  LadderRow specific = run_row(data, spec, Structure::category_specific, options,
                               [&](const Problem& problem) -> std::optional<Eigen::VectorXd> {
                                 if (!shift.fit || !shift.fit->converged) return std::nullopt;
                                 return embed_location_shift(shift.fit->layout, shift.fit->params,
                                                             problem.layout, problem.family);
                               });

  ComparisonTable table;
  table.tests.push_back(std::nullopt);
  table.tests.push_back(ladder_test(shift, specific));
  table.tests.push_back(ladder_test(global, shift));
  add_smooth_tests(data, spec, shift, options, table);
  table.rows.push_back(std::move(specific));
  table.rows.push_back(std::move(shift));
  table.rows.push_back(std::move(global));
  return table;
}

ComparisonTable single_model(const OrdinalDataset& data, const ModelSpec& spec,
                             const FitOptions& options) {
  ComparisonTable table;
  const auto no_start = [](const Problem&) { return std::optional<Eigen::VectorXd>(); };
  LadderRow row = run_row(data, spec, spec.structure, options, no_start);
  if (spec.structure != Structure::category_specific) {
    add_smooth_tests(data, spec, row, options, table);
  }
  table.rows.push_back(std::move(row));
  table.tests.push_back(std::nullopt);
  return table;
}

std::vector<SmoothTest> smooth_term_tests(const OrdinalDataset& data, const ModelSpec& spec,
                                          const FitResult& full, const FitOptions& options) {
  std::vector<SmoothTest> out;
  if (spec.structure == Structure::category_specific) return out;
  const auto visit = [&](bool dispersion) {
    const auto& terms = dispersion ? spec.dispersion : spec.location;
    if (dispersion && spec.structure != Structure::location_shift) return;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (!terms[t].smooth) continue;
      for (const char* against : {"linear", "omitted"}) {
        SmoothTest test;
        test.variable = terms[t].variable;
        test.dispersion = dispersion;
        test.against = against;
        ModelSpec reduced = spec;
        auto& side = dispersion ? reduced.dispersion : reduced.location;
        if (std::string(against) == "linear") {
          side[t].smooth = false;
        } else {
          side.erase(side.begin() + static_cast<std::ptrdiff_t>(t));
        }
        try {
          const FitResult nested = fit(make_problem(data, reduced), options);
          if (!nested.converged) {
            test.failure = "reduced model did not converge";
          } else {
            test.test = lrt(nested, full);
          }
        } catch (const Error& e) {
          test.failure = e.what();
        }
        out.push_back(std::move(test));
      }
    }
  };
  visit(false);
  visit(true);
  return out;
}

namespace {

WaldRow wald_row(const FitResult& fit, const std::vector<std::optional<double>>& se, int slot) {
  WaldRow row;
  row.name = fit.layout.names[slot];
  row.coef = fit.params[slot];
  row.se = se[slot];
  if (row.se) {
    if (*row.se > 0.0) {
      row.z = row.coef / *row.se;
      row.p = std::erfc(std::abs(*row.z) / std::sqrt(2.0));
    } else if (row.coef == 0.0) {
      row.z = 0.0;
      row.p = 1.0;
    }
  }
  return row;
}

}  // namespace

WaldTable wald_table(const FitResult& fit) {
  const auto se = standard_errors(fit);
  const ParamLayout& layout = fit.layout;
  WaldTable table;
  for (int r = 1; r < layout.k; ++r) table.intercepts.push_back(wald_row(fit, se, layout.intercept(r)));
  const int first_location = layout.k - 1;
  for (int s = 0; s < layout.location_width(); ++s) {
    table.location.push_back(wald_row(fit, se, first_location + s));
  }
  for (int j = 0; j < layout.m; ++j) table.dispersion.push_back(wald_row(fit, se, layout.dispersion(j)));
  return table;
}

StarData star_data(const FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidInput(fmt::format("confidence level {} outside (0,1)", level));
  }
  const double zq = normal_quantile(1.0 - 0.5 * (1.0 - level));
  const auto se = standard_errors(fit);
  const ParamLayout& layout = fit.layout;
  StarData out;
  if (layout.structure != Structure::location_shift) {
    out.notices.push_back("star data needs a location-shift fit");
    return out;
  }
  const auto is_smooth = [&](const std::string& label) { return label.rfind("s(", 0) == 0; };
  const auto interval = [&](int slot) {
    const double theta = fit.params[slot];
    const double half = zq * *se[slot];
    return Interval{std::exp(theta), std::exp(theta - half), std::exp(theta + half)};
  };
  for (int j = 0; j < layout.p; ++j) {
    const std::string& label = layout.x_labels[j];
    if (is_smooth(label)) continue;
    const auto it = std::find(layout.z_labels.begin(), layout.z_labels.end(), label);
    if (it == layout.z_labels.end()) {
      out.notices.push_back(fmt::format("{}: no dispersion effect, skipped", label));
      continue;
    }
    const int loc = layout.location(j);
    const int disp = layout.dispersion(static_cast<int>(it - layout.z_labels.begin()));
    if (!se[loc] || !se[disp]) {
      out.notices.push_back(fmt::format("{}: standard error unavailable, skipped", label));
      continue;
    }
    out.points.push_back({label, interval(loc), interval(disp)});
  }
  for (const auto& label : layout.z_labels) {
    if (is_smooth(label)) continue;
    if (std::find(layout.x_labels.begin(), layout.x_labels.end(), label) == layout.x_labels.end()) {
      out.notices.push_back(fmt::format("{}: no location effect, skipped", label));
    }
  }
  return out;
}

std::vector<SmoothCurve> smooth_curves(const FitResult& fit, const std::string& variable,
                                       int grid_points) {
  if (fit.layout.structure == Structure::category_specific) {
    throw UsageError("smooth curves are defined for global and location-shift fits only");
  }
  if (grid_points < 2) throw InvalidInput("smooth curve grid needs at least 2 points");
  std::vector<SmoothCurve> out;
  for (const auto& term : fit.smooths) {
    if (term.variable != variable) continue;
    const int offset = term.dispersion ? fit.layout.dispersion(term.first_column)
                                       : fit.layout.location(term.first_column);
    const std::span<const double> coef(fit.params.data() + offset,
                                       static_cast<std::size_t>(term.width));
    SmoothCurve curve;
    curve.variable = variable;
    curve.dispersion = term.dispersion;
    const double lo = term.basis.lo;
    const double hi = term.basis.hi;
    for (int g = 0; g < grid_points; ++g) {
      const double x = g + 1 == grid_points ? hi : lo + (hi - lo) * g / (grid_points - 1);
      curve.x.push_back(x);
      curve.f.push_back(term.evaluate(coef, x));
    }
    out.push_back(std::move(curve));
  }
  if (out.empty()) {
    throw UsageError(fmt::format("variable '{}' has no smooth term in this fit", variable));
  }
  return out;
}

}  // namespace ordshift
