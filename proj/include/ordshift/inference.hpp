#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ordshift/dataset.hpp"
#include "ordshift/design.hpp"
#include "ordshift/fit.hpp"

namespace ordshift {

double normal_cdf(double z);
double normal_quantile(double p);

/// Upper tail P(X > x) of a chi-square with `df` degrees of freedom.
double chisq_sf(double x, int df);

struct TestResult {
  double statistic = 0.0;  ///< deviance(nested) - deviance(full)
  int df = 0;
  double p_value = 1.0;
};

/// Tolerance on negative deviance differences before nesting is rejected.
inline constexpr double kNestingTolerance = 1e-6;

/// Likelihood-ratio test of `nested` within `full`.
TestResult lrt(const FitResult& nested, const FitResult& full);

struct LadderRow {
  Structure structure = Structure::global;
  std::string label;
  std::optional<FitResult> fit;
  std::string failure;  ///< non-empty when the fit threw
};

struct SmoothTest {
  std::string variable;
  bool dispersion = false;
  std::string against;  ///< "linear" or "omitted"
  std::optional<TestResult> test;
  std::string failure;
};

/// Rows ordered from the richest model down; tests[i] compares rows[i]
/// (nested) with rows[i-1] and is empty for i == 0 or failed fits.
struct ComparisonTable {
  std::vector<LadderRow> rows;
  std::vector<std::optional<TestResult>> tests;
  std::vector<SmoothTest> smooth_tests;
};

std::string structure_label(Structure structure);

/// Fits the category-specific, location-shift and global versions of
/// `base`. An empty dispersion side reuses the location terms. Failures are
/// recorded per row; the ladder is always produced.
ComparisonTable model_ladder(const OrdinalDataset& data, const ModelSpec& base,
                             const FitOptions& options = {});

/// Wraps a single requested structure in the same table shape.
ComparisonTable single_model(const OrdinalDataset& data, const ModelSpec& spec,
                             const FitOptions& options = {});

/// For every smooth term of a global or location-shift spec, LRTs of the
/// smooth fit against the term made linear and against the term omitted.
std::vector<SmoothTest> smooth_term_tests(const OrdinalDataset& data, const ModelSpec& spec,
                                          const FitResult& full, const FitOptions& options = {});

struct WaldRow {
  std::string name;
  double coef = 0.0;
  std::optional<double> se;
  std::optional<double> z;
  std::optional<double> p;
};

struct WaldTable {
  std::vector<WaldRow> intercepts;
  std::vector<WaldRow> location;
  std::vector<WaldRow> dispersion;
};

WaldTable wald_table(const FitResult& fit);

struct Interval {
  double point = 1.0;
  double lo = 1.0;
  double hi = 1.0;
};

/// (e^alpha, e^beta) with exponentiated Wald intervals for one column.
struct StarPoint {
  std::string variable;
  Interval location;
  Interval dispersion;
};

struct StarData {
  std::vector<StarPoint> points;
  std::vector<std::string> notices;  ///< columns skipped and why
};

StarData star_data(const FitResult& fit, double level = 0.95);

struct SmoothCurve {
  std::string variable;
  bool dispersion = false;
  std::vector<double> x;
  std::vector<double> f;
};

/// Centered fitted functions of `variable` on an evenly spaced grid over
/// the data range, one per smooth term. Throws UsageError when the variable
/// has no smooth term in a global or location-shift fit.
std::vector<SmoothCurve> smooth_curves(const FitResult& fit, const std::string& variable,
                                       int grid_points = 200);

}  // namespace ordshift
