#pragma once

#include <string>
#include <vector>

#include "ordshift/inference.hpp"

namespace ordshift {

/// Star plot: x axis e^alpha (dispersion), y axis e^beta (location), both
/// log-scaled, with reference lines at 1. Each point is a cross whose arms
/// span the two confidence intervals.
std::string render_star_svg(const std::vector<StarPoint>& points, const std::string& title = "");

/// One panel per curve (location, then dispersion).
std::string render_smooth_svg(const std::vector<SmoothCurve>& curves);

/// Convenience: smooth_curves(fit, variable) rendered. Throws UsageError
/// when the variable has no smooth term.
std::string render_smooth_svg(const FitResult& fit, const std::string& variable);

}  // namespace ordshift
