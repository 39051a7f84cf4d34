#pragma once

#include <string>
#include <vector>

#include "ordshift/core_model.hpp"
#include "ordshift/inference.hpp"

namespace ordshift {

enum class ReportFormat { text, markdown };

struct ReportHeader {
  std::string formula;
  Family family;
  Link link;
  std::string response;
  int n = 0;
  int k = 0;
  std::vector<int> counts;
};

/// Comparison table (deviance, df, differences, p-values) followed by one
/// Wald table per fitted model. Deviances use 2 decimals, coefficients 3,
/// p-values 4.
std::string render_report(const ReportHeader& header, const ComparisonTable& table,
                          ReportFormat format);

}  // namespace ordshift
