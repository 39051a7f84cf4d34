#pragma once

#include <string>
#include <vector>

namespace ordshift {

/// One raw covariate column. Numeric columns fill `numeric`; categorical
/// columns fill `values` and `levels` (first level is the reference).
struct Column {
  std::string name;
  bool categorical = false;
  std::vector<double> numeric;
  std::vector<std::string> values;
  std::vector<std::string> levels;
};

/// Ordinal responses in 1..k plus raw covariates.
struct OrdinalDataset {
  std::string response_name = "y";
  std::vector<int> response;
  int k = 0;
  std::vector<Column> columns;

  std::size_t size() const { return response.size(); }
  bool has_column(const std::string& name) const;
  /// Throws DataError when the column is absent.
  const Column& column(const std::string& name) const;
  /// Counts of categories 1..k (index 0 holds category 1).
  std::vector<int> category_counts() const;
};

}  // namespace ordshift
