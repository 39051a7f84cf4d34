#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "ordshift/dataset.hpp"
#include "ordshift/formula.hpp"

namespace ordshift {

struct CsvOptions {
  std::optional<int> k;                  ///< number of categories; max observed when unset
  std::vector<std::string> categorical;  ///< columns forced to categorical
};

/// Reads the response and every variable named in `formula`. Columns whose
/// values are all non-numeric, or that are listed in `categorical`, become
/// categorical: numeric-looking levels sort numerically, text levels keep
/// first-seen order. Throws DataError naming the row and column.
OrdinalDataset read_csv(std::istream& in, const FormulaSpec& formula, const CsvOptions& options = {});

OrdinalDataset load_csv(const std::string& path, const FormulaSpec& formula,
                        const CsvOptions& options = {});

}  // namespace ordshift
