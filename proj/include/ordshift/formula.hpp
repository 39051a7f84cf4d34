#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ordshift/design.hpp"

namespace ordshift {

/// `y ~ x1 + s(x2) | z1 + s(z2, 4)`: location terms left of `|`,
/// dispersion terms right of it. `1` stands for "no terms".
struct FormulaSpec {
  std::string response;
  std::vector<Term> location;
  std::vector<Term> dispersion;

  bool operator==(const FormulaSpec&) const = default;
};

/// Parses a formula. `s(name)` uses `default_basis` functions; `s(name, M)`
/// sets M explicitly. Throws ParseError with the offending position.
FormulaSpec parse_formula(std::string_view text, int default_basis = 6);

/// Canonical text form; parse_formula(to_string(f)) == f.
std::string to_string(const FormulaSpec& formula);

}  // namespace ordshift
