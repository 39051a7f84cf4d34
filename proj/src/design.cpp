#include "ordshift/design.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

bool OrdinalDataset::has_column(const std::string& name) const {
  return std::any_of(columns.begin(), columns.end(),
                     [&](const Column& c) { return c.name == name; });
}

const Column& OrdinalDataset::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw DataError(fmt::format("missing column '{}'", name));
}

std::vector<int> OrdinalDataset::category_counts() const {
  std::vector<int> counts(std::max(k, 0), 0);
  for (int y : response) {
    if (y >= 1 && y <= k) ++counts[y - 1];
  }
  return counts;
}

std::string to_string(Structure structure) {
  switch (structure) {
    case Structure::global: return "global";
    case Structure::location_shift: return "locshift";
    case Structure::category_specific: return "catspecific";
  }
  return "?";
}

double SmoothTerm::evaluate(std::span<const double> coef, double x) const {
  const Eigen::VectorXd b = bspline_basis(x, basis);
  double f = 0.0;
  for (int s = 0; s < width; ++s) f += coef[s] * (b[s + 1] - means[s]);
  return f;
}

Eigen::MatrixXd encode_dummies(const std::vector<std::string>& values,
                               const std::vector<std::string>& levels,
                               const std::string& variable) {
  std::map<std::string, int> index;
  for (std::size_t j = 0; j < levels.size(); ++j) index.emplace(levels[j], static_cast<int>(j));
  const auto n = static_cast<Eigen::Index>(values.size());
  const auto width = static_cast<Eigen::Index>(levels.empty() ? 0 : levels.size() - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, width);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = index.find(values[i]);
    if (it == index.end()) {
      throw DataError(fmt::format("unseen level '{}' in variable '{}' (row {})", values[i],
                                  variable, i + 1));
    }
    if (it->second > 0) out(i, it->second - 1) = 1.0;
  }
  return out;
}

namespace {

struct TermBlock {
  Eigen::MatrixXd columns;
  std::vector<ColumnInfo> info;
  std::optional<SmoothTerm> smooth;
};

TermBlock expand_term(const OrdinalDataset& data, const Term& term, bool dispersion) {
  const Column& col = data.column(term.variable);
  TermBlock block;
  if (col.categorical) {
    if (term.smooth) {
      throw SpecError(fmt::format("smooth term s({}) requires a numeric variable", term.variable));
    }
    block.columns = encode_dummies(col.values, col.levels, col.name);
    for (std::size_t j = 1; j < col.levels.size(); ++j) {
      block.info.push_back({col.name + col.levels[j], col.name, false});
    }
    return block;
  }
  if (!term.smooth) {
    block.columns = Eigen::Map<const Eigen::VectorXd>(col.numeric.data(),
                                                      static_cast<Eigen::Index>(col.numeric.size()));
    block.info.push_back({col.name, col.name, false});
    return block;
  }
  SmoothTerm smooth;
  smooth.variable = col.name;
  smooth.dispersion = dispersion;
  smooth.basis = knot_sequence(col.numeric, term.basis_count, 3);
  const Eigen::MatrixXd full = bspline_matrix(col.numeric, smooth.basis);
  const CenteredBasis centered = center_basis(full.rightCols(full.cols() - 1));
  smooth.means = centered.means;
  smooth.width = static_cast<int>(centered.matrix.cols());
  block.columns = centered.matrix;
  for (int s = 2; s <= term.basis_count; ++s) {
    block.info.push_back({fmt::format("s({}){}", col.name, s), col.name, true});
  }
  block.smooth = std::move(smooth);
  return block;
}

void check_unique(const std::vector<Term>& terms, const char* side) {
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (!seen.insert(t.variable).second) {
      throw SpecError(fmt::format("variable '{}' appears twice in the {} terms", t.variable, side));
    }
  }
}

void append(Eigen::MatrixXd& target, std::vector<ColumnInfo>& info, const TermBlock& block,
            const std::vector<std::size_t>& keep) {
  const Eigen::Index start = target.cols();
  target.conservativeResize(block.columns.rows(), start + static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    target.col(start + static_cast<Eigen::Index>(j)) =
        block.columns.col(static_cast<Eigen::Index>(keep[j]));
    info.push_back(block.info[keep[j]]);
  }
}

std::vector<std::size_t> all_columns(const TermBlock& block) {
  std::vector<std::size_t> idx(block.info.size());
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
  return idx;
}

}  // namespace

ExpandedDesign expand_design(const OrdinalDataset& data, const ModelSpec& spec) {
  check_unique(spec.location, "location");
  check_unique(spec.dispersion, "dispersion");
  const auto n = static_cast<Eigen::Index>(data.size());
  ExpandedDesign out;
  out.X.resize(n, 0);
  out.Z.resize(n, 0);

  for (const auto& term : spec.location) {
    TermBlock block = expand_term(data, term, false);
    if (block.smooth) {
      block.smooth->first_column = static_cast<int>(out.X.cols());
      out.smooths.push_back(*block.smooth);
    }
    append(out.X, out.x_columns, block, all_columns(block));
  }

  if (spec.structure == Structure::global) return out;

  for (const auto& term : spec.dispersion) {
    TermBlock block = expand_term(data, term, true);
    if (spec.structure == Structure::location_shift) {
      if (block.smooth) {
        block.smooth->first_column = static_cast<int>(out.Z.cols());
        out.smooths.push_back(*block.smooth);
      }
      append(out.Z, out.z_columns, block, all_columns(block));
    } else {
      // Category-specific: dispersion columns join X unless already present.
      std::vector<std::size_t> keep;
      for (std::size_t j = 0; j < block.info.size(); ++j) {
        const bool present =
            std::any_of(out.x_columns.begin(), out.x_columns.end(),
                        [&](const ColumnInfo& c) { return c.label == block.info[j].label; });
        if (!present) keep.push_back(j);
      }
      if (block.smooth && keep.size() == block.info.size()) {
        block.smooth->first_column = static_cast<int>(out.X.cols());
        block.smooth->dispersion = false;
        out.smooths.push_back(*block.smooth);
      }
      append(out.X, out.x_columns, block, keep);
    }
  }
  return out;
}

int ParamLayout::location_width() const {
  return structure == Structure::category_specific ? (k - 1) * p : p;
}

int ParamLayout::size() const { return (k - 1) + location_width() + m; }

int ParamLayout::location(int j, int r) const {
  if (structure == Structure::category_specific) return (k - 1) + (r - 1) * p + j;
  return (k - 1) + j;
}

ParamLayout make_layout(int k, Structure structure, const std::vector<ColumnInfo>& x_columns,
                        const std::vector<ColumnInfo>& z_columns) {
  ParamLayout layout;
  layout.k = k;
  layout.structure = structure;
  layout.p = static_cast<int>(x_columns.size());
  layout.m = structure == Structure::location_shift ? static_cast<int>(z_columns.size()) : 0;
  for (const auto& c : x_columns) layout.x_labels.push_back(c.label);
  if (structure == Structure::location_shift) {
    for (const auto& c : z_columns) layout.z_labels.push_back(c.label);
  }
  layout.names.resize(layout.size());
  for (int r = 1; r < k; ++r) layout.names[layout.intercept(r)] = fmt::format("(Intercept):{}", r);
  if (structure == Structure::category_specific) {
    for (int r = 1; r < k; ++r) {
      for (int j = 0; j < layout.p; ++j) {
        layout.names[layout.location(j, r)] = fmt::format("{}:{}", layout.x_labels[j], r);
      }
    }
  } else {
    for (int j = 0; j < layout.p; ++j) layout.names[layout.location(j)] = layout.x_labels[j];
  }
  for (int j = 0; j < layout.m; ++j) layout.names[layout.dispersion(j)] = layout.z_labels[j];
  return layout;
}

void build_design_rows(const ParamLayout& layout, Family family, std::span<const double> x_row,
                       std::span<const double> z_row, Eigen::Ref<Eigen::MatrixXd> rows) {
  const int k = layout.k;
  if (static_cast<int>(x_row.size()) != layout.p ||
      (layout.m > 0 && static_cast<int>(z_row.size()) != layout.m) ||
      rows.rows() != k - 1 || rows.cols() != layout.size()) {
    throw SpecError(fmt::format("design row dimensions do not match layout (p={}, m={}, k={})",
                                layout.p, layout.m, k));
  }
  rows.setZero();
  for (int r = 1; r < k; ++r) {
    auto row = rows.row(r - 1);
    row[layout.intercept(r)] = 1.0;
    for (int j = 0; j < layout.p; ++j) row[layout.location(j, r)] = x_row[j];
    if (layout.m > 0) {
      const double s = scaling_factor(family, r, k);
      for (int j = 0; j < layout.m; ++j) row[layout.dispersion(j)] = s * z_row[j];
    }
  }
}

Eigen::MatrixXd build_design_rows(const ParamLayout& layout, Family family,
                                  std::span<const double> x_row, std::span<const double> z_row) {
  Eigen::MatrixXd rows(layout.k - 1, layout.size());
  build_design_rows(layout, family, x_row, z_row, rows);
  return rows;
}

std::vector<Eigen::VectorXd> constraint_map(const Eigen::VectorXd& beta,
                                            const Eigen::VectorXd& alpha, int k, Family family) {
  if (beta.size() != alpha.size()) {
    throw SpecError(fmt::format("constraint map needs equal lengths, got {} and {}", beta.size(),
                                alpha.size()));
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(k - 1);
  for (int r = 1; r < k; ++r) out.push_back(beta + scaling_factor(family, r, k) * alpha);
  return out;
}

Eigen::VectorXd embed_location_shift(const ParamLayout& shift, const Eigen::VectorXd& params,
                                     const ParamLayout& specific, Family family) {
  if (shift.structure == Structure::category_specific ||
      specific.structure != Structure::category_specific || shift.k != specific.k ||
      params.size() != shift.size()) {
    throw SpecError("embed_location_shift: incompatible layouts");
  }
  const int k = shift.k;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(specific.size());
  for (int r = 1; r < k; ++r) out[specific.intercept(r)] = params[shift.intercept(r)];
  for (int j = 0; j < specific.p; ++j) {
    const std::string& label = specific.x_labels[j];
    double beta = 0.0;
    double alpha = 0.0;
    const auto xi = std::find(shift.x_labels.begin(), shift.x_labels.end(), label);
    if (xi != shift.x_labels.end()) {
      beta = params[shift.location(static_cast<int>(xi - shift.x_labels.begin()))];
    }
    const auto zi = std::find(shift.z_labels.begin(), shift.z_labels.end(), label);
    if (zi != shift.z_labels.end() && shift.m > 0) {
      alpha = params[shift.dispersion(static_cast<int>(zi - shift.z_labels.begin()))];
    }
    const auto mapped = constraint_map(Eigen::VectorXd::Constant(1, beta),
                                       Eigen::VectorXd::Constant(1, alpha), k, family);
    for (int r = 1; r < k; ++r) out[specific.location(j, r)] = mapped[r - 1][0];
  }
  for (const auto& label : shift.x_labels) {
    if (std::find(specific.x_labels.begin(), specific.x_labels.end(), label) ==
        specific.x_labels.end()) {
      throw SpecError(fmt::format("column '{}' missing from the category-specific layout", label));
    }
  }
  return out;
}

Problem make_problem(const OrdinalDataset& data, const ModelSpec& spec) {
  if (data.size() == 0) throw DataError("dataset is empty");
  if (data.k < 2) throw DataError("response needs at least 2 categories");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.response[i];
    if (y < 1 || y > data.k) {
      throw DataError(fmt::format("row {}: response {} outside categories 1..{}", i + 1, y, data.k));
    }
  }
  const auto counts = data.category_counts();
  for (int r = 0; r < data.k; ++r) {
    if (counts[r] == 0) {
      throw DataError(fmt::format(
          "response category {} is never observed; merge it with a neighbouring category", r + 1));
    }
  }
  if (spec.family.kind == FamilyKind::adjacent && spec.link.kind != LinkKind::logit) {
    throw SpecError("the adjacent-categories family supports the logit link only");
  }
  Problem problem;
  problem.family = spec.family;
  problem.link = spec.link;
  problem.k = data.k;
  problem.y = data.response;
  problem.design = expand_design(data, spec);
  problem.layout =
      make_layout(data.k, spec.structure, problem.design.x_columns, problem.design.z_columns);
  if (problem.layout.m > 0 && data.k == 2) {
    throw SpecError("dispersion terms are not identified with k = 2 categories");
  }
  return problem;
}

}  // namespace ordshift
