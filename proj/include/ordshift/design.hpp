#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordshift/core_model.hpp"
#include "ordshift/dataset.hpp"
#include "ordshift/splines.hpp"

namespace ordshift {

/// How covariates enter the k-1 predictors.
enum class Structure { global, location_shift, category_specific };

std::string to_string(Structure structure);

/// A formula term. Smooth terms expand into a centered B-spline block.
struct Term {
  std::string variable;
  bool smooth = false;
  int basis_count = 6;

  bool operator==(const Term&) const = default;
};

struct ModelSpec {
  Family family;
  Link link;
  Structure structure = Structure::location_shift;
  std::vector<Term> location;
  std::vector<Term> dispersion;
};

struct ColumnInfo {
  std::string label;     ///< e.g. "Age", "Residence2", "s(age)3"
  std::string variable;  ///< source variable
  bool smooth = false;
};

/// Centered spline block for one smooth term. Basis function 1 is dropped
/// and the remaining count-1 columns are centered over the sample, so the
/// fitted function has sample mean zero.
struct SmoothTerm {
  std::string variable;
  bool dispersion = false;
  BasisDef basis;
  Eigen::VectorXd means;  ///< sample means of basis functions 2..count
  int first_column = 0;   ///< offset of the block within X (or Z)
  int width = 0;

  /// Centered function value at x for block coefficients `coef`.
  double evaluate(std::span<const double> coef, double x) const;
};

struct ExpandedDesign {
  Eigen::MatrixXd X;  ///< location columns (all covariates for category-specific)
  Eigen::MatrixXd Z;  ///< dispersion columns (location-shift only)
  std::vector<ColumnInfo> x_columns;
  std::vector<ColumnInfo> z_columns;
  std::vector<SmoothTerm> smooths;
};

/// 0/1 indicator columns for levels 2..L. Throws DataError on a value
/// outside `levels`.
Eigen::MatrixXd encode_dummies(const std::vector<std::string>& values,
                               const std::vector<std::string>& levels,
                               const std::string& variable = "");

/// Expands the raw covariates named by `spec` into X and Z. Global
/// structure ignores dispersion terms; category-specific structure uses
/// the union of location and dispersion columns as X.
ExpandedDesign expand_design(const OrdinalDataset& data, const ModelSpec& spec);

/// Parameter vector layout: k-1 intercepts, then location coefficients
/// (one block of p, or k-1 blocks of p when category-specific), then m
/// dispersion coefficients.
struct ParamLayout {
  int k = 2;
  int p = 0;
  int m = 0;
  Structure structure = Structure::global;
  std::vector<std::string> names;
  std::vector<std::string> x_labels;
  std::vector<std::string> z_labels;

  int size() const;
  int intercept(int r) const { return r - 1; }
  /// Slot of location column j (0-based) in predictor r (1-based).
  int location(int j, int r = 1) const;
  int dispersion(int j) const { return (k - 1) + location_width() + j; }
  int location_width() const;
};

ParamLayout make_layout(int k, Structure structure, const std::vector<ColumnInfo>& x_columns,
                        const std::vector<ColumnInfo>& z_columns);

/// Rows of the (k-1) x size() design for one observation, so that
/// eta_r = rows.row(r-1) * params. Throws SpecError on dimension mismatch.
void build_design_rows(const ParamLayout& layout, Family family, std::span<const double> x_row,
                       std::span<const double> z_row, Eigen::Ref<Eigen::MatrixXd> rows);

Eigen::MatrixXd build_design_rows(const ParamLayout& layout, Family family,
                                  std::span<const double> x_row, std::span<const double> z_row);

/// beta_r = beta + scaling_factor(family, r, k) * alpha for r = 1..k-1.
/// The default family gives beta_r = beta + (r - k/2) alpha.
std::vector<Eigen::VectorXd> constraint_map(const Eigen::VectorXd& beta,
                                            const Eigen::VectorXd& alpha, int k,
                                            Family family = {});

/// An immutable fitting problem: responses, expanded design and layout.
struct Problem {
  Family family;
  Link link;
  int k = 2;
  std::vector<int> y;
  ExpandedDesign design;
  ParamLayout layout;

  int n() const { return static_cast<int>(y.size()); }
};

/// Validates responses (all of 1..k observed) and builds the problem.
Problem make_problem(const OrdinalDataset& data, const ModelSpec& spec);

/// Maps location-shift parameters onto a category-specific layout whose
/// columns include every location and dispersion column (matched by label).
Eigen::VectorXd embed_location_shift(const ParamLayout& shift, const Eigen::VectorXd& params,
                                     const ParamLayout& specific, Family family);

}  // namespace ordshift
