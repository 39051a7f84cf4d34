#include "ordshift/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ordshift/csv.hpp"
#include "ordshift/error.hpp"
#include "ordshift/formula.hpp"
#include "ordshift/inference.hpp"
#include "ordshift/report.hpp"
#include "ordshift/svg.hpp"

namespace ordshift {

namespace {

struct Options {
  std::string formula;
  std::string data;
  std::string family = "cumulative";
  std::string link = "logit";
  bool reverse = false;
  std::string structure;
  int nbs = 6;
  double conf = 0.95;
  std::string out;
  std::string star;
  std::vector<std::string> smooth;
  std::vector<std::string> categorical;
  std::string format = "text";
  std::optional<int> k;
};

struct SmoothRequest {
  std::string variable;
  std::string path;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::data: return 2;
    case ErrorCode::fit:
    case ErrorCode::ordering_violation:
    case ErrorCode::nesting_violation: return 3;
    default: return 4;
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError(fmt::format("cannot write '{}'", path));
  file << content;
  if (!file) throw UsageError(fmt::format("error while writing '{}'", path));
}

std::vector<SmoothRequest> parse_smooth_requests(const std::vector<std::string>& raw) {
  std::vector<SmoothRequest> out;
  for (const auto& item : raw) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      throw UsageError(fmt::format("--smooth expects <variable>:<svg path>, got '{}'", item));
    }
    out.push_back({item.substr(0, colon), item.substr(colon + 1)});
  }
  return out;
}

const FitResult* find_fit(const ComparisonTable& table, Structure structure) {
  for (const auto& row : table.rows) {
    if (row.structure == structure && row.fit) return &*row.fit;
  }
  return nullptr;
}

int run(const Options& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.conf > 0.0 && opt.conf < 1.0)) {
    throw UsageError(fmt::format("--conf must lie in (0, 1), got {}", opt.conf));
  }
  if (opt.nbs < 4) throw UsageError(fmt::format("--nbs must be at least 4, got {}", opt.nbs));
  const auto smooth_requests = parse_smooth_requests(opt.smooth);

  const FormulaSpec formula = parse_formula(opt.formula, opt.nbs);
  CsvOptions csv;
  csv.k = opt.k;
  csv.categorical = opt.categorical;
  const OrdinalDataset data = load_csv(opt.data, formula, csv);

  ModelSpec spec;
  spec.family = {opt.family == "acat" ? FamilyKind::adjacent : FamilyKind::cumulative, opt.reverse};
  spec.link = {opt.link == "probit" ? LinkKind::probit : LinkKind::logit};
  spec.location = formula.location;
  spec.dispersion = formula.dispersion;

  const bool ladder = opt.structure == "ladder";
  if (opt.structure.empty()) {
    spec.structure = formula.dispersion.empty() ? Structure::global : Structure::location_shift;
  } else if (opt.structure == "global") {
    spec.structure = Structure::global;
  } else if (opt.structure == "locshift") {
    spec.structure = Structure::location_shift;
  } else if (opt.structure == "catspecific") {
    spec.structure = Structure::category_specific;
  } else {
    spec.structure = Structure::location_shift;
  }
  if (!ladder && spec.structure == Structure::location_shift && formula.dispersion.empty()) {
    throw SpecError("location-shift structure needs dispersion terms after '|'");
  }

  // Response validation (all categories observed, family/link rules).
  {
    ModelSpec probe = spec;
    probe.structure = Structure::global;
    (void)make_problem(data, probe);
  }

  FitOptions fit_options;
  fit_options.max_iter = max_iter_from_env(fit_options.max_iter);

  const ComparisonTable table =
      ladder ? model_ladder(data, spec, fit_options) : single_model(data, spec, fit_options);

  ReportHeader header;
  header.formula = to_string(formula);
  header.family = spec.family;
  header.link = spec.link;
  header.response = formula.response;
  header.n = static_cast<int>(data.size());
  header.k = data.k;
  header.counts = data.category_counts();
  const std::string report = render_report(
      header, table, opt.format == "markdown" ? ReportFormat::markdown : ReportFormat::text);
  if (opt.out.empty()) {
    out << report;
  } else {
    write_file(opt.out, report);
  }

  const bool any_fit = std::any_of(table.rows.begin(), table.rows.end(),
                                   [](const LadderRow& r) { return r.fit.has_value(); });
  if (!any_fit) {
    throw FitError(table.rows.empty() ? "no model was fitted" : one_line(table.rows.front().failure));
  }

  if (!opt.star.empty()) {
    const FitResult* shift = find_fit(table, Structure::location_shift);
    if (!shift) {
      throw UsageError("--star needs a fitted location-shift model (use --structure locshift or ladder)");
    }
    const StarData stars = star_data(*shift, opt.conf);
    for (const auto& notice : stars.notices) err << "note: " << one_line(notice) << "\n";
    write_file(opt.star, render_star_svg(stars.points, formula.response));
  }

  for (const auto& request : smooth_requests) {
    const FitResult* source = find_fit(table, Structure::location_shift);
    if (!source) source = find_fit(table, Structure::global);
    if (!source) {
      throw UsageError("--smooth needs a fitted global or location-shift model");
    }
    write_file(request.path, render_smooth_svg(*source, request.variable));
  }

  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ordinal regression with location and dispersion effects"};
  app.name("ordshift");
  Options opt;
  app.add_option("--formula", opt.formula, "Model formula, e.g. \"y ~ x1 + s(x2) | x1\"")
      ->required();
  app.add_option("--data", opt.data, "CSV file with a header row")->required();
  app.add_option("--family", opt.family, "Model family")
      ->check(CLI::IsMember({"cumulative", "acat"}))
      ->capture_default_str();
  app.add_option("--link", opt.link, "Link function (acat supports logit only)")
      ->check(CLI::IsMember({"logit", "probit"}))
      ->capture_default_str();
  app.add_flag("--reverse", opt.reverse, "Use the reverse representation");
  app.add_option("--structure", opt.structure,
                 "Effect structure; defaults to locshift when the formula has a '|' side, "
                 "otherwise global")
      ->check(CLI::IsMember({"global", "locshift", "catspecific", "ladder"}));
  app.add_option("--nbs", opt.nbs, "B-spline basis size for s() terms")->capture_default_str();
  app.add_option("--conf", opt.conf, "Confidence level for star-plot intervals")
      ->capture_default_str();
  app.add_option("--out", opt.out, "Write the report here instead of stdout");
  app.add_option("--star", opt.star, "Write a star plot SVG of the location-shift fit");
  app.add_option("--smooth", opt.smooth, "Write smooth-function SVG, <variable>:<path>")
      ->allow_extra_args(false);
  app.add_option("--categorical", opt.categorical, "Columns to treat as categorical")
      ->delimiter(',');
  app.add_option("--format", opt.format, "Report format")
      ->check(CLI::IsMember({"text", "markdown"}))
      ->capture_default_str();
  app.add_option("--k", opt.k, "Number of response categories (default: max observed)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "E_USAGE: " << one_line(e.what()) << "\n";
    return 4;
  }

  try {
    return run(opt, out, err);
  } catch (const Error& e) {
    err << error_code_name(e.code()) << ": " << one_line(e.what()) << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace ordshift
