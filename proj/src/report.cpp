#include "ordshift/report.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

namespace ordshift {

namespace {

using Row = std::vector<std::string>;

std::string escape_markdown(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

// Fixed-width text table, or a pipe table for markdown. The first column
// is left-aligned, the rest right-aligned.
std::string render_table(const Row& head, const std::vector<Row>& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::markdown) {
    const auto line = [](const Row& cells) {
      std::string s = "|";
      for (const auto& c : cells) s += " " + escape_markdown(c) + " |";
      return s + "\n";
    };
    out += line(head);
    out += "|";
    for (std::size_t j = 0; j < head.size(); ++j) out += j == 0 ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& r : rows) out += line(r);
    return out;
  }
  std::vector<std::size_t> width(head.size(), 0);
  const auto measure = [&](const Row& r) {
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  };
  measure(head);
  for (const auto& r : rows) measure(r);
  const auto line = [&](const Row& r) {
    std::string s;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j == 0) {
        s += fmt::format("{:<{}}", r[j], width[j]);
      } else {
        s += fmt::format("  {:>{}}", r[j], width[j]);
      }
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  out += line(head);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string heading(const std::string& title, int level, ReportFormat format) {
  if (format == ReportFormat::markdown) return std::string(level + 1, '#') + " " + title + "\n\n";
  const char rule = level == 1 ? '=' : '-';
  return title + "\n" + std::string(title.size(), rule) + "\n";
}

std::string fixed(double v, int decimals) {
  std::string s = fmt::format("{:.{}f}", v, decimals);
  // Avoid "-0.000".
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string opt(const std::optional<double>& v, int decimals) {
  return v ? fixed(*v, decimals) : "";
}

Row wald_cells(const WaldRow& r) {
  return {r.name, fixed(r.coef, 3), opt(r.se, 3), opt(r.z, 3), opt(r.p, 4)};
}

std::string wald_block(const std::string& title, const std::vector<WaldRow>& rows,
                       ReportFormat format) {
  if (rows.empty()) return "";
  std::vector<Row> cells;
  for (const auto& r : rows) cells.push_back(wald_cells(r));
  std::string out = heading(title, 3, format);
  out += render_table({"", "coef", "se", "z value", "p-value"}, cells, format);
  out += "\n";
  return out;
}

std::string family_text(const ReportHeader& h) {
  return fmt::format("family {}, link {}, reverse {}", to_string(h.family.kind),
                     to_string(h.link.kind), h.family.reverse ? "yes" : "no");
}

}  // namespace

std::string render_report(const ReportHeader& header, const ComparisonTable& table,
                          ReportFormat format) {
  std::string out = heading("Ordinal location-shift analysis", 1, format);
  const std::string br = format == ReportFormat::markdown ? "  \n" : "\n";
  out += fmt::format("formula: {}{}",
                     format == ReportFormat::markdown ? escape_markdown(header.formula) : header.formula, br);
  out += family_text(header) + br;
  out += fmt::format("response {}: n = {}, k = {}{}", header.response, header.n, header.k, br);
  std::string counts = "category counts:";
  for (std::size_t r = 0; r < header.counts.size(); ++r) {
    counts += fmt::format(" {}:{}", r + 1, header.counts[r]);
  }
  out += counts + "\n\n";

  out += heading("Model comparison", 2, format);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const LadderRow& row = table.rows[i];
    Row cells{row.label};
    if (!row.fit) {
      cells.insert(cells.end(), {"fit failed", "", "", "", ""});
    } else {
      const auto report = deviance_report(*row.fit);
      cells.push_back(fixed(report.deviance, 2) + (row.fit->converged ? "" : " (not converged)"));
      cells.push_back(std::to_string(report.df_residual));
      const auto& test = i < table.tests.size() ? table.tests[i] : std::nullopt;
      if (test) {
        cells.insert(cells.end(),
                     {fixed(test->statistic, 2), std::to_string(test->df), fixed(test->p_value, 4)});
      } else {
        cells.insert(cells.end(), {"", "", ""});
      }
    }
    rows.push_back(std::move(cells));
  }
  out += render_table({"", "deviance", "df", "difference in deviances", "df", "p-value"}, rows,
                      format);
  out += "\n";

  if (!table.smooth_tests.empty()) {
    out += heading("Smooth term tests", 2, format);
    std::vector<Row> srows;
    for (const auto& s : table.smooth_tests) {
      const std::string term = fmt::format("s({}) {} vs {}", s.variable,
                                           s.dispersion ? "dispersion" : "location", s.against);
      if (s.test) {
        srows.push_back({term, fixed(s.test->statistic, 2), std::to_string(s.test->df),
                         fixed(s.test->p_value, 4)});
      } else {
        srows.push_back({term, "failed", "", ""});
      }
    }
    out += render_table({"", "difference in deviances", "df", "p-value"}, srows, format);
    out += "\n";
  }

  for (const auto& row : table.rows) {
    out += heading(row.label, 2, format);
    if (!row.fit) {
      out += "fit failed: " + row.failure + "\n\n";
      continue;
    }
    const FitResult& fit = *row.fit;
    out += fmt::format("deviance {} on {} df, {} parameters, {} iterations, {}{}",
                       fixed(fit.deviance, 2), fit.df_residual, fit.params.size(), fit.iterations,
                       fit.converged ? "converged" : "not converged", "\n\n");
    const WaldTable wald = wald_table(fit);
    out += wald_block("Intercepts", wald.intercepts, format);
    out += wald_block("Location effects", wald.location, format);
    out += wald_block("Dispersion effects", wald.dispersion, format);
    if (!fit.warnings.empty()) {
      out += heading("Warnings", 3, format);
      for (const auto& w : fit.warnings) out += "- " + w + "\n";
      out += "\n";
    }
  }
  while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') {
    out.pop_back();
  }
  return out;
}

}  // namespace ordshift
