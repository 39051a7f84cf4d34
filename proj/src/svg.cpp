#include "ordshift/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ordshift {

namespace {

constexpr double kWidth = 520.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
      width, height, width, height, width, height);
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Axis padded_axis(double lo, double hi, double pixel_lo, double pixel_hi, double min_half_span) {
  if (hi - lo < 2.0 * min_half_span) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - min_half_span;
    hi = mid + min_half_span;
  }
  const double pad = 0.08 * (hi - lo);
  return {lo - pad, hi + pad, pixel_lo, pixel_hi};
}

// Five evenly spaced ticks on the axis; `log_scale` labels exp(value).
std::string ticks(const Axis& axis, bool horizontal, bool log_scale, double cross) {
  std::string out;
  for (int t = 0; t <= 4; ++t) {
    const double v = axis.lo + (axis.hi - axis.lo) * (0.5 + 2.0 * t) / 10.0;
    const double pos = axis.map(v);
    const std::string label = fmt::format("{:.3g}", log_scale ? std::exp(v) : v);
    if (horizontal) {
      out += fmt::format(
          "<line class=\"tick\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
          "stroke=\"black\"/>\n<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
          pos, cross, pos, cross + 5.0, pos, cross + 18.0, label);
    } else {
      out += fmt::format(
          "<line class=\"tick\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
          "stroke=\"black\"/>\n<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n",
          cross - 5.0, pos, cross, pos, cross - 8.0, pos + 4.0, label);
    }
  }
  return out;
}

std::string frame(double x, double y, double w, double h) {
  return fmt::format(
      "<rect class=\"frame\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "fill=\"none\" stroke=\"black\"/>\n",
      x, y, w, h);
}

}  // namespace

std::string render_star_svg(const std::vector<StarPoint>& points, const std::string& title) {
  // Work on the log scale; 0 is the reference value 1.
  double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
  for (const auto& p : points) {
    xlo = std::min(xlo, std::log(p.dispersion.lo));
    xhi = std::max(xhi, std::log(p.dispersion.hi));
    ylo = std::min(ylo, std::log(p.location.lo));
    yhi = std::max(yhi, std::log(p.location.hi));
  }
  const Axis xa = padded_axis(xlo, xhi, kLeft, kWidth - kRight, std::log(2.0));
  const Axis ya = padded_axis(ylo, yhi, kHeight - kBottom, kTop, std::log(2.0));

  std::string out = header(kWidth, kHeight);
  if (!title.empty()) {
    out += fmt::format("<text x=\"{:.2f}\" y=\"28\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       0.5 * kWidth, escape_xml(title));
  }
  out += frame(kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  out += ticks(xa, true, true, kHeight - kBottom);
  out += ticks(ya, false, true, kLeft);
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">dispersion exp(alpha)</text>\n",
      0.5 * (kLeft + kWidth - kRight), kHeight - 18.0);
  out += fmt::format(
      "<text x=\"18\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2f})\">"
      "location exp(beta)</text>\n",
      0.5 * (kTop + kHeight - kBottom), 0.5 * (kTop + kHeight - kBottom));

  const double x1 = xa.map(0.0);
  const double y1 = ya.map(0.0);
  out += fmt::format(
      "<line class=\"ref-line\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
      "stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n",
      x1, kTop, x1, kHeight - kBottom);
  out += fmt::format(
      "<line class=\"ref-line\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
      "stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n",
      kLeft, y1, kWidth - kRight, y1);

  for (const auto& p : points) {
    const double cx = xa.map(std::log(p.dispersion.point));
    const double cy = ya.map(std::log(p.location.point));
    out += fmt::format("<g class=\"star\" data-variable=\"{}\">\n", escape_xml(p.variable));
    out += fmt::format(
        "<line class=\"arm-dispersion\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"steelblue\" stroke-width=\"2\"/>\n",
        xa.map(std::log(p.dispersion.lo)), cy, xa.map(std::log(p.dispersion.hi)), cy);
    out += fmt::format(
        "<line class=\"arm-location\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"firebrick\" stroke-width=\"2\"/>\n",
        cx, ya.map(std::log(p.location.lo)), cx, ya.map(std::log(p.location.hi)));
    out += fmt::format("<circle class=\"point\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\"/>\n", cx, cy);
    out += fmt::format("<text class=\"label\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", cx + 5.0,
                       cy - 5.0, escape_xml(p.variable));
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_smooth_svg(const std::vector<SmoothCurve>& curves) {
  constexpr double panel_w = 380.0;
  constexpr double panel_h = 320.0;
  const double width = panel_w * static_cast<double>(std::max<std::size_t>(curves.size(), 1));
  std::string out = header(width, panel_h);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const SmoothCurve& curve = curves[c];
    const double left = panel_w * static_cast<double>(c) + 60.0;
    const double right = panel_w * static_cast<double>(c + 1) - 20.0;
    const double top = 40.0;
    const double bottom = panel_h - 50.0;
    const auto [fmin, fmax] = std::minmax_element(curve.f.begin(), curve.f.end());
    const Axis xa{curve.x.front(), curve.x.back() > curve.x.front() ? curve.x.back()
                                                                    : curve.x.front() + 1.0,
                  left, right};
    const Axis ya = padded_axis(std::min(*fmin, 0.0), std::max(*fmax, 0.0), bottom, top, 0.05);
    const std::string name = curve.dispersion ? fmt::format("dispersion effect fS({})", curve.variable)
                                              : fmt::format("location effect f({})", curve.variable);
    out += fmt::format("<g class=\"panel\" data-term=\"{}\">\n",
                       curve.dispersion ? "dispersion" : "location");
    out += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       0.5 * (left + right), escape_xml(name));
    out += frame(left, top, right - left, bottom - top);
    out += ticks(ya, false, false, left);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"start\">{:.3g}</text>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
        left, bottom + 18.0, curve.x.front(), right, bottom + 18.0, curve.x.back(),
        0.5 * (left + right), bottom + 36.0, escape_xml(curve.variable));
    out += fmt::format(
        "<line class=\"zero-line\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n",
        left, ya.map(0.0), right, ya.map(0.0));
    out += "<polyline class=\"curve\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
      out += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", xa.map(curve.x[i]), ya.map(curve.f[i]));
    }
    out += "\"/>\n</g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_smooth_svg(const FitResult& fit, const std::string& variable) {
  return render_smooth_svg(smooth_curves(fit, variable));
}

}  // namespace ordshift
