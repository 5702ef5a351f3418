#pragma once

// Figures: the grouped ratio histogram by gender (SVG plus a CSV twin) and a
// coefficient dot plot with 95% intervals. Output is plain text and fully
// determined by the input, so figures can be diffed and tested.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylo/error.hpp"
#include "stylo/io.hpp"
#include "stylo/person.hpp"
#include "stylo/stats.hpp"

namespace stylo {

inline constexpr double kPaperBinWidth = 0.1;
inline constexpr double kPatentBinWidth = 0.05;

struct RatioObservation {
  Gender gender = Gender::Unknown;
  std::optional<double> ratio;
};

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  std::uint64_t n_female = 0, n_male = 0;
  double pct_female = 0.0, pct_male = 0.0;  // of each gender's plotted total
};

struct Histogram {
  double width = kPaperBinWidth;
  std::vector<HistogramBin> bins;
  std::uint64_t total_female = 0, total_male = 0;
  std::uint64_t skipped_undefined = 0, skipped_unknown_gender = 0;
};

namespace report_detail {

// Bin edges are multiples of the width, snapped to 12 decimals so that
// 0.3 lands in [0.3, 0.4) rather than below a 0.30000000000000004 edge.
inline double snap(double x) { return std::round(x * 1e12) / 1e12; }

inline std::size_t bin_index(double r, double width) {
  return static_cast<std::size_t>(std::floor(snap(r / width)));
}

inline std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) { return format_fixed(v, 2); }

}  // namespace report_detail

inline Histogram ratio_histogram(std::span<const RatioObservation> obs, double width = kPaperBinWidth) {
  if (!(width > 0.0 && std::isfinite(width))) throw SpecError("bin width must be positive");
  Histogram h;
  h.width = width;
  std::vector<std::pair<std::size_t, Gender>> placed;
  for (const auto& o : obs) {
    if (!o.ratio || !std::isfinite(*o.ratio)) {
      ++h.skipped_undefined;
      continue;
    }
    if (o.gender == Gender::Unknown) {
      ++h.skipped_unknown_gender;
      continue;
    }
    if (*o.ratio < 0.0) throw SpecError("negative ratio cannot be binned");
    placed.emplace_back(report_detail::bin_index(*o.ratio, width), o.gender);
  }
  if (placed.empty()) throw SpecError("nothing to plot");
  std::size_t n_bins = 0;
  for (const auto& [k, g] : placed) n_bins = std::max(n_bins, k + 1);
  h.bins.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    h.bins[k].lo = report_detail::snap(static_cast<double>(k) * width);
    h.bins[k].hi = report_detail::snap(static_cast<double>(k + 1) * width);
  }
  for (const auto& [k, g] : placed) {
    if (g == Gender::Female) {
      ++h.bins[k].n_female;
      ++h.total_female;
    } else {
      ++h.bins[k].n_male;
      ++h.total_male;
    }
  }
  for (auto& b : h.bins) {
    if (h.total_female) b.pct_female = 100.0 * static_cast<double>(b.n_female) / static_cast<double>(h.total_female);
    if (h.total_male) b.pct_male = 100.0 * static_cast<double>(b.n_male) / static_cast<double>(h.total_male);
  }
  return h;
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = csv::join({"bin_lo", "bin_hi", "n_female", "n_male", "pct_female", "pct_male"});
  for (const auto& b : h.bins)
    out += csv::join({format_double(b.lo), format_double(b.hi), std::to_string(b.n_female),
                      std::to_string(b.n_male), format_double(b.pct_female), format_double(b.pct_male)});
  return out;
}

inline constexpr std::string_view kFemaleColour = "#c0392b";
inline constexpr std::string_view kMaleColour = "#2c6fbb";

inline std::string histogram_svg(const Histogram& h, std::string_view title = "Involved-Informational Ratio by gender") {
  using report_detail::num;
  const double W = 720, H = 420, left = 60, right = 20, top = 40, bottom = 60;
  const double plot_w = W - left - right, plot_h = H - top - bottom;
  double y_max = 0.0;
  for (const auto& b : h.bins) y_max = std::max({y_max, b.pct_female, b.pct_male});
  y_max = std::max(5.0, std::ceil(y_max / 5.0) * 5.0);
  const double group_w = plot_w / static_cast<double>(h.bins.size());
  const double bar_w = group_w * 0.4;
  auto y_of = [&](double pct) { return top + plot_h * (1.0 - pct / y_max); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
       "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + report_detail::esc(title) +
       "</text>\n";
  for (double t = 0.0; t <= y_max + 1e-9; t += 5.0) {
    const double y = y_of(t);
    s += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(W - right) + "\" y2=\"" + num(y) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + format_double(t) + "</text>\n";
  }
  for (std::size_t k = 0; k < h.bins.size(); ++k) {
    const auto& b = h.bins[k];
    const double x0 = left + group_w * static_cast<double>(k) + group_w * 0.1;
    auto bar = [&](double x, double pct, std::string_view colour, std::string_view who, std::uint64_t n) {
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y_of(pct)) + "\" width=\"" + num(bar_w) + "\" height=\"" +
           num(top + plot_h - y_of(pct)) + "\" fill=\"" + std::string(colour) + "\"><title>" + std::string(who) + " [" +
           format_double(b.lo) + ", " + format_double(b.hi) + "): " + std::to_string(n) + " (" + format_fixed(pct, 2) +
           "%)</title></rect>\n";
    };
    bar(x0, b.pct_female, kFemaleColour, "female", b.n_female);
    bar(x0 + bar_w, b.pct_male, kMaleColour, "male", b.n_male);
    s += "<text x=\"" + num(left + group_w * (static_cast<double>(k) + 0.5)) + "\" y=\"" + num(top + plot_h + 16) +
         "\" text-anchor=\"middle\">" + format_double(b.lo) + "</text>\n";
  }
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(W - right) + "\" y2=\"" +
       num(top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(H - 22) + "\" text-anchor=\"middle\">ratio bin (width " +
       format_double(h.width) + ")</text>\n";
  s += "<text transform=\"translate(16 " + num(top + plot_h / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">% of gender total</text>\n";
  s += "<rect x=\"" + num(W - right - 150) + "\" y=\"34\" width=\"10\" height=\"10\" fill=\"" + std::string(kFemaleColour) +
       "\"/><text x=\"" + num(W - right - 135) + "\" y=\"43\">female (n=" + std::to_string(h.total_female) + ")</text>\n";
  s += "<rect x=\"" + num(W - right - 150) + "\" y=\"50\" width=\"10\" height=\"10\" fill=\"" + std::string(kMaleColour) +
       "\"/><text x=\"" + num(W - right - 135) + "\" y=\"59\">male (n=" + std::to_string(h.total_male) + ")</text>\n";
  s += "</svg>\n";
  return s;
}

// Point estimates with 95% intervals (t quantile on the model's dof).
inline std::string coefficient_svg(const RegressionResult& r, bool include_intercept = false) {
  using report_detail::num;
  std::vector<const Coefficient*> rows;
  for (const auto& c : r.coefficients)
    if (include_intercept || c.name != kInterceptName) rows.push_back(&c);
  if (rows.empty()) throw SpecError("nothing to plot");
  const double tq =
      boost::math::quantile(boost::math::students_t(static_cast<double>(std::max<std::size_t>(r.dof, 1))), 0.975);
  double lo = 0.0, hi = 0.0;
  for (const auto* c : rows) {
    const double half = std::isfinite(c->std_error) ? tq * c->std_error : 0.0;
    lo = std::min(lo, c->estimate - half);
    hi = std::max(hi, c->estimate + half);
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double W = 720, left = 200, right = 30, top = 40, row_h = 24;
  const double H = top + row_h * static_cast<double>(rows.size()) + 50;
  auto x_of = [&](double v) { return left + (W - left - right) * (v - lo) / (hi - lo); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
       "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       report_detail::esc(to_formula(r.spec)) + " (" + r.se_type + ")</text>\n";
  s += "<line x1=\"" + num(x_of(0.0)) + "\" y1=\"" + num(top - 6) + "\" x2=\"" + num(x_of(0.0)) + "\" y2=\"" +
       num(H - 44) + "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = *rows[i];
    const double y = top + row_h * (static_cast<double>(i) + 0.5);
    const double half = std::isfinite(c.std_error) ? tq * c.std_error : 0.0;
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + report_detail::esc(c.name) +
         "</text>\n";
    s += "<line x1=\"" + num(x_of(c.estimate - half)) + "\" y1=\"" + num(y) + "\" x2=\"" +
         num(x_of(c.estimate + half)) + "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    s += "<circle cx=\"" + num(x_of(c.estimate)) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"black\"><title>" +
         report_detail::esc(c.name) + ": " + format_double(c.estimate) + "</title></circle>\n";
  }
  const double axis_y = H - 44;
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(axis_y) + "\" x2=\"" + num(W - right) + "\" y2=\"" + num(axis_y) +
       "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s += "<text x=\"" + num(x_of(v)) + "\" y=\"" + num(axis_y + 16) + "\" text-anchor=\"middle\">" +
         format_fixed(v, 3) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace stylo
