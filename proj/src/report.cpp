#include "ecdf_bands/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecdf_bands/dist.hpp"
#include "ecdf_bands/error.hpp"

namespace ecdfb {

namespace {

constexpr double kWidth = 600.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::fabs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void check_grid(const EvaluationGrid& grid, const std::vector<EcdfTrajectory>& trajectories) {
  for (const auto& t : trajectories) {
    if (!(t.grid == grid)) throw Error(ErrorCode::grid_mismatch, "trajectories must share the band grid");
  }
}

// Right-continuous step vertices: level values[i] holds on [z_i, z_{i+1}), anchored at (0, start).
std::vector<std::pair<double, double>> steps(std::span<const double> z, std::span<const double> values,
                                             double start) {
  std::vector<std::pair<double, double>> pts{{0.0, start}};
  double level = start;
  for (std::size_t i = 0; i < z.size(); ++i) {
    pts.emplace_back(z[i], level);
    level = values[i];
    pts.emplace_back(z[i], level);
  }
  return pts;
}

// Nice tick step for the span.
double tick_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double bx0 = f.px(f.x0), bx1 = f.px(f.x1), by0 = f.py(f.y0), by1 = f.py(f.y1);
  svg << "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << num(bx0) << "\" y1=\"" << num(by0) << "\" x2=\"" << num(bx1) << "\" y2=\"" << num(by0) << "\"/>\n";
  svg << "<line x1=\"" << num(bx0) << "\" y1=\"" << num(by0) << "\" x2=\"" << num(bx0) << "\" y2=\"" << num(by1) << "\"/>\n";
  svg << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  const double xs = tick_step(f.x1 - f.x0);
  for (double x = std::ceil(f.x0 / xs - 1e-9) * xs; x <= f.x1 + 1e-9; x += xs) {
    svg << "<line x1=\"" << num(f.px(x)) << "\" y1=\"" << num(by0) << "\" x2=\"" << num(f.px(x)) << "\" y2=\""
        << num(by0 + 5) << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(by0 + 18) << "\" text-anchor=\"middle\">" << label(x)
        << "</text>\n";
  }
  const double ys = tick_step(f.y1 - f.y0);
  for (double y = std::ceil(f.y0 / ys - 1e-9) * ys; y <= f.y1 + 1e-9; y += ys) {
    svg << "<line x1=\"" << num(bx0 - 5) << "\" y1=\"" << num(f.py(y)) << "\" x2=\"" << num(bx0) << "\" y2=\""
        << num(f.py(y)) << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << num(bx0 - 8) << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">" << label(y)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(0.5 * (bx0 + bx1)) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  svg << "<text x=\"15\" y=\"" << num(0.5 * (by0 + by1)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << num(0.5 * (by0 + by1)) << ")\">" << escape(ylabel) << "</text>\n";
  svg << "</g>\n";
}

void header(std::ostringstream& svg, const std::string& title) {
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"400\" viewBox=\"0 0 600 400\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"600\" height=\"400\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"300\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(title) << "</text>\n";
  }
}

std::string points_attr(const std::vector<std::pair<double, double>>& pts, const Frame& f) {
  std::string s;
  for (const auto& [x, y] : pts) {
    if (!s.empty()) s += ' ';
    s += num(f.px(x)) + "," + num(f.py(y));
  }
  return s;
}

std::string path_attr(const std::vector<std::pair<double, double>>& pts, const Frame& f) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += (i == 0 ? "M" : " L") + num(f.px(pts[i].first)) + "," + num(f.py(pts[i].second));
  }
  return s;
}

std::string render_curves(const PlotSpec& spec) {
  const bool diff = spec.kind == PlotKind::ecdf_diff;
  PlotData data;
  if (spec.bands) {
    data = diff ? diff_transform(*spec.bands, spec.trajectories) : plot_data(*spec.bands, spec.trajectories);
  } else if (!spec.trajectories.empty()) {
    const auto& grid = spec.trajectories.front().grid;
    check_grid(grid, spec.trajectories);
    data.z.assign(grid.points().begin(), grid.points().end());
    data.difference = diff;
    for (const auto& t : spec.trajectories) {
      std::vector<double> v(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) v[i] = t.value(i) - (diff ? grid[i] : 0.0);
      data.series.push_back(std::move(v));
    }
  } else {
    throw Error(ErrorCode::invalid_params, "a plot needs bands or trajectories");
  }

  Frame f{0.0, 1.0, 0.0, 1.0};
  if (diff) {
    double extent = 0.0;
    for (double v : data.lower) extent = std::max(extent, std::fabs(v));
    for (double v : data.upper) extent = std::max(extent, std::fabs(v));
    for (const auto& s : data.series) {
      for (double v : s) extent = std::max(extent, std::fabs(v));
    }
    extent = extent > 0.0 ? std::ceil(extent * 1.1 * 100.0) / 100.0 : 0.1;
    f.y0 = -extent;
    f.y1 = extent;
  }

  std::ostringstream svg;
  header(svg, spec.title);
  if (!data.lower.empty()) {
    auto upper = steps(data.z, data.upper, 0.0);
    const auto lower = steps(data.z, data.lower, 0.0);
    upper.insert(upper.end(), lower.rbegin(), lower.rend());
    svg << "<polygon class=\"band\" points=\"" << points_attr(upper, f)
        << "\" fill=\"#8899aa\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
  }
  if (diff) {
    svg << "<line class=\"reference\" x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\""
        << num(f.px(1)) << "\" y2=\"" << num(f.py(0)) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  } else {
    svg << "<line class=\"reference\" x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\""
        << num(f.px(1)) << "\" y2=\"" << num(f.py(1)) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t c = 0; c < data.series.size(); ++c) {
    const char* color = kPalette[c % std::size(kPalette)];
    svg << "<path class=\"ecdf\" d=\"" << path_attr(steps(data.z, data.series[c], 0.0), f)
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (c < spec.labels.size()) svg << " data-label=\"" << escape(spec.labels[c]) << "\"";
    svg << "/>\n";
  }
  axes(svg, f, "z", diff ? "ECDF difference" : "ECDF");
  svg << "</svg>\n";
  return svg.str();
}

std::string render_histogram(const PlotSpec& spec) {
  if (!spec.histogram) throw Error(ErrorCode::invalid_params, "rank histogram plot needs histogram data");
  const auto& h = *spec.histogram;
  long top = h.upper;
  for (long v : h.heights) top = std::max(top, v);
  Frame f{0.0, 1.0, 0.0, static_cast<double>(top) * 1.1 + 1.0};
  std::ostringstream svg;
  header(svg, spec.title);
  const std::vector<std::pair<double, double>> band{{0.0, static_cast<double>(h.lower)},
                                                    {1.0, static_cast<double>(h.lower)},
                                                    {1.0, static_cast<double>(h.upper)},
                                                    {0.0, static_cast<double>(h.upper)}};
  svg << "<polygon class=\"band\" points=\"" << points_attr(band, f)
      << "\" fill=\"#8899aa\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
  const double w = 1.0 / static_cast<double>(h.bins);
  for (long b = 0; b < h.bins; ++b) {
    const double x0 = w * static_cast<double>(b);
    const double y = static_cast<double>(h.heights[static_cast<std::size_t>(b)]);
    svg << "<rect class=\"bin\" x=\"" << num(f.px(x0)) << "\" y=\"" << num(f.py(y)) << "\" width=\""
        << num(f.px(x0 + w) - f.px(x0)) << "\" height=\"" << num(f.py(0) - f.py(y))
        << "\" fill=\"#1f77b4\" fill-opacity=\"0.6\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
  }
  svg << "<line class=\"reference\" x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(h.expected)) << "\" x2=\""
      << num(f.px(1)) << "\" y2=\"" << num(f.py(h.expected)) << "\" stroke=\"#333333\" stroke-dasharray=\"4 3\"/>\n";
  axes(svg, f, "fractional rank", "count");
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

const char* to_string(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::ecdf:
      return "ecdf";
    case PlotKind::ecdf_diff:
      return "ecdf_diff";
    case PlotKind::rank_hist:
      return "rank_hist";
  }
  return "?";
}

PlotData plot_data(const ConfidenceBands& bands, const std::vector<EcdfTrajectory>& trajectories) {
  check_grid(bands.grid, trajectories);
  PlotData out;
  out.z.assign(bands.grid.points().begin(), bands.grid.points().end());
  for (std::size_t i = 0; i < bands.grid.size(); ++i) {
    out.lower.push_back(bands.lower(i));
    out.upper.push_back(bands.upper(i));
  }
  for (const auto& t : trajectories) {
    std::vector<double> v(t.counts.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.value(i);
    out.series.push_back(std::move(v));
  }
  return out;
}

PlotData diff_transform(const ConfidenceBands& bands, const std::vector<EcdfTrajectory>& trajectories) {
  PlotData out = plot_data(bands, trajectories);
  for (std::size_t i = 0; i < out.z.size(); ++i) {
    out.lower[i] -= out.z[i];
    out.upper[i] -= out.z[i];
    for (auto& s : out.series) s[i] -= out.z[i];
  }
  out.difference = true;
  return out;
}

RankHistogram rank_hist(std::span<const double> values, long bins, double alpha, long expected_total) {
  if (bins < 2) throw Error(ErrorCode::invalid_bins, "a histogram needs at least two bins");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_alpha, "alpha must lie in (0, 1)");
  if (expected_total < 1) throw Error(ErrorCode::invalid_params, "expected total must be positive");
  RankHistogram h;
  h.bins = bins;
  h.heights.assign(static_cast<std::size_t>(bins), 0);
  const double b = static_cast<double>(bins);
  for (double u : values) {
    if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::invalid_params, "histogram values must lie in [0, 1]");
    const long idx = std::clamp(static_cast<long>(std::ceil(u * b - 1e-9)) - 1, 0L, bins - 1);
    ++h.heights[static_cast<std::size_t>(idx)];
  }
  const double p = 1.0 / b;
  h.lower = binom_quantile(alpha / 2.0, expected_total, p);
  h.upper = binom_quantile(1.0 - alpha / 2.0, expected_total, p);
  h.expected = static_cast<double>(expected_total) * p;
  return h;
}

std::string render_svg(const PlotSpec& spec) {
  return spec.kind == PlotKind::rank_hist ? render_histogram(spec) : render_curves(spec);
}

std::string plot_json(const PlotSpec& spec) {
  nlohmann::ordered_json doc;
  doc["schema"] = "plot-data/1";
  doc["kind"] = to_string(spec.kind);
  doc["title"] = spec.title;
  if (spec.kind == PlotKind::rank_hist) {
    if (!spec.histogram) throw Error(ErrorCode::invalid_params, "rank histogram plot needs histogram data");
    const auto& h = *spec.histogram;
    doc["bins"] = h.bins;
    doc["heights"] = h.heights;
    doc["interval"] = {h.lower, h.upper};
    doc["expected"] = h.expected;
  } else if (spec.bands) {
    const PlotData data = spec.kind == PlotKind::ecdf_diff ? diff_transform(*spec.bands, spec.trajectories)
                                                           : plot_data(*spec.bands, spec.trajectories);
    doc["n"] = spec.bands->n;
    doc["chains"] = spec.bands->chains;
    doc["gamma"] = spec.bands->gamma.gamma;
    doc["z"] = data.z;
    doc["lower"] = data.lower;
    doc["upper"] = data.upper;
    doc["series"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < data.series.size(); ++c) {
      doc["series"].push_back({{"label", c < spec.labels.size() ? spec.labels[c] : "chain " + std::to_string(c + 1)},
                               {"values", data.series[c]}});
    }
  }
  return doc.dump(2) + "\n";
}

}  // namespace ecdfb
