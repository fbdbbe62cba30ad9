// Copyright 2026 The PCM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Self-contained SVG 1.1 charts for sweep results: per-trial points plus
// median polylines, data count on a log axis. No plotting dependency.

#ifndef PCM_PLOTS_HPP_
#define PCM_PLOTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcm/errors.hpp"
#include "pcm/experiment.hpp"

namespace pcm {
namespace svg_detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

class SvgDoc {
 public:
  SvgDoc(double width, double height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0, const std::string& dash = "") {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
          << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double stroke_width, const std::string& dash = "") {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) body_ << " ";
      body_ << fmt(pts[i].first) << "," << fmt(pts[i].second);
    }
    body_ << "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
    body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
          << "\" fill=\"" << fill << "\"";
    if (opacity < 1.0) body_ << " fill-opacity=\"" << fmt(opacity) << "\"";
    body_ << "/>\n";
  }

  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& anchor = "start", const std::string& fill = "#333333") {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
          << "\">" << escape(content) << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_)
        << "\" height=\"" << fmt(height_) << "\" viewBox=\"0 0 " << fmt(width_) << " "
        << fmt(height_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
      if (ch == '&')
        out += "&amp;";
      else if (ch == '<')
        out += "&lt;";
      else if (ch == '>')
        out += "&gt;";
      else
        out.push_back(ch);
    }
    return out;
  }

  double width_, height_;
  std::ostringstream body_;
};

struct Series {
  std::string label;
  std::string color;
  // x = data count, points carry every trial value, medians one per x.
  std::vector<std::pair<double, double>> points;
  std::vector<std::pair<double, double>> medians;
  bool dashed = false;
};

inline double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  if (values.size() % 2 == 1) return values[k];
  return 0.5 * (values[k - 1] + values[k]);
}

inline const char* palette(std::size_t i) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
}

// One chart: log-scaled x (data count), linear y from zero.
inline std::string render_chart(const std::string& title, const std::string& y_label,
                                const std::vector<std::size_t>& x_ticks,
                                const std::vector<Series>& series) {
  const double width = 720.0, height = 480.0;
  const double left = 70.0, right = 30.0, top = 50.0, bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 1e300, x_max = -1e300, y_max = 0.0;
  for (std::size_t v : x_ticks) {
    x_min = std::min(x_min, static_cast<double>(v));
    x_max = std::max(x_max, static_cast<double>(v));
  }
  for (const auto& s : series)
    for (const auto& pt : s.points)
      if (std::isfinite(pt.second)) y_max = std::max(y_max, pt.second);
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;
  const double lx_min = std::log10(std::max(x_min, 1.0));
  const double lx_max = std::log10(std::max(x_max, x_min + 1.0));
  const double lx_span = std::max(lx_max - lx_min, 1e-9);

  auto map_x = [&](double v) {
    return left + (std::log10(std::max(v, 1.0)) - lx_min) / lx_span * plot_w;
  };
  auto map_y = [&](double v) { return top + plot_h - v / y_max * plot_h; };

  SvgDoc doc(width, height);
  doc.text(width / 2.0, 24.0, title, 15.0, "middle", "#111111");
  doc.line(left, top, left, top + plot_h, "#444444", 1.2);
  doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#444444", 1.2);
  doc.text(width / 2.0, height - 14.0, "data count (log scale)", 12.0, "middle");
  doc.text(16.0, top - 18.0, y_label, 12.0, "start");

  for (std::size_t v : x_ticks) {
    const double x = map_x(static_cast<double>(v));
    doc.line(x, top + plot_h, x, top + plot_h + 5.0, "#444444", 1.0);
    doc.text(x, top + plot_h + 20.0, std::to_string(v), 11.0, "middle");
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    const double y = map_y(v);
    doc.line(left - 5.0, y, left, y, "#444444", 1.0);
    if (i > 0) doc.line(left, y, left + plot_w, y, "#dddddd", 0.6);
    doc.text(left - 9.0, y + 4.0, fmt_value(v), 11.0, "end");
  }

  for (const auto& s : series)
    for (const auto& pt : s.points)
      if (std::isfinite(pt.second))
        doc.circle(map_x(pt.first), map_y(pt.second), 2.4, s.color, 0.45);
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> line;
    for (const auto& pt : s.medians)
      if (std::isfinite(pt.second)) line.emplace_back(map_x(pt.first), map_y(pt.second));
    doc.polyline(line, s.color, 2.0, s.dashed ? "6,4" : "");
    if (line.size() == 1)
      doc.circle(line[0].first, line[0].second, 3.2, s.color);
  }

  double ly = top + 8.0;
  for (const auto& s : series) {
    const double lx = left + plot_w - 170.0;
    doc.line(lx, ly, lx + 26.0, ly, s.color, 2.0, s.dashed ? "6,4" : "");
    doc.text(lx + 32.0, ly + 4.0, s.label, 11.0);
    ly += 16.0;
  }
  return doc.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot open plot file for writing: " + path);
  out << content;
}

}  // namespace svg_detail

// Emits one cost chart and one loss-rate chart per feature dimension found
// in the rows. Returns the written file paths.
inline std::vector<std::string> emit_plots(const std::vector<ExperimentRow>& rows,
                                           const std::string& out_dir) {
  if (rows.empty()) throw ContractError("no rows to plot");
  std::filesystem::create_directories(out_dir);

  std::set<std::size_t> n_values, big_n_values, m_values;
  for (const auto& r : rows) {
    n_values.insert(r.n);
    big_n_values.insert(r.big_n);
    m_values.insert(r.m);
  }
  const std::vector<std::size_t> x_ticks(big_n_values.begin(), big_n_values.end());
  std::vector<std::string> written;

  for (std::size_t n : n_values) {
    using svg_detail::Series;
    // Cost chart. Continuous quantities do not depend on m; use the
    // smallest granularity's rows as their single representative.
    const std::size_t m0 = *m_values.begin();
    Series naive{"label flips, naive", "#7f7f7f", {}, {}, false};
    Series cont{"label flips, minimized", "#1f77b4", {}, {}, false};
    Series lower{"cost lower bound", "#2ca02c", {}, {}, true};
    Series upper{"projected-change bound", "#9467bd", {}, {}, true};
    std::vector<Series> cost_series;
    std::map<std::size_t, std::vector<double>> naive_by_x, cont_by_x, lower_by_x, upper_by_x;
    std::map<std::size_t, std::map<std::size_t, std::vector<double>>> disc_by_m, plr_by_m;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.m == m0) {
        naive.points.emplace_back(static_cast<double>(r.big_n), r.naive_cost);
        cont.points.emplace_back(static_cast<double>(r.big_n), r.minimized_cost_continuous);
        lower.points.emplace_back(static_cast<double>(r.big_n), r.lower_bound);
        upper.points.emplace_back(static_cast<double>(r.big_n), r.upper_bound_term);
        naive_by_x[r.big_n].push_back(r.naive_cost);
        cont_by_x[r.big_n].push_back(r.minimized_cost_continuous);
        lower_by_x[r.big_n].push_back(r.lower_bound);
        upper_by_x[r.big_n].push_back(r.upper_bound_term);
      }
      disc_by_m[r.m][r.big_n].push_back(r.minimized_cost_discrete);
      if (std::isfinite(r.performance_loss_rate))
        plr_by_m[r.m][r.big_n].push_back(r.performance_loss_rate);
    }
    auto fill_medians = [](Series& s, const std::map<std::size_t, std::vector<double>>& by_x) {
      for (const auto& [x, values] : by_x)
        s.medians.emplace_back(static_cast<double>(x), svg_detail::median(values));
    };
    fill_medians(naive, naive_by_x);
    fill_medians(cont, cont_by_x);
    fill_medians(lower, lower_by_x);
    fill_medians(upper, upper_by_x);
    cost_series.push_back(naive);
    cost_series.push_back(cont);
    cost_series.push_back(lower);
    cost_series.push_back(upper);
    std::size_t color_index = 4;
    for (const auto& [m, by_x] : disc_by_m) {
      Series s{"rounded, m=" + std::to_string(m), svg_detail::palette(color_index++), {}, {},
               false};
      for (const auto& [x, values] : by_x) {
        for (double v : values) s.points.emplace_back(static_cast<double>(x), v);
        s.medians.emplace_back(static_cast<double>(x), svg_detail::median(values));
      }
      cost_series.push_back(s);
    }
    const std::string cost_path =
        out_dir + "/cost_vs_data_count_n" + std::to_string(n) + ".svg";
    svg_detail::write_file(
        cost_path, svg_detail::render_chart("flip cost vs data count, feature dim " +
                                                std::to_string(n),
                                            "label flips", x_ticks, cost_series));
    written.push_back(cost_path);

    std::vector<Series> plr_series;
    color_index = 0;
    for (const auto& [m, by_x] : plr_by_m) {
      Series s{"m=" + std::to_string(m), svg_detail::palette(color_index++), {}, {}, false};
      for (const auto& [x, values] : by_x) {
        for (double v : values) s.points.emplace_back(static_cast<double>(x), v);
        s.medians.emplace_back(static_cast<double>(x), svg_detail::median(values));
      }
      plr_series.push_back(s);
    }
    if (!plr_series.empty()) {
      const std::string plr_path =
          out_dir + "/loss_rate_vs_data_count_n" + std::to_string(n) + ".svg";
      svg_detail::write_file(
          plr_path, svg_detail::render_chart("rounding loss rate vs data count, feature dim " +
                                                 std::to_string(n),
                                             "performance loss rate", x_ticks, plr_series));
      written.push_back(plr_path);
    }
  }
  return written;
}

}  // namespace pcm

#endif  // PCM_PLOTS_HPP_
