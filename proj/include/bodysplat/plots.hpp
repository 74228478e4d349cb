// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Static SVG figures (loss curves, metric bars) with CSV companions.
//
#pragma once

#include "core.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace bodysplat {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline const char *
plot_color(std::size_t i) {
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    return colors[i % 6];
}

inline std::string
svg_escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

inline void
write_text_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path.string());
    out << text;
    require(out.good(), "write failed for " + path.string());
}

} // namespace detail

/// Line chart; `log_y` plots log10 of positive values (non-positive points are dropped).
inline void
write_line_plot_svg(const std::filesystem::path &path, const std::string &title, const std::string &x_label,
                    const std::string &y_label, const std::vector<PlotSeries> &series, bool log_y = false) {
    const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto &s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0.0)) continue;
            x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::svg_escape(title)
       << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << std::setprecision(4)
           << xv << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3)
           << (log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << detail::svg_escape(x_label)
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
       << detail::svg_escape(y_label + (log_y ? " (log)" : "")) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << detail::plot_color(s) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
            const double y = series[s].y[i];
            if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
            os << px(series[s].x[i]) << ',' << py(ty(y)) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (s + 1) << "\" text-anchor=\"end\" fill=\""
           << detail::plot_color(s) << "\">" << detail::svg_escape(series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
    detail::write_text_file(path, os.str());
}

/// Bar chart of named values.
inline void
write_bar_plot_svg(const std::filesystem::path &path, const std::string &title,
                   const std::vector<std::pair<std::string, double>> &bars) {
    const double W = 640, H = 400, L = 60, R = 20, T = 40, B = 70;
    double top = 0.0;
    for (const auto &b : bars) top = std::max(top, std::isfinite(b.second) ? b.second : 0.0);
    if (top <= 0.0) top = 1.0;
    const double slot = (W - L - R) / std::max<std::size_t>(bars.size(), 1);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::svg_escape(title)
       << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double v = std::isfinite(bars[i].second) ? std::max(bars[i].second, 0.0) : 0.0;
        const double h = v / top * (H - T - B);
        const double x = L + slot * i + 0.15 * slot;
        os << "<rect x=\"" << x << "\" y=\"" << H - B - h << "\" width=\"" << 0.7 * slot << "\" height=\"" << h
           << "\" fill=\"" << detail::plot_color(i) << "\"/>\n";
        os << "<text x=\"" << x + 0.35 * slot << "\" y=\"" << H - B - h - 4 << "\" text-anchor=\"middle\">"
           << std::setprecision(4) << bars[i].second << "</text>\n";
        os << "<text x=\"" << x + 0.35 * slot << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
           << detail::svg_escape(bars[i].first) << "</text>\n";
    }
    os << "</svg>\n";
    detail::write_text_file(path, os.str());
}

/// Long-format CSV (series,x,y) next to a line plot.
inline void
write_series_csv(const std::filesystem::path &path, const std::vector<PlotSeries> &series) {
    std::ostringstream os;
    os << std::setprecision(17) << "series,x,y\n";
    for (const auto &s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) os << s.name << ',' << s.x[i] << ',' << s.y[i] << '\n';
    }
    detail::write_text_file(path, os.str());
}

} // namespace bodysplat
