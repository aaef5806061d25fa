#pragma once

// Minimal SVG line plots of one column against the sweep value. Derived
// output only: nothing reads these back.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nhtop/experiments/record.hpp"

namespace nhtop {

inline bool log_scaled_column(const std::string& name) {
    return name == "min_s" || name == "min_abs_e" || name == "min_s_minus" || name == "min_s_plus" ||
           name == "kappa";
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v, bool log) {
    char buf[32];
    if (log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
    else std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace detail

/// Median over realizations at each sweep value, drawn as a polyline with
/// per-realization markers. Log axes drop non-positive values.
inline std::string svg_plot(const std::vector<SweepRecord>& records, const std::string& column, bool log_y,
                            const std::string& title = "") {
    const Column* col = find_column(column);
    if (!col || col->kind == ColumnKind::Text) throw InvalidInput("svg_plot: no numeric column '" + column + "'");

    std::map<double, std::vector<double>> by_x;
    for (const SweepRecord& r : records) {
        const std::string s = col->get(r);
        if (s.empty()) continue;
        const double v = parse_real(s);
        if (!std::isfinite(v) || (log_y && v <= 0.0)) continue;
        by_x[r.sweep_value].push_back(log_y ? std::log10(v) : v);
    }

    const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           detail::xml_escape(title.empty() ? column : title) + "</text>\n";
    if (by_x.empty()) {
        svg += "<text x=\"320\" y=\"210\" text-anchor=\"middle\" font-family=\"sans-serif\">no data</text>\n</svg>\n";
        return svg;
    }

    double x0 = by_x.begin()->first, x1 = by_x.rbegin()->first;
    double y0 = INFINITY, y1 = -INFINITY;
    for (const auto& [x, ys] : by_x) {
        for (double y : ys) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (log_y) {
        y0 = std::floor(y0);
        y1 = std::ceil(y1);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };

    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(H - bottom) + "\" x2=\"" +
           detail::svg_num(W - right) + "\" y2=\"" + detail::svg_num(H - bottom) + "\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(top) + "\" x2=\"" +
           detail::svg_num(left) + "\" y2=\"" + detail::svg_num(H - bottom) + "\"/>\n</g>\n";

    svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = x0 + (x1 - x0) * i / 5.0;
        svg += "<text x=\"" + detail::svg_num(px(x)) + "\" y=\"" + detail::svg_num(H - bottom + 16) +
               "\" text-anchor=\"middle\">" + detail::tick_label(x, false) + "</text>\n";
    }
    const int yticks = log_y ? static_cast<int>(std::min(8.0, y1 - y0)) : 5;
    for (int i = 0; i <= yticks; ++i) {
        double y = y0 + (y1 - y0) * i / std::max(yticks, 1);
        if (log_y) y = std::round(y);
        svg += "<text x=\"" + detail::svg_num(left - 6) + "\" y=\"" + detail::svg_num(py(y) + 4) +
               "\" text-anchor=\"end\">" + detail::tick_label(y, log_y) + "</text>\n";
    }
    svg += "<text x=\"" + detail::svg_num((left + W - right) / 2) + "\" y=\"" + detail::svg_num(H - 10) +
           "\" text-anchor=\"middle\">sweep value</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::svg_num((top + H - bottom) / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + detail::svg_num((top + H - bottom) / 2) + ")\">" +
           detail::xml_escape(column) + (log_y ? " (log10)" : "") + "</text>\n</g>\n";

    std::string line;
    std::string dots;
    for (auto& [x, ys] : by_x) {
        std::sort(ys.begin(), ys.end());
        const std::size_t n = ys.size();
        const double med = n % 2 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]);
        line += detail::svg_num(px(x)) + "," + detail::svg_num(py(med)) + " ";
        for (double y : ys) {
            dots += "<circle cx=\"" + detail::svg_num(px(x)) + "\" cy=\"" + detail::svg_num(py(y)) + "\" r=\"2\"/>\n";
        }
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + line + "\"/>\n";
    svg += "<g fill=\"#d62728\">\n" + dots + "</g>\n</svg>\n";
    return svg;
}

}  // namespace nhtop
