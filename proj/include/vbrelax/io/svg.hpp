// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Static SVG plots: data markers with optional error bars and fitted lines.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/error.hpp"

namespace vbrelax::io {

enum class SeriesStyle { markers, line };

struct PlotSeries {
    std::string name;
    SeriesStyle style = SeriesStyle::markers;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    /// Error-bar half lengths; empty for none.
    std::vector<double> y_error;
};

struct PlotStyle {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 420;
};

namespace detail {

inline std::string xml_escape(const std::string& s)
{
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

/// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
inline double nice_step(double span, int target)
{
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

} // namespace detail

inline std::string emit_plot_svg(const std::vector<PlotSeries>& series, const PlotStyle& style)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    std::size_t total = 0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || (!s.y_error.empty() && s.y_error.size() != s.y.size()))
            throw InvalidArgument("plot series '" + s.name + "' has mismatched lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double e = s.y_error.empty() ? 0.0 : s.y_error[i];
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i] - e);
            y1 = std::max(y1, s.y[i] + e);
        }
        total += s.x.size();
    }
    if (total == 0) throw InvalidArgument("nothing to plot");
    if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
    if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double left = 80, right = 20, top = 40, bottom = 60;
    const double pw = style.width - left - right, ph = style.height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::string out = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
        style.width, style.height);
    out += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       left + pw / 2, detail::xml_escape(style.title));
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
                       "stroke=\"black\"/>\n",
                       left, top, pw, ph);

    out += "<g class=\"ticks\" font-size=\"11\">\n";
    const double xs = detail::nice_step(x1 - x0, 6);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs)
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
                           "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.6g}</text>\n",
                           px(t), top + ph, top + ph + 5, top + ph + 18, std::abs(t) < 1e-12 * xs ? 0.0 : t);
    const double ys = detail::nice_step(y1 - y0, 6);
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys)
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>"
                           "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.6g}</text>\n",
                           left - 5, py(t), left, left - 8, py(t) + 4, std::abs(t) < 1e-12 * ys ? 0.0 : t);
    out += "</g>\n";
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                       left + pw / 2, style.height - 15.0, detail::xml_escape(style.x_label));
    out += fmt::format("<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" font-size=\"13\" "
                       "transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
                       top + ph / 2, detail::xml_escape(style.y_label));

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        out += fmt::format("<g class=\"series\" id=\"series-{}\" data-name=\"{}\">\n", k, detail::xml_escape(s.name));
        if (s.style == SeriesStyle::line) {
            out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", s.color);
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(s.x[i]), py(s.y[i]));
            out += "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!s.y_error.empty())
                    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
                                       "stroke=\"{3}\"/>",
                                       px(s.x[i]), py(s.y[i] - s.y_error[i]), py(s.y[i] + s.y_error[i]), s.color);
                out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[i]),
                                   py(s.y[i]), s.color);
            }
        }
        out += "</g>\n";
        const double ly = top + 16.0 + 16.0 * static_cast<double>(k);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" font-size=\"12\" fill=\"{}\">{}</text>\n",
                           left + pw - 8, ly, s.color, detail::xml_escape(s.name));
    }
    out += "</svg>\n";
    return out;
}

} // namespace vbrelax::io
