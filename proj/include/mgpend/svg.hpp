#ifndef MGPEND_SVG_HPP
#define MGPEND_SVG_HPP

// Minimal static SVG emitter for log-log line plots and scatter overlays.

#include "mgpend/budget.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace mgpend {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool dashed = false;
    bool markers_only = false;
};

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    int width = 800;
    int height = 560;
};

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline const char* palette(std::size_t i)
{
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

}  // namespace detail

/// Renders the plot with decade-aligned log axes. Non-positive points are skipped.
inline std::string render_loglog(const SvgPlot& plot)
{
    const double left = 90, right = 200, top = 40, bottom = 60;
    const double pw = plot.width - left - right;
    const double ph = plot.height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmax > 0.0)) {
        xmin = ymin = 1.0;
        xmax = ymax = 10.0;
    }
    const double lx0 = std::floor(std::log10(xmin));
    const double lx1 = std::max(lx0 + 1, std::ceil(std::log10(xmax)));
    const double ly0 = std::floor(std::log10(ymin));
    const double ly1 = std::max(ly0 + 1, std::ceil(std::log10(ymax)));
    auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
    auto py = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\""
           + std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
           + detail::escape_xml(plot.title) + "</text>\n";

    for (double d = lx0; d <= lx1 + 1e-9; d += 1.0) {
        const double x = left + (d - lx0) / (lx1 - lx0) * pw;
        svg += "<line x1=\"" + detail::fmt(x) + "\" y1=\"" + detail::fmt(top) + "\" x2=\"" + detail::fmt(x) + "\" y2=\""
               + detail::fmt(top + ph) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(top + ph + 18)
               + "\" text-anchor=\"middle\">1e" + std::to_string(static_cast<int>(d)) + "</text>\n";
    }
    for (double d = ly0; d <= ly1 + 1e-9; d += 1.0) {
        const double y = top + (ly1 - d) / (ly1 - ly0) * ph;
        svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(y) + "\" x2=\"" + detail::fmt(left + pw)
               + "\" y2=\"" + detail::fmt(y) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::fmt(left - 6) + "\" y=\"" + detail::fmt(y + 4) + "\" text-anchor=\"end\">1e"
               + std::to_string(static_cast<int>(d)) + "</text>\n";
    }
    svg += "<rect x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(top) + "\" width=\"" + detail::fmt(pw)
           + "\" height=\"" + detail::fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" + detail::fmt(plot.height - 16.0)
           + "\" text-anchor=\"middle\">" + detail::escape_xml(plot.x_label) + "</text>\n";
    svg += "<text transform=\"translate(22," + detail::fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">"
           + detail::escape_xml(plot.y_label) + "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const std::string color = s.color.empty() ? detail::palette(k) : s.color;
        if (s.markers_only) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
                svg += "<circle cx=\"" + detail::fmt(px(s.x[i])) + "\" cy=\"" + detail::fmt(py(s.y[i]))
                       + "\" r=\"4\" fill=\"" + color + "\"/>\n";
            }
        } else {
            svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"";
            if (s.dashed) svg += " stroke-dasharray=\"6,4\"";
            svg += " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
                svg += detail::fmt(px(s.x[i])) + "," + detail::fmt(py(s.y[i])) + " ";
            }
            svg += "\"/>\n";
        }
        const double ly = top + 16 + 18.0 * static_cast<double>(k);
        const double lx = left + pw + 12;
        svg += "<line x1=\"" + detail::fmt(lx) + "\" y1=\"" + detail::fmt(ly - 4) + "\" x2=\"" + detail::fmt(lx + 24)
               + "\" y2=\"" + detail::fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\""
               + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        svg += "<text x=\"" + detail::fmt(lx + 30) + "\" y=\"" + detail::fmt(ly) + "\">" + detail::escape_xml(s.label)
               + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline std::string budget_to_svg(const Budget& b, const std::string& title = "Displacement noise budget")
{
    SvgPlot plot;
    plot.title = title;
    plot.x_label = "Frequency [Hz]";
    plot.y_label = "Displacement [m/sqrt(Hz)]";
    for (const auto& c : b.components) plot.series.push_back({c.label, c.frequencies, c.asd, "", false, false});
    if (b.total) plot.series.push_back({"total", b.total->frequencies, b.total->asd, "#000000", false, false});
    plot.series.push_back({"SQL", b.sql.frequencies, b.sql.asd, "#555555", true, false});
    return render_loglog(plot);
}

}  // namespace mgpend

#endif
