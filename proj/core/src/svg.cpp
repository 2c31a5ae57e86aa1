// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "deskdiff/errors.hpp"
#include "deskdiff/io.hpp"

namespace deskdiff {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 46;
constexpr double kMarkerRadius = 3.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

// Snaps away accumulated floating-point dirt so tick labels read cleanly.
double snap(double v) {
    if (std::abs(v) >= 1e15 || v == 0.0) return v;
    return std::round(v * 1e12) / 1e12;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
};

std::vector<double> linear_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    const long k0 = static_cast<long>(std::ceil(lo / step - 1e-9));
    const long k1 = static_cast<long>(std::floor(hi / step + 1e-9));
    for (long k = k0; k <= k1; ++k) ticks.push_back(snap(static_cast<double>(k) * step));
    return ticks;
}

std::vector<double> decade_ticks(double lo, double hi) {
    std::vector<double> ticks;
    const int k0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
    const int k1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
    for (int k = k0; k <= k1; ++k) ticks.push_back(std::pow(10.0, k));
    if (ticks.empty()) ticks = {lo, hi};
    return ticks;
}

}  // namespace

std::string render_svg_plot(const SvgPlotSpec& spec) {
    for (const SvgSeries& s : spec.series) {
        if (s.x.size() != s.y.size()) throw ConfigError("svg: series x/y length mismatch");
        if (!s.y_err.empty() && s.y_err.size() != s.y.size())
            throw ConfigError("svg: series error-bar length mismatch");
    }

    const auto usable = [&](double v) {
        return std::isfinite(v) && (!spec.log_y || v > 0.0);
    };

    Range rx, ry;
    for (const SvgSeries& s : spec.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !usable(s.y[i])) continue;
            rx.include(s.x[i]);
            ry.include(s.y[i]);
            if (!s.y_err.empty() && std::isfinite(s.y_err[i])) {
                if (usable(s.y[i] + s.y_err[i])) ry.include(s.y[i] + s.y_err[i]);
                if (usable(s.y[i] - s.y_err[i])) ry.include(s.y[i] - s.y_err[i]);
            }
        }
    for (const SvgRefLine& r : spec.ref_lines)
        (r.vertical ? rx : ry).include(r.value);
    if (!rx.valid() || !ry.valid()) throw ConfigError("svg: no drawable points");

    const auto pad = [](Range& r, bool log_scale) {
        if (log_scale) {
            if (r.hi == r.lo) {
                r.lo *= 0.5;
                r.hi *= 2.0;
            } else {
                const double f = std::pow(r.hi / r.lo, 0.05);
                r.lo /= f;
                r.hi *= f;
            }
        } else {
            const double span = r.hi - r.lo;
            const double p = span > 0.0 ? 0.05 * span : std::max(1.0, std::abs(r.lo)) * 0.1;
            r.lo -= p;
            r.hi += p;
        }
    };
    pad(rx, false);
    pad(ry, spec.log_y);

    const double x0 = kMarginLeft, x1 = spec.width - kMarginRight;
    const double y0 = spec.height - kMarginBottom, y1 = kMarginTop;
    const auto map_x = [&](double v) { return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0); };
    const auto map_y = [&](double v) {
        const double u = spec.log_y ? (std::log10(v) - std::log10(ry.lo)) /
                                          (std::log10(ry.hi) - std::log10(ry.lo))
                                    : (v - ry.lo) / (ry.hi - ry.lo);
        return y0 + u * (y1 - y0);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
           "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
           std::to_string(spec.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";

    const std::vector<double> xticks = linear_ticks(rx.lo, rx.hi);
    const std::vector<double> yticks =
        spec.log_y ? decade_ticks(ry.lo, ry.hi) : linear_ticks(ry.lo, ry.hi);
    for (double t : xticks) {
        const double gx = map_x(t);
        svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(gx) +
               "\" y2=\"" + px(y1) + "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + px(gx) + "\" y=\"" + px(y0 + 16) +
               "\" text-anchor=\"middle\">" + xml_escape(format_double(t)) + "</text>\n";
    }
    for (double t : yticks) {
        const double gy = map_y(t);
        svg += "<line x1=\"" + px(x0) + "\" y1=\"" + px(gy) + "\" x2=\"" + px(x1) +
               "\" y2=\"" + px(gy) + "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + px(x0 - 6) + "\" y=\"" + px(gy + 4) +
               "\" text-anchor=\"end\">" + xml_escape(format_double(t)) + "</text>\n";
    }
    svg += "<rect x=\"" + px(x0) + "\" y=\"" + px(y1) + "\" width=\"" + px(x1 - x0) +
           "\" height=\"" + px(y0 - y1) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

    if (!spec.title.empty())
        svg += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(y1 - 10.0) +
               "\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(spec.title) +
               "</text>\n";
    if (!spec.x_label.empty())
        svg += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" +
               px(spec.height - 10.0) + "\" text-anchor=\"middle\">" +
               xml_escape(spec.x_label) + "</text>\n";
    if (!spec.y_label.empty())
        svg += "<text x=\"14\" y=\"" + px((y0 + y1) / 2) +
               "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
               px((y0 + y1) / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";

    for (const SvgRefLine& r : spec.ref_lines) {
        std::string line;
        double lx, ly;
        if (r.vertical) {
            const double gx = map_x(r.value);
            line = "<line x1=\"" + px(gx) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(gx) +
                   "\" y2=\"" + px(y1) + "\"";
            lx = gx + 4;
            ly = y1 + 14;
        } else {
            const double gy = map_y(r.value);
            line = "<line x1=\"" + px(x0) + "\" y1=\"" + px(gy) + "\" x2=\"" + px(x1) +
                   "\" y2=\"" + px(gy) + "\"";
            lx = x0 + 6;
            ly = gy - 5;
        }
        svg += line + " stroke=\"#444444\" stroke-dasharray=\"5,4\"/>\n";
        if (!r.label.empty())
            svg += "<text x=\"" + px(lx) + "\" y=\"" + px(ly) + "\" fill=\"#444444\">" +
                   xml_escape(r.label) + "</text>\n";
    }

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const SvgSeries& s = spec.series[si];
        const std::string color =
            s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
        const std::string dash = s.dashed ? " stroke-dasharray=\"6,4\"" : "";

        if (!s.y_err.empty())
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !usable(s.y[i]) || !(s.y_err[i] > 0.0))
                    continue;
                const double gx = map_x(s.x[i]);
                const double top = usable(s.y[i] + s.y_err[i])
                                       ? map_y(s.y[i] + s.y_err[i])
                                       : map_y(s.y[i]);
                const double bot = usable(s.y[i] - s.y_err[i])
                                       ? map_y(s.y[i] - s.y_err[i])
                                       : map_y(s.y[i]);
                svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(bot) + "\" x2=\"" + px(gx) +
                       "\" y2=\"" + px(top) + "\" stroke=\"" + color + "\"/>\n";
                for (double gy : {top, bot})
                    svg += "<line x1=\"" + px(gx - 3) + "\" y1=\"" + px(gy) + "\" x2=\"" +
                           px(gx + 3) + "\" y2=\"" + px(gy) + "\" stroke=\"" + color +
                           "\"/>\n";
            }

        if (s.draw_line) {
            std::string points;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !usable(s.y[i])) continue;
                if (!points.empty()) points += ' ';
                points += px(map_x(s.x[i])) + "," + px(map_y(s.y[i]));
            }
            if (!points.empty())
                svg += "<polyline fill=\"none\" stroke=\"" + color +
                       "\" stroke-width=\"1.5\"" + dash + " points=\"" + points + "\"/>\n";
        }
        if (s.draw_markers)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !usable(s.y[i])) continue;
                svg += "<circle cx=\"" + px(map_x(s.x[i])) + "\" cy=\"" +
                       px(map_y(s.y[i])) + "\" r=\"" + px(kMarkerRadius) + "\" fill=\"" +
                       color + "\"/>\n";
            }
    }

    double ly = y1 + 14;
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const SvgSeries& s = spec.series[si];
        if (s.label.empty()) continue;
        const std::string color =
            s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
        const double lx = x1 - 150;
        svg += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" +
               px(lx + 22) + "\" y2=\"" + px(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") +
               "/>\n";
        svg += "<text x=\"" + px(lx + 28) + "\" y=\"" + px(ly) + "\">" +
               xml_escape(s.label) + "</text>\n";
        ly += 16;
    }

    svg += "</g>\n</svg>\n";
    return svg;
}

void write_svg_plot(const std::string& path, const SvgPlotSpec& spec) {
    write_text_file(path, render_svg_plot(spec));
}

}  // namespace deskdiff
