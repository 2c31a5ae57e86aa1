// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal deterministic SVG plotting: line/scatter series with optional
// error bars, linear or log-10 y axis, reference lines, and a legend.
// Output bytes depend only on the plot description.

#pragma once

#include <string>
#include <vector>

namespace deskdiff {

struct SvgSeries {
    std::string label;
    std::string color;  // empty: assigned from a fixed palette by index
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;  // optional; same length as y when present
    bool draw_line = true;
    bool draw_markers = true;
    bool dashed = false;
};

// Vertical (constant-x) or horizontal (constant-y) dashed reference line.
struct SvgRefLine {
    bool vertical = true;
    double value = 0.0;
    std::string label;
};

struct SvgPlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 420;
    bool log_y = false;  // requires positive y values; others are skipped
    std::vector<SvgSeries> series;
    std::vector<SvgRefLine> ref_lines;
};

std::string render_svg_plot(const SvgPlotSpec& spec);
void write_svg_plot(const std::string& path, const SvgPlotSpec& spec);

}  // namespace deskdiff
