// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace flowdmd::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool log_y = false;    ///< nonpositive values are omitted on a log axis
    bool markers = false;  ///< scatter points instead of polylines
};

/// Standalone SVG document; output depends only on the chart contents.
std::string render(const Chart& chart);

/// Escape &, <, >, " and ' for use in text nodes and attributes.
std::string escape(const std::string& s);

}  // namespace flowdmd::svg
