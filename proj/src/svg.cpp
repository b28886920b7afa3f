// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "flowdmd/errors.hpp"

namespace flowdmd::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette{"#000000", "#1f77b4", "#d62728", "#2ca02c",
                                              "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Round a span to 1, 2 or 5 times a power of ten.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = frac < 1.5 ? 1.0 : frac < 3.0 ? 2.0 : frac < 7.0 ? 5.0 : 10.0;
    return step * mag;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return lo > hi; }
    void pad() {
        if (empty()) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
            lo -= d;
            hi += d;
        }
    }
};

}  // namespace

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string render(const Chart& chart) {
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) {
            throw ShapeError("series '" + s.label + "' has " + std::to_string(s.x.size()) + " x values and " +
                             std::to_string(s.y.size()) + " y values");
        }
    }

    auto yval = [&](double v) { return chart.log_y ? std::log10(v) : v; };
    auto usable = [&](double y) { return std::isfinite(y) && (!chart.log_y || y > 0.0); };

    Range xr, yr;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
            xr.add(s.x[i]);
            yr.add(yval(s.y[i]));
        }
    }
    xr.pad();
    yr.pad();
    if (chart.log_y) {
        yr.lo = std::floor(yr.lo);
        yr.hi = std::ceil(yr.hi);
    }

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"#ffffff\"/>\n";
    if (!chart.title.empty()) {
        o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
          << escape(chart.title) << "</text>\n";
    }

    // Axes and grid.
    o << "<g stroke=\"#cccccc\" stroke-width=\"0.5\" font-size=\"11\" fill=\"#333333\">\n";
    const double xs = nice_step(xr.hi - xr.lo, 8);
    for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
        o << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(v)) << "\" y2=\""
          << num(kTop + ph) << "\"/>\n";
        o << "<text stroke=\"none\" x=\"" << num(px(v)) << "\" y=\"" << num(kTop + ph + 16)
          << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
    }
    const double ys = chart.log_y ? std::max(1.0, std::ceil((yr.hi - yr.lo) / 8.0)) : nice_step(yr.hi - yr.lo, 6);
    for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
        const std::string label = chart.log_y ? "1e" + tick_label(v) : tick_label(v);
        o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
          << num(py(v)) << "\"/>\n";
        o << "<text stroke=\"none\" x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(v) + 4)
          << "\" text-anchor=\"end\">" << label << "</text>\n";
    }
    o << "</g>\n";
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(chart.x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << num(kTop + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";

    // Data.
    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* color = kPalette[si % kPalette.size()];
        if (chart.markers) {
            o << "<g fill=\"" << color << "\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.y[i])) continue;
                o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(yval(s.y[i]))) << "\" r=\"3\"/>\n";
            }
            o << "</g>\n";
        } else {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.y[i])) continue;
                if (!first) o << ' ';
                o << num(px(s.x[i])) << ',' << num(py(yval(s.y[i])));
                first = false;
            }
            o << "\"/>\n";
        }
    }

    // Legend.
    double ly = kTop + 10;
    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const char* color = kPalette[si % kPalette.size()];
        const double lx = kLeft + pw + 15;
        o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 25) << "\" y2=\"" << num(ly)
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(lx + 32) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
          << escape(chart.series[si].label) << "</text>\n";
        ly += 20;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace flowdmd::svg
