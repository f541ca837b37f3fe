#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "angleform/sim.hpp"

namespace angleform {

namespace svg_detail {

inline constexpr int kWidth = 820;
inline constexpr int kHeight = 520;
inline constexpr int kMarginLeft = 70;
inline constexpr int kMarginRight = 20;
inline constexpr int kMarginTop = 40;
inline constexpr int kMarginBottom = 55;

inline const char* palette(size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Mapper {
    double x_lo, x_hi, y_lo, y_hi;
    double px(double x) const {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

inline void open_svg(std::ofstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

inline void axis_frame(std::ofstream& os, const std::string& x_label, const std::string& y_label) {
    os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
       << kWidth - kMarginLeft - kMarginRight << "\" height=\""
       << kHeight - kMarginTop - kMarginBottom
       << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\">"
       << y_label << "</text>\n";
}

inline double nice_step(double range) {
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    if (frac < 1.5) return mag;
    if (frac < 3.5) return 2.0 * mag;
    if (frac < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

inline void x_ticks(std::ofstream& os, const Mapper& m) {
    const double step = nice_step(m.x_hi - m.x_lo);
    for (double v = std::ceil(m.x_lo / step) * step; v <= m.x_hi + 1e-12; v += step) {
        const double x = m.px(v);
        os << "<line x1=\"" << x << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\"" << x
           << "\" y2=\"" << kHeight - kMarginBottom + 5 << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << kHeight - kMarginBottom + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(v)
           << "</text>\n";
    }
}

}  // namespace svg_detail

/// Multi-series line plot; with log_y the values are drawn on a decade scale
/// (nonpositive samples are dropped).
inline void write_line_plot_svg(const std::string& path, const std::string& title,
                                const std::string& x_label, const std::string& y_label,
                                const std::vector<std::string>& labels,
                                const std::vector<const std::vector<double>*>& xs,
                                const std::vector<const std::vector<double>*>& ys, bool log_y) {
    namespace d = svg_detail;
    std::ofstream os(path);
    d::open_svg(os, title);

    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (size_t s = 0; s < ys.size(); ++s) {
        for (size_t i = 0; i < ys[s]->size(); ++i) {
            double y = (*ys[s])[i];
            if (log_y) {
                if (y <= 0.0) continue;
                y = std::log10(std::max(y, 1e-16));
            }
            const double x = (*xs[s])[i];
            if (first) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                first = false;
            }
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
    if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
    const d::Mapper m{x_lo, x_hi, y_lo, y_hi};

    d::axis_frame(os, x_label, log_y ? y_label + " (log)" : y_label);
    d::x_ticks(os, m);
    if (log_y) {
        for (double dec = std::ceil(y_lo); dec <= std::floor(y_hi) + 1e-12; dec += 1.0) {
            const double y = m.py(dec);
            os << "<line x1=\"" << d::kMarginLeft << "\" y1=\"" << y << "\" x2=\""
               << d::kWidth - d::kMarginRight << "\" y2=\"" << y
               << "\" stroke=\"#ddd\" stroke-width=\"0.7\"/>\n";
            os << "<text x=\"" << d::kMarginLeft - 8 << "\" y=\"" << y + 4
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
               << static_cast<int>(dec) << "</text>\n";
        }
    } else {
        const double step = d::nice_step(y_hi - y_lo);
        for (double v = std::ceil(y_lo / step) * step; v <= y_hi + 1e-12; v += step) {
            const double y = m.py(v);
            os << "<line x1=\"" << d::kMarginLeft << "\" y1=\"" << y << "\" x2=\""
               << d::kWidth - d::kMarginRight << "\" y2=\"" << y
               << "\" stroke=\"#ddd\" stroke-width=\"0.7\"/>\n";
            os << "<text x=\"" << d::kMarginLeft - 8 << "\" y=\"" << y + 4
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
               << d::fmt(v) << "</text>\n";
        }
    }

    for (size_t s = 0; s < ys.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << d::palette(s)
           << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < ys[s]->size(); ++i) {
            double y = (*ys[s])[i];
            if (log_y) {
                if (y <= 0.0) continue;
                y = std::log10(std::max(y, 1e-16));
            }
            os << d::fmt(m.px((*xs[s])[i])) << "," << d::fmt(m.py(y)) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << d::kWidth - d::kMarginRight - 8 << "\" y=\""
           << d::kMarginTop + 18 + 16 * static_cast<int>(s)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
           << d::palette(s) << "\">" << labels[s] << "</text>\n";
    }
    os << "</svg>\n";
}

/// Planar agent paths with open start markers and filled end markers.
inline void write_trajectory_svg(const std::string& path, const std::string& title,
                                 const TrajectoryRecord& rec) {
    namespace d = svg_detail;
    std::ofstream os(path);
    d::open_svg(os, title);

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const Configuration& q : rec.positions)
        for (const Vec2& p : q.positions) {
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min(y_lo, p.y);
            y_hi = std::max(y_hi, p.y);
        }
    const double pad_x = std::max(0.05 * (x_hi - x_lo), 0.05);
    const double pad_y = std::max(0.05 * (y_hi - y_lo), 0.05);
    const d::Mapper m{x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y};

    d::axis_frame(os, "x [m]", "y [m]");
    d::x_ticks(os, m);

    const int n = rec.positions.front().size();
    const int stride = std::max(1, rec.samples() / 2000);
    for (int a = 1; a <= n; ++a) {
        os << "<polyline fill=\"none\" stroke=\"" << d::palette(static_cast<size_t>(a) - 1)
           << "\" stroke-width=\"1.2\" points=\"";
        for (int i = 0; i < rec.samples(); i += stride) {
            const Vec2 p = rec.positions[static_cast<size_t>(i)].agent(a);
            os << d::fmt(m.px(p.x)) << "," << d::fmt(m.py(p.y)) << " ";
        }
        const Vec2 last = rec.positions.back().agent(a);
        os << d::fmt(m.px(last.x)) << "," << d::fmt(m.py(last.y)) << "\"/>\n";

        const Vec2 start = rec.positions.front().agent(a);
        os << "<circle cx=\"" << d::fmt(m.px(start.x)) << "\" cy=\"" << d::fmt(m.py(start.y))
           << "\" r=\"5\" fill=\"white\" stroke=\""
           << d::palette(static_cast<size_t>(a) - 1) << "\" stroke-width=\"1.5\"/>\n";
        os << "<circle cx=\"" << d::fmt(m.px(last.x)) << "\" cy=\"" << d::fmt(m.py(last.y))
           << "\" r=\"5\" fill=\"" << d::palette(static_cast<size_t>(a) - 1) << "\"/>\n";
        os << "<text x=\"" << d::fmt(m.px(last.x) + 8) << "\" y=\"" << d::fmt(m.py(last.y) - 8)
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
           << d::palette(static_cast<size_t>(a) - 1) << "\">" << a << "</text>\n";
    }
    os << "</svg>\n";
}

/// Fitted versus predicted decay rate per follower.
inline void write_rates_svg(const std::string& path, const std::string& title,
                            const std::vector<int>& agents,
                            const std::vector<double>& predicted,
                            const std::vector<double>& fitted) {
    namespace d = svg_detail;
    std::ofstream os(path);
    d::open_svg(os, title);
    double hi = 0.0;
    for (double v : predicted) hi = std::max(hi, v);
    for (double v : fitted) hi = std::max(hi, v);
    const d::Mapper m{-0.5, agents.size() - 0.5, 0.0, hi * 1.15 + 1e-9};
    d::axis_frame(os, "follower", "decay rate [1/s]");

    const double step = d::nice_step(m.y_hi);
    for (double v = 0.0; v <= m.y_hi + 1e-12; v += step) {
        const double y = m.py(v);
        os << "<line x1=\"" << d::kMarginLeft << "\" y1=\"" << y << "\" x2=\""
           << d::kWidth - d::kMarginRight << "\" y2=\"" << y
           << "\" stroke=\"#ddd\" stroke-width=\"0.7\"/>\n";
        os << "<text x=\"" << d::kMarginLeft - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << d::fmt(v)
           << "</text>\n";
    }
    for (size_t i = 0; i < agents.size(); ++i) {
        const double x = m.px(static_cast<double>(i));
        os << "<text x=\"" << x << "\" y=\"" << d::kHeight - d::kMarginBottom + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">agent "
           << agents[i] << "</text>\n";
        const double wp = 18.0;
        os << "<rect x=\"" << x - wp - 2 << "\" y=\"" << m.py(predicted[i]) << "\" width=\"" << wp
           << "\" height=\"" << m.py(0.0) - m.py(predicted[i])
           << "\" fill=\"#1f77b4\" fill-opacity=\"0.8\"/>\n";
        os << "<rect x=\"" << x + 2 << "\" y=\"" << m.py(fitted[i]) << "\" width=\"" << wp
           << "\" height=\"" << m.py(0.0) - m.py(fitted[i])
           << "\" fill=\"#d62728\" fill-opacity=\"0.8\"/>\n";
    }
    os << "<text x=\"" << d::kWidth - d::kMarginRight - 8 << "\" y=\"" << d::kMarginTop + 18
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
       << "fill=\"#1f77b4\">predicted</text>\n";
    os << "<text x=\"" << d::kWidth - d::kMarginRight - 8 << "\" y=\"" << d::kMarginTop + 34
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
       << "fill=\"#d62728\">fitted</text>\n";
    os << "</svg>\n";
}

}  // namespace angleform
