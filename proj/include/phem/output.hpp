/*
 * Copyright (C) 2026 The phem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// CSV tables and self-contained SVG plots. Output is a pure function of the
// data: no timestamps, fixed number formatting.

#ifndef PHEM_OUTPUT_HPP
#define PHEM_OUTPUT_HPP

#include <phem/core.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace phem {

/// Nine significant digits.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x == 0.0 ? 0.0 : x);  // no "-0"
    return buf;
}

/// Quotes a field when it holds a comma, quote or line break (RFC 4180).
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) : cols_(header.size()) { write(header); }

    void row(const std::vector<std::string>& fields) {
        if (fields.size() != cols_) throw InvalidArgument("csv row has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(cols_));
        write(fields);
    }

    const std::string& str() const { return text_; }

private:
    void write(const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_field(f[i]);
        }
        text_ += "\r\n";
    }
    std::size_t cols_;
    std::string text_;
};

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

inline std::string px(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

/// Perceptually ordered dark-blue to yellow ramp; t in [0, 1].
inline std::string colormap(double t) {
    static const std::array<std::array<double, 3>, 5> stops = {{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    if (!std::isfinite(t)) return "#808080";
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(k);
    char buf[8];
    int c[3];
    for (int j = 0; j < 3; ++j) c[j] = static_cast<int>(std::lround(stops[k][j] + f * (stops[k + 1][j] - stops[k][j])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

inline std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12, const char* extra = "") {
    return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\"" + extra + ">" + xml_escape(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* stroke = "black", double width = 1.0) {
    return "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + px(width) + "\"/>\n";
}

inline std::string rect(double x, double y, double w, double h, const std::string& fill, const char* stroke = "none") {
    return "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" + px(h) + "\" fill=\"" + fill +
           "\" stroke=\"" + stroke + "\"/>\n";
}

inline std::string svg_open(double w, double h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(w) +
           "\" height=\"" + px(h) + "\" viewBox=\"0 0 " + px(w) + " " + px(h) + "\">\n" + rect(0, 0, w, h, "white");
}

/// Cell boundaries around sample points (midpoints, extended at the ends).
inline std::vector<double> cell_edges(const std::vector<double>& v) {
    std::vector<double> e(v.size() + 1);
    if (v.size() == 1) {
        e[0] = v[0] - 0.5;
        e[1] = v[0] + 0.5;
        return e;
    }
    for (std::size_t i = 1; i < v.size(); ++i) e[i] = 0.5 * (v[i - 1] + v[i]);
    e.front() = v.front() - (e[1] - v.front());
    e.back() = v.back() + (v.back() - e[v.size() - 1]);
    return e;
}

/// Five evenly spaced tick values over [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
    std::vector<double> t;
    for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4.0);
    return t;
}

struct Frame {
    double left, top, width, height;
    double x0, x1, y0, y1;
    double X(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double Y(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    std::string s = rect(f.left, f.top, f.width, f.height, "none", "black");
    for (double t : ticks(f.x0, f.x1)) {
        s += line(f.X(t), f.top + f.height, f.X(t), f.top + f.height + 5);
        s += text(f.X(t), f.top + f.height + 18, format_number(std::round(t * 1e4) / 1e4), "middle", 11);
    }
    for (double t : ticks(f.y0, f.y1)) {
        s += line(f.left - 5, f.Y(t), f.left, f.Y(t));
        s += text(f.left - 8, f.Y(t) + 4, format_number(std::round(t * 1e4) / 1e4), "end", 11);
    }
    s += text(f.left + f.width / 2, f.top + f.height + 38, xlabel);
    s += text(f.left - 48, f.top + f.height / 2, ylabel, "middle", 12,
              (" transform=\"rotate(-90 " + px(f.left - 48) + " " + px(f.top + f.height / 2) + ")\"").c_str());
    return s;
}

}  // namespace detail

struct Heatmap {
    std::string title;
    std::string xlabel, ylabel, zlabel;
    std::vector<double> x;  // columns
    std::vector<double> y;  // rows
    Eigen::MatrixXd z;      // rows follow y, columns x
};

/// Heatmap with a colorbar whose limits are written out as text.
inline std::string render_heatmap(const Heatmap& h) {
    using namespace detail;
    if (h.z.rows() != static_cast<Eigen::Index>(h.y.size()) || h.z.cols() != static_cast<Eigen::Index>(h.x.size()) || h.x.empty() || h.y.empty())
        throw InvalidArgument("render_heatmap: grid and value shapes differ");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < h.z.size(); ++i)
        if (std::isfinite(h.z(i))) {
            lo = std::min(lo, h.z(i));
            hi = std::max(hi, h.z(i));
        }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    const double span = hi > lo ? hi - lo : 1.0;

    const auto xe = cell_edges(h.x), ye = cell_edges(h.y);
    const Frame f{70, 40, 460, 420, std::min(xe.front(), xe.back()), std::max(xe.front(), xe.back()), std::min(ye.front(), ye.back()),
                  std::max(ye.front(), ye.back())};
    std::string s = svg_open(660, 520);
    s += text(f.left + f.width / 2, 24, h.title, "middle", 14);
    for (std::size_t i = 0; i < h.y.size(); ++i)
        for (std::size_t j = 0; j < h.x.size(); ++j) {
            const double xa = f.X(xe[j]), xb = f.X(xe[j + 1]), ya = f.Y(ye[i]), yb = f.Y(ye[i + 1]);
            // Slight overlap hides anti-aliasing seams between cells.
            s += rect(std::min(xa, xb), std::min(ya, yb), std::abs(xb - xa) + 0.3, std::abs(yb - ya) + 0.3,
                      colormap((h.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - lo) / span));
        }
    s += axes(f, h.xlabel, h.ylabel);

    // Colorbar.
    const double cx = 570, cw = 20, steps = 64;
    for (int k = 0; k < steps; ++k) {
        const double t0 = k / steps;
        s += rect(cx, f.top + f.height * (1 - t0 - 1 / steps), cw, f.height / steps + 0.3, colormap(t0 + 0.5 / steps));
    }
    s += rect(cx, f.top, cw, f.height, "none", "black");
    s += "<g id=\"colorbar-limits\">\n";
    s += text(cx + cw + 4, f.top + 10, "max " + format_number(hi), "start", 11);
    s += text(cx + cw + 4, f.top + f.height, "min " + format_number(lo), "start", 11);
    s += "</g>\n";
    s += text(cx + cw / 2, f.top - 8, h.zlabel, "middle", 12);
    return s + "</svg>\n";
}

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
    bool points = true;  // markers, else a polyline
};

struct Panel {
    std::string xlabel, ylabel;
    std::vector<Series> series;
    double y0 = std::numeric_limits<double>::quiet_NaN(), y1 = std::numeric_limits<double>::quiet_NaN();
};

/// Panels side by side sharing the vertical (frequency) axis; x is each
/// panel's own abscissa and y is common.
inline std::string render_panels(const std::string& title, const std::vector<Panel>& panels) {
    using namespace detail;
    if (panels.empty()) throw InvalidArgument("render_panels: nothing to draw");
    const double pw = 300, ph = 420, gap = 90;
    const double W = 80 + panels.size() * (pw + gap), H = 540;
    std::string s = svg_open(W, H);
    s += text(W / 2, 24, title, "middle", 14);
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const Panel& p = panels[k];
        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
        for (const auto& se : p.series)
            for (std::size_t i = 0; i < se.x.size(); ++i)
                if (std::isfinite(se.x[i]) && std::isfinite(se.y[i])) {
                    xlo = std::min(xlo, se.x[i]);
                    xhi = std::max(xhi, se.x[i]);
                    ylo = std::min(ylo, se.y[i]);
                    yhi = std::max(yhi, se.y[i]);
                }
        if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
        if (!std::isnan(p.y0)) ylo = p.y0;
        if (!std::isnan(p.y1)) yhi = p.y1;
        if (xhi <= xlo) xhi = xlo + 1;
        if (yhi <= ylo) yhi = ylo + 1;
        const Frame f{80 + k * (pw + gap), 50, pw, ph, xlo, xhi, ylo, yhi};
        s += axes(f, p.xlabel, p.ylabel);
        double ly = f.top + 14;
        for (const auto& se : p.series) {
            std::string path;
            for (std::size_t i = 0; i < se.x.size(); ++i) {
                if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i]) || se.y[i] < ylo || se.y[i] > yhi) continue;
                if (se.points) {
                    s += "<circle cx=\"" + px(f.X(se.x[i])) + "\" cy=\"" + px(f.Y(se.y[i])) + "\" r=\"1.6\" fill=\"" + se.color + "\"/>\n";
                } else {
                    path += (path.empty() ? "" : " ") + px(f.X(se.x[i])) + "," + px(f.Y(se.y[i]));
                }
            }
            if (!path.empty()) s += "<polyline fill=\"none\" stroke=\"" + se.color + "\" stroke-width=\"1.2\" points=\"" + path + "\"/>\n";
            if (!se.label.empty()) {
                s += rect(f.left + f.width - 110, ly - 8, 10, 10, se.color);
                s += text(f.left + f.width - 96, ly + 1, se.label, "start", 11);
                ly += 16;
            }
        }
    }
    return s + "</svg>\n";
}

}  // namespace phem

#endif  // PHEM_OUTPUT_HPP
