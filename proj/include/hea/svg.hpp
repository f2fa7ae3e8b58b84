#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hea {

/// Minimal self-contained line-chart writer; no display server needed.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)) {}

    void add_series(std::string name, const std::vector<double>& x,
                    const std::vector<double>& y) {
        if (x.size() != y.size())
            throw std::invalid_argument("SvgPlot: series length mismatch");
        series_.push_back({std::move(name), x, y});
    }

    void write(const std::string& path) const {
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& s : series_)
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (first) {
                    xmin = xmax = s.x[i];
                    ymin = ymax = s.y[i];
                    first = false;
                } else {
                    xmin = std::min(xmin, s.x[i]);
                    xmax = std::max(xmax, s.x[i]);
                    ymin = std::min(ymin, s.y[i]);
                    ymax = std::max(ymax, s.y[i]);
                }
            }
        if (xmax - xmin <= 0) xmax = xmin + 1;
        if (ymax - ymin <= 0) ymax = ymin + 1;
        ymin -= 0.05 * (ymax - ymin);
        ymax += 0.05 * (ymax - ymin);

        const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
        auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
        auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

        std::ofstream out(path);
        if (!out) throw std::runtime_error("SvgPlot: cannot open " + path);
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
            << "' height='" << H << "' viewBox='0 0 " << W << " " << H << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << "<text x='" << W / 2 << "' y='22' text-anchor='middle' "
               "font-size='15' font-family='sans-serif'>" << esc(title_)
            << "</text>\n";
        // axes
        out << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R
            << "' y2='" << H - B << "' stroke='black'/>\n"
            << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='"
            << H - B << "' stroke='black'/>\n";
        for (int k = 0; k <= 5; ++k) {
            const double xv = xmin + (xmax - xmin) * k / 5.0;
            const double yv = ymin + (ymax - ymin) * k / 5.0;
            out << "<line x1='" << px(xv) << "' y1='" << H - B << "' x2='"
                << px(xv) << "' y2='" << H - B + 5 << "' stroke='black'/>\n"
                << "<text x='" << px(xv) << "' y='" << H - B + 18
                << "' text-anchor='middle' font-size='11' "
                   "font-family='sans-serif'>" << fmt(xv) << "</text>\n"
                << "<line x1='" << L - 5 << "' y1='" << py(yv) << "' x2='" << L
                << "' y2='" << py(yv) << "' stroke='black'/>\n"
                << "<text x='" << L - 8 << "' y='" << py(yv) + 4
                << "' text-anchor='end' font-size='11' "
                   "font-family='sans-serif'>" << fmt(yv) << "</text>\n";
        }
        out << "<text x='" << (L + W - R) / 2 << "' y='" << H - 10
            << "' text-anchor='middle' font-size='13' "
               "font-family='sans-serif'>" << esc(xlabel_) << "</text>\n"
            << "<text x='16' y='" << (T + H - B) / 2
            << "' text-anchor='middle' font-size='13' font-family='sans-serif' "
               "transform='rotate(-90 16 " << (T + H - B) / 2 << ")'>"
            << esc(ylabel_) << "</text>\n";

        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                        "#9467bd", "#ff7f0e", "#8c564b"};
        for (size_t si = 0; si < series_.size(); ++si) {
            const auto& s = series_[si];
            const char* color = palette[si % 6];
            out << "<polyline fill='none' stroke='" << color
                << "' stroke-width='1.5' points='";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << px(s.x[i]) << "," << py(s.y[i]) << " ";
            }
            out << "'/>\n";
            const double ly = T + 14 + 16 * static_cast<double>(si);
            out << "<line x1='" << W - R - 120 << "' y1='" << ly << "' x2='"
                << W - R - 100 << "' y2='" << ly << "' stroke='" << color
                << "' stroke-width='2'/>\n"
                << "<text x='" << W - R - 95 << "' y='" << ly + 4
                << "' font-size='11' font-family='sans-serif'>" << esc(s.name)
                << "</text>\n";
        }
        out << "</svg>\n";
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };

    static std::string fmt(double v) {
        std::ostringstream os;
        os.precision(4);
        os << v;
        return os.str();
    }

    static std::string esc(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }

    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
};

}  // namespace hea
