#include "agburn/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "agburn/common.hpp"

namespace fs = std::filesystem;

namespace agburn::svgplot {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

struct Axis {
    double lo = 0, hi = 1;
    double to_px(double v, double px_lo, double px_hi) const {
        double t = (v - lo) / (hi - lo);
        return px_lo + t * (px_hi - px_lo);
    }
};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

void svg_header(std::ofstream& f, const std::string& title) {
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\" text-anchor=\"middle\">"
      << esc(title) << "</text>\n";
}

void svg_axes(std::ofstream& f, const Axis& ax, const Axis& ay,
              const std::string& x_label, const std::string& y_label) {
    double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    f << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double vx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        double px = ax.to_px(vx, x0, x1);
        f << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\""
          << y0 + 4 << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << px << "\" y=\"" << y0 + 18
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
          << format_sig(vx, 4) << "</text>\n";
        double vy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        double py = ay.to_px(vy, y0, y1);
        f << "<line x1=\"" << x0 - 4 << "\" y1=\"" << py << "\" x2=\"" << x0 << "\" y2=\""
          << py << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << x0 - 7 << "\" y=\"" << py + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
          << format_sig(vy, 4) << "</text>\n";
    }
    f << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << esc(x_label) << "</text>\n";
    f << "<text x=\"16\" y=\"" << (y0 + y1) / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << esc(y_label) << "</text>\n";
}

}  // namespace

double silverman_bandwidth(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double q1 = sorted[static_cast<std::size_t>(0.25 * (n - 1))];
    double q3 = sorted[static_cast<std::size_t>(0.75 * (n - 1))];
    double iqr = q3 - q1;
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

void write_histogram_svg(const fs::path& path, const std::string& title,
                         const std::vector<double>& values) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    svg_header(f, title);
    if (values.empty()) {
        f << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
          << "\" font-family=\"sans-serif\" font-size=\"13\" "
             "text-anchor=\"middle\">no data</text>\n</svg>\n";
        return;
    }

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    int bins = std::max(5, static_cast<int>(std::ceil(std::sqrt(
                               static_cast<double>(values.size())))));
    std::vector<int> counts(bins, 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
    }
    // Density scale so histogram and KDE share an axis.
    double bin_w = (hi - lo) / bins;
    std::vector<double> density(bins);
    for (int b = 0; b < bins; ++b)
        density[b] = counts[b] / (values.size() * bin_w);

    double h = silverman_bandwidth(values);
    std::vector<std::pair<double, double>> kde;
    if (h > 0.0) {
        const int samples = 200;
        for (int i = 0; i <= samples; ++i) {
            double x = lo + (hi - lo) * i / samples;
            double acc = 0.0;
            for (double v : values) {
                double u = (x - v) / h;
                acc += std::exp(-0.5 * u * u);
            }
            kde.emplace_back(x, acc / (values.size() * h * std::sqrt(2.0 * M_PI)));
        }
    }

    double dmax = *std::max_element(density.begin(), density.end());
    for (const auto& [x, d] : kde) dmax = std::max(dmax, d);
    if (dmax <= 0.0) dmax = 1.0;

    Axis ax{lo, hi};
    Axis ay{0.0, dmax * 1.05};
    double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    for (int b = 0; b < bins; ++b) {
        double bx0 = ax.to_px(lo + b * bin_w, x0, x1);
        double bx1 = ax.to_px(lo + (b + 1) * bin_w, x0, x1);
        double by = ay.to_px(density[b], y0, y1);
        f << "<rect x=\"" << bx0 << "\" y=\"" << by << "\" width=\"" << bx1 - bx0
          << "\" height=\"" << y0 - by
          << "\" fill=\"steelblue\" fill-opacity=\"0.6\" stroke=\"white\"/>\n";
    }
    if (!kde.empty()) {
        f << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, d] : kde)
            f << ax.to_px(x, x0, x1) << ',' << ay.to_px(d, y0, y1) << ' ';
        f << "\"/>\n";
    }
    svg_axes(f, ax, ay, "indicator value", "density");
    f << "</svg>\n";
}

void write_scatter_svg(const fs::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& y,
                       const std::optional<FittedLine>& line) {
    if (x.size() != y.size()) throw std::invalid_argument("scatter: size mismatch");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    svg_header(f, title);
    if (x.empty()) {
        f << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
          << "\" font-family=\"sans-serif\" font-size=\"13\" "
             "text-anchor=\"middle\">no data</text>\n</svg>\n";
        return;
    }
    double xlo = *std::min_element(x.begin(), x.end());
    double xhi = *std::max_element(x.begin(), x.end());
    double ylo = *std::min_element(y.begin(), y.end());
    double yhi = *std::max_element(y.begin(), y.end());
    if (xlo == xhi) {
        xlo -= 0.5;
        xhi += 0.5;
    }
    if (ylo == yhi) {
        ylo -= 0.5;
        yhi += 0.5;
    }
    double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
    Axis ax{xlo - xpad, xhi + xpad};
    Axis ay{ylo - ypad, yhi + ypad};
    double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;

    for (std::size_t i = 0; i < x.size(); ++i) {
        f << "<circle cx=\"" << ax.to_px(x[i], px0, px1) << "\" cy=\""
          << ay.to_px(y[i], py0, py1)
          << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
    }
    if (line) {
        double ya = line->intercept + line->slope * ax.lo;
        double yb = line->intercept + line->slope * ax.hi;
        f << "<line x1=\"" << px0 << "\" y1=\"" << ay.to_px(ya, py0, py1) << "\" x2=\""
          << px1 << "\" y2=\"" << ay.to_px(yb, py0, py1)
          << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
    } else {
        f << "<text x=\"" << kWidth / 2 << "\" y=\"" << kTop + 16
          << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
             "fill=\"red\">too few points for a fitted line</text>\n";
    }
    svg_axes(f, ax, ay, x_label, y_label);
    f << "</svg>\n";
}

}  // namespace agburn::svgplot
