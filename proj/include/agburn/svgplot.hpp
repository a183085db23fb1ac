#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace agburn::svgplot {

// Histogram with a Gaussian kernel-density overlay (Silverman bandwidth).
void write_histogram_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<double>& values);

struct FittedLine {
    double slope = 0.0;
    double intercept = 0.0;
};

// Scatter plot; when line is absent a "no fit" note is embedded instead.
void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& y,
                       const std::optional<FittedLine>& line);

double silverman_bandwidth(const std::vector<double>& values);

}  // namespace agburn::svgplot
