#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agburn/raster.hpp"

namespace agburn::spectral {

// Canonical band names expected on Scene grids.
inline constexpr const char* kNir = "NIR";
inline constexpr const char* kSwir = "SWIR";
inline constexpr const char* kSwir2 = "SWIR2";
inline constexpr const char* kRed = "RED";

// Scalar forms of the index formulas, double precision. nullopt marks the
// undefined points (zero denominator, BAI's singular reference point). The
// raster kernels evaluate the same formulas in the bands' float32 precision.
std::optional<double> nbr_value(double nir, double swir);
std::optional<double> bai_value(double red, double nir);
std::optional<double> bais2_value(double swir2, double red);

struct IndexRaster {
    std::string index_name;  // NBR | BAI | BAIS2
    RasterGrid grid;         // single band named index_name

    const Band& values() const { return grid.band(index_name); }
    Band& values() { return grid.band(index_name); }
};

// Normalized burn ratio (NIR - SWIR) / (NIR + SWIR); values in [-1, 1].
IndexRaster compute_nbr(const Scene& scene);
// Burned area index 1 / ((RED - 0.1)^2 + (NIR - 0.06)^2); positive.
IndexRaster compute_bai(const Scene& scene);
// (SWIR2 - RED) / (SWIR2 + RED); values in [-1, 1].
IndexRaster compute_bais2(const Scene& scene);

// Wrap one band of a grid as an IndexRaster (used when thresholding
// composites whose bands carry the index values).
IndexRaster index_from_grid(const RasterGrid& grid, const std::string& index_name);

// Urban iff built-up fraction exceeds 50; nodata propagates.
BinaryMask build_urban_mask(const RasterGrid& bufrac, const std::string& band_name = "BUFRAC");

// QA bitfield layout: which band carries it and which bits flag cloud and
// cirrus contamination.
struct QaSpec {
    std::string band = "QA60";
    int cloud_bit = 10;
    int cirrus_bit = 11;
};

// Blanks every non-QA band to nodata where the QA band flags cloud/cirrus or
// where the water/urban masks are true. Any of the three sources may be null.
Scene apply_masks(const Scene& scene, const QaSpec* qa, const BinaryMask* water,
                  const BinaryMask* urban);

// Keeps scenes with cloud_fraction <= max_cloud, input order preserved.
std::vector<Scene> filter_scenes(const std::vector<Scene>& stack, double max_cloud);

struct WeeklyComposite {
    int iso_week = 0;
    RasterGrid grid;
};

// Per-pixel, per-band median over the week's non-nodata observations; even
// counts average the two middle values; zero observations yield nodata.
// Throws if no scene in the stack falls in the given ISO week.
WeeklyComposite weekly_median_composite(const std::vector<Scene>& stack, int week);

// Surface-reflectance sanity bound: values outside [lo, hi] become nodata.
// Bands listed in skip (e.g. the QA band) are left untouched.
Scene coerce_reflectance(const Scene& scene, double lo, double hi,
                         const std::vector<std::string>& skip = {});

struct IndexStats {
    std::string index_name;
    double min = 0, max = 0, mean = 0, median = 0;
    std::int64_t n = 0;
};

// Distribution summary over all non-nodata cells of one band.
IndexStats index_stats(const RasterGrid& grid, const std::string& band_name);

}  // namespace agburn::spectral
