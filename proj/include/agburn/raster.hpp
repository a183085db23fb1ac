#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agburn/common.hpp"

namespace agburn {

constexpr float kDefaultNodata = -9999.0f;

struct MapPoint {
    double x = 0.0;
    double y = 0.0;
};

struct Band {
    std::string name;
    float nodata = kDefaultNodata;
    double pixel_size = 0.0;  // native resolution this band was sampled at
    std::vector<float> values;  // row-major, top row first
};

// Georeferenced north-up grid of named float32 bands. Coordinates are
// projected meters; every band holds exactly width*height cells, each either
// finite or equal to the band's nodata sentinel.
struct RasterGrid {
    int width = 0;
    int height = 0;
    double origin_x = 0.0;  // top-left corner
    double origin_y = 0.0;
    double pixel_size = 0.0;  // meters per pixel, square
    int epsg = 0;
    std::vector<Band> bands;

    std::size_t cell_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    const Band* find_band(std::string_view name) const;
    Band* find_band(std::string_view name);
    const Band& band(std::string_view name) const;  // throws ValidationError if absent
    Band& band(std::string_view name);
    bool same_geometry(const RasterGrid& other) const;
    void validate() const;
};

struct Scene {
    RasterGrid grid;
    Date date;
    double cloud_fraction = 0.0;  // [0, 1]

    void validate() const;
};

enum class MaskCell : std::uint8_t { False = 0, True = 1, Nodata = 255 };

// Grid-aligned boolean raster with explicit nodata cells.
struct BinaryMask {
    int width = 0;
    int height = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size = 0.0;
    int epsg = 0;
    std::vector<MaskCell> cells;

    static BinaryMask like(const RasterGrid& g, MaskCell fill = MaskCell::False);

    MaskCell at(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
    MaskCell& at(int row, int col) {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
    bool same_geometry(const RasterGrid& g) const;
    bool same_geometry(const BinaryMask& m) const;
    std::int64_t count(MaskCell v) const;
};

struct PixelCoord {
    int row = 0;
    int col = 0;
    bool operator==(const PixelCoord&) const = default;
};

// Map coordinates of the center of cell (row, col). Throws on out-of-range
// indices.
MapPoint pixel_center(const RasterGrid& g, int row, int col);

// Cell whose footprint contains (x, y); nullopt when outside the grid.
std::optional<PixelCoord> cell_containing(const RasterGrid& g, double x, double y);

// Nearest-neighbor resampling of a coarse band onto a finer grid sharing the
// same origin. The coarse pixel size must be an integer multiple of the
// target's; each fine cell takes the value of the coarse cell containing its
// center, and nodata propagates.
Band upsample_nearest(const RasterGrid& coarse, std::string_view band_name,
                      const RasterGrid& target);

// Raster bundle on disk: a directory holding header.json plus one raw
// little-endian float32 file per band (<band>.f32, row-major, top row first).
Scene read_bundle(const std::filesystem::path& dir);
void write_bundle(const Scene& scene, const std::filesystem::path& dir);

// Masks travel as single-band bundles (band "mask"): 0 = false, 1 = true,
// nodata sentinel elsewhere.
Scene mask_to_scene(const BinaryMask& mask, const Date& date);
BinaryMask mask_from_scene(const Scene& scene, std::string_view band_name = "mask");

// true where band > threshold, false otherwise; nodata propagates.
BinaryMask mask_from_band(const RasterGrid& g, std::string_view band_name, float threshold);

}  // namespace agburn
