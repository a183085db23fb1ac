#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "agburn/spectral.hpp"
#include "agburn/zones.hpp"

namespace agburn::burnmask {

// Burned iff BAIS2 > bais2_threshold AND NBR < nbr_threshold, both strict.
struct ThresholdSpec {
    double bais2_threshold = 0.90;
    double nbr_threshold = 0.20;
};

// True where both inequalities hold, nodata where either index is nodata,
// false otherwise.
BinaryMask threshold_burn(const spectral::IndexRaster& bais2,
                          const spectral::IndexRaster& nbr, const ThresholdSpec& spec);

// Per-pixel OR across weeks: true if any week is true, false if every
// defined week is false, nodata only when all weeks are nodata.
BinaryMask max_composite(const std::vector<BinaryMask>& masks);

enum class FireConfidence { Low, Nominal, High };

FireConfidence fire_confidence_from_string(const std::string& s);

// One active-fire pixel center.
struct FireDetection {
    double x = 0.0;
    double y = 0.0;
    FireConfidence confidence = FireConfidence::Low;
    int fire_type = 0;
    Date date;
};

struct FireFilterResult {
    std::vector<FireDetection> kept;
    int dropped_confidence = 0;
    int dropped_type = 0;
    int dropped_urban = 0;    // urban cell, or urban state unknown (nodata)
    int dropped_outside = 0;  // outside the urban-mask extent
};

// Keeps high-confidence agricultural (type 0) detections whose containing
// cell is rural; order preserved.
FireFilterResult filter_fire_points(const std::vector<FireDetection>& points,
                                    const BinaryMask& urban_mask);

// One axis-aligned square of the given side centered on each detection.
std::vector<zones::ZonePolygon> fire_squares(const std::vector<FireDetection>& points,
                                             double side_m = 375.0);

struct OverlapReport {
    std::int64_t squares_total = 0;
    std::int64_t squares_with_burn = 0;
    std::int64_t burned_total = 0;
    std::int64_t burned_in_squares = 0;
    double fraction_squares_with_burn = 0.0;  // 0 when there are no squares
    double fraction_burned_in_squares = 0.0;  // 0 when nothing burned
};

// Agreement between a burn mask and active-fire squares: how many squares see
// a burned cell, and how much of the burned area the squares cover.
OverlapReport overlap_report(const BinaryMask& mask,
                             const std::vector<zones::ZonePolygon>& squares);

void write_overlap_report(const std::filesystem::path& path, const OverlapReport& r);

// Columns: x,y (meters) or lon,lat (projected via proj), confidence, type,
// date. confidence accepts l/n/h or low/nominal/high.
std::vector<FireDetection> read_fire_csv(const std::filesystem::path& path,
                                         const zones::LocalProjection* proj);

}  // namespace agburn::burnmask
