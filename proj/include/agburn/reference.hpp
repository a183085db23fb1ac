#pragma once

#include "agburn/burnmask.hpp"
#include "agburn/spectral.hpp"
#include "agburn/zones.hpp"

// Serial reference implementations of the hot kernels. These are kept
// deliberately independent of the OpenMP production paths (full sorts instead
// of selection, whole-raster scans instead of windowed ones) so the tests and
// the benchmark can compare the two routes bit for bit.
namespace agburn::reference {

spectral::IndexRaster compute_nbr(const Scene& scene);
spectral::IndexRaster compute_bai(const Scene& scene);
spectral::IndexRaster compute_bais2(const Scene& scene);

// Sort-based weekly median: gathers every layer value per pixel, sorts, and
// averages the two middles on even counts.
spectral::WeeklyComposite weekly_median_composite(const std::vector<Scene>& stack, int week);

BinaryMask threshold_burn(const spectral::IndexRaster& bais2,
                          const spectral::IndexRaster& nbr,
                          const burnmask::ThresholdSpec& spec);

BinaryMask max_composite(const std::vector<BinaryMask>& masks);

// Exhaustive pixel-center containment scan over the full raster.
zones::ZonalCounts zonal_counts(const BinaryMask& mask, const zones::ZonePolygon& zone);

// Per-pixel loop over every square for both report fractions.
burnmask::OverlapReport overlap_report(const BinaryMask& mask,
                                       const std::vector<zones::ZonePolygon>& squares);

}  // namespace agburn::reference
