#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agburn/raster.hpp"

namespace agburn::zones {

enum class ZoneKind { VillageBox, PlotBox, FireSquare };

std::string to_string(ZoneKind k);
ZoneKind zone_kind_from_string(const std::string& s);

// Axis-aligned analysis rectangle. Pixel membership is by center containment
// with half-open edges (x_min <= x < x_max, y_min < y <= y_max) so abutting
// zones never share a cell.
struct ZonePolygon {
    std::string zone_id;
    ZoneKind kind = ZoneKind::VillageBox;
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    bool contains(double x, double y) const {
        return x >= x_min && x < x_max && y > y_min && y <= y_max;
    }
    void validate() const;
};

// Equirectangular local projection around the study centroid. Valid within a
// few degrees of the reference; error is far below the pixel size there.
struct LocalProjection {
    double ref_lon = 0.0;
    double ref_lat = 0.0;
    double meters_per_deg_lon = 111320.0;  // at the equator, scaled by cos(ref_lat)
    double meters_per_deg_lat = 110540.0;

    MapPoint forward(double lon, double lat) const;
    std::pair<double, double> inverse(const MapPoint& p) const;  // (lon, lat)
};

struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;
};

// Projects lon/lat points to local meters. Points farther than 3 degrees
// from the reference are rejected.
std::vector<MapPoint> project_points(const std::vector<GeoPoint>& points,
                                     const LocalProjection& proj);

using PlotsByVillage = std::map<std::string, std::vector<MapPoint>>;

struct OutlierFilter {
    PlotsByVillage retained;
    std::vector<std::string> excluded_villages;  // every plot beyond the cutoff
    int dropped_plots = 0;                       // plots dropped from surviving villages
};

// Drops plots farther than cutoff_m from their village's provisional center
// (mean of all its plots). A village losing every plot is excluded outright.
OutlierFilter drop_outlier_plots(const PlotsByVillage& plots, double cutoff_m);

struct BoxBuildReport {
    std::vector<std::string> excluded_villages;
    int dropped_plots = 0;
    double mean_center_distance = 0.0;  // over all retained plots
};

// Equal-area squares centered on each village's mean plot location, half-side
// d * (1 + margin) where d is the global mean plot-to-center distance after
// outlier removal.
std::vector<ZonePolygon> village_boxes(const PlotsByVillage& plots, double margin,
                                       double outlier_cutoff_m,
                                       BoxBuildReport* report = nullptr);

// Minimal enclosing rectangle per village, buffered uniformly on all sides so
// the area grows by margin times the mean base area, then scaled up about the
// center to min_area_m2 where still smaller.
std::vector<ZonePolygon> plot_boxes(const PlotsByVillage& plots, double margin,
                                    double min_area_m2);

struct ZonalCounts {
    std::int64_t burned = 0;
    std::int64_t valid = 0;  // non-nodata cells with center inside the zone
};

// Throws when the zone rectangle is disjoint from the raster extent.
ZonalCounts zonal_counts(const BinaryMask& mask, const ZonePolygon& zone);

// burned / valid over in-zone cell centers; nullopt when no valid cell.
std::optional<double> zonal_fraction(const BinaryMask& mask, const ZonePolygon& zone);

void write_zones_csv(const std::filesystem::path& path, const std::vector<ZonePolygon>& zones);
std::vector<ZonePolygon> read_zones_csv(const std::filesystem::path& path);
// One rectangle per line: five x y vertex pairs forming a closed ring.
void write_zone_rings(const std::filesystem::path& path, const std::vector<ZonePolygon>& zones);

}  // namespace agburn::zones
