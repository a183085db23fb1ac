#include "agburn/zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fs = std::filesystem;

namespace agburn::zones {

std::string to_string(ZoneKind k) {
    switch (k) {
        case ZoneKind::VillageBox: return "village_box";
        case ZoneKind::PlotBox: return "plot_box";
        case ZoneKind::FireSquare: return "fire_square";
    }
    return "unknown";
}

ZoneKind zone_kind_from_string(const std::string& s) {
    if (s == "village_box") return ZoneKind::VillageBox;
    if (s == "plot_box") return ZoneKind::PlotBox;
    if (s == "fire_square") return ZoneKind::FireSquare;
    throw ValidationError("unknown zone kind '" + s + "'");
}

void ZonePolygon::validate() const {
    if (!(x_min < x_max && y_min < y_max))
        throw ValidationError("zone '" + zone_id + "' has a degenerate rectangle");
}

MapPoint LocalProjection::forward(double lon, double lat) const {
    return MapPoint{(lon - ref_lon) * std::cos(ref_lat * M_PI / 180.0) * meters_per_deg_lon,
                    (lat - ref_lat) * meters_per_deg_lat};
}

std::pair<double, double> LocalProjection::inverse(const MapPoint& p) const {
    double lon = ref_lon + p.x / (std::cos(ref_lat * M_PI / 180.0) * meters_per_deg_lon);
    double lat = ref_lat + p.y / meters_per_deg_lat;
    return {lon, lat};
}

std::vector<MapPoint> project_points(const std::vector<GeoPoint>& points,
                                     const LocalProjection& proj) {
    std::vector<MapPoint> out;
    out.reserve(points.size());
    for (const GeoPoint& p : points) {
        if (std::abs(p.lon - proj.ref_lon) > 3.0 || std::abs(p.lat - proj.ref_lat) > 3.0)
            throw ValidationError("point (" + format_sig(p.lon) + ", " + format_sig(p.lat) +
                                  ") lies beyond the projection's 3-degree validity radius");
        out.push_back(proj.forward(p.lon, p.lat));
    }
    return out;
}

namespace {

MapPoint mean_point(const std::vector<MapPoint>& pts) {
    double sx = 0, sy = 0;
    for (const MapPoint& p : pts) {
        sx += p.x;
        sy += p.y;
    }
    return MapPoint{sx / pts.size(), sy / pts.size()};
}

double dist(const MapPoint& a, const MapPoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

OutlierFilter drop_outlier_plots(const PlotsByVillage& plots, double cutoff_m) {
    OutlierFilter out;
    for (const auto& [village, pts] : plots) {
        if (pts.empty())
            throw ValidationError("village '" + village + "' has no plot coordinates");
        MapPoint provisional = mean_point(pts);
        std::vector<MapPoint> kept;
        for (const MapPoint& p : pts)
            if (dist(p, provisional) <= cutoff_m) kept.push_back(p);
        if (kept.empty()) {
            out.excluded_villages.push_back(village);
        } else {
            out.dropped_plots += static_cast<int>(pts.size() - kept.size());
            out.retained.emplace(village, std::move(kept));
        }
    }
    return out;
}

std::vector<ZonePolygon> village_boxes(const PlotsByVillage& plots, double margin,
                                       double outlier_cutoff_m, BoxBuildReport* report) {
    OutlierFilter filtered = drop_outlier_plots(plots, outlier_cutoff_m);
    if (filtered.retained.empty())
        throw ValidationError("village_boxes: no village retained any plot");

    std::map<std::string, MapPoint> centers;
    double dist_sum = 0.0;
    std::int64_t dist_n = 0;
    for (const auto& [village, pts] : filtered.retained) {
        MapPoint center = mean_point(pts);
        centers.emplace(village, center);
        for (const MapPoint& p : pts) {
            dist_sum += dist(p, center);
            ++dist_n;
        }
    }
    double mean_distance = dist_sum / static_cast<double>(dist_n);
    double half_side = mean_distance * (1.0 + margin);

    std::vector<ZonePolygon> out;
    for (const auto& [village, center] : centers) {
        ZonePolygon z;
        z.zone_id = village;
        z.kind = ZoneKind::VillageBox;
        z.x_min = center.x - half_side;
        z.x_max = center.x + half_side;
        z.y_min = center.y - half_side;
        z.y_max = center.y + half_side;
        z.validate();
        out.push_back(std::move(z));
    }
    if (report) {
        report->excluded_villages = filtered.excluded_villages;
        report->dropped_plots = filtered.dropped_plots;
        report->mean_center_distance = mean_distance;
    }
    return out;
}

std::vector<ZonePolygon> plot_boxes(const PlotsByVillage& plots, double margin,
                                    double min_area_m2) {
    if (plots.empty()) throw ValidationError("plot_boxes: no villages given");

    struct BaseRect {
        std::string village;
        double x_min, y_min, x_max, y_max;
    };
    std::vector<BaseRect> rects;
    double area_sum = 0.0;
    for (const auto& [village, pts] : plots) {
        if (pts.empty())
            throw ValidationError("village '" + village + "' has no plot coordinates");
        BaseRect r{village, pts[0].x, pts[0].y, pts[0].x, pts[0].y};
        for (const MapPoint& p : pts) {
            r.x_min = std::min(r.x_min, p.x);
            r.x_max = std::max(r.x_max, p.x);
            r.y_min = std::min(r.y_min, p.y);
            r.y_max = std::max(r.y_max, p.y);
        }
        area_sum += (r.x_max - r.x_min) * (r.y_max - r.y_min);
        rects.push_back(r);
    }
    double mean_area = area_sum / static_cast<double>(rects.size());
    double target_gain = margin * mean_area;

    std::vector<ZonePolygon> out;
    for (const BaseRect& r : rects) {
        double w = r.x_max - r.x_min;
        double h = r.y_max - r.y_min;
        // Uniform buffer b with (w+2b)(h+2b) = wh + target_gain.
        double b = 0.0;
        if (target_gain > 0.0)
            b = (-(w + h) + std::sqrt((w + h) * (w + h) + 4.0 * target_gain)) / 4.0;
        double x_min = r.x_min - b, x_max = r.x_max + b;
        double y_min = r.y_min - b, y_max = r.y_max + b;

        double area = (x_max - x_min) * (y_max - y_min);
        if (area < min_area_m2) {
            double cx = 0.5 * (x_min + x_max);
            double cy = 0.5 * (y_min + y_max);
            if (area > 0.0) {
                double s = std::sqrt(min_area_m2 / area);
                double hw = 0.5 * (x_max - x_min) * s;
                double hh = 0.5 * (y_max - y_min) * s;
                x_min = cx - hw;
                x_max = cx + hw;
                y_min = cy - hh;
                y_max = cy + hh;
            } else {
                double half = 0.5 * std::sqrt(min_area_m2);
                x_min = cx - half;
                x_max = cx + half;
                y_min = cy - half;
                y_max = cy + half;
            }
        }
        ZonePolygon z;
        z.zone_id = r.village;
        z.kind = ZoneKind::PlotBox;
        z.x_min = x_min;
        z.y_min = y_min;
        z.x_max = x_max;
        z.y_max = y_max;
        z.validate();
        out.push_back(std::move(z));
    }
    return out;
}

ZonalCounts zonal_counts(const BinaryMask& mask, const ZonePolygon& zone) {
    double ext_x_max = mask.origin_x + mask.width * mask.pixel_size;
    double ext_y_min = mask.origin_y - mask.height * mask.pixel_size;
    if (zone.x_max <= mask.origin_x || zone.x_min >= ext_x_max ||
        zone.y_max <= ext_y_min || zone.y_min >= mask.origin_y)
        throw ValidationError("zone '" + zone.zone_id +
                              "' is disjoint from the raster extent");

    // Conservative candidate window; the exact containment predicate decides
    // per cell, so the result matches a full-raster scan.
    auto row_of = [&](double y) { return (mask.origin_y - y) / mask.pixel_size; };
    auto col_of = [&](double x) { return (x - mask.origin_x) / mask.pixel_size; };
    int r0 = std::max(0, static_cast<int>(std::floor(row_of(zone.y_max))) - 1);
    int r1 = std::min(mask.height - 1, static_cast<int>(std::ceil(row_of(zone.y_min))) + 1);
    int c0 = std::max(0, static_cast<int>(std::floor(col_of(zone.x_min))) - 1);
    int c1 = std::min(mask.width - 1, static_cast<int>(std::ceil(col_of(zone.x_max))) + 1);

    std::int64_t burned = 0, valid = 0;
    const int nt = resolved_threads();
#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : burned, valid)
    for (int r = r0; r <= r1; ++r) {
        double y = mask.origin_y - (r + 0.5) * mask.pixel_size;
        for (int c = c0; c <= c1; ++c) {
            double x = mask.origin_x + (c + 0.5) * mask.pixel_size;
            if (!zone.contains(x, y)) continue;
            MaskCell cell = mask.at(r, c);
            if (cell == MaskCell::Nodata) continue;
            ++valid;
            if (cell == MaskCell::True) ++burned;
        }
    }
    return ZonalCounts{burned, valid};
}

std::optional<double> zonal_fraction(const BinaryMask& mask, const ZonePolygon& zone) {
    ZonalCounts c = zonal_counts(mask, zone);
    if (c.valid == 0) return std::nullopt;
    return static_cast<double>(c.burned) / static_cast<double>(c.valid);
}

void write_zones_csv(const fs::path& path, const std::vector<ZonePolygon>& zones) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "zone_id,kind,x_min,y_min,x_max,y_max,area_m2\n";
    for (const ZonePolygon& z : zones) {
        f << z.zone_id << ',' << to_string(z.kind) << ',' << format_sig(z.x_min) << ','
          << format_sig(z.y_min) << ',' << format_sig(z.x_max) << ','
          << format_sig(z.y_max) << ',' << format_sig(z.area()) << '\n';
    }
}

std::vector<ZonePolygon> read_zones_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open zones file '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line))
        throw ValidationError("zones file '" + path.string() + "' is empty");
    std::vector<ZonePolygon> out;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_delimited(line);
        if (cells.size() < 6)
            throw ValidationError("zones file '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": expected 6+ columns");
        ZonePolygon z;
        z.zone_id = trim(cells[0]);
        z.kind = zone_kind_from_string(trim(cells[1]));
        try {
            z.x_min = std::stod(cells[2]);
            z.y_min = std::stod(cells[3]);
            z.x_max = std::stod(cells[4]);
            z.y_max = std::stod(cells[5]);
        } catch (const std::exception&) {
            throw ValidationError("zones file '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": unparseable coordinate");
        }
        z.validate();
        out.push_back(std::move(z));
    }
    return out;
}

void write_zone_rings(const fs::path& path, const std::vector<ZonePolygon>& zones) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (const ZonePolygon& z : zones) {
        f << format_sig(z.x_min) << ' ' << format_sig(z.y_min) << ' '  //
          << format_sig(z.x_max) << ' ' << format_sig(z.y_min) << ' '  //
          << format_sig(z.x_max) << ' ' << format_sig(z.y_max) << ' '  //
          << format_sig(z.x_min) << ' ' << format_sig(z.y_max) << ' '  //
          << format_sig(z.x_min) << ' ' << format_sig(z.y_min) << '\n';
    }
}

}  // namespace agburn::zones
