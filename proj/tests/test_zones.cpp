#include <doctest.h>

#include <cmath>

#include "agburn/reference.hpp"
#include "agburn/zones.hpp"

using namespace agburn;
using namespace agburn::zones;

namespace {

BinaryMask random_mask(Rng& rng, int w, int h, double px = 10.0) {
    RasterGrid g{w, h, 0.0, h * px, px, 32643, {}};
    BinaryMask m = BinaryMask::like(g);
    for (auto& c : m.cells) {
        double u = rng.uniform();
        c = u < 0.25 ? MaskCell::True : (u < 0.85 ? MaskCell::False : MaskCell::Nodata);
    }
    return m;
}

}  // namespace

TEST_SUITE("zones") {

TEST_CASE("local projection round-trips to sub-meter error") {
    LocalProjection proj;
    proj.ref_lon = 75.0;
    proj.ref_lat = 30.0;
    MapPoint origin = proj.forward(75.0, 30.0);
    CHECK(origin.x == 0.0);
    CHECK(origin.y == 0.0);
    MapPoint north = proj.forward(75.0, 30.01);
    CHECK(north.y == doctest::Approx(1105.4).epsilon(1e-9));

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        double lon = 75.0 + rng.uniform(-1.5, 1.5);
        double lat = 30.0 + rng.uniform(-1.5, 1.5);
        MapPoint p = proj.forward(lon, lat);
        auto [lon2, lat2] = proj.inverse(p);
        MapPoint p2 = proj.forward(lon2, lat2);
        CHECK(std::hypot(p.x - p2.x, p.y - p2.y) < 1.0);
    }
    CHECK_THROWS_AS(project_points({{80.0, 30.0}}, proj), ValidationError);
}

TEST_CASE("village boxes: planted 1200 m mean distance, 20% margin") {
    // four villages, each with four plots exactly 1200 m from the center
    PlotsByVillage plots;
    for (int v = 0; v < 4; ++v) {
        double cx = 10000.0 * v, cy = 5000.0;
        plots["v" + std::to_string(v)] = {{cx + 1200, cy},
                                          {cx - 1200, cy},
                                          {cx, cy + 1200},
                                          {cx, cy - 1200}};
    }
    BoxBuildReport report;
    auto boxes = village_boxes(plots, 0.20, 10000.0, &report);
    REQUIRE(boxes.size() == 4);
    CHECK(report.mean_center_distance == doctest::Approx(1200.0).epsilon(1e-12));
    for (const auto& z : boxes) {
        CHECK(z.x_max - z.x_min == doctest::Approx(2880.0).epsilon(1e-12));
        CHECK(z.y_max - z.y_min == doctest::Approx(2880.0).epsilon(1e-12));
        CHECK(z.area() == doctest::Approx(8.2944e6).epsilon(1e-12));
    }
    // all squares share one area
    for (const auto& z : boxes) CHECK(z.area() == doctest::Approx(boxes[0].area()));
}

TEST_CASE("village boxes center on the plot mean; single plot still centered") {
    PlotsByVillage plots;
    plots["a"] = {{0, 0}, {200, 0}};        // center (100, 0)
    plots["b"] = {{5000, 5000}};            // single plot: box centered on it
    auto boxes = village_boxes(plots, 0.20, 10000.0);
    REQUIRE(boxes.size() == 2);
    CHECK(0.5 * (boxes[0].x_min + boxes[0].x_max) == doctest::Approx(100.0));
    CHECK(0.5 * (boxes[1].x_min + boxes[1].x_max) == doctest::Approx(5000.0));
    CHECK(0.5 * (boxes[1].y_min + boxes[1].y_max) == doctest::Approx(5000.0));
}

TEST_CASE("outlier plots are excluded from both center and mean distance") {
    // eight plots on an 800 m ring plus a 40 km outlier; the outlier shifts
    // the provisional center by ~4.4 km, which keeps the ring inside the
    // cutoff while the outlier itself falls out
    PlotsByVillage plots;
    std::vector<MapPoint> ring;
    for (int k = 0; k < 8; ++k) {
        double a = k * M_PI / 4.0;
        ring.push_back({800.0 * std::cos(a), 800.0 * std::sin(a)});
    }
    std::vector<MapPoint> with_outlier = ring;
    with_outlier.push_back({40000.0, 0.0});
    plots["v"] = with_outlier;

    BoxBuildReport report;
    auto boxes = village_boxes(plots, 0.20, 10000.0, &report);
    REQUIRE(boxes.size() == 1);
    CHECK(report.dropped_plots == 1);

    // recompute by hand without the outlier: center (0,0), mean distance 800
    CHECK(0.5 * (boxes[0].x_min + boxes[0].x_max) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(0.5 * (boxes[0].y_min + boxes[0].y_max) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.mean_center_distance == doctest::Approx(800.0).epsilon(1e-9));
    CHECK(boxes[0].x_max - boxes[0].x_min ==
          doctest::Approx(2.0 * 800.0 * 1.2).epsilon(1e-9));

    // a village whose every plot violates the cutoff is excluded, not fatal
    plots["far"] = {{500000.0, 0}, {0, 500000.0}};
    BoxBuildReport r2;
    auto boxes2 = village_boxes(plots, 0.20, 10000.0, &r2);
    CHECK(boxes2.size() == 1);
    REQUIRE(r2.excluded_villages.size() == 1);
    CHECK(r2.excluded_villages[0] == "far");
}

TEST_CASE("plot boxes: base rectangle, margin buffer, minimum area") {
    PlotsByVillage plots;
    plots["two"] = {{0, 0}, {1000, 500}};
    plots["point"] = {{9000, 9000}};
    auto boxes = plot_boxes(plots, 0.20, 150000.0);
    REQUIRE(boxes.size() == 2);

    const ZonePolygon& pt = boxes[0];  // "point" sorts first
    CHECK(pt.zone_id == "point");
    CHECK(pt.area() == doctest::Approx(150000.0).epsilon(1e-9));
    CHECK(pt.x_max - pt.x_min == doctest::Approx(pt.y_max - pt.y_min));  // square

    const ZonePolygon& two = boxes[1];
    // uniform buffer b solves (w+2b)(h+2b) = w*h + 0.2 * mean_area
    double mean_area = (1000.0 * 500.0 + 0.0) / 2.0;
    double w = 1000.0, h = 500.0, gain = 0.2 * mean_area;
    double b = (-(w + h) + std::sqrt((w + h) * (w + h) + 4.0 * gain)) / 4.0;
    double area_expected = (w + 2 * b) * (h + 2 * b);
    if (area_expected < 150000.0) area_expected = 150000.0;
    CHECK(two.area() == doctest::Approx(area_expected).epsilon(1e-9));
    CHECK(two.x_min == doctest::Approx(0.0 - b).epsilon(1e-9));
}

TEST_CASE("plot boxes contain their plots and honor the floor on random villages") {
    Rng rng(88);
    for (int rep = 0; rep < 10; ++rep) {
        PlotsByVillage plots;
        int villages = 2 + rng.uniform_int(0, 6);
        for (int v = 0; v < villages; ++v) {
            std::vector<MapPoint> pts;
            double cx = rng.uniform(-5e4, 5e4), cy = rng.uniform(-5e4, 5e4);
            int n = 1 + rng.uniform_int(0, 19);
            for (int p = 0; p < n; ++p)
                pts.push_back({cx + rng.uniform(-2000.0, 2000.0),
                               cy + rng.uniform(-2000.0, 2000.0)});
            plots["v" + std::to_string(v)] = std::move(pts);
        }
        auto boxes = plot_boxes(plots, 0.20, 150000.0);
        REQUIRE(boxes.size() == plots.size());
        for (const auto& z : boxes) {
            CHECK(z.area() >= 150000.0 - 1e-6);
            for (const MapPoint& p : plots.at(z.zone_id)) {
                CHECK(p.x > z.x_min);
                CHECK(p.x < z.x_max);
                CHECK(p.y > z.y_min);
                CHECK(p.y < z.y_max);
            }
        }
    }
}

TEST_CASE("zonal fraction: ratio definition and nodata denominator") {
    RasterGrid g{10, 10, 0.0, 100.0, 10.0, 32643, {}};
    BinaryMask m = BinaryMask::like(g);
    // zone covering the full grid: 100 valid cells, 7 burned
    for (int i = 0; i < 7; ++i) m.cells[i * 13] = MaskCell::True;
    ZonePolygon all{"all", ZoneKind::VillageBox, 0, 0, 100, 100};
    CHECK(*zonal_fraction(m, all) == doctest::Approx(0.07));

    BinaryMask nd = BinaryMask::like(g, MaskCell::Nodata);
    CHECK_FALSE(zonal_fraction(nd, all).has_value());

    ZonePolygon outside{"out", ZoneKind::VillageBox, 500, 500, 600, 600};
    CHECK_THROWS_AS(zonal_fraction(m, outside), ValidationError);
}

TEST_CASE("zonal counts equal the exhaustive scan on random zone/mask pairs") {
    Rng rng(321);
    for (int rep = 0; rep < 200; ++rep) {
        int w = 5 + rng.uniform_int(0, 30), h = 5 + rng.uniform_int(0, 30);
        BinaryMask m = random_mask(rng, w, h);
        double x0 = rng.uniform(-30.0, w * 10.0);
        double y0 = rng.uniform(-30.0, h * 10.0);
        ZonePolygon z{"z", ZoneKind::PlotBox, x0, y0, x0 + rng.uniform(5.0, w * 10.0),
                      y0 + rng.uniform(5.0, h * 10.0)};
        bool disjoint = z.x_max <= 0.0 || z.x_min >= w * 10.0 || z.y_max <= 0.0 ||
                        z.y_min >= h * 10.0;
        if (disjoint) {
            CHECK_THROWS_AS(zonal_counts(m, z), ValidationError);
            continue;
        }
        for (int jobs : {1, 4}) {
            set_jobs(jobs);
            ZonalCounts fast = zonal_counts(m, z);
            ZonalCounts slow = reference::zonal_counts(m, z);
            CHECK(fast.burned == slow.burned);
            CHECK(fast.valid == slow.valid);
        }
        set_jobs(0);
    }
}

TEST_CASE("abutting zones never double-count a shared cell") {
    Rng rng(654);
    BinaryMask m = random_mask(rng, 20, 20);
    // split a rectangle into left/right halves on a cell-center line
    ZonePolygon whole{"w", ZoneKind::PlotBox, 15.0, 15.0, 185.0, 185.0};
    ZonePolygon left{"l", ZoneKind::PlotBox, 15.0, 15.0, 95.0, 185.0};
    ZonePolygon right{"r", ZoneKind::PlotBox, 95.0, 15.0, 185.0, 185.0};
    ZonalCounts cw = zonal_counts(m, whole);
    ZonalCounts cl = zonal_counts(m, left);
    ZonalCounts cr = zonal_counts(m, right);
    CHECK(cl.valid + cr.valid == cw.valid);
    CHECK(cl.burned + cr.burned == cw.burned);

    // the same along a horizontal split: y_min < y <= y_max
    ZonePolygon top{"t", ZoneKind::PlotBox, 15.0, 95.0, 185.0, 185.0};
    ZonePolygon bottom{"b", ZoneKind::PlotBox, 15.0, 15.0, 185.0, 95.0};
    CHECK(zonal_counts(m, top).valid + zonal_counts(m, bottom).valid == cw.valid);

    // split-and-reweight equals the whole-zone fraction
    if (cw.valid > 0) {
        double merged =
            (static_cast<double>(cl.burned) + cr.burned) / (cl.valid + cr.valid);
        CHECK(merged == doctest::Approx(*zonal_fraction(m, whole)).epsilon(1e-15));
    }
}

TEST_CASE("enlarging a zone over nodata-only cells leaves the fraction unchanged") {
    RasterGrid g{12, 12, 0.0, 120.0, 10.0, 32643, {}};
    BinaryMask m = BinaryMask::like(g, MaskCell::Nodata);
    for (int r = 3; r < 7; ++r)
        for (int c = 3; c < 7; ++c)
            m.at(r, c) = (r + c) % 3 == 0 ? MaskCell::True : MaskCell::False;
    ZonePolygon tight{"t", ZoneKind::PlotBox, 30, 50, 70, 90};
    ZonePolygon loose{"l", ZoneKind::PlotBox, 0, 0, 120, 120};
    CHECK(*zonal_fraction(m, tight) == *zonal_fraction(m, loose));
}

TEST_CASE("zones CSV and ring round-trip") {
    std::vector<ZonePolygon> zs = {
        {"v1", ZoneKind::VillageBox, -100.5, 20.25, 300.0, 500.0},
        {"p1", ZoneKind::PlotBox, 0.0, 0.0, 400.0, 380.0},
    };
    auto dir = std::filesystem::temp_directory_path() / "agburn_zones_csv";
    std::filesystem::create_directories(dir);
    write_zones_csv(dir / "z.csv", zs);
    auto back = read_zones_csv(dir / "z.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].zone_id == "v1");
    CHECK(back[0].kind == ZoneKind::VillageBox);
    CHECK(back[0].x_min == doctest::Approx(-100.5));
    CHECK(back[1].kind == ZoneKind::PlotBox);
    write_zone_rings(dir / "z.ring", zs);
    CHECK(std::filesystem::file_size(dir / "z.ring") > 0);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
