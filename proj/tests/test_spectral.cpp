#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "agburn/reference.hpp"
#include "agburn/spectral.hpp"

using namespace agburn;
using namespace agburn::spectral;

namespace {

Scene scene_with(std::initializer_list<std::pair<const char*, std::vector<float>>> bands,
                 int w, int h) {
    Scene s;
    s.grid.width = w;
    s.grid.height = h;
    s.grid.origin_x = 0;
    s.grid.origin_y = h * 10.0;
    s.grid.pixel_size = 10.0;
    s.grid.epsg = 32643;
    s.date = Date{2021, 9, 15};
    for (const auto& [name, values] : bands) {
        Band b;
        b.name = name;
        b.pixel_size = 10.0;
        b.values = values;
        s.grid.bands.push_back(std::move(b));
    }
    return s;
}

Scene random_reflectance_scene(Rng& rng, int w, int h, double nodata_rate = 0.08) {
    Scene s = scene_with({}, w, h);
    for (const char* name : {kNir, kSwir, kSwir2, kRed, "QA60"}) {
        Band b;
        b.name = name;
        b.pixel_size = 10.0;
        b.values.resize(s.grid.cell_count());
        for (float& v : b.values) {
            if (std::string(name) == "QA60") {
                int bits = 0;
                if (rng.bernoulli(0.05)) bits |= 1 << 10;
                if (rng.bernoulli(0.03)) bits |= 1 << 11;
                v = static_cast<float>(bits);
            } else {
                v = rng.bernoulli(nodata_rate) ? b.nodata
                                               : static_cast<float>(rng.uniform(0.0, 1.2));
            }
        }
        s.grid.bands.push_back(std::move(b));
    }
    s.date = Date{2021, 9, 15};
    return s;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("scalar index formulas at the documented points") {
    CHECK(*nbr_value(0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(*nbr_value(0.6, 0.2) - 0.5) < 1e-12);
    CHECK_FALSE(nbr_value(0.0, 0.0).has_value());

    CHECK(std::abs(*bai_value(0.2, 0.16) - 50.0) < 1e-12 * 50.0);
    CHECK(std::abs(*bai_value(0.6, 0.56) - 2.0) < 1e-12 * 2.0);
    CHECK_FALSE(bai_value(0.1, 0.06).has_value());

    CHECK(std::abs(*bais2_value(0.3, 0.1) - 0.5) < 1e-12);
    CHECK(std::abs(*bais2_value(0.4, 0.4)) < 1e-12);
    CHECK_FALSE(bais2_value(0.0, 0.0).has_value());
}

TEST_CASE("NBR antisymmetry and bounds; BAI positivity") {
    Rng rng(101);
    for (int i = 0; i < 20000; ++i) {
        double a = rng.uniform(0.0, 1.5);
        double b = rng.uniform(0.0, 1.5);
        auto fwd = nbr_value(a, b);
        auto rev = nbr_value(b, a);
        if (fwd && rev) CHECK(*fwd == doctest::Approx(-*rev).epsilon(1e-14));
        if (fwd) CHECK(std::abs(*fwd) <= 1.0);
        auto s2 = bais2_value(a, b);
        if (s2) CHECK(std::abs(*s2) <= 1.0);
        auto bai = bai_value(a, b);
        if (bai) CHECK(*bai > 0.0);
    }
}

TEST_CASE("index kernels match the serial reference bitwise") {
    Rng rng(55);
    for (int jobs : {1, 3, 8}) {
        set_jobs(jobs);
        Scene s = random_reflectance_scene(rng, 64, 37);
        CHECK(compute_nbr(s).values().values == reference::compute_nbr(s).values().values);
        CHECK(compute_bai(s).values().values == reference::compute_bai(s).values().values);
        CHECK(compute_bais2(s).values().values ==
              reference::compute_bais2(s).values().values);
    }
    set_jobs(0);
}

TEST_CASE("index kernels: nodata propagation and zero denominators") {
    Scene s = scene_with({{kNir, {0.5f, 0.0f, kDefaultNodata, 0.6f}},
                          {kSwir, {0.5f, 0.0f, 0.2f, kDefaultNodata}}},
                         2, 2);
    IndexRaster nbr = compute_nbr(s);
    CHECK(nbr.values().values[0] == 0.0f);
    CHECK(nbr.values().values[1] == nbr.values().nodata);  // 0/0
    CHECK(nbr.values().values[2] == nbr.values().nodata);  // NIR nodata
    CHECK(nbr.values().values[3] == nbr.values().nodata);  // SWIR nodata
    CHECK_THROWS_AS(compute_bais2(s), ValidationError);    // missing bands
}

TEST_CASE("urban mask thresholds BUFRAC strictly above 50") {
    Scene s = scene_with({{"BUFRAC", {50.0f, 50.1f, 0.0f, kDefaultNodata}}}, 2, 2);
    BinaryMask urban = build_urban_mask(s.grid);
    CHECK(urban.cells[0] == MaskCell::False);
    CHECK(urban.cells[1] == MaskCell::True);
    CHECK(urban.cells[2] == MaskCell::False);
    CHECK(urban.cells[3] == MaskCell::Nodata);
}

TEST_CASE("apply_masks blanks flagged pixels and is idempotent") {
    Scene s = scene_with({{kNir, {0.5f, 0.5f, 0.5f, 0.5f}},
                          {kSwir, {0.2f, 0.2f, 0.2f, 0.2f}},
                          {"QA60", {0.0f, 1024.0f, 0.0f, 2048.0f}}},
                         2, 2);
    BinaryMask water = BinaryMask::like(s.grid);
    water.cells[2] = MaskCell::True;
    QaSpec qa;
    Scene masked = apply_masks(s, &qa, &water, nullptr);
    const Band& nir = masked.grid.band(kNir);
    CHECK(nir.values[0] == 0.5f);                 // clear
    CHECK(nir.values[1] == nir.nodata);           // cloud bit
    CHECK(nir.values[2] == nir.nodata);           // water
    CHECK(nir.values[3] == nir.nodata);           // cirrus bit
    CHECK(masked.grid.band("QA60").values[1] == 1024.0f);  // QA band kept

    Scene twice = apply_masks(masked, &qa, &water, nullptr);
    CHECK(twice.grid.band(kNir).values == masked.grid.band(kNir).values);
    CHECK(twice.grid.band(kSwir).values == masked.grid.band(kSwir).values);
}

TEST_CASE("masking commutes with index computation") {
    Rng rng(77);
    Scene s = random_reflectance_scene(rng, 31, 22);
    BinaryMask water = BinaryMask::like(s.grid);
    for (auto& c : water.cells) c = rng.bernoulli(0.15) ? MaskCell::True : MaskCell::False;
    QaSpec qa;

    Scene masked = apply_masks(s, &qa, &water, nullptr);
    IndexRaster masked_first = compute_nbr(masked);

    IndexRaster index_first = compute_nbr(s);
    // mask the index raster afterwards through a single-band scene
    Scene carrier = scene_with({}, 31, 22);
    carrier.grid.bands.push_back(index_first.grid.bands[0]);
    carrier.grid.bands.push_back(s.grid.band("QA60"));
    Scene index_masked = apply_masks(carrier, &qa, &water, nullptr);

    CHECK(index_masked.grid.band("NBR").values == masked_first.values().values);
}

TEST_CASE("filter_scenes keeps the boundary and preserves order") {
    std::vector<Scene> stack;
    for (double cf : {0.1, 0.25, 0.2}) {
        Scene s = scene_with({{kNir, {0.1f}}}, 1, 1);
        s.cloud_fraction = cf;
        stack.push_back(s);
    }
    auto kept = filter_scenes(stack, 0.2);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].cloud_fraction == 0.1);
    CHECK(kept[1].cloud_fraction == 0.2);
    CHECK(filter_scenes({}, 0.2).empty());
    auto all = filter_scenes(stack, 1.0);
    CHECK(all.size() == 3);
}

TEST_CASE("weekly median composite: documented pixel series") {
    // three scenes in ISO week 37 of 2021 (Sep 13-19)
    std::vector<Scene> stack;
    for (float v : {0.2f, 0.4f, 0.6f}) {
        Scene s = scene_with({{kNir, {v, v == 0.4f ? kDefaultNodata : v}}}, 2, 1);
        s.date = Date{2021, 9, 13 + static_cast<int>(stack.size())};
        stack.push_back(s);
    }
    WeeklyComposite comp = weekly_median_composite(stack, 37);
    CHECK(comp.grid.band(kNir).values[0] == 0.4f);           // odd count
    CHECK(comp.grid.band(kNir).values[1] == 0.5f * (0.2f + 0.6f));  // nodata skipped

    // zero observations -> nodata
    Scene all_nodata = scene_with({{kNir, {kDefaultNodata, kDefaultNodata}}}, 2, 1);
    all_nodata.date = Date{2021, 9, 13};
    WeeklyComposite empty = weekly_median_composite({all_nodata}, 37);
    CHECK(empty.grid.band(kNir).values[0] == kDefaultNodata);

    CHECK_THROWS_AS(weekly_median_composite(stack, 40), ValidationError);
}

TEST_CASE("weekly median composite matches the sort oracle on random stacks") {
    Rng rng(909);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 1 + rng.uniform_int(0, 7);
        std::vector<Scene> stack;
        for (int i = 0; i < n; ++i) {
            Scene s = random_reflectance_scene(rng, 25, 20, 0.35);
            s.date = Date{2021, 9, 13 + i % 7};  // all ISO week 37
            stack.push_back(std::move(s));
        }
        for (int jobs : {1, 5}) {
            set_jobs(jobs);
            WeeklyComposite fast = weekly_median_composite(stack, 37);
            WeeklyComposite slow = reference::weekly_median_composite(stack, 37);
            for (std::size_t b = 0; b < fast.grid.bands.size(); ++b)
                CHECK(fast.grid.bands[b].values == slow.grid.bands[b].values);
        }
        set_jobs(0);
    }
}

TEST_CASE("weekly median composite is permutation-invariant") {
    Rng rng(4242);
    std::vector<Scene> stack;
    for (int i = 0; i < 5; ++i) {
        Scene s = random_reflectance_scene(rng, 16, 16, 0.3);
        s.date = Date{2021, 9, 13 + i};
        stack.push_back(std::move(s));
    }
    WeeklyComposite base = weekly_median_composite(stack, 37);
    std::reverse(stack.begin(), stack.end());
    WeeklyComposite flipped = weekly_median_composite(stack, 37);
    for (std::size_t b = 0; b < base.grid.bands.size(); ++b)
        CHECK(base.grid.bands[b].values == flipped.grid.bands[b].values);
}

TEST_CASE("reflectance coercion clamps out-of-range values to nodata") {
    Scene s = scene_with({{kNir, {-0.2f, 1.6f, 0.5f, -0.05f}},
                          {"QA60", {4096.0f, 0.0f, 0.0f, 0.0f}}},
                         2, 2);
    Scene c = coerce_reflectance(s, -0.1, 1.5, {"QA60"});
    const Band& nir = c.grid.band(kNir);
    CHECK(nir.values[0] == nir.nodata);
    CHECK(nir.values[1] == nir.nodata);
    CHECK(nir.values[2] == 0.5f);
    CHECK(nir.values[3] == -0.05f);
    CHECK(c.grid.band("QA60").values[0] == 4096.0f);  // QA exempt
}

TEST_CASE("iso week handles year boundaries") {
    CHECK(iso_week(Date{2021, 9, 1}).week == 35);
    CHECK(iso_week(Date{2021, 1, 1}).week == 53);       // belongs to 2020
    CHECK(iso_week(Date{2021, 1, 1}).week_year == 2020);
    CHECK(iso_week(Date{2021, 1, 4}).week == 1);
    CHECK(iso_week(Date{2021, 11, 22}).week == 47);
    Date m = monday_of_iso_week(2021, 35);
    CHECK(m == Date{2021, 8, 30});
    CHECK(iso_weekday(m) == 1);
}

}  // TEST_SUITE
