#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <set>
#include <filesystem>
#include <fstream>

#include "agburn/raster.hpp"

using namespace agburn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("agburn_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Scene small_scene() {
    Scene s;
    s.grid.width = 2;
    s.grid.height = 2;
    s.grid.origin_x = 100.0;
    s.grid.origin_y = 200.0;
    s.grid.pixel_size = 10.0;
    s.grid.epsg = 32643;
    s.date = Date{2021, 9, 15};
    s.cloud_fraction = 0.1;
    Band b;
    b.name = "NIR";
    b.pixel_size = 10.0;
    b.values = {1.0f, 2.0f, 3.0f, 4.0f};
    s.grid.bands.push_back(b);
    return s;
}

Scene random_scene(Rng& rng) {
    Scene s;
    s.grid.width = 1 + rng.uniform_int(1, 12);
    s.grid.height = 1 + rng.uniform_int(1, 12);
    s.grid.origin_x = rng.uniform(-1e5, 1e5);
    s.grid.origin_y = rng.uniform(-1e5, 1e5);
    s.grid.pixel_size = rng.uniform(1.0, 60.0);
    s.grid.epsg = 32600 + rng.uniform_int(1, 60);
    s.date = Date{2021, 1 + rng.uniform_int(0, 11), 1 + rng.uniform_int(0, 27)};
    s.cloud_fraction = rng.uniform();
    int nbands = 1 + rng.uniform_int(0, 3);
    for (int b = 0; b < nbands; ++b) {
        Band band;
        band.name = "band_" + std::to_string(b);
        band.nodata = rng.bernoulli(0.5) ? kDefaultNodata : -1.0f;
        band.pixel_size = s.grid.pixel_size;
        band.values.resize(s.grid.cell_count());
        for (float& v : band.values) {
            v = rng.bernoulli(0.1) ? band.nodata
                                   : static_cast<float>(rng.uniform(-2.0, 2.0));
        }
        s.grid.bands.push_back(std::move(band));
    }
    return s;
}

bool scenes_identical(const Scene& a, const Scene& b) {
    if (!a.grid.same_geometry(b.grid)) return false;
    if (!(a.date == b.date) || a.cloud_fraction != b.cloud_fraction) return false;
    if (a.grid.bands.size() != b.grid.bands.size()) return false;
    for (std::size_t i = 0; i < a.grid.bands.size(); ++i) {
        const Band& x = a.grid.bands[i];
        const Band& y = b.grid.bands[i];
        if (x.name != y.name || x.pixel_size != y.pixel_size) return false;
        if (std::memcmp(&x.nodata, &y.nodata, sizeof(float)) != 0) return false;
        if (x.values.size() != y.values.size()) return false;
        if (std::memcmp(x.values.data(), y.values.data(),
                        x.values.size() * sizeof(float)) != 0)
            return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("raster") {

TEST_CASE("bundle round-trip reproduces a small scene exactly") {
    fs::path dir = temp_dir("bundle_small");
    Scene s = small_scene();
    write_bundle(s, dir / "b");
    Scene back = read_bundle(dir / "b");
    CHECK(scenes_identical(s, back));
    CHECK(back.grid.band("NIR").values == std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
    fs::remove_all(dir);
}

TEST_CASE("bundle round-trip is bit-exact over randomized scenes") {
    fs::path dir = temp_dir("bundle_rand");
    Rng rng(42);
    for (int i = 0; i < 30; ++i) {
        Scene s = random_scene(rng);
        write_bundle(s, dir / "b");
        CHECK(scenes_identical(s, read_bundle(dir / "b")));
    }
    fs::remove_all(dir);
}

TEST_CASE("1x1 grid writes a 4-byte band file") {
    fs::path dir = temp_dir("bundle_tiny");
    Scene s = small_scene();
    s.grid.width = 1;
    s.grid.height = 1;
    s.grid.bands[0].values = {7.0f};
    write_bundle(s, dir / "b");
    CHECK(fs::file_size(dir / "b" / "NIR.f32") == 4);
    fs::remove_all(dir);
}

TEST_CASE("truncated band file is a size-mismatch error") {
    fs::path dir = temp_dir("bundle_trunc");
    write_bundle(small_scene(), dir / "b");
    fs::resize_file(dir / "b" / "NIR.f32", 12);  // drop 4 bytes
    CHECK_THROWS_AS(read_bundle(dir / "b"), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("missing header and unknown version are rejected") {
    fs::path dir = temp_dir("bundle_hdr");
    CHECK_THROWS_AS(read_bundle(dir / "nothing"), ValidationError);
    write_bundle(small_scene(), dir / "b");
    {
        std::ifstream in(dir / "b" / "header.json");
        std::string text((std::istreambuf_iterator<char>(in)), {});
        auto pos = text.find("\"format_version\": 1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 19, "\"format_version\": 9");
        std::ofstream out(dir / "b" / "header.json");
        out << text;
    }
    CHECK_THROWS_AS(read_bundle(dir / "b"), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("invalid geometry and values are rejected") {
    Scene s = small_scene();
    s.grid.pixel_size = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);

    s = small_scene();
    s.grid.bands[0].values[2] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(s.validate(), ValidationError);

    s = small_scene();
    s.grid.epsg = 4326;  // geographic
    CHECK_THROWS_AS(s.validate(), ValidationError);

    s = small_scene();
    s.cloud_fraction = 1.5;
    CHECK_THROWS_AS(s.validate(), ValidationError);

    // nodata cells are fine
    s = small_scene();
    s.grid.bands[0].values[0] = s.grid.bands[0].nodata;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("pixel_center formula") {
    RasterGrid g{10, 10, 0.0, 100.0, 10.0, 32643, {}};
    MapPoint p = pixel_center(g, 0, 0);
    CHECK(p.x == doctest::Approx(5.0));
    CHECK(p.y == doctest::Approx(95.0));
    p = pixel_center(g, 9, 0);
    CHECK(p.x == doctest::Approx(5.0));
    CHECK(p.y == doctest::Approx(5.0));
    CHECK_THROWS_AS(pixel_center(g, 10, 0), std::out_of_range);
    CHECK_THROWS_AS(pixel_center(g, 0, -1), std::out_of_range);
}

TEST_CASE("pixel_center and cell_containing compose to the identity") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        RasterGrid g{1 + rng.uniform_int(1, 40), 1 + rng.uniform_int(1, 40),
                     rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4),
                     rng.uniform(0.5, 30.0), 32643, {}};
        int r = rng.uniform_int(0, g.height - 1);
        int c = rng.uniform_int(0, g.width - 1);
        MapPoint p = pixel_center(g, r, c);
        auto cell = cell_containing(g, p.x, p.y);
        REQUIRE(cell.has_value());
        CHECK(cell->row == r);
        CHECK(cell->col == c);
    }
}

TEST_CASE("upsample_nearest block-expands and propagates nodata") {
    RasterGrid coarse{1, 1, 0.0, 20.0, 20.0, 32643, {}};
    Band b;
    b.name = "SWIR";
    b.pixel_size = 20.0;
    b.values = {7.0f};
    coarse.bands.push_back(b);
    RasterGrid fine{2, 2, 0.0, 20.0, 10.0, 32643, {}};
    Band up = upsample_nearest(coarse, "SWIR", fine);
    CHECK(up.values == std::vector<float>{7.0f, 7.0f, 7.0f, 7.0f});
    CHECK(up.pixel_size == 10.0);

    coarse.bands[0].values = {coarse.bands[0].nodata};
    up = upsample_nearest(coarse, "SWIR", fine);
    for (float v : up.values) CHECK(v == coarse.bands[0].nodata);
}

TEST_CASE("upsample_nearest ratio 3 matches the cell-center rule") {
    RasterGrid coarse{2, 2, 0.0, 60.0, 30.0, 32643, {}};
    Band b;
    b.name = "SWIR";
    b.pixel_size = 30.0;
    b.values = {1.0f, 2.0f, 3.0f, 4.0f};
    coarse.bands.push_back(b);
    RasterGrid fine{6, 6, 0.0, 60.0, 10.0, 32643, {}};
    Band up = upsample_nearest(coarse, "SWIR", fine);
    // independent oracle: locate each fine center in the coarse grid
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            MapPoint p = pixel_center(fine, r, c);
            auto cell = cell_containing(coarse, p.x, p.y);
            REQUIRE(cell.has_value());
            float expected = b.values[cell->row * 2 + cell->col];
            CHECK(up.values[r * 6 + c] == expected);
        }
    }
}

TEST_CASE("upsample_nearest never invents a value") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        int k = rng.uniform_int(2, 5);
        RasterGrid coarse{rng.uniform_int(1, 6), rng.uniform_int(1, 6), 0.0, 0.0, 10.0 * k,
                          32643, {}};
        coarse.origin_y = coarse.height * coarse.pixel_size;
        Band b;
        b.name = "x";
        b.pixel_size = coarse.pixel_size;
        b.values.resize(coarse.cell_count());
        for (float& v : b.values) v = static_cast<float>(rng.uniform_int(0, 5));
        coarse.bands.push_back(b);
        RasterGrid fine{coarse.width * k, coarse.height * k, 0.0, coarse.origin_y, 10.0,
                        32643, {}};
        Band up = upsample_nearest(coarse, "x", fine);
        std::set<float> source(b.values.begin(), b.values.end());
        std::set<float> result(up.values.begin(), up.values.end());
        CHECK(source == result);  // same distinct values, nothing new
    }
}

TEST_CASE("upsample_nearest rejects bad ratios and origins") {
    RasterGrid coarse{2, 2, 0.0, 50.0, 25.0, 32643, {}};
    Band b;
    b.name = "x";
    b.pixel_size = 25.0;
    b.values = {1, 2, 3, 4};
    coarse.bands.push_back(b);
    RasterGrid fine{5, 5, 0.0, 50.0, 10.0, 32643, {}};
    CHECK_THROWS_AS(upsample_nearest(coarse, "x", fine), ValidationError);
    RasterGrid shifted{4, 4, 1.0, 50.0, 12.5, 32643, {}};
    CHECK_THROWS_AS(upsample_nearest(coarse, "x", shifted), ValidationError);
}

TEST_CASE("mask bundles round-trip through scenes") {
    RasterGrid g{3, 2, 0.0, 20.0, 10.0, 32643, {}};
    BinaryMask m = BinaryMask::like(g);
    m.cells = {MaskCell::True,   MaskCell::False, MaskCell::Nodata,
               MaskCell::False,  MaskCell::True,  MaskCell::True};
    Scene s = mask_to_scene(m, Date{2021, 9, 1});
    BinaryMask back = mask_from_scene(s);
    CHECK(back.cells == m.cells);
    CHECK(back.same_geometry(m));
}

}  // TEST_SUITE
