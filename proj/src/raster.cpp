#include "agburn/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace agburn {

namespace {

constexpr int kFormatVersion = 1;

// Grids are projected meters; geographic (degree) rasters are rejected.
const std::set<int> kGeographicEpsg = {4326, 4258, 4269, 4267};

void validate_band_name(const std::string& name) {
    if (name.empty()) throw ValidationError("band name must not be empty");
    for (char c : name) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                  (c >= '0' && c <= '9') || c == '_';
        if (!ok)
            throw ValidationError("band name '" + name +
                                  "' contains characters outside [A-Za-z0-9_]");
    }
}

}  // namespace

const Band* RasterGrid::find_band(std::string_view name) const {
    for (const Band& b : bands)
        if (b.name == name) return &b;
    return nullptr;
}

Band* RasterGrid::find_band(std::string_view name) {
    for (Band& b : bands)
        if (b.name == name) return &b;
    return nullptr;
}

const Band& RasterGrid::band(std::string_view name) const {
    const Band* b = find_band(name);
    if (!b) throw ValidationError("missing band '" + std::string(name) + "'");
    return *b;
}

Band& RasterGrid::band(std::string_view name) {
    Band* b = find_band(name);
    if (!b) throw ValidationError("missing band '" + std::string(name) + "'");
    return *b;
}

bool RasterGrid::same_geometry(const RasterGrid& other) const {
    return width == other.width && height == other.height &&
           origin_x == other.origin_x && origin_y == other.origin_y &&
           pixel_size == other.pixel_size && epsg == other.epsg;
}

void RasterGrid::validate() const {
    if (width <= 0 || height <= 0)
        throw ValidationError("grid dimensions must be positive");
    if (!(pixel_size > 0.0))
        throw ValidationError("pixel_size must be positive");
    if (kGeographicEpsg.count(epsg))
        throw ValidationError("EPSG " + std::to_string(epsg) +
                              " is a geographic CRS; grids must be projected meters");
    std::set<std::string> seen;
    for (const Band& b : bands) {
        validate_band_name(b.name);
        if (!seen.insert(b.name).second)
            throw ValidationError("duplicate band '" + b.name + "'");
        if (!std::isfinite(b.nodata))
            throw ValidationError("band '" + b.name + "': nodata sentinel must be finite");
        if (!(b.pixel_size > 0.0))
            throw ValidationError("band '" + b.name + "': pixel_size must be positive");
        if (b.values.size() != cell_count())
            throw ValidationError("band '" + b.name + "' has " +
                                  std::to_string(b.values.size()) + " cells, expected " +
                                  std::to_string(cell_count()));
        for (float v : b.values) {
            if (v != b.nodata && !std::isfinite(v))
                throw ValidationError("band '" + b.name +
                                      "' holds a non-finite value that is not nodata");
        }
    }
}

void Scene::validate() const {
    grid.validate();
    if (!(cloud_fraction >= 0.0 && cloud_fraction <= 1.0))
        throw ValidationError("cloud_fraction must lie in [0, 1]");
}

BinaryMask BinaryMask::like(const RasterGrid& g, MaskCell fill) {
    BinaryMask m;
    m.width = g.width;
    m.height = g.height;
    m.origin_x = g.origin_x;
    m.origin_y = g.origin_y;
    m.pixel_size = g.pixel_size;
    m.epsg = g.epsg;
    m.cells.assign(g.cell_count(), fill);
    return m;
}

bool BinaryMask::same_geometry(const RasterGrid& g) const {
    return width == g.width && height == g.height && origin_x == g.origin_x &&
           origin_y == g.origin_y && pixel_size == g.pixel_size && epsg == g.epsg;
}

bool BinaryMask::same_geometry(const BinaryMask& m) const {
    return width == m.width && height == m.height && origin_x == m.origin_x &&
           origin_y == m.origin_y && pixel_size == m.pixel_size && epsg == m.epsg;
}

std::int64_t BinaryMask::count(MaskCell v) const {
    return std::count(cells.begin(), cells.end(), v);
}

MapPoint pixel_center(const RasterGrid& g, int row, int col) {
    if (row < 0 || row >= g.height || col < 0 || col >= g.width)
        throw std::out_of_range("pixel_center: cell (" + std::to_string(row) + ", " +
                                std::to_string(col) + ") outside grid");
    return MapPoint{g.origin_x + (col + 0.5) * g.pixel_size,
                    g.origin_y - (row + 0.5) * g.pixel_size};
}

std::optional<PixelCoord> cell_containing(const RasterGrid& g, double x, double y) {
    double fc = std::floor((x - g.origin_x) / g.pixel_size);
    double fr = std::floor((g.origin_y - y) / g.pixel_size);
    if (fc < 0 || fc >= g.width || fr < 0 || fr >= g.height) return std::nullopt;
    return PixelCoord{static_cast<int>(fr), static_cast<int>(fc)};
}

Band upsample_nearest(const RasterGrid& coarse, std::string_view band_name,
                      const RasterGrid& target) {
    const Band& src = coarse.band(band_name);
    if (coarse.origin_x != target.origin_x || coarse.origin_y != target.origin_y)
        throw ValidationError("upsample_nearest: origins differ");
    double ratio = coarse.pixel_size / target.pixel_size;
    double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw ValidationError("upsample_nearest: coarse pixel size is not an integer "
                              "multiple of the target's");
    int k = static_cast<int>(rounded);
    if (target.width > coarse.width * k || target.height > coarse.height * k)
        throw ValidationError("upsample_nearest: target extent exceeds the coarse band");

    Band out;
    out.name = src.name;
    out.nodata = src.nodata;
    out.pixel_size = target.pixel_size;
    out.values.resize(target.cell_count());
    for (int r = 0; r < target.height; ++r) {
        // Fine cell centers fall in coarse cell (r/k, c/k): same origin,
        // integer ratio.
        const float* src_row = src.values.data() +
                               static_cast<std::size_t>(r / k) * coarse.width;
        float* dst_row = out.values.data() + static_cast<std::size_t>(r) * target.width;
        for (int c = 0; c < target.width; ++c) dst_row[c] = src_row[c / k];
    }
    return out;
}

namespace {

void write_band_file(const fs::path& path, const std::vector<float>& values) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    if constexpr (std::endian::native == std::endian::little) {
        f.write(reinterpret_cast<const char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        for (float v : values) {
            auto u = std::bit_cast<std::uint32_t>(v);
            char bytes[4] = {static_cast<char>(u), static_cast<char>(u >> 8),
                             static_cast<char>(u >> 16), static_cast<char>(u >> 24)};
            f.write(bytes, 4);
        }
    }
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<float> read_band_file(const fs::path& path, std::size_t cells) {
    std::error_code ec;
    auto size = fs::file_size(path, ec);
    if (ec) throw ValidationError("missing band file '" + path.string() + "'");
    if (size != cells * sizeof(float))
        throw ValidationError("band file '" + path.string() + "' holds " +
                              std::to_string(size) + " bytes, expected " +
                              std::to_string(cells * sizeof(float)));
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::vector<float> values(cells);
    if constexpr (std::endian::native == std::endian::little) {
        f.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(cells * sizeof(float)));
    } else {
        for (std::size_t i = 0; i < cells; ++i) {
            unsigned char b[4];
            f.read(reinterpret_cast<char*>(b), 4);
            std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                              (static_cast<std::uint32_t>(b[1]) << 8) |
                              (static_cast<std::uint32_t>(b[2]) << 16) |
                              (static_cast<std::uint32_t>(b[3]) << 24);
            values[i] = std::bit_cast<float>(u);
        }
    }
    if (!f) throw std::runtime_error("read failed for '" + path.string() + "'");
    return values;
}

}  // namespace

void write_bundle(const Scene& scene, const fs::path& dir) {
    scene.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

    json header;
    header["format_version"] = kFormatVersion;
    header["width"] = scene.grid.width;
    header["height"] = scene.grid.height;
    header["origin_x"] = scene.grid.origin_x;
    header["origin_y"] = scene.grid.origin_y;
    header["pixel_size"] = scene.grid.pixel_size;
    header["epsg"] = scene.grid.epsg;
    header["date"] = format_date(scene.date);
    header["cloud_fraction"] = scene.cloud_fraction;
    json bands = json::array();
    for (const Band& b : scene.grid.bands) {
        bands.push_back({{"name", b.name},
                         {"nodata", static_cast<double>(b.nodata)},
                         {"pixel_size", b.pixel_size}});
    }
    header["bands"] = bands;

    std::ofstream hf(dir / "header.json");
    if (!hf) throw std::runtime_error("cannot write header in '" + dir.string() + "'");
    hf << header.dump(2) << "\n";
    if (!hf) throw std::runtime_error("header write failed in '" + dir.string() + "'");

    for (const Band& b : scene.grid.bands)
        write_band_file(dir / (b.name + ".f32"), b.values);
}

Scene read_bundle(const fs::path& dir) {
    fs::path header_path = dir / "header.json";
    std::ifstream hf(header_path);
    if (!hf) throw ValidationError("missing header '" + header_path.string() + "'");
    json header;
    try {
        hf >> header;
    } catch (const json::exception& e) {
        throw ValidationError("malformed header '" + header_path.string() + "': " + e.what());
    }

    try {
        if (header.at("format_version").get<int>() != kFormatVersion)
            throw ValidationError("unknown bundle format version " +
                                  header["format_version"].dump());
        Scene scene;
        scene.grid.width = header.at("width").get<int>();
        scene.grid.height = header.at("height").get<int>();
        scene.grid.origin_x = header.at("origin_x").get<double>();
        scene.grid.origin_y = header.at("origin_y").get<double>();
        scene.grid.pixel_size = header.at("pixel_size").get<double>();
        scene.grid.epsg = header.at("epsg").get<int>();
        scene.date = parse_date(header.at("date").get<std::string>());
        scene.cloud_fraction = header.at("cloud_fraction").get<double>();
        if (scene.grid.width <= 0 || scene.grid.height <= 0 || !(scene.grid.pixel_size > 0))
            throw ValidationError("header '" + header_path.string() +
                                  "' declares an invalid geometry");
        for (const json& jb : header.at("bands")) {
            Band b;
            b.name = jb.at("name").get<std::string>();
            validate_band_name(b.name);
            b.nodata = static_cast<float>(jb.at("nodata").get<double>());
            b.pixel_size = jb.at("pixel_size").get<double>();
            b.values = read_band_file(dir / (b.name + ".f32"), scene.grid.cell_count());
            scene.grid.bands.push_back(std::move(b));
        }
        scene.validate();
        return scene;
    } catch (const json::exception& e) {
        throw ValidationError("bad header '" + header_path.string() + "': " + e.what());
    }
}

Scene mask_to_scene(const BinaryMask& mask, const Date& date) {
    Scene scene;
    scene.grid.width = mask.width;
    scene.grid.height = mask.height;
    scene.grid.origin_x = mask.origin_x;
    scene.grid.origin_y = mask.origin_y;
    scene.grid.pixel_size = mask.pixel_size;
    scene.grid.epsg = mask.epsg;
    scene.date = date;
    Band b;
    b.name = "mask";
    b.nodata = kDefaultNodata;
    b.pixel_size = mask.pixel_size;
    b.values.resize(mask.cells.size());
    for (std::size_t i = 0; i < mask.cells.size(); ++i) {
        switch (mask.cells[i]) {
            case MaskCell::False: b.values[i] = 0.0f; break;
            case MaskCell::True: b.values[i] = 1.0f; break;
            default: b.values[i] = b.nodata; break;
        }
    }
    scene.grid.bands.push_back(std::move(b));
    return scene;
}

BinaryMask mask_from_scene(const Scene& scene, std::string_view band_name) {
    const Band& b = scene.grid.band(band_name);
    BinaryMask m = BinaryMask::like(scene.grid);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        float v = b.values[i];
        m.cells[i] = v == b.nodata ? MaskCell::Nodata
                                   : (v != 0.0f ? MaskCell::True : MaskCell::False);
    }
    return m;
}

BinaryMask mask_from_band(const RasterGrid& g, std::string_view band_name, float threshold) {
    const Band& b = g.band(band_name);
    BinaryMask m = BinaryMask::like(g);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        float v = b.values[i];
        m.cells[i] = v == b.nodata ? MaskCell::Nodata
                                   : (v > threshold ? MaskCell::True : MaskCell::False);
    }
    return m;
}

}  // namespace agburn
