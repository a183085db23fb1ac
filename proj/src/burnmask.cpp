#include "agburn/burnmask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fs = std::filesystem;

namespace agburn::burnmask {

BinaryMask threshold_burn(const spectral::IndexRaster& bais2,
                          const spectral::IndexRaster& nbr, const ThresholdSpec& spec) {
    const RasterGrid& gb = bais2.grid;
    const RasterGrid& gn = nbr.grid;
    if (!gb.same_geometry(gn))
        throw ValidationError("threshold_burn: index rasters are not grid-aligned");

    const Band& vb = bais2.values();
    const Band& vn = nbr.values();
    const float tb = static_cast<float>(spec.bais2_threshold);
    const float tn = static_cast<float>(spec.nbr_threshold);

    BinaryMask out = BinaryMask::like(gb);
    const int h = gb.height, w = gb.width;
    const int nt = resolved_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int r = 0; r < h; ++r) {
        std::size_t off = static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) {
            float b = vb.values[off + c];
            float n = vn.values[off + c];
            if (b == vb.nodata || n == vn.nodata)
                out.cells[off + c] = MaskCell::Nodata;
            else
                out.cells[off + c] =
                    (b > tb && n < tn) ? MaskCell::True : MaskCell::False;
        }
    }
    return out;
}

BinaryMask max_composite(const std::vector<BinaryMask>& masks) {
    if (masks.empty()) throw ValidationError("max_composite: empty mask list");
    const BinaryMask& first = masks.front();
    for (const BinaryMask& m : masks)
        if (!m.same_geometry(first))
            throw ValidationError("max_composite: mask geometries differ");

    // Pairwise fold; the combine is associative and commutative, and a cloudy
    // (nodata) week never erases a burn seen in a clear week.
    BinaryMask out = first;
    const std::int64_t n = static_cast<std::int64_t>(out.cells.size());
    const int nt = resolved_threads();
    for (std::size_t mi = 1; mi < masks.size(); ++mi) {
        const MaskCell* src = masks[mi].cells.data();
        MaskCell* dst = out.cells.data();
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::int64_t i = 0; i < n; ++i) {
            MaskCell a = dst[i];
            MaskCell b = src[i];
            if (a == MaskCell::True || b == MaskCell::True)
                dst[i] = MaskCell::True;
            else if (a == MaskCell::False || b == MaskCell::False)
                dst[i] = MaskCell::False;
            else
                dst[i] = MaskCell::Nodata;
        }
    }
    return out;
}

FireConfidence fire_confidence_from_string(const std::string& s) {
    if (s == "l" || s == "low") return FireConfidence::Low;
    if (s == "n" || s == "nominal") return FireConfidence::Nominal;
    if (s == "h" || s == "high") return FireConfidence::High;
    throw ValidationError("unknown fire confidence '" + s + "'");
}

FireFilterResult filter_fire_points(const std::vector<FireDetection>& points,
                                    const BinaryMask& urban_mask) {
    RasterGrid geometry{urban_mask.width, urban_mask.height, urban_mask.origin_x,
                        urban_mask.origin_y, urban_mask.pixel_size, urban_mask.epsg, {}};
    FireFilterResult out;
    for (const FireDetection& p : points) {
        if (p.confidence != FireConfidence::High) {
            ++out.dropped_confidence;
            continue;
        }
        if (p.fire_type != 0) {
            ++out.dropped_type;
            continue;
        }
        auto cell = cell_containing(geometry, p.x, p.y);
        if (!cell) {
            ++out.dropped_outside;
            continue;
        }
        if (urban_mask.at(cell->row, cell->col) != MaskCell::False) {
            ++out.dropped_urban;
            continue;
        }
        out.kept.push_back(p);
    }
    return out;
}

std::vector<zones::ZonePolygon> fire_squares(const std::vector<FireDetection>& points,
                                             double side_m) {
    std::vector<zones::ZonePolygon> out;
    out.reserve(points.size());
    double half = side_m / 2.0;
    int i = 0;
    for (const FireDetection& p : points) {
        zones::ZonePolygon z;
        z.zone_id = "fire_" + std::to_string(i++);
        z.kind = zones::ZoneKind::FireSquare;
        z.x_min = p.x - half;
        z.x_max = p.x + half;
        z.y_min = p.y - half;
        z.y_max = p.y + half;
        out.push_back(std::move(z));
    }
    return out;
}

OverlapReport overlap_report(const BinaryMask& mask,
                             const std::vector<zones::ZonePolygon>& squares) {
    OverlapReport rep;
    rep.squares_total = static_cast<std::int64_t>(squares.size());
    rep.burned_total = mask.count(MaskCell::True);

    // Coverage raster: cells whose center lies in at least one square.
    std::vector<std::uint8_t> covered(mask.cells.size(), 0);
    for (const zones::ZonePolygon& z : squares) {
        bool any_burn = false;
        auto row_of = [&](double y) { return (mask.origin_y - y) / mask.pixel_size; };
        auto col_of = [&](double x) { return (x - mask.origin_x) / mask.pixel_size; };
        int r0 = std::max(0, static_cast<int>(std::floor(row_of(z.y_max))) - 1);
        int r1 = std::min(mask.height - 1, static_cast<int>(std::ceil(row_of(z.y_min))) + 1);
        int c0 = std::max(0, static_cast<int>(std::floor(col_of(z.x_min))) - 1);
        int c1 = std::min(mask.width - 1, static_cast<int>(std::ceil(col_of(z.x_max))) + 1);
        for (int r = r0; r <= r1; ++r) {
            double y = mask.origin_y - (r + 0.5) * mask.pixel_size;
            for (int c = c0; c <= c1; ++c) {
                double x = mask.origin_x + (c + 0.5) * mask.pixel_size;
                if (!z.contains(x, y)) continue;
                std::size_t i = static_cast<std::size_t>(r) * mask.width + c;
                covered[i] = 1;
                if (mask.cells[i] == MaskCell::True) any_burn = true;
            }
        }
        if (any_burn) ++rep.squares_with_burn;
    }
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (covered[i] && mask.cells[i] == MaskCell::True) ++rep.burned_in_squares;

    rep.fraction_squares_with_burn =
        rep.squares_total == 0
            ? 0.0
            : static_cast<double>(rep.squares_with_burn) / rep.squares_total;
    rep.fraction_burned_in_squares =
        rep.burned_total == 0
            ? 0.0
            : static_cast<double>(rep.burned_in_squares) / rep.burned_total;
    return rep;
}

void write_overlap_report(const fs::path& path, const OverlapReport& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "squares_total=" << r.squares_total << '\n'
      << "squares_with_burn=" << r.squares_with_burn << '\n'
      << "fraction_squares_with_burn=" << format_sig(r.fraction_squares_with_burn) << '\n'
      << "burned_pixels_total=" << r.burned_total << '\n'
      << "burned_pixels_in_squares=" << r.burned_in_squares << '\n'
      << "fraction_burned_in_squares=" << format_sig(r.fraction_burned_in_squares) << '\n';
}

std::vector<FireDetection> read_fire_csv(const fs::path& path,
                                         const zones::LocalProjection* proj) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open fire points file '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line))
        throw ValidationError("fire points file '" + path.string() + "' is empty");
    auto header = split_delimited(trim(line));
    for (auto& h : header) h = trim(h);

    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int cx = col("x"), cy = col("y");
    int clon = col("lon"), clat = col("lat");
    bool geographic = cx < 0 || cy < 0;
    if (geographic && (clon < 0 || clat < 0))
        throw ValidationError("fire points file needs x,y or lon,lat columns");
    if (geographic && !proj)
        throw ValidationError("fire points file uses lon/lat but no projection was given");
    int cconf = col("confidence"), ctype = col("type"), cdate = col("date");
    if (cconf < 0 || ctype < 0 || cdate < 0)
        throw ValidationError("fire points file needs confidence, type and date columns");

    std::vector<FireDetection> out;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_delimited(line);
        auto field = [&](int idx) -> std::string {
            if (idx < 0 || idx >= static_cast<int>(cells.size()))
                throw ValidationError("fire points file line " + std::to_string(line_no) +
                                      ": too few columns");
            return trim(cells[idx]);
        };
        FireDetection d;
        try {
            if (geographic) {
                MapPoint p = proj->forward(std::stod(field(clon)), std::stod(field(clat)));
                d.x = p.x;
                d.y = p.y;
            } else {
                d.x = std::stod(field(cx));
                d.y = std::stod(field(cy));
            }
            d.fire_type = std::stoi(field(ctype));
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("fire points file line " + std::to_string(line_no) +
                                  ": unparseable number");
        }
        d.confidence = fire_confidence_from_string(field(cconf));
        d.date = parse_date(field(cdate));
        out.push_back(d);
    }
    return out;
}

}  // namespace agburn::burnmask
