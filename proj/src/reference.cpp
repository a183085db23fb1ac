#include "agburn/reference.hpp"

#include <algorithm>

namespace agburn::reference {

namespace {

spectral::IndexRaster make_index_like(const RasterGrid& g, const std::string& name) {
    spectral::IndexRaster out;
    out.index_name = name;
    out.grid.width = g.width;
    out.grid.height = g.height;
    out.grid.origin_x = g.origin_x;
    out.grid.origin_y = g.origin_y;
    out.grid.pixel_size = g.pixel_size;
    out.grid.epsg = g.epsg;
    Band b;
    b.name = name;
    b.nodata = kDefaultNodata;
    b.pixel_size = g.pixel_size;
    b.values.resize(g.cell_count());
    out.grid.bands.push_back(std::move(b));
    return out;
}

}  // namespace

spectral::IndexRaster compute_nbr(const Scene& scene) {
    const Band& nir = scene.grid.band(spectral::kNir);
    const Band& swir = scene.grid.band(spectral::kSwir);
    spectral::IndexRaster out = make_index_like(scene.grid, "NBR");
    Band& dst = out.grid.bands[0];
    for (std::size_t i = 0; i < dst.values.size(); ++i) {
        float a = nir.values[i], b = swir.values[i];
        if (a == nir.nodata || b == swir.nodata) {
            dst.values[i] = dst.nodata;
        } else {
            float sum = a + b;
            dst.values[i] = sum == 0.0f ? dst.nodata : (a - b) / sum;
        }
    }
    return out;
}

spectral::IndexRaster compute_bai(const Scene& scene) {
    const Band& red = scene.grid.band(spectral::kRed);
    const Band& nir = scene.grid.band(spectral::kNir);
    spectral::IndexRaster out = make_index_like(scene.grid, "BAI");
    Band& dst = out.grid.bands[0];
    for (std::size_t i = 0; i < dst.values.size(); ++i) {
        float r = red.values[i], n = nir.values[i];
        if (r == red.nodata || n == nir.nodata) {
            dst.values[i] = dst.nodata;
        } else {
            float dr = r - 0.1f;
            float dn = n - 0.06f;
            float den = dr * dr + dn * dn;
            dst.values[i] = den == 0.0f ? dst.nodata : 1.0f / den;
        }
    }
    return out;
}

spectral::IndexRaster compute_bais2(const Scene& scene) {
    const Band& swir2 = scene.grid.band(spectral::kSwir2);
    const Band& red = scene.grid.band(spectral::kRed);
    spectral::IndexRaster out = make_index_like(scene.grid, "BAIS2");
    Band& dst = out.grid.bands[0];
    for (std::size_t i = 0; i < dst.values.size(); ++i) {
        float s2 = swir2.values[i], r = red.values[i];
        if (s2 == swir2.nodata || r == red.nodata) {
            dst.values[i] = dst.nodata;
        } else {
            float sum = s2 + r;
            dst.values[i] = sum == 0.0f ? dst.nodata : (s2 - r) / sum;
        }
    }
    return out;
}

spectral::WeeklyComposite weekly_median_composite(const std::vector<Scene>& stack, int week) {
    std::vector<const Scene*> selected;
    for (const Scene& s : stack)
        if (iso_week(s.date).week == week) selected.push_back(&s);
    if (selected.empty())
        throw ValidationError("weekly_median_composite: no scene falls in week " +
                              std::to_string(week));
    const RasterGrid& first = selected.front()->grid;

    spectral::WeeklyComposite out;
    out.iso_week = week;
    out.grid = first;
    for (std::size_t bi = 0; bi < first.bands.size(); ++bi) {
        Band& dst = out.grid.bands[bi];
        const float nd = dst.nodata;
        std::vector<float> buf;
        for (std::size_t i = 0; i < dst.values.size(); ++i) {
            buf.clear();
            for (const Scene* s : selected) {
                float v = s->grid.bands[bi].values[i];
                if (v != nd) buf.push_back(v);
            }
            if (buf.empty()) {
                dst.values[i] = nd;
                continue;
            }
            std::sort(buf.begin(), buf.end());
            std::size_t m = buf.size() / 2;
            dst.values[i] = buf.size() % 2 == 1 ? buf[m] : 0.5f * (buf[m - 1] + buf[m]);
        }
    }
    return out;
}

BinaryMask threshold_burn(const spectral::IndexRaster& bais2,
                          const spectral::IndexRaster& nbr,
                          const burnmask::ThresholdSpec& spec) {
    if (!bais2.grid.same_geometry(nbr.grid))
        throw ValidationError("threshold_burn: index rasters are not grid-aligned");
    const Band& vb = bais2.values();
    const Band& vn = nbr.values();
    const float tb = static_cast<float>(spec.bais2_threshold);
    const float tn = static_cast<float>(spec.nbr_threshold);
    BinaryMask out = BinaryMask::like(bais2.grid);
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
        float b = vb.values[i], n = vn.values[i];
        if (b == vb.nodata || n == vn.nodata)
            out.cells[i] = MaskCell::Nodata;
        else
            out.cells[i] = (b > tb && n < tn) ? MaskCell::True : MaskCell::False;
    }
    return out;
}

BinaryMask max_composite(const std::vector<BinaryMask>& masks) {
    if (masks.empty()) throw ValidationError("max_composite: empty mask list");
    BinaryMask out = masks.front();
    for (std::size_t mi = 1; mi < masks.size(); ++mi) {
        const BinaryMask& m = masks[mi];
        if (!m.same_geometry(out))
            throw ValidationError("max_composite: mask geometries differ");
        for (std::size_t i = 0; i < out.cells.size(); ++i) {
            MaskCell a = out.cells[i], b = m.cells[i];
            if (a == MaskCell::True || b == MaskCell::True)
                out.cells[i] = MaskCell::True;
            else if (a == MaskCell::False || b == MaskCell::False)
                out.cells[i] = MaskCell::False;
            else
                out.cells[i] = MaskCell::Nodata;
        }
    }
    return out;
}

zones::ZonalCounts zonal_counts(const BinaryMask& mask, const zones::ZonePolygon& zone) {
    double ext_x_max = mask.origin_x + mask.width * mask.pixel_size;
    double ext_y_min = mask.origin_y - mask.height * mask.pixel_size;
    if (zone.x_max <= mask.origin_x || zone.x_min >= ext_x_max ||
        zone.y_max <= ext_y_min || zone.y_min >= mask.origin_y)
        throw ValidationError("zone '" + zone.zone_id +
                              "' is disjoint from the raster extent");
    zones::ZonalCounts counts;
    for (int r = 0; r < mask.height; ++r) {
        double y = mask.origin_y - (r + 0.5) * mask.pixel_size;
        for (int c = 0; c < mask.width; ++c) {
            double x = mask.origin_x + (c + 0.5) * mask.pixel_size;
            if (!zone.contains(x, y)) continue;
            MaskCell cell = mask.at(r, c);
            if (cell == MaskCell::Nodata) continue;
            ++counts.valid;
            if (cell == MaskCell::True) ++counts.burned;
        }
    }
    return counts;
}

burnmask::OverlapReport overlap_report(const BinaryMask& mask,
                                       const std::vector<zones::ZonePolygon>& squares) {
    burnmask::OverlapReport rep;
    rep.squares_total = static_cast<std::int64_t>(squares.size());
    rep.burned_total = mask.count(MaskCell::True);

    std::vector<bool> square_hit(squares.size(), false);
    for (int r = 0; r < mask.height; ++r) {
        double y = mask.origin_y - (r + 0.5) * mask.pixel_size;
        for (int c = 0; c < mask.width; ++c) {
            double x = mask.origin_x + (c + 0.5) * mask.pixel_size;
            bool in_any = false;
            for (std::size_t si = 0; si < squares.size(); ++si) {
                if (!squares[si].contains(x, y)) continue;
                in_any = true;
                if (mask.at(r, c) == MaskCell::True) square_hit[si] = true;
            }
            if (in_any && mask.at(r, c) == MaskCell::True) ++rep.burned_in_squares;
        }
    }
    for (bool hit : square_hit)
        if (hit) ++rep.squares_with_burn;
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

}  // namespace agburn::reference
