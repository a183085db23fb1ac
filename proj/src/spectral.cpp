#include "agburn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace agburn::spectral {

std::optional<double> nbr_value(double nir, double swir) {
    double sum = nir + swir;
    if (sum == 0.0) return std::nullopt;
    return (nir - swir) / sum;
}

std::optional<double> bai_value(double red, double nir) {
    double dr = red - 0.1;
    double dn = nir - 0.06;
    double den = dr * dr + dn * dn;
    if (den == 0.0) return std::nullopt;
    return 1.0 / den;
}

std::optional<double> bais2_value(double swir2, double red) {
    double sum = swir2 + red;
    if (sum == 0.0) return std::nullopt;
    return (swir2 - red) / sum;
}

namespace {

IndexRaster make_index_like(const RasterGrid& g, const std::string& name) {
    IndexRaster out;
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

// Applies a float32 two-band formula row by row. Per-cell outputs are
// independent, so the parallel result is bit-identical to serial for any
// thread count.
template <typename F>
IndexRaster binary_index_kernel(const RasterGrid& g, const Band& a, const Band& b,
                                const std::string& name, F&& fn) {
    IndexRaster out = make_index_like(g, name);
    float* dst = out.grid.bands[0].values.data();
    const float nd = out.grid.bands[0].nodata;
    const float* pa = a.values.data();
    const float* pb = b.values.data();
    const float nda = a.nodata;
    const float ndb = b.nodata;
    const int h = g.height, w = g.width;
    const int nt = resolved_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int r = 0; r < h; ++r) {
        std::size_t off = static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) {
            float va = pa[off + c];
            float vb = pb[off + c];
            dst[off + c] = (va == nda || vb == ndb) ? nd : fn(va, vb, nd);
        }
    }
    return out;
}

}  // namespace

IndexRaster compute_nbr(const Scene& scene) {
    const RasterGrid& g = scene.grid;
    return binary_index_kernel(g, g.band(kNir), g.band(kSwir), "NBR",
                               [](float nir, float swir, float nd) {
                                   float sum = nir + swir;
                                   return sum == 0.0f ? nd : (nir - swir) / sum;
                               });
}

IndexRaster compute_bai(const Scene& scene) {
    const RasterGrid& g = scene.grid;
    return binary_index_kernel(g, g.band(kRed), g.band(kNir), "BAI",
                               [](float red, float nir, float nd) {
                                   float dr = red - 0.1f;
                                   float dn = nir - 0.06f;
                                   float den = dr * dr + dn * dn;
                                   return den == 0.0f ? nd : 1.0f / den;
                               });
}

IndexRaster compute_bais2(const Scene& scene) {
    const RasterGrid& g = scene.grid;
    return binary_index_kernel(g, g.band(kSwir2), g.band(kRed), "BAIS2",
                               [](float swir2, float red, float nd) {
                                   float sum = swir2 + red;
                                   return sum == 0.0f ? nd : (swir2 - red) / sum;
                               });
}

IndexRaster index_from_grid(const RasterGrid& grid, const std::string& index_name) {
    const Band& src = grid.band(index_name);
    IndexRaster out = make_index_like(grid, index_name);
    out.grid.bands[0] = src;
    return out;
}

BinaryMask build_urban_mask(const RasterGrid& bufrac, const std::string& band_name) {
    return mask_from_band(bufrac, band_name, 50.0f);
}

Scene apply_masks(const Scene& scene, const QaSpec* qa, const BinaryMask* water,
                  const BinaryMask* urban) {
    if (water && !water->same_geometry(scene.grid))
        throw ValidationError("apply_masks: water mask geometry differs from the scene");
    if (urban && !urban->same_geometry(scene.grid))
        throw ValidationError("apply_masks: urban mask geometry differs from the scene");

    Scene out = scene;
    const Band* qa_band = nullptr;
    std::uint32_t qa_flags = 0;
    if (qa) {
        qa_band = &out.grid.band(qa->band);
        qa_flags = (1u << qa->cloud_bit) | (1u << qa->cirrus_bit);
    }

    std::vector<Band*> targets;
    for (Band& b : out.grid.bands)
        if (!qa || b.name != qa->band) targets.push_back(&b);

    const std::size_t n = out.grid.cell_count();
    const int nt = resolved_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        bool masked = false;
        if (qa_band) {
            float qv = qa_band->values[i];
            if (qv != qa_band->nodata) {
                auto bits = static_cast<std::uint32_t>(qv);
                masked = (bits & qa_flags) != 0;
            }
        }
        if (!masked && water) masked = water->cells[i] == MaskCell::True;
        if (!masked && urban) masked = urban->cells[i] == MaskCell::True;
        if (masked)
            for (Band* b : targets) b->values[i] = b->nodata;
    }
    return out;
}

std::vector<Scene> filter_scenes(const std::vector<Scene>& stack, double max_cloud) {
    std::vector<Scene> out;
    for (const Scene& s : stack)
        if (s.cloud_fraction <= max_cloud) out.push_back(s);
    return out;
}

WeeklyComposite weekly_median_composite(const std::vector<Scene>& stack, int week) {
    std::vector<const Scene*> selected;
    for (const Scene& s : stack)
        if (iso_week(s.date).week == week) selected.push_back(&s);
    if (selected.empty())
        throw ValidationError("weekly_median_composite: no scene falls in week " +
                              std::to_string(week));
    const RasterGrid& first = selected.front()->grid;
    for (const Scene* s : selected) {
        if (!s->grid.same_geometry(first))
            throw ValidationError("weekly_median_composite: scene geometries differ");
        if (s->grid.bands.size() != first.bands.size())
            throw ValidationError("weekly_median_composite: scene band sets differ");
        for (std::size_t bi = 0; bi < first.bands.size(); ++bi)
            if (s->grid.bands[bi].name != first.bands[bi].name)
                throw ValidationError("weekly_median_composite: scene band sets differ");
    }

    WeeklyComposite out;
    out.iso_week = week;
    out.grid.width = first.width;
    out.grid.height = first.height;
    out.grid.origin_x = first.origin_x;
    out.grid.origin_y = first.origin_y;
    out.grid.pixel_size = first.pixel_size;
    out.grid.epsg = first.epsg;

    const int h = first.height, w = first.width;
    const int nt = resolved_threads();
    for (std::size_t bi = 0; bi < first.bands.size(); ++bi) {
        Band dst = first.bands[bi];  // copies name/nodata/pixel_size
        dst.values.assign(first.cell_count(), dst.nodata);
        const float nd = dst.nodata;
        std::vector<const float*> layers;
        for (const Scene* s : selected) layers.push_back(s->grid.bands[bi].values.data());
        float* out_v = dst.values.data();

#pragma omp parallel num_threads(nt)
        {
            std::vector<float> buf;
            buf.reserve(layers.size());
#pragma omp for schedule(static)
            for (int r = 0; r < h; ++r) {
                std::size_t off = static_cast<std::size_t>(r) * w;
                for (int c = 0; c < w; ++c) {
                    buf.clear();
                    for (const float* layer : layers) {
                        float v = layer[off + c];
                        if (v != nd) buf.push_back(v);
                    }
                    if (buf.empty()) continue;
                    std::size_t m = buf.size() / 2;
                    std::nth_element(buf.begin(), buf.begin() + m, buf.end());
                    float hi = buf[m];
                    if (buf.size() % 2 == 1) {
                        out_v[off + c] = hi;
                    } else {
                        float lo = *std::max_element(buf.begin(), buf.begin() + m);
                        out_v[off + c] = 0.5f * (lo + hi);
                    }
                }
            }
        }
        out.grid.bands.push_back(std::move(dst));
    }
    return out;
}

Scene coerce_reflectance(const Scene& scene, double lo, double hi,
                         const std::vector<std::string>& skip) {
    Scene out = scene;
    for (Band& b : out.grid.bands) {
        if (std::find(skip.begin(), skip.end(), b.name) != skip.end()) continue;
        float flo = static_cast<float>(lo);
        float fhi = static_cast<float>(hi);
        for (float& v : b.values)
            if (v != b.nodata && (v < flo || v > fhi)) v = b.nodata;
    }
    return out;
}

IndexStats index_stats(const RasterGrid& grid, const std::string& band_name) {
    const Band& b = grid.band(band_name);
    IndexStats s;
    s.index_name = band_name;
    std::vector<float> valid;
    valid.reserve(b.values.size());
    for (float v : b.values)
        if (v != b.nodata) valid.push_back(v);
    s.n = static_cast<std::int64_t>(valid.size());
    if (valid.empty()) {
        s.min = s.max = s.mean = s.median = std::nan("");
        return s;
    }
    double sum = 0.0;
    float mn = valid[0], mx = valid[0];
    for (float v : valid) {
        sum += v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    s.min = mn;
    s.max = mx;
    s.mean = sum / static_cast<double>(valid.size());
    std::size_t m = valid.size() / 2;
    std::nth_element(valid.begin(), valid.begin() + m, valid.end());
    float hi2 = valid[m];
    if (valid.size() % 2 == 1) {
        s.median = hi2;
    } else {
        float lo2 = *std::max_element(valid.begin(), valid.begin() + m);
        s.median = 0.5 * (static_cast<double>(lo2) + hi2);
    }
    return s;
}

}  // namespace agburn::spectral
