#include "agburn/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "agburn/survey.hpp"
#include "agburn/zones.hpp"

namespace fs = std::filesystem;

namespace agburn::fixture {

namespace {

// Scar intensity classes. Values sit well away from the 0.85/0.90/0.95 sweep
// and the 0.20 NBR cut, so float32 storage cannot flip a comparison.
struct ScarClass {
    float nir, swir, swir2, red;
    int radius;  // Chebyshev radius of the ring this class paints
};
const ScarClass kScar[3] = {
    {0.20f, 0.27f, 1.3133333f, 0.02f, 1},  // BAIS2 ~0.970
    {0.20f, 0.27f, 0.4505882f, 0.02f, 2},  // BAIS2 ~0.915
    {0.20f, 0.27f, 0.2876923f, 0.02f, 3},  // BAIS2 ~0.870
};

double scar_bais2(int cls) {
    double s2 = kScar[cls].swir2, r = kScar[cls].red;
    return (s2 - r) / (s2 + r);
}
double scar_nbr(int cls) {
    double n = kScar[cls].nir, s = kScar[cls].swir;
    return (n - s) / (n + s);
}

struct Layout {
    int width, height;
    double origin_x, origin_y, px;
    int cloud_row_max;   // QA-cloud strip: rows [0, cloud_row_max]
    int water_row_min;   // water strip: rows [water_row_min, height)
    int urban_col_max;   // urban strip: cols [0, urban_col_max]
};

Date date_in_week(int year, int week, int offset_days) {
    return civil_from_days(days_from_civil(monday_of_iso_week(year, week)) + offset_days);
}

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

}  // namespace

pipeline::PipelineConfig fixture_config(const FixtureSpec& spec, const fs::path& dir) {
    pipeline::PipelineConfig cfg;
    cfg.scene_dir = (dir / "scenes").string();
    cfg.water_mask = (dir / "water").string();
    cfg.bufrac = (dir / "bufrac").string();
    cfg.fire_points = (dir / "fire_points.csv").string();
    cfg.survey = (dir / "survey.csv").string();
    cfg.output_dir = (dir / "out").string();
    cfg.study_year = spec.study_year;
    cfg.week_start = spec.week_start;
    cfg.week_end = spec.week_end;
    cfg.ref_lon = spec.ref_lon;
    cfg.ref_lat = spec.ref_lat;
    return cfg;
}

FixtureTruth generate(const FixtureSpec& spec, const fs::path& dir) {
    Rng rng(spec.seed);
    FixtureTruth truth;
    fs::create_directories(dir);
    fs::create_directories(dir / "scenes");

    const double spacing = 1600.0;
    Layout lay;
    lay.px = spec.pixel_size;
    lay.origin_x = 0.0;
    lay.width = static_cast<int>((2000.0 * 2 + (spec.village_cols - 1) * spacing) / lay.px);
    lay.height = static_cast<int>((2000.0 * 2 + (spec.village_rows - 1) * spacing) / lay.px);
    lay.origin_y = lay.height * lay.px;
    lay.cloud_row_max = 25;
    lay.water_row_min = lay.height - 20;
    lay.urban_col_max = 15;

    zones::LocalProjection proj;
    proj.ref_lon = spec.ref_lon;
    proj.ref_lat = spec.ref_lat;

    // ---- survey rows ------------------------------------------------------
    struct PlotRow {
        std::string household, village, district;
        int hh_size, head_age, head_male;
        std::optional<int> edu, hindu, caste, tractor, esw, labor;
        double area, distance;
        int owned, fert, tillage, residue;
        std::optional<double> x, y;  // metric; written as lon/lat
        bool burn = false;
        int burn_week = 0;
    };
    std::vector<PlotRow> rows;

    auto opt_bin = [&](double p, double missing_rate) -> std::optional<int> {
        if (rng.bernoulli(missing_rate)) return std::nullopt;
        return rng.bernoulli(p) ? 1 : 0;
    };
    const int conv_tillage[4] = {1, 2, 3, 5};
    const int burn_codes[3] = {3, 4, 7};
    const int other_codes[7] = {1, 2, 5, 6, 8, 9, 10};

    std::vector<int> usable_weeks;
    for (int w = spec.week_start; w <= spec.week_end; ++w) usable_weeks.push_back(w);

    int hh_counter = 0;
    auto make_row = [&](const std::string& village, const std::string& district,
                        std::optional<double> px_, std::optional<double> py_, bool zt,
                        bool burn) {
        PlotRow r;
        r.household = "h" + std::to_string(10000 + hh_counter++);
        r.village = village;
        r.district = district;
        r.hh_size = 1 + rng.uniform_int(0, 9);
        r.head_age = rng.uniform_int(20, 80);
        r.head_male = rng.bernoulli(0.9) ? 1 : 0;
        r.edu = opt_bin(0.4, 0.03);
        r.hindu = opt_bin(0.5, 0.01);
        r.caste = opt_bin(0.4, 0.01);
        r.tractor = opt_bin(0.45, 0.01);
        r.area = 0.1 + rng.uniform() * 3.0;
        r.distance = rng.uniform() * 5.0;
        r.owned = rng.bernoulli(0.9) ? 1 : 0;
        r.esw = opt_bin(0.1, 0.01);
        r.fert = rng.bernoulli(0.95) ? 1 : 0;
        r.labor = opt_bin(0.8, 0.01);
        r.tillage = zt ? 4 : conv_tillage[rng.uniform_int(0, 3)];
        r.residue = burn ? burn_codes[rng.uniform_int(0, 2)]
                         : other_codes[rng.uniform_int(0, 6)];
        r.x = px_;
        r.y = py_;
        r.burn = burn;
        r.burn_week = usable_weeks[rng.uniform_int(0, static_cast<int>(usable_weeks.size()) - 1)];
        if (zt) ++truth.zero_tillage_plots;
        if (burn) ++truth.burn_plots;
        return r;
    };

    for (int j = 0; j < spec.village_rows; ++j) {
        std::string district = "d" + std::to_string(j);
        for (int i = 0; i < spec.village_cols; ++i) {
            std::string village = "v" + two_digits(j * spec.village_cols + i);
            double cx = 2000.0 + i * spacing;
            double cy = 2000.0 + j * spacing;
            double zt_share = 0.05 + 0.55 * (spec.village_cols > 1
                                                 ? static_cast<double>(i) / (spec.village_cols - 1)
                                                 : 0.0);
            for (int p = 0; p < spec.plots_per_village; ++p) {
                double px_ = cx + rng.uniform(-450.0, 450.0);
                double py_ = cy + rng.uniform(-450.0, 450.0);
                bool zt = rng.bernoulli(zt_share);
                bool burn = rng.bernoulli(zt ? spec.burn_prob_zero_tillage
                                             : spec.burn_prob_conventional);
                rows.push_back(make_row(village, district, px_, py_, zt, burn));
                ++truth.plots_with_coords;
            }
        }
    }
    truth.villages = spec.village_rows * spec.village_cols;
    truth.districts = spec.village_rows;

    auto village_center = [&](int index) {
        int i = index % spec.village_cols;
        int j = index / spec.village_cols;
        return MapPoint{2000.0 + i * spacing, 2000.0 + j * spacing};
    };

    // A village without any coordinates: built nowhere, dropped by cleaning.
    for (int p = 0; p < 12; ++p) {
        rows.push_back(make_row("v_nocoord", "d0", std::nullopt, std::nullopt,
                                rng.bernoulli(0.2), false));
        ++truth.rows_excluded_village;
    }
    // A far coordinate outlier on the last village; the plot is ignored for
    // box building but mild enough not to push the provisional center past
    // the cutoff for the ordinary plots.
    {
        MapPoint c = village_center(truth.villages - 1);
        double off = 3000.0 * (spec.plots_per_village + 1);
        rows.push_back(make_row("v" + two_digits(truth.villages - 1),
                                "d" + std::to_string(spec.village_rows - 1), c.x + off,
                                c.y + off, false, false));
        ++truth.plots_with_coords;
    }
    // A plot-area outlier above the cleaning cap.
    {
        MapPoint c = village_center(1);
        PlotRow r = make_row("v" + two_digits(1), "d0", c.x + 100.0, c.y + 100.0, false,
                             false);
        r.area = 1355.4;
        rows.push_back(r);
        ++truth.plots_with_coords;
        ++truth.rows_area_outlier;
    }
    truth.rows = static_cast<int>(rows.size());

    // ---- survey.csv ---------------------------------------------------------
    {
        std::ofstream f(dir / "survey.csv");
        const auto& cols = survey::survey_columns();
        for (std::size_t i = 0; i < cols.size(); ++i) f << (i ? "," : "") << cols[i];
        f << '\n';
        auto opt_str = [](const std::optional<int>& v) {
            return v ? std::to_string(*v) : std::string();
        };
        char buf[64];
        for (const PlotRow& r : rows) {
            std::string lon_s, lat_s;
            if (r.x) {
                auto [lon, lat] = proj.inverse(MapPoint{*r.x, *r.y});
                std::snprintf(buf, sizeof(buf), "%.9f", lon);
                lon_s = buf;
                std::snprintf(buf, sizeof(buf), "%.9f", lat);
                lat_s = buf;
            }
            std::snprintf(buf, sizeof(buf), "%.4f", r.area);
            std::string area_s = buf;
            std::snprintf(buf, sizeof(buf), "%.3f", r.distance);
            std::string dist_s = buf;
            f << r.household << ',' << r.village << ',' << r.district << ',' << r.hh_size
              << ',' << r.head_age << ',' << r.head_male << ',' << opt_str(r.edu) << ','
              << opt_str(r.hindu) << ',' << opt_str(r.caste) << ',' << opt_str(r.tractor)
              << ',' << area_s << ',' << dist_s << ',' << r.owned << ',' << opt_str(r.esw)
              << ',' << r.fert << ',' << opt_str(r.labor) << ',' << r.tillage << ','
              << r.residue << ',' << lon_s << ',' << lat_s << '\n';
        }
    }

    // ---- scar layers ----------------------------------------------------------
    // week -> cell index -> strongest class painted there
    std::map<int, std::map<std::size_t, int>> scars;
    RasterGrid geom{lay.width, lay.height, lay.origin_x, lay.origin_y, lay.px, 32643, {}};
    for (const PlotRow& r : rows) {
        if (!r.burn || !r.x) continue;
        auto center = cell_containing(geom, *r.x, *r.y);
        if (!center) continue;
        auto& layer = scars[r.burn_week];
        for (int cls = 2; cls >= 0; --cls) {
            int rad = kScar[cls].radius;
            for (int dr = -rad; dr <= rad; ++dr) {
                for (int dc = -rad; dc <= rad; ++dc) {
                    if (std::max(std::abs(dr), std::abs(dc)) > rad) continue;
                    int rr = center->row + dr, cc = center->col + dc;
                    if (rr < 0 || rr >= lay.height || cc < 0 || cc >= lay.width) continue;
                    std::size_t idx = static_cast<std::size_t>(rr) * lay.width + cc;
                    auto it = layer.find(idx);
                    if (it == layer.end() || cls < it->second) layer[idx] = cls;
                }
            }
        }
    }

    // ---- expected burned cells per threshold --------------------------------------
    std::map<std::size_t, int> best_class;  // strongest class across weeks
    for (const auto& [week, layer] : scars)
        for (const auto& [idx, cls] : layer) {
            auto it = best_class.find(idx);
            if (it == best_class.end() || cls < it->second) best_class[idx] = cls;
        }
    pipeline::PipelineConfig cfg = fixture_config(spec, dir);
    for (double t : cfg.bais2_sweep) {
        std::int64_t n = 0;
        for (const auto& [idx, cls] : best_class)
            if (scar_bais2(cls) > t && scar_nbr(cls) < cfg.nbr_threshold) ++n;
        truth.burned_pixels[pipeline::threshold_label(t)] = n;
    }

    // ---- scene bundles -------------------------------------------------------------
    auto make_scene = [&](const Date& date, double cloud_fraction, bool qa_clouds,
                          const std::map<std::size_t, int>* layer) {
        Scene s;
        s.grid = geom;
        s.date = date;
        s.cloud_fraction = cloud_fraction;
        const char* names[4] = {spectral::kNir, spectral::kSwir, spectral::kSwir2,
                                spectral::kRed};
        const float base[4] = {0.45f, 0.20f, 0.12f, 0.05f};
        const float amp[4] = {0.05f, 0.03f, 0.02f, 0.01f};
        for (int b = 0; b < 4; ++b) {
            Band band;
            band.name = names[b];
            band.nodata = kDefaultNodata;
            band.pixel_size = lay.px;
            band.values.resize(geom.cell_count());
            for (float& v : band.values)
                v = base[b] + amp[b] * static_cast<float>(rng.uniform(-1.0, 1.0));
            s.grid.bands.push_back(std::move(band));
        }
        if (layer) {
            for (const auto& [idx, cls] : *layer) {
                s.grid.bands[0].values[idx] = kScar[cls].nir;
                s.grid.bands[1].values[idx] = kScar[cls].swir;
                s.grid.bands[2].values[idx] = kScar[cls].swir2;
                s.grid.bands[3].values[idx] = kScar[cls].red;
            }
        }
        Band qa;
        qa.name = "QA60";
        qa.nodata = kDefaultNodata;
        qa.pixel_size = lay.px;
        qa.values.assign(geom.cell_count(), 0.0f);
        if (qa_clouds) {
            for (int r = 0; r <= lay.cloud_row_max; ++r)
                for (int c = 0; c <= 100 && c < lay.width; ++c)
                    qa.values[static_cast<std::size_t>(r) * lay.width + c] =
                        static_cast<float>(r % 2 == 0 ? (1u << 10) : (1u << 11));
        }
        s.grid.bands.push_back(std::move(qa));
        return s;
    };

    int scene_no = 0;
    auto scene_dir_name = [&](const Date& d) {
        return "scene_" + two_digits(scene_no) + "_" + format_date(d);
    };
    std::set<int> weeks_seen;
    for (int w = spec.week_start; w <= spec.week_end; ++w) {
        const std::map<std::size_t, int>* layer = nullptr;
        auto it = scars.find(w);
        if (it != scars.end()) layer = &it->second;

        Scene main_scene = make_scene(date_in_week(spec.study_year, w, 2), 0.05, false, layer);
        write_bundle(main_scene, dir / "scenes" / scene_dir_name(main_scene.date));
        ++scene_no;
        ++truth.scenes_written;
        weeks_seen.insert(w);

        bool second_clear = (w - spec.week_start) % 4 == 1;
        if (second_clear) {
            Scene extra = make_scene(date_in_week(spec.study_year, w, 4), 0.08, false, layer);
            write_bundle(extra, dir / "scenes" / scene_dir_name(extra.date));
            ++scene_no;
            ++truth.scenes_written;
        }
        if (w == spec.week_start + 3) {  // a kept scene with QA-flagged clouds
            Scene cloudy = make_scene(date_in_week(spec.study_year, w, 5), 0.10, true, layer);
            write_bundle(cloudy, dir / "scenes" / scene_dir_name(cloudy.date));
            ++scene_no;
            ++truth.scenes_written;
        }
    }
    truth.weeks_with_scenes = static_cast<int>(weeks_seen.size());
    // Two scenes above the cloud limit and one outside the study period.
    {
        Scene s = make_scene(date_in_week(spec.study_year, spec.week_start + 2, 4), 0.50,
                             false, nullptr);
        write_bundle(s, dir / "scenes" / scene_dir_name(s.date));
        ++scene_no;
        ++truth.scenes_written;
        ++truth.scenes_high_cloud;
        s = make_scene(date_in_week(spec.study_year, spec.week_start + 7, 3), 0.60, false,
                       nullptr);
        write_bundle(s, dir / "scenes" / scene_dir_name(s.date));
        ++scene_no;
        ++truth.scenes_written;
        ++truth.scenes_high_cloud;
        s = make_scene(date_in_week(spec.study_year, spec.week_start - 2, 0), 0.05, false,
                       nullptr);
        write_bundle(s, dir / "scenes" / scene_dir_name(s.date));
        ++scene_no;
        ++truth.scenes_written;
        ++truth.scenes_out_of_period;
    }

    // ---- water and built-up rasters ---------------------------------------------------
    {
        Scene water;
        water.grid = geom;
        water.date = Date{spec.study_year, 1, 1};
        Band b;
        b.name = "water";
        b.nodata = kDefaultNodata;
        b.pixel_size = lay.px;
        b.values.assign(geom.cell_count(), 0.0f);
        for (int r = lay.water_row_min; r < lay.height; ++r)
            for (int c = 0; c < lay.width; ++c)
                b.values[static_cast<std::size_t>(r) * lay.width + c] = 1.0f;
        water.grid.bands.push_back(std::move(b));
        write_bundle(water, dir / "water");

        Scene bufrac;
        bufrac.grid = geom;
        bufrac.date = Date{spec.study_year, 1, 1};
        Band u;
        u.name = "BUFRAC";
        u.nodata = kDefaultNodata;
        u.pixel_size = lay.px;
        u.values.assign(geom.cell_count(), 5.0f);
        for (int r = 0; r < lay.height; ++r)
            for (int c = 0; c <= lay.urban_col_max; ++c)
                u.values[static_cast<std::size_t>(r) * lay.width + c] = 80.0f;
        bufrac.grid.bands.push_back(std::move(u));
        write_bundle(bufrac, dir / "bufrac");
    }

    // ---- active-fire points ---------------------------------------------------------------
    {
        std::ofstream f(dir / "fire_points.csv");
        f << "lon,lat,confidence,type,date\n";
        char buf[64];
        auto emit = [&](double x, double y, const char* conf, int type, const Date& d) {
            auto [lon, lat] = proj.inverse(MapPoint{x, y});
            std::snprintf(buf, sizeof(buf), "%.9f,%.9f", lon, lat);
            f << buf << ',' << conf << ',' << type << ',' << format_date(d) << '\n';
        };
        int emitted = 0;
        for (const PlotRow& r : rows) {
            if (!r.burn || !r.x || emitted >= 25) continue;
            emit(*r.x, *r.y, "h", 0, date_in_week(spec.study_year, r.burn_week, 2));
            ++emitted;
        }
        Date d = date_in_week(spec.study_year, spec.week_start, 2);
        emit(5000.0, 5000.0, "n", 0, d);       // nominal confidence: dropped
        emit(5200.0, 5000.0, "l", 0, d);       // low confidence: dropped
        emit(5400.0, 5000.0, "h", 1, d);       // non-agricultural type: dropped
        emit(300.0, 6000.0, "h", 0, d);        // urban strip: dropped
        emit(-9000.0, 6000.0, "h", 0, d);      // outside raster: dropped
    }

    save_config(cfg, dir / "agburn.cfg");
    truth.config_path = dir / "agburn.cfg";
    return truth;
}

}  // namespace agburn::fixture
