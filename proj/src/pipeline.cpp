#include "agburn/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "agburn/burnmask.hpp"
#include "agburn/econ.hpp"
#include "agburn/survey.hpp"
#include "agburn/svgplot.hpp"
#include "agburn/zones.hpp"

namespace fs = std::filesystem;

namespace agburn::pipeline {

namespace {

// shortest round-trip form, so the resolved config is readable and exact
std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string sweep_text(const std::vector<double>& sweep) {
    std::string out;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (i) out += ',';
        out += num(sweep[i]);
    }
    return out;
}

}  // namespace

std::string threshold_label(double t) { return format_sig(t, 6); }

void PipelineConfig::validate() const {
    if (survey.empty()) throw ValidationError("config: paths.survey is required");
    if (output_dir.empty()) throw ValidationError("config: paths.output is required");
    if (scene_dir.empty()) throw ValidationError("config: paths.scenes is required");
    if (bais2_sweep.empty())
        throw ValidationError("config: threshold.bais2_sweep must not be empty");
    if (std::find(bais2_sweep.begin(), bais2_sweep.end(), bais2_main) == bais2_sweep.end())
        throw ValidationError("config: threshold.bais2_main must be one of the sweep values");
    if (!(max_cloud >= 0.0 && max_cloud <= 1.0))
        throw ValidationError("config: cloud.max_fraction must lie in [0, 1]");
    if (week_start < 1 || week_end > 53 || week_start > week_end)
        throw ValidationError("config: bad study week range");
    if (!(zone_margin >= 0.0)) throw ValidationError("config: zones.margin must be >= 0");
    if (!(min_plot_area_m2 > 0.0))
        throw ValidationError("config: zones.min_plot_area_m2 must be positive");
    if (!(outlier_cutoff_m > 0.0))
        throw ValidationError("config: zones.outlier_cutoff_m must be positive");
    if (!(plot_area_cap_ha > 0.0))
        throw ValidationError("config: survey.plot_area_cap_ha must be positive");
    if (fe_level_eq2 != "district" && fe_level_eq2 != "village")
        throw ValidationError("config: econ.fe_level_eq2 must be district or village");
    if (cluster_level != "district" && cluster_level != "village")
        throw ValidationError("config: econ.cluster_level must be district or village");
    if (qa.cloud_bit < 0 || qa.cloud_bit > 31 || qa.cirrus_bit < 0 || qa.cirrus_bit > 31)
        throw ValidationError("config: qa bits must lie in [0, 31]");
    if (!(reflectance_min < reflectance_max))
        throw ValidationError("config: reflectance bounds are inverted");
    if (jobs < 0) throw ValidationError("config: jobs must be >= 0");
}

// jobs is deliberately absent: outputs are independent of the worker count,
// so the digest and the resolved config cover analysis parameters only.
std::string PipelineConfig::canonical_text() const {
    std::ostringstream s;
    s << "cloud.max_fraction=" << num(max_cloud) << '\n'
      << "econ.cluster_level=" << cluster_level << '\n'
      << "econ.fe_level_eq2=" << fe_level_eq2 << '\n'
      << "paths.bufrac=" << bufrac << '\n'
      << "paths.fire_points=" << fire_points << '\n'
      << "paths.output=" << output_dir << '\n'
      << "paths.scenes=" << scene_dir << '\n'
      << "paths.survey=" << survey << '\n'
      << "paths.water_mask=" << water_mask << '\n'
      << "projection.ref_lat=" << num(ref_lat) << '\n'
      << "projection.ref_lon=" << num(ref_lon) << '\n'
      << "qa.band=" << qa.band << '\n'
      << "qa.cirrus_bit=" << qa.cirrus_bit << '\n'
      << "qa.cloud_bit=" << qa.cloud_bit << '\n'
      << "reflectance.max=" << num(reflectance_max) << '\n'
      << "reflectance.min=" << num(reflectance_min) << '\n'
      << "study.week_end=" << week_end << '\n'
      << "study.week_start=" << week_start << '\n'
      << "study.year=" << study_year << '\n'
      << "survey.plot_area_cap_ha=" << num(plot_area_cap_ha) << '\n'
      << "threshold.bais2_main=" << num(bais2_main) << '\n'
      << "threshold.bais2_sweep=" << sweep_text(bais2_sweep) << '\n'
      << "threshold.nbr=" << num(nbr_threshold) << '\n'
      << "zones.margin=" << num(zone_margin) << '\n'
      << "zones.min_plot_area_m2=" << num(min_plot_area_m2) << '\n'
      << "zones.outlier_cutoff_m=" << num(outlier_cutoff_m) << '\n';
    return s.str();
}

std::string PipelineConfig::digest() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_text())));
    return buf;
}

void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&](const std::string& v) {
        try {
            return std::stoi(v);
        } catch (const std::exception&) {
            throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
        }
    };
    auto as_double = [&](const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
        }
    };

    if (key == "paths.scenes") cfg.scene_dir = value;
    else if (key == "paths.water_mask") cfg.water_mask = value;
    else if (key == "paths.bufrac") cfg.bufrac = value;
    else if (key == "paths.fire_points") cfg.fire_points = value;
    else if (key == "paths.survey") cfg.survey = value;
    else if (key == "paths.output") cfg.output_dir = value;
    else if (key == "study.year") cfg.study_year = as_int(value);
    else if (key == "study.week_start") cfg.week_start = as_int(value);
    else if (key == "study.week_end") cfg.week_end = as_int(value);
    else if (key == "cloud.max_fraction") cfg.max_cloud = as_double(value);
    else if (key == "threshold.bais2_sweep") {
        std::vector<double> sweep;
        if (!trim(value).empty())
            for (const std::string& tok : split_delimited(value))
                sweep.push_back(as_double(trim(tok)));
        std::sort(sweep.begin(), sweep.end());
        sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
        cfg.bais2_sweep = sweep;
    } else if (key == "threshold.bais2_main") cfg.bais2_main = as_double(value);
    else if (key == "threshold.nbr") cfg.nbr_threshold = as_double(value);
    else if (key == "zones.margin") cfg.zone_margin = as_double(value);
    else if (key == "zones.min_plot_area_m2") cfg.min_plot_area_m2 = as_double(value);
    else if (key == "zones.outlier_cutoff_m") cfg.outlier_cutoff_m = as_double(value);
    else if (key == "survey.plot_area_cap_ha") cfg.plot_area_cap_ha = as_double(value);
    else if (key == "econ.fe_level_eq2") cfg.fe_level_eq2 = value;
    else if (key == "econ.cluster_level") cfg.cluster_level = value;
    else if (key == "projection.ref_lon") cfg.ref_lon = as_double(value);
    else if (key == "projection.ref_lat") cfg.ref_lat = as_double(value);
    else if (key == "jobs") cfg.jobs = as_int(value);
    else if (key == "qa.band") cfg.qa.band = value;
    else if (key == "qa.cloud_bit") cfg.qa.cloud_bit = as_int(value);
    else if (key == "qa.cirrus_bit") cfg.qa.cirrus_bit = as_int(value);
    else if (key == "reflectance.min") cfg.reflectance_min = as_double(value);
    else if (key == "reflectance.max") cfg.reflectance_max = as_double(value);
    else throw ValidationError("config: unknown key '" + key + "'");
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config '" + path.string() + "'");
    PipelineConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::string stripped = line;
        auto hash = stripped.find('#');
        if (hash != std::string::npos) stripped.erase(hash);
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": expected key = value");
        apply_override(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

void save_config(const PipelineConfig& cfg, const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << cfg.canonical_text();
}

int IndicatorTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

void write_indicator_csv(const fs::path& path, const IndicatorTable& table) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "village_id";
    for (const std::string& c : table.columns) f << ',' << c;
    f << '\n';
    for (const auto& row : table.rows) {
        f << row.village_id;
        for (const auto& v : row.values) f << ',' << (v ? format_sig(*v) : "");
        f << '\n';
    }
}

IndicatorTable read_indicator_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open indicator table '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line))
        throw ValidationError("indicator table '" + path.string() + "' is empty");
    auto header = split_delimited(trim(line));
    if (header.empty() || trim(header[0]) != "village_id")
        throw ValidationError("indicator table must start with a village_id column");
    IndicatorTable table;
    for (std::size_t i = 1; i < header.size(); ++i) table.columns.push_back(trim(header[i]));
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_delimited(line);
        if (cells.size() != header.size())
            throw ValidationError("indicator table '" + path.string() +
                                  "': ragged row '" + line + "'");
        IndicatorTable::Row row;
        row.village_id = trim(cells[0]);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            std::string cell = trim(cells[i]);
            if (cell.empty()) {
                row.values.push_back(std::nullopt);
            } else {
                try {
                    row.values.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw ValidationError("indicator table '" + path.string() +
                                          "': unparseable cell '" + cell + "'");
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<fs::path> list_bundles(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ValidationError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "header.json"))
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string PipelineResult::manifest_value(const std::string& key) const {
    for (const auto& [k, v] : manifest)
        if (k == key) return v;
    throw std::out_of_range("manifest key '" + key + "' not found");
}

namespace {

template <typename F>
auto stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::optional<svgplot::FittedLine> fit_line(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    auto line = econ::bivariate_line(x, y);
    if (!line) return std::nullopt;
    return svgplot::FittedLine{line->slope, line->intercept};
}

}  // namespace

int plot_outputs(const IndicatorTable& table, const fs::path& out_dir,
                 const std::string& scatter_x, const std::string& scatter_y) {
    if (table.rows.empty()) throw ValidationError("plot: indicator table is empty");
    fs::create_directories(out_dir);
    int figures = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<double> vals;
        for (const auto& row : table.rows)
            if (row.values[c]) vals.push_back(*row.values[c]);
        svgplot::write_histogram_svg(out_dir / ("hist_" + table.columns[c] + ".svg"),
                                     table.columns[c], vals);
        ++figures;
    }

    int xi = table.column_index(scatter_x);
    int yi = table.column_index(scatter_y);
    if (xi >= 0 && yi >= 0) {
        std::vector<double> xs, ys;
        for (const auto& row : table.rows)
            if (row.values[xi] && row.values[yi]) {
                xs.push_back(*row.values[xi]);
                ys.push_back(*row.values[yi]);
            }
        svgplot::write_scatter_svg(
            out_dir / ("scatter_" + scatter_x + "_vs_" + scatter_y + ".svg"),
            scatter_x + " vs " + scatter_y, scatter_x, scatter_y, xs, ys,
            fit_line(xs, ys));
        ++figures;
    }
    return figures;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    auto wall_start = std::chrono::steady_clock::now();
    cfg.validate();
    if (!fs::exists(cfg.survey))
        throw ValidationError("survey file '" + cfg.survey + "' does not exist");
    if (!fs::is_directory(cfg.scene_dir))
        throw ValidationError("scene directory '" + cfg.scene_dir + "' does not exist");
    for (const std::string& p : {cfg.water_mask, cfg.bufrac, cfg.fire_points})
        if (!p.empty() && !fs::exists(p))
            throw ValidationError("input path '" + p + "' does not exist");

    set_jobs(cfg.jobs);

    PipelineResult result;
    result.output_dir = fs::path(cfg.output_dir);
    auto& manifest = result.manifest;
    manifest.emplace_back("config_digest", cfg.digest());

    fs::path staging = fs::path(cfg.output_dir + ".staging");
    fs::remove_all(staging);
    fs::create_directories(staging);

    try {
        // ---- survey ingest -------------------------------------------------
        survey::LoadResult loaded = stage("survey", [&] { return survey::load_survey(cfg.survey); });
        manifest.emplace_back("stage.survey.rows_read", std::to_string(loaded.rows_read));
        manifest.emplace_back("stage.survey.rows_rejected",
                              std::to_string(loaded.rejected.size()));

        // ---- zones ----------------------------------------------------------
        zones::LocalProjection proj;
        proj.ref_lon = cfg.ref_lon;
        proj.ref_lat = cfg.ref_lat;
        std::set<std::string> excluded_villages;
        std::vector<zones::ZonePolygon> village_zones, plot_zones;
        stage("zones", [&] {
            zones::PlotsByVillage coords;
            std::set<std::string> villages_seen;
            for (const auto& r : loaded.records) {
                villages_seen.insert(r.village_id);
                if (r.has_coordinates()) {
                    auto pts = zones::project_points({{*r.lon, *r.lat}}, proj);
                    coords[r.village_id].push_back(pts[0]);
                }
            }
            int no_coords = 0;
            for (const std::string& v : villages_seen)
                if (!coords.count(v)) {
                    excluded_villages.insert(v);
                    ++no_coords;
                }
            zones::BoxBuildReport report;
            village_zones =
                zones::village_boxes(coords, cfg.zone_margin, cfg.outlier_cutoff_m, &report);
            for (const std::string& v : report.excluded_villages) excluded_villages.insert(v);
            zones::OutlierFilter filtered =
                zones::drop_outlier_plots(coords, cfg.outlier_cutoff_m);
            plot_zones =
                zones::plot_boxes(filtered.retained, cfg.zone_margin, cfg.min_plot_area_m2);

            fs::create_directories(staging / "zones");
            zones::write_zones_csv(staging / "zones" / "village_boxes.csv", village_zones);
            zones::write_zones_csv(staging / "zones" / "plot_boxes.csv", plot_zones);
            zones::write_zone_rings(staging / "zones" / "village_boxes.ring", village_zones);
            zones::write_zone_rings(staging / "zones" / "plot_boxes.ring", plot_zones);

            manifest.emplace_back("stage.zones.villages_surveyed",
                                  std::to_string(villages_seen.size()));
            manifest.emplace_back("stage.zones.villages_excluded_no_coordinates",
                                  std::to_string(no_coords));
            manifest.emplace_back("stage.zones.villages_excluded_outlier",
                                  std::to_string(report.excluded_villages.size()));
            manifest.emplace_back("stage.zones.plots_dropped_outlier",
                                  std::to_string(report.dropped_plots));
            manifest.emplace_back("stage.zones.village_boxes",
                                  std::to_string(village_zones.size()));
            manifest.emplace_back("stage.zones.plot_boxes", std::to_string(plot_zones.size()));
            return 0;
        });

        // ---- survey cleaning -------------------------------------------------
        survey::CleanResult cleaned;
        std::map<std::string, std::optional<double>> shares;
        stage("clean", [&] {
            survey::CleanRules rules;
            rules.plot_area_cap_ha = cfg.plot_area_cap_ha;
            rules.excluded_villages = excluded_villages;
            cleaned = survey::clean(loaded.records, rules);
            survey::write_cleaning_log(staging / "cleaning_log.txt",
                                       static_cast<int>(loaded.records.size()), cleaned);
            survey::write_summary_csv(staging / "table1.csv",
                                      survey::summary_stats(cleaned.records));
            shares = survey::village_burn_share(cleaned.records);
            manifest.emplace_back("stage.clean.dropped_area_outlier",
                                  std::to_string(cleaned.dropped_area_outlier));
            manifest.emplace_back("stage.clean.dropped_excluded_village",
                                  std::to_string(cleaned.dropped_excluded_village));
            manifest.emplace_back("stage.clean.rows_kept",
                                  std::to_string(cleaned.records.size()));
            return 0;
        });

        // ---- scene ingest ----------------------------------------------------
        std::vector<Scene> scenes;
        int scenes_found = 0, out_of_period = 0, dropped_cloud = 0;
        stage("scenes", [&] {
            auto bundles = list_bundles(cfg.scene_dir);
            scenes_found = static_cast<int>(bundles.size());
            if (bundles.empty())
                throw std::runtime_error("no raster bundles under '" + cfg.scene_dir + "'");
            std::int64_t period_start =
                days_from_civil(monday_of_iso_week(cfg.study_year, cfg.week_start));
            std::int64_t period_end =
                days_from_civil(monday_of_iso_week(cfg.study_year, cfg.week_end)) + 6;
            std::vector<Scene> in_period;
            for (const fs::path& b : bundles) {
                Scene s = read_bundle(b);
                std::int64_t day = days_from_civil(s.date);
                if (day < period_start || day > period_end) {
                    ++out_of_period;
                    continue;
                }
                if (!in_period.empty() && !s.grid.same_geometry(in_period.front().grid))
                    throw std::runtime_error("scene '" + b.string() +
                                             "' geometry differs from the stack");
                in_period.push_back(std::move(s));
            }
            if (in_period.empty())
                throw std::runtime_error("no scene falls inside the study period");
            std::vector<Scene> kept = spectral::filter_scenes(in_period, cfg.max_cloud);
            dropped_cloud = static_cast<int>(in_period.size() - kept.size());
            if (kept.empty())
                throw std::runtime_error("every scene exceeds the cloud limit");

            BinaryMask water, urban;
            bool have_water = false, have_urban = false;
            if (!cfg.water_mask.empty()) {
                Scene w = read_bundle(cfg.water_mask);
                if (!w.grid.same_geometry(kept.front().grid))
                    throw std::runtime_error("water mask geometry differs from the scenes");
                water = mask_from_band(w.grid, "water", 0.5f);
                have_water = true;
            }
            if (!cfg.bufrac.empty()) {
                Scene b = read_bundle(cfg.bufrac);
                if (!b.grid.same_geometry(kept.front().grid))
                    throw std::runtime_error("BUFRAC geometry differs from the scenes");
                urban = spectral::build_urban_mask(b.grid);
                have_urban = true;
            }

            const spectral::QaSpec* qa = cfg.qa.band.empty() ? nullptr : &cfg.qa;
            for (Scene& s : kept) {
                Scene coerced = spectral::coerce_reflectance(
                    s, cfg.reflectance_min, cfg.reflectance_max, {cfg.qa.band});
                scenes.push_back(spectral::apply_masks(coerced, qa,
                                                       have_water ? &water : nullptr,
                                                       have_urban ? &urban : nullptr));
            }
            manifest.emplace_back("stage.scenes.found", std::to_string(scenes_found));
            manifest.emplace_back("stage.scenes.out_of_period", std::to_string(out_of_period));
            manifest.emplace_back("stage.scenes.dropped_cloud", std::to_string(dropped_cloud));
            manifest.emplace_back("stage.scenes.kept", std::to_string(scenes.size()));
            return 0;
        });

        // ---- indices -----------------------------------------------------------
        std::vector<Scene> index_scenes;
        stage("indices", [&] {
            for (const Scene& s : scenes) {
                Scene ix;
                ix.grid.width = s.grid.width;
                ix.grid.height = s.grid.height;
                ix.grid.origin_x = s.grid.origin_x;
                ix.grid.origin_y = s.grid.origin_y;
                ix.grid.pixel_size = s.grid.pixel_size;
                ix.grid.epsg = s.grid.epsg;
                ix.date = s.date;
                ix.cloud_fraction = s.cloud_fraction;
                ix.grid.bands.push_back(spectral::compute_nbr(s).grid.bands[0]);
                ix.grid.bands.push_back(spectral::compute_bai(s).grid.bands[0]);
                ix.grid.bands.push_back(spectral::compute_bais2(s).grid.bands[0]);
                index_scenes.push_back(std::move(ix));
            }
            return 0;
        });

        // ---- weekly composites --------------------------------------------------
        std::vector<spectral::WeeklyComposite> composites;
        stage("composite", [&] {
            std::ofstream stats(staging / "index_stats.csv");
            stats << "week,index,min,max,mean,median,n\n";
            for (int week = cfg.week_start; week <= cfg.week_end; ++week) {
                bool any = false;
                for (const Scene& s : index_scenes)
                    if (iso_week(s.date).week == week) any = true;
                if (!any) continue;
                composites.push_back(spectral::weekly_median_composite(index_scenes, week));
                for (const char* ix : {"NBR", "BAI", "BAIS2"}) {
                    spectral::IndexStats st =
                        spectral::index_stats(composites.back().grid, ix);
                    stats << week << ',' << ix << ',' << format_sig(st.min) << ','
                          << format_sig(st.max) << ',' << format_sig(st.mean) << ','
                          << format_sig(st.median) << ',' << st.n << '\n';
                }
            }
            if (composites.empty())
                throw std::runtime_error("no weekly composite could be built");
            manifest.emplace_back("stage.composite.weeks_with_scenes",
                                  std::to_string(composites.size()));
            return 0;
        });

        // ---- burn masks per threshold --------------------------------------------
        std::map<double, BinaryMask> final_masks;
        stage("mask", [&] {
            fs::create_directories(staging / "masks");
            Date mask_date = monday_of_iso_week(cfg.study_year, cfg.week_start);
            for (double t : cfg.bais2_sweep) {
                std::vector<BinaryMask> weekly;
                for (const auto& comp : composites) {
                    burnmask::ThresholdSpec spec{t, cfg.nbr_threshold};
                    weekly.push_back(burnmask::threshold_burn(
                        spectral::index_from_grid(comp.grid, "BAIS2"),
                        spectral::index_from_grid(comp.grid, "NBR"), spec));
                }
                BinaryMask final_mask = burnmask::max_composite(weekly);
                write_bundle(mask_to_scene(final_mask, mask_date),
                             staging / "masks" / ("burn_mask_bais2_" + threshold_label(t)));
                manifest.emplace_back("stage.mask.burned_pixels_bais2_" + threshold_label(t),
                                      std::to_string(final_mask.count(MaskCell::True)));
                final_masks.emplace(t, std::move(final_mask));
            }
            return 0;
        });

        // ---- zonal statistics ------------------------------------------------------
        // column -> village -> fraction
        std::vector<std::pair<std::string, std::map<std::string, std::optional<double>>>>
            remote_columns;
        stage("zonal", [&] {
            int zones_outside = 0;
            auto run_scheme = [&](const std::string& prefix,
                                  const std::vector<zones::ZonePolygon>& zs) {
                for (double t : cfg.bais2_sweep) {
                    std::map<std::string, std::optional<double>> col;
                    const BinaryMask& mask = final_masks.at(t);
                    for (const zones::ZonePolygon& z : zs) {
                        try {
                            col[z.zone_id] = zones::zonal_fraction(mask, z);
                        } catch (const ValidationError&) {
                            col[z.zone_id] = std::nullopt;
                            ++zones_outside;
                        }
                    }
                    remote_columns.emplace_back(prefix + "_bais2_" + threshold_label(t),
                                                std::move(col));
                }
            };
            run_scheme("village", village_zones);
            run_scheme("plot", plot_zones);
            manifest.emplace_back("stage.zonal.zones_village",
                                  std::to_string(village_zones.size()));
            manifest.emplace_back("stage.zonal.zones_plot", std::to_string(plot_zones.size()));
            manifest.emplace_back("stage.zonal.zone_evaluations_outside_raster",
                                  std::to_string(zones_outside));
            return 0;
        });

        // ---- merged village indicator table -------------------------------------------
        IndicatorTable table;
        stage("merge", [&] {
            table.columns.push_back("survey_burn_share");
            for (const auto& [name, col] : remote_columns) table.columns.push_back(name);
            for (const auto& [village, share] : shares) {
                IndicatorTable::Row row;
                row.village_id = village;
                row.values.push_back(share);
                for (const auto& [name, col] : remote_columns) {
                    auto it = col.find(village);
                    row.values.push_back(it == col.end() ? std::nullopt : it->second);
                }
                table.rows.push_back(std::move(row));
            }
            write_indicator_csv(staging / "indicators.csv", table);
            manifest.emplace_back("stage.merge.villages", std::to_string(table.rows.size()));
            return 0;
        });

        // ---- correlations ------------------------------------------------------------
        stage("correlate", [&] {
            std::vector<std::pair<std::string, std::vector<std::optional<double>>>> cols;
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                std::vector<std::optional<double>> v;
                for (const auto& row : table.rows) v.push_back(row.values[c]);
                cols.emplace_back(table.columns[c], std::move(v));
            }
            econ::write_correlation_csv(staging / "correlations.csv",
                                        econ::correlation_matrix(cols));
            return 0;
        });

        // ---- regressions ----------------------------------------------------------------
        stage("regress", [&] {
            econ::RegressionTable t3 =
                econ::regress_eq1(cleaned.records, "village", cfg.cluster_level);
            econ::write_regression_table_csv(staging / "table3.csv", t3);
            manifest.emplace_back("stage.regress.eq1_n_col4",
                                  std::to_string(t3.columns.back().n_obs));
            for (double t : cfg.bais2_sweep) {
                std::string col_name = "plot_bais2_" + threshold_label(t);
                const auto* fractions =
                    [&]() -> const std::map<std::string, std::optional<double>>* {
                    for (const auto& [name, col] : remote_columns)
                        if (name == col_name) return &col;
                    return nullptr;
                }();
                if (!fractions) throw std::runtime_error("missing column " + col_name);
                int dropped = 0;
                econ::RegressionTable t4 = econ::regress_eq2(
                    cleaned.records, *fractions, cfg.fe_level_eq2, cfg.cluster_level, &dropped);
                econ::write_regression_table_csv(
                    staging / ("table4_bais2_" + threshold_label(t) + ".csv"), t4);
                if (t == cfg.bais2_main) {
                    econ::write_regression_table_csv(staging / "table4.csv", t4);
                    manifest.emplace_back("stage.regress.eq2_n_col4",
                                          std::to_string(t4.columns.back().n_obs));
                    manifest.emplace_back("stage.regress.eq2_rows_without_fraction",
                                          std::to_string(dropped));
                }
            }
            return 0;
        });

        // ---- active-fire validation (optional) ----------------------------------------------
        if (!cfg.fire_points.empty()) {
            stage("fire", [&] {
                auto points = burnmask::read_fire_csv(cfg.fire_points, &proj);
                const BinaryMask& main_mask = final_masks.at(cfg.bais2_main);
                BinaryMask urban_for_fire;
                if (!cfg.bufrac.empty()) {
                    Scene b = read_bundle(cfg.bufrac);
                    urban_for_fire = spectral::build_urban_mask(b.grid);
                } else {
                    urban_for_fire = main_mask;
                    std::fill(urban_for_fire.cells.begin(), urban_for_fire.cells.end(),
                              MaskCell::False);
                }
                burnmask::FireFilterResult filtered =
                    burnmask::filter_fire_points(points, urban_for_fire);
                auto squares = burnmask::fire_squares(filtered.kept);
                fs::create_directories(staging / "fire");
                zones::write_zones_csv(staging / "fire" / "fire_squares.csv", squares);
                burnmask::write_overlap_report(staging / "fire" / "overlap_report.txt",
                                               burnmask::overlap_report(main_mask, squares));
                manifest.emplace_back("stage.fire.points_read",
                                      std::to_string(points.size()));
                manifest.emplace_back("stage.fire.points_kept",
                                      std::to_string(filtered.kept.size()));
                manifest.emplace_back("stage.fire.dropped_confidence",
                                      std::to_string(filtered.dropped_confidence));
                manifest.emplace_back("stage.fire.dropped_type",
                                      std::to_string(filtered.dropped_type));
                manifest.emplace_back("stage.fire.dropped_urban",
                                      std::to_string(filtered.dropped_urban));
                manifest.emplace_back("stage.fire.dropped_outside",
                                      std::to_string(filtered.dropped_outside));
                return 0;
            });
        }

        // ---- figures -------------------------------------------------------------------------
        stage("plot", [&] {
            std::string main_label = threshold_label(cfg.bais2_main);
            int figures = plot_outputs(table, staging / "figures",
                                       "village_bais2_" + main_label,
                                       "plot_bais2_" + main_label);
            manifest.emplace_back("stage.plot.figures", std::to_string(figures));
            return 0;
        });

        save_config(cfg, staging / "config_resolved.cfg");
        std::ofstream mf(staging / "manifest.txt");
        for (const auto& [k, v] : manifest) mf << k << '=' << v << '\n';
        mf.close();

        fs::remove_all(result.output_dir);
        fs::rename(staging, result.output_dir);
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();
    return result;
}

}  // namespace agburn::pipeline
