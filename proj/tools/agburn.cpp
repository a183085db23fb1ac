// agburn - crop-residue burning indicators from satellite scenes and survey
// data. Each subcommand runs one pipeline stage on prior-stage files; the
// pipeline subcommand chains them all.

#include <iostream>

#include <CLI11.hpp>

#include "agburn/burnmask.hpp"
#include "agburn/econ.hpp"
#include "agburn/fixture.hpp"
#include "agburn/pipeline.hpp"
#include "agburn/reference.hpp"
#include "agburn/survey.hpp"
#include "agburn/zones.hpp"

namespace fs = std::filesystem;
using namespace agburn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;

struct Args {
    // shared
    int jobs = 0;
    // indices
    std::string scene, out, stats;
    std::vector<std::string> upsample;
    // composite
    std::string scenes_dir;
    int week = 0;
    double max_cloud = 0.20;
    // mask
    std::string composite;
    double bais2 = 0.90, nbr = 0.20;
    bool combine = false;
    std::vector<std::string> inputs;
    // zones
    std::string survey_path, out_dir;
    double ref_lon = 0, ref_lat = 0;
    double margin = 0.20, min_plot_area = 150000.0, outlier_cutoff = 10000.0;
    // zonal
    std::string mask_path, zones_path;
    // survey
    double area_cap = 1000.0;
    std::string exclude_villages;
    // regress / correlate / plot
    std::string indicators, column, fe_eq2 = "district", cluster = "district";
    std::string scatter_x, scatter_y;
    // pipeline
    std::string config_path;
    std::vector<std::string> overrides;
};

Scene merge_upsampled(Scene scene, const std::vector<std::string>& bundles) {
    for (const std::string& b : bundles) {
        Scene coarse = read_bundle(b);
        for (const Band& band : coarse.grid.bands)
            scene.grid.bands.push_back(upsample_nearest(coarse.grid, band.name, scene.grid));
    }
    return scene;
}

int cmd_indices(const Args& a) {
    Scene scene = merge_upsampled(read_bundle(a.scene), a.upsample);
    spectral::IndexRaster nbr = spectral::compute_nbr(scene);
    spectral::IndexRaster bai = spectral::compute_bai(scene);
    spectral::IndexRaster bais2 = spectral::compute_bais2(scene);
    Scene out = scene;
    out.grid.bands.push_back(nbr.grid.bands[0]);
    out.grid.bands.push_back(bai.grid.bands[0]);
    out.grid.bands.push_back(bais2.grid.bands[0]);
    write_bundle(out, a.out);
    if (!a.stats.empty()) {
        std::ofstream f(a.stats);
        f << "index,min,max,mean,median,n\n";
        for (const char* ix : {"NBR", "BAI", "BAIS2"}) {
            spectral::IndexStats st = spectral::index_stats(out.grid, ix);
            f << ix << ',' << format_sig(st.min) << ',' << format_sig(st.max) << ','
              << format_sig(st.mean) << ',' << format_sig(st.median) << ',' << st.n << '\n';
        }
    }
    std::cout << "indices written to " << a.out << "\n";
    return kExitOk;
}

int cmd_composite(const Args& a) {
    std::vector<Scene> stack;
    for (const fs::path& p : pipeline::list_bundles(a.scenes_dir))
        stack.push_back(read_bundle(p));
    stack = spectral::filter_scenes(stack, a.max_cloud);
    spectral::WeeklyComposite comp = spectral::weekly_median_composite(stack, a.week);
    Scene out;
    out.grid = comp.grid;
    out.date = monday_of_iso_week(stack.front().date.year, a.week);
    write_bundle(out, a.out);
    std::cout << "week " << a.week << " composite written to " << a.out << "\n";
    return kExitOk;
}

int cmd_mask(const Args& a) {
    if (a.combine) {
        std::vector<BinaryMask> masks;
        for (const std::string& m : a.inputs) masks.push_back(mask_from_scene(read_bundle(m)));
        if (masks.empty()) throw ValidationError("mask --max needs at least one --input");
        BinaryMask combined = burnmask::max_composite(masks);
        write_bundle(mask_to_scene(combined, read_bundle(a.inputs.front()).date), a.out);
        std::cout << "max composite of " << masks.size() << " masks written to " << a.out
                  << "\n";
        return kExitOk;
    }
    Scene comp = read_bundle(a.composite);
    burnmask::ThresholdSpec spec{a.bais2, a.nbr};
    BinaryMask mask = burnmask::threshold_burn(spectral::index_from_grid(comp.grid, "BAIS2"),
                                               spectral::index_from_grid(comp.grid, "NBR"),
                                               spec);
    write_bundle(mask_to_scene(mask, comp.date), a.out);
    std::cout << "burned cells: " << mask.count(MaskCell::True) << "; mask written to "
              << a.out << "\n";
    return kExitOk;
}

int cmd_zones(const Args& a) {
    survey::LoadResult loaded = survey::load_survey(a.survey_path);
    zones::LocalProjection proj;
    proj.ref_lon = a.ref_lon;
    proj.ref_lat = a.ref_lat;
    zones::PlotsByVillage coords;
    for (const auto& r : loaded.records)
        if (r.has_coordinates())
            coords[r.village_id].push_back(proj.forward(*r.lon, *r.lat));
    if (coords.empty()) throw ValidationError("no survey row carries coordinates");

    zones::BoxBuildReport report;
    auto villages = zones::village_boxes(coords, a.margin, a.outlier_cutoff, &report);
    auto plots = zones::plot_boxes(zones::drop_outlier_plots(coords, a.outlier_cutoff).retained,
                                   a.margin, a.min_plot_area);
    fs::create_directories(a.out_dir);
    zones::write_zones_csv(fs::path(a.out_dir) / "village_boxes.csv", villages);
    zones::write_zones_csv(fs::path(a.out_dir) / "plot_boxes.csv", plots);
    zones::write_zone_rings(fs::path(a.out_dir) / "village_boxes.ring", villages);
    zones::write_zone_rings(fs::path(a.out_dir) / "plot_boxes.ring", plots);
    std::cout << villages.size() << " village boxes, " << plots.size()
              << " plot boxes (mean plot-center distance "
              << format_sig(report.mean_center_distance) << " m, "
              << report.excluded_villages.size() << " villages excluded)\n";
    return kExitOk;
}

int cmd_zonal(const Args& a) {
    BinaryMask mask = mask_from_scene(read_bundle(a.mask_path));
    auto zs = zones::read_zones_csv(a.zones_path);
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write '" + a.out + "'");
    f << "zone_id,kind,burned,valid,fraction\n";
    for (const auto& z : zs) {
        zones::ZonalCounts c = zones::zonal_counts(mask, z);
        f << z.zone_id << ',' << zones::to_string(z.kind) << ',' << c.burned << ','
          << c.valid << ','
          << (c.valid ? format_sig(static_cast<double>(c.burned) / c.valid) : "") << '\n';
    }
    std::cout << zs.size() << " zonal fractions written to " << a.out << "\n";
    return kExitOk;
}

int cmd_survey(const Args& a) {
    survey::LoadResult loaded = survey::load_survey(a.survey_path);
    survey::CleanRules rules;
    rules.plot_area_cap_ha = a.area_cap;
    if (!a.exclude_villages.empty()) {
        std::ifstream f(a.exclude_villages);
        if (!f) throw ValidationError("cannot open '" + a.exclude_villages + "'");
        std::string v;
        while (std::getline(f, v))
            if (!trim(v).empty()) rules.excluded_villages.insert(trim(v));
    }
    survey::CleanResult cleaned = survey::clean(loaded.records, rules);
    fs::create_directories(a.out_dir);
    survey::write_cleaning_log(fs::path(a.out_dir) / "cleaning_log.txt",
                               static_cast<int>(loaded.records.size()), cleaned);
    survey::write_summary_csv(fs::path(a.out_dir) / "table1.csv",
                              survey::summary_stats(cleaned.records));
    auto shares = survey::village_burn_share(cleaned.records);
    std::ofstream f(fs::path(a.out_dir) / "village_burn_share.csv");
    f << "village_id,survey_burn_share\n";
    for (const auto& [v, s] : shares)
        f << v << ',' << (s ? format_sig(*s) : "") << '\n';
    std::cout << loaded.records.size() << " rows loaded, " << loaded.rejected.size()
              << " rejected, " << cleaned.records.size() << " kept\n";
    return kExitOk;
}

int cmd_regress(const Args& a) {
    survey::LoadResult loaded = survey::load_survey(a.survey_path);
    fs::create_directories(a.out_dir);
    econ::RegressionTable t3 = econ::regress_eq1(loaded.records, "village", a.cluster);
    econ::write_regression_table_csv(fs::path(a.out_dir) / "table3.csv", t3);
    std::cout << "eq1: zero_tillage = " << format_sig(t3.columns.back().coef(0)) << " (p "
              << format_sig(t3.columns.back().p(0)) << ", N "
              << t3.columns.back().n_obs << ")\n";
    if (!a.indicators.empty()) {
        pipeline::IndicatorTable table = pipeline::read_indicator_csv(a.indicators);
        int ci = table.column_index(a.column);
        if (ci < 0)
            throw ValidationError("indicator table lacks column '" + a.column + "'");
        std::map<std::string, std::optional<double>> fractions;
        for (const auto& row : table.rows) fractions[row.village_id] = row.values[ci];
        econ::RegressionTable t4 =
            econ::regress_eq2(loaded.records, fractions, a.fe_eq2, a.cluster);
        econ::write_regression_table_csv(fs::path(a.out_dir) / "table4.csv", t4);
        std::cout << "eq2 (" << a.column
                  << "): zero_tillage = " << format_sig(t4.columns.back().coef(0)) << " (p "
                  << format_sig(t4.columns.back().p(0)) << ", N "
                  << t4.columns.back().n_obs << ")\n";
    }
    return kExitOk;
}

int cmd_correlate(const Args& a) {
    pipeline::IndicatorTable table = pipeline::read_indicator_csv(a.indicators);
    std::vector<std::pair<std::string, std::vector<std::optional<double>>>> cols;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<std::optional<double>> v;
        for (const auto& row : table.rows) v.push_back(row.values[c]);
        cols.emplace_back(table.columns[c], std::move(v));
    }
    econ::write_correlation_csv(a.out, econ::correlation_matrix(cols));
    std::cout << "correlation matrix written to " << a.out << "\n";
    return kExitOk;
}

int cmd_plot(const Args& a) {
    pipeline::IndicatorTable table = pipeline::read_indicator_csv(a.indicators);
    std::string x = a.scatter_x, y = a.scatter_y;
    if (x.empty() || y.empty()) {
        // default to the main-threshold pair when present
        x = "village_bais2_0.9";
        y = "plot_bais2_0.9";
    }
    int n = pipeline::plot_outputs(table, a.out_dir, x, y);
    std::cout << n << " figures written to " << a.out_dir << "\n";
    return kExitOk;
}

int cmd_pipeline(const Args& a) {
    pipeline::PipelineConfig cfg = pipeline::load_config(a.config_path);
    for (const std::string& ov : a.overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got '" + ov + "'");
        pipeline::apply_override(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    if (a.jobs > 0) cfg.jobs = a.jobs;
    if (!a.out.empty()) cfg.output_dir = a.out;
    pipeline::PipelineResult result = pipeline::run_pipeline(cfg);
    std::cout << "pipeline finished in " << format_sig(result.wall_seconds, 3)
              << " s; outputs in " << result.output_dir.string() << "\n";
    for (const auto& [k, v] : result.manifest) std::cout << "  " << k << '=' << v << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crop-residue burn indicators from satellite scenes and survey data"};
    app.require_subcommand(1);
    Args a;
    app.add_option("--jobs", a.jobs, "worker cap for parallel kernels (0 = all cores)");

    auto* indices = app.add_subcommand("indices", "add NBR/BAI/BAIS2 bands to a scene");
    indices->add_option("--scene", a.scene, "input bundle")->required();
    indices->add_option("--out", a.out, "output bundle")->required();
    indices->add_option("--upsample", a.upsample,
                        "coarse single-band bundle to resample onto the scene grid");
    indices->add_option("--stats", a.stats, "also write per-index summary statistics");

    auto* composite = app.add_subcommand("composite", "weekly median composite of a scene stack");
    composite->add_option("--scenes", a.scenes_dir, "directory of bundles")->required();
    composite->add_option("--week", a.week, "ISO week number")->required();
    composite->add_option("--out", a.out, "output bundle")->required();
    composite->add_option("--max-cloud", a.max_cloud, "cloud-fraction limit");

    auto* mask = app.add_subcommand("mask", "threshold a composite into a burn mask");
    mask->add_option("--composite", a.composite, "composite bundle with BAIS2 and NBR bands");
    mask->add_option("--bais2", a.bais2, "BAIS2 threshold (burned above)");
    mask->add_option("--nbr", a.nbr, "NBR threshold (burned below)");
    mask->add_flag("--max", a.combine, "combine weekly masks instead of thresholding");
    mask->add_option("--input", a.inputs, "mask bundles for --max");
    mask->add_option("--out", a.out, "output bundle")->required();

    auto* zones_cmd = app.add_subcommand("zones", "build village and plot boxes from a survey");
    zones_cmd->add_option("--survey", a.survey_path, "survey file")->required();
    zones_cmd->add_option("--ref-lon", a.ref_lon, "projection reference longitude")->required();
    zones_cmd->add_option("--ref-lat", a.ref_lat, "projection reference latitude")->required();
    zones_cmd->add_option("--margin", a.margin, "box margin");
    zones_cmd->add_option("--min-plot-area", a.min_plot_area, "plot-box floor, m^2");
    zones_cmd->add_option("--outlier-cutoff", a.outlier_cutoff, "plot distance cutoff, m");
    zones_cmd->add_option("--out-dir", a.out_dir, "output directory")->required();

    auto* zonal = app.add_subcommand("zonal", "burned fraction per zone");
    zonal->add_option("--mask", a.mask_path, "burn-mask bundle")->required();
    zonal->add_option("--zones", a.zones_path, "zones file")->required();
    zonal->add_option("--out", a.out, "output file")->required();

    auto* survey_cmd = app.add_subcommand("survey", "clean a survey and derive indicators");
    survey_cmd->add_option("--in", a.survey_path, "survey file")->required();
    survey_cmd->add_option("--out-dir", a.out_dir, "output directory")->required();
    survey_cmd->add_option("--area-cap", a.area_cap, "plot-area cap, hectares");
    survey_cmd->add_option("--exclude-villages", a.exclude_villages,
                           "file listing village ids to drop");

    auto* regress = app.add_subcommand("regress", "fixed-effects regressions");
    regress->add_option("--survey", a.survey_path, "survey file")->required();
    regress->add_option("--indicators", a.indicators, "village indicator table");
    regress->add_option("--column", a.column, "indicator column for the village-level outcome");
    regress->add_option("--fe-eq2", a.fe_eq2, "fixed-effect level for the remote regression");
    regress->add_option("--cluster", a.cluster, "cluster level");
    regress->add_option("--out-dir", a.out_dir, "output directory")->required();

    auto* correlate = app.add_subcommand("correlate", "pairwise indicator correlations");
    correlate->add_option("--indicators", a.indicators, "village indicator table")->required();
    correlate->add_option("--out", a.out, "output file")->required();

    auto* plot = app.add_subcommand("plot", "indicator histograms and scatter");
    plot->add_option("--indicators", a.indicators, "village indicator table")->required();
    plot->add_option("--out-dir", a.out_dir, "output directory")->required();
    plot->add_option("--scatter-x", a.scatter_x, "x column for the scatter");
    plot->add_option("--scatter-y", a.scatter_y, "y column for the scatter");

    auto* pipe = app.add_subcommand("pipeline", "run the full chain from a config file");
    pipe->add_option("--config", a.config_path, "configuration file")->required();
    pipe->add_option("--set", a.overrides, "override a config key (key=value)");
    pipe->add_option("--out", a.out, "override the output directory");

    for (CLI::App* sc : app.get_subcommands(nullptr))
        sc->add_option("--jobs", a.jobs, "worker cap for parallel kernels (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    set_jobs(a.jobs);
    try {
        if (*indices) return cmd_indices(a);
        if (*composite) return cmd_composite(a);
        if (*mask) return cmd_mask(a);
        if (*zones_cmd) return cmd_zones(a);
        if (*zonal) return cmd_zonal(a);
        if (*survey_cmd) return cmd_survey(a);
        if (*regress) return cmd_regress(a);
        if (*correlate) return cmd_correlate(a);
        if (*plot) return cmd_plot(a);
        if (*pipe) return cmd_pipeline(a);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitValidation;
}
