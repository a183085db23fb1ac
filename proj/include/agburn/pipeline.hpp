#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agburn/spectral.hpp"

namespace agburn::pipeline {

// Every default mirrors the study parameters; each field can be overridden
// from the config file or command line.
struct PipelineConfig {
    std::string scene_dir;
    std::string water_mask;   // optional single-band bundle ("water")
    std::string bufrac;       // optional single-band bundle ("BUFRAC")
    std::string fire_points;  // optional delimited text file
    std::string survey;
    std::string output_dir;

    int study_year = 2021;
    int week_start = 35;
    int week_end = 47;
    double max_cloud = 0.20;
    std::vector<double> bais2_sweep = {0.85, 0.90, 0.95};
    double bais2_main = 0.90;
    double nbr_threshold = 0.20;
    double zone_margin = 0.20;
    double min_plot_area_m2 = 150000.0;
    double outlier_cutoff_m = 10000.0;
    double plot_area_cap_ha = 1000.0;
    std::string fe_level_eq2 = "district";  // "village" is the alternative
    std::string cluster_level = "district";
    double ref_lon = 0.0;
    double ref_lat = 0.0;
    int jobs = 0;
    spectral::QaSpec qa;
    double reflectance_min = -0.1;
    double reflectance_max = 1.5;

    void validate() const;
    std::string canonical_text() const;  // one sorted key=value per line
    std::string digest() const;          // fnv1a64 of canonical_text, hex
};

// Flat "key = value" lines, '#' comments; nesting via dotted keys.
PipelineConfig load_config(const std::filesystem::path& path);
void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

std::string threshold_label(double t);

struct IndicatorTable {
    std::vector<std::string> columns;  // everything after village_id
    struct Row {
        std::string village_id;
        std::vector<std::optional<double>> values;
    };
    std::vector<Row> rows;

    int column_index(const std::string& name) const;  // -1 when absent
};

void write_indicator_csv(const std::filesystem::path& path, const IndicatorTable& table);
IndicatorTable read_indicator_csv(const std::filesystem::path& path);

struct PipelineResult {
    std::filesystem::path output_dir;
    std::vector<std::pair<std::string, std::string>> manifest;
    // Reported on stdout by the CLI, never written into the output tree, so
    // byte-identical reruns stay byte-identical.
    double wall_seconds = 0.0;

    std::string manifest_value(const std::string& key) const;
};

// Runs the whole chain: survey -> zones -> clean -> scenes -> indices ->
// composites -> masks -> zonal -> merge -> correlate -> regress -> figures,
// staging the output tree and discarding it on failure.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Histogram per indicator column plus the village-vs-plot scatter with a
// fitted line. Returns the number of figure files written.
int plot_outputs(const IndicatorTable& table, const std::filesystem::path& out_dir,
                 const std::string& scatter_x, const std::string& scatter_y);

// Bundle subdirectories (those holding header.json), sorted by name.
std::vector<std::filesystem::path> list_bundles(const std::filesystem::path& dir);

}  // namespace agburn::pipeline
