#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "agburn/pipeline.hpp"

namespace agburn::fixture {

// Synthetic desk-scale study area: a village lattice with plot-level survey
// rows, scene bundles carrying planted burn scars, water/urban rasters and
// active-fire points. All reflectance values keep a wide margin from every
// threshold so the expected outcomes are computable exactly up front.
struct FixtureSpec {
    std::uint64_t seed = 20210830;
    int village_cols = 10;  // one zero-tillage gradient per row
    int village_rows = 6;   // one district per row
    int plots_per_village = 15;
    double pixel_size = 40.0;
    int study_year = 2021;
    int week_start = 35;
    int week_end = 47;
    double burn_prob_conventional = 0.40;
    double burn_prob_zero_tillage = 0.05;
    double ref_lon = 75.0;
    double ref_lat = 30.0;
};

struct FixtureTruth {
    int rows = 0;  // survey rows written
    int villages = 0;
    int districts = 0;
    int plots_with_coords = 0;
    int burn_plots = 0;
    int zero_tillage_plots = 0;
    int rows_excluded_village = 0;  // rows of the village lacking coordinates
    int rows_area_outlier = 0;
    int scenes_written = 0;
    int scenes_high_cloud = 0;
    int scenes_out_of_period = 0;
    int weeks_with_scenes = 0;
    // threshold label -> burned cells expected in the final max composite
    std::map<std::string, std::int64_t> burned_pixels;
    std::filesystem::path config_path;
};

FixtureTruth generate(const FixtureSpec& spec, const std::filesystem::path& dir);

// The configuration the generator wrote next to the data.
pipeline::PipelineConfig fixture_config(const FixtureSpec& spec,
                                        const std::filesystem::path& dir);

}  // namespace agburn::fixture
