#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agburn/common.hpp"

namespace agburn::survey {

// One household's main wheat plot. Missing values stay missing; they are
// never coded as 0.
struct SurveyPlotRecord {
    std::string household_id;
    std::string village_id;
    std::string district_id;
    std::optional<int> hh_size;
    std::optional<int> head_age;
    std::optional<int> head_male;
    std::optional<int> head_secondary_edu;
    std::optional<int> hindu;
    std::optional<int> scheduled_caste;
    std::optional<int> tractor;
    std::optional<double> plot_area;      // hectares
    std::optional<double> plot_distance;  // km
    std::optional<int> plot_owned;
    std::optional<int> esw;
    std::optional<int> fertilizer;
    std::optional<int> outside_labor;
    std::optional<int> tillage_code;  // 1..5
    std::optional<int> residue_code;  // 1..10
    std::optional<double> lon;
    std::optional<double> lat;

    bool has_coordinates() const { return lon.has_value() && lat.has_value(); }
    bool operator==(const SurveyPlotRecord&) const = default;
};

// Exact column set of the survey file, in canonical order.
const std::vector<std::string>& survey_columns();

struct LoadResult {
    std::vector<SurveyPlotRecord> records;
    struct Rejected {
        int line_no = 0;
        std::string reason;
    };
    std::vector<Rejected> rejected;
    int rows_read = 0;
};

// Header must contain exactly the survey columns (any order). Bad cells
// reject the row with a reason; an unknown or missing column fails the load.
LoadResult load_survey(const std::filesystem::path& path);

// 1 for residue codes 3, 4 and 7 (field burning variants), 0 for the other
// valid codes, missing when the code is missing.
std::optional<int> derive_burn(const SurveyPlotRecord& r);

// 1 iff tillage code 4 (zero-tillage equipment).
std::optional<int> derive_zero_tillage(const SurveyPlotRecord& r);

struct CleanRules {
    double plot_area_cap_ha = 1000.0;
    std::set<std::string> excluded_villages;
};

struct CleanResult {
    std::vector<SurveyPlotRecord> records;
    int dropped_area_outlier = 0;
    int dropped_excluded_village = 0;
};

// Pure filter: drops area outliers above the cap and records from villages
// the zones stage excluded; retained records are untouched.
CleanResult clean(const std::vector<SurveyPlotRecord>& records, const CleanRules& rules);

void write_cleaning_log(const std::filesystem::path& path, int rows_in,
                        const CleanResult& result);

// Per village: burned plots / plots with a non-missing burn indicator;
// missing when every plot's indicator is missing.
std::map<std::string, std::optional<double>> village_burn_share(
    const std::vector<SurveyPlotRecord>& records);

struct VariableStats {
    std::string name;
    double mean = 0, min = 0, max = 0, sd = 0;
    int n = 0;
};

// Mean/min/max/sd/N per analysis variable (sample sd, n-1 denominator),
// missing values excluded variable by variable.
std::vector<VariableStats> summary_stats(const std::vector<SurveyPlotRecord>& records);

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<VariableStats>& stats);

}  // namespace agburn::survey
