#include "agburn/survey.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

namespace fs = std::filesystem;

namespace agburn::survey {

const std::vector<std::string>& survey_columns() {
    static const std::vector<std::string> cols = {
        "household_id", "village_id",   "district_id",        "hh_size",
        "head_age",     "head_male",    "head_secondary_edu", "hindu",
        "scheduled_caste", "tractor",   "plot_area",          "plot_distance",
        "plot_owned",   "esw",          "fertilizer",         "outside_labor",
        "tillage_code", "residue_code", "lon",                "lat"};
    return cols;
}

namespace {

struct RowError {
    std::string reason;
};

std::optional<int> parse_int_cell(const std::string& cell, const std::string& name,
                                  int lo, int hi) {
    if (cell.empty()) return std::nullopt;
    std::size_t pos = 0;
    int v;
    try {
        v = std::stoi(cell, &pos);
    } catch (const std::exception&) {
        throw RowError{name + ": unparseable integer '" + cell + "'"};
    }
    if (pos != cell.size()) throw RowError{name + ": unparseable integer '" + cell + "'"};
    if (v < lo || v > hi)
        throw RowError{name + ": value " + cell + " outside [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]"};
    return v;
}

std::optional<double> parse_double_cell(const std::string& cell, const std::string& name) {
    if (cell.empty()) return std::nullopt;
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw RowError{name + ": unparseable number '" + cell + "'"};
    }
    if (pos != cell.size() || !std::isfinite(v))
        throw RowError{name + ": unparseable number '" + cell + "'"};
    return v;
}

}  // namespace

LoadResult load_survey(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open survey file '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line))
        throw ValidationError("survey file '" + path.string() + "' is empty");

    auto header = split_delimited(trim(line));
    for (auto& h : header) h = trim(h);
    const auto& expected = survey_columns();
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::find(expected.begin(), expected.end(), header[i]) == expected.end())
            throw ValidationError("survey file: unknown column '" + header[i] + "'");
        if (!index.emplace(header[i], static_cast<int>(i)).second)
            throw ValidationError("survey file: duplicate column '" + header[i] + "'");
    }
    for (const std::string& c : expected)
        if (!index.count(c))
            throw ValidationError("survey file: missing column '" + c + "'");

    LoadResult out;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++out.rows_read;
        auto cells = split_delimited(line);
        if (cells.size() != expected.size()) {
            out.rejected.push_back({line_no, "expected " + std::to_string(expected.size()) +
                                                 " columns, found " +
                                                 std::to_string(cells.size())});
            continue;
        }
        auto cell = [&](const std::string& name) { return trim(cells[index.at(name)]); };
        try {
            SurveyPlotRecord r;
            r.household_id = cell("household_id");
            r.village_id = cell("village_id");
            r.district_id = cell("district_id");
            if (r.household_id.empty() || r.village_id.empty() || r.district_id.empty())
                throw RowError{"identifier columns must be non-empty"};
            r.hh_size = parse_int_cell(cell("hh_size"), "hh_size", 1, 1000);
            r.head_age = parse_int_cell(cell("head_age"), "head_age", 0, 150);
            r.head_male = parse_int_cell(cell("head_male"), "head_male", 0, 1);
            r.head_secondary_edu =
                parse_int_cell(cell("head_secondary_edu"), "head_secondary_edu", 0, 1);
            r.hindu = parse_int_cell(cell("hindu"), "hindu", 0, 1);
            r.scheduled_caste =
                parse_int_cell(cell("scheduled_caste"), "scheduled_caste", 0, 1);
            r.tractor = parse_int_cell(cell("tractor"), "tractor", 0, 1);
            r.plot_area = parse_double_cell(cell("plot_area"), "plot_area");
            if (r.plot_area && !(*r.plot_area > 0.0))
                throw RowError{"plot_area must be positive"};
            r.plot_distance = parse_double_cell(cell("plot_distance"), "plot_distance");
            if (r.plot_distance && *r.plot_distance < 0.0)
                throw RowError{"plot_distance must be non-negative"};
            r.plot_owned = parse_int_cell(cell("plot_owned"), "plot_owned", 0, 1);
            r.esw = parse_int_cell(cell("esw"), "esw", 0, 1);
            r.fertilizer = parse_int_cell(cell("fertilizer"), "fertilizer", 0, 1);
            r.outside_labor = parse_int_cell(cell("outside_labor"), "outside_labor", 0, 1);
            r.tillage_code = parse_int_cell(cell("tillage_code"), "tillage_code", 1, 5);
            r.residue_code = parse_int_cell(cell("residue_code"), "residue_code", 1, 10);
            r.lon = parse_double_cell(cell("lon"), "lon");
            r.lat = parse_double_cell(cell("lat"), "lat");
            out.records.push_back(std::move(r));
        } catch (const RowError& e) {
            out.rejected.push_back({line_no, e.reason});
        }
    }
    return out;
}

std::optional<int> derive_burn(const SurveyPlotRecord& r) {
    if (!r.residue_code) return std::nullopt;
    int c = *r.residue_code;
    return (c == 3 || c == 4 || c == 7) ? 1 : 0;
}

std::optional<int> derive_zero_tillage(const SurveyPlotRecord& r) {
    if (!r.tillage_code) return std::nullopt;
    return *r.tillage_code == 4 ? 1 : 0;
}

CleanResult clean(const std::vector<SurveyPlotRecord>& records, const CleanRules& rules) {
    CleanResult out;
    for (const SurveyPlotRecord& r : records) {
        if (r.plot_area && *r.plot_area > rules.plot_area_cap_ha) {
            ++out.dropped_area_outlier;
            continue;
        }
        if (rules.excluded_villages.count(r.village_id)) {
            ++out.dropped_excluded_village;
            continue;
        }
        out.records.push_back(r);
    }
    return out;
}

void write_cleaning_log(const fs::path& path, int rows_in, const CleanResult& result) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "rows_in=" << rows_in << '\n'
      << "dropped_plot_area_outlier=" << result.dropped_area_outlier << '\n'
      << "dropped_excluded_village=" << result.dropped_excluded_village << '\n'
      << "rows_out=" << result.records.size() << '\n';
}

std::map<std::string, std::optional<double>> village_burn_share(
    const std::vector<SurveyPlotRecord>& records) {
    std::map<std::string, std::pair<int, int>> counts;  // village -> (burned, non-missing)
    for (const SurveyPlotRecord& r : records) {
        auto& [burned, total] = counts[r.village_id];
        auto b = derive_burn(r);
        if (!b) continue;
        ++total;
        burned += *b;
    }
    std::map<std::string, std::optional<double>> out;
    for (const auto& [village, c] : counts) {
        if (c.second == 0)
            out.emplace(village, std::nullopt);
        else
            out.emplace(village, static_cast<double>(c.first) / c.second);
    }
    return out;
}

std::vector<VariableStats> summary_stats(const std::vector<SurveyPlotRecord>& records) {
    using Getter = std::function<std::optional<double>(const SurveyPlotRecord&)>;
    auto opt_int = [](std::optional<int> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return static_cast<double>(*v);
    };
    // Table layout order.
    const std::vector<std::pair<std::string, Getter>> variables = {
        {"hh_size", [&](const auto& r) { return opt_int(r.hh_size); }},
        {"head_age", [&](const auto& r) { return opt_int(r.head_age); }},
        {"head_male", [&](const auto& r) { return opt_int(r.head_male); }},
        {"head_secondary_edu", [&](const auto& r) { return opt_int(r.head_secondary_edu); }},
        {"hindu", [&](const auto& r) { return opt_int(r.hindu); }},
        {"scheduled_caste", [&](const auto& r) { return opt_int(r.scheduled_caste); }},
        {"tractor", [&](const auto& r) { return opt_int(r.tractor); }},
        {"plot_area", [](const auto& r) { return r.plot_area; }},
        {"plot_distance", [](const auto& r) { return r.plot_distance; }},
        {"plot_owned", [&](const auto& r) { return opt_int(r.plot_owned); }},
        {"zero_tillage", [&](const auto& r) { return opt_int(derive_zero_tillage(r)); }},
        {"residue_burning", [&](const auto& r) { return opt_int(derive_burn(r)); }},
        {"esw", [&](const auto& r) { return opt_int(r.esw); }},
        {"fertilizer", [&](const auto& r) { return opt_int(r.fertilizer); }},
        {"outside_labor", [&](const auto& r) { return opt_int(r.outside_labor); }},
    };

    std::vector<VariableStats> out;
    for (const auto& [name, get] : variables) {
        VariableStats s;
        s.name = name;
        double sum = 0.0;
        std::vector<double> vals;
        for (const SurveyPlotRecord& r : records) {
            auto v = get(r);
            if (!v) continue;
            vals.push_back(*v);
            sum += *v;
        }
        s.n = static_cast<int>(vals.size());
        if (!vals.empty()) {
            s.mean = sum / vals.size();
            s.min = *std::min_element(vals.begin(), vals.end());
            s.max = *std::max_element(vals.begin(), vals.end());
            double ss = 0.0;
            for (double v : vals) ss += (v - s.mean) * (v - s.mean);
            s.sd = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
        } else {
            s.mean = s.min = s.max = s.sd = std::nan("");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_summary_csv(const fs::path& path, const std::vector<VariableStats>& stats) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "variable,mean,min,max,sd,n\n";
    for (const VariableStats& s : stats) {
        f << s.name << ',' << format_sig(s.mean) << ',' << format_sig(s.min) << ','
          << format_sig(s.max) << ',' << format_sig(s.sd) << ',' << s.n << '\n';
    }
}

}  // namespace agburn::survey
