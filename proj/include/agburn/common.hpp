#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agburn {

// Bad input or configuration the caller can fix; the CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A pipeline stage failed mid-run; the CLI maps this to exit code 3.
struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "': " + what), stage(stage) {}
    std::string stage;
};

// Worker cap for the OpenMP kernels. 0 = OpenMP default. Results are
// bit-identical for any value.
void set_jobs(int n);
int jobs();
int resolved_threads();

std::uint64_t fnv1a64(std::string_view s);

// 6 significant digits, '.' decimal separator; the format used by all
// tabular outputs. "-0" is normalized to "0".
std::string format_sig(double v, int digits = 6);

std::vector<std::string> split_delimited(std::string_view line, char delim = ',');
std::string trim(std::string_view s);

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;
    auto operator<=>(const Date&) const = default;
};

std::int64_t days_from_civil(const Date& d);  // days since 1970-01-01
Date civil_from_days(std::int64_t z);
int iso_weekday(const Date& d);  // Monday = 1 .. Sunday = 7

struct IsoWeek {
    int week_year = 0;
    int week = 0;  // 1..53
};
IsoWeek iso_week(const Date& d);
Date monday_of_iso_week(int week_year, int week);

Date parse_date(std::string_view s);  // "YYYY-MM-DD"
std::string format_date(const Date& d);

// Deterministic RNG for tests and the fixture generator. The std::
// distributions are implementation-defined, so draws are derived from the
// raw engine output directly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);  // inclusive bounds
    bool bernoulli(double p);
    double normal(double mean, double sd);

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace agburn
