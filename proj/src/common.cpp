#include "agburn/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agburn {

namespace {
std::atomic<int> g_jobs{0};
}

void set_jobs(int n) { g_jobs.store(n < 0 ? 0 : n); }

int jobs() { return g_jobs.load(); }

int resolved_threads() {
    int j = jobs();
#ifdef _OPENMP
    return j > 0 ? j : omp_get_max_threads();
#else
    return j > 0 ? j : 1;
#endif
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_sig(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) return "0";  // avoid "-0"
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::vector<std::string> split_delimited(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

// Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(const Date& d) {
    std::int64_t y = d.year;
    y -= d.month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (d.month + (d.month > 2 ? -3 : 9)) + 2u) / 5u + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned month = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (month <= 2)), static_cast<int>(month), static_cast<int>(day)};
}

int iso_weekday(const Date& d) {
    std::int64_t z = days_from_civil(d);
    // 1970-01-01 was a Thursday (ISO weekday 4).
    int w = static_cast<int>(((z % 7) + 7) % 7);  // 0 = Thursday
    return (w + 3) % 7 + 1;
}

namespace {
bool iso_long_year(int year) {
    int jan1 = iso_weekday(Date{year, 1, 1});
    int dec31 = iso_weekday(Date{year, 12, 31});
    return jan1 == 4 || dec31 == 4;
}
}  // namespace

IsoWeek iso_week(const Date& d) {
    Date jan1{d.year, 1, 1};
    int ordinal = static_cast<int>(days_from_civil(d) - days_from_civil(jan1)) + 1;
    int week = (ordinal - iso_weekday(d) + 10) / 7;
    if (week < 1) {
        int prev = d.year - 1;
        return IsoWeek{prev, iso_long_year(prev) ? 53 : 52};
    }
    if (week == 53 && !iso_long_year(d.year)) return IsoWeek{d.year + 1, 1};
    return IsoWeek{d.year, week};
}

Date monday_of_iso_week(int week_year, int week) {
    // January 4 always lies in ISO week 1.
    Date jan4{week_year, 1, 4};
    std::int64_t week1_monday = days_from_civil(jan4) - (iso_weekday(jan4) - 1);
    return civil_from_days(week1_monday + static_cast<std::int64_t>(week - 1) * 7);
}

Date parse_date(std::string_view s) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3)
        throw ValidationError("bad date '" + std::string(s) + "', expected YYYY-MM-DD");
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw ValidationError("bad date '" + std::string(s) + "'");
    return Date{y, m, d};
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

double Rng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal(double mean, double sd) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + sd * spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + sd * u * f;
}

}  // namespace agburn
