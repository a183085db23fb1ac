// Serial-reference vs OpenMP-kernel benchmark. Each kernel is timed on the
// same synthetic scene stack and the outputs are compared bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "agburn/burnmask.hpp"
#include "agburn/reference.hpp"
#include "agburn/spectral.hpp"
#include "agburn/zones.hpp"

using namespace agburn;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_call(F&& fn, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

Scene synth_scene(int side, std::uint64_t seed, const Date& date) {
    Rng rng(seed);
    Scene s;
    s.grid.width = side;
    s.grid.height = side;
    s.grid.origin_x = 0;
    s.grid.origin_y = side * 10.0;
    s.grid.pixel_size = 10.0;
    s.grid.epsg = 32643;
    s.date = date;
    s.cloud_fraction = 0.05;
    for (const char* name : {spectral::kNir, spectral::kSwir, spectral::kSwir2,
                             spectral::kRed}) {
        Band b;
        b.name = name;
        b.pixel_size = 10.0;
        b.values.resize(s.grid.cell_count());
        for (float& v : b.values) {
            v = static_cast<float>(rng.uniform(0.0, 1.2));
            if (rng.bernoulli(0.02)) v = b.nodata;
        }
        s.grid.bands.push_back(std::move(b));
    }
    return s;
}

bool same_values(const spectral::IndexRaster& a, const spectral::IndexRaster& b) {
    const auto& va = a.values().values;
    const auto& vb = b.values().values;
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        // bitwise: nodata and payload alike
        if (std::memcmp(&va[i], &vb[i], sizeof(float)) != 0) return false;
    }
    return true;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-24s serial %8.1f ms   parallel %8.1f ms   speedup %5.2fx   %s\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int side = 2048;
    if (argc > 1) side = std::atoi(argv[1]);
    if (argc > 2) set_jobs(std::atoi(argv[2]));
    std::printf("grid %dx%d, threads %d\n", side, side, resolved_threads());

    std::vector<Scene> week;
    for (int i = 0; i < 6; ++i)
        week.push_back(synth_scene(side, 1000 + i, Date{2021, 9, 6 + i}));

    {
        spectral::IndexRaster par, ser;
        double tp = time_call([&] { par = spectral::compute_bais2(week[0]); });
        double ts = time_call([&] { ser = reference::compute_bais2(week[0]); });
        report("bais2", ts, tp, same_values(par, ser));
    }
    {
        spectral::IndexRaster par, ser;
        double tp = time_call([&] { par = spectral::compute_nbr(week[0]); });
        double ts = time_call([&] { ser = reference::compute_nbr(week[0]); });
        report("nbr", ts, tp, same_values(par, ser));
    }
    {
        spectral::WeeklyComposite par, ser;
        int wk = iso_week(week[0].date).week;
        double tp = time_call([&] { par = spectral::weekly_median_composite(week, wk); });
        double ts = time_call([&] { ser = reference::weekly_median_composite(week, wk); });
        bool ok = true;
        for (std::size_t b = 0; b < par.grid.bands.size() && ok; ++b)
            ok = std::memcmp(par.grid.bands[b].values.data(), ser.grid.bands[b].values.data(),
                             par.grid.bands[b].values.size() * sizeof(float)) == 0;
        report("weekly_median", ts, tp, ok);
    }

    spectral::IndexRaster bais2 = spectral::compute_bais2(week[0]);
    spectral::IndexRaster nbr = spectral::compute_nbr(week[0]);
    burnmask::ThresholdSpec spec;
    BinaryMask mask_par, mask_ser;
    {
        double tp = time_call([&] { mask_par = burnmask::threshold_burn(bais2, nbr, spec); });
        double ts = time_call([&] { mask_ser = reference::threshold_burn(bais2, nbr, spec); });
        report("threshold_burn", ts, tp, mask_par.cells == mask_ser.cells);
    }
    {
        std::vector<BinaryMask> weeks(8, mask_par);
        BinaryMask par, ser;
        double tp = time_call([&] { par = burnmask::max_composite(weeks); });
        double ts = time_call([&] { ser = reference::max_composite(weeks); });
        report("max_composite", ts, tp, par.cells == ser.cells);
    }
    {
        zones::ZonePolygon zone{"z", zones::ZoneKind::VillageBox, side * 1.0,
                                side * 2.0, side * 9.0, side * 8.0};
        zones::ZonalCounts par{}, ser{};
        double tp = time_call([&] { par = zones::zonal_counts(mask_par, zone); });
        double ts = time_call([&] { ser = reference::zonal_counts(mask_par, zone); });
        report("zonal_counts", ts, tp,
               par.burned == ser.burned && par.valid == ser.valid);
    }
    return 0;
}
