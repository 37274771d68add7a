#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kpo/spectrum.hpp"
#include "kpo/sweep.hpp"

using namespace kpo;

namespace {

// Small, fast base problem: a damped linear cavity whose quadrature decays
// at a known rate, so every grid point costs milliseconds.
SweepSpec fast_spec() {
    SweepSpec spec;
    spec.base.dim = FockDim(14);
    spec.base.params.kappa_ext = mhz(0.3);
    spec.base.initial = coherent_state(spec.base.dim, 1.5);
    spec.base.t_end = 3e-6;
    spec.base.output_stride = 30e-9;
    spec.detunings = {-mhz(60), -mhz(40), -mhz(20)};
    spec.amplitudes = {0.0, mhz(0.5)};
    spec.fit_bin_width = 0.3e-6;
    return spec;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("spec validation") {
    SweepSpec spec = fast_spec();
    SUBCASE("well-formed passes") { spec.validate(); }
    SUBCASE("empty detuning axis") {
        spec.detunings.clear();
        CHECK_THROWS_AS(spec.validate(), InvalidParams);
    }
    SUBCASE("non-monotone axis") {
        spec.detunings = {mhz(1), mhz(3), mhz(2)};
        CHECK_THROWS_AS(spec.validate(), InvalidParams);
    }
    SUBCASE("both power modes set") {
        spec.powers_dbm = {-132};
        CHECK_THROWS_AS(spec.validate(), InvalidParams);
    }
    SUBCASE("neither power mode set") {
        spec.amplitudes.clear();
        CHECK_THROWS_AS(spec.validate(), InvalidParams);
    }
    SUBCASE("dBm mode needs the input frequency") {
        spec.amplitudes.clear();
        spec.powers_dbm = {-132};
        CHECK_THROWS_AS(spec.validate(), InvalidParams);
        spec.input_freq = mhz(9.90e3);
        spec.validate();
    }
}

TEST_CASE("zero-amplitude point reproduces the drive-off baseline") {
    SweepSpec spec = fast_spec();
    spec.detunings = {-mhz(40)};
    spec.amplitudes = {0.0};
    const SweepResult res = run_sweep(spec, 1);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].status == "ok");

    EvolutionSpec base = spec.base;
    const auto direct =
        evolve(base, {quadrature_observable(base.dim)}, {"x"});
    const FitResult f =
        fit_exponential(bin_trace(direct.series[0], spec.fit_bin_width));
    CHECK(res.points[0].fit.tau == doctest::Approx(f.tau).epsilon(1e-12));
    // analytic decay of the coherence: tau = 2/kappa
    CHECK(f.tau ==
          doctest::Approx(2.0 / spec.base.params.kappa_tot()).epsilon(0.01));
}

TEST_CASE("results are independent of parallelism") {
    const SweepSpec spec = fast_spec();
    const SweepResult r1 = run_sweep(spec, 1);
    const SweepResult r4 = run_sweep(spec, 4);
    REQUIRE(r1.points.size() == r4.points.size());
    for (size_t k = 0; k < r1.points.size(); ++k) {
        CHECK(r1.points[k].fit.tau == r4.points[k].fit.tau);
        CHECK(r1.points[k].status == r4.points[k].status);
    }
    const std::string p1 = "sweep_par1.csv", p4 = "sweep_par4.csv";
    write_sweep_csv(r1, spec, p1);
    write_sweep_csv(r4, spec, p4);
    CHECK(slurp(p1) == slurp(p4));
    std::remove(p1.c_str());
    std::remove(p4.c_str());
}

TEST_CASE("checkpoint resume reproduces the uninterrupted output") {
    const SweepSpec spec = fast_spec();
    const std::string ck = "sweep_test.checkpoint";
    std::remove(ck.c_str());

    const SweepResult full = run_sweep(spec, 2, ck);
    const std::string full_csv = "sweep_full.csv";
    write_sweep_csv(full, spec, full_csv);
    const std::string want = slurp(full_csv);

    // simulate an interrupted run: keep the header and first two records
    {
        std::ifstream in(ck);
        std::string line, kept;
        for (int k = 0; k < 3 && std::getline(in, line); ++k)
            kept += line + "\n";
        in.close();
        std::ofstream out(ck, std::ios::trunc);
        out << kept;
    }
    const SweepResult resumed = run_sweep(spec, 2, ck);
    const std::string res_csv = "sweep_resumed.csv";
    write_sweep_csv(resumed, spec, res_csv);
    CHECK(slurp(res_csv) == want);

    // a stale checkpoint from a different config is ignored
    SweepSpec other = fast_spec();
    other.amplitudes = {0.0, mhz(0.7)};
    const SweepResult fresh = run_sweep(other, 1, ck);
    CHECK(fresh.config_hash != full.config_hash);
    for (const auto& pt : fresh.points) CHECK(pt.status == "ok");

    std::remove(ck.c_str());
    std::remove(full_csv.c_str());
    std::remove(res_csv.c_str());
}

TEST_CASE("dip locator") {
    SweepResult res;
    auto add = [&](double det_mhz, double tau_us) {
        SweepPoint pt;
        pt.detuning_index = int(res.points.size());
        pt.power_index = 0;
        pt.detuning = mhz(det_mhz);
        pt.fit.tau = tau_us * 1e-6;
        pt.status = "ok";
        res.points.push_back(pt);
    };
    SUBCASE("single symmetric minimum is located on the grid point") {
        add(-220, 9);
        add(-204, 3);
        add(-188, 9);
        const auto dips = dip_locator(res, 0);
        REQUIRE(dips.size() == 1);
        CHECK(to_mhz(dips[0]) == doctest::Approx(-204.0).epsilon(1e-6));
    }
    SUBCASE("asymmetric minimum refines off-grid") {
        add(-220, 9);
        add(-204, 3);
        add(-188, 5);
        const auto dips = dip_locator(res, 0);
        REQUIRE(dips.size() == 1);
        // parabola through (9, 3, 5) at 16 MHz spacing: vertex at -200
        CHECK(to_mhz(dips[0]) == doctest::Approx(-200.0).epsilon(1e-9));
    }
    SUBCASE("monotone row has no dip") {
        add(-220, 9);
        add(-204, 7);
        add(-188, 5);
        CHECK(dip_locator(res, 0).empty());
    }
    SUBCASE("too few points") {
        add(-220, 9);
        add(-204, 3);
        CHECK_THROWS_AS((void)dip_locator(res, 0), InvalidParams);
    }
}

TEST_CASE("pump calibration from an observed dip") {
    KpoParams p;
    p.kerr = -mhz(14);
    const FockDim dim(40);
    SUBCASE("round trip through a known pump amplitude") {
        KpoParams known = p;
        known.pump_amplitude = mhz(110);
        const SpectrumResult s = diagonalize(build_single_kpo(known, dim));
        const double e02 = excitation_energy(s, 0, 2);
        const double fitted = calibrate_pump_from_dip(e02, p, dim);
        CHECK(fitted == doctest::Approx(mhz(110)).epsilon(2e-3));
    }
    SUBCASE("the experiment dip maps back to the table pump amplitude") {
        const double fitted = calibrate_pump_from_dip(-mhz(204), p, dim);
        CHECK(to_mhz(fitted) == doctest::Approx(110.0).epsilon(0.02));
    }
    SUBCASE("positive dip rejected") {
        CHECK_THROWS_AS((void)calibrate_pump_from_dip(mhz(204), p, dim),
                        InvalidParams);
    }
}

TEST_CASE("CSV schema and exclusion annotation") {
    SweepSpec spec = fast_spec();
    spec.detunings = {-mhz(40), 0.0, mhz(40)};
    spec.amplitudes = {0.0};
    const SweepResult res = run_sweep(spec, 2);
    const std::string path = "sweep_schema.csv";
    write_sweep_csv(res, spec, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# kpo sweep v1 config_hash=", 0) == 0);
    std::getline(in, line);
    CHECK(line ==
          "detuning_mhz,power_dbm,omega_in_mhz,theta_in_rad,tau_us,tau_err_us,"
          "fit_rms,status");
    int rows = 0, excluded = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.find("[excluded-window]") != std::string::npos) ++excluded;
    }
    CHECK(rows == 3);
    CHECK(excluded == 1);  // only the zero-detuning point sits in the window
    std::remove(path.c_str());
}
