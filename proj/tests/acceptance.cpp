// End-to-end acceptance checks against the published operating point.
// Each criterion prints exactly one PASS/FAIL line; the exit code is the
// number of failures. Criteria 2-5 run full 20 us master-equation
// evolutions at dim 40 and take a few minutes each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "kpo/bitflip.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/readout.hpp"
#include "kpo/spectrum.hpp"
#include "kpo/sweep.hpp"

using namespace kpo;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %-22s %s\n", pass ? "PASS" : "FAIL", idx,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

KpoParams table1() {
    KpoParams p;
    p.resonance_freq = mhz(9.90e3);
    p.pump_freq = 2.0 * p.resonance_freq;
    p.kerr = -mhz(14);
    p.pump_amplitude = mhz(110);
    p.kappa_ext = mhz(0.72);
    p.dephasing = mhz(9.1e-3);
    p.kappa_int = kappa_int_from_budget(mhz(1.9), p.kappa_ext, p.dephasing);
    return p;
}

EvolutionSpec baseline_spec() {
    EvolutionSpec spec;
    spec.params = table1();
    spec.dim = FockDim(40);
    spec.initial = coherent_state(spec.dim, coherent_amplitude(spec.params));
    spec.t_end = 20e-6;
    spec.output_stride = 10e-9;
    return spec;
}

FitResult run_and_fit(const EvolutionSpec& spec, double bin_width = 1e-6) {
    const auto res =
        evolve(spec, {quadrature_observable(spec.dim)}, {"<a+ad>/2"});
    return fit_exponential(bin_trace(res.series[0], bin_width));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// ---- criterion 1: spectrum calibration ----------------------------------
void criterion_spectrum() {
    const auto t0 = std::chrono::steady_clock::now();
    const KpoParams p = table1();
    const SpectrumResult s = diagonalize(build_single_kpo(p, FockDim(40)));
    const double e02 = excitation_energy(s, 0, 2);
    const double ratio = std::abs(e02) / (2.0 * p.pump_amplitude);
    const double dt = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "E_02/2pi = %.2f MHz, |E_02|/2p = %.3f (%.2f s)",
                  to_mhz(e02), ratio, dt);
    const bool pass = std::abs(to_mhz(e02) + 204.0) <= 0.05 * 204.0 &&
                      ratio >= 0.85 && ratio <= 1.0 && dt < 1.0;
    report(1, "spectrum", pass, buf);
}

// ---- criterion 2: drive-off baseline ------------------------------------
double criterion_baseline() {
    const FitResult f = run_and_fit(baseline_spec());
    char buf[160];
    std::snprintf(buf, sizeof buf, "tau = %.3f us (target 9.4 +- 15%%)",
                  f.tau * 1e6);
    const bool pass = std::abs(f.tau - 9.4e-6) <= 0.15 * 9.4e-6;
    report(2, "baseline bit-flip", pass, buf);
    return f.tau;
}

// ---- criteria 3 + 4: resonant dip and power monotonicity ----------------
void criterion_drive(double baseline_tau) {
    SweepSpec spec;
    spec.base = baseline_spec();
    spec.detunings = {-mhz(204)};
    spec.powers_dbm = {-142, -138, -134, -132, -130, -126};
    spec.input_freq = mhz(9.90e3);
    spec.fit_bin_width = 1e-6;
    const SweepResult res = run_sweep(spec, 1);

    double tau_132 = 0;
    std::vector<double> taus;
    for (const auto& pt : res.points) {
        taus.push_back(pt.status == "ok" ? pt.fit.tau : -1.0);
        if (pt.power_dbm == -132.0) tau_132 = pt.fit.tau;
    }
    {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "tau(-204 MHz, -132 dBm) = %.3f us vs baseline %.3f us",
                      tau_132 * 1e6, baseline_tau * 1e6);
        report(3, "resonant dip", tau_132 > 0 && tau_132 <= baseline_tau / 3.0,
               buf);
    }
    {
        bool monotone = true;
        std::string detail = "tau(us) by power:";
        for (size_t k = 0; k < taus.size(); ++k) {
            if (spec.powers_dbm[k] == -132.0) continue;  // dip-check point
            char num[32];
            std::snprintf(num, sizeof num, " %.3f", taus[k] * 1e6);
            detail += num;
        }
        double prev = -1.0;
        for (size_t k = 0; k < taus.size(); ++k) {
            if (spec.powers_dbm[k] == -132.0) continue;
            if (taus[k] < 0) monotone = false;
            if (prev >= 0 && taus[k] > prev * 1.0001) monotone = false;
            prev = taus[k];
        }
        report(4, "power monotonicity", monotone, detail);
    }
}

// ---- criterion 5: theta asymmetry at zero detuning ----------------------
void criterion_theta() {
    double tau[2] = {0, 0};
    const double theta[2] = {0.0, M_PI};
    for (int k = 0; k < 2; ++k) {
        EvolutionSpec spec = baseline_spec();
        DriveSpec d;
        d.amplitude = mhz(3.0);
        d.detuning = 0.0;
        d.phase = theta[k];
        spec.drive = d;
        tau[k] = run_and_fit(spec).tau;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "tau(0) = %.2f us (want 15 +- 20%%), tau(pi) = %.2f us "
                  "(want 10 +- 20%%)",
                  tau[0] * 1e6, tau[1] * 1e6);
    const bool pass = std::abs(tau[0] - 15e-6) <= 0.2 * 15e-6 &&
                      std::abs(tau[1] - 10e-6) <= 0.2 * 10e-6;
    report(5, "theta asymmetry", pass, buf);
}

// ---- criterion 6: fast property suite -----------------------------------
void criterion_properties() {
    std::string why;
    bool pass = true;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) {
            pass = false;
            if (!why.empty()) why += "; ";
            why += what;
        }
    };
    try {
        // parity commutation of the undriven Hamiltonian
        const KpoParams p = table1();
        const FockDim dim(40);
        const OperatorMatrix h = build_single_kpo(p, dim);
        const OperatorMatrix par = parity_operator(dim);
        expect((h * par - par * h).norm() < 1e-10 * h.norm(),
               "parity commutation");

        // effective-coupling <-> driven-builder identity
        TwoKpoParams two;
        two.kpo1 = p;
        two.coupling = mhz(3.0);
        two.pump_freq_halfdiff = -mhz(204);
        DriveSpec d;
        d.amplitude = mhz(6.0);
        d.detuning = two.pump_freq_halfdiff;
        const OperatorMatrix lhs =
            build_effective_from_coupling(two, 2.0, 0.4e-6, FockDim(24));
        const OperatorMatrix rhs =
            build_input_driven(two.kpo1, d, 0.4e-6, FockDim(24));
        expect((lhs - rhs).cwiseAbs().maxCoeff() <
                   1e-14 * rhs.cwiseAbs().maxCoeff(),
               "drive identity");

        // analytic damped-cavity oracle at dim 20
        EvolutionSpec cav;
        cav.dim = FockDim(20);
        cav.params.kappa_ext = mhz(1.9) - 2.0 * mhz(0.05);
        cav.params.dephasing = mhz(0.05);
        cav.initial = coherent_state(cav.dim, 2.0);
        cav.t_end = 1e-6;
        cav.output_stride = 10e-9;
        cav.rel_tol = 1e-10;
        cav.abs_tol = 1e-14;
        const auto res = evolve(cav, {annihilation(cav.dim)}, {"a"});
        const double rate = 0.5 * cav.params.kappa_tot() + cav.params.dephasing;
        double worst = 0;
        for (size_t k = 0; k < res.series[0].times.size(); ++k) {
            const Complex want =
                2.0 * std::exp(-rate * res.series[0].times[k]);
            worst = std::max(worst, std::abs(res.series[0].values[k] - want) /
                                        std::abs(want));
        }
        expect(worst < 1e-6, "damped-cavity oracle");

        // density-matrix invariants on a short pumped evolution
        EvolutionSpec pump = baseline_spec();
        pump.t_end = 0.2e-6;
        pump.output_stride = 0.1e-6;
        const auto pres = evolve(pump, {}, {});
        const DensityCheck c = check_density(pres.final_rho);
        expect(c.hermiticity < 1e-10 && c.trace_error < 1e-8 &&
                   c.min_eigenvalue > -1e-6,
               "density invariants");

        // truncation convergence of the excitation spectrum proxy used by
        // the sweep: E_02 and the short-horizon quadrature, dims 40 -> 50
        EvolutionSpec conv = baseline_spec();
        conv.t_end = 0.5e-6;
        conv.output_stride = 10e-9;
        const auto cc = convergence_check(conv, {40, 50});
        expect(cc.max_relative_change[0] < 0.02, "truncation convergence");

        // noiseless exponential-fit round trip
        TimeSeries s;
        for (int k = 0; k <= 2000; ++k) {
            s.times.push_back(k * 10e-9);
            s.values.push_back(std::exp(-s.times.back() / 9.4e-6));
        }
        const FitResult f = fit_exponential(bin_trace(s, 1e-6));
        expect(std::abs(f.tau - 9.4e-6) / 9.4e-6 < 1e-6, "fit round trip");
    } catch (const std::exception& e) {
        pass = false;
        why = std::string("exception: ") + e.what();
    }
    report(6, "property suite", pass, pass ? "all properties hold" : why);
}

// ---- criterion 7: readout chain round trip ------------------------------
void criterion_readout() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
        const double tau = 5e-6, fs = 250e6, bin = 2e-6;
        const std::vector<IfChannel> channels = {{1e6, "kpo1"}, {31e6, "kpo2"}};

        // tau round trip at 1e4 trials through both IF channels
        std::vector<BinnedTrace> trials;
        TelegraphSpec tspec;
        tspec.tau_flip = tau;
        tspec.t_end = 20e-6;
        tspec.sample_rate = fs;
        tspec.initial_state = 0;
        for (int t = 0; t < 10000; ++t) {
            tspec.seed = 1000003ULL * 1 + 31ULL * t;
            const auto tr1 = telegraph_trajectory(tspec);
            tspec.seed = 1000003ULL * 2 + 31ULL * t;
            const auto tr2 = telegraph_trajectory(tspec);
            const auto wave = synthesize_if_signal({tr1, tr2}, channels, 1.0,
                                                   fs, 0.25, 7000 + t, bin);
            auto recs = demodulate(wave, channels, fs, bin, t);
            BinnedTrace b;
            b.bin_width = bin;
            for (const auto& r : recs)
                if (r.channel == 0) {
                    b.bin_centers.push_back((r.bin + 0.5) * bin);
                    b.bin_means.push_back(r.i_val);
                }
            trials.push_back(std::move(b));
        }
        BinnedTrace folded = sign_folded_mean(trials);
        // drop the conditioning bin: selecting on its sign inflates its
        // mean relative to the exponential the later bins follow
        folded.bin_centers.erase(folded.bin_centers.begin());
        folded.bin_means.erase(folded.bin_means.begin());
        folded.bin_errors.erase(folded.bin_errors.begin());
        const FitResult f = fit_exponential(folded);
        const double tau_err = std::abs(f.tau - tau);
        const bool tau_ok = tau_err < 3.0 * f.tau_error + 0.02 * tau;

        // quadrant fractions of independent channels at 1e5 trials; only
        // the first bin matters, so trajectories stop after one bin
        std::vector<IqRecord> qrecs;
        TelegraphSpec qspec = tspec;
        qspec.t_end = bin;
        for (int t = 0; t < 100000; ++t) {
            qspec.seed = 1000003ULL * 5 + 31ULL * t;
            const auto tr1 = telegraph_trajectory(qspec);
            qspec.seed = 1000003ULL * 6 + 31ULL * t;
            const auto tr2 = telegraph_trajectory(qspec);
            const auto wave = synthesize_if_signal({tr1, tr2}, channels, 1.0,
                                                   fs, 0.25, 90000 + t, bin);
            for (auto& r : demodulate(wave, channels, fs, bin, t))
                qrecs.push_back(r);
        }
        const QuadrantStats q = quadrant_statistics(qrecs);
        bool quad_ok = true;
        for (int k = 0; k < 4; ++k)
            if (std::abs(q.fraction[k] - 0.25) > 3.0 * q.error[k])
                quad_ok = false;

        const double dt = seconds_since(t0);
        char buf[240];
        std::snprintf(buf, sizeof buf,
                      "tau = %.3f +- %.3f us; quadrants %.3f/%.3f/%.3f/%.3f "
                      "(%.1f s)",
                      f.tau * 1e6, f.tau_error * 1e6, q.fraction[0],
                      q.fraction[1], q.fraction[2], q.fraction[3], dt);
        detail = buf;
        pass = tau_ok && quad_ok && dt < 60.0;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(7, "readout round trip", pass, detail);
}

// ---- criterion 8: pump-frequency collision report -----------------------
void criterion_collisions() {
    const auto t0 = std::chrono::steady_clock::now();
    // rotating-frame parameters only; Delta_p is set directly below, so the
    // absolute pump frequencies stay unspecified
    TwoKpoParams two;
    two.kpo1.kerr = -mhz(14);
    two.kpo1.pump_amplitude = mhz(140);
    two.kpo2.kerr = -mhz(15);
    two.kpo2.pump_amplitude = mhz(140);
    two.coupling = mhz(3.0);

    two.pump_freq_halfdiff = 0;
    const CollisionReport clean = collision_report(two, FockDim(40), mhz(1));
    int clean_flags = 0;
    for (const auto& e : clean.entries) clean_flags += e.flagged;

    const SpectrumResult s1 =
        diagonalize(build_single_kpo(two.kpo1, FockDim(40)));
    two.pump_freq_halfdiff = excitation_energy(s1, 0, 2);
    const CollisionReport hit = collision_report(two, FockDim(40), mhz(1));
    int hit_flags = 0;
    bool hit_is_02 = false;
    for (const auto& e : hit.entries)
        if (e.flagged) {
            ++hit_flags;
            hit_is_02 = e.kpo == 1 && e.i == 0 && e.j == 2;
        }
    const double dt = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "aligned pumps: %d flags; offset at E_02: %d flag(s) "
                  "on (0,2)=%s (%.2f s)",
                  clean_flags, hit_flags, hit_is_02 ? "yes" : "no", dt);
    report(8, "collision report",
           clean_flags == 0 && hit_flags == 1 && hit_is_02 && dt < 1.0, buf);
}

}  // namespace

int main() {
    criterion_spectrum();
    criterion_properties();
    criterion_collisions();
    criterion_readout();
    const double baseline = criterion_baseline();
    criterion_drive(baseline);
    criterion_theta();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
