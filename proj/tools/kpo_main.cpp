// Command-line front end: configs in, CSVs and plain-text reports out.
//
// Subcommands: spectrum | bitflip | sweep | readout-demo | collision-report
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 partial sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "kpo/bitflip.hpp"
#include "kpo/config.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/readout.hpp"
#include "kpo/spectrum.hpp"
#include "kpo/sweep.hpp"

namespace fs = std::filesystem;
using namespace kpo;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    int parallel = 1;
    int dim_override = 0;
    long seed_override = -1;
    bool resume = false;
    bool theta_average = false;
};

EvolutionSpec make_evolution_spec(const RunConfig& cfg, int dim_override) {
    EvolutionSpec es;
    es.params = cfg.kpo1.to_params();
    es.dim = FockDim(dim_override > 0 ? dim_override : cfg.simulation.dim);
    es.initial = coherent_state(es.dim, coherent_amplitude(es.params));
    es.t_end = cfg.simulation.t_end_us * 1e-6;
    es.output_stride = cfg.simulation.output_stride_ns * 1e-9;
    es.rel_tol = cfg.simulation.rel_tol;
    es.abs_tol = cfg.simulation.abs_tol;
    es.ramp = cfg.simulation.ramp;
    es.ramp_duration = cfg.simulation.ramp_duration_us * 1e-6;
    return es;
}

int cmd_spectrum(const RunConfig& cfg, const CommonOpts& opts) {
    const KpoParams params = cfg.kpo1.to_params();
    const FockDim dim(opts.dim_override > 0 ? opts.dim_override
                                            : std::max(cfg.simulation.dim, 40));
    const SpectrumResult spec = diagonalize(build_single_kpo(params, dim));
    const double alpha = coherent_amplitude(params);
    const double e02 = excitation_energy(spec, 0, 2);
    const double two_p = 2.0 * params.pump_amplitude;

    std::printf("KPO1 spectrum (dim %d)\n", dim.n_levels);
    std::printf("coherent-state amplitude alpha = %.3f\n", alpha);
    std::printf("|E_02| / 2p = %.4f\n", std::abs(e02) / two_p);
    std::printf("%-6s %18s %18s\n", "index", "energy/2pi [MHz]", "energy [rad/s]");
    const int n_print = std::min(spec.dim, 12);
    for (int i = 0; i < n_print; ++i)
        std::printf("%-6d %18.4f %18.6e\n", i, to_mhz(spec.energies(i)),
                    spec.energies(i));

    const double cutoff = 2.0 * params.pump_amplitude;
    const double e0 = spec.energies(0);
    int n_conf = 0;
    while (n_conf < spec.dim && std::abs(spec.energies(n_conf) - e0) <= cutoff)
        ++n_conf;
    std::printf("\nexcitation energies E_ij/2pi [MHz] among confined levels:\n");
    for (int i = 0; i < n_conf; ++i)
        for (int j = i + 1; j < n_conf; ++j)
            std::printf("  E_%d%d = %.4f\n", i, j,
                        to_mhz(excitation_energy(spec, i, j)));
    if (cfg.kpo2) {
        const double g = mhz(cfg.coupling.g_mhz);
        std::printf("\navoided-crossing splitting at degeneracy: 2g = %.1f MHz\n",
                    to_mhz(avoided_crossing_splitting(0, 0, g)));
    }

    const fs::path csv = fs::path(opts.out_dir) / "spectrum.csv";
    std::ofstream out(csv);
    out << "index,energy_mhz\n";
    char buf[64];
    for (int i = 0; i < spec.dim; ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.9g\n", i, to_mhz(spec.energies(i)));
        out << buf;
    }
    std::printf("\nwrote %s\n", csv.string().c_str());
    return 0;
}

int cmd_bitflip(const RunConfig& cfg, const CommonOpts& opts) {
    EvolutionSpec es = make_evolution_spec(cfg, opts.dim_override);
    es.drive = cfg.drive_spec();
    auto res = evolve(es, {quadrature_observable(es.dim)}, {"<a+ad>/2"});
    const fs::path trace_csv = fs::path(opts.out_dir) / "bitflip_trace.csv";
    write_timeseries_csv(res.series[0], trace_csv.string());

    const double bin_w = cfg.simulation.sim_bin_width_us * 1e-6;
    const BinnedTrace binned = bin_trace(res.series[0], bin_w);
    const FitResult fit = fit_exponential(binned);
    std::printf("bit-flip time tau = %.3f +/- %.3f us%s\n", fit.tau * 1e6,
                fit.tau_error * 1e6, fit.tau_capped ? " (at reporting cap)" : "");
    std::printf("amplitude A = %.4f, residual rms = %.3e\n", fit.amplitude,
                fit.residual_rms);

    const fs::path fit_csv = fs::path(opts.out_dir) / "bitflip_fit.csv";
    std::ofstream out(fit_csv);
    out << "bin_center_us,mean,fit_value\n";
    char buf[128];
    for (size_t k = 0; k < binned.bin_centers.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n",
                      binned.bin_centers[k] * 1e6, binned.bin_means[k],
                      fit.amplitude * std::exp(-binned.bin_centers[k] / fit.tau));
        out << buf;
    }
    std::printf("wrote %s and %s\n", trace_csv.string().c_str(),
                fit_csv.string().c_str());
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const CommonOpts& opts) {
    SweepSpec spec;
    spec.base = make_evolution_spec(cfg, opts.dim_override);
    for (double d = cfg.sweep.detuning_start_mhz;
         d <= cfg.sweep.detuning_stop_mhz + 1e-9;
         d += cfg.sweep.detuning_step_mhz)
        spec.detunings.push_back(mhz(d));
    for (double p : cfg.sweep.power_list_dbm)
        spec.powers_dbm.push_back(p - cfg.drive.power_correction_db);
    for (double o : cfg.sweep.omega_list_mhz) spec.amplitudes.push_back(mhz(o));
    if (spec.powers_dbm.empty() && spec.amplitudes.empty()) {
        if (cfg.drive.power_dbm)
            spec.powers_dbm.push_back(*cfg.drive.power_dbm -
                                      cfg.drive.power_correction_db);
        else if (cfg.drive.omega_in_mhz)
            spec.amplitudes.push_back(mhz(*cfg.drive.omega_in_mhz));
        else
            throw ConfigError("sweep needs a power axis or a [drive] power", 0);
    }
    spec.input_freq = mhz(cfg.drive.input_frequency_mhz);
    if (opts.theta_average)
        spec.theta_list = {0.0, M_PI / 2, M_PI, 3 * M_PI / 2};
    else
        spec.theta_list = cfg.sweep.theta_list_rad;
    spec.fit_bin_width = cfg.simulation.sim_bin_width_us * 1e-6;
    spec.exclusion_lo = -mhz(cfg.sweep.exclusion_mhz);
    spec.exclusion_hi = mhz(cfg.sweep.exclusion_mhz);

    const fs::path ckpt = fs::path(opts.out_dir) / "sweep.checkpoint";
    if (!opts.resume && fs::exists(ckpt)) fs::remove(ckpt);
    const SweepResult result = run_sweep(spec, opts.parallel, ckpt.string());

    const fs::path csv = fs::path(opts.out_dir) / "sweep.csv";
    write_sweep_csv(result, spec, csv.string());
    std::printf("wrote %s (%zu points)\n", csv.string().c_str(),
                result.points.size());

    for (int j = 0; j < spec.power_count(); ++j) {
        try {
            const auto dips = dip_locator(result, j);
            for (double d : dips)
                std::printf("dip: power index %d, detuning %.2f MHz\n", j,
                            to_mhz(d));
        } catch (const InvalidParams&) {
            // fewer than 3 usable points at this power
        }
    }
    bool any_failed = false, any_ok = false;
    for (const auto& pt : result.points) {
        any_failed = any_failed || pt.status != "ok";
        any_ok = any_ok || pt.status == "ok";
    }
    return any_failed && any_ok ? 4 : 0;
}

int cmd_readout_demo(const RunConfig& cfg, const CommonOpts& opts) {
    const ReadoutSection& rd = cfg.readout;
    const double fs_hz = rd.sample_rate_msps * 1e6;
    const double bin_s = rd.bin_duration_us * 1e-6;
    const uint64_t seed = opts.seed_override >= 0 ? uint64_t(opts.seed_override)
                                                  : rd.seed;
    std::vector<IfChannel> channels;
    for (size_t c = 0; c < rd.if_freqs_mhz.size(); ++c)
        channels.push_back({rd.if_freqs_mhz[c] * 1e6,
                            "KPO" + std::to_string(c + 1)});

    TelegraphSpec tg;
    tg.tau_flip = rd.tau_flip_us * 1e-6;
    tg.amplitude = rd.amplitude;
    tg.t_end = cfg.simulation.t_end_us * 1e-6;
    tg.sample_rate = fs_hz;
    tg.initial_state = 0;

    std::vector<IqRecord> all_records;
    std::vector<double> spectrum_accum;
    const long spectrum_trials = std::min<long>(rd.trials, 32);
    for (long trial = 0; trial < rd.trials; ++trial) {
        std::vector<std::vector<int8_t>> trajs;
        for (size_t c = 0; c < channels.size(); ++c) {
            TelegraphSpec t = tg;
            t.seed = seed * 1000003ULL + uint64_t(trial) * 31ULL + c;
            trajs.push_back(telegraph_trajectory(t));
        }
        const auto wave = synthesize_if_signal(trajs, channels, rd.amplitude,
                                               fs_hz, rd.noise_sigma,
                                               seed ^ (0x9e3779b9ULL * trial),
                                               bin_s);
        if (trial < spectrum_trials) {
            const size_t n_fft = std::min<size_t>(wave.size(), 4096);
            const auto mag = dft_magnitude(
                std::vector<double>(wave.begin(), wave.begin() + n_fft));
            if (spectrum_accum.empty()) spectrum_accum.assign(mag.size(), 0.0);
            for (size_t k = 0; k < mag.size(); ++k) spectrum_accum[k] += mag[k];
        }
        auto recs = demodulate(wave, channels, fs_hz, bin_s, int(trial));
        all_records.insert(all_records.end(), recs.begin(), recs.end());
    }
    align_iq(all_records, int(channels.size()));

    // DFT spectrum CSV
    {
        const fs::path p = fs::path(opts.out_dir) / "readout_spectrum.csv";
        std::ofstream out(p);
        out << "freq_mhz,magnitude\n";
        const size_t n_fft = 4096;
        char buf[64];
        for (size_t k = 0; k < spectrum_accum.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g\n",
                          double(k) * fs_hz / double(n_fft) / 1e6,
                          spectrum_accum[k] / double(spectrum_trials));
            out << buf;
        }
        std::printf("wrote %s\n", p.string().c_str());
    }

    // per-channel IQ histogram CSVs (2-D counts)
    for (size_t c = 0; c < channels.size(); ++c) {
        double max_abs = 1e-12;
        for (const auto& r : all_records)
            if (r.channel == int(c))
                max_abs = std::max({max_abs, std::abs(r.i_val), std::abs(r.q_val)});
        const int nb = 41;
        const double lo = -1.1 * max_abs, hi = 1.1 * max_abs;
        std::vector<long> counts(size_t(nb) * nb, 0);
        for (const auto& r : all_records) {
            if (r.channel != int(c)) continue;
            const int bi = int((r.i_val - lo) / (hi - lo) * nb);
            const int bq = int((r.q_val - lo) / (hi - lo) * nb);
            if (bi >= 0 && bi < nb && bq >= 0 && bq < nb)
                ++counts[size_t(bq) * nb + bi];
        }
        const fs::path p = fs::path(opts.out_dir) /
                           ("readout_iq_hist_ch" + std::to_string(c) + ".csv");
        std::ofstream out(p);
        char buf[128];
        std::snprintf(buf, sizeof buf, "# i_edges=[%.9g,%.9g] q_edges=[%.9g,%.9g] bins=%d\n",
                      lo, hi, lo, hi, nb);
        out << buf << "q_bin,i_bin,count\n";
        for (int bq = 0; bq < nb; ++bq)
            for (int bi = 0; bi < nb; ++bi)
                out << bq << "," << bi << "," << counts[size_t(bq) * nb + bi]
                    << "\n";
        std::printf("wrote %s\n", p.string().c_str());
    }

    if (channels.size() >= 2) {
        const QuadrantStats qs = quadrant_statistics(all_records);
        std::printf("quadrant fractions (N=%ld):\n", qs.trials);
        const char* names[4] = {"++", "+-", "-+", "--"};
        for (int q = 0; q < 4; ++q)
            std::printf("  %s : %.4f +/- %.4f\n", names[q], qs.fraction[q],
                        qs.error[q]);
    }

    // bit-flip time recovered through the analysis chain (channel 0)
    std::vector<BinnedTrace> trials_ch0;
    const int n_bins = int(tg.t_end / bin_s);
    for (long trial = 0; trial < rd.trials; ++trial) {
        BinnedTrace bt;
        bt.bin_width = bin_s;
        for (int b = 0; b < n_bins; ++b) {
            bt.bin_centers.push_back((b + 0.5) * bin_s);
            bt.bin_means.push_back(0);
        }
        trials_ch0.push_back(bt);
    }
    for (const auto& r : all_records)
        if (r.channel == 0 && r.bin < n_bins && r.trial < int(trials_ch0.size()))
            trials_ch0[r.trial].bin_means[r.bin] = r.i_val;
    BinnedTrace folded = sign_folded_mean(trials_ch0);
    if (folded.bin_means.size() > 3) {
        // exclude the conditioning bin from the fit; selecting trials by its
        // sign inflates its mean relative to the later exponential decay
        folded.bin_centers.erase(folded.bin_centers.begin());
        folded.bin_means.erase(folded.bin_means.begin());
        if (!folded.bin_errors.empty())
            folded.bin_errors.erase(folded.bin_errors.begin());
    }
    const FitResult fit = fit_exponential(folded);
    std::printf("recovered flip time tau = %.3f +/- %.3f us (true %.3f us)\n",
                fit.tau * 1e6, fit.tau_error * 1e6, rd.tau_flip_us);
    return 0;
}

int cmd_collision_report(const RunConfig& cfg, const CommonOpts& opts) {
    const TwoKpoParams two = cfg.to_two_kpo();
    const FockDim dim(opts.dim_override > 0 ? opts.dim_override
                                            : std::max(cfg.simulation.dim, 40));
    const CollisionReport report = collision_report(
        two, dim, mhz(cfg.collision.threshold_mhz),
        mhz(cfg.collision.energy_cutoff_mhz),
        cfg.collision.include_ground_doublet);
    std::printf("pump-frequency collision report (Delta_p/2pi = %.3f MHz, "
                "threshold %.3f MHz)\n",
                to_mhz(two.pump_freq_halfdiff), cfg.collision.threshold_mhz);
    std::printf("%-5s %-6s %14s %14s %8s\n", "kpo", "pair", "E_ij [MHz]",
                "margin [MHz]", "flagged");
    for (const auto& e : report.entries)
        std::printf("%-5d (%d,%d) %14.4f %14.4f %8s\n", e.kpo, e.i, e.j,
                    to_mhz(e.e_ij), to_mhz(e.margin), e.flagged ? "YES" : "no");

    const fs::path csv = fs::path(opts.out_dir) / "collision_report.csv";
    std::ofstream out(csv);
    out << "kpo,i,j,e_ij_mhz,margin_mhz,flagged\n";
    char buf[128];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.9g,%.9g,%d\n", e.kpo, e.i,
                      e.j, to_mhz(e.e_ij), to_mhz(e.margin), e.flagged ? 1 : 0);
        out << buf;
    }
    std::printf("wrote %s\n", csv.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kerr parametric oscillator bit-flip simulation toolkit"};
    app.require_subcommand(1);
    CommonOpts opts;

    std::map<std::string, int (*)(const RunConfig&, const CommonOpts&)> handlers;
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc, fn] :
         {std::tuple{"spectrum", "eigenenergies, E_ij table, calibration ratios",
                     &cmd_spectrum},
          std::tuple{"bitflip", "single bit-flip-time evaluation", &cmd_bitflip},
          std::tuple{"sweep", "tau over a (detuning, power) grid", &cmd_sweep},
          std::tuple{"readout-demo",
                     "frequency-multiplexed readout emulation artifacts",
                     &cmd_readout_demo},
          std::tuple{"collision-report",
                     "pump-frequency vs excitation-energy collisions",
                     &cmd_collision_report}}) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opts.config_path, "run configuration file")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--parallel", opts.parallel, "worker thread count");
        sub->add_option("--dim", opts.dim_override, "Fock dimension override");
        sub->add_option("--seed", opts.seed_override, "RNG seed override");
        sub->add_flag("--resume", opts.resume, "resume from checkpoint");
        sub->add_flag("--theta-average", opts.theta_average,
                      "average tau over theta_in in {0, pi/2, pi, 3pi/2}");
        handlers[name] = fn;
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string sub_name = app.get_subcommands().front()->get_name();
    try {
        const RunConfig cfg = RunConfig::parse_file(opts.config_path);
        std::error_code ec;
        fs::create_directories(opts.out_dir, ec);
        return handlers.at(sub_name)(cfg, opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error (line %d): %s\n", e.line, e.what());
        return 2;
    } catch (const InvalidParams& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
