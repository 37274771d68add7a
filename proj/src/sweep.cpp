#include "kpo/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "kpo/spectrum.hpp"

namespace kpo {

namespace {

uint64_t fnv1a(uint64_t h, const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t hash_double(uint64_t h, double v) { return fnv1a(h, &v, sizeof v); }

bool strictly_monotone(const std::vector<double>& v) {
    if (v.empty()) return false;
    bool inc = true, dec = true;
    for (size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    return inc || dec;
}

}  // namespace

void SweepSpec::validate() const {
    base.params.validate();
    if (!strictly_monotone(detunings))
        throw InvalidParams("detuning axis must be nonempty and strictly monotone");
    if (powers_dbm.empty() == amplitudes.empty())
        throw InvalidParams("exactly one of powers_dbm / amplitudes must be set");
    if (!powers_dbm.empty()) {
        if (!strictly_monotone(powers_dbm))
            throw InvalidParams("power axis must be strictly monotone");
        if (input_freq <= 0)
            throw InvalidParams("dBm power mode requires input_freq > 0");
        if (base.params.kappa_ext <= 0)
            throw InvalidParams("dBm power mode requires kappa_ext > 0");
    } else if (!strictly_monotone(amplitudes)) {
        throw InvalidParams("amplitude axis must be strictly monotone");
    }
    if (theta_list.empty()) throw InvalidParams("theta list must be nonempty");
    if (fit_bin_width <= 0) throw InvalidParams("fit bin width must be > 0");
}

uint64_t sweep_config_hash(const SweepSpec& spec) {
    uint64_t h = 1469598103934665603ULL;
    const KpoParams& p = spec.base.params;
    for (double v : {p.pump_detuning, p.kerr, p.pump_amplitude, p.kappa_ext,
                     p.kappa_int, p.dephasing, spec.base.t_end,
                     spec.base.output_stride, spec.base.rel_tol, spec.base.abs_tol,
                     double(spec.base.dim.n_levels), spec.fit_bin_width,
                     spec.input_freq})
        h = hash_double(h, v);
    for (double v : spec.detunings) h = hash_double(h, v);
    for (double v : spec.powers_dbm) h = hash_double(h, v);
    for (double v : spec.amplitudes) h = hash_double(h, v);
    for (double v : spec.theta_list) h = hash_double(h, v);
    return h;
}

namespace {

void evaluate_point(const SweepSpec& spec, SweepPoint& pt) {
    try {
        double tau_sum = 0, err_sq = 0, amp_sum = 0, rms_sum = 0;
        bool capped = false;
        for (double theta : spec.theta_list) {
            EvolutionSpec es = spec.base;
            DriveSpec drive;
            drive.amplitude = pt.omega_in;
            drive.detuning = pt.detuning;
            drive.phase = theta;
            es.drive = drive;
            auto res = evolve(es, {quadrature_observable(es.dim)}, {"<a+ad>/2"});
            FitResult fit =
                fit_exponential(bin_trace(res.series[0], spec.fit_bin_width));
            tau_sum += fit.tau;
            err_sq += fit.tau_error * fit.tau_error;
            amp_sum += fit.amplitude;
            rms_sum += fit.residual_rms;
            capped = capped || fit.tau_capped;
        }
        const double n = double(spec.theta_list.size());
        pt.fit.tau = tau_sum / n;
        pt.fit.tau_error = std::sqrt(err_sq) / n;
        pt.fit.amplitude = amp_sum / n;
        pt.fit.residual_rms = rms_sum / n;
        pt.fit.tau_capped = capped;
        pt.status = "ok";
    } catch (const std::exception& e) {
        pt.status = std::string("failed: ") + e.what();
    }
}

struct Checkpoint {
    std::map<int, SweepPoint> done;

    static Checkpoint load(const std::string& path, uint64_t hash) {
        Checkpoint cp;
        std::ifstream in(path);
        if (!in) return cp;
        std::string header;
        std::getline(in, header);
        std::ostringstream want;
        want << "kposweep-checkpoint v1 " << hash;
        if (header != want.str()) return cp;  // different config; start over
        std::string line;
        while (std::getline(in, line)) {
            std::istringstream is(line);
            SweepPoint pt;
            int idx, capped;
            if (!(is >> idx >> pt.fit.tau >> pt.fit.tau_error >> pt.fit.amplitude
                     >> pt.fit.residual_rms >> capped))
                continue;  // truncated record from an interrupted write
            pt.fit.tau_capped = capped != 0;
            std::getline(is, pt.status);
            if (!pt.status.empty() && pt.status.front() == ' ')
                pt.status.erase(0, 1);
            if (pt.status.empty()) pt.status = "ok";
            cp.done[idx] = pt;
        }
        return cp;
    }
};

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, int parallelism,
                      const std::string& checkpoint_path) {
    spec.validate();
    if (parallelism < 1) throw InvalidParams("parallelism must be >= 1");

    SweepResult result;
    result.config_hash = sweep_config_hash(spec);
    const int np = spec.power_count();
    const int nd = int(spec.detunings.size());
    result.points.resize(size_t(nd) * np);
    for (int i = 0; i < nd; ++i)
        for (int j = 0; j < np; ++j) {
            SweepPoint& pt = result.points[size_t(i) * np + j];
            pt.detuning_index = i;
            pt.power_index = j;
            pt.detuning = spec.detunings[i];
            if (!spec.powers_dbm.empty()) {
                pt.power_dbm = spec.powers_dbm[j];
                pt.omega_in = input_power_to_amplitude(
                    pt.power_dbm, spec.base.params.kappa_ext, spec.input_freq);
            } else {
                pt.power_dbm = std::nan("");
                pt.omega_in = spec.amplitudes[j];
            }
            pt.theta = spec.theta_list.front();
            pt.excluded_window = pt.detuning > spec.exclusion_lo &&
                                 pt.detuning < spec.exclusion_hi;
            pt.status = "pending";
        }

    Checkpoint cp;
    if (!checkpoint_path.empty())
        cp = Checkpoint::load(checkpoint_path, result.config_hash);
    for (auto& [idx, done_pt] : cp.done)
        if (idx >= 0 && idx < int(result.points.size())) {
            result.points[idx].fit = done_pt.fit;
            result.points[idx].status = done_pt.status;
        }

    std::ofstream ck;
    std::mutex ck_mutex;
    if (!checkpoint_path.empty()) {
        const bool fresh = cp.done.empty();
        ck.open(checkpoint_path, fresh ? std::ios::trunc : std::ios::app);
        if (fresh)
            ck << "kposweep-checkpoint v1 " << result.config_hash << "\n";
    }

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t idx = next.fetch_add(1);
            if (idx >= result.points.size()) return;
            SweepPoint& pt = result.points[idx];
            if (pt.status != "pending") continue;  // restored from checkpoint
            evaluate_point(spec, pt);
            if (ck.is_open()) {
                std::lock_guard<std::mutex> lock(ck_mutex);
                char buf[256];
                std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g %.17g %d ",
                              idx, pt.fit.tau, pt.fit.tau_error,
                              pt.fit.amplitude, pt.fit.residual_rms,
                              pt.fit.tau_capped ? 1 : 0);
                ck << buf << pt.status << "\n" << std::flush;
            }
        }
    };
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int k = 0; k < parallelism; ++k) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    bool any_ok = false;
    for (const auto& pt : result.points) any_ok = any_ok || pt.status == "ok";
    if (!any_ok) throw SweepFailed("every sweep point failed");
    return result;
}

std::vector<double> dip_locator(const SweepResult& result, int power_index) {
    std::vector<const SweepPoint*> row;
    for (const auto& pt : result.points)
        if (pt.power_index == power_index && pt.status == "ok")
            row.push_back(&pt);
    if (row.size() < 3)
        throw InvalidParams("dip_locator needs at least 3 points at that power");
    std::vector<double> dips;
    for (size_t i = 1; i + 1 < row.size(); ++i) {
        const double tl = row[i - 1]->fit.tau, tc = row[i]->fit.tau,
                     tr = row[i + 1]->fit.tau;
        if (tc < tl && tc < tr) {
            const double xl = row[i - 1]->detuning, xc = row[i]->detuning,
                         xr = row[i + 1]->detuning;
            // parabola vertex through the three points
            const double d1 = (tc - tl) / (xc - xl);
            const double d2 = (tr - tc) / (xr - xc);
            const double curv = (d2 - d1) / ((xr - xl) / 2.0);
            double x = xc;
            if (curv > 0) {
                const double slope = (tr - tl) / (xr - xl);
                x = xc - slope / curv;
                x = std::clamp(x, std::min(xl, xr), std::max(xl, xr));
            }
            dips.push_back(x);
        }
    }
    return dips;
}

double calibrate_pump_from_dip(double observed_dip, const KpoParams& params,
                               FockDim dim) {
    if (observed_dip >= 0)
        throw InvalidParams("observed dip must be a negative detuning (K < 0)");
    KpoParams p = params;
    p.pump_amplitude = std::abs(observed_dip) / 2.0;
    for (int iter = 0; iter < 50; ++iter) {
        const SpectrumResult spec = diagonalize(build_single_kpo(p, dim));
        const double e02 = excitation_energy(spec, 0, 2);
        if (std::abs(e02 - observed_dip) <= 1e-3 * std::abs(observed_dip))
            return p.pump_amplitude;
        // |E02| ~ 2p to leading order, so a proportional update converges
        p.pump_amplitude *= observed_dip / e02;
    }
    throw NoConvergence("pump calibration did not converge in 50 iterations");
}

void write_sweep_csv(const SweepResult& result, const SweepSpec& spec,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open sweep CSV for writing: " + path);
    char buf[512];
    std::snprintf(buf, sizeof buf, "# kpo sweep v1 config_hash=%llu\n",
                  (unsigned long long)result.config_hash);
    out << buf;
    out << "detuning_mhz,power_dbm,omega_in_mhz,theta_in_rad,tau_us,tau_err_us,"
           "fit_rms,status\n";
    for (const auto& pt : result.points) {
        std::string status = pt.status;
        for (auto& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        if (pt.excluded_window && pt.status == "ok")
            status += " [excluded-window]";
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,",
                      to_mhz(pt.detuning), pt.power_dbm, to_mhz(pt.omega_in),
                      pt.theta, pt.fit.tau * 1e6, pt.fit.tau_error * 1e6,
                      pt.fit.residual_rms);
        out << buf << status << "\n";
    }
}

}  // namespace kpo
