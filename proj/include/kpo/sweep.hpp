#pragma once

// Grids of bit-flip-time evaluations over (input detuning, input power),
// with deterministic parallel scheduling and checkpoint/resume.

#include <string>
#include <vector>

#include "kpo/bitflip.hpp"
#include "kpo/dynamics.hpp"

namespace kpo {

struct SweepSpec {
    EvolutionSpec base;            // drive field is overwritten per point
    std::vector<double> detunings; // Delta_in, rad/s, strictly monotone
    // Exactly one power mode: dBm converted through kappa_ext/omega_in, or
    // direct drive amplitudes in rad/s.
    std::vector<double> powers_dbm;
    std::vector<double> amplitudes;  // Omega_in, rad/s
    double input_freq = 0;           // omega_in, rad/s (dBm mode)
    std::vector<double> theta_list{0.0};  // tau is averaged over this list
    double fit_bin_width = 1e-6;
    // reporting annotation only; points inside are still computed
    double exclusion_lo = -kTwoPi * 1e6, exclusion_hi = kTwoPi * 1e6;

    void validate() const;
    int power_count() const {
        return int(powers_dbm.empty() ? amplitudes.size() : powers_dbm.size());
    }
};

struct SweepPoint {
    int detuning_index = 0;
    int power_index = 0;
    double detuning = 0;     // rad/s
    double power_dbm = 0;    // NaN in amplitude mode
    double omega_in = 0;     // rad/s
    double theta = 0;        // first theta of the list (or the averaged tag)
    FitResult fit;
    std::string status = "ok";  // or an error cause
    bool excluded_window = false;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // row-major: detuning outer, power inner
    uint64_t config_hash = 0;
};

// Evaluates every grid point (evolve + bin + fit, tau averaged over the
// theta list). Results are independent of parallelism and, with a
// checkpoint path, of interruption. Per-point failures are recorded in
// `status`; SweepFailed is thrown only when every point fails.
SweepResult run_sweep(const SweepSpec& spec, int parallelism,
                      const std::string& checkpoint_path = "");

// Strict local minima of tau along the detuning axis at one power index,
// refined by a local parabola through the three surrounding points.
std::vector<double> dip_locator(const SweepResult& result, int power_index);

// Adjusts p until E_02 of the single-KPO spectrum matches the observed dip
// detuning within 0.1%; initial guess p = |dip|/2.
double calibrate_pump_from_dip(double observed_dip, const KpoParams& params,
                               FockDim dim);

// CSV schema: detuning_mhz, power_dbm, omega_in_mhz, theta_in_rad, tau_us,
// tau_err_us, fit_rms, status
void write_sweep_csv(const SweepResult& result, const SweepSpec& spec,
                     const std::string& path);

uint64_t sweep_config_hash(const SweepSpec& spec);

}  // namespace kpo
