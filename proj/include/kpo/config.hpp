#pragma once

// Flat sectioned key=value run configuration. Frequencies and rates are
// entered as ordinary-frequency MHz (the tables' convention), durations in
// microseconds, powers in dBm; conversion to angular rad/s happens here
// and nowhere else. Unknown sections or keys are rejected with the line
// number.

#include <optional>
#include <string>
#include <vector>

#include "kpo/model.hpp"

namespace kpo {

struct KpoSection {
    double flux_bias = 0;
    double resonance_frequency_mhz = 0;
    double kappa_tot_mhz = 0;
    double kappa_ext_mhz = 0;
    double kerr_mhz = 0;
    double pump_detuning_mhz = 0;
    double pump_amplitude_mhz = 0;
    double gamma_mhz = 0;
    double dfreq_dcurrent_mhz_per_ua = 0;  // metadata

    KpoParams to_params() const;  // MHz -> rad/s, kappa_int from the budget
};

struct CouplingSection {
    double g_mhz = 0;
    double delta_p_mhz = 0;
    double theta_p_rad = 0;
};

struct SimulationSection {
    int dim = 40;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_end_us = 20;
    double output_stride_ns = 10;
    double sim_bin_width_us = 1;   // fit bins for simulated traces
    double exp_bin_width_us = 2;   // fit bins for emulated-experiment traces
    bool ramp = false;
    double ramp_duration_us = 0.2;
};

struct DriveSection {
    std::optional<double> power_dbm;
    std::optional<double> omega_in_mhz;
    double detuning_mhz = 0;
    double theta_rad = 0;
    double input_frequency_mhz = 0;
    double power_correction_db = 0;  // e.g. the 3 dB line-loss correction
};

struct SweepSection {
    double detuning_start_mhz = -300;
    double detuning_stop_mhz = 300;
    double detuning_step_mhz = 4;
    std::vector<double> power_list_dbm;
    std::vector<double> omega_list_mhz;
    std::vector<double> theta_list_rad{0.0};
    double exclusion_mhz = 1;
};

struct ReadoutSection {
    std::vector<double> if_freqs_mhz{1, 31};
    double sample_rate_msps = 250;
    double noise_sigma = 0.25;
    long trials = 10000;
    uint64_t seed = 1;
    double tau_flip_us = 5;
    double amplitude = 1.0;
    double bin_duration_us = 2;
};

struct CollisionSection {
    double threshold_mhz = 1;
    double energy_cutoff_mhz = 0;  // 0 = use 2p of each KPO
    bool include_ground_doublet = false;
};

struct RunConfig {
    KpoSection kpo1;
    std::optional<KpoSection> kpo2;
    CouplingSection coupling;
    SimulationSection simulation;
    DriveSection drive;
    SweepSection sweep;
    ReadoutSection readout;
    CollisionSection collision;

    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_string(const std::string& text);
    std::string dump() const;

    TwoKpoParams to_two_kpo() const;  // requires kpo2
    std::optional<DriveSpec> drive_spec() const;
};

}  // namespace kpo
