#pragma once

// Physical parameter records and Hamiltonian builders for a single KPO,
// a driven KPO, and two coupled KPOs, plus the unit/calibration
// conversions between measured powers and drive amplitudes.
//
// All quantities here are angular (rad/s). File/CLI interfaces convert
// from ordinary-frequency MHz exactly once at the I/O boundary.

#include <complex>

#include "kpo/fock.hpp"

namespace kpo {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kHbar = 1.054571817e-34;  // J s

// Ordinary frequency in MHz -> angular rad/s.
inline double mhz(double f) { return kTwoPi * f * 1e6; }
inline double to_mhz(double w) { return w / (kTwoPi * 1e6); }

struct KpoParams {
    double resonance_freq = 0;   // omega_r, rad/s (0 = unspecified)
    double pump_freq = 0;        // omega_p, rad/s (0 = unspecified)
    double pump_detuning = 0;    // Delta = omega_r - omega_p/2, rad/s
    double kerr = 0;             // K, rad/s, must be < 0
    double pump_amplitude = 0;   // p, rad/s, >= 0
    double kappa_ext = 0;        // rad/s
    double kappa_int = 0;        // rad/s
    double dephasing = 0;        // gamma, rad/s
    double flux_bias = 0;        // Phi/Phi_0, metadata
    double dfreq_dcurrent = 0;   // |d omega_r / dI|, rad/s per A, metadata

    double kappa_tot() const { return kappa_ext + kappa_int + 2.0 * dephasing; }
    void validate() const;
};

struct DriveSpec {
    double amplitude = 0;  // Omega_in, rad/s, >= 0
    double detuning = 0;   // Delta_in = omega_in - omega_p/2, rad/s
    double phase = 0;      // theta_in, radians

    void validate() const;
};

struct TwoKpoParams {
    KpoParams kpo1;
    KpoParams kpo2;
    double coupling = 0;            // g, rad/s
    double pump_freq_halfdiff = 0;  // Delta_p = (omega_p2 - omega_p1)/2, rad/s
    double pump_phase_halfdiff = 0; // theta_p, radians

    void validate() const;
};

// H/hbar = Delta a†a + (K/2) a†²a² + (p/2)(a†² + a²)
OperatorMatrix build_single_kpo(const KpoParams& params, FockDim dim);

// Adds Omega_in [e^{-i(Delta_in t + theta_in)} a† + h.c.] to the single-KPO
// Hamiltonian, evaluated at time t.
OperatorMatrix build_input_driven(const KpoParams& params, const DriveSpec& drive,
                                  double t, FockDim dim);

// Two-KPO Hamiltonian on the tensor-product space (KPO1 factor first):
// each oscillator's single-KPO terms plus the photon-exchange coupling
// g [e^{-i(Delta_p t + theta_p)} a1† a2 + h.c.].
OperatorMatrix build_two_kpo(const TwoKpoParams& params, double t,
                             FockDim dim1, FockDim dim2, int dim_cap = 4096);

// Effective single-KPO Hamiltonian obtained by replacing a2 with the
// coherent amplitude alpha2; equals build_input_driven with
// Omega_in = g*alpha2, Delta_in = Delta_p, theta_in = theta_p for real
// alpha2 >= 0. A complex alpha2 folds its phase into the drive phase.
OperatorMatrix build_effective_from_coupling(const TwoKpoParams& params,
                                             Complex alpha2, double t,
                                             FockDim dim);

// Omega_in = sqrt(P_in * kappa_ext / (hbar * omega_in)), P_in from dBm.
double input_power_to_amplitude(double power_dbm, double kappa_ext,
                                double omega_in);

// p = sqrt(P_p / (2Z)) * |d omega_r / dI|
double pump_power_to_amplitude(double pump_power_watts, double line_impedance,
                               double dfreq_dcurrent);

// alpha = sqrt((p + Delta)/|K|); reduces to sqrt(p/|K|) at Delta = 0.
double coherent_amplitude(const KpoParams& params);

// kappa_int = kappa_tot - kappa_ext - 2*gamma
double kappa_int_from_budget(double kappa_tot, double kappa_ext, double gamma);

double dbm_to_watts(double dbm);

}  // namespace kpo
