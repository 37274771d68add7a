#pragma once

// Time integration of the Lindblad master equation with photon loss at
// kappa_tot and pure dephasing at gamma, for the (optionally driven)
// single-KPO Hamiltonian. The right-hand side exploits the pentadiagonal
// structure of the Hamiltonian so one derivative evaluation is O(dim^2).

#include <optional>
#include <string>
#include <vector>

#include "kpo/model.hpp"

namespace kpo {

struct TimeSeries {
    std::vector<double> times;     // seconds, strictly increasing
    std::vector<Complex> values;
    std::string observable_name;
};

struct EvolutionSpec {
    KpoParams params;
    std::optional<DriveSpec> drive;
    FockDim dim{40};
    StateVector initial;        // used when initial_rho is empty
    DensityState initial_rho;   // takes precedence when non-empty
    double t_end = 20e-6;
    double output_stride = 10e-9;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    // Optional linear pump/drive amplitude ramp from 0 over ramp_duration;
    // default is plateau-only (initial state already oscillating).
    bool ramp = false;
    double ramp_duration = 0.2e-6;
    // Throw TruncationError when the top two Fock populations exceed this.
    double truncation_threshold = 1e-4;
};

struct EvolutionResult {
    std::vector<TimeSeries> series;  // one per requested observable
    DensityState final_rho;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

// d rho/dt = -i[H, rho] + (kappa_tot/2)(2 a rho a† - rho a†a - a†a rho)
//            + gamma (2 n rho n - rho n² - n² rho)
// Reference implementation with explicit dense operators; the integrator
// uses an equivalent structured evaluation (tested against this one).
DensityState lindblad_rhs(const DensityState& rho, const OperatorMatrix& h,
                          double kappa_tot, double gamma);

EvolutionResult evolve(const EvolutionSpec& spec,
                       const std::vector<OperatorMatrix>& observables,
                       const std::vector<std::string>& names = {});

// (a + a†)/2, the state-discriminating quadrature.
OperatorMatrix quadrature_observable(FockDim dim);

// Columns: time_us, value_re, value_im.
void write_timeseries_csv(const TimeSeries& series, const std::string& path);

// Evaluates the integrator's structured generator at (t, rho). Exists so
// tests can compare it against lindblad_rhs built from dense operators.
DensityState evolve_rhs_probe(const EvolutionSpec& spec, double t,
                              const DensityState& rho);

struct ConvergenceResult {
    std::vector<int> dims;
    std::vector<TimeSeries> quadrature_per_dim;
    // max over times of the relative trace change between successive dims
    std::vector<double> max_relative_change;
};

// Re-runs the evolution of `spec` at each dim (initial Fock amplitudes
// re-embedded and renormalized) and reports how much the quadrature trace
// moves between successive dims.
ConvergenceResult convergence_check(const EvolutionSpec& spec,
                                    const std::vector<int>& dims);

}  // namespace kpo
