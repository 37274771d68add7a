#include "kpo/model.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace kpo {

void KpoParams::validate() const {
    // K = 0 is the degenerate linear limit; only a positive Kerr is rejected.
    if (kerr > 0) throw InvalidParams("Kerr nonlinearity K must not be positive");
    if (pump_amplitude < 0) throw InvalidParams("pump amplitude p must be >= 0");
    if (kappa_ext < 0 || kappa_int < 0 || dephasing < 0)
        throw InvalidParams("loss rates must be >= 0");
    // Detuning consistency only when both absolute frequencies are given.
    if (resonance_freq != 0 && pump_freq != 0) {
        const double implied = resonance_freq - pump_freq / 2.0;
        if (std::abs(implied - pump_detuning) > 1.0)
            throw InvalidParams("pump_detuning inconsistent with omega_r and omega_p");
    }
}

void DriveSpec::validate() const {
    if (amplitude < 0) throw InvalidParams("drive amplitude must be >= 0");
}

void TwoKpoParams::validate() const {
    kpo1.validate();
    kpo2.validate();
    if (kpo1.pump_freq != 0 && kpo2.pump_freq != 0) {
        const double implied = (kpo2.pump_freq - kpo1.pump_freq) / 2.0;
        if (std::abs(implied - pump_freq_halfdiff) > 1.0)
            throw InvalidParams("Delta_p inconsistent with member pump frequencies");
    }
}

OperatorMatrix build_single_kpo(const KpoParams& params, FockDim dim) {
    params.validate();
    const int n = dim.n_levels;
    OperatorMatrix h = OperatorMatrix::Zero(n, n);
    // Diagonal: Delta*n + (K/2)*n*(n-1); two-photon pump on the second
    // off-diagonals: (p/2) sqrt((k+1)(k+2)).
    for (int k = 0; k < n; ++k)
        h(k, k) = params.pump_detuning * k +
                  0.5 * params.kerr * double(k) * double(k - 1);
    for (int k = 0; k + 2 <= n - 1; ++k) {
        const double v = 0.5 * params.pump_amplitude *
                         std::sqrt(double(k + 1) * double(k + 2));
        h(k, k + 2) = v;
        h(k + 2, k) = v;
    }
    return h;
}

OperatorMatrix build_input_driven(const KpoParams& params, const DriveSpec& drive,
                                  double t, FockDim dim) {
    drive.validate();
    OperatorMatrix h = build_single_kpo(params, dim);
    const Complex phase =
        std::exp(Complex(0, -(drive.detuning * t + drive.phase)));
    const int n = dim.n_levels;
    for (int k = 0; k + 1 <= n - 1; ++k) {
        const Complex v = drive.amplitude * phase * std::sqrt(double(k + 1));
        h(k + 1, k) += v;            // a† term
        h(k, k + 1) += std::conj(v); // a term
    }
    return h;
}

OperatorMatrix build_two_kpo(const TwoKpoParams& params, double t,
                             FockDim dim1, FockDim dim2, int dim_cap) {
    params.validate();
    const long total = long(dim1.n_levels) * dim2.n_levels;
    if (total > dim_cap)
        throw DimensionError("two-KPO product dimension exceeds cap");
    const OperatorMatrix h1 = build_single_kpo(params.kpo1, dim1);
    const OperatorMatrix h2 = build_single_kpo(params.kpo2, dim2);
    const OperatorMatrix i1 = OperatorMatrix::Identity(dim1.n_levels, dim1.n_levels);
    const OperatorMatrix i2 = OperatorMatrix::Identity(dim2.n_levels, dim2.n_levels);
    OperatorMatrix h = Eigen::kroneckerProduct(h1, i2).eval() +
                       Eigen::kroneckerProduct(i1, h2).eval();
    const Complex phase = std::exp(
        Complex(0, -(params.pump_freq_halfdiff * t + params.pump_phase_halfdiff)));
    const OperatorMatrix exchange =
        Eigen::kroneckerProduct(creation(dim1), annihilation(dim2)).eval();
    h += params.coupling * (phase * exchange + std::conj(phase) * exchange.adjoint());
    return h;
}

OperatorMatrix build_effective_from_coupling(const TwoKpoParams& params,
                                             Complex alpha2, double t,
                                             FockDim dim) {
    params.validate();
    DriveSpec drive;
    drive.amplitude = params.coupling * std::abs(alpha2);
    drive.detuning = params.pump_freq_halfdiff;
    drive.phase = params.pump_phase_halfdiff - std::arg(alpha2);
    return build_input_driven(params.kpo1, drive, t, dim);
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double input_power_to_amplitude(double power_dbm, double kappa_ext,
                                double omega_in) {
    if (kappa_ext <= 0) throw InvalidParams("kappa_ext must be > 0");
    if (omega_in <= 0) throw InvalidParams("omega_in must be > 0");
    const double p_in = dbm_to_watts(power_dbm);
    return std::sqrt(p_in * kappa_ext / (kHbar * omega_in));
}

double pump_power_to_amplitude(double pump_power_watts, double line_impedance,
                               double dfreq_dcurrent) {
    if (line_impedance <= 0) throw InvalidParams("line impedance must be > 0");
    if (pump_power_watts < 0) throw InvalidParams("pump power must be >= 0");
    return std::sqrt(pump_power_watts / (2.0 * line_impedance)) *
           std::abs(dfreq_dcurrent);
}

double coherent_amplitude(const KpoParams& params) {
    if (params.kerr >= 0) throw InvalidParams("K must be negative");
    const double num = params.pump_amplitude + params.pump_detuning;
    if (num < 0) throw InvalidParams("p + Delta must be >= 0");
    return std::sqrt(num / std::abs(params.kerr));
}

double kappa_int_from_budget(double kappa_tot, double kappa_ext, double gamma) {
    const double k_int = kappa_tot - kappa_ext - 2.0 * gamma;
    if (k_int < 0)
        throw InvalidParams("loss budget: kappa_tot < kappa_ext + 2*gamma");
    return k_int;
}

}  // namespace kpo
