#include "kpo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace kpo {

DensityState lindblad_rhs(const DensityState& rho, const OperatorMatrix& h,
                          double kappa_tot, double gamma) {
    if (rho.rows() != rho.cols() || rho.rows() != h.rows() || h.rows() != h.cols())
        throw DimensionMismatch("lindblad_rhs: shape mismatch");
    const FockDim dim(int(rho.rows()));
    const OperatorMatrix a = annihilation(dim);
    const OperatorMatrix ad = a.adjoint();
    const OperatorMatrix n = ad * a;
    const Complex mi(0, -1);
    DensityState out = mi * (h * rho - rho * h);
    out += (kappa_tot / 2.0) * (2.0 * a * rho * ad - rho * n - n * rho);
    out += gamma * (2.0 * n * rho * n - rho * n * n - n * n * rho);
    return out;
}

OperatorMatrix quadrature_observable(FockDim dim) {
    const OperatorMatrix a = annihilation(dim);
    return 0.5 * (a + a.adjoint().eval());
}

void write_timeseries_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open CSV for writing: " + path);
    out << "time_us,value_re,value_im\n";
    char buf[128];
    for (size_t k = 0; k < series.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9g,%.12g,%.12g\n",
                      series.times[k] * 1e6, series.values[k].real(),
                      series.values[k].imag());
        out << buf;
    }
}

namespace {

// Structured O(n^2) evaluation of the Lindblad generator. The Hamiltonian
// is pentadiagonal (Kerr/detuning diagonal, two-photon pump on the second
// off-diagonals, drive on the first), a is bidiagonal, and n is diagonal,
// so every term reduces to shifted-and-scaled copies of rho.
struct Generator {
    int n = 0;
    Eigen::VectorXd hdiag;    // Delta*k + (K/2) k(k-1)
    Eigen::VectorXd hp;       // (p/2) sqrt((k+1)(k+2)), index k -> (k, k+2)
    Eigen::VectorXd sq;       // sqrt(k)
    Eigen::MatrixXd decay_w;  // (kappa/2)(n_i+n_j) + gamma (n_i-n_j)^2
    Eigen::MatrixXd pump_w;   // sqrt((i+1)(j+1)) for the a rho a† shift
    double kappa = 0, gamma = 0;
    double omega_in = 0, delta_in = 0, theta_in = 0;
    bool driven = false;
    bool ramp = false;
    double ramp_duration = 0;
    double p_full = 0;  // unramped pump amplitude

    Generator(const EvolutionSpec& spec) {
        n = spec.dim.n_levels;
        const KpoParams& kp = spec.params;
        kappa = kp.kappa_tot();
        gamma = kp.dephasing;
        p_full = kp.pump_amplitude;
        hdiag.resize(n);
        sq.resize(n);
        for (int k = 0; k < n; ++k) {
            hdiag(k) = kp.pump_detuning * k + 0.5 * kp.kerr * double(k) * double(k - 1);
            sq(k) = std::sqrt(double(k));
        }
        hp.resize(std::max(n - 2, 0));
        for (int k = 0; k + 2 < n; ++k)
            hp(k) = 0.5 * std::sqrt(double(k + 1) * double(k + 2));
        decay_w.resize(n, n);
        pump_w.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = double(i) - double(j);
                decay_w(i, j) = 0.5 * kappa * (double(i) + double(j)) + gamma * d * d;
                pump_w(i, j) = std::sqrt(double(i + 1) * double(j + 1));
            }
        if (spec.drive && spec.drive->amplitude > 0) {
            driven = true;
            omega_in = spec.drive->amplitude;
            delta_in = spec.drive->detuning;
            theta_in = spec.drive->phase;
        }
        ramp = spec.ramp;
        ramp_duration = spec.ramp_duration;
    }

    double envelope(double t) const {
        if (!ramp || t >= ramp_duration) return 1.0;
        return t / ramp_duration;
    }

    // out = L(t) rho
    void apply(double t, const DensityState& rho, DensityState& out) const {
        const double env = envelope(t);
        const double p_eff = p_full * env;
        // M = H rho  (then the commutator is M - M†-of-transpose trick is
        // not valid for complex H; compute rho H explicitly instead)
        static thread_local DensityState m1, m2;
        m1.resize(n, n);
        m2.resize(n, n);
        // H rho and rho H, pentadiagonal part
        for (int i = 0; i < n; ++i) m1.row(i) = hdiag(i) * rho.row(i);
        for (int j = 0; j < n; ++j) m2.col(j) = hdiag(j) * rho.col(j);
        for (int k = 0; k + 2 < n; ++k) {
            const double v = p_eff * hp(k);
            m1.row(k) += v * rho.row(k + 2);
            m1.row(k + 2) += v * rho.row(k);
            m2.col(k) += v * rho.col(k + 2);
            m2.col(k + 2) += v * rho.col(k);
        }
        if (driven) {
            const Complex c =
                env * omega_in * std::exp(Complex(0, -(delta_in * t + theta_in)));
            const Complex cc = std::conj(c);
            // drive D = c a† + cc a: (D rho)_{ij} = c sq_i rho_{i-1,j}
            //                                     + cc sq_{i+1} rho_{i+1,j}
            for (int i = 0; i < n; ++i) {
                if (i > 0) m1.row(i) += (c * sq(i)) * rho.row(i - 1);
                if (i + 1 < n) m1.row(i) += (cc * sq(i + 1)) * rho.row(i + 1);
            }
            for (int j = 0; j < n; ++j) {
                if (j > 0) m2.col(j) += (cc * sq(j)) * rho.col(j - 1);
                if (j + 1 < n) m2.col(j) += (c * sq(j + 1)) * rho.col(j + 1);
            }
        }
        out = Complex(0, -1) * (m1 - m2);
        // photon loss feed term: kappa (a rho a†)_{ij}
        //   = kappa sqrt((i+1)(j+1)) rho_{i+1,j+1}
        out.topLeftCorner(n - 1, n - 1).noalias() +=
            (kappa * pump_w.topLeftCorner(n - 1, n - 1).array() *
             rho.bottomRightCorner(n - 1, n - 1).array())
                .matrix();
        // loss/dephasing damping, elementwise
        out.array() -= decay_w.array() * rho.array();
    }
};

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace

DensityState evolve_rhs_probe(const EvolutionSpec& spec, double t,
                              const DensityState& rho) {
    if (rho.rows() != spec.dim.n_levels || rho.cols() != spec.dim.n_levels)
        throw DimensionMismatch("probe rho dimension mismatch");
    const Generator gen(spec);
    DensityState out(rho.rows(), rho.cols());
    gen.apply(t, rho, out);
    return out;
}

EvolutionResult evolve(const EvolutionSpec& spec,
                       const std::vector<OperatorMatrix>& observables,
                       const std::vector<std::string>& names) {
    if (spec.t_end <= 0) throw InvalidParams("t_end must be > 0");
    if (spec.output_stride <= 0) throw InvalidParams("output_stride must be > 0");
    spec.params.validate();
    const int n = spec.dim.n_levels;

    DensityState rho;
    if (spec.initial_rho.size() > 0) {
        if (spec.initial_rho.rows() != n)
            throw DimensionMismatch("initial_rho dimension mismatch");
        rho = spec.initial_rho;
    } else {
        if (spec.initial.size() != n)
            throw DimensionMismatch("initial state dimension mismatch");
        rho = pure_density(spec.initial);
    }
    for (const auto& obs : observables)
        if (obs.rows() != n || obs.cols() != n)
            throw DimensionMismatch("observable dimension mismatch");

    const Generator gen(spec);
    const long n_out = std::lround(spec.t_end / spec.output_stride);
    EvolutionResult result;
    result.series.resize(observables.size());
    for (size_t k = 0; k < observables.size(); ++k) {
        result.series[k].observable_name =
            k < names.size() ? names[k] : ("obs" + std::to_string(k));
        result.series[k].times.reserve(n_out + 1);
        result.series[k].values.reserve(n_out + 1);
    }

    auto record = [&](double t, const DensityState& r) {
        for (size_t k = 0; k < observables.size(); ++k) {
            result.series[k].times.push_back(t);
            result.series[k].values.push_back((r * observables[k]).trace());
        }
        const double edge_pop =
            std::real(r(n - 1, n - 1)) + std::real(r(n - 2, n - 2));
        if (edge_pop > spec.truncation_threshold)
            throw TruncationError("population reached the Fock truncation edge");
    };

    DensityState k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n),
        k7(n, n), ytmp(n, n), ynew(n, n);
    record(0.0, rho);

    double t = 0.0;
    double h = 1e-12;
    const double h_min = 1e-18;
    gen.apply(t, rho, k1);  // FSAL
    for (long out_idx = 1; out_idx <= n_out; ++out_idx) {
        const double t_target = out_idx * spec.output_stride;
        while (t < t_target - 1e-18 * t_target - 1e-30) {
            const double h_step = std::min(h, t_target - t);
            ytmp = rho + (h_step * a21) * k1;
            gen.apply(t + c2 * h_step, ytmp, k2);
            ytmp = rho + h_step * (a31 * k1 + a32 * k2);
            gen.apply(t + c3 * h_step, ytmp, k3);
            ytmp = rho + h_step * (a41 * k1 + a42 * k2 + a43 * k3);
            gen.apply(t + c4 * h_step, ytmp, k4);
            ytmp = rho + h_step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            gen.apply(t + c5 * h_step, ytmp, k5);
            ytmp = rho + h_step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                   a65 * k5);
            gen.apply(t + h_step, ytmp, k6);
            ynew = rho + h_step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            gen.apply(t + h_step, ynew, k7);

            // mixed abs/rel error norm over the 4th/5th order difference
            double err_sq = 0.0;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const Complex e = h_step * (e1 * k1(i, j) + e3 * k3(i, j) +
                                                e4 * k4(i, j) + e5 * k5(i, j) +
                                                e6 * k6(i, j) + e7 * k7(i, j));
                    const double scale =
                        spec.abs_tol +
                        spec.rel_tol * std::max(std::abs(rho(i, j)),
                                                std::abs(ynew(i, j)));
                    const double r = std::abs(e) / scale;
                    err_sq += r * r;
                }
            const double err = std::sqrt(err_sq / double(n) / double(n));

            if (err <= 1.0) {
                t += h_step;
                rho.swap(ynew);
                k1.swap(k7);  // first-same-as-last
                ++result.accepted_steps;
            } else {
                ++result.rejected_steps;
            }
            const double factor = std::clamp(
                0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
            h = h_step * factor;
            if (h < h_min)
                throw ToleranceFailure("integrator step collapsed");
        }
        t = t_target;  // clamp accumulated rounding
        record(t, rho);
    }
    result.final_rho = std::move(rho);
    return result;
}

ConvergenceResult convergence_check(const EvolutionSpec& spec,
                                    const std::vector<int>& dims) {
    if (dims.size() < 2)
        throw InvalidParams("convergence_check needs at least two dims");
    ConvergenceResult out;
    out.dims = dims;
    for (int d : dims) {
        EvolutionSpec s = spec;
        s.dim = FockDim(d);
        // re-embed the initial Fock amplitudes at the new dim
        if (spec.initial_rho.size() > 0) {
            const int m = std::min<int>(d, int(spec.initial_rho.rows()));
            DensityState r = DensityState::Zero(d, d);
            r.topLeftCorner(m, m) = spec.initial_rho.topLeftCorner(m, m);
            r /= r.trace().real();
            s.initial_rho = r;
            s.initial.resize(0);
        } else {
            const int m = std::min<int>(d, int(spec.initial.size()));
            StateVector v = StateVector::Zero(d);
            v.head(m) = spec.initial.head(m);
            v.normalize();
            s.initial = v;
            s.initial_rho.resize(0, 0);
        }
        auto res = evolve(s, {quadrature_observable(s.dim)}, {"<a+ad>/2"});
        out.quadrature_per_dim.push_back(std::move(res.series[0]));
    }
    for (size_t k = 1; k < out.quadrature_per_dim.size(); ++k) {
        const auto& prev = out.quadrature_per_dim[k - 1];
        const auto& cur = out.quadrature_per_dim[k];
        double scale = 0;
        for (const auto& v : cur.values) scale = std::max(scale, std::abs(v));
        double worst = 0;
        const size_t m = std::min(prev.values.size(), cur.values.size());
        for (size_t i = 0; i < m; ++i)
            worst = std::max(worst,
                             std::abs(cur.values[i] - prev.values[i]) / scale);
        out.max_relative_change.push_back(worst);
    }
    return out;
}

}  // namespace kpo
