#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "kpo/model.hpp"
#include "kpo/spectrum.hpp"

using namespace kpo;

namespace {

KpoParams table1() {
    KpoParams p;
    p.resonance_freq = mhz(9.90e3);
    p.pump_freq = 2.0 * p.resonance_freq;
    p.pump_detuning = 0;
    p.kerr = -mhz(14);
    p.pump_amplitude = mhz(110);
    p.kappa_ext = mhz(0.72);
    p.dephasing = mhz(9.1e-3);
    p.kappa_int = kappa_int_from_budget(mhz(1.9), p.kappa_ext, p.dephasing);
    return p;
}

}  // namespace

TEST_CASE("single-KPO builder") {
    SUBCASE("all couplings zero gives the zero matrix") {
        KpoParams p;
        const OperatorMatrix h = build_single_kpo(p, FockDim(8));
        CHECK(h.norm() == 0.0);
    }
    SUBCASE("Hermitian at experiment-scale parameters") {
        const OperatorMatrix h = build_single_kpo(table1(), FockDim(40));
        CHECK(hermiticity_deviation(h) < 1e-12);
    }
    SUBCASE("pump off: diagonal Kerr ladder (K/2) n(n-1)") {
        KpoParams p;
        p.kerr = -mhz(14);
        const FockDim dim(12);
        const OperatorMatrix h = build_single_kpo(p, dim);
        for (int n = 0; n < dim.n_levels; ++n) {
            const double want = 0.5 * p.kerr * n * (n - 1);
            CHECK(std::abs(h(n, n).real() - want) < 1e-3);
        }
        CHECK((h - OperatorMatrix(h.diagonal().asDiagonal())).norm() < 1e-12);
    }
    SUBCASE("positive Kerr rejected") {
        KpoParams p;
        p.kerr = mhz(1);
        CHECK_THROWS_AS(p.validate(), InvalidParams);
    }
}

TEST_CASE("input-driven builder") {
    const KpoParams p = table1();
    const FockDim dim(24);
    SUBCASE("zero drive reduces to the bare Hamiltonian") {
        DriveSpec d;
        CHECK((build_input_driven(p, d, 0.3e-6, dim) -
               build_single_kpo(p, dim)).norm() == 0.0);
    }
    SUBCASE("resonant zero-phase drive is time-independent") {
        DriveSpec d;
        d.amplitude = mhz(1.1);
        const OperatorMatrix h0 = build_input_driven(p, d, 0.0, dim);
        const OperatorMatrix h1 = build_input_driven(p, d, 0.7e-6, dim);
        CHECK((h0 - h1).norm() < 1e-12 * h0.norm());
        const OperatorMatrix a = annihilation(dim);
        const OperatorMatrix drive_term = h0 - build_single_kpo(p, dim);
        CHECK((drive_term - d.amplitude * (a + a.adjoint())).norm() <
              1e-10 * d.amplitude);
    }
    SUBCASE("detuned drive rotates with phase e^{-i Delta_in t}") {
        DriveSpec d;
        d.amplitude = mhz(1.1);
        d.detuning = -mhz(204);
        const double t = 1e-6;
        const OperatorMatrix bare = build_single_kpo(p, dim);
        const OperatorMatrix dt = build_input_driven(p, d, t, dim) - bare;
        const OperatorMatrix d0 = build_input_driven(p, d, 0.0, dim) - bare;
        // upper triangle carries a†: multiply by the drive phase factor
        const Complex ph = std::exp(Complex(0, -d.detuning * t));
        OperatorMatrix expect = d0;
        for (int i = 0; i < dim.n_levels; ++i)
            for (int j = 0; j < dim.n_levels; ++j)
                expect(i, j) *= (i > j) ? ph : std::conj(ph);
        CHECK((dt - expect).norm() < 1e-10 * dt.norm());
        CHECK(hermiticity_deviation(build_input_driven(p, d, t, dim)) < 1e-12);
    }
}

TEST_CASE("two-KPO builder") {
    TwoKpoParams two;
    two.kpo1 = table1();
    two.kpo1.pump_amplitude = mhz(140);
    two.kpo1.kerr = -mhz(14);
    two.kpo2 = table1();
    two.kpo2.kerr = -mhz(15);
    two.kpo2.pump_amplitude = mhz(140);
    two.coupling = mhz(3.0);
    const FockDim d1(8), d2(8);
    SUBCASE("decoupled limit is the Kronecker sum") {
        TwoKpoParams u = two;
        u.coupling = 0;
        const OperatorMatrix h = build_two_kpo(u, 0.0, d1, d2);
        const OperatorMatrix id1 = OperatorMatrix::Identity(8, 8);
        const OperatorMatrix want =
            Eigen::kroneckerProduct(build_single_kpo(u.kpo1, d1), id1) +
            Eigen::kroneckerProduct(id1, build_single_kpo(u.kpo2, d2));
        CHECK((h - want).norm() == 0.0);
    }
    SUBCASE("coupling block is g(a1† a2 + a1 a2†) at t=0, theta_p=0") {
        TwoKpoParams u = two;
        u.kpo1 = KpoParams{};
        u.kpo2 = KpoParams{};
        const OperatorMatrix h = build_two_kpo(u, 0.0, d1, d2);
        const OperatorMatrix a = annihilation(d1);
        const OperatorMatrix want =
            u.coupling *
            (Eigen::kroneckerProduct(a.adjoint(), a) +
             Eigen::kroneckerProduct(a, a.adjoint()));
        CHECK((h - want).norm() < 1e-10 * want.norm());
    }
    SUBCASE("exchange term conserves total photon number") {
        TwoKpoParams u = two;
        u.kpo1 = KpoParams{};
        u.kpo2 = KpoParams{};
        u.pump_freq_halfdiff = mhz(1);
        const OperatorMatrix h = build_two_kpo(u, 0.37e-6, d1, d2);
        const OperatorMatrix id = OperatorMatrix::Identity(8, 8);
        const OperatorMatrix ntot =
            Eigen::kroneckerProduct(number_operator(d1), id) +
            Eigen::kroneckerProduct(id, number_operator(d2));
        CHECK((h * ntot - ntot * h).norm() < 1e-10 * h.norm());
    }
    SUBCASE("dimension cap") {
        CHECK_THROWS_AS(
            (void)build_two_kpo(two, 0.0, FockDim(70), FockDim(70)),
            DimensionError);
    }
}

TEST_CASE("effective drive from the coupled-KPO reduction") {
    TwoKpoParams two;
    two.kpo1 = table1();
    two.coupling = mhz(3.0);
    two.pump_freq_halfdiff = -mhz(30);
    two.pump_phase_halfdiff = 0.4;
    const FockDim dim(24);
    SUBCASE("alpha2 = 0 strips the drive") {
        CHECK((build_effective_from_coupling(two, 0.0, 0.2e-6, dim) -
               build_single_kpo(two.kpo1, dim)).norm() == 0.0);
    }
    SUBCASE("real alpha2 matches the driven builder entrywise") {
        DriveSpec d;
        d.amplitude = mhz(6.0);  // g alpha2 with alpha2 = 2
        d.detuning = two.pump_freq_halfdiff;
        d.phase = two.pump_phase_halfdiff;
        for (double t : {0.0, 0.11e-6, 2.3e-6}) {
            const OperatorMatrix lhs =
                build_effective_from_coupling(two, 2.0, t, dim);
            const OperatorMatrix rhs = build_input_driven(two.kpo1, d, t, dim);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <
                  1e-14 * rhs.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("alpha2 phase folds into the drive phase") {
        const Complex a2 = std::polar(2.0, 0.9);
        DriveSpec d;
        d.amplitude = mhz(6.0);
        d.detuning = two.pump_freq_halfdiff;
        d.phase = two.pump_phase_halfdiff - 0.9;
        const OperatorMatrix lhs =
            build_effective_from_coupling(two, a2, 0.5e-6, dim);
        const OperatorMatrix rhs =
            build_input_driven(two.kpo1, d, 0.5e-6, dim);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <
              1e-12 * rhs.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("power and amplitude calibrations") {
    SUBCASE("measured operating point lands near 1.1 MHz") {
        const double w = input_power_to_amplitude(-132.0, mhz(0.72),
                                                 mhz(9.90e3));
        CHECK(to_mhz(w) == doctest::Approx(1.1).epsilon(0.08));
    }
    SUBCASE("square-root power scaling") {
        const double w1 = input_power_to_amplitude(-132.0, mhz(0.72),
                                                   mhz(9.90e3));
        const double w2 = input_power_to_amplitude(-126.0, mhz(0.72),
                                                   mhz(9.90e3));
        CHECK(w2 / w1 == doctest::Approx(std::sqrt(std::pow(10.0, 0.6))).epsilon(1e-12));
        // -126 dBm is ~4x the power of -132 dBm, so the amplitude ~doubles
        CHECK(w2 / w1 == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("vanishing power gives zero amplitude") {
        CHECK(input_power_to_amplitude(-10000.0, mhz(0.72), mhz(9.90e3)) <
              1e-300);
    }
    SUBCASE("pump amplitude from line power") {
        CHECK(pump_power_to_amplitude(0.0, 50.0, mhz(1)) == 0.0);
        CHECK(pump_power_to_amplitude(100.0, 50.0, mhz(7)) ==
              doctest::Approx(mhz(7)));  // sqrt(P/2Z) = 1 A
        CHECK(pump_power_to_amplitude(4e-3, 50.0, mhz(7)) ==
              doctest::Approx(2.0 * pump_power_to_amplitude(1e-3, 50.0, mhz(7))));
    }
    SUBCASE("coherent amplitude") {
        CHECK(coherent_amplitude(table1()) == doctest::Approx(2.80).epsilon(0.002));
        KpoParams p = table1();
        p.pump_amplitude = mhz(140);
        CHECK(coherent_amplitude(p) == doctest::Approx(3.16).epsilon(0.005));
        p.pump_amplitude = mhz(140);
        p.kerr = -mhz(15);
        CHECK(coherent_amplitude(p) == doctest::Approx(3.06).epsilon(0.005));
        p.pump_amplitude = 0;
        CHECK(coherent_amplitude(p) == 0.0);
    }
    SUBCASE("internal-loss budget") {
        const double ki = kappa_int_from_budget(mhz(1.9), mhz(0.72),
                                                mhz(9.1e-3));
        CHECK(to_mhz(ki) == doctest::Approx(1.16).epsilon(0.005));
        CHECK(kappa_int_from_budget(mhz(1), mhz(1), 0) == 0.0);
        CHECK_THROWS_AS((void)kappa_int_from_budget(mhz(1), mhz(1.5), 0),
                        InvalidParams);
    }
}

TEST_CASE("builders stay Hermitian across sampled drive phases") {
    const KpoParams p = table1();
    DriveSpec d;
    d.amplitude = mhz(3);
    d.detuning = mhz(-204);
    d.phase = 1.1;
    for (double t = 0; t < 5e-8; t += 7e-9) {
        CHECK(hermiticity_deviation(build_input_driven(p, d, t, FockDim(20))) <
              1e-12);
    }
}
