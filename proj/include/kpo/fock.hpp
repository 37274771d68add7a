#pragma once

// Truncated-Fock-space linear algebra: ladder operators, coherent states,
// and density-matrix sanity checks. Everything here is a plain value type;
// nothing mutates after construction.

#include <complex>

#include <Eigen/Dense>

#include "kpo/errors.hpp"

namespace kpo {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityState = Eigen::MatrixXcd;

struct FockDim {
    int n_levels = 0;

    explicit FockDim(int n) : n_levels(n) {
        if (n < 2) throw InvalidParams("FockDim requires n_levels >= 2");
    }
};

OperatorMatrix annihilation(FockDim dim);
OperatorMatrix creation(FockDim dim);
OperatorMatrix number_operator(FockDim dim);

// Diagonal matrix with entries (-1)^n.
OperatorMatrix parity_operator(FockDim dim);

StateVector fock_state(FockDim dim, int n);

// |alpha> on the truncated space, normalized. Requires |alpha|^2 <= dim/4
// so that the tail mass beyond the truncation stays below ~1e-8.
StateVector coherent_state(FockDim dim, Complex alpha);

// Analytic overlap <alpha|beta> on the untruncated space.
Complex coherent_overlap(Complex alpha, Complex beta);

DensityState pure_density(const StateVector& psi);

double hermiticity_deviation(const Eigen::MatrixXcd& m);  // relative Frobenius

struct DensityCheck {
    double hermiticity = 0;   // relative Frobenius deviation from rho^dagger
    double trace_error = 0;   // |Tr rho - 1|
    double min_eigenvalue = 0;
    bool ok(double herm_tol = 1e-10, double trace_tol = 1e-8,
            double negativity_tol = 1e-6) const {
        return hermiticity < herm_tol && trace_error < trace_tol &&
               min_eigenvalue > -negativity_tol;
    }
};

DensityCheck check_density(const DensityState& rho);

}  // namespace kpo
