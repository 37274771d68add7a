#include "kpo/fock.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace kpo {

OperatorMatrix annihilation(FockDim dim) {
    const int n = dim.n_levels;
    OperatorMatrix a = OperatorMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

OperatorMatrix creation(FockDim dim) {
    return annihilation(dim).adjoint();
}

OperatorMatrix number_operator(FockDim dim) {
    const int n = dim.n_levels;
    OperatorMatrix m = OperatorMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = double(k);
    return m;
}

OperatorMatrix parity_operator(FockDim dim) {
    const int n = dim.n_levels;
    OperatorMatrix m = OperatorMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return m;
}

StateVector fock_state(FockDim dim, int n) {
    if (n < 0 || n >= dim.n_levels)
        throw IndexError("Fock level outside truncated space");
    StateVector v = StateVector::Zero(dim.n_levels);
    v(n) = 1.0;
    return v;
}

StateVector coherent_state(FockDim dim, Complex alpha) {
    const double nbar = std::norm(alpha);
    if (nbar >= dim.n_levels / 4.0)
        throw TruncationError("coherent_state: |alpha|^2 exceeds dim/4");
    StateVector v(dim.n_levels);
    // c_n = c_{n-1} * alpha / sqrt(n); renormalize at the end so the
    // truncated vector has unit norm.
    Complex c = 1.0;
    v(0) = c;
    for (int n = 1; n < dim.n_levels; ++n) {
        c *= alpha / std::sqrt(double(n));
        v(n) = c;
    }
    v.normalize();
    return v;
}

Complex coherent_overlap(Complex alpha, Complex beta) {
    return std::exp(-(std::norm(alpha) + std::norm(beta)) / 2.0 +
                    std::conj(alpha) * beta);
}

DensityState pure_density(const StateVector& psi) {
    return psi * psi.adjoint();
}

double hermiticity_deviation(const Eigen::MatrixXcd& m) {
    const double norm = m.norm();
    if (norm == 0.0) return 0.0;
    return (m - m.adjoint().eval()).norm() / norm;
}

DensityCheck check_density(const DensityState& rho) {
    DensityCheck c;
    c.hermiticity = hermiticity_deviation(rho);
    c.trace_error = std::abs(rho.trace() - Complex(1.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        ((rho + rho.adjoint()) / 2.0).eval(), Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

}  // namespace kpo
