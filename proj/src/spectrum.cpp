#include "kpo/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace kpo {

namespace {

bool parity_block_diagonal(const OperatorMatrix& h) {
    const double scale = h.cwiseAbs().maxCoeff();
    if (scale == 0) return true;
    double off = 0;
    for (int j = 0; j < h.cols(); ++j)
        for (int i = (j + 1) % 2; i < h.rows(); i += 2)
            off = std::max(off, std::abs(h(i, j)));
    return off < 1e-14 * scale;
}

}  // namespace

SpectrumResult diagonalize(const OperatorMatrix& h) {
    if (h.rows() != h.cols()) throw DimensionMismatch("H not square");
    if (hermiticity_deviation(h) > 1e-10)
        throw NotHermitian("diagonalize: H is not Hermitian");
    const int n = int(h.rows());
    Eigen::VectorXd vals(n);
    OperatorMatrix vecs(n, n);
    if (parity_block_diagonal(h)) {
        // Even/odd photon-number sectors decouple exactly for the
        // undriven KPO Hamiltonian; diagonalizing them separately keeps
        // each eigenvector at definite parity even inside the
        // quasi-degenerate doublets.
        int col = 0;
        for (int par = 0; par < 2; ++par) {
            std::vector<int> idx;
            for (int i = par; i < n; i += 2) idx.push_back(i);
            const int m = int(idx.size());
            OperatorMatrix block(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) block(i, j) = h(idx[i], idx[j]);
            Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(block);
            if (es.info() != Eigen::Success)
                throw Error("diagonalize: eigensolver failed");
            for (int k = 0; k < m; ++k, ++col) {
                vals(col) = es.eigenvalues()(k);
                vecs.col(col).setZero();
                for (int i = 0; i < m; ++i)
                    vecs(idx[i], col) = es.eigenvectors()(i, k);
            }
        }
    } else {
        Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h);
        if (es.info() != Eigen::Success)
            throw Error("diagonalize: eigensolver failed");
        vals = es.eigenvalues();
        vecs = es.eigenvectors();
    }
    std::vector<int> order(n);
    for (int k = 0; k < n; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return vals(a) > vals(b); });
    SpectrumResult out;
    out.dim = n;
    out.energies.resize(n);
    out.eigenvectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        out.energies(k) = vals(order[k]);
        out.eigenvectors.col(k) = vecs.col(order[k]);
    }
    return out;
}

double excitation_energy(const SpectrumResult& spec, int i, int j) {
    if (i < 0 || j < 0 || i >= j || j >= spec.dim)
        throw IndexError("excitation_energy requires 0 <= i < j < dim");
    return spec.energies(j) - spec.energies(i);
}

CollisionReport collision_report(const TwoKpoParams& two, FockDim dim,
                                 double threshold, double energy_cutoff,
                                 bool include_ground_doublet,
                                 double degeneracy_tol) {
    if (threshold <= 0) throw InvalidParams("collision threshold must be > 0");
    two.validate();
    CollisionReport report;
    report.threshold = threshold;
    report.energy_cutoff = energy_cutoff;
    const KpoParams* kpos[2] = {&two.kpo1, &two.kpo2};
    for (int k = 0; k < 2; ++k) {
        const KpoParams& p = *kpos[k];
        const double cutoff =
            energy_cutoff > 0 ? energy_cutoff : 2.0 * p.pump_amplitude;
        SpectrumResult spec = diagonalize(build_single_kpo(p, dim));
        // Energies are measured from the ground doublet; "confined" means
        // within the well-depth scale of the top of the ladder.
        const double e0 = spec.energies(0);
        int n_confined = 0;
        while (n_confined < spec.dim &&
               std::abs(spec.energies(n_confined) - e0) <= cutoff)
            ++n_confined;
        std::vector<double> seen;  // E_ij already reported for this KPO
        for (int i = 0; i < n_confined; ++i) {
            for (int j = i + 1; j < n_confined; ++j) {
                const double e_ij = excitation_energy(spec, i, j);
                if (std::abs(e_ij) < degeneracy_tol && !include_ground_doublet)
                    continue;  // intra-doublet pair, not a leakage channel
                const bool dup =
                    std::any_of(seen.begin(), seen.end(), [&](double e) {
                        return std::abs(e - e_ij) < degeneracy_tol;
                    });
                if (dup) continue;
                seen.push_back(e_ij);
                CollisionEntry e;
                e.kpo = k + 1;
                e.i = i;
                e.j = j;
                e.e_ij = e_ij;
                e.margin = std::abs(two.pump_freq_halfdiff - e_ij);
                e.flagged = e.margin < threshold;
                report.entries.push_back(e);
            }
        }
    }
    return report;
}

double avoided_crossing_splitting(double omega1, double omega2, double g) {
    if (g < 0) throw InvalidParams("coupling must be >= 0");
    const double d = omega1 - omega2;
    return std::sqrt(d * d + 4.0 * g * g);
}

}  // namespace kpo
