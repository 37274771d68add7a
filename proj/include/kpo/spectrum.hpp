#pragma once

// Eigenstructure of the KPO Hamiltonian: ordered eigenenergies, excitation
// energies E_ij, the pump-collision report, and the avoided-crossing
// estimate for two coupled linear modes.

#include <vector>

#include "kpo/model.hpp"

namespace kpo {

struct SpectrumResult {
    Eigen::VectorXd energies;     // rad/s, sorted descending (K<0 convention)
    OperatorMatrix eigenvectors;  // columns match energies
    int dim = 0;
};

// Full dense Hermitian eigendecomposition, descending energy order.
SpectrumResult diagonalize(const OperatorMatrix& h);

// E_ij = omega_j - omega_i, i < j in descending-energy indexing
// (negative for K < 0).
double excitation_energy(const SpectrumResult& spec, int i, int j);

struct CollisionEntry {
    int kpo = 0;        // 1 or 2
    int i = 0, j = 0;   // descending-order eigenstate indexes, i < j
    double e_ij = 0;    // rad/s
    double margin = 0;  // |Delta_p - E_ij|, rad/s
    bool flagged = false;
};

struct CollisionReport {
    std::vector<CollisionEntry> entries;
    double threshold = 0;
    double energy_cutoff = 0;
};

// For each KPO, lists E_ij among confined levels (within the well-depth
// scale below the ground doublet) and flags pairs with
// |Delta_p - E_ij| < threshold. A cutoff of 0 means "use 2p of that KPO".
//
// Two cleanups keep the report one-row-per-resonance:
//  - intra-doublet pairs (|E_ij| below the degeneracy tolerance, e.g. the
//    (0,1) qubit doublet) are not excitation channels and are excluded
//    unless include_ground_doublet is set;
//  - pairs whose E_ij coincide within the degeneracy tolerance collapse
//    onto the lowest-index representative, so the fourfold-degenerate
//    {(0,2),(0,3),(1,2),(1,3)} group reports as (0,2).
CollisionReport collision_report(const TwoKpoParams& two, FockDim dim,
                                 double threshold, double energy_cutoff = 0,
                                 bool include_ground_doublet = false,
                                 double degeneracy_tol = kTwoPi * 0.1e6);

// Eigenvalue gap of [[w1, g], [g, w2]]: sqrt((w1-w2)^2 + 4g^2).
double avoided_crossing_splitting(double omega1, double omega2, double g);

}  // namespace kpo
