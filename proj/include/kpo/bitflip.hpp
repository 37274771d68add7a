#pragma once

// Turns a decaying observable trace into a bit-flip time: temporal
// binning, A*exp(-t/tau) least-squares fitting, and the first-bin
// conditional selection used for telegraph-style single-shot ensembles.

#include <functional>
#include <vector>

#include "kpo/dynamics.hpp"

namespace kpo {

struct BinnedTrace {
    std::vector<double> bin_centers;  // seconds
    std::vector<double> bin_means;
    std::vector<double> bin_errors;   // standard errors; empty = unweighted
    double bin_width = 0;
};

struct FitResult {
    double amplitude = 0;
    double tau = 0;          // seconds
    double tau_error = 0;    // seconds
    double residual_rms = 0;
    bool tau_capped = false; // hit the 1 ms reporting cap; not trustworthy
};

inline constexpr double kTauReportingCap = 1e-3;  // seconds

// Non-overlapping means of the real part; a trailing partial bin is
// dropped. Requires bin_width >= 2 * series stride.
BinnedTrace bin_trace(const TimeSeries& series, double bin_width);

BinnedTrace bin_samples(const std::vector<double>& times,
                        const std::vector<double>& values, double bin_width);

// Damped least squares for (A, tau) on the bin means, weighted by
// bin_errors when present; tau_error comes from the fit covariance.
FitResult fit_exponential(const BinnedTrace& trace);

// Mean trace over the trials whose first bin satisfies the predicate.
BinnedTrace conditional_select(const std::vector<BinnedTrace>& trials,
                               const std::function<bool(double)>& first_bin_predicate);

// The paper's combined two-sided evaluation: trials starting negative are
// negated before averaging.
BinnedTrace sign_folded_mean(const std::vector<BinnedTrace>& trials);

}  // namespace kpo
