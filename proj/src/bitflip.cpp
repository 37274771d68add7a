#include "kpo/bitflip.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace kpo {

BinnedTrace bin_samples(const std::vector<double>& times,
                        const std::vector<double>& values, double bin_width) {
    if (times.size() != values.size() || times.size() < 2)
        throw InvalidParams("bin_samples: need matching time/value arrays");
    const double stride = times[1] - times[0];
    if (bin_width < 2.0 * stride)
        throw InvalidBinWidth("bin width must be at least twice the stride");
    BinnedTrace out;
    out.bin_width = bin_width;
    const double t0 = times.front();
    // full bins covered by the sampled duration; a trailing partial bin
    // (including a lone endpoint sample) is dropped
    const double covered = times.back() - t0 + stride;
    const int n_bins = int(std::floor(covered / bin_width + 1e-9));
    if (n_bins < 1) throw InvalidBinWidth("bin width exceeds trace span");
    size_t j = 0;
    for (int b = 0; b < n_bins; ++b) {
        const double hi = t0 + (b + 1) * bin_width;
        double sum = 0;
        int count = 0;
        while (j < times.size() && times[j] < hi - 1e-9 * stride) {
            sum += values[j];
            ++count;
            ++j;
        }
        if (count == 0) throw InvalidBinWidth("empty bin in trace");
        out.bin_centers.push_back(hi - bin_width / 2.0);
        out.bin_means.push_back(sum / count);
    }
    return out;
}

BinnedTrace bin_trace(const TimeSeries& series, double bin_width) {
    std::vector<double> re(series.values.size());
    for (size_t k = 0; k < series.values.size(); ++k)
        re[k] = series.values[k].real();
    return bin_samples(series.times, re, bin_width);
}

FitResult fit_exponential(const BinnedTrace& trace) {
    const int m = int(trace.bin_means.size());
    if (m < 3) throw InvalidParams("fit_exponential: need at least 3 bins");
    const double first = trace.bin_means.front();
    bool all_equal = true;
    for (double v : trace.bin_means)
        if (v != first) { all_equal = false; break; }
    if (all_equal) throw FitDiverged("constant trace has no decay constant");

    const bool weighted = trace.bin_errors.size() == trace.bin_means.size();
    auto sigma = [&](int k) {
        return weighted && trace.bin_errors[k] > 0 ? trace.bin_errors[k] : 1.0;
    };

    const double horizon = trace.bin_centers.back() - trace.bin_centers.front() +
                           trace.bin_width;
    double A = first;
    double tau = horizon / 2.0;
    double lambda = 1e-3;

    auto chi2 = [&](double a, double tu) {
        double s = 0;
        for (int k = 0; k < m; ++k) {
            const double r =
                (trace.bin_means[k] - a * std::exp(-trace.bin_centers[k] / tu)) /
                sigma(k);
            s += r * r;
        }
        return s;
    };

    double cost = chi2(A, tau);
    Eigen::Matrix2d jtj_last = Eigen::Matrix2d::Zero();
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
        Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
        for (int k = 0; k < m; ++k) {
            const double t = trace.bin_centers[k];
            const double e = std::exp(-t / tau);
            const double w = 1.0 / sigma(k);
            const double r = (trace.bin_means[k] - A * e) * w;
            const Eigen::Vector2d j(e * w, A * t / (tau * tau) * e * w);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        jtj_last = jtj;
        Eigen::Matrix2d damped = jtj;
        damped(0, 0) *= (1.0 + lambda);
        damped(1, 1) *= (1.0 + lambda);
        const Eigen::Vector2d step = damped.ldlt().solve(jtr);
        const double a_new = A + step(0);
        const double tau_new = tau + step(1);
        if (!std::isfinite(a_new) || !std::isfinite(tau_new) || tau_new <= 0) {
            lambda *= 10;
            if (lambda > 1e12) throw FitDiverged("optimizer failed to progress");
            continue;
        }
        const double cost_new = chi2(a_new, tau_new);
        if (cost_new < cost) {
            const bool small = std::abs(step(0)) < 1e-12 * std::abs(A) + 1e-300 &&
                               std::abs(step(1)) < 1e-12 * tau;
            A = a_new;
            tau = tau_new;
            cost = cost_new;
            lambda = std::max(lambda / 10, 1e-12);
            if (small) { converged = true; break; }
        } else {
            lambda *= 10;
            if (lambda > 1e12) { converged = true; break; }  // stuck at minimum
        }
    }
    if (!converged && !(cost < std::numeric_limits<double>::infinity()))
        throw FitDiverged("exponential fit did not converge");
    if (tau <= 0) throw NonPositiveTau("fitted tau is not positive");
    if (tau > 1e6 * horizon) throw FitDiverged("tau vastly exceeds the horizon");

    FitResult out;
    out.amplitude = A;
    out.tau = tau;
    if (tau > kTauReportingCap) {
        out.tau = kTauReportingCap;
        out.tau_capped = true;
    }
    out.residual_rms = std::sqrt(cost / m);
    // covariance of the weighted problem; for the unweighted case scale by
    // the residual variance
    Eigen::Matrix2d cov = jtj_last.inverse();
    double scale = 1.0;
    if (!weighted && m > 2) scale = cost / (m - 2);
    out.tau_error = std::sqrt(std::max(cov(1, 1) * scale, 0.0));
    return out;
}

namespace {

BinnedTrace mean_of(const std::vector<const BinnedTrace*>& sel,
                    const std::vector<double>& signs) {
    const BinnedTrace& first = *sel.front();
    const size_t nb = first.bin_means.size();
    BinnedTrace out;
    out.bin_width = first.bin_width;
    out.bin_centers = first.bin_centers;
    out.bin_means.assign(nb, 0.0);
    std::vector<double> sq(nb, 0.0);
    for (size_t t = 0; t < sel.size(); ++t) {
        const auto& trial = *sel[t];
        if (trial.bin_means.size() != nb)
            throw DimensionMismatch("trials have differing bin counts");
        for (size_t b = 0; b < nb; ++b) {
            const double v = signs[t] * trial.bin_means[b];
            out.bin_means[b] += v;
            sq[b] += v * v;
        }
    }
    const double n = double(sel.size());
    for (size_t b = 0; b < nb; ++b) {
        out.bin_means[b] /= n;
        if (sel.size() > 1) {
            const double var = (sq[b] / n - out.bin_means[b] * out.bin_means[b]) /
                               (n - 1.0);
            out.bin_errors.push_back(std::sqrt(std::max(var, 0.0)));
        }
    }
    return out;
}

}  // namespace

BinnedTrace conditional_select(
    const std::vector<BinnedTrace>& trials,
    const std::function<bool(double)>& first_bin_predicate) {
    if (trials.empty()) throw InvalidParams("conditional_select: no trials");
    std::vector<const BinnedTrace*> sel;
    for (const auto& t : trials)
        if (!t.bin_means.empty() && first_bin_predicate(t.bin_means.front()))
            sel.push_back(&t);
    if (sel.empty()) throw EmptySelection("no trial satisfies the predicate");
    return mean_of(sel, std::vector<double>(sel.size(), 1.0));
}

BinnedTrace sign_folded_mean(const std::vector<BinnedTrace>& trials) {
    if (trials.empty()) throw InvalidParams("sign_folded_mean: no trials");
    std::vector<const BinnedTrace*> sel;
    std::vector<double> signs;
    for (const auto& t : trials) {
        if (t.bin_means.empty()) continue;
        sel.push_back(&t);
        signs.push_back(t.bin_means.front() < 0 ? -1.0 : 1.0);
    }
    if (sel.empty()) throw EmptySelection("no usable trials");
    return mean_of(sel, signs);
}

}  // namespace kpo
