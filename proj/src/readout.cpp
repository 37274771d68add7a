#include "kpo/readout.hpp"

#include <cmath>
#include <random>

namespace kpo {

void TelegraphSpec::validate() const {
    if (!(tau_flip > 0)) throw InvalidParams("tau_flip must be > 0");
    if (sample_rate <= 0 || t_end <= 0)
        throw InvalidParams("sample_rate and t_end must be > 0");
    if (sample_rate * t_end < 100)
        throw InvalidParams("need at least 100 samples per trajectory");
    if (initial_state != 1 && initial_state != -1 && initial_state != 0)
        throw InvalidParams("initial_state must be +1, -1 or 0 (random)");
}

std::vector<int8_t> telegraph_trajectory(const TelegraphSpec& spec) {
    spec.validate();
    const long n = std::lround(spec.t_end * spec.sample_rate);
    std::mt19937_64 rng(spec.seed);
    int state = spec.initial_state;
    if (state == 0) state = (rng() & 1) ? 1 : -1;
    std::vector<int8_t> out(n);
    // switching rate per direction; <s(t)> = s(0) e^{-2rt} = s(0) e^{-t/tau}
    const double rate = 1.0 / (2.0 * spec.tau_flip);
    std::exponential_distribution<double> waiting(rate);
    double t_switch = std::isfinite(rate) && rate > 0
                          ? waiting(rng)
                          : std::numeric_limits<double>::infinity();
    for (long k = 0; k < n; ++k) {
        const double t = double(k) / spec.sample_rate;
        while (t >= t_switch) {
            state = -state;
            t_switch += waiting(rng);
        }
        out[k] = int8_t(state);
    }
    return out;
}

std::vector<double> synthesize_if_signal(
    const std::vector<std::vector<int8_t>>& trajectories,
    const std::vector<IfChannel>& channels, double amplitude,
    double sample_rate, double noise_sigma, uint64_t seed,
    double bin_duration) {
    if (trajectories.size() != channels.size() || channels.empty())
        throw InvalidParams("one trajectory per channel required");
    const size_t n = trajectories.front().size();
    for (const auto& tr : trajectories)
        if (tr.size() != n)
            throw DimensionMismatch("trajectories must share the sample grid");
    for (const auto& ch : channels)
        if (ch.if_freq <= 0) throw InvalidParams("IF frequencies must be > 0");
    if (bin_duration > 0) {
        const double min_spacing = 2.0 / bin_duration;
        for (size_t i = 0; i < channels.size(); ++i)
            for (size_t j = i + 1; j < channels.size(); ++j)
                if (std::abs(channels[i].if_freq - channels[j].if_freq) <
                    min_spacing)
                    throw ChannelCollision(
                        "channel spacing below 2/bin_duration");
    }
    std::vector<double> wave(n, 0.0);
    for (size_t c = 0; c < channels.size(); ++c) {
        const double w = 2.0 * M_PI * channels[c].if_freq / sample_rate;
        // carrier via phasor recurrence; drift over a trace is ~1e-13
        const Complex step = std::polar(1.0, w);
        Complex phasor = 1.0;
        const int8_t* s = trajectories[c].data();
        for (size_t k = 0; k < n; ++k) {
            wave[k] += amplitude * double(s[k]) * phasor.real();
            phasor *= step;
        }
    }
    if (noise_sigma > 0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (auto& v : wave) v += noise(rng);
    }
    return wave;
}

std::vector<IqRecord> demodulate(const std::vector<double>& waveform,
                                 const std::vector<IfChannel>& channels,
                                 double sample_rate, double bin_duration,
                                 int trial) {
    const double n_exact = bin_duration * sample_rate;
    const long n_bin = std::lround(n_exact);
    if (n_bin < 16 || std::abs(n_exact - double(n_bin)) > 1e-9 * n_exact)
        throw InvalidBin("bin_duration * sample_rate must be an integer >= 16");
    const long n_bins = long(waveform.size()) / n_bin;
    std::vector<IqRecord> out;
    out.reserve(size_t(n_bins) * channels.size());
    for (long b = 0; b < n_bins; ++b) {
        for (size_t c = 0; c < channels.size(); ++c) {
            const double w = 2.0 * M_PI * channels[c].if_freq / sample_rate;
            // global sample index keeps the demodulation phase continuous
            // across bins; phasor recurrence within the bin
            const Complex step = std::polar(1.0, -w);
            Complex phasor = std::polar(1.0, -w * double(b * n_bin));
            Complex z = 0;
            const double* base = waveform.data() + b * n_bin;
            for (long k = 0; k < n_bin; ++k) {
                z += base[k] * phasor;
                phasor *= step;
            }
            z *= 2.0 / double(n_bin);
            IqRecord rec;
            rec.trial = trial;
            rec.bin = int(b);
            rec.channel = int(c);
            rec.i_val = z.real();
            rec.q_val = z.imag();
            out.push_back(rec);
        }
    }
    return out;
}

void align_iq(std::vector<IqRecord>& records, int n_channels) {
    for (int c = 0; c < n_channels; ++c) {
        Complex m2 = 0;
        long count = 0;
        for (const auto& r : records)
            if (r.channel == c) {
                const Complex z(r.i_val, r.q_val);
                m2 += z * z;
                ++count;
            }
        if (count == 0) continue;
        const Complex rot = std::exp(Complex(0, -std::arg(m2) / 2.0));
        for (auto& r : records)
            if (r.channel == c) {
                const Complex z = Complex(r.i_val, r.q_val) * rot;
                r.i_val = z.real();
                r.q_val = z.imag();
            }
    }
}

std::vector<double> dft_magnitude(const std::vector<double>& waveform) {
    const size_t n = waveform.size();
    std::vector<double> mag(n / 2 + 1, 0.0);
    // Direct DFT; report sizes are small (one bin of samples).
    for (size_t f = 0; f < mag.size(); ++f) {
        Complex z = 0;
        const double w = 2.0 * M_PI * double(f) / double(n);
        for (size_t k = 0; k < n; ++k)
            z += waveform[k] * std::exp(Complex(0, -w * double(k)));
        mag[f] = std::abs(z) / double(n);
    }
    return mag;
}

QuadrantStats quadrant_statistics(const std::vector<IqRecord>& records) {
    long counts[4] = {0, 0, 0, 0};
    std::vector<double> i0, i1;  // first-bin I per trial, per channel
    std::vector<int> trials;
    // collect first-bin records keyed by trial
    struct Pair { double a = 0, b = 0; bool has_a = false, has_b = false; };
    std::vector<Pair> by_trial;
    for (const auto& r : records) {
        if (r.bin != 0) continue;
        if (r.channel > 1) continue;
        if (r.trial >= int(by_trial.size())) by_trial.resize(r.trial + 1);
        if (r.channel == 0) { by_trial[r.trial].a = r.i_val; by_trial[r.trial].has_a = true; }
        else { by_trial[r.trial].b = r.i_val; by_trial[r.trial].has_b = true; }
    }
    long n = 0;
    for (const auto& p : by_trial) {
        if (!p.has_a || !p.has_b) continue;
        const int q = (p.a >= 0 ? 0 : 2) + (p.b >= 0 ? 0 : 1);
        ++counts[q];
        ++n;
    }
    if (n < 100)
        throw InvalidParams("quadrant_statistics needs >= 100 two-channel trials");
    QuadrantStats out;
    out.trials = n;
    for (int q = 0; q < 4; ++q) {
        const double p = double(counts[q]) / double(n);
        out.fraction[q] = p;
        out.error[q] = std::sqrt(p * (1.0 - p) / double(n));
    }
    return out;
}

}  // namespace kpo
