#pragma once

// Classical emulation of the measurement chain: two-state telegraph
// trajectories, heterodyne IF waveform synthesis for one or more channels,
// DFT demodulation into IQ values, and quadrant-correlation statistics.
// This layer exists to validate the binning/fitting analysis against a
// known flip time, not to model the quantum dynamics.

#include <cstdint>
#include <string>
#include <vector>

#include "kpo/bitflip.hpp"

namespace kpo {

struct TelegraphSpec {
    double tau_flip = 5e-6;    // seconds; ensemble mean decays as e^{-t/tau}
    double amplitude = 1.0;    // carrier amplitude of one qubit state
    double t_end = 20e-6;
    double sample_rate = 250e6;
    int initial_state = 0;     // +1, -1, or 0 = random
    uint64_t seed = 0;

    void validate() const;
};

struct IfChannel {
    double if_freq = 0;  // Hz
    std::string label;
};

struct IqRecord {
    int trial = 0;
    int bin = 0;
    int channel = 0;
    double i_val = 0;
    double q_val = 0;
};

// ±1 state sampled on the uniform grid; continuous-time Markov switching
// at rate 1/(2 tau_flip) per direction, reproducible from the seed.
std::vector<int8_t> telegraph_trajectory(const TelegraphSpec& spec);

// Sum over channels of amplitude * s_k(t) * cos(2 pi f_k t), where the ±1
// telegraph state enters as a pi phase flip, plus white Gaussian noise.
std::vector<double> synthesize_if_signal(
    const std::vector<std::vector<int8_t>>& trajectories,
    const std::vector<IfChannel>& channels, double amplitude,
    double sample_rate, double noise_sigma, uint64_t seed,
    double bin_duration);

// Per bin and channel: I + iQ = (2/N) sum_k w_k e^{-i 2 pi f t_k} with a
// rectangular window. Raw values; see align_iq for the plane rotation.
std::vector<IqRecord> demodulate(const std::vector<double>& waveform,
                                 const std::vector<IfChannel>& channels,
                                 double sample_rate, double bin_duration,
                                 int trial = 0);

// Rotates each channel's IQ cloud so the two states sit on the I axis
// (estimated from the mean of (I+iQ)^2 over all records of the channel).
void align_iq(std::vector<IqRecord>& records, int n_channels);

// Magnitude spectrum |DFT|/N of the waveform, for spectrum reports.
std::vector<double> dft_magnitude(const std::vector<double>& waveform);

struct QuadrantStats {
    // fractions of (sign I_ch0, sign I_ch1): ++, +-, -+, --
    double fraction[4] = {0, 0, 0, 0};
    double error[4] = {0, 0, 0, 0};  // binomial standard errors
    long trials = 0;
};

// Uses the first bin of each trial for the two channels.
QuadrantStats quadrant_statistics(const std::vector<IqRecord>& records);

}  // namespace kpo
