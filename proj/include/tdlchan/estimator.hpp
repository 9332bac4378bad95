// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "tdlchan/channel.hpp"
#include "tdlchan/signal.hpp"

namespace tdlchan::estimator {

/// Tapped-delay-line estimator configuration. Taps sit at delays
/// 0, tap_resolution, ..., num_taps * tap_resolution samples.
struct TdlConfig {
    int num_taps = 0;           // L; weights indexed 0..L
    int tap_resolution = 1;     // tau, in samples
    int num_transmitters = 1;   // M
    double learning_rate = 0.01;
    int epochs = 5000;
    std::size_t block_size = 0; // N, pilot samples per fit
    std::optional<double> prune_threshold;

    int weights_per_tx() const { return num_taps + 1; }
    int weight_count() const { return num_transmitters * (num_taps + 1); }
    void validate() const;
};

/// M x (L+1) complex weight matrix plus the per-epoch MSE trace.
struct ChannelEstimate {
    std::vector<std::complex<double>> weights; // row-major, transmitter-major
    std::vector<double> loss_trace;
    TdlConfig config;

    std::complex<double> weight(int m, int i) const {
        return weights[static_cast<std::size_t>(m) * (config.num_taps + 1) + i];
    }
    std::complex<double> &weight(int m, int i) {
        return weights[static_cast<std::size_t>(m) * (config.num_taps + 1) + i];
    }
};

/// One pilot observation window: the M known transmitted pilots and the
/// received pilot they produced.
struct PilotFrame {
    std::vector<signal::ComplexSignal> tx_pilots;
    signal::ComplexSignal rx_pilot;
};

/// Rows 0..L, row i = x delayed by i*tau samples (zero-filled on the left).
std::vector<std::vector<std::complex<double>>>
build_shift_bank(const signal::ComplexSignal &x, int L, int tau);

/// Full-batch gradient descent on J(c) = (1/N) sum_n |y_n - yhat_n|^2 with
/// yhat_n = sum_m sum_i c_{m,i} x_{m,n-i*tau}, conjugate (Wirtinger) update
/// c <- c - lr * (2/N) * sum_n (yhat_n - y_n) * conj(x_{m,n-i*tau}),
/// zero-initialized weights, exactly `epochs` iterations, no early stopping.
/// Implemented through precomputed pilot correlations, which reproduces the
/// per-sample update exactly up to floating-point summation order.
/// If prune_threshold is set, weights below it are zeroed once at the end.
ChannelEstimate fit(const TdlConfig &config,
                    const std::vector<signal::ComplexSignal> &tx_pilots,
                    const signal::ComplexSignal &rx_pilot);

/// Exact minimizer of the same objective via the complex normal equations
/// (A^H A) c = A^H y over the stacked shift banks of all M transmitters.
/// Independent implementation path from fit: the design is materialized with
/// build_shift_bank and solved densely. Throws singularity_error with a
/// condition estimate when the design is rank-deficient.
ChannelEstimate fit_ls_oracle(const std::vector<signal::ComplexSignal> &tx_pilots,
                              const signal::ComplexSignal &rx_pilot, int L, int tau);

/// Per-frame tracking: frame 0 gets a full fit, frame k >= 1 is warm-started
/// from frame k-1 with a budget of max(1, epochs/10) iterations.
std::vector<ChannelEstimate> fit_sequence(const TdlConfig &config,
                                          const std::vector<PilotFrame> &frames);

/// Entries with |c| < threshold set to exactly 0.
ChannelEstimate prune(ChannelEstimate estimate, double threshold);

/// Root mean squared entry deviation between the estimate and the truth
/// expanded onto the dense M x (L+1) grid (zeros off-path). Truth delays must
/// be multiples of tap_resolution and at most L * tap_resolution.
double rmse(const ChannelEstimate &estimate, const std::vector<channel::TapSet> &truth);

} // namespace tdlchan::estimator
