// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "tdlchan/signal.hpp"

namespace tdlchan::baselines {

/// Time-domain impulse response recovered from the frequency-domain
/// least-squares channel estimate.
struct CsiVector {
    std::vector<std::complex<double>> impulse_response;
    double regularization_eps = 1e-12;
};

/// H_k = Y_k conj(X_k) / (|X_k|^2 + eps) per frequency bin, then inverse
/// transform. eps regularizes the pilot's spectral nulls; eps = 0 recovers
/// plain bin division.
CsiVector csi_frequency_ls(const signal::ComplexSignal &tx_pilot,
                           const signal::ComplexSignal &rx_pilot, double eps = 1e-12);

struct AdaptiveResult {
    std::vector<std::complex<double>> weights; // length L+1
    std::vector<double> error_trace;           // |e_n|^2 per sample
};

/// Sample-recursive LMS identification of rx from the length-(L+1) window of
/// delayed tx samples: prediction yhat_n = sum_i w_i x_{n-i},
/// w_i += mu * conj(x_{n-i}) * (y_n - yhat_n).
AdaptiveResult lms_estimate(const signal::ComplexSignal &tx_pilot,
                            const signal::ComplexSignal &rx_pilot, int L,
                            double step_mu = 0.01);

/// Exponentially-weighted recursive least squares over the same window,
/// inverse-correlation matrix initialized to (1/delta) * I.
AdaptiveResult rls_estimate(const signal::ComplexSignal &tx_pilot,
                            const signal::ComplexSignal &rx_pilot, int L,
                            double forgetting_lambda = 0.99, double delta = 1e-2);

} // namespace tdlchan::baselines
