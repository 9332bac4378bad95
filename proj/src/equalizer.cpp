// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/equalizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tdlchan::equalizer {

namespace {

using cplx = std::complex<double>;

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kActiveThreshold = 1e-6;

// QPSK alphabet plus index 4 = known zero padding.
const cplx kPoints[5] = {
    {kInvSqrt2, kInvSqrt2},
    {-kInvSqrt2, kInvSqrt2},
    {kInvSqrt2, -kInvSqrt2},
    {-kInvSqrt2, -kInvSqrt2},
    {0.0, 0.0},
};

SymbolChannel from_grid(const std::vector<cplx> &gains,
                        const std::vector<int> &delays, int samples_per_symbol) {
    if (samples_per_symbol < 1)
        throw std::invalid_argument("to_symbol_spaced: samples_per_symbol must be >= 1");

    int max_index = -1;
    for (std::size_t k = 0; k < gains.size(); ++k) {
        if (delays[k] % samples_per_symbol == 0) {
            if (std::abs(gains[k]) >= kActiveThreshold)
                max_index = std::max(max_index, delays[k] / samples_per_symbol);
        } else if (std::abs(gains[k]) >= kActiveThreshold) {
            throw std::invalid_argument("to_symbol_spaced: active tap at off-grid delay " +
                                        std::to_string(delays[k]));
        }
    }
    if (max_index < 0)
        throw std::invalid_argument("to_symbol_spaced: no active taps on the symbol grid");

    SymbolChannel out;
    out.taps.assign(static_cast<std::size_t>(max_index) + 1, {0.0, 0.0});
    for (std::size_t k = 0; k < gains.size(); ++k) {
        if (delays[k] % samples_per_symbol == 0 && delays[k] / samples_per_symbol <= max_index)
            out.taps[static_cast<std::size_t>(delays[k] / samples_per_symbol)] += gains[k];
    }
    out.validate();
    return out;
}

} // namespace

void SymbolChannel::validate() const {
    if (taps.empty())
        throw std::invalid_argument("SymbolChannel: no taps");
    if (std::abs(taps.front()) < kActiveThreshold)
        throw std::invalid_argument("SymbolChannel: leading tap must be nonzero");
    if (memory() > 8)
        throw std::invalid_argument("SymbolChannel: memory V must be <= 8");
    for (const auto &h : taps) {
        if (!std::isfinite(h.real()) || !std::isfinite(h.imag()))
            throw std::invalid_argument("SymbolChannel: non-finite tap");
    }
}

SymbolChannel to_symbol_spaced(const channel::TapSet &taps, int samples_per_symbol) {
    std::vector<cplx> gains;
    std::vector<int> delays;
    gains.reserve(taps.taps.size());
    delays.reserve(taps.taps.size());
    for (const auto &t : taps.taps) {
        gains.push_back(t.gain);
        delays.push_back(t.delay_samples);
    }
    return from_grid(gains, delays, samples_per_symbol);
}

SymbolChannel to_symbol_spaced(const estimator::ChannelEstimate &estimate,
                               int samples_per_symbol) {
    // Equalization is a single-link operation; the primary transmitter's row
    // (m = 0) is the channel of interest.
    const int L = estimate.config.num_taps;
    const int tau = estimate.config.tap_resolution;
    std::vector<cplx> gains;
    std::vector<int> delays;
    gains.reserve(static_cast<std::size_t>(L) + 1);
    delays.reserve(static_cast<std::size_t>(L) + 1);
    for (int i = 0; i <= L; ++i) {
        gains.push_back(estimate.weight(0, i));
        delays.push_back(i * tau);
    }
    return from_grid(gains, delays, samples_per_symbol);
}

std::vector<cplx> mlse_equalize(const std::vector<cplx> &rx_symbols,
                                const SymbolChannel &channel) {
    channel.validate();
    const int V = channel.memory();
    const std::size_t T = rx_symbols.size();
    if (T < static_cast<std::size_t>(V) + 1)
        throw std::invalid_argument("mlse_equalize: need at least V+1 observations");
    const std::size_t D = T - static_cast<std::size_t>(V); // data decisions

    if (V == 0) {
        // Memoryless channel: per-symbol minimum-distance slicing.
        std::vector<cplx> decisions(D);
        for (std::size_t t = 0; t < D; ++t) {
            int best = 0;
            double best_metric = std::numeric_limits<double>::infinity();
            for (int a = 0; a < 4; ++a) {
                const double m = std::norm(rx_symbols[t] - channel.taps[0] * kPoints[a]);
                if (m < best_metric) {
                    best_metric = m;
                    best = a;
                }
            }
            decisions[t] = kPoints[static_cast<std::size_t>(best)];
        }
        return decisions;
    }

    // Trellis over base-5 states (QPSK symbols plus the known zero padding);
    // digit d of a state is the symbol index at lag d+1.
    std::size_t num_states = 1;
    for (int d = 0; d < V; ++d)
        num_states *= 5;
    const std::size_t high = num_states / 5; // 5^(V-1)

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> metric(num_states, inf);
    std::vector<double> next_metric(num_states, inf);
    std::size_t init_state = 0;
    for (int d = 0; d < V; ++d)
        init_state = init_state * 5 + 4;
    metric[init_state] = 0.0;

    // backpointer = oldest digit dropped by the winning transition
    std::vector<std::uint8_t> bp(T * num_states, 0);

    std::vector<cplx> tail(num_states); // ISI from the state (lags 1..V)
    for (std::size_t s = 0; s < num_states; ++s) {
        cplx acc{0.0, 0.0};
        std::size_t digits = s;
        for (int d = 0; d < V; ++d) {
            acc += channel.taps[static_cast<std::size_t>(d) + 1] * kPoints[digits % 5];
            digits /= 5;
        }
        tail[s] = acc;
    }

    for (std::size_t t = 0; t < T; ++t) {
        std::fill(next_metric.begin(), next_metric.end(), inf);
        const int a_first = (t < D) ? 0 : 4;
        const int a_last = (t < D) ? 3 : 4;
        for (std::size_t s = 0; s < num_states; ++s) {
            if (metric[s] == inf)
                continue;
            const std::size_t dropped = s / high;
            const std::size_t kept = (s % high) * 5;
            for (int a = a_first; a <= a_last; ++a) {
                const cplx expected = channel.taps[0] * kPoints[a] + tail[s];
                const double cand = metric[s] + std::norm(rx_symbols[t] - expected);
                const std::size_t ns = kept + static_cast<std::size_t>(a);
                if (cand < next_metric[ns]) {
                    next_metric[ns] = cand;
                    bp[t * num_states + ns] = static_cast<std::uint8_t>(dropped);
                }
            }
        }
        metric.swap(next_metric);
    }

    std::size_t state = 0;
    double best = inf;
    for (std::size_t s = 0; s < num_states; ++s) {
        if (metric[s] < best) {
            best = metric[s];
            state = s;
        }
    }

    std::vector<int> inputs(T, 4);
    for (std::size_t t = T; t-- > 0;) {
        inputs[t] = static_cast<int>(state % 5);
        state = state / 5 + static_cast<std::size_t>(bp[t * num_states + state]) * high;
    }

    std::vector<cplx> decisions(D);
    for (std::size_t t = 0; t < D; ++t)
        decisions[t] = kPoints[static_cast<std::size_t>(inputs[t])];
    return decisions;
}

double compute_ber(const std::vector<std::uint8_t> &decided_bits,
                   const std::vector<std::uint8_t> &true_bits) {
    if (decided_bits.size() != true_bits.size())
        throw std::invalid_argument("compute_ber: bit sequence lengths differ");
    if (decided_bits.empty())
        throw std::invalid_argument("compute_ber: empty bit sequences");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < decided_bits.size(); ++i)
        errors += (decided_bits[i] != true_bits[i]) ? 1u : 0u;
    return static_cast<double>(errors) / static_cast<double>(decided_bits.size());
}

} // namespace tdlchan::equalizer
