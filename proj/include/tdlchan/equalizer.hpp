// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "tdlchan/channel.hpp"
#include "tdlchan/estimator.hpp"

namespace tdlchan::equalizer {

/// Symbol-spaced channel h_0..h_V. h_0 must be nonzero (it anchors timing)
/// and V <= 8 keeps the 4^V trellis bounded.
struct SymbolChannel {
    std::vector<std::complex<double>> taps;

    int memory() const { return static_cast<int>(taps.size()) - 1; }
    void validate() const;
};

/// Reads gains off the symbol grid: h_k = gain at delay k*samples_per_symbol.
/// An active component (|gain| >= 1e-6) at a non-multiple delay is an error;
/// negligible off-grid energy is ignored. Trailing near-zero taps are trimmed.
SymbolChannel to_symbol_spaced(const channel::TapSet &taps, int samples_per_symbol);
SymbolChannel to_symbol_spaced(const estimator::ChannelEstimate &estimate,
                               int samples_per_symbol);

/// Viterbi search over the QPSK trellis minimizing
/// sum_n |r_n - sum_k h_k s_{n-k}|^2. The transmitted frame is assumed
/// framed by known zeros: s_n = 0 for n < 0 and for the final V observation
/// instants (rx length = data length + V). Returns the data decisions as
/// constellation points.
std::vector<std::complex<double>> mlse_equalize(const std::vector<std::complex<double>> &rx_symbols,
                                                const SymbolChannel &channel);

/// Hamming distance / length.
double compute_ber(const std::vector<std::uint8_t> &decided_bits,
                   const std::vector<std::uint8_t> &true_bits);

} // namespace tdlchan::equalizer
