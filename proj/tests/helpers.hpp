// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "tdlchan/channel.hpp"
#include "tdlchan/signal.hpp"

namespace testutil {

using cplx = std::complex<double>;

// White unit-power QPSK pilot (one sample per symbol).
inline tdlchan::signal::ComplexSignal white_pilot(std::size_t n, std::uint64_t seed) {
    using namespace tdlchan::signal;
    return oversample(qpsk_modulate(generate_bits(2 * n, seed)), 1, 5e7);
}

inline tdlchan::channel::TapSet make_tapset(const std::vector<std::pair<int, cplx>> &taps,
                                            int transmitter_id = 0) {
    tdlchan::channel::TapSet set;
    set.transmitter_id = transmitter_id;
    for (const auto &[d, g] : taps)
        set.taps.push_back({d, g});
    return set;
}

// Direct-sum convolution oracle, independent of apply_channel's loop.
inline std::vector<cplx> convolve_oracle(const std::vector<cplx> &x,
                                         const tdlchan::channel::TapSet &taps,
                                         std::size_t out_len) {
    std::vector<cplx> y(out_len, {0.0, 0.0});
    for (std::size_t n = 0; n < out_len; ++n) {
        for (const auto &t : taps.taps) {
            const long k = static_cast<long>(n) - t.delay_samples;
            if (k >= 0 && static_cast<std::size_t>(k) < x.size())
                y[n] += t.gain * x[static_cast<std::size_t>(k)];
        }
    }
    return y;
}

} // namespace testutil
