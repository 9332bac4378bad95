// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace tdlchan {

/// Derives an independent stream seed from (seed, stream index) with a
/// splitmix64 finalizer, so parallel grid points never share a keystream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator used by every randomized operation. Extraction of
/// uniforms and Gaussians is hand-rolled on top of the (standardized)
/// mt19937_64 keystream, so sequences are identical across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    int bit() { return static_cast<int>(eng_() & 1u); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (second value cached).
    double gaussian();

    /// Circularly-symmetric complex Gaussian, E|z|^2 = 1.
    std::complex<double> complex_gaussian();

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace tdlchan
