// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/signal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tdlchan/rng.hpp"

namespace tdlchan::signal {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

// Gray map, bit pair (b0, b1) -> point. First bit selects the imaginary
// sign, second bit the real sign.
std::complex<double> map_pair(int b0, int b1) {
    return {(1 - 2 * b1) * kInvSqrt2, (1 - 2 * b0) * kInvSqrt2};
}

} // namespace

void ComplexSignal::validate() const {
    if (samples.empty())
        throw std::invalid_argument("ComplexSignal: empty sample vector");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("ComplexSignal: sample_rate_hz must be positive");
    for (const auto &s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("ComplexSignal: non-finite sample");
    }
}

void ModulationConfig::validate() const {
    if (symbol_count == 0)
        throw std::invalid_argument("ModulationConfig: symbol_count must be positive");
    if (samples_per_symbol < 1)
        throw std::invalid_argument("ModulationConfig: samples_per_symbol must be >= 1");
    if (!(sample_period_s > 0.0))
        throw std::invalid_argument("ModulationConfig: sample_period_s must be positive");
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("ModulationConfig: carrier_hz must be positive");
}

std::vector<std::uint8_t> generate_bits(std::size_t count, std::uint64_t seed) {
    if (count == 0)
        throw std::invalid_argument("generate_bits: count must be >= 1");
    Rng rng(seed);
    std::vector<std::uint8_t> bits(count);
    for (auto &b : bits)
        b = static_cast<std::uint8_t>(rng.bit());
    return bits;
}

std::vector<std::complex<double>> qpsk_modulate(const std::vector<std::uint8_t> &bits) {
    if (bits.size() % 2 != 0)
        throw std::invalid_argument("qpsk_modulate: bit count must be even");
    std::vector<std::complex<double>> symbols(bits.size() / 2);
    for (std::size_t k = 0; k < symbols.size(); ++k)
        symbols[k] = map_pair(bits[2 * k], bits[2 * k + 1]);
    return symbols;
}

std::vector<std::uint8_t> qpsk_demodulate(const std::vector<std::complex<double>> &symbols) {
    std::vector<std::uint8_t> bits;
    bits.reserve(2 * symbols.size());
    for (const auto &s : symbols) {
        // Sign slicing; exact zeros fall on the positive side, which is the
        // smaller Gray index of the tied pair.
        bits.push_back(static_cast<std::uint8_t>(s.imag() < 0.0));
        bits.push_back(static_cast<std::uint8_t>(s.real() < 0.0));
    }
    return bits;
}

ComplexSignal oversample(const std::vector<std::complex<double>> &symbols,
                         int samples_per_symbol, double sample_rate_hz) {
    if (samples_per_symbol < 1)
        throw std::invalid_argument("oversample: samples_per_symbol must be >= 1");
    ComplexSignal out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.reserve(symbols.size() * static_cast<std::size_t>(samples_per_symbol));
    for (const auto &s : symbols)
        out.samples.insert(out.samples.end(), static_cast<std::size_t>(samples_per_symbol), s);
    return out;
}

double mean_power(const std::vector<std::complex<double>> &samples) {
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (const auto &s : samples)
        acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

ComplexSignal add_awgn(const ComplexSignal &in, double snr_db, std::uint64_t seed) {
    if (in.samples.empty())
        throw std::invalid_argument("add_awgn: empty signal");
    if (std::isinf(snr_db) && snr_db > 0.0)
        return in;
    const double p_signal = mean_power(in.samples);
    const double noise_var = p_signal / std::pow(10.0, snr_db / 10.0);
    const double scale = std::sqrt(noise_var);
    Rng rng(seed);
    ComplexSignal out = in;
    for (auto &s : out.samples)
        s += scale * rng.complex_gaussian();
    return out;
}

} // namespace tdlchan::signal
