// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace tdlchan::signal {

/// Discretized complex baseband sequence.
struct ComplexSignal {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 0.0;

    /// Checks length >= 1, finite samples, positive sample rate.
    void validate() const;
};

/// Transmit-side configuration. tx_power_dbm and rx_gain_db are link-budget
/// bookkeeping only; every estimator-facing quantity is a dimensionless
/// baseband amplitude and SNR is specified separately at the receiver.
struct ModulationConfig {
    std::size_t symbol_count = 0;
    int samples_per_symbol = 100;
    double sample_period_s = 20e-9;
    double carrier_hz = 900e6;
    double tx_power_dbm = 50.0;
    double rx_gain_db = 30.0;

    double sample_rate_hz() const { return 1.0 / sample_period_s; }
    void validate() const;
};

/// Deterministic uniform bit stream for pilot synthesis.
std::vector<std::uint8_t> generate_bits(std::size_t count, std::uint64_t seed);

/// Gray-mapped QPSK, unit average power. Mapping is fixed:
/// 00 -> (+1+j)/sqrt(2), 01 -> (-1+j)/sqrt(2), 11 -> (-1-j)/sqrt(2),
/// 10 -> (+1-j)/sqrt(2). Bit count must be even.
std::vector<std::complex<double>> qpsk_modulate(const std::vector<std::uint8_t> &bits);

/// Minimum-distance decisions back to bits; exact axis ties resolve toward
/// the positive half-plane (the smaller Gray index).
std::vector<std::uint8_t> qpsk_demodulate(const std::vector<std::complex<double>> &symbols);

/// Rectangular (sample-and-hold) pulse shaping: each symbol repeated
/// samples_per_symbol times.
ComplexSignal oversample(const std::vector<std::complex<double>> &symbols,
                         int samples_per_symbol, double sample_rate_hz);

/// Adds circularly-symmetric complex white Gaussian noise calibrated against
/// the empirical mean |sample|^2 of the input. snr_db = +inf returns the
/// input unchanged.
ComplexSignal add_awgn(const ComplexSignal &in, double snr_db, std::uint64_t seed);

/// Mean |x|^2 helper shared by the noise calibration and its tests.
double mean_power(const std::vector<std::complex<double>> &samples);

} // namespace tdlchan::signal
