// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "tdlchan/signal.hpp"

namespace tdlchan::channel {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// One multipath component: integer-sample delay and complex gain with the
/// carrier/Doppler phase folded in.
struct Tap {
    int delay_samples = 0;
    std::complex<double> gain{0.0, 0.0};
};

/// Ground-truth multipath description for one transmitter. Taps are sorted
/// by delay with unique delays (co-delayed rays pre-summed). Gains are
/// normalized so max |gain| = 1; `normalization` is the amplitude that was
/// divided out (raw gain = gain * normalization).
struct TapSet {
    std::vector<Tap> taps;
    int transmitter_id = 0;
    double normalization = 1.0;

    void validate() const;
};

struct Transmitter {
    Vec2 position;
    double power_dbm = 50.0;
};

/// 2-D line-segment reflector with a complex reflection coefficient.
struct Reflector {
    Vec2 p1;
    Vec2 p2;
    std::complex<double> reflection_coefficient{-0.7, 0.0};
};

struct Scene {
    std::vector<Transmitter> transmitters;
    Vec2 receiver;
    std::vector<Reflector> reflectors;
    double carrier_hz = 900e6;
    int max_bounces = 1; // 0, 1 or 2
    double sample_period_s = 20e-9;

    void validate() const;
};

struct Waypoint {
    double time_s = 0.0;
    Vec2 position;
};

/// Receiver motion path; one channel snapshot is produced per waypoint.
struct Trajectory {
    std::vector<Waypoint> waypoints;

    void validate() const;
};

enum class EventKind { add_path, remove_path, scale_gain };

/// Frame-windowed channel mutation used to synthesize sensing ground truth.
/// For add_path, `tap` is the new component; for remove_path/scale_gain,
/// tap.delay_samples selects the target.
struct PerturbationEvent {
    EventKind kind = EventKind::add_path;
    std::size_t first_frame = 0;
    std::size_t last_frame = 0; // inclusive
    Tap tap;
    std::complex<double> factor{1.0, 0.0};
};

/// Image-method path tracing for one transmitter: line-of-sight (dropped if
/// any reflector segment crosses it) plus single/double specular bounces.
/// Per path of length d over b bounces the raw gain is
/// (lambda/(4 pi d)) * prod(reflection coefficients) * exp(-j 2 pi f_c d / c),
/// delay = round(d / (c * sample_period)). Co-delayed paths are summed and
/// the result is normalized to max |gain| = 1. Reflected paths are not
/// occlusion-tested; only the direct path is.
TapSet trace_paths(const Scene &scene, int transmitter_id);

/// trace_paths without the final normalization (normalization = 1).
TapSet trace_paths_raw(const Scene &scene, int transmitter_id);

/// y_n = sum_m sum_taps gain * x_{m, n-delay} + AWGN, where the noise power
/// is calibrated against the noiseless superposition. Inputs are zero-padded
/// to a common length; x at negative indices is 0.
signal::ComplexSignal apply_channel(const std::vector<signal::ComplexSignal> &tx_signals,
                                    const std::vector<TapSet> &tapsets,
                                    double snr_db, std::uint64_t seed);

/// Re-traces the scene with the receiver at each waypoint. The normalization
/// constant is fixed from the first frame so inter-frame gain variation is
/// preserved. A fully blocked frame after the first yields an empty TapSet.
std::vector<TapSet> evolve_channel(const Scene &scene, const Trajectory &trajectory,
                                   int transmitter_id = 0);

struct EventResult {
    std::vector<TapSet> frames;
    std::vector<bool> truth_mask; // true exactly on frames touched by an event
};

EventResult apply_events(const std::vector<TapSet> &frames,
                         const std::vector<PerturbationEvent> &events);

} // namespace tdlchan::channel
