// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace tdlchan::scenarios {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kSamplePeriod = 20e-9;
// Distance covered by one symbol-aligned delay step (100 samples).
const double kSymbolMeters = 100.0 * kSpeedOfLight * kSamplePeriod;

using channel::Reflector;
using channel::Scene;
using channel::Tap;
using channel::TapSet;
using channel::Trajectory;
using channel::Vec2;

// Horizontal reflector that turns the direct span u into a single-bounce
// path of length exactly multiplier * u (image geometry: the bounce path via
// a wall at height h has length sqrt(u^2 + 4 h^2)).
Reflector aligned_wall(double u, int multiplier, bool above, double x0, double x1) {
    const double k = static_cast<double>(multiplier);
    const double h = 0.5 * u * std::sqrt(k * k - 1.0);
    const double y = above ? h : -h;
    return Reflector{{x0, y}, {x1, y}, {-0.7, 0.0}};
}

signal::ModulationConfig paper_modulation() {
    signal::ModulationConfig m;
    m.symbol_count = 10000;
    m.samples_per_symbol = 100;
    return m;
}

signal::ModulationConfig white_modulation(std::size_t symbols) {
    signal::ModulationConfig m;
    m.symbol_count = symbols;
    m.samples_per_symbol = 1;
    return m;
}

estimator::TdlConfig symbol_grid_estimator(int num_taps, int num_tx,
                                           const signal::ModulationConfig &m) {
    estimator::TdlConfig e;
    e.num_taps = num_taps;
    e.tap_resolution = m.samples_per_symbol;
    e.num_transmitters = num_tx;
    e.block_size = m.symbol_count * static_cast<std::size_t>(m.samples_per_symbol);
    return e;
}

Scenario static_scene_base(const std::string &name, int bounce_multipliers_up_to) {
    Scenario s;
    s.name = name;
    s.modulation = paper_modulation();

    Scene scene;
    scene.transmitters.push_back({{0.0, 0.0}, 50.0});
    scene.receiver = {kSymbolMeters, 0.0}; // direct path: exactly one symbol delay
    scene.max_bounces = 1;
    bool above = true;
    for (int k = 2; k <= bounce_multipliers_up_to; ++k) {
        scene.reflectors.push_back(aligned_wall(kSymbolMeters, k, above, 200.0, 400.0));
        above = !above;
    }
    s.scene = scene;
    s.estimator = symbol_grid_estimator(6, 1, s.modulation);
    return s;
}

} // namespace

int Scenario::transmitter_count() const {
    if (scene)
        return static_cast<int>(scene->transmitters.size());
    return static_cast<int>(explicit_taps.size());
}

std::vector<TapSet> Scenario::ground_truth() const {
    if (!explicit_taps.empty())
        return explicit_taps;
    if (!scene)
        throw std::invalid_argument("Scenario: neither scene nor explicit taps set");
    std::vector<TapSet> truth;
    truth.reserve(scene->transmitters.size());
    for (std::size_t m = 0; m < scene->transmitters.size(); ++m)
        truth.push_back(channel::trace_paths(*scene, static_cast<int>(m)));
    return truth;
}

Scenario static_rural() {
    // Line of sight only.
    return static_scene_base("static_rural", 1);
}

Scenario static_suburban() {
    // LOS plus two reflections (path lengths 2u and 3u).
    return static_scene_base("static_suburban", 3);
}

Scenario static_urban() {
    // LOS plus five reflections (path lengths 2u .. 6u).
    return static_scene_base("static_urban", 6);
}

Scenario interference(int num_transmitters) {
    if (num_transmitters < 1 || num_transmitters > 3)
        throw std::invalid_argument("interference: num_transmitters must be in 1..3");
    Scenario s = static_suburban();
    s.name = "interference_" + std::to_string(num_transmitters) + "tx";
    // Interferers sit on the vertical through the receiver at aligned ranges;
    // their specular points fall outside every wall segment, so each one
    // contributes a single line-of-sight tap.
    const Vec2 rx = s.scene->receiver;
    if (num_transmitters >= 2)
        s.scene->transmitters.push_back({{rx.x, rx.y + 2.0 * kSymbolMeters}, 50.0});
    if (num_transmitters >= 3)
        s.scene->transmitters.push_back({{rx.x, rx.y - 3.0 * kSymbolMeters}, 50.0});
    s.estimator = symbol_grid_estimator(6, num_transmitters, s.modulation);
    return s;
}

Scenario ber_three_tap() {
    Scenario s;
    s.name = "ber_three_tap";
    s.modulation = paper_modulation();

    TapSet taps;
    taps.transmitter_id = 0;
    taps.taps = {{0, {1.0, 0.0}}, {100, {0.38, -0.12}}, {200, {0.10, 0.15}}};
    s.explicit_taps = {taps};
    s.estimator = symbol_grid_estimator(2, 1, s.modulation);
    return s;
}

Scenario mobile_walk(std::size_t waypoint_count) {
    if (waypoint_count == 0)
        throw std::invalid_argument("mobile_walk: waypoint_count must be >= 1");
    Scenario s;
    s.name = "mobile_walk";
    s.modulation = white_modulation(20000);

    Scene scene;
    scene.transmitters.push_back({{0.0, 0.0}, 50.0});
    scene.receiver = {70.0, 10.0};
    scene.reflectors.push_back({{-40.0, 60.0}, {280.0, 60.0}, {-0.7, 0.0}});
    scene.reflectors.push_back({{20.0, -45.0}, {200.0, -45.0}, {-0.7, 0.0}});
    scene.max_bounces = 1;
    s.scene = scene;

    Trajectory walk;
    walk.waypoints.reserve(waypoint_count);
    for (std::size_t k = 0; k < waypoint_count; ++k) {
        const double t = static_cast<double>(k);
        walk.waypoints.push_back({t, {70.0 + 1.8 * t, 10.0 + 0.25 * t}});
    }
    s.trajectory = walk;
    s.estimator = symbol_grid_estimator(40, 1, s.modulation);
    return s;
}

namespace {

Scenario sense_base(const std::string &name, std::size_t frame_count) {
    if (frame_count < 4)
        throw std::invalid_argument("sense scenario: need at least 4 frames");
    Scenario s;
    s.name = name;
    s.modulation = white_modulation(16000);

    Scene scene;
    scene.transmitters.push_back({{0.0, 0.0}, 50.0});
    scene.receiver = {150.0, 0.0};
    scene.reflectors.push_back({{30.0, 40.0}, {120.0, 40.0}, {-0.7, 0.0}});
    scene.reflectors.push_back({{30.0, -55.0}, {120.0, -55.0}, {-0.7, 0.0}});
    scene.max_bounces = 1;
    s.scene = scene;
    // 99-tap state vector; only three taps are active (delays 25, 28, 31).
    // Pruning zeroes the idle taps so the state carries structure, not
    // per-frame estimation noise.
    s.estimator = symbol_grid_estimator(99, 1, s.modulation);
    s.estimator.prune_threshold = 1e-3;
    return s;
}

// A drone crossing perturbs several paths at once: it contributes two new
// scattered components and shadows the direct and first reflected paths.
// Both windows touch the same taps so the anomaly occupies one
// feature-space direction.
std::vector<channel::PerturbationEvent> drone_events(std::size_t w1_first,
                                                     std::size_t w1_last,
                                                     std::size_t w2_first,
                                                     std::size_t w2_last) {
    struct Spec {
        std::size_t first, last;
        channel::EventKind kind;
        int delay;
        std::complex<double> gain;
        std::complex<double> factor;
    };
    const Spec specs[] = {
        // first pass
        {w1_first, w1_last, channel::EventKind::add_path, 45, {0.38, 0.40}, {1.0, 0.0}},
        {w1_first, w1_last, channel::EventKind::add_path, 52, {-0.25, 0.35}, {1.0, 0.0}},
        {w1_first, w1_last, channel::EventKind::scale_gain, 25, {0.0, 0.0}, {0.50, 0.20}},
        {w1_first, w1_last, channel::EventKind::scale_gain, 28, {0.0, 0.0}, {0.70, -0.25}},
        // later hover: the same scatterer, slightly weaker coupling
        {w2_first, w2_last, channel::EventKind::add_path, 45, {0.30, 0.33}, {1.0, 0.0}},
        {w2_first, w2_last, channel::EventKind::add_path, 52, {-0.20, 0.28}, {1.0, 0.0}},
        {w2_first, w2_last, channel::EventKind::scale_gain, 25, {0.0, 0.0}, {0.58, 0.16}},
        {w2_first, w2_last, channel::EventKind::scale_gain, 28, {0.0, 0.0}, {0.76, -0.20}},
    };
    std::vector<channel::PerturbationEvent> events;
    for (const auto &s : specs) {
        channel::PerturbationEvent e;
        e.kind = s.kind;
        e.first_frame = s.first;
        e.last_frame = s.last;
        e.tap.delay_samples = s.delay;
        e.tap.gain = s.gain;
        e.factor = s.factor;
        events.push_back(e);
    }
    return events;
}

} // namespace

Scenario sense_static(std::size_t frame_count) {
    Scenario s = sense_base("sense_static", frame_count);

    Trajectory t;
    for (std::size_t k = 0; k < frame_count; ++k)
        t.waypoints.push_back({static_cast<double>(k), {150.0, 0.0}});
    s.trajectory = t;

    const std::size_t w1_first = (3 * frame_count) / 10;
    const std::size_t w1_last = w1_first + frame_count / 13;
    const std::size_t w2_first = (13 * frame_count) / 20;
    const std::size_t w2_last = w2_first + frame_count / 15;
    s.events = drone_events(w1_first, w1_last, w2_first, w2_last);
    return s;
}

Scenario sense_dynamic(std::size_t frame_count) {
    Scenario s = sense_base("sense_dynamic", frame_count);

    // Unlabeled nuisance motion: slow receiver drift plus a transient wobble
    // window (a passing vehicle), both far below the delay-quantization
    // scale so only path phases move.
    Trajectory t;
    const std::size_t wobble_first = frame_count / 2;
    const std::size_t wobble_len = std::max<std::size_t>(6, frame_count / 16);
    for (std::size_t k = 0; k < frame_count; ++k) {
        double x = 150.0 + 6.6e-5 * static_cast<double>(k);
        if (k >= wobble_first && k < wobble_first + wobble_len) {
            const double phase = static_cast<double>(k - wobble_first) /
                                 static_cast<double>(wobble_len);
            x += 0.008 * std::sin(M_PI * phase);
        }
        t.waypoints.push_back({static_cast<double>(k), {x, 0.0}});
    }
    s.trajectory = t;

    const std::size_t w1_first = (3 * frame_count) / 10;
    const std::size_t w1_last = w1_first + frame_count / 16;
    const std::size_t w2_first = (3 * frame_count) / 4;
    const std::size_t w2_last = w2_first + frame_count / 18;
    s.events = drone_events(w1_first, w1_last, w2_first, w2_last);
    return s;
}

Scenario by_name(const std::string &name) {
    if (name == "static_rural")
        return static_rural();
    if (name == "static_suburban")
        return static_suburban();
    if (name == "static_urban")
        return static_urban();
    if (name == "interference_1tx")
        return interference(1);
    if (name == "interference_2tx")
        return interference(2);
    if (name == "interference_3tx")
        return interference(3);
    if (name == "ber_three_tap")
        return ber_three_tap();
    if (name == "mobile_walk")
        return mobile_walk();
    if (name == "sense_static")
        return sense_static();
    if (name == "sense_dynamic")
        return sense_dynamic();
    throw std::invalid_argument("unknown builtin scenario: " + name);
}

std::vector<std::string> names() {
    return {"static_rural",     "static_suburban",  "static_urban",
            "interference_1tx", "interference_2tx", "interference_3tx",
            "ber_three_tap",    "mobile_walk",      "sense_static",
            "sense_dynamic"};
}

} // namespace tdlchan::scenarios
