// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tdlchan/channel.hpp"
#include "tdlchan/errors.hpp"
#include "tdlchan/rng.hpp"

using namespace tdlchan;
using namespace tdlchan::channel;
using testutil::cplx;
using testutil::make_tapset;
using testutil::white_pilot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Scene free_space(Vec2 tx, Vec2 rx) {
    Scene s;
    s.transmitters.push_back({tx, 50.0});
    s.receiver = rx;
    return s;
}

} // namespace

TEST_CASE("free-space LOS delay quantization") {
    // d/c = 1 us; at 20 ns per sample that is 50 samples
    const Scene s = free_space({0.0, 0.0}, {299.792458, 0.0});
    const TapSet taps = trace_paths(s, 0);
    REQUIRE(taps.taps.size() == 1);
    CHECK(taps.taps[0].delay_samples == 50);
    CHECK(std::abs(taps.taps[0].gain) == doctest::Approx(1.0)); // normalized peak
    CHECK(taps.normalization > 0.0);
}

TEST_CASE("single-reflector image geometry") {
    // mirror image of tx across y=50 is (0, 100); bounce length = sqrt(2)*100
    Scene s = free_space({0.0, 0.0}, {100.0, 0.0});
    s.reflectors.push_back({{-100.0, 50.0}, {200.0, 50.0}, {-0.7, 0.0}});
    const TapSet taps = trace_paths(s, 0);
    REQUIRE(taps.taps.size() == 2);
    CHECK(taps.taps[0].delay_samples == 17); // 100 m LOS
    CHECK(taps.taps[1].delay_samples == 24); // 141.42 m bounce
    // LOS is the stronger path; bounce magnitude ratio = (d_los/d_ref) * 0.7
    CHECK(std::abs(taps.taps[0].gain) == doctest::Approx(1.0));
    CHECK(std::abs(taps.taps[1].gain) ==
          doctest::Approx(0.7 * 100.0 / std::hypot(100.0, 100.0)));
}

TEST_CASE("co-delayed rays merge into one tap") {
    // two mirror-symmetric walls produce equal-length bounce paths
    Scene s = free_space({0.0, 0.0}, {100.0, 0.0});
    s.reflectors.push_back({{-100.0, 50.0}, {200.0, 50.0}, {-0.7, 0.0}});
    s.reflectors.push_back({{-100.0, -50.0}, {200.0, -50.0}, {-0.7, 0.0}});
    const TapSet taps = trace_paths(s, 0);
    REQUIRE(taps.taps.size() == 2); // LOS + merged bounce pair
    const TapSet raw = trace_paths_raw(s, 0);
    // merged gain is the complex sum: symmetric rays double the amplitude
    Scene one_wall = s;
    one_wall.reflectors.pop_back();
    const TapSet single = trace_paths_raw(one_wall, 0);
    CHECK(std::abs(raw.taps[1].gain) ==
          doctest::Approx(2.0 * std::abs(single.taps[1].gain)));
}

TEST_CASE("LOS delay does not exceed bounce delays") {
    Scene s = free_space({0.0, 0.0}, {150.0, 10.0});
    s.reflectors.push_back({{-50.0, 60.0}, {250.0, 60.0}, {-0.7, 0.0}});
    s.reflectors.push_back({{-50.0, -40.0}, {250.0, -40.0}, {-0.7, 0.0}});
    const TapSet taps = trace_paths(s, 0);
    REQUIRE(taps.taps.size() >= 2);
    for (std::size_t i = 1; i < taps.taps.size(); ++i)
        CHECK(taps.taps[0].delay_samples <= taps.taps[i].delay_samples);
}

TEST_CASE("double bounce appears only with max_bounces = 2") {
    Scene s = free_space({0.0, 0.0}, {100.0, 0.0});
    s.reflectors.push_back({{-200.0, 40.0}, {300.0, 40.0}, {-0.7, 0.0}});
    s.reflectors.push_back({{-200.0, -40.0}, {300.0, -40.0}, {-0.7, 0.0}});
    s.max_bounces = 1;
    const std::size_t single_count = trace_paths(s, 0).taps.size();
    s.max_bounces = 2;
    const std::size_t double_count = trace_paths(s, 0).taps.size();
    CHECK(double_count > single_count);
}

TEST_CASE("fully blocked scene raises empty_channel_error") {
    Scene s = free_space({0.0, 0.0}, {10.0, 0.0});
    s.reflectors.push_back({{5.0, -1.0}, {5.0, 1.0}, {-0.7, 0.0}});
    CHECK_THROWS_AS(trace_paths(s, 0), empty_channel_error);
}

TEST_CASE("apply_channel identity tap") {
    const auto x = white_pilot(128, 1);
    const auto y = apply_channel({x}, {make_tapset({{0, {1.0, 0.0}}})}, kInf, 0);
    CHECK(y.samples == x.samples);
}

TEST_CASE("apply_channel hand convolution") {
    signal::ComplexSignal x;
    x.sample_rate_hz = 1.0;
    x.samples = {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    const auto y =
        apply_channel({x}, {make_tapset({{0, {1.0, 0.0}}, {2, {0.5, 0.0}}})}, kInf, 0);
    REQUIRE(y.samples.size() == 4);
    CHECK(y.samples[0] == cplx{1.0, 0.0});
    CHECK(y.samples[1] == cplx{0.0, 0.0});
    CHECK(y.samples[2] == cplx{0.5, 0.0});
    CHECK(y.samples[3] == cplx{0.0, 0.0});
}

TEST_CASE("apply_channel agrees with the convolution oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 8 + static_cast<std::size_t>(rng.uniform() * 56);
        const auto x = white_pilot(n, 100 + static_cast<std::uint64_t>(trial));
        std::vector<std::pair<int, cplx>> taps;
        int delay = 0;
        const int count = 1 + static_cast<int>(rng.uniform() * 3);
        for (int t = 0; t < count; ++t) {
            taps.emplace_back(delay, rng.complex_gaussian());
            delay += 1 + static_cast<int>(rng.uniform() * 4);
        }
        const auto set = make_tapset(taps);
        const auto y = apply_channel({x}, {set}, kInf, 0);
        const auto oracle = testutil::convolve_oracle(x.samples, set, x.samples.size());
        REQUIRE(y.samples.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i)
            CHECK(std::abs(y.samples[i] - oracle[i]) < 1e-12);
    }
}

TEST_CASE("apply_channel is linear at infinite SNR") {
    const auto x1 = white_pilot(64, 5);
    const auto x2 = white_pilot(64, 6);
    const auto set = make_tapset({{0, {0.8, 0.1}}, {3, {-0.2, 0.4}}});
    const cplx alpha{0.7, -0.3}, beta{-1.1, 0.2};

    signal::ComplexSignal combo = x1;
    for (std::size_t i = 0; i < combo.samples.size(); ++i)
        combo.samples[i] = alpha * x1.samples[i] + beta * x2.samples[i];

    const auto y_combo = apply_channel({combo}, {set}, kInf, 0);
    const auto y1 = apply_channel({x1}, {set}, kInf, 0);
    const auto y2 = apply_channel({x2}, {set}, kInf, 0);
    for (std::size_t i = 0; i < y_combo.samples.size(); ++i)
        CHECK(std::abs(y_combo.samples[i] - (alpha * y1.samples[i] + beta * y2.samples[i])) <
              1e-12);
}

TEST_CASE("apply_channel superposes transmitters additively") {
    const auto x1 = white_pilot(64, 7);
    const auto x2 = white_pilot(64, 8);
    const auto t1 = make_tapset({{0, {1.0, 0.0}}, {2, {0.4, 0.0}}}, 0);
    const auto t2 = make_tapset({{1, {0.0, 0.9}}}, 1);
    const auto joint = apply_channel({x1, x2}, {t1, t2}, kInf, 0);
    const auto y1 = apply_channel({x1}, {t1}, kInf, 0);
    const auto y2 = apply_channel({x2}, {t2}, kInf, 0);
    for (std::size_t i = 0; i < joint.samples.size(); ++i)
        CHECK(std::abs(joint.samples[i] - (y1.samples[i] + y2.samples[i])) < 1e-12);
}

TEST_CASE("apply_channel rejects mismatched list lengths") {
    const auto x = white_pilot(16, 9);
    CHECK_THROWS_AS(apply_channel({x}, {}, kInf, 0), std::invalid_argument);
}

TEST_CASE("evolve_channel on a static trajectory is frame-wise constant") {
    Scene s = free_space({0.0, 0.0}, {100.0, 0.0});
    s.reflectors.push_back({{-100.0, 50.0}, {200.0, 50.0}, {-0.7, 0.0}});
    Trajectory traj;
    for (int k = 0; k < 5; ++k)
        traj.waypoints.push_back({static_cast<double>(k), {100.0, 0.0}});
    const auto frames = evolve_channel(s, traj, 0);
    REQUIRE(frames.size() == 5);
    for (const auto &f : frames) {
        REQUIRE(f.taps.size() == frames[0].taps.size());
        for (std::size_t i = 0; i < f.taps.size(); ++i) {
            CHECK(f.taps[i].delay_samples == frames[0].taps[i].delay_samples);
            CHECK(f.taps[i].gain == frames[0].taps[i].gain);
        }
    }
}

TEST_CASE("walking behind a blocking wall removes the LOS tap") {
    Scene s = free_space({0.0, 0.0}, {15.0, 0.0});
    s.reflectors.push_back({{0.0, 20.0}, {60.0, 20.0}, {-0.7, 0.0}}); // keeps a bounce alive
    s.reflectors.push_back({{30.0, -5.0}, {30.0, 5.0}, {-0.7, 0.0}}); // blocker
    Trajectory traj;
    traj.waypoints.push_back({0.0, {15.0, 0.0}});
    traj.waypoints.push_back({1.0, {60.0, 0.0}});
    const auto frames = evolve_channel(s, traj, 0);
    REQUIRE(frames.size() == 2);
    // frame 0 sees the direct path (3 samples); frame 1's direct path (10
    // samples) is blocked and only the reflection survives
    CHECK(frames[0].taps.front().delay_samples == 3);
    REQUIRE(!frames[1].taps.empty());
    for (const auto &t : frames[1].taps)
        CHECK(t.delay_samples != 10);
}

TEST_CASE("evolve_channel keeps the first frame's normalization") {
    Scene s = free_space({0.0, 0.0}, {50.0, 0.0});
    Trajectory traj;
    traj.waypoints.push_back({0.0, {50.0, 0.0}});
    traj.waypoints.push_back({1.0, {100.0, 0.0}}); // farther: weaker gain
    const auto frames = evolve_channel(s, traj, 0);
    CHECK(std::abs(frames[0].taps[0].gain) == doctest::Approx(1.0));
    CHECK(std::abs(frames[1].taps[0].gain) == doctest::Approx(0.5)); // 1/d falloff
    CHECK(frames[0].normalization == frames[1].normalization);
}

TEST_CASE("apply_events: empty list leaves frames unchanged") {
    const auto base = make_tapset({{0, {1.0, 0.0}}, {4, {0.3, 0.0}}});
    const std::vector<TapSet> frames(20, base);
    const auto result = apply_events(frames, {});
    CHECK(result.frames.size() == 20);
    for (bool b : result.truth_mask)
        CHECK(!b);
}

TEST_CASE("apply_events: add_path window") {
    const auto base = make_tapset({{0, {1.0, 0.0}}});
    const std::vector<TapSet> frames(20, base);
    PerturbationEvent e;
    e.kind = EventKind::add_path;
    e.first_frame = 10;
    e.last_frame = 14;
    e.tap = {7, {0.0, 0.3}};
    const auto result = apply_events(frames, {e});
    std::size_t flagged = 0;
    for (std::size_t k = 0; k < 20; ++k) {
        if (k >= 10 && k <= 14) {
            CHECK(result.frames[k].taps.size() == 2);
            CHECK(result.frames[k].taps[1].gain == cplx{0.0, 0.3});
        } else {
            CHECK(result.frames[k].taps.size() == 1);
        }
        flagged += result.truth_mask[k];
    }
    CHECK(flagged == 5);
}

TEST_CASE("apply_events: scale_gain models partial blockage") {
    const auto base = make_tapset({{5, {0.8, 0.2}}});
    const std::vector<TapSet> frames(4, base);
    PerturbationEvent e;
    e.kind = EventKind::scale_gain;
    e.first_frame = 1;
    e.last_frame = 2;
    e.tap.delay_samples = 5;
    e.factor = {0.5, 0.0};
    const auto result = apply_events(frames, {e});
    CHECK(result.frames[1].taps[0].gain == cplx{0.4, 0.1});
    CHECK(result.frames[0].taps[0].gain == cplx{0.8, 0.2});
}

TEST_CASE("apply_events: remove_path on a missing delay is an error") {
    const auto base = make_tapset({{0, {1.0, 0.0}}});
    const std::vector<TapSet> frames(4, base);
    PerturbationEvent e;
    e.kind = EventKind::remove_path;
    e.first_frame = 0;
    e.last_frame = 1;
    e.tap.delay_samples = 9;
    CHECK_THROWS_AS(apply_events(frames, {e}), std::invalid_argument);
}

TEST_CASE("apply_events: window bounds are validated") {
    const std::vector<TapSet> frames(4, make_tapset({{0, {1.0, 0.0}}}));
    PerturbationEvent e;
    e.kind = EventKind::add_path;
    e.first_frame = 2;
    e.last_frame = 7;
    e.tap = {3, {0.1, 0.0}};
    CHECK_THROWS_AS(apply_events(frames, {e}), std::invalid_argument);
}
