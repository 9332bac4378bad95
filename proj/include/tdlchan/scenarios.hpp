// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdlchan/channel.hpp"
#include "tdlchan/estimator.hpp"
#include "tdlchan/signal.hpp"

namespace tdlchan::scenarios {

/// A runnable experiment fixture: either a geometric scene (traced on
/// demand) or explicit per-transmitter tap sets, plus the modulation and
/// estimator settings the scenario was designed around.
struct Scenario {
    std::string name;
    std::optional<channel::Scene> scene;
    std::vector<channel::TapSet> explicit_taps; // used when no scene is set
    std::optional<channel::Trajectory> trajectory;
    std::vector<channel::PerturbationEvent> events;
    signal::ModulationConfig modulation;
    estimator::TdlConfig estimator;

    bool has_scene() const { return scene.has_value(); }
    int transmitter_count() const;

    /// Ground-truth tap sets for a static scenario (traced or explicit).
    std::vector<channel::TapSet> ground_truth() const;
};

// Static scenes with symbol-aligned path delays (every path length rounds to
// a multiple of the symbol duration), estimated on a symbol-spaced tap grid.
Scenario static_rural();
Scenario static_suburban();
Scenario static_urban();

/// static_suburban plus up to two line-of-sight interferers at aligned
/// delays. num_transmitters in 1..3.
Scenario interference(int num_transmitters);

/// Synthetic 3-tap symbol-spaced channel anchored at delay 0, for the
/// equalization comparison.
Scenario ber_three_tap();

/// Walk past a reflecting wall; sample-spaced taps on white (1 sample per
/// symbol) pilots.
Scenario mobile_walk(std::size_t waypoint_count = 50);

/// Static link with labeled drone perturbation windows.
Scenario sense_static(std::size_t frame_count = 200);

/// Same link with unlabeled receiver drift plus a transient wobble window
/// (nuisance motion) on top of the labeled drone events.
Scenario sense_dynamic(std::size_t frame_count = 200);

/// Lookup by name ("static_rural", "static_suburban", "static_urban",
/// "interference_1tx".."interference_3tx", "ber_three_tap", "mobile_walk",
/// "sense_static", "sense_dynamic"). Throws std::invalid_argument on unknown
/// names.
Scenario by_name(const std::string &name);

std::vector<std::string> names();

} // namespace tdlchan::scenarios
