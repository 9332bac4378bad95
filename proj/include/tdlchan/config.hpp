// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdlchan/scenarios.hpp"

namespace tdlchan::runner {

/// One experiment: a scenario, the SNR grid to sweep, and the seeding /
/// averaging protocol. modulation and estimator settings live inside the
/// scenario and may be overridden from the config file.
struct ExperimentConfig {
    scenarios::Scenario scenario;
    std::vector<double> snr_grid;
    int runs_per_point = 10;
    std::uint64_t seed = 0;
    std::string outputs = "out";
};

/// Loads a UTF-8 JSON config. Parsing is strict: unknown keys anywhere in
/// the document are rejected. SNR entries accept the string "inf".
ExperimentConfig load_config(const std::string &path);
ExperimentConfig parse_config(const std::string &json_text);

/// Canonical serialization used for hashing and the output footers.
std::string canonical_json(const ExperimentConfig &config);

/// FNV-1a 64 over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig &config);

} // namespace tdlchan::runner
