// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdlchan/config.hpp"
#include "tdlchan/sensing.hpp"

namespace tdlchan::runner {

struct RunOptions {
    std::string out_dir; // overrides config.outputs when non-empty
    bool quiet = true;
    int threads = 0; // 0 = hardware concurrency
};

/// Grid points (SNR x run) execute in parallel; every point derives an
/// independent RNG stream from (config.seed, point index), so the thread
/// count never changes any emitted byte.

struct StaticRow {
    double snr_db = 0.0;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    int runs = 0;
};

struct StaticReport {
    std::vector<StaticRow> rows;
    std::vector<std::string> files;
    std::vector<std::string> errors; // annotated (scenario, snr, run)
};

/// Static protocol: pilot synthesis -> channel -> fit -> weight RMSE,
/// aggregated over runs_per_point seeded runs per SNR. Writes
/// rmse_table.csv (+ weights of the first run at the last SNR).
StaticReport run_static(const ExperimentConfig &config, const RunOptions &options);

struct MobileSnrResult {
    double snr_db = 0.0;
    std::vector<double> frame_rmse;
    std::vector<std::vector<double>> est_heatmap; // frame x (L+1), |weight|
};

struct MobileReport {
    std::vector<MobileSnrResult> per_snr;
    std::vector<std::vector<double>> truth_heatmap; // frame x (L+1), |gain|
    std::vector<std::string> files;
    std::vector<std::string> errors;
};

/// Trajectory tracking: evolve_channel + warm-started fit_sequence per SNR.
/// Writes frame_rmse.csv, mobile_summary.csv and per-SNR heatmap CSVs.
MobileReport run_mobile(const ExperimentConfig &config, const RunOptions &options);

struct BerRow {
    std::string method; // tdl_nn, lms, rls, perfect
    double snr_db = 0.0;
    double ber = 0.0;
};

struct BerReport {
    std::vector<BerRow> rows;
    std::vector<std::string> files;
    std::vector<std::string> errors;
};

/// Trains every estimator on modulation.symbol_count pilot symbols, then
/// scores BER over kBerTestSymbols held-out symbols: MLSE for tdl_nn and
/// perfect channel knowledge, symbol-spaced linear equalization for lms/rls.
BerReport run_ber(const ExperimentConfig &config, const RunOptions &options);

inline constexpr std::size_t kBerTestSymbols = 2000;

struct SenseVariantResult {
    std::string variant; // "tdl" or "csi"
    std::vector<bool> mask;
    sensing::DetectionMetrics metrics;
    double silhouette = 0.0;
    std::vector<std::array<double, 2>> pca_points;
    std::vector<int> clusters;
};

struct SenseSnrResult {
    double snr_db = 0.0;
    std::vector<bool> truth_mask;
    SenseVariantResult tdl;
    SenseVariantResult csi;
};

struct SenseReport {
    std::vector<SenseSnrResult> per_snr;
    std::vector<std::string> files;
    std::vector<std::string> errors;
};

/// Full sensing pipeline, TDL-state and conventional-CSI variants side by
/// side: evolve -> perturb -> fit_sequence / frequency-LS CSI -> states ->
/// PCA -> k-means -> anomaly mask -> metrics. Writes sense_mask.csv,
/// sense_summary.csv and sense_pca.csv.
SenseReport run_sense(const ExperimentConfig &config, const RunOptions &options);

struct BaselineRow {
    std::string method; // tdl_nn, ls_oracle, lms, rls, csi
    double rmse = 0.0;
};

struct BaselineReport {
    std::vector<BaselineRow> rows;
    std::vector<std::string> files;
    std::vector<std::string> errors;
};

/// Single-scenario estimator comparison on the common tap grid at
/// snr_grid[0]. Writes baseline_table.csv.
BaselineReport run_baseline(const ExperimentConfig &config, const RunOptions &options);

/// Writes the scenario's ground-truth taps (per frame when a trajectory is
/// present) to taps.csv. Returns produced files.
std::vector<std::string> run_trace(const ExperimentConfig &config, const RunOptions &options);

/// Synthesizes the point-0 pilots and received signal at snr_grid[0] and
/// dumps them to signals.csv.
std::vector<std::string> run_simulate(const ExperimentConfig &config, const RunOptions &options);

/// Summarizes a completed output directory (reads manifest.json) into
/// report.md. Returns the report path.
std::string run_report(const std::string &out_dir);

/// Resolved output directory for a run.
std::string effective_out_dir(const ExperimentConfig &config, const RunOptions &options);

} // namespace tdlchan::runner
