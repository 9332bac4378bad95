// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdlchan/baselines.hpp"
#include "tdlchan/estimator.hpp"

namespace tdlchan::sensing {

/// Time-indexed real feature matrix (row per frame), column-standardized.
struct StateSeries {
    std::vector<std::vector<double>> states;
    std::optional<std::vector<bool>> truth_mask;

    std::size_t frame_count() const { return states.size(); }
    std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
    void validate() const;
};

/// Flattens complex weight matrices into real rows (re/im interleaved,
/// transmitter-major) and standardizes each column to zero mean / unit
/// variance; exactly-constant columns are left at zero.
StateSeries build_states(const std::vector<estimator::ChannelEstimate> &estimates);
StateSeries build_states(const std::vector<baselines::CsiVector> &estimates);

struct PcaReduction {
    StateSeries series; // T x dims scores
    std::vector<double> explained_variance_ratio;
};

/// Projects onto the top principal components of the column-standardized
/// matrix. Component sign is fixed so the largest-magnitude loading is
/// positive. Uses the T x T Gram route when dim > frame count.
PcaReduction pca_reduce(const StateSeries &series, int dims = 2);

struct KmeansResult {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

/// k-means++ seeded Lloyd iterations (relative inertia change < 1e-8 or 300
/// iterations), best of `restarts` by inertia, empty clusters reseeded to the
/// farthest point.
KmeansResult kmeans(const StateSeries &series, int k, std::uint64_t seed,
                    int restarts = 10);

/// Flags the minority cluster of a k=2 result; an exact size tie flags the
/// cluster whose points lie farther (on average) from the other centroid.
std::vector<bool> detect_anomalies(const StateSeries &series, const KmeansResult &clusters);

struct DetectionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t false_positive_count = 0;
};

DetectionMetrics detection_metrics(const std::vector<bool> &mask,
                                   const std::vector<bool> &truth_mask);

/// Mean silhouette coefficient of the clustering, in [-1, 1]; singleton
/// clusters contribute 0.
double silhouette(const StateSeries &series, const std::vector<int> &assignments);

/// CSV row per frame, header f0..f{d-1} plus an optional 0/1 `truth` column.
void write_csv(const StateSeries &series, const std::string &path);
StateSeries read_csv(const std::string &path);

} // namespace tdlchan::sensing
