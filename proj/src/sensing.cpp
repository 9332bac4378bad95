// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/sensing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tdlchan/csv.hpp"
#include "tdlchan/rng.hpp"

namespace tdlchan::sensing {

namespace {

// Zero mean / unit variance per column; exactly-constant columns become 0.
void standardize_columns(std::vector<std::vector<double>> &rows) {
    if (rows.empty())
        return;
    const std::size_t d = rows.front().size();
    const double t = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < d; ++j) {
        double lo = rows.front()[j], hi = lo, sum = 0.0;
        for (const auto &r : rows) {
            lo = std::min(lo, r[j]);
            hi = std::max(hi, r[j]);
            sum += r[j];
        }
        if (lo == hi) { // constant column
            for (auto &r : rows)
                r[j] = 0.0;
            continue;
        }
        const double mean = sum / t;
        double var = 0.0;
        for (const auto &r : rows)
            var += (r[j] - mean) * (r[j] - mean);
        var /= t;
        if (var <= 0.0) {
            for (auto &r : rows)
                r[j] = 0.0;
        } else {
            const double inv_std = 1.0 / std::sqrt(var);
            for (auto &r : rows)
                r[j] = (r[j] - mean) * inv_std;
        }
    }
}

double sq_dist(const std::vector<double> &a, const std::vector<double> &b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

StateSeries finish_series(std::vector<std::vector<double>> rows) {
    standardize_columns(rows);
    StateSeries out;
    out.states = std::move(rows);
    out.validate();
    return out;
}

struct LloydOutcome {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

LloydOutcome kmeans_single(const std::vector<std::vector<double>> &pts, int k,
                           std::uint64_t seed) {
    const std::size_t t_count = pts.size();
    const std::size_t d = pts.front().size();
    Rng rng(seed);

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    std::size_t first = std::min(t_count - 1,
                                 static_cast<std::size_t>(rng.uniform() * t_count));
    centroids.push_back(pts[first]);
    std::vector<double> d2(t_count);
    for (std::size_t i = 0; i < t_count; ++i)
        d2[i] = sq_dist(pts[i], centroids[0]);
    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (double v : d2)
            total += v;
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = t_count - 1;
            for (std::size_t i = 0; i < t_count; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = std::min(t_count - 1,
                              static_cast<std::size_t>(rng.uniform() * t_count));
        }
        centroids.push_back(pts[chosen]);
        for (std::size_t i = 0; i < t_count; ++i)
            d2[i] = std::min(d2[i], sq_dist(pts[i], centroids.back()));
    }

    LloydOutcome out;
    out.assignments.assign(t_count, 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 300; ++iter) {
        // assignment (ties to the lower cluster index)
        for (std::size_t i = 0; i < t_count; ++i) {
            int best = 0;
            double best_d = sq_dist(pts[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double dist = sq_dist(pts[i], centroids[static_cast<std::size_t>(c)]);
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            out.assignments[i] = best;
        }
        // empty-cluster repair: reseed to the farthest point
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (int a : out.assignments)
            ++counts[static_cast<std::size_t>(a)];
        std::vector<bool> moved(t_count, false);
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] != 0)
                continue;
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < t_count; ++i) {
                if (moved[i] || counts[static_cast<std::size_t>(out.assignments[i])] <= 1)
                    continue;
                const double dist = sq_dist(
                    pts[i], centroids[static_cast<std::size_t>(out.assignments[i])]);
                if (dist > far_d) {
                    far_d = dist;
                    far_i = i;
                }
            }
            if (far_d >= 0.0) {
                --counts[static_cast<std::size_t>(out.assignments[far_i])];
                out.assignments[far_i] = c;
                ++counts[static_cast<std::size_t>(c)];
                moved[far_i] = true;
            }
        }
        // centroid update
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0)
                continue; // all points identical; keep seed position
            auto &centroid = centroids[static_cast<std::size_t>(c)];
            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t i = 0; i < t_count; ++i) {
                if (out.assignments[i] != c)
                    continue;
                for (std::size_t j = 0; j < d; ++j)
                    centroid[j] += pts[i][j];
            }
            const double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            for (std::size_t j = 0; j < d; ++j)
                centroid[j] *= inv;
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < t_count; ++i)
            inertia += sq_dist(pts[i],
                               centroids[static_cast<std::size_t>(out.assignments[i])]);
        out.inertia = inertia;
        if (inertia == 0.0)
            break;
        if (std::isfinite(prev_inertia) &&
            std::abs(prev_inertia - inertia) < 1e-8 * std::max(prev_inertia, inertia))
            break;
        prev_inertia = inertia;
    }
    out.centroids = std::move(centroids);
    return out;
}

} // namespace

void StateSeries::validate() const {
    if (states.size() < 2)
        throw std::invalid_argument("StateSeries: need at least 2 frames");
    const std::size_t d = states.front().size();
    if (d == 0)
        throw std::invalid_argument("StateSeries: empty feature rows");
    for (const auto &row : states) {
        if (row.size() != d)
            throw std::invalid_argument("StateSeries: ragged feature rows");
        for (double v : row) {
            if (!std::isfinite(v))
                throw std::invalid_argument("StateSeries: non-finite feature");
        }
    }
    if (truth_mask && truth_mask->size() != states.size())
        throw std::invalid_argument("StateSeries: truth mask length mismatch");
}

StateSeries build_states(const std::vector<estimator::ChannelEstimate> &estimates) {
    if (estimates.empty())
        throw std::invalid_argument("build_states: empty estimate sequence");
    const std::size_t d = 2 * estimates.front().weights.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(estimates.size());
    for (const auto &est : estimates) {
        if (2 * est.weights.size() != d)
            throw std::invalid_argument("build_states: estimate dimensions differ");
        std::vector<double> row;
        row.reserve(d);
        for (const auto &w : est.weights) {
            row.push_back(w.real());
            row.push_back(w.imag());
        }
        rows.push_back(std::move(row));
    }
    return finish_series(std::move(rows));
}

StateSeries build_states(const std::vector<baselines::CsiVector> &estimates) {
    if (estimates.empty())
        throw std::invalid_argument("build_states: empty estimate sequence");
    const std::size_t d = 2 * estimates.front().impulse_response.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(estimates.size());
    for (const auto &est : estimates) {
        if (2 * est.impulse_response.size() != d)
            throw std::invalid_argument("build_states: estimate dimensions differ");
        std::vector<double> row;
        row.reserve(d);
        for (const auto &h : est.impulse_response) {
            row.push_back(h.real());
            row.push_back(h.imag());
        }
        rows.push_back(std::move(row));
    }
    return finish_series(std::move(rows));
}

PcaReduction pca_reduce(const StateSeries &series, int dims) {
    series.validate();
    const std::size_t t_count = series.frame_count();
    const std::size_t d = series.dim();
    if (dims < 1 || static_cast<std::size_t>(dims) > std::min(t_count, d))
        throw std::invalid_argument("pca_reduce: dims must be in [1, min(T, d)]");

    std::vector<std::vector<double>> rows = series.states;
    standardize_columns(rows);

    Eigen::MatrixXd Z(static_cast<Eigen::Index>(t_count), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < t_count; ++i)
        for (std::size_t j = 0; j < d; ++j)
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    const double total_var = Z.squaredNorm() / static_cast<double>(t_count);

    // Top eigenpairs of the sample covariance; the T x T Gram route avoids
    // the d x d matrix when features outnumber frames.
    std::vector<double> eigenvalues(static_cast<std::size_t>(dims), 0.0);
    std::vector<Eigen::VectorXd> components(static_cast<std::size_t>(dims));
    if (d <= t_count) {
        const Eigen::MatrixXd C = Z.transpose() * Z / static_cast<double>(t_count);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        for (int j = 0; j < dims; ++j) {
            const Eigen::Index idx = static_cast<Eigen::Index>(d) - 1 - j;
            eigenvalues[static_cast<std::size_t>(j)] = es.eigenvalues()(idx);
            components[static_cast<std::size_t>(j)] = es.eigenvectors().col(idx);
        }
    } else {
        const Eigen::MatrixXd K = Z * Z.transpose() / static_cast<double>(t_count);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        for (int j = 0; j < dims; ++j) {
            const Eigen::Index idx = static_cast<Eigen::Index>(t_count) - 1 - j;
            const double lambda = es.eigenvalues()(idx);
            eigenvalues[static_cast<std::size_t>(j)] = lambda;
            if (lambda > 0.0)
                components[static_cast<std::size_t>(j)] =
                    Z.transpose() * es.eigenvectors().col(idx) /
                    std::sqrt(lambda * static_cast<double>(t_count));
            else
                components[static_cast<std::size_t>(j)] = Eigen::VectorXd::Zero(
                    static_cast<Eigen::Index>(d));
        }
    }

    const double lambda_max = eigenvalues.empty() ? 0.0 : eigenvalues.front();
    PcaReduction out;
    out.explained_variance_ratio.assign(static_cast<std::size_t>(dims), 0.0);
    out.series.states.assign(t_count, std::vector<double>(static_cast<std::size_t>(dims), 0.0));
    out.series.truth_mask = series.truth_mask;
    for (int j = 0; j < dims; ++j) {
        const double lambda = eigenvalues[static_cast<std::size_t>(j)];
        if (!(lambda > 0.0) || lambda <= lambda_max * 1e-15)
            continue; // numerically rank-deficient direction: scores stay 0
        Eigen::VectorXd v = components[static_cast<std::size_t>(j)];
        // deterministic orientation: largest-magnitude loading positive
        Eigen::Index max_idx = 0;
        v.cwiseAbs().maxCoeff(&max_idx);
        if (v(max_idx) < 0.0)
            v = -v;
        const Eigen::VectorXd scores = Z * v;
        for (std::size_t i = 0; i < t_count; ++i)
            out.series.states[i][static_cast<std::size_t>(j)] =
                scores(static_cast<Eigen::Index>(i));
        if (total_var > 0.0)
            out.explained_variance_ratio[static_cast<std::size_t>(j)] = lambda / total_var;
    }
    return out;
}

KmeansResult kmeans(const StateSeries &series, int k, std::uint64_t seed, int restarts) {
    series.validate();
    if (k < 1)
        throw std::invalid_argument("kmeans: k must be >= 1");
    if (series.frame_count() < static_cast<std::size_t>(k))
        throw std::invalid_argument("kmeans: need at least k frames");
    if (restarts < 1)
        throw std::invalid_argument("kmeans: restarts must be >= 1");

    LloydOutcome best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        LloydOutcome candidate = kmeans_single(series.states, k, mix_seed(seed, static_cast<std::uint64_t>(r)));
        if (!have_best || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have_best = true;
        }
    }

    KmeansResult out;
    out.assignments = std::move(best.assignments);
    out.centroids = std::move(best.centroids);
    out.inertia = best.inertia;
    return out;
}

std::vector<bool> detect_anomalies(const StateSeries &series, const KmeansResult &clusters) {
    if (clusters.centroids.size() != 2)
        throw std::invalid_argument("detect_anomalies: expects a k = 2 clustering");
    if (clusters.assignments.size() != series.frame_count())
        throw std::invalid_argument("detect_anomalies: assignment length mismatch");

    std::size_t counts[2] = {0, 0};
    for (int a : clusters.assignments) {
        if (a < 0 || a > 1)
            throw std::invalid_argument("detect_anomalies: assignment outside {0, 1}");
        ++counts[a];
    }

    int anomalous;
    if (counts[0] != counts[1]) {
        anomalous = counts[0] < counts[1] ? 0 : 1;
    } else {
        // tie: flag the cluster whose points sit farther from the other centroid
        double mean_cross[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < series.frame_count(); ++i) {
            const int a = clusters.assignments[i];
            mean_cross[a] += std::sqrt(sq_dist(series.states[i],
                                               clusters.centroids[static_cast<std::size_t>(1 - a)]));
        }
        for (int c = 0; c < 2; ++c) {
            if (counts[c] > 0)
                mean_cross[c] /= static_cast<double>(counts[c]);
        }
        anomalous = (mean_cross[0] > mean_cross[1]) ? 0 : 1;
    }

    std::vector<bool> mask(series.frame_count(), false);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = clusters.assignments[i] == anomalous;
    return mask;
}

DetectionMetrics detection_metrics(const std::vector<bool> &mask,
                                   const std::vector<bool> &truth_mask) {
    if (mask.size() != truth_mask.size())
        throw std::invalid_argument("detection_metrics: mask lengths differ");

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] && truth_mask[i])
            ++tp;
        else if (mask[i] && !truth_mask[i])
            ++fp;
        else if (!mask[i] && truth_mask[i])
            ++fn;
    }

    DetectionMetrics out;
    out.false_positive_count = fp;
    if (tp + fp == 0)
        out.precision = (tp + fn == 0) ? 1.0 : 0.0;
    else
        out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return out;
}

double silhouette(const StateSeries &series, const std::vector<int> &assignments) {
    series.validate();
    const std::size_t t_count = series.frame_count();
    if (assignments.size() != t_count)
        throw std::invalid_argument("silhouette: assignment length mismatch");
    int k = 0;
    for (int a : assignments) {
        if (a < 0)
            throw std::invalid_argument("silhouette: negative cluster label");
        k = std::max(k, a + 1);
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignments)
        ++counts[static_cast<std::size_t>(a)];

    double acc = 0.0;
    std::vector<double> mean_dist(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < t_count; ++i) {
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (std::size_t j = 0; j < t_count; ++j) {
            if (i == j)
                continue;
            mean_dist[static_cast<std::size_t>(assignments[j])] +=
                std::sqrt(sq_dist(series.states[i], series.states[j]));
        }
        const int own = assignments[i];
        if (counts[static_cast<std::size_t>(own)] <= 1)
            continue; // singleton contributes 0
        const double a_i = mean_dist[static_cast<std::size_t>(own)] /
                           static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
        double b_i = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[static_cast<std::size_t>(c)] == 0)
                continue;
            b_i = std::min(b_i, mean_dist[static_cast<std::size_t>(c)] /
                                    static_cast<double>(counts[static_cast<std::size_t>(c)]));
        }
        if (!std::isfinite(b_i))
            continue; // single cluster overall
        const double denom = std::max(a_i, b_i);
        if (denom > 0.0)
            acc += (b_i - a_i) / denom;
    }
    return acc / static_cast<double>(t_count);
}

void write_csv(const StateSeries &series, const std::string &path) {
    series.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_csv: cannot open " + path);
    const std::size_t d = series.dim();
    for (std::size_t j = 0; j < d; ++j)
        out << (j ? "," : "") << "f" << j;
    if (series.truth_mask)
        out << ",truth";
    out << "\n";
    for (std::size_t i = 0; i < series.frame_count(); ++i) {
        for (std::size_t j = 0; j < d; ++j)
            out << (j ? "," : "") << csv::format_number(series.states[i][j]);
        if (series.truth_mask)
            out << "," << ((*series.truth_mask)[i] ? 1 : 0);
        out << "\n";
    }
}

StateSeries read_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_csv: empty file " + path);
    bool has_truth = line.size() >= 5 && line.substr(line.size() - 5) == "truth";

    StateSeries out;
    std::vector<bool> truth;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> row;
        while (std::getline(ss, field, ','))
            row.push_back(std::stod(field));
        if (has_truth) {
            truth.push_back(row.back() != 0.0);
            row.pop_back();
        }
        out.states.push_back(std::move(row));
    }
    if (has_truth)
        out.truth_mask = std::move(truth);
    out.validate();
    return out;
}

} // namespace tdlchan::sensing
