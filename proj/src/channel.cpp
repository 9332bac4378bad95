// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tdlchan/errors.hpp"
#include "tdlchan/signal.hpp"

namespace tdlchan::channel {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 add(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 scale(Vec2 a, double s) { return {a.x * s, a.y * s}; }
double length(Vec2 a) { return std::hypot(a.x, a.y); }
double distance(Vec2 a, Vec2 b) { return length(sub(a, b)); }

constexpr double kGeomEps = 1e-9;

// Signed side of point p relative to the line (a, b); 0 means on the line
// within tolerance.
int side_of_line(Vec2 a, Vec2 b, Vec2 p) {
    const double c = cross(sub(b, a), sub(p, a));
    const double ref = kGeomEps * (length(sub(b, a)) * (distance(p, a) + 1.0) + 1.0);
    if (c > ref)
        return 1;
    if (c < -ref)
        return -1;
    return 0;
}

// Mirror image of p across the infinite line through (a, b).
Vec2 reflect_point(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = sub(b, a);
    const double len2 = dot(d, d);
    const Vec2 ap = sub(p, a);
    const double t = dot(ap, d) / len2;
    const Vec2 foot = add(a, scale(d, t));
    return sub(scale(foot, 2.0), p);
}

// Intersection of segments [p, p+r] and [q, q+s]; writes the point when the
// segments properly cross (endpoint contact counts as crossing). Parallel and
// collinear-overlap cases report crossing without a unique point.
bool segments_intersect(Vec2 p, Vec2 p2, Vec2 q, Vec2 q2, Vec2 *point) {
    const Vec2 r = sub(p2, p);
    const Vec2 s = sub(q2, q);
    const double denom = cross(r, s);
    const Vec2 qp = sub(q, p);
    const double scale_ref = (length(r) + 1.0) * (length(s) + 1.0);
    if (std::abs(denom) <= kGeomEps * scale_ref) {
        if (std::abs(cross(qp, r)) > kGeomEps * scale_ref)
            return false; // parallel, disjoint
        // collinear: overlap iff projections intersect
        const double rr = dot(r, r);
        if (rr <= 0.0)
            return false;
        double t0 = dot(qp, r) / rr;
        double t1 = t0 + dot(s, r) / rr;
        if (t0 > t1)
            std::swap(t0, t1);
        return t1 >= 0.0 && t0 <= 1.0;
    }
    const double t = cross(qp, s) / denom;
    const double u = cross(qp, r) / denom;
    if (t < -kGeomEps || t > 1.0 + kGeomEps || u < -kGeomEps || u > 1.0 + kGeomEps)
        return false;
    if (point)
        *point = add(p, scale(r, t));
    return true;
}

struct RayPath {
    double length_m = 0.0;
    std::complex<double> coefficient{1.0, 0.0}; // product of reflection coefficients
};

bool line_of_sight_clear(const Scene &scene, Vec2 tx, Vec2 rx) {
    for (const auto &w : scene.reflectors) {
        if (segments_intersect(tx, rx, w.p1, w.p2, nullptr))
            return false;
    }
    return true;
}

void collect_single_bounces(const Scene &scene, Vec2 tx, Vec2 rx,
                            std::vector<RayPath> *paths) {
    for (const auto &w : scene.reflectors) {
        if (side_of_line(w.p1, w.p2, tx) == 0)
            continue; // source on the wall plane
        if (side_of_line(w.p1, w.p2, tx) != side_of_line(w.p1, w.p2, rx))
            continue; // no specular path to the far side
        const Vec2 image = reflect_point(tx, w.p1, w.p2);
        Vec2 hit;
        if (!segments_intersect(image, rx, w.p1, w.p2, &hit))
            continue;
        paths->push_back({distance(image, rx), w.reflection_coefficient});
    }
}

void collect_double_bounces(const Scene &scene, Vec2 tx, Vec2 rx,
                            std::vector<RayPath> *paths) {
    const auto &walls = scene.reflectors;
    for (std::size_t a = 0; a < walls.size(); ++a) {
        for (std::size_t b = 0; b < walls.size(); ++b) {
            if (a == b)
                continue;
            const auto &wa = walls[a];
            const auto &wb = walls[b];
            if (side_of_line(wa.p1, wa.p2, tx) == 0)
                continue;
            const Vec2 img1 = reflect_point(tx, wa.p1, wa.p2);
            if (side_of_line(wb.p1, wb.p2, img1) == 0)
                continue;
            const Vec2 img2 = reflect_point(img1, wb.p1, wb.p2);
            Vec2 hit_b;
            if (!segments_intersect(img2, rx, wb.p1, wb.p2, &hit_b))
                continue;
            Vec2 hit_a;
            if (!segments_intersect(img1, hit_b, wa.p1, wa.p2, &hit_a))
                continue;
            // Physicality: the leg into each wall must arrive from the same
            // side the previous point sits on.
            if (side_of_line(wa.p1, wa.p2, tx) != side_of_line(wa.p1, wa.p2, hit_b))
                continue;
            if (side_of_line(wb.p1, wb.p2, rx) != side_of_line(wb.p1, wb.p2, hit_a))
                continue;
            paths->push_back({distance(img2, rx),
                              wa.reflection_coefficient * wb.reflection_coefficient});
        }
    }
}

} // namespace

void TapSet::validate() const {
    int last_delay = -1;
    for (const auto &t : taps) {
        if (t.delay_samples < 0)
            throw std::invalid_argument("TapSet: negative tap delay");
        if (t.delay_samples <= last_delay)
            throw std::invalid_argument("TapSet: delays must be strictly increasing");
        if (!std::isfinite(t.gain.real()) || !std::isfinite(t.gain.imag()))
            throw std::invalid_argument("TapSet: non-finite gain");
        last_delay = t.delay_samples;
    }
}

void Scene::validate() const {
    if (transmitters.empty())
        throw std::invalid_argument("Scene: at least one transmitter required");
    for (const auto &t : transmitters) {
        if (distance(t.position, receiver) <= kGeomEps)
            throw std::invalid_argument("Scene: receiver coincides with a transmitter");
    }
    for (const auto &w : reflectors) {
        if (std::abs(w.reflection_coefficient) > 1.0 + 1e-12)
            throw std::invalid_argument("Scene: |reflection_coefficient| must be <= 1");
        if (distance(w.p1, w.p2) <= kGeomEps)
            throw std::invalid_argument("Scene: degenerate reflector segment");
    }
    if (max_bounces < 0 || max_bounces > 2)
        throw std::invalid_argument("Scene: max_bounces must be 0, 1 or 2");
    if (!(carrier_hz > 0.0) || !(sample_period_s > 0.0))
        throw std::invalid_argument("Scene: carrier_hz and sample_period_s must be positive");
}

void Trajectory::validate() const {
    if (waypoints.empty())
        throw std::invalid_argument("Trajectory: no waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (!(waypoints[i].time_s > waypoints[i - 1].time_s))
            throw std::invalid_argument("Trajectory: times must be strictly increasing");
    }
}

TapSet trace_paths_raw(const Scene &scene, int transmitter_id) {
    scene.validate();
    if (transmitter_id < 0 || static_cast<std::size_t>(transmitter_id) >= scene.transmitters.size())
        throw std::invalid_argument("trace_paths: transmitter_id out of range");

    const auto &tx = scene.transmitters[static_cast<std::size_t>(transmitter_id)];
    const Vec2 rx = scene.receiver;

    std::vector<RayPath> paths;
    if (line_of_sight_clear(scene, tx.position, rx))
        paths.push_back({distance(tx.position, rx), {1.0, 0.0}});
    if (scene.max_bounces >= 1)
        collect_single_bounces(scene, tx.position, rx, &paths);
    if (scene.max_bounces >= 2)
        collect_double_bounces(scene, tx.position, rx, &paths);

    if (paths.empty())
        throw empty_channel_error("trace_paths: no propagation path reaches the receiver");

    const double lambda = kSpeedOfLight / scene.carrier_hz;
    const double tx_amplitude = std::sqrt(std::pow(10.0, (tx.power_dbm - 30.0) / 10.0));
    const double samples_per_meter = 1.0 / (kSpeedOfLight * scene.sample_period_s);

    std::map<int, std::complex<double>> merged;
    for (const auto &p : paths) {
        const double amplitude = tx_amplitude * lambda / (4.0 * M_PI * p.length_m);
        const double phase = -2.0 * M_PI * scene.carrier_hz * p.length_m / kSpeedOfLight;
        const std::complex<double> gain =
            amplitude * p.coefficient * std::polar(1.0, phase);
        const int delay = static_cast<int>(std::llround(p.length_m * samples_per_meter));
        merged[delay] += gain;
    }

    TapSet out;
    out.transmitter_id = transmitter_id;
    out.normalization = 1.0;
    out.taps.reserve(merged.size());
    for (const auto &[delay, gain] : merged)
        out.taps.push_back({delay, gain});
    return out;
}

TapSet trace_paths(const Scene &scene, int transmitter_id) {
    TapSet out = trace_paths_raw(scene, transmitter_id);
    double peak = 0.0;
    for (const auto &t : out.taps)
        peak = std::max(peak, std::abs(t.gain));
    if (peak > 0.0) {
        for (auto &t : out.taps)
            t.gain /= peak;
        out.normalization = peak;
    }
    return out;
}

signal::ComplexSignal apply_channel(const std::vector<signal::ComplexSignal> &tx_signals,
                                    const std::vector<TapSet> &tapsets,
                                    double snr_db, std::uint64_t seed) {
    if (tx_signals.size() != tapsets.size())
        throw std::invalid_argument("apply_channel: one TapSet per transmit signal required");
    if (tx_signals.empty())
        throw std::invalid_argument("apply_channel: no transmit signals");

    std::size_t n = 0;
    const double rate = tx_signals.front().sample_rate_hz;
    for (const auto &x : tx_signals) {
        x.validate();
        if (x.sample_rate_hz != rate)
            throw std::invalid_argument("apply_channel: sample rates differ");
        n = std::max(n, x.samples.size());
    }

    signal::ComplexSignal y;
    y.sample_rate_hz = rate;
    y.samples.assign(n, {0.0, 0.0});
    for (std::size_t m = 0; m < tx_signals.size(); ++m) {
        const auto &x = tx_signals[m].samples;
        tapsets[m].validate();
        for (const auto &tap : tapsets[m].taps) {
            const std::size_t d = static_cast<std::size_t>(tap.delay_samples);
            const std::size_t last = std::min(n, x.size() + d);
            for (std::size_t i = d; i < last; ++i)
                y.samples[i] += tap.gain * x[i - d];
        }
    }
    return signal::add_awgn(y, snr_db, seed);
}

std::vector<TapSet> evolve_channel(const Scene &scene, const Trajectory &trajectory,
                                   int transmitter_id) {
    trajectory.validate();
    std::vector<TapSet> frames;
    frames.reserve(trajectory.waypoints.size());

    double norm = 0.0;
    for (std::size_t k = 0; k < trajectory.waypoints.size(); ++k) {
        Scene frame_scene = scene;
        frame_scene.receiver = trajectory.waypoints[k].position;
        TapSet raw;
        try {
            raw = trace_paths_raw(frame_scene, transmitter_id);
        } catch (const empty_channel_error &) {
            if (k == 0)
                throw empty_channel_error(
                    "evolve_channel: first trajectory frame has no paths");
            raw.transmitter_id = transmitter_id;
        }
        if (k == 0) {
            for (const auto &t : raw.taps)
                norm = std::max(norm, std::abs(t.gain));
        }
        if (norm > 0.0) {
            for (auto &t : raw.taps)
                t.gain /= norm;
            raw.normalization = norm;
        }
        frames.push_back(std::move(raw));
    }
    return frames;
}

EventResult apply_events(const std::vector<TapSet> &frames,
                         const std::vector<PerturbationEvent> &events) {
    EventResult result;
    result.frames = frames;
    result.truth_mask.assign(frames.size(), false);

    for (const auto &e : events) {
        if (e.first_frame > e.last_frame || e.last_frame >= frames.size())
            throw std::invalid_argument("apply_events: frame window out of range");
        if (!std::isfinite(e.factor.real()) || !std::isfinite(e.factor.imag()) ||
            !std::isfinite(e.tap.gain.real()) || !std::isfinite(e.tap.gain.imag()))
            throw std::invalid_argument("apply_events: non-finite event parameter");

        for (std::size_t k = e.first_frame; k <= e.last_frame; ++k) {
            auto &taps = result.frames[k].taps;
            auto it = std::find_if(taps.begin(), taps.end(), [&](const Tap &t) {
                return t.delay_samples == e.tap.delay_samples;
            });
            switch (e.kind) {
            case EventKind::add_path:
                if (it != taps.end()) {
                    it->gain += e.tap.gain; // co-delayed components sum
                } else {
                    auto pos = std::find_if(taps.begin(), taps.end(), [&](const Tap &t) {
                        return t.delay_samples > e.tap.delay_samples;
                    });
                    taps.insert(pos, e.tap);
                }
                break;
            case EventKind::remove_path:
                if (it == taps.end())
                    throw std::invalid_argument(
                        "apply_events: remove_path targets a non-existent delay");
                taps.erase(it);
                break;
            case EventKind::scale_gain:
                if (it == taps.end())
                    throw std::invalid_argument(
                        "apply_events: scale_gain targets a non-existent delay");
                it->gain *= e.factor;
                break;
            }
            result.truth_mask[k] = true;
        }
    }
    return result;
}

} // namespace tdlchan::channel
