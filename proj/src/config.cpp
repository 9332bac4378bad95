// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tdlchan::runner {

namespace {

using nlohmann::json;

void check_keys(const json &j, std::initializer_list<const char *> allowed,
                const std::string &context) {
    if (!j.is_object())
        throw std::invalid_argument("config: " + context + " must be an object");
    for (const auto &item : j.items()) {
        bool known = false;
        for (const char *key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known)
            throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " +
                                        context);
    }
}

double parse_snr(const json &j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("config: SNR entries must be numbers or \"inf\"");
    }
    return j.get<double>();
}

channel::Vec2 parse_vec2(const json &j, const std::string &context) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("config: " + context + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::complex<double> parse_complex(const json &j, const std::string &context) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("config: " + context + " must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

channel::Scene parse_scene(const json &j) {
    check_keys(j, {"transmitters", "receiver", "reflectors", "carrier_hz", "max_bounces",
                   "sample_period_s"},
               "scenario.scene");
    channel::Scene scene;
    if (!j.contains("transmitters") || !j.contains("receiver"))
        throw std::invalid_argument("config: scene needs transmitters and receiver");
    for (const auto &t : j.at("transmitters")) {
        check_keys(t, {"position", "power_dbm"}, "scene.transmitters[]");
        channel::Transmitter tx;
        tx.position = parse_vec2(t.at("position"), "transmitter position");
        if (t.contains("power_dbm"))
            tx.power_dbm = t.at("power_dbm").get<double>();
        scene.transmitters.push_back(tx);
    }
    scene.receiver = parse_vec2(j.at("receiver"), "scene.receiver");
    if (j.contains("reflectors")) {
        for (const auto &r : j.at("reflectors")) {
            check_keys(r, {"p1", "p2", "reflection_coefficient"}, "scene.reflectors[]");
            channel::Reflector w;
            w.p1 = parse_vec2(r.at("p1"), "reflector p1");
            w.p2 = parse_vec2(r.at("p2"), "reflector p2");
            if (r.contains("reflection_coefficient"))
                w.reflection_coefficient =
                    parse_complex(r.at("reflection_coefficient"), "reflection_coefficient");
            scene.reflectors.push_back(w);
        }
    }
    if (j.contains("carrier_hz"))
        scene.carrier_hz = j.at("carrier_hz").get<double>();
    if (j.contains("max_bounces"))
        scene.max_bounces = j.at("max_bounces").get<int>();
    if (j.contains("sample_period_s"))
        scene.sample_period_s = j.at("sample_period_s").get<double>();
    return scene;
}

std::vector<channel::TapSet> parse_taps(const json &j) {
    std::vector<channel::TapSet> sets;
    for (const auto &entry : j) {
        check_keys(entry, {"transmitter", "taps"}, "scenario.taps[]");
        channel::TapSet set;
        if (entry.contains("transmitter"))
            set.transmitter_id = entry.at("transmitter").get<int>();
        else
            set.transmitter_id = static_cast<int>(sets.size());
        for (const auto &t : entry.at("taps")) {
            if (!t.is_array() || t.size() != 3)
                throw std::invalid_argument("config: taps entries must be [delay, re, im]");
            set.taps.push_back({t[0].get<int>(), {t[1].get<double>(), t[2].get<double>()}});
        }
        set.validate();
        sets.push_back(std::move(set));
    }
    return sets;
}

channel::Trajectory parse_trajectory(const json &j) {
    channel::Trajectory traj;
    for (const auto &w : j) {
        check_keys(w, {"time_s", "position"}, "scenario.trajectory[]");
        traj.waypoints.push_back(
            {w.at("time_s").get<double>(), parse_vec2(w.at("position"), "waypoint position")});
    }
    traj.validate();
    return traj;
}

std::vector<channel::PerturbationEvent> parse_events(const json &j) {
    std::vector<channel::PerturbationEvent> events;
    for (const auto &e : j) {
        check_keys(e, {"kind", "frames", "delay", "gain", "factor"}, "scenario.events[]");
        channel::PerturbationEvent ev;
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "add_path")
            ev.kind = channel::EventKind::add_path;
        else if (kind == "remove_path")
            ev.kind = channel::EventKind::remove_path;
        else if (kind == "scale_gain")
            ev.kind = channel::EventKind::scale_gain;
        else
            throw std::invalid_argument("config: unknown event kind \"" + kind + "\"");
        const auto &frames = e.at("frames");
        if (!frames.is_array() || frames.size() != 2)
            throw std::invalid_argument("config: event frames must be [first, last]");
        ev.first_frame = frames[0].get<std::size_t>();
        ev.last_frame = frames[1].get<std::size_t>();
        ev.tap.delay_samples = e.at("delay").get<int>();
        if (e.contains("gain"))
            ev.tap.gain = parse_complex(e.at("gain"), "event gain");
        if (e.contains("factor"))
            ev.factor = parse_complex(e.at("factor"), "event factor");
        events.push_back(ev);
    }
    return events;
}

void apply_modulation_overrides(const json &j, signal::ModulationConfig *m) {
    check_keys(j, {"symbol_count", "samples_per_symbol", "sample_period_s", "carrier_hz",
                   "tx_power_dbm", "rx_gain_db"},
               "modulation");
    if (j.contains("symbol_count"))
        m->symbol_count = j.at("symbol_count").get<std::size_t>();
    if (j.contains("samples_per_symbol"))
        m->samples_per_symbol = j.at("samples_per_symbol").get<int>();
    if (j.contains("sample_period_s"))
        m->sample_period_s = j.at("sample_period_s").get<double>();
    if (j.contains("carrier_hz"))
        m->carrier_hz = j.at("carrier_hz").get<double>();
    if (j.contains("tx_power_dbm"))
        m->tx_power_dbm = j.at("tx_power_dbm").get<double>();
    if (j.contains("rx_gain_db"))
        m->rx_gain_db = j.at("rx_gain_db").get<double>();
}

bool apply_estimator_overrides(const json &j, estimator::TdlConfig *e) {
    check_keys(j, {"num_taps", "tap_resolution", "num_transmitters", "learning_rate",
                   "epochs", "block_size", "prune_threshold"},
               "estimator");
    if (j.contains("num_taps"))
        e->num_taps = j.at("num_taps").get<int>();
    if (j.contains("tap_resolution"))
        e->tap_resolution = j.at("tap_resolution").get<int>();
    if (j.contains("num_transmitters"))
        e->num_transmitters = j.at("num_transmitters").get<int>();
    if (j.contains("learning_rate"))
        e->learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("epochs"))
        e->epochs = j.at("epochs").get<int>();
    if (j.contains("prune_threshold") && !j.at("prune_threshold").is_null())
        e->prune_threshold = j.at("prune_threshold").get<double>();
    if (j.contains("block_size")) {
        e->block_size = j.at("block_size").get<std::size_t>();
        return true;
    }
    return false;
}

json complex_to_json(const std::complex<double> &c) { return json::array({c.real(), c.imag()}); }
json vec2_to_json(const channel::Vec2 &v) { return json::array({v.x, v.y}); }

json scenario_to_json(const scenarios::Scenario &s) {
    json j;
    j["name"] = s.name;
    if (s.scene) {
        json scene;
        scene["receiver"] = vec2_to_json(s.scene->receiver);
        scene["carrier_hz"] = s.scene->carrier_hz;
        scene["max_bounces"] = s.scene->max_bounces;
        scene["sample_period_s"] = s.scene->sample_period_s;
        scene["transmitters"] = json::array();
        for (const auto &t : s.scene->transmitters)
            scene["transmitters"].push_back(
                {{"position", vec2_to_json(t.position)}, {"power_dbm", t.power_dbm}});
        scene["reflectors"] = json::array();
        for (const auto &r : s.scene->reflectors)
            scene["reflectors"].push_back(
                {{"p1", vec2_to_json(r.p1)},
                 {"p2", vec2_to_json(r.p2)},
                 {"reflection_coefficient", complex_to_json(r.reflection_coefficient)}});
        j["scene"] = scene;
    }
    if (!s.explicit_taps.empty()) {
        json sets = json::array();
        for (const auto &set : s.explicit_taps) {
            json taps = json::array();
            for (const auto &t : set.taps)
                taps.push_back(json::array({t.delay_samples, t.gain.real(), t.gain.imag()}));
            sets.push_back({{"transmitter", set.transmitter_id}, {"taps", taps}});
        }
        j["taps"] = sets;
    }
    if (s.trajectory) {
        json wps = json::array();
        for (const auto &w : s.trajectory->waypoints)
            wps.push_back({{"time_s", w.time_s}, {"position", vec2_to_json(w.position)}});
        j["trajectory"] = wps;
    }
    if (!s.events.empty()) {
        json evs = json::array();
        for (const auto &e : s.events) {
            const char *kind = e.kind == channel::EventKind::add_path      ? "add_path"
                               : e.kind == channel::EventKind::remove_path ? "remove_path"
                                                                           : "scale_gain";
            evs.push_back({{"kind", kind},
                           {"frames", json::array({e.first_frame, e.last_frame})},
                           {"delay", e.tap.delay_samples},
                           {"gain", complex_to_json(e.tap.gain)},
                           {"factor", complex_to_json(e.factor)}});
        }
        j["events"] = evs;
    }
    return j;
}

} // namespace

ExperimentConfig parse_config(const std::string &json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    check_keys(j, {"scenario", "modulation", "estimator", "snr_grid", "runs_per_point",
                   "seed", "outputs"},
               "top level");
    if (!j.contains("scenario") || !j.contains("snr_grid"))
        throw std::invalid_argument("config: scenario and snr_grid are required");

    ExperimentConfig cfg;
    const json &sc = j.at("scenario");
    if (sc.is_object() && sc.contains("builtin")) {
        check_keys(sc, {"builtin"}, "scenario (builtin form)");
        cfg.scenario = scenarios::by_name(sc.at("builtin").get<std::string>());
    } else {
        check_keys(sc, {"name", "scene", "taps", "trajectory", "events"}, "scenario");
        cfg.scenario.name = sc.contains("name") ? sc.at("name").get<std::string>() : "custom";
        if (sc.contains("scene"))
            cfg.scenario.scene = parse_scene(sc.at("scene"));
        if (sc.contains("taps"))
            cfg.scenario.explicit_taps = parse_taps(sc.at("taps"));
        if (sc.contains("trajectory"))
            cfg.scenario.trajectory = parse_trajectory(sc.at("trajectory"));
        if (sc.contains("events"))
            cfg.scenario.events = parse_events(sc.at("events"));
        if (!cfg.scenario.scene && cfg.scenario.explicit_taps.empty())
            throw std::invalid_argument("config: scenario needs a scene or explicit taps");
    }

    bool explicit_block = false;
    if (j.contains("modulation"))
        apply_modulation_overrides(j.at("modulation"), &cfg.scenario.modulation);
    if (j.contains("estimator"))
        explicit_block = apply_estimator_overrides(j.at("estimator"), &cfg.scenario.estimator);
    if (!explicit_block || cfg.scenario.estimator.block_size == 0)
        cfg.scenario.estimator.block_size =
            cfg.scenario.modulation.symbol_count *
            static_cast<std::size_t>(cfg.scenario.modulation.samples_per_symbol);

    for (const auto &entry : j.at("snr_grid"))
        cfg.snr_grid.push_back(parse_snr(entry));
    if (cfg.snr_grid.empty())
        throw std::invalid_argument("config: snr_grid must be non-empty");
    if (j.contains("runs_per_point"))
        cfg.runs_per_point = j.at("runs_per_point").get<int>();
    if (cfg.runs_per_point < 1)
        throw std::invalid_argument("config: runs_per_point must be >= 1");
    if (j.contains("seed"))
        cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("outputs"))
        cfg.outputs = j.at("outputs").get<std::string>();

    cfg.scenario.modulation.validate();
    cfg.scenario.estimator.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string canonical_json(const ExperimentConfig &config) {
    json j;
    j["scenario"] = scenario_to_json(config.scenario);
    j["modulation"] = {{"symbol_count", config.scenario.modulation.symbol_count},
                       {"samples_per_symbol", config.scenario.modulation.samples_per_symbol},
                       {"sample_period_s", config.scenario.modulation.sample_period_s},
                       {"carrier_hz", config.scenario.modulation.carrier_hz},
                       {"tx_power_dbm", config.scenario.modulation.tx_power_dbm},
                       {"rx_gain_db", config.scenario.modulation.rx_gain_db}};
    j["estimator"] = {{"num_taps", config.scenario.estimator.num_taps},
                      {"tap_resolution", config.scenario.estimator.tap_resolution},
                      {"num_transmitters", config.scenario.estimator.num_transmitters},
                      {"learning_rate", config.scenario.estimator.learning_rate},
                      {"epochs", config.scenario.estimator.epochs},
                      {"block_size", config.scenario.estimator.block_size}};
    if (config.scenario.estimator.prune_threshold)
        j["estimator"]["prune_threshold"] = *config.scenario.estimator.prune_threshold;
    json snrs = json::array();
    for (double s : config.snr_grid) {
        if (std::isinf(s))
            snrs.push_back("inf");
        else
            snrs.push_back(s);
    }
    j["snr_grid"] = snrs;
    j["runs_per_point"] = config.runs_per_point;
    j["seed"] = config.seed;
    j["outputs"] = config.outputs;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig &config) {
    const std::string text = canonical_json(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace tdlchan::runner
