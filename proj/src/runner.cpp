// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tdlchan/baselines.hpp"
#include "tdlchan/csv.hpp"
#include "tdlchan/equalizer.hpp"
#include "tdlchan/rng.hpp"
#include "tdlchan/version.hpp"

namespace tdlchan::runner {

namespace {

namespace fs = std::filesystem;
using signal::ComplexSignal;

constexpr int kLinearEqTaps = 11; // symbol-spaced linear equalizer length

// RNG stream roles, combined with the per-point stream seed.
constexpr std::uint64_t kBitsRole = 1000;
constexpr std::uint64_t kNoiseRole = 2000;
constexpr std::uint64_t kTestBitsRole = 3000;
constexpr std::uint64_t kTestNoiseRole = 4000;
constexpr std::uint64_t kClusterRole = 777;

std::string footer(const ExperimentConfig &config) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "config_hash=0x%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash(config)),
                  static_cast<unsigned long long>(config.seed));
    return buf;
}

std::string snr_label(double snr_db) {
    std::string label = csv::format_number(snr_db);
    for (auto &c : label) {
        if (c == '.')
            c = 'p';
        if (c == '+' || c == '-')
            c = 'm';
    }
    return label;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &fn) {
    int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(1, std::min<int>(n, static_cast<int>(count)));
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto &t : pool)
        t.join();
}

// Known pilot for one transmitter on one grid point.
ComplexSignal make_pilot(const signal::ModulationConfig &m, std::uint64_t bits_seed,
                         std::vector<std::complex<double>> *symbols_out = nullptr) {
    const auto bits = signal::generate_bits(2 * m.symbol_count, bits_seed);
    auto symbols = signal::qpsk_modulate(bits);
    ComplexSignal out = signal::oversample(symbols, m.samples_per_symbol, m.sample_rate_hz());
    if (symbols_out)
        *symbols_out = std::move(symbols);
    return out;
}

std::vector<ComplexSignal> make_pilots(const signal::ModulationConfig &m, int num_tx,
                                       std::uint64_t point_stream) {
    std::vector<ComplexSignal> pilots;
    pilots.reserve(static_cast<std::size_t>(num_tx));
    for (int tx = 0; tx < num_tx; ++tx)
        pilots.push_back(
            make_pilot(m, mix_seed(point_stream, kBitsRole + static_cast<std::uint64_t>(tx))));
    return pilots;
}

void write_manifest(const std::string &out_dir, const std::vector<std::string> &files,
                    const ExperimentConfig &config, double wall_clock_s) {
    nlohmann::json j;
    j["version"] = kVersion;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    j["config_hash"] = buf;
    j["seed"] = config.seed;
    j["wall_clock_s"] = wall_clock_s;
    j["files"] = files;
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

std::string prepare_out_dir(const ExperimentConfig &config, const RunOptions &options) {
    const std::string dir = effective_out_dir(config, options);
    fs::create_directories(dir);
    return dir;
}

void check_static_scenario(const ExperimentConfig &config) {
    const auto &s = config.scenario;
    if (s.estimator.num_transmitters != s.transmitter_count())
        throw std::invalid_argument(
            "runner: estimator.num_transmitters does not match the scenario");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double elapsed_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<double> dense_magnitudes(const channel::TapSet &taps, int L, int tau) {
    std::vector<double> row(static_cast<std::size_t>(L) + 1, 0.0);
    for (const auto &t : taps.taps) {
        if (t.delay_samples % tau == 0 && t.delay_samples <= L * tau)
            row[static_cast<std::size_t>(t.delay_samples / tau)] = std::abs(t.gain);
    }
    return row;
}

std::vector<std::complex<double>> mid_symbol_samples(const ComplexSignal &x, int sps,
                                                     std::size_t count) {
    std::vector<std::complex<double>> out(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = x.samples[k * static_cast<std::size_t>(sps) +
                           static_cast<std::size_t>(sps / 2)];
    return out;
}

} // namespace

std::string effective_out_dir(const ExperimentConfig &config, const RunOptions &options) {
    return options.out_dir.empty() ? config.outputs : options.out_dir;
}

StaticReport run_static(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    check_static_scenario(config);
    const auto truth = config.scenario.ground_truth();
    const auto &mod = config.scenario.modulation;
    const auto &est_cfg = config.scenario.estimator;
    const std::string out_dir = prepare_out_dir(config, options);

    const std::size_t num_snr = config.snr_grid.size();
    const std::size_t runs = static_cast<std::size_t>(config.runs_per_point);
    const std::size_t points = num_snr * runs;

    std::vector<double> rmse_values(points, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> point_errors(points);
    estimator::ChannelEstimate dump_estimate;
    std::mutex dump_mutex;

    parallel_for(points, options.threads, [&](std::size_t p) {
        const std::size_t si = p / runs;
        const std::size_t run = p % runs;
        try {
            const std::uint64_t stream = mix_seed(config.seed, p);
            const auto pilots = make_pilots(mod, est_cfg.num_transmitters, stream);
            const ComplexSignal rx = channel::apply_channel(
                pilots, truth, config.snr_grid[si], mix_seed(stream, kNoiseRole));
            const auto estimate = estimator::fit(est_cfg, pilots, rx);
            rmse_values[p] = estimator::rmse(estimate, truth);
            if (si == num_snr - 1 && run == 0) {
                std::lock_guard<std::mutex> lock(dump_mutex);
                dump_estimate = estimate;
            }
            if (!options.quiet) {
                std::ostringstream msg;
                msg << "[static] " << config.scenario.name << " snr=" << config.snr_grid[si]
                    << " run=" << run << " rmse=" << rmse_values[p] << "\n";
                std::cerr << msg.str();
            }
        } catch (const std::exception &e) {
            point_errors[p] = config.scenario.name + ", snr=" +
                              csv::format_number(config.snr_grid[si]) +
                              ", run=" + std::to_string(run) + ": " + e.what();
        }
    });

    StaticReport report;
    std::vector<std::vector<std::string>> rows;
    for (std::size_t si = 0; si < num_snr; ++si) {
        double sum = 0.0, sum_sq = 0.0;
        int good = 0;
        for (std::size_t run = 0; run < runs; ++run) {
            const double v = rmse_values[si * runs + run];
            if (std::isnan(v))
                continue;
            sum += v;
            sum_sq += v * v;
            ++good;
        }
        StaticRow row;
        row.snr_db = config.snr_grid[si];
        row.runs = good;
        if (good > 0) {
            row.mean_rmse = sum / good;
            row.std_rmse = good > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / good) /
                                                                  (good - 1)))
                                    : 0.0;
        }
        report.rows.push_back(row);
        rows.push_back({config.scenario.name, csv::format_number(row.snr_db),
                        csv::format_number(row.mean_rmse), csv::format_number(row.std_rmse),
                        std::to_string(row.runs)});
    }
    for (const auto &e : point_errors) {
        if (!e.empty())
            report.errors.push_back(e);
    }

    const std::string table = (fs::path(out_dir) / "rmse_table.csv").string();
    csv::write_table(table, {"scenario", "snr_db", "mean_rmse", "std_rmse", "runs"}, rows,
                     footer(config));
    report.files.push_back(table);

    if (!dump_estimate.weights.empty()) {
        std::vector<std::vector<std::string>> wrows;
        for (int m = 0; m < est_cfg.num_transmitters; ++m) {
            for (int i = 0; i <= est_cfg.num_taps; ++i) {
                const auto w = dump_estimate.weight(m, i);
                wrows.push_back({std::to_string(m), std::to_string(i),
                                 std::to_string(i * est_cfg.tap_resolution),
                                 csv::format_number(w.real()), csv::format_number(w.imag()),
                                 csv::format_number(std::abs(w))});
            }
        }
        const std::string wpath = (fs::path(out_dir) / "weights.csv").string();
        csv::write_table(wpath,
                         {"transmitter", "tap_index", "delay_samples", "re", "im", "abs"},
                         wrows, footer(config));
        report.files.push_back(wpath);
    }

    write_manifest(out_dir, report.files, config, timer.elapsed_s());
    return report;
}

MobileReport run_mobile(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    const auto &scenario = config.scenario;
    if (!scenario.trajectory)
        throw std::invalid_argument("run_mobile: scenario has no trajectory");
    if (!scenario.scene)
        throw std::invalid_argument("run_mobile: scenario has no scene");
    if (scenario.estimator.num_transmitters != 1)
        throw std::invalid_argument("run_mobile: single-transmitter scenarios only");
    const auto &mod = scenario.modulation;
    const auto &est_cfg = scenario.estimator;
    const std::string out_dir = prepare_out_dir(config, options);

    std::vector<channel::TapSet> frames =
        channel::evolve_channel(*scenario.scene, *scenario.trajectory, 0);
    if (!scenario.events.empty())
        frames = channel::apply_events(frames, scenario.events).frames;
    const std::size_t num_frames = frames.size();
    const std::size_t num_snr = config.snr_grid.size();

    MobileReport report;
    report.per_snr.assign(num_snr, {});
    report.truth_heatmap.reserve(num_frames);
    for (const auto &f : frames)
        report.truth_heatmap.push_back(
            dense_magnitudes(f, est_cfg.num_taps, est_cfg.tap_resolution));

    std::vector<std::string> snr_errors(num_snr);
    parallel_for(num_snr, options.threads, [&](std::size_t si) {
        try {
            const double snr = config.snr_grid[si];
            std::vector<estimator::PilotFrame> pilot_frames;
            pilot_frames.reserve(num_frames);
            for (std::size_t k = 0; k < num_frames; ++k) {
                const std::uint64_t stream = mix_seed(config.seed, si * num_frames + k);
                std::vector<ComplexSignal> pilots = make_pilots(mod, 1, stream);
                ComplexSignal rx = channel::apply_channel(pilots, {frames[k]}, snr,
                                                          mix_seed(stream, kNoiseRole));
                pilot_frames.push_back({std::move(pilots), std::move(rx)});
            }
            const auto estimates = estimator::fit_sequence(est_cfg, pilot_frames);

            MobileSnrResult result;
            result.snr_db = snr;
            result.frame_rmse.reserve(num_frames);
            result.est_heatmap.reserve(num_frames);
            for (std::size_t k = 0; k < num_frames; ++k) {
                result.frame_rmse.push_back(estimator::rmse(estimates[k], {frames[k]}));
                std::vector<double> mags;
                mags.reserve(estimates[k].weights.size());
                for (const auto &w : estimates[k].weights)
                    mags.push_back(std::abs(w));
                result.est_heatmap.push_back(std::move(mags));
            }
            report.per_snr[si] = std::move(result);
            if (!options.quiet)
                std::cerr << "[mobile] snr=" << snr << " done\n";
        } catch (const std::exception &e) {
            snr_errors[si] = scenario.name + ", snr=" +
                             csv::format_number(config.snr_grid[si]) + ": " + e.what();
        }
    });
    for (const auto &e : snr_errors) {
        if (!e.empty())
            report.errors.push_back(e);
    }

    // frame-indexed RMSE + per-SNR summary
    std::vector<std::vector<std::string>> rmse_rows, summary_rows;
    for (const auto &res : report.per_snr) {
        if (res.frame_rmse.empty())
            continue;
        double sum = 0.0, peak = 0.0;
        for (std::size_t k = 0; k < res.frame_rmse.size(); ++k) {
            rmse_rows.push_back({csv::format_number(res.snr_db), std::to_string(k),
                                 csv::format_number(res.frame_rmse[k])});
            sum += res.frame_rmse[k];
            peak = std::max(peak, res.frame_rmse[k]);
        }
        summary_rows.push_back({csv::format_number(res.snr_db),
                                csv::format_number(sum / res.frame_rmse.size()),
                                csv::format_number(peak),
                                std::to_string(res.frame_rmse.size())});
    }
    const std::string rmse_path = (fs::path(out_dir) / "frame_rmse.csv").string();
    csv::write_table(rmse_path, {"snr_db", "frame", "rmse"}, rmse_rows, footer(config));
    report.files.push_back(rmse_path);
    const std::string summary_path = (fs::path(out_dir) / "mobile_summary.csv").string();
    csv::write_table(summary_path, {"snr_db", "mean_rmse", "max_rmse", "frames"},
                     summary_rows, footer(config));
    report.files.push_back(summary_path);

    std::vector<std::string> heat_header = {"frame"};
    for (int i = 0; i <= est_cfg.num_taps; ++i)
        heat_header.push_back("tap_" + std::to_string(i));
    auto heatmap_rows = [&](const std::vector<std::vector<double>> &matrix) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(matrix.size());
        for (std::size_t k = 0; k < matrix.size(); ++k) {
            std::vector<std::string> row = {std::to_string(k)};
            for (double v : matrix[k])
                row.push_back(csv::format_number(v));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    const std::string truth_path = (fs::path(out_dir) / "heatmap_truth.csv").string();
    csv::write_table(truth_path, heat_header, heatmap_rows(report.truth_heatmap),
                     footer(config));
    report.files.push_back(truth_path);
    for (const auto &res : report.per_snr) {
        if (res.est_heatmap.empty())
            continue;
        const std::string path =
            (fs::path(out_dir) / ("heatmap_est_snr" + snr_label(res.snr_db) + ".csv")).string();
        csv::write_table(path, heat_header, heatmap_rows(res.est_heatmap), footer(config));
        report.files.push_back(path);
    }

    write_manifest(out_dir, report.files, config, timer.elapsed_s());
    return report;
}

BerReport run_ber(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    check_static_scenario(config);
    const auto &scenario = config.scenario;
    if (scenario.estimator.num_transmitters != 1)
        throw std::invalid_argument("run_ber: single-transmitter scenarios only");
    const auto truth = scenario.ground_truth();
    const auto &mod = scenario.modulation;
    const auto &est_cfg = scenario.estimator;
    const int sps = mod.samples_per_symbol;
    const std::string out_dir = prepare_out_dir(config, options);

    // Validates the symbol alignment precondition up front.
    const equalizer::SymbolChannel h_true = equalizer::to_symbol_spaced(truth[0], sps);
    const int V = h_true.memory();

    const std::size_t num_snr = config.snr_grid.size();
    const std::size_t runs = static_cast<std::size_t>(config.runs_per_point);
    const std::size_t points = num_snr * runs;
    const char *method_names[4] = {"tdl_nn", "lms", "rls", "perfect"};

    std::vector<std::array<double, 4>> point_ber(points,
                                                 {std::numeric_limits<double>::quiet_NaN(),
                                                  std::numeric_limits<double>::quiet_NaN(),
                                                  std::numeric_limits<double>::quiet_NaN(),
                                                  std::numeric_limits<double>::quiet_NaN()});
    std::vector<std::string> point_errors(points);

    parallel_for(points, options.threads, [&](std::size_t p) {
        const std::size_t si = p / runs;
        const std::size_t run = p % runs;
        try {
            const double snr = config.snr_grid[si];
            const std::uint64_t stream = mix_seed(config.seed, p);

            // training pass
            std::vector<std::complex<double>> train_symbols;
            ComplexSignal train_tx = make_pilot(mod, mix_seed(stream, kBitsRole),
                                                &train_symbols);
            const ComplexSignal train_rx = channel::apply_channel(
                {train_tx}, truth, snr, mix_seed(stream, kNoiseRole));
            const auto estimate = estimator::fit(est_cfg, {train_tx}, train_rx);
            const equalizer::SymbolChannel h_est = equalizer::to_symbol_spaced(estimate, sps);

            const double symbol_rate = mod.sample_rate_hz() / sps;
            ComplexSignal train_rx_sym{mid_symbol_samples(train_rx, sps, mod.symbol_count),
                                       symbol_rate};
            ComplexSignal train_tx_sym{train_symbols, symbol_rate};
            // adaptive linear equalizers learn the inverse map rx -> tx
            const auto lms = baselines::lms_estimate(train_rx_sym, train_tx_sym,
                                                     kLinearEqTaps - 1, 0.01);
            const auto rls = baselines::rls_estimate(train_rx_sym, train_tx_sym,
                                                     kLinearEqTaps - 1, 0.99, 1e-2);

            // held-out pass, frame terminated by V known zero symbols
            const auto test_bits =
                signal::generate_bits(2 * kBerTestSymbols, mix_seed(stream, kTestBitsRole));
            auto test_symbols = signal::qpsk_modulate(test_bits);
            auto padded = test_symbols;
            padded.insert(padded.end(), static_cast<std::size_t>(V), {0.0, 0.0});
            const ComplexSignal test_tx =
                signal::oversample(padded, sps, mod.sample_rate_hz());
            const ComplexSignal test_rx = channel::apply_channel(
                {test_tx}, truth, snr, mix_seed(stream, kTestNoiseRole));
            const auto rx_sym =
                mid_symbol_samples(test_rx, sps, kBerTestSymbols + static_cast<std::size_t>(V));

            const auto ber_of_mlse = [&](const equalizer::SymbolChannel &h) {
                const auto decisions = equalizer::mlse_equalize(rx_sym, h);
                return equalizer::compute_ber(signal::qpsk_demodulate(decisions), test_bits);
            };
            const auto ber_of_linear = [&](const std::vector<std::complex<double>> &w) {
                std::vector<std::complex<double>> eq(kBerTestSymbols);
                for (std::size_t n = 0; n < kBerTestSymbols; ++n) {
                    std::complex<double> acc{0.0, 0.0};
                    const std::size_t lags = std::min(w.size(), n + 1);
                    for (std::size_t i = 0; i < lags; ++i)
                        acc += w[i] * rx_sym[n - i];
                    eq[n] = acc;
                }
                return equalizer::compute_ber(signal::qpsk_demodulate(eq), test_bits);
            };

            point_ber[p] = {ber_of_mlse(h_est), ber_of_linear(lms.weights),
                            ber_of_linear(rls.weights), ber_of_mlse(h_true)};
            if (!options.quiet) {
                std::ostringstream msg;
                msg << "[ber] snr=" << snr << " run=" << run
                    << " tdl=" << point_ber[p][0] << " perfect=" << point_ber[p][3] << "\n";
                std::cerr << msg.str();
            }
        } catch (const std::exception &e) {
            point_errors[p] = scenario.name + ", snr=" +
                              csv::format_number(config.snr_grid[si]) +
                              ", run=" + std::to_string(run) + ": " + e.what();
        }
    });

    BerReport report;
    std::vector<std::vector<std::string>> rows;
    for (int method = 0; method < 4; ++method) {
        for (std::size_t si = 0; si < num_snr; ++si) {
            double sum = 0.0;
            int good = 0;
            for (std::size_t run = 0; run < runs; ++run) {
                const double v = point_ber[si * runs + run][static_cast<std::size_t>(method)];
                if (std::isnan(v))
                    continue;
                sum += v;
                ++good;
            }
            BerRow row;
            row.method = method_names[method];
            row.snr_db = config.snr_grid[si];
            row.ber = good > 0 ? sum / good : std::numeric_limits<double>::quiet_NaN();
            report.rows.push_back(row);
            rows.push_back({row.method, csv::format_number(row.snr_db),
                            csv::format_number(row.ber), std::to_string(good)});
        }
    }
    for (const auto &e : point_errors) {
        if (!e.empty())
            report.errors.push_back(e);
    }

    const std::string path = (fs::path(out_dir) / "ber_table.csv").string();
    csv::write_table(path, {"method", "snr_db", "ber", "runs"}, rows, footer(config));
    report.files.push_back(path);
    write_manifest(out_dir, report.files, config, timer.elapsed_s());
    return report;
}

SenseReport run_sense(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    const auto &scenario = config.scenario;
    if (!scenario.trajectory || !scenario.scene)
        throw std::invalid_argument("run_sense: scenario needs a scene and a trajectory");
    if (scenario.events.empty())
        throw std::invalid_argument("run_sense: scenario has no perturbation events");
    if (scenario.estimator.num_transmitters != 1)
        throw std::invalid_argument("run_sense: single-transmitter scenarios only");
    const auto &mod = scenario.modulation;
    const auto &est_cfg = scenario.estimator;
    const std::string out_dir = prepare_out_dir(config, options);

    const auto base_frames = channel::evolve_channel(*scenario.scene, *scenario.trajectory, 0);
    const auto perturbed = channel::apply_events(base_frames, scenario.events);
    const std::size_t num_frames = perturbed.frames.size();
    const std::size_t num_snr = config.snr_grid.size();

    SenseReport report;
    report.per_snr.assign(num_snr, {});
    std::vector<std::string> snr_errors(num_snr);

    parallel_for(num_snr, options.threads, [&](std::size_t si) {
        try {
            const double snr = config.snr_grid[si];
            std::vector<estimator::PilotFrame> pilot_frames;
            std::vector<baselines::CsiVector> csi_frames;
            pilot_frames.reserve(num_frames);
            csi_frames.reserve(num_frames);
            for (std::size_t k = 0; k < num_frames; ++k) {
                const std::uint64_t stream = mix_seed(config.seed, si * num_frames + k);
                std::vector<ComplexSignal> pilots = make_pilots(mod, 1, stream);
                ComplexSignal rx = channel::apply_channel(pilots, {perturbed.frames[k]}, snr,
                                                          mix_seed(stream, kNoiseRole));
                // regularize at 10% of the mean bin power so a single deep
                // pilot spectral null cannot dominate the CSI state
                const double eps = 0.1 * static_cast<double>(pilots[0].samples.size()) *
                                   signal::mean_power(pilots[0].samples);
                csi_frames.push_back(baselines::csi_frequency_ls(pilots[0], rx, eps));
                pilot_frames.push_back({std::move(pilots), std::move(rx)});
            }
            const auto estimates = estimator::fit_sequence(est_cfg, pilot_frames);

            SenseSnrResult result;
            result.snr_db = snr;
            result.truth_mask = perturbed.truth_mask;

            const auto evaluate = [&](sensing::StateSeries states, const char *variant) {
                states.truth_mask = perturbed.truth_mask;
                auto reduced = sensing::pca_reduce(states, 2);
                const auto clusters = sensing::kmeans(
                    reduced.series, 2, mix_seed(config.seed, kClusterRole + si), 10);
                SenseVariantResult out;
                out.variant = variant;
                out.mask = sensing::detect_anomalies(reduced.series, clusters);
                out.metrics = sensing::detection_metrics(out.mask, perturbed.truth_mask);
                out.silhouette = sensing::silhouette(reduced.series, clusters.assignments);
                out.clusters = clusters.assignments;
                out.pca_points.reserve(num_frames);
                for (const auto &row : reduced.series.states)
                    out.pca_points.push_back({row[0], row[1]});
                return out;
            };
            result.tdl = evaluate(sensing::build_states(estimates), "tdl");
            result.csi = evaluate(sensing::build_states(csi_frames), "csi");
            report.per_snr[si] = std::move(result);
            if (!options.quiet)
                std::cerr << "[sense] snr=" << snr << " done\n";
        } catch (const std::exception &e) {
            snr_errors[si] = scenario.name + ", snr=" +
                             csv::format_number(config.snr_grid[si]) + ": " + e.what();
        }
    });
    for (const auto &e : snr_errors) {
        if (!e.empty())
            report.errors.push_back(e);
    }

    std::vector<std::vector<std::string>> mask_rows, summary_rows, pca_rows;
    for (const auto &res : report.per_snr) {
        if (res.truth_mask.empty())
            continue;
        for (std::size_t k = 0; k < res.truth_mask.size(); ++k) {
            mask_rows.push_back({csv::format_number(res.snr_db), std::to_string(k),
                                 res.tdl.mask[k] ? "1" : "0", res.csi.mask[k] ? "1" : "0",
                                 res.truth_mask[k] ? "1" : "0"});
        }
        for (const auto *v : {&res.tdl, &res.csi}) {
            summary_rows.push_back({csv::format_number(res.snr_db), v->variant,
                                    csv::format_number(v->metrics.precision),
                                    csv::format_number(v->metrics.recall),
                                    std::to_string(v->metrics.false_positive_count),
                                    csv::format_number(v->silhouette)});
            for (std::size_t k = 0; k < v->pca_points.size(); ++k) {
                pca_rows.push_back({csv::format_number(res.snr_db), v->variant,
                                    std::to_string(k),
                                    csv::format_number(v->pca_points[k][0]),
                                    csv::format_number(v->pca_points[k][1]),
                                    std::to_string(v->clusters[k]), v->mask[k] ? "1" : "0",
                                    res.truth_mask[k] ? "1" : "0"});
            }
        }
    }
    const std::string mask_path = (fs::path(out_dir) / "sense_mask.csv").string();
    csv::write_table(mask_path, {"snr_db", "frame", "tdl_anomaly", "csi_anomaly", "truth"},
                     mask_rows, footer(config));
    report.files.push_back(mask_path);
    const std::string summary_path = (fs::path(out_dir) / "sense_summary.csv").string();
    csv::write_table(summary_path,
                     {"snr_db", "variant", "precision", "recall", "false_positives",
                      "silhouette"},
                     summary_rows, footer(config));
    report.files.push_back(summary_path);
    const std::string pca_path = (fs::path(out_dir) / "sense_pca.csv").string();
    csv::write_table(pca_path,
                     {"snr_db", "variant", "frame", "pc1", "pc2", "cluster", "anomaly",
                      "truth"},
                     pca_rows, footer(config));
    report.files.push_back(pca_path);

    write_manifest(out_dir, report.files, config, timer.elapsed_s());
    return report;
}

BaselineReport run_baseline(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    check_static_scenario(config);
    const auto &scenario = config.scenario;
    if (scenario.estimator.num_transmitters != 1)
        throw std::invalid_argument("run_baseline: single-transmitter scenarios only");
    if (scenario.estimator.tap_resolution != 1)
        throw std::invalid_argument(
            "run_baseline: needs a sample-spaced scenario (tap_resolution 1)");
    const auto truth = scenario.ground_truth();
    const auto &mod = scenario.modulation;
    const auto &est_cfg = scenario.estimator;
    const std::string out_dir = prepare_out_dir(config, options);
    const double snr = config.snr_grid.front();

    BaselineReport report;
    const std::uint64_t stream = mix_seed(config.seed, 0);
    const auto pilots = make_pilots(mod, 1, stream);
    const ComplexSignal rx =
        channel::apply_channel(pilots, truth, snr, mix_seed(stream, kNoiseRole));

    const auto grid_estimate = [&](const std::vector<std::complex<double>> &weights) {
        estimator::ChannelEstimate est;
        est.config = est_cfg;
        est.weights.assign(static_cast<std::size_t>(est_cfg.num_taps) + 1, {0.0, 0.0});
        for (std::size_t i = 0; i < est.weights.size() && i < weights.size(); ++i)
            est.weights[i] = weights[i];
        est.loss_trace = {0.0};
        return est;
    };

    const auto tdl = estimator::fit(est_cfg, pilots, rx);
    report.rows.push_back({"tdl_nn", estimator::rmse(tdl, truth)});
    const auto oracle =
        estimator::fit_ls_oracle(pilots, rx, est_cfg.num_taps, est_cfg.tap_resolution);
    report.rows.push_back({"ls_oracle", estimator::rmse(oracle, truth)});
    const auto lms = baselines::lms_estimate(pilots[0], rx, est_cfg.num_taps, 0.01);
    report.rows.push_back({"lms", estimator::rmse(grid_estimate(lms.weights), truth)});
    const auto rls = baselines::rls_estimate(pilots[0], rx, est_cfg.num_taps, 0.99, 1e-2);
    report.rows.push_back({"rls", estimator::rmse(grid_estimate(rls.weights), truth)});
    const auto csi = baselines::csi_frequency_ls(pilots[0], rx);
    report.rows.push_back({"csi", estimator::rmse(grid_estimate(csi.impulse_response), truth)});

    std::vector<std::vector<std::string>> rows;
    for (const auto &row : report.rows)
        rows.push_back({row.method, csv::format_number(row.rmse)});
    const std::string path = (fs::path(out_dir) / "baseline_table.csv").string();
    csv::write_table(path, {"method", "rmse"}, rows, footer(config));
    report.files.push_back(path);
    write_manifest(out_dir, report.files, config, timer.elapsed_s());
    return report;
}

std::vector<std::string> run_trace(const ExperimentConfig &config, const RunOptions &options) {
    Timer timer;
    const auto &scenario = config.scenario;
    const std::string out_dir = prepare_out_dir(config, options);

    std::vector<std::vector<std::string>> rows;
    const auto emit = [&](std::size_t frame, const channel::TapSet &set) {
        for (const auto &t : set.taps) {
            rows.push_back({std::to_string(frame), std::to_string(set.transmitter_id),
                            std::to_string(t.delay_samples),
                            csv::format_number(t.gain.real()),
                            csv::format_number(t.gain.imag()),
                            csv::format_number(std::abs(t.gain)),
                            csv::format_number(set.normalization)});
        }
    };

    if (scenario.trajectory && scenario.scene) {
        auto frames = channel::evolve_channel(*scenario.scene, *scenario.trajectory, 0);
        if (!scenario.events.empty())
            frames = channel::apply_events(frames, scenario.events).frames;
        for (std::size_t k = 0; k < frames.size(); ++k)
            emit(k, frames[k]);
    } else {
        const auto truth = scenario.ground_truth();
        for (const auto &set : truth)
            emit(0, set);
    }

    const std::string path = (fs::path(out_dir) / "taps.csv").string();
    csv::write_table(path,
                     {"frame", "transmitter", "delay_samples", "gain_re", "gain_im",
                      "abs_gain", "normalization"},
                     rows, footer(config));
    std::vector<std::string> files = {path};
    write_manifest(out_dir, files, config, timer.elapsed_s());
    return files;
}

std::vector<std::string> run_simulate(const ExperimentConfig &config,
                                      const RunOptions &options) {
    Timer timer;
    check_static_scenario(config);
    const auto &scenario = config.scenario;
    const auto truth = scenario.ground_truth();
    const std::string out_dir = prepare_out_dir(config, options);
    const double snr = config.snr_grid.front();

    const std::uint64_t stream = mix_seed(config.seed, 0);
    const auto pilots =
        make_pilots(scenario.modulation, scenario.estimator.num_transmitters, stream);
    const ComplexSignal rx =
        channel::apply_channel(pilots, truth, snr, mix_seed(stream, kNoiseRole));

    std::vector<std::string> header = {"n"};
    for (std::size_t m = 0; m < pilots.size(); ++m) {
        header.push_back("tx" + std::to_string(m) + "_re");
        header.push_back("tx" + std::to_string(m) + "_im");
    }
    header.push_back("rx_re");
    header.push_back("rx_im");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(rx.samples.size());
    for (std::size_t n = 0; n < rx.samples.size(); ++n) {
        std::vector<std::string> row = {std::to_string(n)};
        for (const auto &p : pilots) {
            const auto v = n < p.samples.size() ? p.samples[n] : std::complex<double>{};
            row.push_back(csv::format_number(v.real()));
            row.push_back(csv::format_number(v.imag()));
        }
        row.push_back(csv::format_number(rx.samples[n].real()));
        row.push_back(csv::format_number(rx.samples[n].imag()));
        rows.push_back(std::move(row));
    }

    const std::string path = (fs::path(out_dir) / "signals.csv").string();
    csv::write_table(path, header, rows, footer(config));
    std::vector<std::string> files = {path};
    write_manifest(out_dir, files, config, timer.elapsed_s());
    return files;
}

std::string run_report(const std::string &out_dir) {
    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in)
        throw std::runtime_error("run_report: no manifest.json in " + out_dir);
    nlohmann::json manifest;
    in >> manifest;

    std::ostringstream md;
    md << "# Run report\n\n";
    md << "- version: " << manifest.value("version", std::string("?")) << "\n";
    md << "- config hash: " << manifest.value("config_hash", std::string("?")) << "\n";
    md << "- seed: " << manifest.value("seed", 0ULL) << "\n";
    md << "- wall clock: " << manifest.value("wall_clock_s", 0.0) << " s\n\n";
    md << "## Files\n\n";
    for (const auto &f : manifest.value("files", nlohmann::json::array())) {
        const std::string name = f.get<std::string>();
        std::size_t lines = 0;
        std::ifstream file(name, std::ios::binary);
        std::string line;
        bool first = true;
        std::string header;
        while (std::getline(file, line)) {
            if (first) {
                header = line;
                first = false;
            }
            if (!line.empty() && line.front() != '#')
                ++lines;
        }
        md << "- `" << name << "`";
        if (lines > 0)
            md << " — " << (lines - 1) << " rows (`" << header << "`)";
        md << "\n";
    }

    const std::string path = (fs::path(out_dir) / "report.md").string();
    std::ofstream out(path, std::ios::binary);
    out << md.str();
    return path;
}

} // namespace tdlchan::runner
