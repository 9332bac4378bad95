// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tdlchan/csv.hpp"
#include "tdlchan/runner.hpp"

using namespace tdlchan;
using namespace tdlchan::runner;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string &leaf) {
    const fs::path dir = fs::temp_directory_path() / "tdlchan_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig tiny_static_config() {
    ExperimentConfig cfg = parse_config(R"({
        "scenario": {"builtin": "static_suburban"},
        "modulation": {"symbol_count": 500},
        "snr_grid": [60],
        "runs_per_point": 2,
        "seed": 11
    })");
    return cfg;
}

} // namespace

TEST_CASE("csv number formatting") {
    CHECK(csv::format_number(0.0) == "0");
    CHECK(csv::format_number(0.5) == "0.5");
    CHECK(csv::format_number(80.0) == "80");
    CHECK(csv::format_number(1e-4) == "1.000000000000e-04"); // scientific below 1e-3
    CHECK(csv::format_number(5e-4) == "5.000000000000e-04");
    CHECK(csv::format_number(0.002) == "0.002"); // at or above 1e-3: plain
    CHECK(csv::format_number(-12345.678).find('.') != std::string::npos);
    CHECK(csv::format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("csv quoting is RFC-4180 style") {
    CHECK(csv::escape_field("plain") == "plain");
    CHECK(csv::escape_field("a,b") == "\"a,b\"");
    CHECK(csv::escape_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("config parsing: builtin scenario with overrides") {
    const auto cfg = tiny_static_config();
    CHECK(cfg.scenario.name == "static_suburban");
    CHECK(cfg.scenario.modulation.symbol_count == 500);
    CHECK(cfg.scenario.estimator.block_size == 500 * 100);
    CHECK(cfg.snr_grid == std::vector<double>{60.0});
    CHECK(cfg.seed == 11);
}

TEST_CASE("config parsing: unknown keys are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"builtin": "static_rural"},
                                     "snr_grid": [60], "typo_key": 1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"builtin": "static_rural",
                                                   "extra": 2},
                                     "snr_grid": [60]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"builtin": "static_rural"},
                                     "modulation": {"symbols": 10},
                                     "snr_grid": [60]})"),
                    std::invalid_argument);
}

TEST_CASE("config parsing: explicit taps scenario and inf SNR") {
    const auto cfg = parse_config(R"({
        "scenario": {
            "name": "two_tap",
            "taps": [{"transmitter": 0, "taps": [[0, 1.0, 0.0], [3, 0.2, -0.1]]}]
        },
        "modulation": {"symbol_count": 100, "samples_per_symbol": 1},
        "estimator": {"num_taps": 4, "num_transmitters": 1},
        "snr_grid": ["inf", 40],
        "runs_per_point": 1,
        "seed": 3
    })");
    CHECK(cfg.scenario.explicit_taps.size() == 1);
    CHECK(cfg.scenario.explicit_taps[0].taps[1].delay_samples == 3);
    CHECK(std::isinf(cfg.snr_grid[0]));
    CHECK(cfg.snr_grid[1] == 40.0);
}

TEST_CASE("config parsing: missing scenario content fails") {
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"name": "empty"}, "snr_grid": [60]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
}

TEST_CASE("config hash tracks content") {
    auto a = tiny_static_config();
    auto b = tiny_static_config();
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 12;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("unknown builtin name") {
    CHECK_THROWS_AS(scenarios::by_name("nope"), std::invalid_argument);
    CHECK(scenarios::names().size() == 10);
}

TEST_CASE("run_static output is byte-identical across thread counts") {
    const auto cfg = tiny_static_config();
    const auto dir_a = temp_dir("static_a");
    const auto dir_b = temp_dir("static_b");

    RunOptions serial;
    serial.out_dir = dir_a.string();
    serial.threads = 1;
    const auto report_a = run_static(cfg, serial);

    RunOptions parallel;
    parallel.out_dir = dir_b.string();
    parallel.threads = 4;
    const auto report_b = run_static(cfg, parallel);

    CHECK(report_a.errors.empty());
    CHECK(report_b.errors.empty());
    REQUIRE(report_a.rows.size() == 1);
    CHECK(report_a.rows[0].runs == 2);
    CHECK(report_a.rows[0].mean_rmse < 1e-3); // 500 symbols, 60 dB

    const auto bytes_a = slurp(dir_a / "rmse_table.csv");
    const auto bytes_b = slurp(dir_b / "rmse_table.csv");
    CHECK(bytes_a == bytes_b);
    CHECK(bytes_a.find("# config_hash=0x") != std::string::npos);

    fs::remove_all(dir_a.parent_path());
}

TEST_CASE("run_trace writes the scenario taps") {
    auto cfg = tiny_static_config();
    const auto dir = temp_dir("trace");
    RunOptions options;
    options.out_dir = dir.string();
    const auto files = run_trace(cfg, options);
    REQUIRE(files.size() == 1);
    const auto bytes = slurp(files[0]);
    // suburban truth: delays 100, 200, 300
    CHECK(bytes.find("0,0,100,") != std::string::npos);
    CHECK(bytes.find("0,0,200,") != std::string::npos);
    CHECK(bytes.find("0,0,300,") != std::string::npos);
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir.parent_path());
}

TEST_CASE("estimator/scenario transmitter mismatch is rejected") {
    auto cfg = tiny_static_config();
    cfg.scenario.estimator.num_transmitters = 3;
    RunOptions options;
    options.out_dir = temp_dir("mismatch").string();
    CHECK_THROWS_AS(run_static(cfg, options), std::invalid_argument);
    fs::remove_all(fs::path(options.out_dir).parent_path());
}
