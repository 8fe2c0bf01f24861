// SPDX-License-Identifier: Apache-2.0
//
// multicell: coordinated multicell OFDMA resource allocation
// Copyright (C) 2026 The multicell authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "multicell/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace multicell;
namespace fs = std::filesystem;

namespace
{

// Two lines; line numbers in the error tests count from here.
const std::string kDims = "dimensions:\n  terminals: 2\n";

const char *kSmall = R"(dimensions:
  transmitters: 2
  antennas: 2
  terminals: 3
clusters:
  type: network_mimo
constraints:
  power_db: 0
channel_model:
  cross_gain_range_db: [-10, 0]
  noise_db: -10
strategies:
  run: [cvsinr, dvsinr, coordinated_zf, single_cell]
sweep:
  variable: power_db
  values: [0, 10]
  realizations: 4
seeds:
  channels: 5
  phase: 6
)";

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string &name)
{
    const fs::path d = fs::temp_directory_path() / ("multicell_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_sim(const std::string &args)
{
    const int rc = std::system((std::string(MULTICELL_SIM) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("empirical cdf")
{
    const auto f = compute_cdf({3.0, 1.0, 2.0});
    REQUIRE(f.size() == 3);
    CHECK(f[0] == std::pair{1.0, 1.0 / 3.0});
    CHECK(f[1] == std::pair{2.0, 2.0 / 3.0});
    CHECK(f[2] == std::pair{3.0, 1.0});

    const auto flat = compute_cdf({4.0, 4.0, 4.0, 4.0});
    REQUIRE(flat.size() == 1);
    CHECK(flat[0] == std::pair{4.0, 1.0});

    CHECK(compute_cdf({2.0, 0.5, 2.0, 7.0}) == compute_cdf({7.0, 2.0, 2.0, 0.5}));
    CHECK(compute_cdf({2.0, 0.5, 2.0, 7.0})[1] == std::pair{2.0, 0.75});
    CHECK_THROWS_AS(compute_cdf({}), InvalidArgument);
}

TEST_CASE("config parsing")
{
    const ExperimentConfig cfg = parse_config(kSmall);
    CHECK(cfg.num_tx == 2);
    CHECK(cfg.antennas == std::vector<int>{2, 2});
    CHECK(cfg.num_rx == 3);
    CHECK(cfg.strategies.size() == 4);
    CHECK(cfg.noise == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cfg.cross_gain_min == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cfg.sweep_variable == "power");
    REQUIRE(cfg.sweep_values.size() == 2);
    CHECK(cfg.sweep_values[1] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(cfg.sweep_labels[1] == 10.0);
    CHECK(cfg.channel_seed == 5);

    const ExperimentConfig deg = parse_config(kDims + "strategies:\n  run: [dvsinr]\nsweep:\n  variable: phase_error_deg\n"
                                              "  values: [0, 90]\n");
    CHECK(deg.sweep_variable == "phase_error");
    CHECK(deg.sweep_values[1] == doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("config errors carry line numbers")
{
    SUBCASE("empty strategy list")
    {
        CHECK_THROWS_AS(parse_config(kDims + "strategies:\n  run: []\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("dimensions:\n  terminals: 2\n"), ConfigError);
    }
    SUBCASE("unknown key")
    {
        try
        {
            parse_config(kDims + "strategies:\n  run: [cvsinr]\nsweep:\n  realisations: 3\n");
            FAIL("expected a ConfigError");
        }
        catch (const ConfigError &e)
        {
            CHECK(e.line == 6);
            CHECK(std::string(e.what()).find("line 6") != std::string::npos);
        }
    }
    SUBCASE("unknown strategy")
    {
        try
        {
            parse_config(kDims + "strategies:\n  run: [cvsinr,\n        magic]\n");
            FAIL("expected a ConfigError");
        }
        catch (const ConfigError &e)
        {
            CHECK(e.line == 5);
        }
    }
    SUBCASE("malformed yaml")
    {
        CHECK_THROWS_AS(parse_config("strategies: [\n"), ConfigError);
    }
    SUBCASE("both linear and dB")
    {
        CHECK_THROWS_AS(parse_config(kDims + "strategies:\n  run: [coordinated_zf]\nconstraints:\n  power: 1\n  power_db: 0\n"),
                        ConfigError);
    }
    SUBCASE("missing file")
    {
        CHECK_THROWS_AS(load_config("/nonexistent/multicell.yaml"), ConfigError);
    }
}

TEST_CASE("run_experiment records every run and does not depend on the worker count")
{
    const ExperimentConfig cfg = parse_config(kSmall);
    const ExperimentResult a = run_experiment(cfg, 1);
    const ExperimentResult b = run_experiment(cfg, 3);
    REQUIRE(a.runs.size() == 2 * 4 * 4);
    REQUIRE(b.runs.size() == a.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i)
    {
        const RunRecord &x = a.runs[i], &y = b.runs[i];
        CHECK(x.strategy == y.strategy);
        CHECK(x.realization == y.realization);
        CHECK(x.ok);
        CHECK(x.utility == y.utility);
        CHECK(x.sum_rate == y.sum_rate);
        CHECK(x.scheduled == y.scheduled);

        // the utility is recomputed from the stored SINRs
        RVector rate = RVector::Zero(cfg.num_rx);
        for (const auto &t : x.terminals)
        {
            CHECK(t.rate == doctest::Approx(std::log2(1.0 + t.sinr)).epsilon(1e-12));
            rate(t.terminal) += t.rate;
        }
        const RVector &w = a.weights[static_cast<std::size_t>(x.sweep_index)];
        CHECK(x.utility == doctest::Approx(w.dot(rate)).epsilon(1e-10));
        CHECK(x.sum_rate == doctest::Approx(rate.sum()).epsilon(1e-10));
    }
}

TEST_CASE("write_outputs produces the tables")
{
    const ExperimentConfig cfg = parse_config(kSmall);
    const fs::path dir = scratch_dir("outputs");
    write_outputs(run_experiment(cfg, 1), dir.string());
    for (const char *f : {"results.csv", "realizations.csv", "summary.json", "cdf_cvsinr_0.csv", "cdf_single_cell_1.csv"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    const std::string results = slurp(dir / "results.csv");
    CHECK(results.rfind("strategy,sweep_variable,sweep_value,realization,terminal,subcarrier,rate,power", 0) == 0);
    // one row per (strategy, point, realization, terminal) plus the header
    CHECK(std::count(results.begin(), results.end(), '\n') == 1 + 4 * 2 * 4 * 3);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes")
{
    const fs::path dir = scratch_dir("cli");
    CHECK(run_sim("") == 2);
    CHECK(run_sim("-c /nonexistent/multicell.yaml") == 2);
    {
        std::ofstream(dir / "bad.yaml") << kDims << "strategies:\n  run: [cvsinr]\nsweep:\n  realisations: 3\n";
    }
    CHECK(run_sim("-c " + (dir / "bad.yaml").string() + " -o " + (dir / "bad").string()) == 2);
    {
        std::ofstream(dir / "good.yaml") << kSmall;
    }
    CHECK(run_sim("-c " + (dir / "good.yaml").string() + " -o " + (dir / "out").string() + " -w 2") == 0);
    CHECK(fs::exists(dir / "out" / "summary.json"));
    CHECK(run_sim("--help") == 0);
    fs::remove_all(dir);
}

TEST_CASE("command-line output is byte-identical across worker counts")
{
    const fs::path dir = scratch_dir("determinism");
    const std::string cfg = std::string(MULTICELL_CONFIGS) + "/power_sweep.yaml";
    REQUIRE(run_sim("-c " + cfg + " -o " + (dir / "w1").string() + " -w 1 -s 11") == 0);
    REQUIRE(run_sim("-c " + cfg + " -o " + (dir / "w3").string() + " -w 3 -s 11") == 0);
    int files = 0;
    for (const auto &e : fs::directory_iterator(dir / "w1"))
    {
        ++files;
        CHECK_MESSAGE(slurp(e.path()) == slurp(dir / "w3" / e.path().filename()), e.path().filename().string());
    }
    CHECK(files >= 4);
    fs::remove_all(dir);
}
