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

// Experiment orchestration for the command-line simulator: configuration,
// Monte-Carlo sweeps over a worker pool, empirical CDFs and table output.

#ifndef MULTICELL_EXPERIMENT_HPP
#define MULTICELL_EXPERIMENT_HPP

#include "multicell/oracle.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace multicell
{

/// Configuration problem; `line` is 1-based, 0 when unknown.
class ConfigError : public InvalidArgument
{
public:
    ConfigError(const std::string &msg, int line = 0)
        : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line)
    {
    }
    int line;
};

enum class StrategyKind
{
    cvsinr,
    dvsinr,
    coordinated_zf,
    single_cell,
    grid,
    grid_incoherent,
};

std::string to_string(StrategyKind s);
std::optional<StrategyKind> strategy_from_string(const std::string &s);

enum class SinrChoice
{
    automatic, // incoherent for grid_incoherent, coherent otherwise
    coherent,
    incoherent,
};

struct ExperimentConfig
{
    // dimensions
    int num_tx = 2;
    std::vector<int> antennas{4, 4};
    int num_rx = 4;
    int num_sc = 1;

    // clusters: network_mimo, interference_channel, home_cells or explicit
    std::string cluster_type = "home_cells";
    std::vector<int> home; // empty: k mod num_tx
    std::vector<TerminalSet> data_sets, coord_sets;

    // constraints: per_transmitter, total or per_antenna, all with limit `power`
    std::string constraint_type = "per_transmitter";
    double power = 1.0;

    // channel_model
    std::string channel_type = "rayleigh"; // or csv
    std::optional<RMatrix> path_loss;      // num_tx x num_rx, linear
    double home_gain = 1.0;                // when path_loss is unset
    double cross_gain_min = 0.01;          // uniform in dB between min and max
    double cross_gain_max = 1.0;
    double noise = 0.01;
    double correlation = 0.0;
    double phase_error = 0.0; // radians
    std::string csv_path;

    // strategies
    std::vector<StrategyKind> strategies;
    QualityFunction quality = QualityFunction::rate();
    std::string weight_mode = "proportional_fair"; // equal, proportional_fair, explicit
    RVector weights;
    SinrChoice sinr = SinrChoice::automatic;
    GridOptions grid;
    DvsinrOptions dvsinr;

    // sweep: power, noise, phase_error, terminals or none (values linear / radians)
    std::string sweep_variable = "none";
    std::string sweep_label = "none"; // as written in the file
    std::vector<double> sweep_values{0.0};
    std::vector<double> sweep_labels{0.0}; // values as written in the file
    int realizations = 10;

    // seeds
    std::uint64_t channel_seed = 1;
    std::uint64_t phase_seed = 2;
};

/// Parses YAML text. Keys ending in "_db" are in dB and "_deg" in degrees.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);

/// Dimensions, clusters and constraints of one sweep point.
Dimensions config_dimensions(const ExperimentConfig &cfg, int sweep_index);

struct TerminalRecord
{
    int terminal;
    int subcarrier;
    double rate;
    double power;
    double sinr;
};

struct RunRecord
{
    StrategyKind strategy;
    int sweep_index;
    int realization;
    bool ok = true;
    std::string message;
    double utility = 0.0;  // weighted sum of per-terminal quality
    double sum_rate = 0.0; // unweighted
    double weighted_rate = 0.0;
    int scheduled = 0; // streams with positive power
    int active_constraints = 0;
    std::vector<TerminalRecord> terminals;
    RVector per_terminal_rate;
};

struct ExperimentResult
{
    ExperimentConfig config;
    std::vector<RVector> weights; // per sweep point
    std::vector<RunRecord> runs;  // ordered by (sweep point, realization, strategy)
};

using ProgressFn = std::function<void(const std::string &)>;

/// Runs every (sweep point, realization, strategy). Failures of one run are
/// recorded in its RunRecord. Results do not depend on `workers`.
ExperimentResult run_experiment(const ExperimentConfig &cfg, int workers = 1, const ProgressFn &progress = {});

/// Empirical CDF at the sorted distinct sample values (right-continuous).
std::vector<std::pair<double, double>> compute_cdf(std::vector<double> samples);

/// results.csv, realizations.csv, summary.json and cdf_<strategy>_<point>.csv.
void write_outputs(const ExperimentResult &res, const std::string &dir);

} // namespace multicell

#endif
