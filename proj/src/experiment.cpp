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
#include "multicell/channels.hpp"
#include "multicell/param.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace multicell
{

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

double from_db(double x) { return std::pow(10.0, x / 10.0); }

int line_of(const YAML::Node &n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <typename T>
T as(const YAML::Node &n, const std::string &what)
{
    try
    {
        return n.as<T>();
    }
    catch (const YAML::Exception &)
    {
        throw ConfigError("bad value for '" + what + "'", line_of(n));
    }
}

void allow_keys(const YAML::Node &sec, const std::string &name, const std::set<std::string> &keys)
{
    if (!sec.IsMap())
        throw ConfigError("section '" + name + "' must be a map", line_of(sec));
    for (const auto &kv : sec)
    {
        const std::string k = kv.first.as<std::string>();
        if (!keys.count(k))
            throw ConfigError("unknown key '" + k + "' in section '" + name + "'", line_of(kv.first));
    }
}

// Reads `base` (linear) or `base_db`; both at once is an error.
std::optional<double> quantity(const YAML::Node &sec, const std::string &base)
{
    const YAML::Node lin = sec[base];
    const YAML::Node db = sec[base + "_db"];
    if (lin && db)
        throw ConfigError("give either '" + base + "' or '" + base + "_db'", line_of(db));
    if (db)
        return from_db(as<double>(db, base + "_db"));
    if (lin)
        return as<double>(lin, base);
    return std::nullopt;
}

std::optional<double> angle(const YAML::Node &sec, const std::string &base)
{
    const YAML::Node rad = sec[base];
    const YAML::Node deg = sec[base + "_deg"];
    if (rad && deg)
        throw ConfigError("give either '" + base + "' or '" + base + "_deg'", line_of(deg));
    if (deg)
        return as<double>(deg, base + "_deg") * kDeg;
    if (rad)
        return as<double>(rad, base);
    return std::nullopt;
}

std::vector<TerminalSet> read_sets(const YAML::Node &n, const std::string &what)
{
    if (!n.IsSequence())
        throw ConfigError("'" + what + "' must be a list of lists", line_of(n));
    std::vector<TerminalSet> out;
    for (const auto &s : n)
    {
        TerminalSet t = as<TerminalSet>(s, what);
        std::sort(t.begin(), t.end());
        out.push_back(std::move(t));
    }
    return out;
}

RMatrix read_matrix(const YAML::Node &n, int rows, int cols, const std::string &what, bool db)
{
    RMatrix m(rows, cols);
    if (n.IsScalar())
    {
        m.setConstant(as<double>(n, what));
    }
    else
    {
        if (!n.IsSequence() || static_cast<int>(n.size()) != rows)
            throw ConfigError("'" + what + "' needs " + std::to_string(rows) + " rows", line_of(n));
        for (int i = 0; i < rows; ++i)
        {
            const auto row = as<std::vector<double>>(n[static_cast<std::size_t>(i)], what);
            if (static_cast<int>(row.size()) != cols)
                throw ConfigError("'" + what + "' needs " + std::to_string(cols) + " columns",
                                  line_of(n[static_cast<std::size_t>(i)]));
            for (int j = 0; j < cols; ++j)
                m(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    if (db)
        m = m.unaryExpr([](double x) { return from_db(x); });
    return m;
}

bool needs_transmitter_limits(StrategyKind s)
{
    return s != StrategyKind::grid && s != StrategyKind::grid_incoherent;
}

void validate(const ExperimentConfig &cfg)
{
    if (cfg.num_tx < 1 || cfg.num_rx < 1 || cfg.num_sc < 1)
        throw ConfigError("dimensions must be positive");
    if (static_cast<int>(cfg.antennas.size()) != cfg.num_tx)
        throw ConfigError("need one antenna count per transmitter");
    for (int n : cfg.antennas)
        if (n < 1)
            throw ConfigError("antenna counts must be positive");
    if (cfg.strategies.empty())
        throw ConfigError("the strategy list is empty");
    if (cfg.realizations < 1)
        throw ConfigError("realizations must be at least 1");
    if (cfg.sweep_values.empty())
        throw ConfigError("sweep values are empty");
    if (!(cfg.power > 0.0) || !(cfg.noise > 0.0))
        throw ConfigError("power and noise must be positive");
    if (cfg.correlation < 0.0 || cfg.correlation > 1.0)
        throw ConfigError("correlation must lie in [0, 1]");
    if (!(cfg.cross_gain_min > 0.0) || cfg.cross_gain_max < cfg.cross_gain_min)
        throw ConfigError("cross gain range must be positive and ordered");
    if (cfg.phase_error < 0.0)
        throw ConfigError("phase error must be nonnegative");
    for (StrategyKind s : cfg.strategies)
        if (needs_transmitter_limits(s) && cfg.constraint_type != "per_transmitter")
            throw ConfigError(to_string(s) + " needs per_transmitter constraints");
    if (cfg.sweep_variable == "terminals")
    {
        if (cfg.path_loss)
            throw ConfigError("a terminals sweep cannot use a path-loss matrix");
        if (cfg.weight_mode == "explicit")
            throw ConfigError("a terminals sweep cannot use explicit weights");
        if (!cfg.home.empty() || cfg.cluster_type == "explicit" || cfg.cluster_type == "interference_channel")
            throw ConfigError("a terminals sweep needs network_mimo or default home_cells clusters");
        for (double v : cfg.sweep_values)
            if (v < 1.0 || v != std::floor(v))
                throw ConfigError("terminal counts must be positive integers");
    }
    if (cfg.sweep_variable == "phase_error")
        for (double v : cfg.sweep_values)
            if (v < 0.0)
                throw ConfigError("phase errors must be nonnegative");
    if (cfg.sweep_variable == "power" || cfg.sweep_variable == "noise")
        for (double v : cfg.sweep_values)
            if (!(v > 0.0))
                throw ConfigError("swept powers must be positive");
    if (cfg.weight_mode == "explicit" && cfg.weights.size() != cfg.num_rx)
        throw ConfigError("need one weight per terminal");
    if (cfg.channel_type == "csv" && cfg.csv_path.empty())
        throw ConfigError("csv channels need a file");
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

ExperimentConfig at_point(const ExperimentConfig &cfg, int s)
{
    ExperimentConfig c = cfg;
    const double v = cfg.sweep_values[static_cast<std::size_t>(s)];
    if (cfg.sweep_variable == "power")
        c.power = v;
    else if (cfg.sweep_variable == "noise")
        c.noise = v;
    else if (cfg.sweep_variable == "phase_error")
        c.phase_error = v;
    else if (cfg.sweep_variable == "terminals")
        c.num_rx = static_cast<int>(v);
    return c;
}

ClusterConfig make_clusters(const ExperimentConfig &c, const Dimensions &d)
{
    if (c.cluster_type == "network_mimo")
        return ClusterConfig::network_mimo(d);
    if (c.cluster_type == "interference_channel")
        return ClusterConfig::interference_channel(d);
    if (c.cluster_type == "explicit")
        return ClusterConfig{c.data_sets, c.coord_sets};
    std::vector<int> home = c.home;
    if (home.empty())
        for (int k = 0; k < d.num_rx; ++k)
            home.push_back(k % d.num_tx);
    return ClusterConfig::home_cells(d, home);
}

PowerConstraintSet make_constraints(const ExperimentConfig &c, const Dimensions &d)
{
    if (c.constraint_type == "total")
        return PowerConstraintSet::total(d, c.power);
    if (c.constraint_type == "per_antenna")
        return PowerConstraintSet::per_antenna(d, RVector::Constant(d.total_antennas(), c.power));
    return PowerConstraintSet::per_transmitter(d, RVector::Constant(d.num_tx, c.power));
}

// Home transmitter used by the synthetic path-loss layout.
std::vector<int> layout_home(const ExperimentConfig &c, const Dimensions &d)
{
    std::vector<int> home = c.home;
    if (home.empty())
        for (int k = 0; k < d.num_rx; ++k)
            home.push_back(k % d.num_tx);
    return home;
}

ChannelSet nominal_channels(const ExperimentConfig &c, const Dimensions &d, int realization)
{
    if (c.channel_type == "csv")
        return read_channel_csv(c.csv_path, d, c.noise);
    RMatrix pl;
    if (c.path_loss)
    {
        pl = *c.path_loss;
    }
    else
    {
        // Home link at home_gain, every other link uniform in dB over the cross range.
        const std::vector<int> home = layout_home(c, d);
        std::mt19937_64 rng(stream_seed(c.channel_seed, {std::uint64_t(realization), 7}));
        std::uniform_real_distribution<double> u(10.0 * std::log10(c.cross_gain_min),
                                                 10.0 * std::log10(c.cross_gain_max));
        pl.resize(d.num_tx, d.num_rx);
        for (int k = 0; k < d.num_rx; ++k)
            for (int j = 0; j < d.num_tx; ++j)
                pl(j, k) = j == home[static_cast<std::size_t>(k)] ? c.home_gain : from_db(u(rng));
    }
    return rayleigh(d, pl, stream_seed(c.channel_seed, {std::uint64_t(realization)}), c.noise, c.correlation);
}

StrategyOutput run_strategy(StrategyKind kind, const Scenario &sc, const RVector &w, const ExperimentConfig &c)
{
    switch (kind)
    {
    case StrategyKind::cvsinr:
        return cvsinr(sc, w, c.quality);
    case StrategyKind::dvsinr:
        return dvsinr(sc, w, c.quality, ScheduleState::empty(sc.dims), c.dvsinr);
    case StrategyKind::coordinated_zf:
        return coordinated_zf(sc, w, c.quality);
    case StrategyKind::single_cell:
        return single_cell(sc, w, c.quality, std::nullopt, c.dvsinr);
    case StrategyKind::grid:
    case StrategyKind::grid_incoherent: {
        GridOptions o = c.grid;
        o.restrict_single_transmitter = kind == StrategyKind::grid_incoherent;
        o.workers = 1;
        return grid_search_p1(sc, w, c.quality, o);
    }
    }
    throw InvalidArgument("unknown strategy");
}

SinrModel model_for(StrategyKind kind, SinrChoice choice)
{
    if (choice == SinrChoice::coherent)
        return SinrModel::coherent;
    if (choice == SinrChoice::incoherent || kind == StrategyKind::grid_incoherent)
        return SinrModel::incoherent;
    return SinrModel::coherent;
}

struct Point
{
    Dimensions dims;
    ClusterConfig clusters;
    PowerConstraintSet constraints;
    std::vector<ChannelSet> channels;
    RVector weights;
};

} // namespace

std::string to_string(StrategyKind s)
{
    switch (s)
    {
    case StrategyKind::cvsinr:
        return "cvsinr";
    case StrategyKind::dvsinr:
        return "dvsinr";
    case StrategyKind::coordinated_zf:
        return "coordinated_zf";
    case StrategyKind::single_cell:
        return "single_cell";
    case StrategyKind::grid:
        return "grid";
    case StrategyKind::grid_incoherent:
        return "grid_incoherent";
    }
    return "unknown";
}

std::optional<StrategyKind> strategy_from_string(const std::string &s)
{
    for (StrategyKind k : {StrategyKind::cvsinr, StrategyKind::dvsinr, StrategyKind::coordinated_zf,
                           StrategyKind::single_cell, StrategyKind::grid, StrategyKind::grid_incoherent})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

ExperimentConfig parse_config(const std::string &text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException &e)
    {
        throw ConfigError(e.msg, e.mark.line + 1);
    }
    if (!root.IsMap())
        throw ConfigError("the configuration must be a map of sections", line_of(root));
    allow_keys(root, "top level",
               {"dimensions", "clusters", "constraints", "channel_model", "strategies", "sweep", "seeds"});

    ExperimentConfig cfg;
    if (const YAML::Node d = root["dimensions"])
    {
        allow_keys(d, "dimensions", {"transmitters", "antennas", "terminals", "subcarriers"});
        if (d["transmitters"])
            cfg.num_tx = as<int>(d["transmitters"], "transmitters");
        if (d["terminals"])
            cfg.num_rx = as<int>(d["terminals"], "terminals");
        if (d["subcarriers"])
            cfg.num_sc = as<int>(d["subcarriers"], "subcarriers");
        const int n = static_cast<int>(cfg.antennas.empty() ? 1 : cfg.antennas.front());
        cfg.antennas.assign(static_cast<std::size_t>(std::max(cfg.num_tx, 0)), n);
        if (const YAML::Node a = d["antennas"])
        {
            if (a.IsSequence())
                cfg.antennas = as<std::vector<int>>(a, "antennas");
            else
                cfg.antennas.assign(static_cast<std::size_t>(std::max(cfg.num_tx, 0)), as<int>(a, "antennas"));
        }
    }
    else
    {
        throw ConfigError("missing section 'dimensions'");
    }

    if (const YAML::Node c = root["clusters"])
    {
        allow_keys(c, "clusters", {"type", "home", "data_sets", "coord_sets"});
        if (c["type"])
            cfg.cluster_type = as<std::string>(c["type"], "type");
        static const std::set<std::string> types{"network_mimo", "interference_channel", "home_cells", "explicit"};
        if (!types.count(cfg.cluster_type))
            throw ConfigError("unknown cluster type '" + cfg.cluster_type + "'", line_of(c["type"]));
        if (c["home"])
            cfg.home = as<std::vector<int>>(c["home"], "home");
        if (cfg.cluster_type == "explicit")
        {
            if (!c["data_sets"] || !c["coord_sets"])
                throw ConfigError("explicit clusters need data_sets and coord_sets", line_of(c));
            cfg.data_sets = read_sets(c["data_sets"], "data_sets");
            cfg.coord_sets = read_sets(c["coord_sets"], "coord_sets");
        }
    }

    if (const YAML::Node c = root["constraints"])
    {
        allow_keys(c, "constraints", {"type", "power", "power_db"});
        if (c["type"])
            cfg.constraint_type = as<std::string>(c["type"], "type");
        if (cfg.constraint_type != "per_transmitter" && cfg.constraint_type != "total" &&
            cfg.constraint_type != "per_antenna")
            throw ConfigError("unknown constraint type '" + cfg.constraint_type + "'", line_of(c["type"]));
        if (auto p = quantity(c, "power"))
            cfg.power = *p;
    }

    if (const YAML::Node m = root["channel_model"])
    {
        allow_keys(m, "channel_model",
                   {"type", "path_loss", "path_loss_db", "home_gain", "home_gain_db", "cross_gain_range",
                    "cross_gain_range_db", "noise", "noise_db", "correlation", "phase_error", "phase_error_deg",
                    "file"});
        if (m["type"])
            cfg.channel_type = as<std::string>(m["type"], "type");
        if (cfg.channel_type != "rayleigh" && cfg.channel_type != "csv")
            throw ConfigError("unknown channel model '" + cfg.channel_type + "'", line_of(m["type"]));
        if (m["path_loss"] && m["path_loss_db"])
            throw ConfigError("give either 'path_loss' or 'path_loss_db'", line_of(m["path_loss_db"]));
        if (m["path_loss"])
            cfg.path_loss = read_matrix(m["path_loss"], cfg.num_tx, cfg.num_rx, "path_loss", false);
        if (m["path_loss_db"])
            cfg.path_loss = read_matrix(m["path_loss_db"], cfg.num_tx, cfg.num_rx, "path_loss_db", true);
        if (auto g = quantity(m, "home_gain"))
            cfg.home_gain = *g;
        if (m["cross_gain_range"] && m["cross_gain_range_db"])
            throw ConfigError("give either 'cross_gain_range' or 'cross_gain_range_db'",
                              line_of(m["cross_gain_range_db"]));
        for (const char *key : {"cross_gain_range", "cross_gain_range_db"})
            if (const YAML::Node r = m[key])
            {
                const auto v = as<std::vector<double>>(r, key);
                if (v.size() != 2)
                    throw ConfigError(std::string("'") + key + "' needs two values", line_of(r));
                const bool db = std::string(key).ends_with("_db");
                cfg.cross_gain_min = db ? from_db(v[0]) : v[0];
                cfg.cross_gain_max = db ? from_db(v[1]) : v[1];
            }
        if (auto n = quantity(m, "noise"))
            cfg.noise = *n;
        if (m["correlation"])
            cfg.correlation = as<double>(m["correlation"], "correlation");
        if (auto p = angle(m, "phase_error"))
            cfg.phase_error = *p;
        if (m["file"])
            cfg.csv_path = as<std::string>(m["file"], "file");
    }

    if (const YAML::Node s = root["strategies"])
    {
        allow_keys(s, "strategies",
                   {"run", "quality", "order", "constellation", "weights", "sinr_model", "utility", "grid", "dvsinr"});
        if (!s["run"] || !s["run"].IsSequence())
            throw ConfigError("'strategies.run' must be a list", line_of(s));
        for (const auto &n : s["run"])
        {
            const auto name = as<std::string>(n, "run");
            const auto k = strategy_from_string(name);
            if (!k)
                throw ConfigError("unknown strategy '" + name + "'", line_of(n));
            cfg.strategies.push_back(*k);
        }
        std::string quality = "rate", family = "qam";
        int order = 4;
        if (s["quality"])
            quality = as<std::string>(s["quality"], "quality");
        if (s["order"])
            order = as<int>(s["order"], "order");
        if (s["constellation"])
            family = as<std::string>(s["constellation"], "constellation");
        if (quality == "rate")
            cfg.quality = QualityFunction::rate();
        else if (quality == "mse")
            cfg.quality = QualityFunction::mse();
        else if (quality == "chernoff_ser")
        {
            Constellation fam;
            if (family == "pam")
                fam = Constellation::pam;
            else if (family == "psk")
                fam = Constellation::psk;
            else if (family == "qam")
                fam = Constellation::qam;
            else
                throw ConfigError("unknown constellation '" + family + "'", line_of(s["constellation"]));
            if (order < 2)
                throw ConfigError("constellation order must be at least 2", line_of(s["order"]));
            cfg.quality = QualityFunction::chernoff_ser(order, fam);
        }
        else
            throw ConfigError("unknown quality '" + quality + "'", line_of(s["quality"]));
        if (const YAML::Node w = s["weights"])
        {
            if (w.IsSequence())
            {
                const auto v = as<std::vector<double>>(w, "weights");
                cfg.weights = Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
                cfg.weight_mode = "explicit";
                if ((cfg.weights.array() < 0.0).any())
                    throw ConfigError("weights must be nonnegative", line_of(w));
            }
            else
            {
                cfg.weight_mode = as<std::string>(w, "weights");
                if (cfg.weight_mode != "equal" && cfg.weight_mode != "proportional_fair")
                    throw ConfigError("weights must be 'equal', 'proportional_fair' or a list", line_of(w));
            }
        }
        if (const YAML::Node m = s["sinr_model"])
        {
            const auto v = as<std::string>(m, "sinr_model");
            if (v == "auto")
                cfg.sinr = SinrChoice::automatic;
            else if (v == "coherent")
                cfg.sinr = SinrChoice::coherent;
            else if (v == "incoherent")
                cfg.sinr = SinrChoice::incoherent;
            else
                throw ConfigError("sinr_model must be auto, coherent or incoherent", line_of(m));
        }
        if (const YAML::Node u = s["utility"])
        {
            const auto v = as<std::string>(u, "utility");
            if (v == "weighted_sum")
                cfg.grid.utility = UtilityKind::weighted_sum;
            else if (v == "max_min")
                cfg.grid.utility = UtilityKind::weighted_max_min;
            else
                throw ConfigError("utility must be weighted_sum or max_min", line_of(u));
        }
        if (const YAML::Node g = s["grid"])
        {
            allow_keys(g, "strategies.grid",
                       {"resolution", "refine_starts", "refine_evaluations", "natural_units", "max_associations"});
            if (g["resolution"])
                cfg.grid.resolution = as<int>(g["resolution"], "resolution");
            if (g["refine_starts"])
                cfg.grid.refine_starts = as<int>(g["refine_starts"], "refine_starts");
            if (g["refine_evaluations"])
                cfg.grid.refine_evaluations = as<int>(g["refine_evaluations"], "refine_evaluations");
            if (g["natural_units"])
                cfg.grid.natural_units = as<bool>(g["natural_units"], "natural_units");
            if (g["max_associations"])
                cfg.grid.max_associations = as<int>(g["max_associations"], "max_associations");
            if (cfg.grid.resolution < 2)
                throw ConfigError("grid resolution must be at least 2", line_of(g["resolution"]));
        }
        if (const YAML::Node v = s["dvsinr"])
        {
            allow_keys(v, "strategies.dvsinr", {"tau", "slots"});
            if (v["tau"])
                cfg.dvsinr.tau = as<double>(v["tau"], "tau");
            if (v["slots"])
                cfg.dvsinr.slots = as<int>(v["slots"], "slots");
            if (cfg.dvsinr.slots < 1)
                throw ConfigError("slots must be at least 1", line_of(v["slots"]));
        }
    }
    else
    {
        throw ConfigError("missing section 'strategies'");
    }

    if (const YAML::Node s = root["sweep"])
    {
        allow_keys(s, "sweep", {"variable", "values", "realizations"});
        if (s["variable"])
            cfg.sweep_label = as<std::string>(s["variable"], "variable");
        static const std::set<std::string> vars{"none",  "power", "power_db", "noise", "noise_db", "phase_error",
                                                "phase_error_deg", "terminals"};
        if (!vars.count(cfg.sweep_label))
            throw ConfigError("unknown sweep variable '" + cfg.sweep_label + "'", line_of(s["variable"]));
        if (s["values"])
            cfg.sweep_labels = as<std::vector<double>>(s["values"], "values");
        if (cfg.sweep_label != "none" && !s["values"])
            throw ConfigError("sweep values are missing", line_of(s));
        if (cfg.sweep_label == "none")
            cfg.sweep_labels = {0.0};
        if (s["realizations"])
            cfg.realizations = as<int>(s["realizations"], "realizations");
        cfg.sweep_variable = cfg.sweep_label;
        cfg.sweep_values = cfg.sweep_labels;
        if (cfg.sweep_label.ends_with("_db"))
        {
            cfg.sweep_variable = cfg.sweep_label.substr(0, cfg.sweep_label.size() - 3);
            for (double &v : cfg.sweep_values)
                v = from_db(v);
        }
        else if (cfg.sweep_label.ends_with("_deg"))
        {
            cfg.sweep_variable = cfg.sweep_label.substr(0, cfg.sweep_label.size() - 4);
            for (double &v : cfg.sweep_values)
                v *= kDeg;
        }
    }

    if (const YAML::Node s = root["seeds"])
    {
        allow_keys(s, "seeds", {"channels", "phase"});
        if (s["channels"])
            cfg.channel_seed = as<std::uint64_t>(s["channels"], "channels");
        if (s["phase"])
            cfg.phase_seed = as<std::uint64_t>(s["phase"], "phase");
    }

    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Dimensions config_dimensions(const ExperimentConfig &cfg, int sweep_index)
{
    const ExperimentConfig c = at_point(cfg, sweep_index);
    Dimensions d;
    d.num_tx = c.num_tx;
    d.antennas = c.antennas;
    d.num_rx = c.num_rx;
    d.num_sc = c.num_sc;
    d.validate();
    return d;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, int workers, const ProgressFn &progress)
{
    validate(cfg);
    const int npoints = static_cast<int>(cfg.sweep_values.size());
    const int nreal = cfg.channel_type == "csv" && cfg.phase_error == 0.0 && cfg.sweep_variable != "phase_error"
                          ? 1
                          : cfg.realizations;

    // Nominal channels and weights per sweep point. Scenario validation
    // errors surface here as configuration errors.
    std::vector<Point> points;
    for (int s = 0; s < npoints; ++s)
    {
        const ExperimentConfig c = at_point(cfg, s);
        Point p;
        try
        {
            p.dims = config_dimensions(cfg, s);
            p.clusters = make_clusters(c, p.dims);
            p.constraints = make_constraints(c, p.dims);
            validate_clusters(p.clusters, p.dims);
            const auto report = validate_power_constraints(p.constraints, build_selection_masks(p.clusters, p.dims));
            if (!report.ok())
                throw InvalidArgument(report.summary());
            if (!c.home.empty() && static_cast<int>(c.home.size()) != p.dims.num_rx)
                throw InvalidArgument("need one home transmitter per terminal");
            for (StrategyKind k : cfg.strategies)
                if ((k == StrategyKind::grid || k == StrategyKind::grid_incoherent) &&
                    p.dims.num_rx * p.dims.num_sc + p.constraints.size() > cfg.grid.max_dimensions)
                    throw InvalidArgument("grid strategies allow at most " +
                                          std::to_string(cfg.grid.max_dimensions) + " parameters");
        }
        catch (const ConfigError &)
        {
            throw;
        }
        catch (const InvalidArgument &e)
        {
            throw ConfigError(e.what());
        }
        for (int r = 0; r < nreal; ++r)
            p.channels.push_back(nominal_channels(c, p.dims, r));
        if (cfg.weight_mode == "explicit")
            p.weights = cfg.weights;
        else if (cfg.weight_mode == "equal")
            p.weights = RVector::Ones(p.dims.num_rx);
        else
            p.weights = proportional_fair_weights(p.channels, RVector::Constant(p.dims.num_tx, c.power));
        points.push_back(std::move(p));
    }

    const std::size_t nstrat = cfg.strategies.size();
    const std::size_t ntasks = static_cast<std::size_t>(npoints) * static_cast<std::size_t>(nreal);
    std::vector<RunRecord> runs(ntasks * nstrat);
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;

    auto task = [&](std::size_t t) {
        const int s = static_cast<int>(t / static_cast<std::size_t>(nreal));
        const int r = static_cast<int>(t % static_cast<std::size_t>(nreal));
        const ExperimentConfig c = at_point(cfg, s);
        const Point &p = points[static_cast<std::size_t>(s)];
        const Scenario nominal = Scenario::make(p.channels[static_cast<std::size_t>(r)], p.clusters, p.constraints);
        const Scenario actual =
            c.phase_error > 0.0
                ? nominal.with_channels(phase_perturb(nominal.channels, c.phase_error,
                                                      stream_seed(c.phase_seed, {std::uint64_t(r)})))
                : nominal;
        for (std::size_t i = 0; i < nstrat; ++i)
        {
            RunRecord &rec = runs[t * nstrat + i];
            rec.strategy = cfg.strategies[i];
            rec.sweep_index = s;
            rec.realization = r;
            try
            {
                const StrategyOutput planned = run_strategy(rec.strategy, nominal, p.weights, c);
                // Score the stored allocation on the channels it meets.
                const StrategyOutput out =
                    evaluate_allocation(planned.strategy, planned.allocation, planned.schedule, actual, p.weights,
                                        c.quality, model_for(rec.strategy, c.sinr));
                rec.utility = system_utility({c.grid.utility, p.weights}, out.per_terminal_quality);
                rec.per_terminal_rate = out.per_terminal_rate;
                rec.sum_rate = out.per_terminal_rate.sum();
                rec.weighted_rate = p.weights.dot(out.per_terminal_rate);
                for (int cc = 0; cc < p.dims.num_sc; ++cc)
                    for (int k = 0; k < p.dims.num_rx; ++k)
                    {
                        const double pw = out.allocation.power(k, cc);
                        rec.scheduled += pw > 0.0 ? 1 : 0;
                        rec.terminals.push_back({k, cc, std::log2(1.0 + out.sinr(k, cc)), pw, out.sinr(k, cc)});
                    }
                rec.active_constraints = static_cast<int>(
                    tight_constraints(consumed_power(out.allocation, nominal), nominal.constraints.q).size());
            }
            catch (const std::exception &e)
            {
                rec.ok = false;
                rec.message = e.what();
            }
        }
        if (progress)
        {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress("sweep point " + std::to_string(s) + " realization " + std::to_string(r) + " done");
        }
    };
    auto worker = [&] {
        for (std::size_t t = next++; t < ntasks; t = next++)
            task(t);
    };
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(ntasks)));
    if (nw == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }

    ExperimentResult res;
    res.config = cfg;
    for (const auto &p : points)
        res.weights.push_back(p.weights);
    res.runs = std::move(runs);
    return res;
}

std::vector<std::pair<double, double>> compute_cdf(std::vector<double> samples)
{
    if (samples.empty())
        throw InvalidArgument("an empirical CDF needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (i + 1 == samples.size() || samples[i + 1] != samples[i])
            out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
    return out;
}

void write_outputs(const ExperimentResult &res, const std::string &dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const ExperimentConfig &cfg = res.config;
    auto open = [&](const std::string &name) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f)
            throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
        return f;
    };
    auto label = [&](int s) { return fmt(cfg.sweep_labels[static_cast<std::size_t>(s)]); };

    {
        auto f = open("results.csv");
        f << "strategy,sweep_variable,sweep_value,realization,terminal,subcarrier,rate,power,sinr\n";
        for (const auto &r : res.runs)
            for (const auto &t : r.terminals)
                f << to_string(r.strategy) << ',' << cfg.sweep_label << ',' << label(r.sweep_index) << ','
                  << r.realization << ',' << t.terminal << ',' << t.subcarrier << ',' << fmt(t.rate) << ','
                  << fmt(t.power) << ',' << fmt(t.sinr) << '\n';
    }
    {
        auto f = open("realizations.csv");
        f << "strategy,sweep_variable,sweep_value,realization,status,utility,weighted_rate,sum_rate,scheduled,"
             "active_constraints\n";
        for (const auto &r : res.runs)
            f << to_string(r.strategy) << ',' << cfg.sweep_label << ',' << label(r.sweep_index) << ','
              << r.realization << ',' << (r.ok ? "ok" : "failed") << ',' << fmt(r.utility) << ','
              << fmt(r.weighted_rate) << ',' << fmt(r.sum_rate) << ',' << r.scheduled << ','
              << r.active_constraints << '\n';
    }

    nlohmann::ordered_json summary;
    summary["sweep_variable"] = cfg.sweep_label;
    summary["sweep_values"] = cfg.sweep_labels;
    summary["realizations"] = cfg.realizations;
    summary["weights"] = nlohmann::ordered_json::array();
    for (const auto &w : res.weights)
        summary["weights"].push_back(std::vector<double>(w.data(), w.data() + w.size()));
    nlohmann::ordered_json strategies = nlohmann::ordered_json::object();
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    const int npoints = static_cast<int>(cfg.sweep_values.size());
    for (StrategyKind k : cfg.strategies)
    {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int s = 0; s < npoints; ++s)
        {
            double u = 0.0, wr = 0.0, sr = 0.0, sched = 0.0, act = 0.0;
            int ok = 0, failed = 0;
            std::vector<double> rates;
            for (const auto &r : res.runs)
            {
                if (r.strategy != k || r.sweep_index != s)
                    continue;
                if (!r.ok)
                {
                    ++failed;
                    failures.push_back({{"strategy", to_string(k)},
                                        {"sweep_value", cfg.sweep_labels[static_cast<std::size_t>(s)]},
                                        {"realization", r.realization},
                                        {"message", r.message}});
                    continue;
                }
                ++ok;
                u += r.utility;
                wr += r.weighted_rate;
                sr += r.sum_rate;
                sched += r.scheduled;
                act += r.active_constraints;
                for (Eigen::Index i = 0; i < r.per_terminal_rate.size(); ++i)
                    rates.push_back(r.per_terminal_rate(i));
            }
            nlohmann::ordered_json row;
            row["sweep_value"] = cfg.sweep_labels[static_cast<std::size_t>(s)];
            row["ok"] = ok;
            row["failed"] = failed;
            if (ok > 0)
            {
                row["mean_utility"] = u / ok;
                row["mean_weighted_rate"] = wr / ok;
                row["mean_sum_rate"] = sr / ok;
                row["mean_scheduled"] = sched / ok;
                row["mean_active_constraints"] = act / ok;
                auto f = open("cdf_" + to_string(k) + "_" + std::to_string(s) + ".csv");
                f << "rate,probability\n";
                for (const auto &[v, pr] : compute_cdf(rates))
                    f << fmt(v) << ',' << fmt(pr) << '\n';
            }
            rows.push_back(row);
        }
        strategies[to_string(k)] = rows;
    }
    summary["strategies"] = strategies;
    summary["failures"] = failures;
    auto f = open("summary.json");
    f << summary.dump(2) << '\n';
}

} // namespace multicell
