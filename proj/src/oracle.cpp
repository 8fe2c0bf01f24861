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

#include "multicell/oracle.hpp"
#include "multicell/param.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace multicell
{

namespace
{

// Coordinates: lambda column-major (k fastest), then omega, each multiplied
// by its unit.
DualParams params_from(const RVector &x, const RVector &unit, int num_rx, int num_sc, int num_constraints)
{
    const RVector p = x.cwiseProduct(unit);
    DualParams d;
    d.lambda = Eigen::Map<const RMatrix>(p.data(), num_rx, num_sc);
    d.omega = p.tail(num_constraints);
    return d;
}

double utility_of(const RVector &weights, const RVector &g, UtilityKind kind)
{
    return system_utility({kind, weights}, g);
}

} // namespace

std::optional<StrategyOutput> evaluate_params(const DualParams &duals, const Scenario &sc, const RVector &weights,
                                              const QualityFunction &qf, UtilityKind utility, SinrModel model)
{
    if (!(duals.omega.array() > 0.0).any())
        return std::nullopt;
    RealizedAllocation ra;
    try
    {
        ra = realize_allocation(duals, sc);
    }
    catch (const UnservableError &)
    {
        return std::nullopt;
    }
    if (!ra.nonnegative)
        return std::nullopt;
    rescale_full_power(ra.alloc, sc);
    ServeSets serve = ScheduleState::empty(sc.dims).serve;
    for (int c = 0; c < sc.dims.num_sc; ++c)
        for (int k = 0; k < sc.dims.num_rx; ++k)
            if (ra.alloc.power(k, c) > 0.0)
                for (int j = 0; j < sc.dims.num_tx; ++j)
                    if (sc.clusters.serves(j, k))
                        serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].push_back(k);
    StrategyOutput out =
        evaluate_allocation("grid", std::move(ra.alloc), make_schedule(sc, std::move(serve), false), sc, weights, qf, model);
    out.utility = utility_of(weights, out.per_terminal_quality, utility);
    out.params = duals;
    return out;
}

namespace
{

// Every point of a g-level grid on [0, 1]^dim with some coordinate at the top level.
std::vector<RVector> pinned_points(int dim, int g)
{
    std::vector<RVector> out;
    const double h = 1.0 / (g - 1);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (;;)
    {
        if (std::find(idx.begin(), idx.end(), g - 1) != idx.end())
        {
            RVector x(dim);
            for (int i = 0; i < dim; ++i)
                x(i) = idx[static_cast<std::size_t>(i)] * h;
            out.push_back(std::move(x));
        }
        int i = 0;
        while (i < dim && ++idx[static_cast<std::size_t>(i)] == g)
            idx[static_cast<std::size_t>(i++)] = 0;
        if (i == dim)
            break;
    }
    return out;
}

struct PointEvaluator
{
    const std::vector<Scenario> &scenarios;
    const RVector &weights;
    const QualityFunction &qf;
    UtilityKind utility;
    SinrModel model;
    RVector unit;

    std::optional<StrategyOutput> operator()(std::size_t s, const RVector &x) const
    {
        const Dimensions &d = scenarios[s].dims;
        return evaluate_params(params_from(x, unit, d.num_rx, d.num_sc, scenarios[s].constraints.size()),
                               scenarios[s], weights, qf, utility, model);
    }

    // Utilities of every (scenario, point) pair, scenario-major; -inf where skipped.
    std::vector<double> all(const std::vector<RVector> &points, int workers) const
    {
        const std::size_t np = points.size();
        std::vector<double> value(np * scenarios.size(), -std::numeric_limits<double>::infinity());
        auto run = [&](std::size_t w) {
            for (std::size_t i = w; i < value.size(); i += static_cast<std::size_t>(workers))
                if (const auto r = (*this)(i / np, points[i % np]))
                    value[i] = r->utility;
        };
        if (workers <= 1)
            run(0);
        else
        {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(run, static_cast<std::size_t>(w));
            for (auto &t : pool)
                t.join();
        }
        return value;
    }
};

struct Candidate
{
    double value;
    std::size_t scenario;
    RVector x;
};

} // namespace

std::vector<std::vector<int>> single_server_associations(const Scenario &sc, std::size_t cap)
{
    std::vector<std::vector<int>> servers(static_cast<std::size_t>(sc.dims.num_rx));
    double count = 1.0;
    for (int k = 0; k < sc.dims.num_rx; ++k)
    {
        for (int j = 0; j < sc.dims.num_tx; ++j)
            if (sc.clusters.serves(j, k))
                servers[static_cast<std::size_t>(k)].push_back(j);
        count *= static_cast<double>(servers[static_cast<std::size_t>(k)].size());
    }
    if (count > static_cast<double>(cap))
        return {strongest_server(sc)};
    std::vector<std::vector<int>> out;
    std::vector<std::size_t> idx(servers.size(), 0);
    for (;;)
    {
        std::vector<int> home(servers.size());
        for (std::size_t k = 0; k < servers.size(); ++k)
            home[k] = servers[k][idx[k]];
        out.push_back(std::move(home));
        std::size_t k = 0;
        while (k < servers.size() && ++idx[k] == servers[k].size())
            idx[k++] = 0;
        if (k == servers.size())
            break;
    }
    return out;
}

Scenario single_transmitter_restriction(const Scenario &sc, const std::vector<int> &home)
{
    if (home.size() != static_cast<std::size_t>(sc.dims.num_rx))
        throw InvalidArgument("need one serving transmitter per terminal");
    ClusterConfig cl = sc.clusters;
    for (auto &s : cl.data_sets)
        s.clear();
    for (int k = 0; k < sc.dims.num_rx; ++k)
    {
        const int j = home[static_cast<std::size_t>(k)];
        if (j < 0 || j >= sc.dims.num_tx || !sc.clusters.serves(j, k))
            throw InvalidArgument("terminal " + std::to_string(k) + " is not served by transmitter " +
                                  std::to_string(j));
        cl.data_sets[static_cast<std::size_t>(j)].push_back(k);
    }
    return Scenario::make(sc.channels, std::move(cl), sc.constraints);
}

StrategyOutput grid_search_p1(const Scenario &sc_in, const RVector &weights, const QualityFunction &qf,
                              const GridOptions &opts)
{
    const Dimensions &d = sc_in.dims;
    const int nl = sc_in.constraints.size();
    const int dim = d.num_rx * d.num_sc + nl;
    if (dim > opts.max_dimensions)
        throw InvalidArgument("grid search is limited to " + std::to_string(opts.max_dimensions) +
                              " parameters, scenario has " + std::to_string(dim));
    if (opts.resolution < 2)
        throw InvalidArgument("grid resolution must be at least 2");
    if (weights.size() != d.num_rx)
        throw InvalidArgument("need one weight per terminal");

    std::vector<Scenario> scenarios;
    if (opts.restrict_single_transmitter)
        for (const auto &home : single_server_associations(sc_in, static_cast<std::size_t>(opts.max_associations)))
            scenarios.push_back(single_transmitter_restriction(sc_in, home));
    else
        scenarios.push_back(sc_in);

    RVector unit = RVector::Ones(dim);
    if (opts.natural_units)
    {
        for (int c = 0; c < d.num_sc; ++c)
            for (int k = 0; k < d.num_rx; ++k)
                unit(c * d.num_rx + k) = 1.0 / sc_in.channels.noise(k, c);
        for (int l = 0; l < nl; ++l)
            unit(d.num_rx * d.num_sc + l) = d.num_sc / sc_in.constraints.q(l);
    }
    const SinrModel model = opts.restrict_single_transmitter ? SinrModel::incoherent : SinrModel::coherent;
    const int workers = std::max(1, opts.workers);
    const double none = -std::numeric_limits<double>::infinity();

    // With many associations, a 3-level pass picks the ones worth the full grid.
    if (opts.association_prescreen > 0 && static_cast<int>(scenarios.size()) > opts.association_prescreen &&
        opts.resolution > 3)
    {
        const PointEvaluator coarse{scenarios, weights, qf, opts.utility, model, unit};
        const auto pts = pinned_points(dim, 3);
        const auto val = coarse.all(pts, workers);
        std::vector<std::pair<double, std::size_t>> rank;
        for (std::size_t s = 0; s < scenarios.size(); ++s)
        {
            const auto first = val.begin() + static_cast<std::ptrdiff_t>(s * pts.size());
            rank.emplace_back(*std::max_element(first, first + static_cast<std::ptrdiff_t>(pts.size())), s);
        }
        std::stable_sort(rank.begin(), rank.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
        std::vector<Scenario> kept;
        for (int i = 0; i < opts.association_prescreen; ++i)
            kept.push_back(std::move(scenarios[rank[static_cast<std::size_t>(i)].second]));
        scenarios = std::move(kept);
    }

    const PointEvaluator eval{scenarios, weights, qf, opts.utility, model, unit};
    const auto points = pinned_points(dim, opts.resolution);
    const std::size_t np = points.size();
    const std::vector<double> value = eval.all(points, workers);

    std::vector<std::size_t> order(value.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] > value[b]; });
    if (order.empty() || value[order.front()] == none)
        throw NumericalError("no grid point gives a valid allocation");

    Candidate best{value[order.front()], order.front() / np, points[order.front() % np]};

    // Coordinate pattern search from the best grid points.
    const double h = 1.0 / (opts.resolution - 1);
    const int starts = std::min<int>(opts.refine_starts, static_cast<int>(order.size()));
    int evals = 0;
    for (int st = 0; st < starts && evals < opts.refine_evaluations; ++st)
    {
        const std::size_t i = order[static_cast<std::size_t>(st)];
        if (value[i] == none)
            break;
        Candidate cur{value[i], i / np, points[i % np]};
        double step = h / 2.0;
        while (step >= opts.refine_min_step && evals < opts.refine_evaluations)
        {
            bool improved = false;
            for (int a = 0; a < dim && evals < opts.refine_evaluations; ++a)
                for (double sign : {1.0, -1.0})
                {
                    RVector y = cur.x;
                    y(a) = std::clamp(y(a) + sign * step, 0.0, 1.0);
                    if (y(a) == cur.x(a))
                        continue;
                    ++evals;
                    const auto r = eval(cur.scenario, y);
                    if (r && r->utility > cur.value)
                    {
                        cur.x = y;
                        cur.value = r->utility;
                        improved = true;
                    }
                }
            if (!improved)
                step /= 2.0;
        }
        if (cur.value > best.value)
            best = std::move(cur);
    }

    const Scenario &bs = scenarios[best.scenario];
    DualParams duals = params_from(best.x, unit, d.num_rx, d.num_sc, nl).normalized();
    auto out = evaluate_params(duals, bs, weights, qf, opts.utility, model);
    if (!out)
        throw NumericalError("best grid point could not be re-evaluated");
    out->strategy = opts.restrict_single_transmitter ? "grid_incoherent" : "grid";
    if (opts.restrict_single_transmitter)
        out->schedule = make_schedule(sc_in, out->schedule.serve, false);
    return *out;
}

StrategyOutput exhaustive_schedule(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                                   InnerStrategy inner)
{
    const Dimensions &d = sc.dims;
    if (d.num_rx > 6 || d.num_sc > 2)
        throw InvalidArgument("exhaustive scheduling is limited to 6 terminals and 2 subcarriers");
    constexpr double cap = 200000.0;
    std::optional<StrategyOutput> best;
    auto keep = [&](StrategyOutput r) {
        if (!best || r.utility > best->utility)
            best = std::move(r);
    };

    if (inner == InnerStrategy::cvsinr)
    {
        // Subsets per subcarrier with |S_c n C_j| <= N_j.
        std::vector<TerminalSet> admissible;
        for (int mask = 0; mask < (1 << d.num_rx); ++mask)
        {
            TerminalSet s;
            for (int k = 0; k < d.num_rx; ++k)
                if (mask & (1 << k))
                    s.push_back(k);
            bool ok = true;
            for (int j = 0; j < d.num_tx && ok; ++j)
            {
                int n = 0;
                for (int k : s)
                    n += sc.clusters.coordinates(j, k) ? 1 : 0;
                ok = n <= d.antennas[static_cast<std::size_t>(j)];
            }
            if (ok)
                admissible.push_back(std::move(s));
        }
        if (std::pow(static_cast<double>(admissible.size()), d.num_sc) > cap)
            throw InvalidArgument("too many schedules to enumerate");
        std::vector<std::size_t> idx(static_cast<std::size_t>(d.num_sc), 0);
        for (;;)
        {
            CvsinrOptions o;
            o.schedule.emplace();
            for (int c = 0; c < d.num_sc; ++c)
                o.schedule->push_back(admissible[idx[static_cast<std::size_t>(c)]]);
            keep(cvsinr(sc, weights, qf, o));
            int c = 0;
            while (c < d.num_sc && ++idx[static_cast<std::size_t>(c)] == admissible.size())
                idx[static_cast<std::size_t>(c++)] = 0;
            if (c == d.num_sc)
                break;
        }
        return *best;
    }

    // One serving transmitter (or none) per (terminal, subcarrier).
    std::vector<std::vector<int>> options(static_cast<std::size_t>(d.num_rx));
    double count = 1.0;
    for (int k = 0; k < d.num_rx; ++k)
    {
        options[static_cast<std::size_t>(k)].push_back(-1);
        for (int j = 0; j < d.num_tx; ++j)
            if (sc.clusters.serves(j, k))
                options[static_cast<std::size_t>(k)].push_back(j);
        count *= std::pow(static_cast<double>(options[static_cast<std::size_t>(k)].size()), d.num_sc);
    }
    if (count > cap)
        throw InvalidArgument("too many schedules to enumerate");
    const int slots = d.num_rx * d.num_sc;
    std::vector<std::size_t> idx(static_cast<std::size_t>(slots), 0);
    for (;;)
    {
        ServeSets serve = ScheduleState::empty(d).serve;
        for (int s = 0; s < slots; ++s)
        {
            const int k = s / d.num_sc;
            const int c = s % d.num_sc;
            const int j = options[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(s)]];
            if (j >= 0)
                serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].push_back(k);
        }
        bool ok = true;
        for (int j = 0; j < d.num_tx && ok; ++j)
            for (int c = 0; c < d.num_sc && ok; ++c)
                ok = static_cast<int>(serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].size()) <=
                     d.antennas[static_cast<std::size_t>(j)];
        if (ok)
        {
            if (inner == InnerStrategy::dvsinr)
            {
                DvsinrOptions o;
                o.serve = serve;
                keep(dvsinr(sc, weights, qf, ScheduleState::empty(d), o));
            }
            else
            {
                ZfOptions o;
                o.serve = serve;
                keep(coordinated_zf(sc, weights, qf, o));
            }
        }
        int s = 0;
        while (s < slots && ++idx[static_cast<std::size_t>(s)] == options[static_cast<std::size_t>(s / d.num_sc)].size())
            idx[static_cast<std::size_t>(s++)] = 0;
        if (s == slots)
            break;
    }
    return *best;
}

} // namespace multicell
