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

#include "support.hpp"

#include "multicell/dual.hpp"
#include "multicell/oracle.hpp"
#include "multicell/param.hpp"

#include <doctest.h>

#include <cmath>

using namespace multicell;
using test::relative_error;

namespace
{

Scenario small_cellular(std::uint64_t seed, int kr, int kc, double noise)
{
    const Dimensions d = Dimensions::uniform(2, 2, kr, kc);
    RMatrix pl = RMatrix::Constant(2, kr, 0.2);
    std::vector<int> home;
    for (int k = 0; k < kr; ++k)
    {
        home.push_back(k % 2);
        pl(k % 2, k) = 1.0;
    }
    return Scenario::make(rayleigh(d, pl, seed, noise), ClusterConfig::home_cells(d, home),
                          PowerConstraintSet::per_transmitter(d, RVector::Ones(2)));
}

double min_sinr(const StrategyOutput &o)
{
    return o.sinr.minCoeff();
}

} // namespace

TEST_CASE("lone terminal: full-power MRT at the pinned corner")
{
    std::mt19937_64 rng(2);
    const auto d = Dimensions::uniform(1, 3, 1, 2);
    ChannelSet ch(d, 0.3);
    for (int c = 0; c < 2; ++c)
        ch.stacked(0, c) = test::random_cvector(rng, 3);
    const Scenario sc = Scenario::make(ch, ClusterConfig::network_mimo(d),
                                       PowerConstraintSet::per_transmitter(d, RVector::Constant(1, 2.0)));
    GridOptions g;
    g.resolution = 5;
    const auto out = grid_search_p1(sc, RVector::Ones(1), QualityFunction::rate(), g);
    CHECK(consumed_power(out.allocation, sc)(0) == doctest::Approx(2.0).epsilon(1e-12));
    // the optimum splits power by waterfilling, but each stream is MRT
    for (int c = 0; c < 2; ++c)
        if (out.allocation.power(0, c) > 0.0)
            CHECK(std::abs(std::abs(out.allocation.direction(0, c).dot(ch.stacked(0, c).normalized())) - 1.0) < 1e-12);

    // single subcarrier: exactly g(q |h|^2 / sigma^2)
    const auto d1 = Dimensions::uniform(1, 3, 1, 1);
    ChannelSet c1(d1, 0.3);
    c1.stacked(0, 0) = ch.stacked(0, 0);
    const Scenario s1 = Scenario::make(c1, ClusterConfig::network_mimo(d1),
                                       PowerConstraintSet::per_transmitter(d1, RVector::Constant(1, 2.0)));
    const auto o1 = grid_search_p1(s1, RVector::Ones(1), QualityFunction::rate(), g);
    CHECK(relative_error(o1.utility, std::log2(1.0 + 2.0 * c1.stacked(0, 0).squaredNorm() / 0.3)) < 1e-12);
}

TEST_CASE("two-link max-min grid")
{
    const Scenario sc = test::two_link();
    GridOptions g;
    g.utility = UtilityKind::weighted_max_min;
    g.natural_units = false;
    double prev = -INFINITY;
    for (int res : {3, 5, 9, 17})
    {
        g.resolution = res;
        const auto out = grid_search_p1(sc, RVector::Ones(2), QualityFunction::rate(), g);
        CHECK(out.utility >= prev - 1e-12);
        prev = out.utility;
    }
    g.resolution = 21;
    const auto out = grid_search_p1(sc, RVector::Ones(2), QualityFunction::rate(), g);
    CHECK(min_sinr(out) >= 10.0 / 3.0 * 0.95);
    CHECK(min_sinr(out) <= 10.0 / 3.0 * (1.0 + 1e-9));
}

TEST_CASE("nested grids never lose utility")
{
    for (std::uint64_t s = 0; s < 4; ++s)
    {
        const Scenario sc = small_cellular(s, 2, 1, 0.1);
        const RVector mu = (RVector(2) << 1.0, 0.6).finished();
        GridOptions g;
        double prev = -INFINITY;
        for (int res : {3, 5, 9})
        {
            g.resolution = res;
            const auto out = grid_search_p1(sc, mu, QualityFunction::rate(), g);
            CHECK(out.utility >= prev - 1e-12);
            prev = out.utility;
        }
    }
}

TEST_CASE("grid search is not beaten by CVSINR")
{
    for (std::uint64_t s = 0; s < 6; ++s)
    {
        const Scenario sc = small_cellular(s + 10, 2, 1, 0.05);
        const RVector mu = (RVector(2) << 1.0, 0.8).finished();
        GridOptions g;
        g.resolution = 9;
        g.refine_starts = 3;
        const auto grid = grid_search_p1(sc, mu, QualityFunction::rate(), g);
        const auto cv = cvsinr(sc, mu, QualityFunction::rate());
        CHECK(grid.utility >= cv.utility * (1.0 - 1e-3));

        // restricting to one transmitter per stream with incoherent reception
        GridOptions gi = g;
        gi.restrict_single_transmitter = true;
        const auto inc = grid_search_p1(sc, mu, QualityFunction::rate(), gi);
        CHECK(inc.strategy == "grid_incoherent");
        CHECK(inc.utility <= grid.utility * (1.0 + 1e-3));
        for (int k = 0; k < 2; ++k)
        {
            const CVector &v = inc.allocation.direction(k, 0);
            const bool on0 = v.segment(0, 2).norm() > 0.0, on1 = v.segment(2, 2).norm() > 0.0;
            CHECK(!(on0 && on1));
        }
    }
}

TEST_CASE("grid optimum SINRs are feasible targets")
{
    for (std::uint64_t s = 0; s < 4; ++s)
    {
        const Scenario sc = small_cellular(s + 20, 2, 1, 0.1);
        GridOptions g;
        g.resolution = 9;
        const auto out = grid_search_p1(sc, RVector::Ones(2), QualityFunction::rate(), g);
        const P2Result r = solve_p2({out.sinr}, sc);
        CHECK(r.status == P2Status::feasible);
    }
}

TEST_CASE("evaluate_params skips degenerate points")
{
    const Scenario sc = test::two_link();
    DualParams d = DualParams::zeros(2, 2, 1);
    d.lambda.setOnes();
    CHECK_FALSE(evaluate_params(d, sc, RVector::Ones(2), QualityFunction::rate(), UtilityKind::weighted_sum));
    d.omega.setOnes();
    const auto out = evaluate_params(d, sc, RVector::Ones(2), QualityFunction::rate(), UtilityKind::weighted_sum);
    REQUIRE(out);
    CHECK_FALSE(tight_constraints(consumed_power(out->allocation, sc), sc.constraints.q).empty());
}

TEST_CASE("dimension caps")
{
    const Scenario big = small_cellular(1, 4, 2, 0.1); // 8 + 2 parameters
    CHECK_THROWS_AS(grid_search_p1(big, RVector::Ones(4), QualityFunction::rate()), InvalidArgument);
    const Scenario many = small_cellular(1, 7, 1, 0.1);
    CHECK_THROWS_AS(exhaustive_schedule(many, RVector::Ones(7), QualityFunction::rate(), InnerStrategy::dvsinr),
                    InvalidArgument);
}

TEST_CASE("associations")
{
    const Scenario sc = test::random_scenario(3);
    const auto all = single_server_associations(sc, 1000);
    std::size_t expect = 1;
    for (int k = 0; k < sc.dims.num_rx; ++k)
    {
        std::size_t n = 0;
        for (int j = 0; j < sc.dims.num_tx; ++j)
            n += sc.clusters.serves(j, k);
        expect *= n;
    }
    CHECK(all.size() == expect);
    CHECK(single_server_associations(sc, 0).size() == 1);
    CHECK(single_server_associations(sc, 0).front() == strongest_server(sc));
    const Scenario r = single_transmitter_restriction(sc, all.front());
    for (int k = 0; k < sc.dims.num_rx; ++k)
        for (int j = 0; j < sc.dims.num_tx; ++j)
            CHECK(r.clusters.serves(j, k) == (j == all.front()[static_cast<std::size_t>(k)]));
}

TEST_CASE("exhaustive scheduling dominates greedy scheduling")
{
    const auto qf = QualityFunction::rate();
    for (std::uint64_t s = 0; s < 8; ++s)
    {
        const Scenario sc = small_cellular(s + 50, 3 + static_cast<int>(s % 2), 1 + static_cast<int>(s % 2), 0.05);
        const RVector mu = RVector::LinSpaced(sc.dims.num_rx, 0.5, 1.5);
        CHECK(exhaustive_schedule(sc, mu, qf, InnerStrategy::cvsinr).utility >= cvsinr(sc, mu, qf).utility - 1e-9);
        CHECK(exhaustive_schedule(sc, mu, qf, InnerStrategy::dvsinr).utility >=
              dvsinr(sc, mu, qf, ScheduleState::empty(sc.dims)).utility - 1e-9);
        CHECK(exhaustive_schedule(sc, mu, qf, InnerStrategy::coordinated_zf).utility >=
              coordinated_zf(sc, mu, qf).utility - 1e-9);
    }
}

TEST_CASE("exhaustive scheduling on trivial cases")
{
    const auto qf = QualityFunction::rate();
    std::mt19937_64 rng(13);
    {
        const auto d = Dimensions::uniform(1, 2, 1, 1);
        ChannelSet ch(d, 0.5);
        ch.stacked(0, 0) = test::random_cvector(rng, 2);
        const Scenario sc = Scenario::make(ch, ClusterConfig::network_mimo(d),
                                           PowerConstraintSet::per_transmitter(d, RVector::Ones(1)));
        const RVector mu = RVector::Ones(1);
        CHECK(exhaustive_schedule(sc, mu, qf, InnerStrategy::cvsinr).utility ==
              doctest::Approx(cvsinr(sc, mu, qf).utility).epsilon(1e-12));
        CHECK(exhaustive_schedule(sc, mu, qf, InnerStrategy::dvsinr).utility ==
              doctest::Approx(dvsinr(sc, mu, qf, ScheduleState::empty(sc.dims)).utility).epsilon(1e-12));
    }
    {
        const auto d = Dimensions::uniform(1, 2, 2, 1);
        ChannelSet ch(d, 0.5);
        ch.stacked(0, 0) = CVector::Unit(2, 0);
        ch.stacked(1, 0) = CVector::Unit(2, 1);
        const Scenario sc = Scenario::make(ch, ClusterConfig::network_mimo(d),
                                           PowerConstraintSet::per_transmitter(d, RVector::Ones(1)));
        const RVector mu = RVector::Ones(2);
        const auto ex = exhaustive_schedule(sc, mu, qf, InnerStrategy::dvsinr);
        CHECK(ex.schedule.scheduled(0) == TerminalSet{0, 1});
        const auto gr = dvsinr(sc, mu, qf, ScheduleState::empty(sc.dims));
        CHECK(gr.schedule.scheduled(0) == TerminalSet{0, 1});
        CHECK(ex.utility == doctest::Approx(gr.utility).epsilon(1e-12));
    }
}

TEST_CASE("CVSINR is close to the grid on a high-power two-user interference channel")
{
    const Dimensions d = Dimensions::uniform(2, 2, 2, 1);
    for (std::uint64_t s = 0; s < 4; ++s)
    {
        const Scenario sc = Scenario::make(rayleigh(d, RMatrix::Ones(2, 2), s + 60, 1e-3),
                                           ClusterConfig::interference_channel(d),
                                           PowerConstraintSet::per_transmitter(d, RVector::Ones(2)));
        GridOptions g;
        g.resolution = 11;
        g.refine_starts = 3;
        const auto grid = grid_search_p1(sc, RVector::Ones(2), QualityFunction::rate(), g);
        const auto cv = cvsinr(sc, RVector::Ones(2), QualityFunction::rate());
        CHECK(cv.utility >= 0.95 * grid.utility);
    }
}
