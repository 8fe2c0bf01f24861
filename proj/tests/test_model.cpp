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

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace multicell;

namespace
{

ClusterConfig permuted(const ClusterConfig &cl, const std::vector<int> &perm)
{
    ClusterConfig out = cl;
    for (auto *sets : {&out.data_sets, &out.coord_sets})
        for (auto &s : *sets)
        {
            for (int &k : s)
                k = perm[static_cast<std::size_t>(k)];
            std::sort(s.begin(), s.end());
        }
    return out;
}

} // namespace

TEST_CASE("dimensions")
{
    const Dimensions d{3, {2, 1, 4}, 5, 2};
    CHECK(d.total_antennas() == 7);
    CHECK(d.offset(0) == 0);
    CHECK(d.offset(2) == 3);
    CHECK_NOTHROW(d.validate());
    CHECK_THROWS_AS((Dimensions{2, {1}, 1, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((Dimensions{1, {0}, 1, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((Dimensions{1, {1}, 0, 1}.validate()), InvalidArgument);
}

TEST_CASE("stacked channel is the concatenation of transmitter blocks")
{
    const Dimensions d{2, {2, 3}, 1, 1};
    ChannelSet ch(d, 0.5);
    CVector a(2), b(3);
    a << 1.0, 2.0;
    b << 3.0, 4.0, 5.0;
    ch.set_block(0, 0, 0, a);
    ch.set_block(1, 0, 0, b);
    CVector expect(5);
    expect << 1.0, 2.0, 3.0, 4.0, 5.0;
    CHECK(ch.stacked(0, 0) == expect);
    CHECK(CVector(ch.block(1, 0, 0)) == b);
    CHECK(ch.noise(0, 0) == 0.5);
    CHECK_THROWS_AS(ch.set_noise(0, 0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(ch.set_block(0, 0, 0, b), InvalidArgument);
}

TEST_CASE("network MIMO masks are identities")
{
    const auto d = Dimensions::uniform(2, 3, 4, 1);
    const auto m = build_selection_masks(ClusterConfig::network_mimo(d), d);
    for (int k = 0; k < 4; ++k)
    {
        CHECK(m.data_mask(k).all());
        CHECK(m.coord_mask(k).all());
    }
}

TEST_CASE("interference channel masks")
{
    const Dimensions d{2, {2, 3}, 2, 1};
    const auto m = build_selection_masks(ClusterConfig::interference_channel(d), d);
    Mask d1(5);
    d1 << true, true, false, false, false;
    CHECK((m.data_mask(0) == d1).all());
    CHECK(m.coord_mask(0).all());
    CHECK((m.data_mask(1) == !d1).all());
}

TEST_CASE("data set outside the coordination set is rejected")
{
    const auto d = Dimensions::uniform(1, 1, 1, 1);
    ClusterConfig cl{{{0}}, {{}}};
    CHECK_THROWS_AS(validate_clusters(cl, d), InvalidArgument);
    CHECK_THROWS_AS(build_selection_masks(cl, d), InvalidArgument);
    CHECK_THROWS_AS(validate_clusters(ClusterConfig{{{1}}, {{1}}}, d), InvalidArgument); // out of range
    CHECK_THROWS_AS(validate_clusters(ClusterConfig{{{}}, {{0}}}, d), InvalidArgument);   // nobody serves 0
}

TEST_CASE("C_k D_k = D_k on random clusters")
{
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        const Scenario sc = test::random_scenario(s);
        for (int k = 0; k < sc.dims.num_rx; ++k)
            CHECK(((sc.masks.coord_mask(k) && sc.masks.data_mask(k)) == sc.masks.data_mask(k)).all());
        CHECK(build_selection_masks(sc.clusters, sc.dims) == sc.masks);
    }
}

TEST_CASE("interferer and coordinated sets")
{
    const auto ic = Dimensions::uniform(2, 1, 2, 1);
    CHECK(interferer_set(0, ClusterConfig::interference_channel(ic)) == TerminalSet{1});
    CHECK(coordinated_set(0, ClusterConfig::interference_channel(ic)) == TerminalSet{1});

    const auto nm3 = Dimensions::uniform(2, 1, 3, 1);
    CHECK(interferer_set(1, ClusterConfig::network_mimo(nm3)) == TerminalSet{0, 2});
    const auto nm4 = Dimensions::uniform(2, 1, 4, 1);
    CHECK(coordinated_set(0, ClusterConfig::network_mimo(nm4)) == TerminalSet{1, 2, 3});
    for (int k = 0; k < 4; ++k)
    {
        TerminalSet others;
        for (int i = 0; i < 4; ++i)
            if (i != k)
                others.push_back(i);
        CHECK(interferer_set(k, ClusterConfig::network_mimo(nm4)) == others);
        CHECK(coordinated_set(k, ClusterConfig::network_mimo(nm4)) == others);
    }

    // k only reached by a transmitter that serves k alone.
    const ClusterConfig lone{{{0}, {1}}, {{0}, {1}}};
    CHECK(interferer_set(0, lone).empty());
    CHECK(coordinated_set(0, lone).empty());
}

TEST_CASE("interferer sets are permutation equivariant")
{
    for (std::uint64_t s = 100; s < 130; ++s)
    {
        const Scenario sc = test::random_scenario(s);
        std::vector<int> perm(static_cast<std::size_t>(sc.dims.num_rx));
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng(s);
        std::shuffle(perm.begin(), perm.end(), rng);
        const ClusterConfig pc = permuted(sc.clusters, perm);
        for (int k = 0; k < sc.dims.num_rx; ++k)
        {
            auto map = [&](TerminalSet t) {
                for (int &x : t)
                    x = perm[static_cast<std::size_t>(x)];
                std::sort(t.begin(), t.end());
                return t;
            };
            CHECK(map(interferer_set(k, sc.clusters)) == interferer_set(perm[static_cast<std::size_t>(k)], pc));
            CHECK(map(coordinated_set(k, sc.clusters)) == coordinated_set(perm[static_cast<std::size_t>(k)], pc));
        }
    }
}

TEST_CASE("symmetric clusters give equal interferer and coordinated sets")
{
    // D_j = C_j for every j, with overlapping but unequal clusters.
    const auto d = Dimensions::uniform(3, 2, 5, 1);
    const std::vector<TerminalSet> sets{{0, 1, 2}, {2, 3}, {3, 4}};
    const ClusterConfig cl{sets, sets};
    validate_clusters(cl, d);
    for (int k = 0; k < 5; ++k)
        CHECK(interferer_set(k, cl) == coordinated_set(k, cl));
    CHECK(interferer_set(2, cl) == TerminalSet{0, 1, 3});
}

TEST_CASE("power constraint validation")
{
    const auto d = Dimensions::uniform(2, 2, 2, 1);
    const auto ic = build_selection_masks(ClusterConfig::interference_channel(d), d);
    CHECK(validate_power_constraints(PowerConstraintSet::per_transmitter(d, RVector::Ones(2)), ic).ok());
    CHECK(validate_power_constraints(PowerConstraintSet::total(d, 1.0), ic).ok());
    CHECK(validate_power_constraints(PowerConstraintSet::per_antenna(d, RVector::Ones(4)), ic).ok());

    PowerConstraintSet holed;
    holed.Q = {CMatrix::Identity(4, 4)};
    holed.Q[0](2, 2) = 0.0;
    holed.q = RVector::Ones(1);
    const auto r = validate_power_constraints(holed, ic);
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations.front().kind == ConstraintViolation::Kind::singular_sum);

    // Coupling the two transmitters' antennas leaks outside D_k x D_k.
    PowerConstraintSet leak = PowerConstraintSet::total(d, 1.0);
    leak.Q[0](0, 2) = leak.Q[0](2, 0) = 0.5;
    const auto lr = validate_power_constraints(leak, ic);
    REQUIRE_FALSE(lr.ok());
    CHECK(lr.violations.front().kind == ConstraintViolation::Kind::leaks_outside_data_block);
    // ... which is fine under network MIMO.
    CHECK(validate_power_constraints(leak, build_selection_masks(ClusterConfig::network_mimo(d), d)).ok());

    PowerConstraintSet neg = PowerConstraintSet::total(d, 1.0);
    neg.Q[0](1, 1) = -1e-6;
    CHECK_FALSE(validate_power_constraints(neg, ic).ok());
    neg.Q[0](1, 1) = -1e-12; // within the PSD tolerance, but now nearly singular
    bool psd_flagged = false;
    for (const auto &v : validate_power_constraints(neg, ic).violations)
        psd_flagged |= v.kind == ConstraintViolation::Kind::not_psd;
    CHECK_FALSE(psd_flagged);

    PowerConstraintSet zero_limit = PowerConstraintSet::total(d, 1.0);
    zero_limit.q(0) = 0.0;
    CHECK_FALSE(validate_power_constraints(zero_limit, ic).ok());

    CHECK_THROWS_AS(Scenario::make(ChannelSet(d), ClusterConfig::interference_channel(d), holed), InvalidArgument);
}
