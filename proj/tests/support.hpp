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

// Shared fixtures for the test binaries.

#ifndef MULTICELL_TEST_SUPPORT_HPP
#define MULTICELL_TEST_SUPPORT_HPP

#include "multicell/channels.hpp"
#include "multicell/dual.hpp"
#include "multicell/model.hpp"

#include <cmath>
#include <optional>
#include <random>

namespace multicell::test
{

// Two single-antenna transmitters, each serving its own terminal and
// coordinating towards both; limits 20 and unit noise.
inline Scenario two_link()
{
    const auto dims = Dimensions::uniform(2, 1, 2, 1);
    ChannelSet ch(dims, 1.0);
    CVector h1(2), h2(2);
    h1 << 1.0, std::sqrt(0.1);
    h2 << std::sqrt(0.5), 1.0;
    ch.stacked(0, 0) = h1;
    ch.stacked(1, 0) = h2;
    return Scenario::make(ch, ClusterConfig::interference_channel(dims),
                          PowerConstraintSet::per_transmitter(dims, RVector::Constant(2, 20.0)));
}

inline CVector random_cvector(std::mt19937_64 &rng, int n)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    CVector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = Complex(nd(rng), nd(rng));
    return v;
}

// Random scenario within K_t <= 2, N_j <= 4, K_r <= 4, K_c <= 2 with random
// clusters (every terminal served) and per-transmitter limits.
inline Scenario random_scenario(std::uint64_t seed, bool network_mimo = false)
{
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Dimensions d;
    d.num_tx = pick(1, 2);
    d.antennas.clear();
    for (int j = 0; j < d.num_tx; ++j)
        d.antennas.push_back(pick(1, 4));
    d.num_rx = pick(1, 4);
    d.num_sc = pick(1, 2);
    ClusterConfig cl = ClusterConfig::network_mimo(d);
    if (!network_mimo && d.num_tx > 1)
    {
        for (int j = 0; j < d.num_tx; ++j)
        {
            cl.data_sets[static_cast<std::size_t>(j)].clear();
            cl.coord_sets[static_cast<std::size_t>(j)].clear();
        }
        for (int k = 0; k < d.num_rx; ++k)
        {
            const int home = pick(0, d.num_tx - 1);
            for (int j = 0; j < d.num_tx; ++j)
            {
                const bool serve = j == home || pick(0, 3) == 0;
                const bool coord = serve || pick(0, 2) > 0;
                if (serve)
                    cl.data_sets[static_cast<std::size_t>(j)].push_back(k);
                if (coord)
                    cl.coord_sets[static_cast<std::size_t>(j)].push_back(k);
            }
        }
    }
    RMatrix pl(d.num_tx, d.num_rx);
    std::uniform_real_distribution<double> u(-10.0, 0.0);
    for (int j = 0; j < d.num_tx; ++j)
        for (int k = 0; k < d.num_rx; ++k)
            pl(j, k) = std::pow(10.0, u(rng) / 10.0);
    std::uniform_real_distribution<double> nu(0.05, 0.5);
    ChannelSet ch = rayleigh(d, pl, rng(), 1.0);
    for (int k = 0; k < d.num_rx; ++k)
        for (int c = 0; c < d.num_sc; ++c)
            ch.set_noise(k, c, nu(rng));
    RVector q(d.num_tx);
    for (int j = 0; j < d.num_tx; ++j)
        q(j) = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    return Scenario::make(ch, cl, PowerConstraintSet::per_transmitter(d, q));
}

inline double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Random duals on [0.05, 1], lambda zeroed with probability zero_prob.
inline DualParams random_duals(const Scenario &sc, std::mt19937_64 &rng, double zero_prob = 0.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DualParams d = DualParams::zeros(sc.constraints.size(), sc.dims.num_rx, sc.dims.num_sc);
    for (int l = 0; l < sc.constraints.size(); ++l)
        d.omega(l) = 0.05 + 0.95 * u(rng);
    for (int k = 0; k < sc.dims.num_rx; ++k)
        for (int c = 0; c < sc.dims.num_sc; ++c)
            d.lambda(k, c) = u(rng) < zero_prob ? 0.0 : 0.05 + 0.95 * u(rng);
    return d;
}

// Targets on the boundary of the feasible region: the SINRs of a realized
// random dual point, pulled into budget, then scaled by t until the smallest
// budget scaling reported by the solver is 1.
inline std::optional<QosTargets> tight_targets(const Scenario &sc, std::mt19937_64 &rng, double tol = 1e-10)
{
    RealizedAllocation ra;
    try
    {
        ra = realize_allocation(random_duals(sc, rng, 0.25), sc);
    }
    catch (const UnservableError &)
    {
        return std::nullopt;
    }
    if (!ra.nonnegative || ra.empty)
        return std::nullopt;
    ra = rescale_full_power(ra, sc);
    RMatrix base = all_sinrs(ra.alloc, sc.channels, sc.masks);
    for (int k = 0; k < sc.dims.num_rx; ++k)
        for (int c = 0; c < sc.dims.num_sc; ++c)
            if (ra.alloc.power(k, c) <= 0.0)
                base(k, c) = 0.0;
    if (!(base.array() > 0.0).any())
        return std::nullopt;

    // beta(t) < 1 at t = 1. Secant on log beta against log t, safeguarded by bisection.
    auto beta = [&](double t) -> std::optional<double> {
        const P2Result r = solve_p2({base * t}, sc);
        if (r.status == P2Status::infeasible && r.power_scale == 0.0)
            return std::nullopt;
        return r.power_scale;
    };
    double lo = 0.0, flo = 0.0; // log t, log beta with beta < 1
    const auto b1 = beta(1.0);
    if (!b1 || *b1 <= 0.0)
        return std::nullopt;
    flo = std::log(*b1);
    if (std::abs(flo) <= tol)
        return QosTargets{base};
    double hi = lo - flo, fhi = NAN; // first guess: beta roughly linear in t
    for (int it = 0; it < 100; ++it)
    {
        const auto b = beta(std::exp(hi));
        if (b && *b > 0.0 && std::log(*b) < 0.0)
        {
            lo = hi;
            flo = std::log(*b);
            hi = lo - flo * 2.0;
            continue;
        }
        fhi = b && *b > 0.0 ? std::log(*b) : NAN;
        break;
    }
    for (int it = 0; it < 200; ++it)
    {
        double mid = 0.5 * (lo + hi);
        if (std::isfinite(fhi))
        {
            const double sec = lo - flo * (hi - lo) / (fhi - flo);
            if (sec > lo && sec < hi)
                mid = sec;
        }
        const auto b = beta(std::exp(mid));
        const double f = b && *b > 0.0 ? std::log(*b) : NAN;
        if (std::isfinite(f) && std::abs(f) <= tol)
            return QosTargets{base * std::exp(mid)};
        if (std::isfinite(f) && f < 0.0)
        {
            lo = mid;
            flo = f;
        }
        else
        {
            hi = mid;
            fhi = f;
        }
        if (hi - lo < 1e-15)
            break;
    }
    return std::nullopt;
}

} // namespace multicell::test

#endif
