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

#include "multicell/channels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace multicell
{

namespace
{

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CVector gaussian(std::mt19937_64 &rng, int n, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    CVector v(n);
    for (int i = 0; i < n; ++i)
    {
        const double re = nd(rng);
        const double im = nd(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

enum : std::uint64_t
{
    kTagFading = 1,
    kTagCommon = 2,
    kTagPhase = 3,
};

} // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
{
    std::uint64_t s = splitmix(seed);
    for (std::uint64_t id : ids)
        s = splitmix(s ^ splitmix(id + 0x632be59bd9b4e019ULL));
    return s;
}

ChannelSet rayleigh(const Dimensions &dims, const RMatrix &path_loss, std::uint64_t seed, double noise,
                    double correlation)
{
    if (path_loss.rows() != dims.num_tx || path_loss.cols() != dims.num_rx)
        throw InvalidArgument("path loss must be K_t x K_r");
    if ((path_loss.array() < 0.0).any() || !path_loss.allFinite())
        throw InvalidArgument("path loss gains must be finite and nonnegative");
    if (!(correlation >= 0.0 && correlation <= 1.0))
        throw InvalidArgument("correlation must lie in [0, 1]");
    ChannelSet out(dims, noise);
    const int nmax = *std::max_element(dims.antennas.begin(), dims.antennas.end());
    for (int k = 0; k < dims.num_rx; ++k)
        for (int c = 0; c < dims.num_sc; ++c)
        {
            CVector common = CVector::Zero(nmax);
            if (correlation > 0.0)
            {
                std::mt19937_64 rng(stream_seed(seed, {kTagCommon, std::uint64_t(k), std::uint64_t(c)}));
                common = gaussian(rng, nmax, 1.0);
            }
            for (int j = 0; j < dims.num_tx; ++j)
            {
                const int nj = dims.antennas[static_cast<std::size_t>(j)];
                const double pl = path_loss(j, k);
                if (pl == 0.0)
                    continue;
                std::mt19937_64 rng(
                    stream_seed(seed, {kTagFading, std::uint64_t(j), std::uint64_t(k), std::uint64_t(c)}));
                CVector g = gaussian(rng, nj, 1.0);
                if (correlation > 0.0)
                    g = std::sqrt(1.0 - correlation) * g + std::sqrt(correlation) * common.head(nj);
                out.set_block(j, k, c, std::sqrt(pl) * g);
            }
        }
    return out;
}

ChannelSet phase_perturb(const ChannelSet &chans, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0))
        throw InvalidArgument("phase deviation must be nonnegative");
    ChannelSet out = chans;
    if (sigma == 0.0)
        return out;
    const Dimensions &d = chans.dims();
    for (int j = 0; j < d.num_tx; ++j)
        for (int k = 0; k < d.num_rx; ++k)
            for (int c = 0; c < d.num_sc; ++c)
            {
                std::mt19937_64 rng(
                    stream_seed(seed, {kTagPhase, std::uint64_t(j), std::uint64_t(k), std::uint64_t(c)}));
                // phi = sigma z: a sweep over sigma reuses the same z.
                std::normal_distribution<double> nd(0.0, 1.0);
                const Complex rot = std::polar(1.0, sigma * nd(rng));
                out.set_block(j, k, c, chans.block(j, k, c) * rot);
            }
    return out;
}

RVector proportional_fair_weights(const std::vector<ChannelSet> &ensemble, const RVector &tx_power)
{
    if (ensemble.empty())
        throw InvalidArgument("proportional-fair weights need a nonempty ensemble");
    const Dimensions &d = ensemble.front().dims();
    if (tx_power.size() != d.num_tx)
        throw InvalidArgument("one transmit power per transmitter is required");
    RVector mean_rate = RVector::Zero(d.num_rx);
    for (const ChannelSet &ch : ensemble)
    {
        if (!(ch.dims() == d))
            throw InvalidArgument("ensemble members differ in dimensions");
        for (int k = 0; k < d.num_rx; ++k)
            for (int c = 0; c < d.num_sc; ++c)
            {
                double best = 0.0;
                for (int j = 0; j < d.num_tx; ++j)
                    best = std::max(best, tx_power(j) * ch.block(j, k, c).squaredNorm());
                const double snr = static_cast<double>(d.num_tx) / (static_cast<double>(d.num_rx) * ch.noise(k, c));
                mean_rate(k) += std::log2(1.0 + snr * best);
            }
    }
    mean_rate /= static_cast<double>(ensemble.size() * static_cast<std::size_t>(d.num_sc));
    for (int k = 0; k < d.num_rx; ++k)
        if (!(mean_rate(k) > 0.0))
            throw InvalidArgument("terminal " + std::to_string(k) + " has zero average rate");
    RVector mu = mean_rate.cwiseInverse();
    return mu * (static_cast<double>(d.num_rx) / mu.sum());
}

RVector proportional_fair_weights(const std::vector<ChannelSet> &ensemble, const PowerConstraintSet &pcs)
{
    if (ensemble.empty())
        throw InvalidArgument("proportional-fair weights need a nonempty ensemble");
    const auto limits = pcs.per_transmitter_limits(ensemble.front().dims());
    if (!limits)
        throw InvalidArgument("proportional-fair weights need per-transmitter power constraints");
    return proportional_fair_weights(ensemble, *limits);
}

ChannelSet read_channel_csv(const std::string &path, const Dimensions &dims, double noise)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open channel file " + path);
    ChannelSet out(dims, noise);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            try
            {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            }
            catch (const std::exception &)
            {
                throw InvalidArgument(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (vals.size() < 5)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected j,k,c followed by re,im pairs");
        const int j = static_cast<int>(vals[0]);
        const int k = static_cast<int>(vals[1]);
        const int c = static_cast<int>(vals[2]);
        if (j < 0 || j >= dims.num_tx)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": transmitter index out of range");
        const int nj = dims.antennas[static_cast<std::size_t>(j)];
        if (static_cast<int>(vals.size()) != 3 + 2 * nj)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(nj) +
                                  " complex entries");
        CVector h(nj);
        for (int i = 0; i < nj; ++i)
            h(i) = Complex(vals[static_cast<std::size_t>(3 + 2 * i)], vals[static_cast<std::size_t>(4 + 2 * i)]);
        try
        {
            out.set_block(j, k, c, h);
        }
        catch (const InvalidArgument &e)
        {
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace multicell
