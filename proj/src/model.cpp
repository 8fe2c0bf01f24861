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

#include "multicell/model.hpp"
#include "multicell/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace multicell
{

namespace
{

void check_terminal(int k, const Dimensions &dims)
{
    if (k < 0 || k >= dims.num_rx)
        throw InvalidArgument("terminal index " + std::to_string(k) + " out of range");
}

void check_subcarrier(int c, const Dimensions &dims)
{
    if (c < 0 || c >= dims.num_sc)
        throw InvalidArgument("subcarrier index " + std::to_string(c) + " out of range");
}

void check_transmitter(int j, const Dimensions &dims)
{
    if (j < 0 || j >= dims.num_tx)
        throw InvalidArgument("transmitter index " + std::to_string(j) + " out of range");
}

bool contains(const TerminalSet &set, int k)
{
    return std::binary_search(set.begin(), set.end(), k);
}

TerminalSet normalized(TerminalSet set)
{
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

TerminalSet all_terminals(const Dimensions &dims)
{
    TerminalSet all(dims.num_rx);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

} // namespace

// ---------- Dimensions ----------

Dimensions Dimensions::uniform(int num_tx, int antennas_per_tx, int num_rx, int num_sc)
{
    Dimensions d;
    d.num_tx = num_tx;
    d.antennas.assign(static_cast<std::size_t>(std::max(num_tx, 0)), antennas_per_tx);
    d.num_rx = num_rx;
    d.num_sc = num_sc;
    d.validate();
    return d;
}

int Dimensions::total_antennas() const
{
    return std::accumulate(antennas.begin(), antennas.end(), 0);
}

int Dimensions::offset(int j) const
{
    return std::accumulate(antennas.begin(), antennas.begin() + j, 0);
}

void Dimensions::validate() const
{
    if (num_tx < 1 || num_rx < 1 || num_sc < 1)
        throw InvalidArgument("dimension counts must be at least 1");
    if (static_cast<int>(antennas.size()) != num_tx)
        throw InvalidArgument("antenna list length must equal num_tx");
    for (int n : antennas)
        if (n < 1)
            throw InvalidArgument("every transmitter needs at least one antenna");
}

// ---------- ChannelSet ----------

ChannelSet::ChannelSet(Dimensions dims, double noise_power) : dims_(std::move(dims))
{
    dims_.validate();
    if (!(noise_power > 0.0))
        throw InvalidArgument("noise power must be positive");
    h_.assign(static_cast<std::size_t>(dims_.streams()), CVector::Zero(dims_.total_antennas()));
    noise_ = RMatrix::Constant(dims_.num_rx, dims_.num_sc, noise_power);
}

std::size_t ChannelSet::index(int k, int c) const
{
    check_terminal(k, dims_);
    check_subcarrier(c, dims_);
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(dims_.num_sc) + static_cast<std::size_t>(c);
}

Eigen::VectorBlock<const CVector> ChannelSet::block(int j, int k, int c) const
{
    check_transmitter(j, dims_);
    const CVector &h = h_[index(k, c)];
    return h.segment(dims_.offset(j), dims_.antennas[static_cast<std::size_t>(j)]);
}

void ChannelSet::set_block(int j, int k, int c, const CVector &h)
{
    check_transmitter(j, dims_);
    if (h.size() != dims_.antennas[static_cast<std::size_t>(j)])
        throw InvalidArgument("channel block length does not match N_j");
    h_[index(k, c)].segment(dims_.offset(j), h.size()) = h;
}

void ChannelSet::set_noise(int k, int c, double sigma2)
{
    check_terminal(k, dims_);
    check_subcarrier(c, dims_);
    if (!(sigma2 > 0.0))
        throw InvalidArgument("noise power must be positive");
    noise_(k, c) = sigma2;
}

// ---------- ClusterConfig ----------

bool ClusterConfig::serves(int j, int k) const
{
    return contains(data_sets.at(static_cast<std::size_t>(j)), k);
}

bool ClusterConfig::coordinates(int j, int k) const
{
    return contains(coord_sets.at(static_cast<std::size_t>(j)), k);
}

ClusterConfig ClusterConfig::network_mimo(const Dimensions &dims)
{
    ClusterConfig cfg;
    cfg.data_sets.assign(static_cast<std::size_t>(dims.num_tx), all_terminals(dims));
    cfg.coord_sets = cfg.data_sets;
    return cfg;
}

ClusterConfig ClusterConfig::interference_channel(const Dimensions &dims)
{
    if (dims.num_tx != dims.num_rx)
        throw InvalidArgument("interference channel needs num_tx == num_rx");
    ClusterConfig cfg;
    for (int j = 0; j < dims.num_tx; ++j)
    {
        cfg.data_sets.push_back({j});
        cfg.coord_sets.push_back(all_terminals(dims));
    }
    return cfg;
}

ClusterConfig ClusterConfig::home_cells(const Dimensions &dims, const std::vector<int> &home)
{
    if (static_cast<int>(home.size()) != dims.num_rx)
        throw InvalidArgument("home assignment must list one transmitter per terminal");
    ClusterConfig cfg;
    cfg.data_sets.resize(static_cast<std::size_t>(dims.num_tx));
    cfg.coord_sets.assign(static_cast<std::size_t>(dims.num_tx), all_terminals(dims));
    for (int k = 0; k < dims.num_rx; ++k)
    {
        check_transmitter(home[static_cast<std::size_t>(k)], dims);
        cfg.data_sets[static_cast<std::size_t>(home[static_cast<std::size_t>(k)])].push_back(k);
    }
    return cfg;
}

void validate_clusters(const ClusterConfig &clusters, const Dimensions &dims)
{
    dims.validate();
    if (static_cast<int>(clusters.data_sets.size()) != dims.num_tx ||
        static_cast<int>(clusters.coord_sets.size()) != dims.num_tx)
        throw InvalidArgument("cluster sets must be given for every transmitter");
    std::vector<bool> served(static_cast<std::size_t>(dims.num_rx), false);
    for (int j = 0; j < dims.num_tx; ++j)
    {
        const auto &d = clusters.data_sets[static_cast<std::size_t>(j)];
        const auto &c = clusters.coord_sets[static_cast<std::size_t>(j)];
        if (!std::is_sorted(d.begin(), d.end()) || std::adjacent_find(d.begin(), d.end()) != d.end() ||
            !std::is_sorted(c.begin(), c.end()) || std::adjacent_find(c.begin(), c.end()) != c.end())
            throw InvalidArgument("cluster sets must be sorted and duplicate-free (transmitter " +
                                  std::to_string(j) + ")");
        for (int k : c)
            check_terminal(k, dims);
        for (int k : d)
        {
            check_terminal(k, dims);
            if (!contains(c, k))
                throw InvalidArgument("D_j is not a subset of C_j: transmitter " + std::to_string(j) +
                                      " serves terminal " + std::to_string(k) + " without coordinating to it");
            served[static_cast<std::size_t>(k)] = true;
        }
    }
    for (int k = 0; k < dims.num_rx; ++k)
        if (!served[static_cast<std::size_t>(k)])
            throw InvalidArgument("terminal " + std::to_string(k) + " is not served by any transmitter");
}

SelectionMasks build_selection_masks(const ClusterConfig &clusters, const Dimensions &dims)
{
    validate_clusters(clusters, dims);
    const int n = dims.total_antennas();
    SelectionMasks masks;
    masks.dims = dims;
    masks.data.setConstant(n, dims.num_rx, false);
    masks.coord.setConstant(n, dims.num_rx, false);
    for (int j = 0; j < dims.num_tx; ++j)
    {
        const int off = dims.offset(j);
        const int nj = dims.antennas[static_cast<std::size_t>(j)];
        for (int k : clusters.data_sets[static_cast<std::size_t>(j)])
            masks.data.col(k).segment(off, nj).setConstant(true);
        for (int k : clusters.coord_sets[static_cast<std::size_t>(j)])
            masks.coord.col(k).segment(off, nj).setConstant(true);
    }
    return masks;
}

TerminalSet interferer_set(int k, const ClusterConfig &clusters)
{
    TerminalSet out;
    for (std::size_t j = 0; j < clusters.coord_sets.size(); ++j)
        if (contains(clusters.coord_sets[j], k))
            out.insert(out.end(), clusters.data_sets[j].begin(), clusters.data_sets[j].end());
    out = normalized(std::move(out));
    out.erase(std::remove(out.begin(), out.end(), k), out.end());
    return out;
}

TerminalSet coordinated_set(int k, const ClusterConfig &clusters)
{
    TerminalSet out;
    for (std::size_t j = 0; j < clusters.data_sets.size(); ++j)
        if (contains(clusters.data_sets[j], k))
            out.insert(out.end(), clusters.coord_sets[j].begin(), clusters.coord_sets[j].end());
    out = normalized(std::move(out));
    out.erase(std::remove(out.begin(), out.end(), k), out.end());
    return out;
}

// ---------- PowerConstraintSet ----------

PowerConstraintSet PowerConstraintSet::total(const Dimensions &dims, double limit)
{
    PowerConstraintSet pcs;
    pcs.Q.push_back(CMatrix::Identity(dims.total_antennas(), dims.total_antennas()));
    pcs.q = RVector::Constant(1, limit);
    return pcs;
}

PowerConstraintSet PowerConstraintSet::per_transmitter(const Dimensions &dims, const RVector &limits)
{
    if (limits.size() != dims.num_tx)
        throw InvalidArgument("per-transmitter constraints need one limit per transmitter");
    const int n = dims.total_antennas();
    PowerConstraintSet pcs;
    for (int j = 0; j < dims.num_tx; ++j)
    {
        CMatrix q = CMatrix::Zero(n, n);
        q.diagonal().segment(dims.offset(j), dims.antennas[static_cast<std::size_t>(j)]).setOnes();
        pcs.Q.push_back(std::move(q));
    }
    pcs.q = limits;
    return pcs;
}

PowerConstraintSet PowerConstraintSet::per_antenna(const Dimensions &dims, const RVector &limits)
{
    const int n = dims.total_antennas();
    if (limits.size() != n)
        throw InvalidArgument("per-antenna constraints need one limit per antenna");
    PowerConstraintSet pcs;
    for (int i = 0; i < n; ++i)
    {
        CMatrix q = CMatrix::Zero(n, n);
        q(i, i) = 1.0;
        pcs.Q.push_back(std::move(q));
    }
    pcs.q = limits;
    return pcs;
}

std::optional<RVector> PowerConstraintSet::per_transmitter_limits(const Dimensions &dims) const
{
    if (size() != dims.num_tx)
        return std::nullopt;
    const PowerConstraintSet ref = per_transmitter(dims, q);
    for (int l = 0; l < size(); ++l)
        if (Q[static_cast<std::size_t>(l)] != ref.Q[static_cast<std::size_t>(l)])
            return std::nullopt;
    return q;
}

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    for (const auto &v : violations)
        os << v.detail << '\n';
    return os.str();
}

ValidationReport validate_power_constraints(const PowerConstraintSet &pcs, const SelectionMasks &masks)
{
    ValidationReport report;
    using Kind = ConstraintViolation::Kind;
    const int n = masks.dims.total_antennas();
    if (pcs.q.size() != pcs.size() || pcs.size() == 0)
    {
        report.violations.push_back({Kind::dimension, -1, -1, "need one limit per constraint matrix and L >= 1"});
        return report;
    }
    CMatrix sum = CMatrix::Zero(n, n);
    for (int l = 0; l < pcs.size(); ++l)
    {
        const CMatrix &q = pcs.Q[static_cast<std::size_t>(l)];
        if (q.rows() != n || q.cols() != n)
        {
            report.violations.push_back({Kind::dimension, l, -1, "Q_" + std::to_string(l) + " is not N x N"});
            continue;
        }
        if (!(pcs.q(l) > 0.0))
            report.violations.push_back(
                {Kind::nonpositive_limit, l, -1, "q_" + std::to_string(l) + " must be positive"});
        const double scale = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
        if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale || !is_positive_semidefinite(q))
            report.violations.push_back(
                {Kind::not_psd, l, -1, "Q_" + std::to_string(l) + " is not Hermitian positive semidefinite"});
        for (int k = 0; k < masks.dims.num_rx; ++k)
        {
            // Entries coupling the D_k block with its complement must vanish, and so
            // must off-diagonal entries inside the complement.
            const Mask d = masks.data_mask(k);
            bool leaks = false;
            for (int r = 0; r < n && !leaks; ++r)
                for (int c = 0; c < n && !leaks; ++c)
                    if (r != c && !(d(r) && d(c)) && std::abs(q(r, c)) > 1e-12 * scale)
                        leaks = true;
            if (leaks)
                report.violations.push_back({Kind::leaks_outside_data_block, l, k,
                                             "Q_" + std::to_string(l) + " - D_k Q_l D_k is not diagonal for k = " +
                                                 std::to_string(k)});
        }
        sum += q;
    }
    if (report.violations.empty() && !is_positive_definite(sum))
        report.violations.push_back({Kind::singular_sum, -1, -1, "sum of Q_l is not positive definite"});
    return report;
}

// ---------- Scenario ----------

Scenario Scenario::make(ChannelSet channels, ClusterConfig clusters, PowerConstraintSet constraints)
{
    Scenario s;
    s.dims = channels.dims();
    s.masks = build_selection_masks(clusters, s.dims);
    const ValidationReport report = validate_power_constraints(constraints, s.masks);
    if (!report.ok())
        throw InvalidArgument("invalid power constraints: " + report.summary());
    s.channels = std::move(channels);
    s.clusters = std::move(clusters);
    s.constraints = std::move(constraints);
    return s;
}

Scenario Scenario::with_channels(ChannelSet channels) const
{
    if (!(channels.dims() == dims))
        throw InvalidArgument("replacement channels have different dimensions");
    Scenario s = *this;
    s.channels = std::move(channels);
    return s;
}

} // namespace multicell
