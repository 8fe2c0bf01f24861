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

#include "multicell/sinr.hpp"
#include "multicell/linalg.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace multicell
{

// ---------- Allocation ----------

Allocation::Allocation(const Dimensions &dims)
    : n_(dims.total_antennas()), v_(static_cast<std::size_t>(dims.streams()), CVector::Zero(n_)),
      p_(RMatrix::Zero(dims.num_rx, dims.num_sc))
{
}

std::size_t Allocation::index(int k, int c) const
{
    if (k < 0 || k >= p_.rows() || c < 0 || c >= p_.cols())
        throw InvalidArgument("allocation index out of range");
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(p_.cols()) + static_cast<std::size_t>(c);
}

void Allocation::set(int k, int c, const CVector &v, double p)
{
    const std::size_t i = index(k, c);
    if (v.size() != n_)
        throw InvalidArgument("beamforming vector has the wrong length");
    if (!(p >= 0.0) || !std::isfinite(p))
        throw InvalidArgument("stream power must be finite and nonnegative");
    if (p == 0.0)
    {
        v_[i].setZero();
        p_(k, c) = 0.0;
        return;
    }
    const double nv = v.norm();
    if (!(nv > 0.0) || !std::isfinite(nv))
        throw InvalidArgument("a stream with positive power needs a nonzero direction");
    v_[i] = v / nv;
    p_(k, c) = p;
}

void Allocation::set_power(int k, int c, double p)
{
    const std::size_t i = index(k, c);
    if (!(p >= 0.0) || !std::isfinite(p))
        throw InvalidArgument("stream power must be finite and nonnegative");
    if (p > 0.0 && v_[i].squaredNorm() == 0.0)
        throw InvalidArgument("cannot power a stream without direction");
    p_(k, c) = p;
}

void Allocation::scale_powers(double factor)
{
    if (!(factor >= 0.0) || !std::isfinite(factor))
        throw InvalidArgument("power scale must be finite and nonnegative");
    p_ *= factor;
}

CMatrix Allocation::correlation(int k, int c, const SelectionMasks &masks) const
{
    const CVector u = masked(masks.data_mask(k), direction(k, c));
    return power(k, c) * u * u.adjoint();
}

std::string Allocation::check(const SelectionMasks &masks, double tol) const
{
    if (masks.data.rows() != n_ || masks.data.cols() != p_.rows())
        return "allocation does not match the mask dimensions";
    for (int k = 0; k < num_rx(); ++k)
    {
        const Mask d = masks.data_mask(k);
        for (int c = 0; c < num_sc(); ++c)
        {
            if (p_(k, c) <= 0.0)
                continue;
            const CVector &v = direction(k, c);
            if (std::abs(v.norm() - 1.0) > tol)
                return "direction of (" + std::to_string(k) + ", " + std::to_string(c) + ") is not unit norm";
            if ((v - masked(d, v)).norm() > tol)
                return "direction of (" + std::to_string(k) + ", " + std::to_string(c) + ") leaves the D_k support";
        }
    }
    return {};
}

// ---------- SINR ----------

namespace
{

void check_dims(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks)
{
    const Dimensions &d = chans.dims();
    if (alloc.length() != d.total_antennas() || alloc.num_rx() != d.num_rx || alloc.num_sc() != d.num_sc ||
        masks.data.rows() != d.total_antennas() || masks.data.cols() != d.num_rx)
        throw InvalidArgument("allocation, channels and masks disagree on dimensions");
}

} // namespace

double downlink_sinr(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks, int k,
                     int c)
{
    check_dims(alloc, chans, masks);
    const double p = alloc.power(k, c);
    if (p <= 0.0)
        return 0.0;
    const CVector &h = chans.stacked(k, c);
    const double signal = p * std::norm(h.dot(masked(masks.data_mask(k), alloc.direction(k, c))));
    double interference = 0.0;
    for (int kb = 0; kb < alloc.num_rx(); ++kb)
    {
        const double pb = alloc.power(kb, c);
        if (kb == k || pb <= 0.0)
            continue;
        interference += pb * std::norm(h.dot(masked(masks.coupling_mask(k, kb), alloc.direction(kb, c))));
    }
    return signal / (chans.noise(k, c) + interference);
}

double downlink_sinr(const std::vector<CMatrix> &S, const ChannelSet &chans, const SelectionMasks &masks,
                     int k, int c)
{
    const Dimensions &d = chans.dims();
    if (static_cast<int>(S.size()) != d.num_rx)
        throw InvalidArgument("need one correlation matrix per terminal");
    const int n = d.total_antennas();
    for (const auto &s : S)
        if (s.rows() != n || s.cols() != n)
            throw InvalidArgument("correlation matrices must be N x N");
    const CVector &h = chans.stacked(k, c);
    auto quad = [&](const Mask &m, const CMatrix &s) {
        const CVector u = masked(m, h);
        return std::max(0.0, (u.adjoint() * s * u)(0, 0).real());
    };
    const double signal = quad(masks.data_mask(k), S[static_cast<std::size_t>(k)]);
    if (signal <= 0.0)
        return 0.0;
    double interference = 0.0;
    for (int kb = 0; kb < d.num_rx; ++kb)
        if (kb != k)
            interference += quad(masks.coupling_mask(k, kb), S[static_cast<std::size_t>(kb)]);
    return signal / (chans.noise(k, c) + interference);
}

double incoherent_sinr(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks, int k,
                       int c)
{
    check_dims(alloc, chans, masks);
    const double p = alloc.power(k, c);
    if (p <= 0.0)
        return 0.0;
    const Dimensions &d = chans.dims();
    const CVector &h = chans.stacked(k, c);
    const double signal = p * std::norm(h.dot(masked(masks.data_mask(k), alloc.direction(k, c))));
    double interference = 0.0;
    for (int kb = 0; kb < alloc.num_rx(); ++kb)
    {
        const double pb = alloc.power(kb, c);
        if (kb == k || pb <= 0.0)
            continue;
        const CVector &v = alloc.direction(kb, c);
        for (int j = 0; j < d.num_tx; ++j)
        {
            if (!masks.serves(j, kb) || !masks.coordinates(j, k))
                continue;
            const int off = d.offset(j);
            const int nj = d.antennas[static_cast<std::size_t>(j)];
            interference += pb * std::norm(h.segment(off, nj).dot(v.segment(off, nj)));
        }
    }
    return signal / (chans.noise(k, c) + interference);
}

RMatrix all_sinrs(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks, SinrModel model)
{
    const Dimensions &d = chans.dims();
    RMatrix out(d.num_rx, d.num_sc);
    for (int k = 0; k < d.num_rx; ++k)
        for (int c = 0; c < d.num_sc; ++c)
            out(k, c) = model == SinrModel::coherent ? downlink_sinr(alloc, chans, masks, k, c)
                                                     : incoherent_sinr(alloc, chans, masks, k, c);
    return out;
}

CMatrix virtual_uplink_matrix(const DualParams &duals, const ChannelSet &chans, const SelectionMasks &masks,
                              const PowerConstraintSet &pcs, int k, int c)
{
    const Dimensions &d = chans.dims();
    const int n = d.total_antennas();
    if (duals.omega.size() != pcs.size() || duals.lambda.rows() != d.num_rx || duals.lambda.cols() != d.num_sc)
        throw InvalidArgument("dual parameters do not match the scenario");
    CMatrix a = CMatrix::Zero(n, n);
    for (int l = 0; l < pcs.size(); ++l)
        if (duals.omega(l) != 0.0)
            a += duals.omega(l) * pcs.Q[static_cast<std::size_t>(l)];
    for (int kb = 0; kb < d.num_rx; ++kb)
    {
        const double lb = duals.lambda(kb, c);
        if (kb == k || lb == 0.0)
            continue;
        const CVector u = masked(masks.coupling_mask(kb, k), chans.stacked(kb, c));
        if (u.squaredNorm() > 0.0)
            a.noalias() += lb * u * u.adjoint();
    }
    return a;
}

double virtual_uplink_sinr(const CVector &wbar, const DualParams &duals, const ChannelSet &chans,
                           const SelectionMasks &masks, const PowerConstraintSet &pcs, int k, int c)
{
    const double lk = duals.lambda(k, c);
    if (lk == 0.0)
        return 0.0;
    const double num = lk * std::norm(wbar.dot(masked(masks.data_mask(k), chans.stacked(k, c))));
    if (num == 0.0)
        return 0.0;
    const CMatrix a = virtual_uplink_matrix(duals, chans, masks, pcs, k, c);
    const double den = (wbar.adjoint() * a * wbar)(0, 0).real();
    if (!(den > 0.0))
        throw NumericalError("virtual uplink interference-plus-noise vanishes for a receiver with signal");
    return num / den;
}

// ---------- quality ----------

double QualityFunction::z() const
{
    if (order < 2)
        throw InvalidArgument("constellation order must be at least 2");
    const double m = order;
    switch (family)
    {
    case Constellation::pam:
        return 3.0 / (m * m - 1.0);
    case Constellation::psk: {
        const double s = std::sin(std::numbers::pi / m);
        return s * s;
    }
    case Constellation::qam:
        return 3.0 / (2.0 * m - 2.0);
    }
    return 0.0;
}

double quality_value(const QualityFunction &qf, double x)
{
    if (!(x >= 0.0))
        throw InvalidArgument("SINR must be nonnegative");
    switch (qf.kind)
    {
    case QualityKind::rate:
        return std::log2(1.0 + x);
    case QualityKind::mse:
        return -1.0 / (1.0 + x);
    case QualityKind::chernoff_ser: {
        const double m = qf.order;
        return -((m - 1.0) / m) * std::exp(-x * qf.z());
    }
    }
    return 0.0;
}

double quality_derivative(const QualityFunction &qf, double x)
{
    if (!(x >= 0.0))
        throw InvalidArgument("SINR must be nonnegative");
    switch (qf.kind)
    {
    case QualityKind::rate:
        return 1.0 / (1.0 + x);
    case QualityKind::mse:
        return 1.0 / ((1.0 + x) * (1.0 + x));
    case QualityKind::chernoff_ser: {
        const double m = qf.order;
        const double z = qf.z();
        return ((m - 1.0) / m) * z * std::exp(-x * z);
    }
    }
    return 0.0;
}

double quality_inv_derivative(const QualityFunction &qf, double y)
{
    if (!(y > 0.0))
        throw InvalidArgument("inverse derivative needs y > 0");
    switch (qf.kind)
    {
    case QualityKind::rate:
        return 1.0 / y - 1.0;
    case QualityKind::mse:
        return 1.0 / std::sqrt(y) - 1.0;
    case QualityKind::chernoff_ser: {
        const double m = qf.order;
        const double z = qf.z();
        return std::log((m - 1.0) * z / (m * y)) / z;
    }
    }
    return 0.0;
}

RVector terminal_quality(const QualityFunction &qf, const RMatrix &sinrs)
{
    RVector g = RVector::Zero(sinrs.rows());
    for (Eigen::Index k = 0; k < sinrs.rows(); ++k)
        for (Eigen::Index c = 0; c < sinrs.cols(); ++c)
            g(k) += quality_value(qf, sinrs(k, c));
    return g;
}

double system_utility(const UtilityConfig &cfg, const RVector &g)
{
    if (cfg.weights.size() != g.size())
        throw InvalidArgument("one weight per terminal is required");
    if ((cfg.weights.array() < 0.0).any() || !(cfg.weights.array() > 0.0).any())
        throw InvalidArgument("weights must be nonnegative with at least one positive entry");
    if (cfg.kind == UtilityKind::weighted_sum)
        return cfg.weights.dot(g);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < g.size(); ++k)
        if (cfg.weights(k) > 0.0)
            best = std::min(best, g(k) / cfg.weights(k));
    return best;
}

} // namespace multicell
