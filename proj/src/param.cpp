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

#include "multicell/param.hpp"
#include "multicell/linalg.hpp"

#include <cmath>
#include <limits>

namespace multicell
{

namespace
{

struct Filter
{
    CVector w;           // A^+ D_k h, zero outside the D_k support
    double quad = 0.0;   // (D_k h)^H A^+ (D_k h)
    bool servable = false;
};

std::vector<int> support(const Mask &m)
{
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (m(i))
            idx.push_back(static_cast<int>(i));
    return idx;
}

// A is block diagonal with respect to the D_k support (validated power
// constraints), so its pseudoinverse can be taken on that block alone.
Filter filter(const DualParams &duals, const Scenario &sc, int k, int c)
{
    const int n = sc.dims.total_antennas();
    const std::vector<int> idx = support(sc.masks.data_mask(k));
    const CMatrix a = virtual_uplink_matrix(duals, sc.channels, sc.masks, sc.constraints, k, c);
    const CMatrix sub = a(idx, idx);
    const CVector hsub = sc.channels.stacked(k, c)(idx);
    Filter f;
    f.w = CVector::Zero(n);
    const double hn = hsub.squaredNorm();
    const double an = sub.size() ? sub.cwiseAbs().maxCoeff() : 0.0;
    if (hn == 0.0 || an == 0.0)
        return f;
    const CVector wsub = hermitian_pseudo_inverse(sub) * hsub;
    f.w(idx) = wsub;
    f.quad = hsub.dot(wsub).real();
    f.servable = f.quad > 1e-12 * hn / (an * static_cast<double>(idx.size()));
    return f;
}

RealizedAllocation realize_core(const DualParams &duals, const RMatrix *targets, const Scenario &sc)
{
    const Dimensions &d = sc.dims;
    RealizedAllocation ra;
    ra.alloc = Allocation(d);
    ra.gamma = RMatrix::Zero(d.num_rx, d.num_sc);
    for (int c = 0; c < d.num_sc; ++c)
    {
        TerminalSet active;
        for (int k = 0; k < d.num_rx; ++k)
            if ((targets ? (*targets)(k, c) : duals.lambda(k, c)) > 0.0)
                active.push_back(k);
        std::vector<CVector> dirs(static_cast<std::size_t>(d.num_rx));
        RVector gam = RVector::Zero(d.num_rx);
        RVector noise(static_cast<Eigen::Index>(active.size()));
        RVector gam_active(static_cast<Eigen::Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i)
        {
            const int k = active[i];
            const Filter f = filter(duals, sc, k, c);
            if (!f.servable)
                throw UnservableError(k, c);
            dirs[static_cast<std::size_t>(k)] = f.w / f.w.norm();
            gam(k) = targets ? (*targets)(k, c) : duals.lambda(k, c) * f.quad;
            gam_active(static_cast<Eigen::Index>(i)) = gam(k);
            noise(static_cast<Eigen::Index>(i)) = sc.channels.noise(k, c);
        }
        ra.gamma.col(c) = gam;
        ra.active.push_back(active);
        ra.M.push_back(build_M(gam, dirs, sc.channels, sc.masks, c, active));
        if (active.empty())
            continue;
        RVector p;
        try
        {
            p = power_allocation(ra.M.back(), gam_active, noise);
        }
        catch (const InfeasibleError &)
        {
            ra.nonnegative = false;
            continue;
        }
        for (std::size_t i = 0; i < active.size(); ++i)
        {
            const int k = active[i];
            ra.alloc.set(k, c, dirs[static_cast<std::size_t>(k)], p(static_cast<Eigen::Index>(i)));
        }
    }
    ra.consumed = consumed_power(ra.alloc, sc);
    ra.active_constraints = tight_constraints(ra.consumed, sc.constraints.q);
    ra.within_budget = (ra.consumed.array() <= sc.constraints.q.array() * (1.0 + 1e-9)).all();
    ra.feasible = ra.nonnegative && ra.within_budget;
    ra.empty = !(ra.consumed.array() > 0.0).any();
    return ra;
}

} // namespace

CVector mmse_filter(const DualParams &duals, const Scenario &sc, int k, int c)
{
    return filter(duals, sc, k, c).w;
}

CVector beamformer_from_params(const DualParams &duals, const Scenario &sc, int k, int c)
{
    const Filter f = filter(duals, sc, k, c);
    if (!f.servable)
        throw UnservableError(k, c);
    // h^H D_k A^+ D_k h is real and positive, so the phase is already right.
    return f.w / f.w.norm();
}

double gamma_from_params(const DualParams &duals, const Scenario &sc, int k, int c)
{
    const double lk = duals.lambda(k, c);
    if (lk == 0.0)
        return 0.0;
    const Filter f = filter(duals, sc, k, c);
    if (!f.servable)
        throw UnservableError(k, c);
    return lk * f.quad;
}

RMatrix build_M(const RVector &gammas, const std::vector<CVector> &directions, const ChannelSet &chans,
                const SelectionMasks &masks, int c, const TerminalSet &active)
{
    const auto n = static_cast<Eigen::Index>(active.size());
    RMatrix m(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
    {
        const int km = active[static_cast<std::size_t>(a)];
        const CVector &v = directions[static_cast<std::size_t>(km)];
        for (Eigen::Index b = 0; b < n; ++b)
        {
            const int kn = active[static_cast<std::size_t>(b)];
            if (a == b)
                m(a, b) = std::norm(chans.stacked(km, c).dot(masked(masks.data_mask(km), v)));
            else
                m(a, b) = -gammas(kn) * std::norm(chans.stacked(kn, c).dot(masked(masks.coupling_mask(kn, km), v)));
        }
    }
    return m;
}

RVector power_allocation(const RMatrix &M, const RVector &gammas, const RVector &noise)
{
    if (M.rows() != M.cols() || M.rows() != gammas.size() || gammas.size() != noise.size())
        throw InvalidArgument("power system dimensions disagree");
    if (M.rows() == 0)
        return RVector();
    const RVector rhs = gammas.cwiseProduct(noise);
    const RMatrix mt = M.transpose();
    RVector p = pseudo_inverse(mt) * rhs;
    if (!p.allFinite() || (mt * p - rhs).norm() > 1e-8 * rhs.norm())
        throw InfeasibleError("SINR targets admit no exact power solution");
    const double pmax = p.cwiseAbs().maxCoeff();
    const double tol = 1e-9 * pmax;
    for (Eigen::Index i = 0; i < p.size(); ++i)
    {
        if (p(i) < -tol)
            throw InfeasibleError("SINR targets need a negative power");
        if (p(i) < tol)
            p(i) = std::max(p(i), 0.0);
    }
    if (rhs.maxCoeff() > 0.0 && !(p.maxCoeff() > 0.0))
        throw InfeasibleError("SINR targets need a negative power");
    return p;
}

RealizedAllocation realize_allocation(const DualParams &duals, const Scenario &sc)
{
    return realize_core(duals, nullptr, sc);
}

RealizedAllocation realize_with_targets(const DualParams &duals, const RMatrix &targets, const Scenario &sc)
{
    if (targets.rows() != sc.dims.num_rx || targets.cols() != sc.dims.num_sc)
        throw InvalidArgument("targets must be K_r x K_c");
    return realize_core(duals, &targets, sc);
}

RVector consumed_power(const Allocation &alloc, const Scenario &sc)
{
    const PowerConstraintSet &pcs = sc.constraints;
    RVector out = RVector::Zero(pcs.size());
    for (int k = 0; k < alloc.num_rx(); ++k)
        for (int c = 0; c < alloc.num_sc(); ++c)
        {
            const double p = alloc.power(k, c);
            if (p <= 0.0)
                continue;
            const CVector u = masked(sc.masks.data_mask(k), alloc.direction(k, c));
            for (int l = 0; l < pcs.size(); ++l)
                out(l) += p * u.dot(pcs.Q[static_cast<std::size_t>(l)] * u).real();
        }
    return out;
}

std::vector<int> tight_constraints(const RVector &consumed, const RVector &q, double rel_tol)
{
    std::vector<int> out;
    for (Eigen::Index l = 0; l < consumed.size(); ++l)
        if (consumed(l) >= q(l) * (1.0 - rel_tol))
            out.push_back(static_cast<int>(l));
    return out;
}

double rescale_full_power(Allocation &alloc, const Scenario &sc)
{
    const RVector used = consumed_power(alloc, sc);
    double eps = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < used.size(); ++l)
        if (used(l) > 0.0)
            eps = std::min(eps, sc.constraints.q(l) / used(l));
    if (!std::isfinite(eps))
        return 1.0;
    alloc.scale_powers(eps);
    return eps;
}

RealizedAllocation rescale_full_power(const RealizedAllocation &ra, const Scenario &sc)
{
    RealizedAllocation out = ra;
    out.scale = rescale_full_power(out.alloc, sc);
    out.consumed = consumed_power(out.alloc, sc);
    out.active_constraints = tight_constraints(out.consumed, sc.constraints.q);
    out.within_budget = (out.consumed.array() <= sc.constraints.q.array() * (1.0 + 1e-9)).all();
    out.feasible = out.nonnegative && out.within_budget;
    out.empty = !(out.consumed.array() > 0.0).any();
    return out;
}

} // namespace multicell
