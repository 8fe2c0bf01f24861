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

#include "multicell/dual.hpp"
#include "multicell/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace multicell
{

const char *to_string(P2Status s)
{
    switch (s)
    {
    case P2Status::feasible:
        return "feasible";
    case P2Status::infeasible:
        return "infeasible";
    case P2Status::max_iter:
        return "max_iter";
    }
    return "?";
}

namespace
{

enum class InnerStatus
{
    converged,
    infeasible,
    max_iter,
};

struct InnerResult
{
    InnerStatus status = InnerStatus::max_iter;
    RMatrix lambda;
    int iterations = 0;
};

// Virtual uplink of one subcarrier restricted to the targeted terminals.
// Everything is stored on the D_k support of each terminal.
struct Uplink
{
    TerminalSet active;
    RVector gamma, noise;
    std::vector<CMatrix> base;              // (sum omega_l Q_l) on the support
    std::vector<CVector> h;                 // D_k h_k on the support
    std::vector<std::vector<CVector>> u;    // u[i][j] = D_ki C_kj h_kj on the support of i

    struct Filters
    {
        std::vector<CVector> w;
        RVector quad;
        bool servable = true;
    };

    Uplink(const Scenario &sc, const CMatrix &qw, const RMatrix &targets, int c)
    {
        const Dimensions &d = sc.dims;
        for (int k = 0; k < d.num_rx; ++k)
            if (targets(k, c) > 0.0)
                active.push_back(k);
        const auto n = active.size();
        gamma.resize(static_cast<Eigen::Index>(n));
        noise.resize(static_cast<Eigen::Index>(n));
        u.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            const int k = active[i];
            gamma(static_cast<Eigen::Index>(i)) = targets(k, c);
            noise(static_cast<Eigen::Index>(i)) = sc.channels.noise(k, c);
            std::vector<int> idx;
            const Mask m = sc.masks.data_mask(k);
            for (Eigen::Index r = 0; r < m.size(); ++r)
                if (m(r))
                    idx.push_back(static_cast<int>(r));
            base.push_back(qw(idx, idx));
            h.push_back(sc.channels.stacked(k, c)(idx));
            for (std::size_t j = 0; j < n; ++j)
            {
                const int kb = active[j];
                if (j == i)
                {
                    u[i].emplace_back();
                    continue;
                }
                const CVector full = masked(sc.masks.coupling_mask(kb, k), sc.channels.stacked(kb, c));
                u[i].push_back(full(idx));
            }
        }
    }

    Filters filters(const RVector &lambda) const
    {
        Filters f;
        const auto n = active.size();
        f.quad.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
        {
            CMatrix a = base[i];
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && lambda(static_cast<Eigen::Index>(j)) > 0.0 && u[i][j].size())
                    a.noalias() += lambda(static_cast<Eigen::Index>(j)) * u[i][j] * u[i][j].adjoint();
            // Positive definite whenever every omega is above the floor; the
            // eigenvalue spread can then exceed the pinv cutoff, so solve directly.
            const Eigen::LLT<CMatrix> llt(a);
            const CVector w = llt.info() == Eigen::Success ? CVector(llt.solve(h[i]))
                                                           : CVector(hermitian_pseudo_inverse(a) * h[i]);
            const double q = h[i].dot(w).real();
            const double an = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
            const double hn = h[i].squaredNorm();
            if (!(an > 0.0) || !(q > 1e-12 * hn / (an * static_cast<double>(a.rows()))))
                f.servable = false;
            f.quad(static_cast<Eigen::Index>(i)) = q;
            f.w.push_back(w);
        }
        return f;
    }

    // Powers needed with the receivers frozen; empty when those receivers
    // cannot support the targets.
    RVector frozen_receivers(const Filters &f) const
    {
        const auto n = static_cast<Eigen::Index>(active.size());
        RMatrix sys = RMatrix::Zero(n, n);
        RVector rhs(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const CVector &w = f.w[static_cast<std::size_t>(i)];
            sys(i, i) = f.quad(i) * f.quad(i);
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i)
                    sys(i, j) = -gamma(i) * std::norm(w.dot(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
            rhs(i) = gamma(i) * w.dot(base[static_cast<std::size_t>(i)] * w).real();
        }
        const RVector x = sys.fullPivLu().solve(rhs);
        if (!x.allFinite() || (sys * x - rhs).norm() > 1e-10 * rhs.norm() || !(x.array() > 0.0).all())
            return {};
        return x;
    }
};

InnerResult solve_lambda(const RVector &omega, const RMatrix &targets, const Scenario &sc,
                         const DualSolverOptions &o)
{
    const Dimensions &d = sc.dims;
    const int n = d.total_antennas();
    CMatrix qw = CMatrix::Zero(n, n);
    for (int l = 0; l < sc.constraints.size(); ++l)
        qw += omega(l) * sc.constraints.Q[static_cast<std::size_t>(l)];

    InnerResult res;
    res.lambda = RMatrix::Zero(d.num_rx, d.num_sc);
    res.status = InnerStatus::converged;
    for (int c = 0; c < d.num_sc; ++c)
    {
        const Uplink up(sc, qw, targets, c);
        if (up.active.empty())
            continue;
        RVector lam = RVector::Zero(static_cast<Eigen::Index>(up.active.size()));
        // Fixed-point iterates started at zero stay below the solution; the
        // frozen-receiver solves stay above it and descend.
        bool below = true;
        bool done = false;
        for (int it = 0; it < o.inner_max; ++it)
        {
            ++res.iterations;
            const Uplink::Filters f = up.filters(lam);
            if (!f.servable)
            {
                res.status = InnerStatus::infeasible;
                return res;
            }
            const RVector fp = up.gamma.cwiseQuotient(f.quad);
            const double resid = ((fp - lam).cwiseAbs().cwiseQuotient(fp)).maxCoeff();
            if (resid <= 1e-13)
            {
                lam = fp;
                done = true;
                break;
            }
            RVector next = it >= 2 ? up.frozen_receivers(f) : RVector();
            if (next.size())
                below = false;
            else
                next = fp;
            lam = next;
            const double load = lam.cwiseProduct(up.noise).maxCoeff();
            if (load > o.lambda_cap || (below && lam.dot(up.noise) > 1.0 + 1e-9))
            {
                res.status = InnerStatus::infeasible;
                return res;
            }
        }
        if (!done)
            res.status = InnerStatus::max_iter;
        for (std::size_t i = 0; i < up.active.size(); ++i)
            res.lambda(up.active[i], c) = lam(static_cast<Eigen::Index>(i));
    }
    return res;
}

// Euclidean projection onto {y >= floor, sum y = 1}.
RVector project_simplex(const RVector &x, const RVector &floor)
{
    const double mass = 1.0 - floor.sum();
    RVector z = x - floor;
    std::vector<double> s(z.data(), z.data() + z.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        cum += s[i];
        const double t = (cum - mass) / static_cast<double>(i + 1);
        if (i + 1 == s.size() || s[i + 1] <= t)
        {
            theta = t;
            break;
        }
    }
    return (z.array() - theta).max(0.0).matrix() + floor;
}

struct Point
{
    RVector y;
    DualParams duals;
    RealizedAllocation ra;
    double value = 0.0; // sum lambda sigma^2
    RVector grad;       // consumed_l / q_l
    InnerStatus status = InnerStatus::converged;
};

} // namespace

P2Result solve_p2(const QosTargets &targets, const Scenario &sc, const DualSolverOptions &o)
{
    const Dimensions &d = sc.dims;
    const RMatrix &gam = targets.gamma;
    if (gam.rows() != d.num_rx || gam.cols() != d.num_sc)
        throw InvalidArgument("targets must be K_r x K_c");
    if (!gam.allFinite() || (gam.array() < 0.0).any())
        throw InvalidArgument("targets must be finite and nonnegative");

    const int nl = sc.constraints.size();
    const RVector &q = sc.constraints.q;
    P2Result out;

    if (!(gam.array() > 0.0).any())
    {
        out.status = P2Status::feasible;
        out.duals = DualParams::zeros(nl, d.num_rx, d.num_sc);
        out.allocation = realize_with_targets(out.duals, gam, sc);
        return out;
    }

    const RVector floor = o.omega_floor * q;
    auto evaluate = [&](const RVector &y) {
        Point pt;
        pt.y = y;
        pt.duals.omega = y.cwiseQuotient(q);
        const InnerResult in = solve_lambda(pt.duals.omega, gam, sc, o);
        out.inner_iterations += in.iterations;
        pt.status = in.status;
        pt.duals.lambda = in.lambda;
        if (in.status == InnerStatus::infeasible)
            return pt;
        try
        {
            pt.ra = realize_with_targets(pt.duals, gam, sc);
        }
        catch (const UnservableError &)
        {
            pt.status = InnerStatus::infeasible;
            return pt;
        }
        if (!pt.ra.nonnegative)
        {
            pt.status = InnerStatus::infeasible;
            return pt;
        }
        pt.value = pt.duals.lambda.cwiseProduct(sc.channels.noise()).sum();
        pt.grad = pt.ra.consumed.cwiseQuotient(q);
        return pt;
    };

    // Every evaluated point with nonnegative powers meets the targets exactly,
    // so the smallest budget scaling seen so far is a valid primal. Near a face
    // of the simplex the recovered primal can be far from optimal even when the
    // dual value is, which is why the dual iterate alone is not reported.
    Point best;
    double best_beta = std::numeric_limits<double>::infinity();
    auto offer = [&](const Point &pt) {
        if (pt.status == InnerStatus::infeasible)
            return;
        // within the tolerance the higher dual value wins
        const double b = pt.grad.maxCoeff();
        if (b < best_beta * (1.0 - o.tolerance) || (b <= best_beta * (1.0 + o.tolerance) && pt.value > best.value))
        {
            best_beta = b;
            best = pt;
        }
    };

    Point cur = evaluate(project_simplex(RVector::Constant(nl, 1.0 / nl), floor));
    offer(cur);
    double step = 1.0;
    bool converged = false;
    bool infeasible = cur.status == InnerStatus::infeasible;
    while (!infeasible && out.iterations < o.outer_max)
    {
        if (cur.status == InnerStatus::converged && cur.value > 1.0 + 1e-9)
        {
            // The dual value bounds the smallest budget scaling from below.
            infeasible = true;
            break;
        }
        // Stop on a primal-dual pair: this point's own primal, or the best one so far.
        if (cur.status == InnerStatus::converged &&
            std::min(cur.grad.maxCoeff(), best_beta) - cur.value <= o.tolerance * cur.value)
        {
            converged = true;
            break;
        }
        ++out.iterations;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt)
        {
            // Exponentiated step: near a face of the simplex the dual is far
            // more curved than in the interior, and multiplicative moves track that.
            const RVector e = ((cur.grad.array() - cur.grad.maxCoeff()) * step).exp();
            RVector y = cur.y.cwiseProduct(e);
            y = project_simplex(y / y.sum(), floor);
            const RVector dy = y - cur.y;
            // relative test: coordinates near the floor move by tiny absolute amounts
            if ((dy.array().abs() / cur.y.array()).maxCoeff() <= 1e-12)
                break;
            Point nxt = evaluate(y);
            offer(nxt);
            if (nxt.status == InnerStatus::infeasible)
            {
                infeasible = true;
                cur = std::move(nxt);
                moved = true;
                break;
            }
            if (nxt.value >= cur.value + 1e-4 * cur.grad.dot(dy) - 1e-15 * cur.value)
            {
                // Past the maximum along dy the slope turns negative; growing the
                // step from there only zig-zags across the ridge.
                const bool overshot = nxt.status != InnerStatus::infeasible && nxt.grad.dot(dy) < 0.0;
                cur = std::move(nxt);
                step = overshot ? step * 0.5 : std::min(step * 2.0, 1e6);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved)
        {
            // No ascent direction left within rounding: treat as stationary.
            converged = cur.status == InnerStatus::converged;
            break;
        }
    }

    if (infeasible || !std::isfinite(best_beta))
    {
        out.status = P2Status::infeasible;
        out.message = "targets exceed what the power constraints allow";
        out.duals = cur.duals.normalized();
        return out;
    }

    out.power_scale = best_beta;
    if (best_beta > 1.0 && best_beta <= 1.0 + o.overshoot)
        best.ra = rescale_full_power(best.ra, sc);
    const double m = best.duals.max_coeff();
    out.duals = best.duals.normalized();
    const double ysum = best.y.sum();
    out.dual_gap = (best.value - ysum) / m;
    out.certificate_gap = (best.value - best_beta * ysum) / m;
    out.allocation = best.ra;
    if (best_beta <= 1.0 + o.overshoot)
        out.status = P2Status::feasible;
    else if (converged)
    {
        out.status = P2Status::infeasible;
        out.message = "dual optimum exceeds the power budget";
    }
    else
    {
        out.status = P2Status::max_iter;
        out.message = "omega search did not converge";
    }
    return out;
}

QosReport verify_qos(const Allocation &alloc, const QosTargets &targets, const Scenario &sc)
{
    const Dimensions &d = sc.dims;
    QosReport rep;
    rep.sinr_margin = RMatrix::Zero(d.num_rx, d.num_sc);
    rep.worst_relative_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d.num_rx; ++k)
        for (int c = 0; c < d.num_sc; ++c)
        {
            const double g = targets.gamma(k, c);
            if (g <= 0.0)
                continue;
            const double s = downlink_sinr(alloc, sc.channels, sc.masks, k, c);
            rep.sinr_margin(k, c) = s - g;
            rep.worst_relative_margin = std::min(rep.worst_relative_margin, (s - g) / g);
        }
    if (!std::isfinite(rep.worst_relative_margin))
        rep.worst_relative_margin = 0.0;
    rep.power_slack = sc.constraints.q - consumed_power(alloc, sc);
    return rep;
}

} // namespace multicell
