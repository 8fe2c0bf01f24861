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

#include "multicell/strategies.hpp"
#include "multicell/linalg.hpp"
#include "multicell/param.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace multicell
{

namespace
{

bool contains(const TerminalSet &s, int k)
{
    return std::binary_search(s.begin(), s.end(), k);
}

TerminalSet with(TerminalSet s, int k)
{
    s.insert(std::upper_bound(s.begin(), s.end(), k), k);
    return s;
}

TerminalSet without(TerminalSet s, int k)
{
    s.erase(std::remove(s.begin(), s.end(), k), s.end());
    return s;
}

TerminalSet set_union(const TerminalSet &a, const TerminalSet &b)
{
    TerminalSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

TerminalSet set_difference(const TerminalSet &a, const TerminalSet &b)
{
    TerminalSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Columns h_jkc of transmitter j for the listed terminals.
CMatrix local_channels(const Scenario &sc, int j, int c, const TerminalSet &ks)
{
    CMatrix out(sc.dims.antennas[static_cast<std::size_t>(j)], static_cast<Eigen::Index>(ks.size()));
    for (std::size_t i = 0; i < ks.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = sc.channels.block(j, ks[i], c);
    return out;
}

// ||P h||^2 with P the projector onto the null space of the columns of `others`.
double residual_gain(const CVector &h, const CMatrix &others)
{
    if (others.cols() == 0)
        return h.squaredNorm();
    const CMatrix u = orthonormal_basis(others);
    const CVector r = h - u * (u.adjoint() * h);
    return r.squaredNorm();
}

double shifted_quality(const QualityFunction &qf, double x)
{
    return quality_value(qf, x) - quality_value(qf, 0.0);
}

// Greedy single add/remove moves with the largest gain; ties go to the lowest
// terminal index.
template <typename Score, typename Admissible>
TerminalSet greedy_search(const TerminalSet &cands, TerminalSet s, Score score, Admissible ok)
{
    double cur = score(s);
    for (std::size_t guard = 0; guard < 4 * cands.size() + 8; ++guard)
    {
        const double tol = 1e-12 * std::max(std::abs(cur), 1e-300);
        double best_gain = tol;
        TerminalSet best;
        bool found = false;
        for (int k : cands)
        {
            TerminalSet t = contains(s, k) ? without(s, k) : with(s, k);
            if (!ok(t))
                continue;
            const double gain = score(t) - cur;
            if (gain > best_gain)
            {
                best_gain = gain;
                best = std::move(t);
                found = true;
            }
        }
        if (!found)
            break;
        s = std::move(best);
        cur = score(s);
    }
    return s;
}

void check_weights(const Scenario &sc, const RVector &weights)
{
    if (weights.size() != sc.dims.num_rx || (weights.array() < 0.0).any() || !weights.allFinite())
        throw InvalidArgument("need one finite nonnegative weight per terminal");
}

double server_gain(const Scenario &sc, int j, int k, int c)
{
    return sc.channels.block(j, k, c).squaredNorm();
}

// Central step: a terminal claimed by several transmitters on one subcarrier
// stays with the stronger link.
void resolve_claims(const Scenario &sc, ServeSets &serve)
{
    const Dimensions &d = sc.dims;
    for (int c = 0; c < d.num_sc; ++c)
        for (int k = 0; k < d.num_rx; ++k)
        {
            int keep = -1;
            double best = -1.0;
            for (int j = 0; j < d.num_tx; ++j)
                if (contains(serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)], k))
                {
                    const double g = server_gain(sc, j, k, c);
                    if (g > best)
                    {
                        best = g;
                        keep = j;
                    }
                }
            for (int j = 0; j < d.num_tx; ++j)
                if (j != keep)
                {
                    auto &s = serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
                    s = without(s, k);
                }
        }
}

// Coordinated terminals BS j keeps protecting when |S u A| would exceed N_j:
// the weakest unserved ones are ignored first.
TerminalSet repaired_coord(const Scenario &sc, int j, int c, const TerminalSet &S, const TerminalSet &A)
{
    const int nj = sc.dims.antennas[static_cast<std::size_t>(j)];
    TerminalSet order = A;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return server_gain(sc, j, a, c) < server_gain(sc, j, b, c); });
    std::size_t drop = 0;
    while (static_cast<int>(S.size() + order.size() - drop) > nj && drop < order.size())
        ++drop;
    TerminalSet kept(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

CVector embed(const Scenario &sc, int j, const CVector &local)
{
    CVector v = CVector::Zero(sc.dims.total_antennas());
    v.segment(sc.dims.offset(j), local.size()) = local;
    return v;
}

// Zero-forcing directions and gains rho = |h^H v|^2 / sigma^2 for S(j,c)
// towards (S u A') \ {k}. Terminals whose channel lies in the span of the
// others are removed from S, weakest first, until every gain is positive.
struct ZfCell
{
    TerminalSet S;
    std::vector<CVector> v;
    std::vector<double> rho;
    TerminalSet removed;
};

ZfCell zf_cell(const Scenario &sc, int j, int c, TerminalSet S, const TerminalSet &A)
{
    ZfCell cell;
    for (;;)
    {
        const TerminalSet Ar = repaired_coord(sc, j, c, S, A);
        const TerminalSet all = set_union(S, Ar);
        cell.v.clear();
        cell.rho.clear();
        int weakest = -1;
        bool ok = true;
        for (int k : S)
        {
            const CVector h = sc.channels.block(j, k, c);
            const CVector v = zero_forcing_direction(h, local_channels(sc, j, c, without(all, k)));
            const double g = std::norm(h.dot(v));
            if (v.squaredNorm() == 0.0 || !(g > 1e-20 * h.squaredNorm()))
                ok = false;
            cell.v.push_back(v);
            cell.rho.push_back(g / sc.channels.noise(k, c));
        }
        if (ok)
            break;
        double best = std::numeric_limits<double>::infinity();
        for (int k : S)
            if (server_gain(sc, j, k, c) < best)
            {
                best = server_gain(sc, j, k, c);
                weakest = k;
            }
        S = without(S, weakest);
        cell.removed.push_back(weakest);
    }
    cell.S = S;
    return cell;
}

struct Stream
{
    int k, c;
    CVector v;
    double rho;
};

// Waterfilling over every stream of transmitter j.
std::vector<double> waterfill_streams(const std::vector<Stream> &streams, const RVector &weights,
                                      const QualityFunction &qf, double budget)
{
    RVector rho(static_cast<Eigen::Index>(streams.size())), mu(static_cast<Eigen::Index>(streams.size()));
    for (std::size_t i = 0; i < streams.size(); ++i)
    {
        rho(static_cast<Eigen::Index>(i)) = streams[i].rho;
        mu(static_cast<Eigen::Index>(i)) = weights(streams[i].k);
    }
    const WaterfillResult wf = waterfill(rho, mu, qf, budget);
    return {wf.power.data(), wf.power.data() + wf.power.size()};
}

} // namespace

// ---------- schedule state ----------

ScheduleState ScheduleState::empty(const Dimensions &dims)
{
    ScheduleState st;
    st.serve.assign(static_cast<std::size_t>(dims.num_tx),
                    std::vector<TerminalSet>(static_cast<std::size_t>(dims.num_sc)));
    st.coord = st.serve;
    return st;
}

bool ScheduleState::is_empty() const
{
    for (const auto &per_j : serve)
        for (const auto &s : per_j)
            if (!s.empty())
                return false;
    return true;
}

TerminalSet ScheduleState::scheduled(int c) const
{
    TerminalSet out;
    for (const auto &per_j : serve)
        out = set_union(out, per_j.at(static_cast<std::size_t>(c)));
    return out;
}

int ScheduleState::server(int k, int c) const
{
    for (std::size_t j = 0; j < serve.size(); ++j)
        if (contains(serve[j].at(static_cast<std::size_t>(c)), k))
            return static_cast<int>(j);
    return -1;
}

void update_coordination(ScheduleState &st, const ClusterConfig &clusters)
{
    const std::size_t nt = st.serve.size();
    st.coord.assign(nt, std::vector<TerminalSet>(nt ? st.serve[0].size() : 0));
    for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t c = 0; c < st.serve[j].size(); ++c)
        {
            TerminalSet a;
            for (std::size_t i = 0; i < nt; ++i)
                if (i != j)
                    for (int k : st.serve[i][c])
                        if (clusters.coordinates(static_cast<int>(j), k))
                            a.push_back(k);
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            st.coord[j][c] = set_difference(a, st.serve[j][c]);
        }
}

ScheduleState make_schedule(const Scenario &sc, ServeSets serve, bool single_server)
{
    const Dimensions &d = sc.dims;
    if (static_cast<int>(serve.size()) != d.num_tx)
        throw InvalidArgument("serve sets must be given for every transmitter");
    for (int j = 0; j < d.num_tx; ++j)
    {
        auto &per_j = serve[static_cast<std::size_t>(j)];
        if (static_cast<int>(per_j.size()) != d.num_sc)
            throw InvalidArgument("serve sets must be given for every subcarrier");
        for (auto &s : per_j)
        {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            for (int k : s)
                if (k < 0 || k >= d.num_rx || !sc.clusters.serves(j, k))
                    throw InvalidArgument("transmitter " + std::to_string(j) + " cannot serve terminal " +
                                          std::to_string(k));
        }
    }
    if (single_server)
        for (int c = 0; c < d.num_sc; ++c)
            for (int k = 0; k < d.num_rx; ++k)
            {
                int n = 0;
                for (int j = 0; j < d.num_tx; ++j)
                    n += contains(serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)], k) ? 1 : 0;
                if (n > 1)
                    throw InvalidArgument("terminal " + std::to_string(k) + " has several servers on subcarrier " +
                                          std::to_string(c));
            }
    ScheduleState st;
    st.serve = std::move(serve);
    update_coordination(st, sc.clusters);
    return st;
}

StrategyOutput evaluate_allocation(std::string name, Allocation alloc, ScheduleState schedule, const Scenario &sc,
                                   const RVector &weights, const QualityFunction &qf, SinrModel model)
{
    StrategyOutput out;
    out.strategy = std::move(name);
    out.sinr = all_sinrs(alloc, sc.channels, sc.masks, model);
    out.allocation = std::move(alloc);
    out.schedule = std::move(schedule);
    out.model = model;
    out.per_terminal_rate = terminal_quality(QualityFunction::rate(), out.sinr);
    out.per_terminal_quality = terminal_quality(qf, out.sinr);
    out.utility = weights.dot(out.per_terminal_quality);
    return out;
}

RVector transmitter_limits(const Scenario &sc)
{
    const auto q = sc.constraints.per_transmitter_limits(sc.dims);
    if (!q)
        throw InvalidArgument("this strategy needs per-transmitter power constraints");
    return *q;
}

// ---------- scheduling ----------

double prosched_metric(const Scenario &sc, int j, int k, int c, const TerminalSet &S, const TerminalSet &A,
                       const RVector &weights, const QualityFunction &qf, double q_j)
{
    if (S.empty() || weights(k) == 0.0)
        return 0.0;
    const TerminalSet others = without(set_union(S, A), k);
    const double g = residual_gain(sc.channels.block(j, k, c), local_channels(sc, j, c, others));
    const double x = q_j * g / (sc.channels.noise(k, c) * sc.dims.num_sc * static_cast<double>(S.size()));
    return weights(k) * shifted_quality(qf, x);
}

double prosched_sum_metric(const Scenario &sc, int j, int c, const TerminalSet &S, const TerminalSet &A,
                           const RVector &weights, const QualityFunction &qf, double q_j)
{
    double sum = 0.0;
    for (int k : S)
        sum += prosched_metric(sc, j, k, c, S, A, weights, qf, q_j);
    return sum;
}

TerminalSet prosched_local(const Scenario &sc, int j, int c, const TerminalSet &start, const TerminalSet &A,
                           const RVector &weights, const QualityFunction &qf, double q_j)
{
    const int nj = sc.dims.antennas[static_cast<std::size_t>(j)];
    const TerminalSet cands = set_difference(sc.clusters.data_sets[static_cast<std::size_t>(j)], A);
    // Coordinated terminals that do not fit next to S are ignored, weakest first.
    auto score = [&](const TerminalSet &s) {
        return prosched_sum_metric(sc, j, c, s, repaired_coord(sc, j, c, s, A), weights, qf, q_j);
    };
    auto ok = [&](const TerminalSet &s) { return static_cast<int>(s.size()) <= nj; };

    TerminalSet s;
    std::set_intersection(start.begin(), start.end(), cands.begin(), cands.end(), std::back_inserter(s));
    if (s.empty())
    {
        double best = 0.0;
        for (int k : cands)
        {
            const double v = score({k});
            if (v > best)
            {
                best = v;
                s = {k};
            }
        }
    }
    return greedy_search(cands, std::move(s), score, ok);
}

ScheduleState prosched_schedule(const ScheduleState &prev, const Scenario &sc, const RVector &weights,
                                const QualityFunction &qf)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    const RVector q = transmitter_limits(sc);
    ScheduleState base = prev;
    if (base.serve.size() != static_cast<std::size_t>(d.num_tx) ||
        (d.num_tx && base.serve[0].size() != static_cast<std::size_t>(d.num_sc)) ||
        base.coord.size() != base.serve.size())
        base = ScheduleState::empty(d);
    ServeSets serve = ScheduleState::empty(d).serve;
    for (int j = 0; j < d.num_tx; ++j)
        for (int c = 0; c < d.num_sc; ++c)
            serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] =
                prosched_local(sc, j, c, base.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)],
                               base.coord[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)], weights, qf,
                               q(j));
    resolve_claims(sc, serve);
    ScheduleState st;
    st.slot = base.slot + 1;
    st.serve = std::move(serve);
    update_coordination(st, sc.clusters);
    return st;
}

std::vector<TerminalSet> prosched_central(const Scenario &sc, const RVector &weights, const QualityFunction &qf)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    const auto limits = sc.constraints.per_transmitter_limits(d);
    const double budget = limits ? limits->sum() : sc.constraints.q.sum();
    TerminalSet cands(static_cast<std::size_t>(d.num_rx));
    for (int k = 0; k < d.num_rx; ++k)
        cands[static_cast<std::size_t>(k)] = k;

    std::vector<TerminalSet> out;
    for (int c = 0; c < d.num_sc; ++c)
    {
        auto metric = [&](int k, const TerminalSet &s) {
            if (weights(k) == 0.0)
                return 0.0;
            const Mask dk = sc.masks.data_mask(k);
            std::vector<int> idx;
            for (Eigen::Index i = 0; i < dk.size(); ++i)
                if (dk(i))
                    idx.push_back(static_cast<int>(i));
            const CVector h = sc.channels.stacked(k, c)(idx);
            CMatrix others(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(s.size()) - 1);
            Eigen::Index col = 0;
            for (int kb : s)
                if (kb != k)
                    others.col(col++) = masked(sc.masks.coupling_mask(kb, k), sc.channels.stacked(kb, c))(idx);
            const double x = budget * residual_gain(h, others) /
                             (sc.channels.noise(k, c) * d.num_sc * static_cast<double>(s.size()));
            return weights(k) * shifted_quality(qf, x);
        };
        auto score = [&](const TerminalSet &s) {
            double sum = 0.0;
            for (int k : s)
                sum += metric(k, s);
            return sum;
        };
        auto ok = [&](const TerminalSet &s) {
            for (int j = 0; j < d.num_tx; ++j)
            {
                int n = 0;
                for (int k : s)
                    n += sc.clusters.coordinates(j, k) ? 1 : 0;
                if (n > d.antennas[static_cast<std::size_t>(j)])
                    return false;
            }
            return true;
        };
        TerminalSet s;
        double best = 0.0;
        for (int k : cands)
        {
            const double v = metric(k, {k});
            if (v > best)
            {
                best = v;
                s = {k};
            }
        }
        out.push_back(greedy_search(cands, std::move(s), score, ok));
    }
    return out;
}

// ---------- power allocation and beamforming ----------

WaterfillResult waterfill(const RVector &rho, const RVector &mu, const QualityFunction &qf, double budget)
{
    if (rho.size() != mu.size())
        throw InvalidArgument("waterfilling needs one weight per gain");
    if (!(budget >= 0.0) || !std::isfinite(budget))
        throw InvalidArgument("power budget must be finite and nonnegative");
    WaterfillResult res;
    res.power = RVector::Zero(rho.size());
    const double g0 = quality_derivative(qf, 0.0);
    double hi = 0.0;
    for (Eigen::Index s = 0; s < rho.size(); ++s)
        if (rho(s) > 0.0 && mu(s) > 0.0)
            hi = std::max(hi, mu(s) * rho(s) * g0);
    if (hi == 0.0 || budget == 0.0)
    {
        res.empty = true;
        return res;
    }
    auto powers = [&](double nu) {
        RVector p = RVector::Zero(rho.size());
        for (Eigen::Index s = 0; s < rho.size(); ++s)
            if (rho(s) > 0.0 && mu(s) > 0.0)
                p(s) = std::max(quality_inv_derivative(qf, nu / (mu(s) * rho(s))) / rho(s), 0.0);
        return p;
    };
    // At nu = hi nothing is switched on; walk down until the budget is exceeded.
    double lo = hi;
    for (int i = 0; i < 4000 && powers(lo).sum() < budget; ++i)
        lo /= 4.0;
    for (int i = 0; i < 400 && hi / lo - 1.0 > 4e-16; ++i)
    {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi)
            break;
        (powers(mid).sum() >= budget ? lo : hi) = mid;
    }
    res.level = lo;
    res.power = powers(lo);
    const double total = res.power.sum();
    if (!(total > 0.0))
    {
        res.empty = true;
        res.power.setZero();
        return res;
    }
    res.power *= budget / total;
    return res;
}

CVector zero_forcing_direction(const CVector &h, const CMatrix &others)
{
    const double hn = h.norm();
    if (hn == 0.0)
        return CVector::Zero(h.size());
    CVector r = h;
    if (others.cols() > 0)
    {
        const CMatrix u = orthonormal_basis(others);
        r = h - u * (u.adjoint() * h);
    }
    const double rn = r.norm();
    if (rn <= 1e-10 * hn)
        return CVector::Zero(h.size());
    return r / rn;
}

DualParams heuristic_params(const ScheduleState &st, int j, const RVector &weights, const RMatrix &noise,
                            const RVector &q, int num_sc)
{
    DualParams dp;
    dp.omega = RVector::Constant(q.size(), static_cast<double>(num_sc)).cwiseQuotient(q);
    dp.lambda = RMatrix::Zero(noise.rows(), noise.cols());
    for (int c = 0; c < num_sc; ++c)
    {
        const TerminalSet sa = set_union(st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)],
                                         st.coord[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)]);
        if (sa.empty())
            continue;
        double mean = 0.0;
        for (int k : sa)
            mean += weights(k);
        mean /= static_cast<double>(sa.size());
        if (mean <= 0.0)
            continue;
        for (int k : sa)
            dp.lambda(k, c) = weights(k) / (noise(k, c) * mean);
    }
    return dp;
}

CVector dvsinr_beamformer(int j, int k, int c, const Scenario &sc, const DualParams &heur)
{
    const int nj = sc.dims.antennas[static_cast<std::size_t>(j)];
    CMatrix a = CMatrix::Identity(nj, nj) * heur.omega(j);
    for (int kb : sc.clusters.coord_sets[static_cast<std::size_t>(j)])
    {
        const double l = heur.lambda(kb, c);
        if (kb == k || l == 0.0)
            continue;
        const CVector h = sc.channels.block(j, kb, c);
        a.noalias() += l * h * h.adjoint();
    }
    const CVector h = sc.channels.block(j, k, c);
    const CVector w = hermitian_pseudo_inverse(a) * h;
    const double wn = w.norm();
    if (!(wn > 0.0) || !(h.dot(w).real() > 0.0))
        throw UnservableError(k, c);
    return w / wn;
}

// ---------- strategies ----------

StrategyOutput cvsinr(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                      const CvsinrOptions &opts)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    std::vector<TerminalSet> sched = opts.schedule ? *opts.schedule : prosched_central(sc, weights, qf);
    if (static_cast<int>(sched.size()) != d.num_sc)
        throw InvalidArgument("CVSINR schedule needs one set per subcarrier");
    std::vector<std::pair<int, int>> dropped;
    DualParams duals;
    RealizedAllocation ra;
    for (;;)
    {
        duals = DualParams::zeros(sc.constraints.size(), d.num_rx, d.num_sc);
        duals.omega = RVector::Constant(sc.constraints.size(), static_cast<double>(d.num_sc))
                          .cwiseQuotient(sc.constraints.q);
        for (int c = 0; c < d.num_sc; ++c)
        {
            auto &s = sched[static_cast<std::size_t>(c)];
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            double wsum = 0.0;
            for (int k : s)
                wsum += weights(k);
            if (wsum <= 0.0)
                continue;
            for (int k : s)
                duals.lambda(k, c) =
                    weights(k) * static_cast<double>(s.size()) / (sc.channels.noise(k, c) * wsum);
        }
        try
        {
            ra = realize_allocation(duals, sc);
            break;
        }
        catch (const UnservableError &e)
        {
            auto &s = sched[static_cast<std::size_t>(e.subcarrier)];
            s = without(s, e.terminal);
            dropped.emplace_back(e.terminal, e.subcarrier);
        }
    }
    Allocation alloc = ra.alloc;
    rescale_full_power(alloc, sc);

    ServeSets serve = ScheduleState::empty(d).serve;
    for (int c = 0; c < d.num_sc; ++c)
        for (int k : sched[static_cast<std::size_t>(c)])
            if (alloc.power(k, c) > 0.0)
                for (int j = 0; j < d.num_tx; ++j)
                    if (sc.clusters.serves(j, k))
                        serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].push_back(k);
    StrategyOutput out = evaluate_allocation("cvsinr", std::move(alloc), make_schedule(sc, std::move(serve), false),
                                             sc, weights, qf);
    out.params = duals;
    out.dropped = std::move(dropped);
    return out;
}

StrategyOutput dvsinr(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                      const ScheduleState &prev, const DvsinrOptions &opts)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    const RVector q = transmitter_limits(sc);

    // Lines 3-6: scheduling and the coordination sets.
    ScheduleState st;
    if (opts.serve)
    {
        st = make_schedule(sc, *opts.serve);
        st.slot = prev.slot + 1;
    }
    else
    {
        st = prev;
        for (int s = 0; s < std::max(opts.slots, 1); ++s)
            st = prosched_schedule(st, sc, weights, qf);
    }

    // Line 7: waterfilling on zero-forcing gains, per transmitter.
    std::vector<std::pair<int, int>> dropped;
    std::vector<std::vector<Stream>> streams(static_cast<std::size_t>(d.num_tx));
    std::vector<std::vector<double>> power(static_cast<std::size_t>(d.num_tx));
    for (int j = 0; j < d.num_tx; ++j)
    {
        for (int c = 0; c < d.num_sc; ++c)
        {
            auto &S = st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            const ZfCell cell = zf_cell(sc, j, c, S, st.coord[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)]);
            for (int k : cell.removed)
                dropped.emplace_back(k, c);
            S = cell.S;
            for (std::size_t i = 0; i < cell.S.size(); ++i)
                streams[static_cast<std::size_t>(j)].push_back({cell.S[i], c, cell.v[i], cell.rho[i]});
        }
        power[static_cast<std::size_t>(j)] = waterfill_streams(streams[static_cast<std::size_t>(j)], weights, qf, q(j));
    }

    // Lines 8-9: drop weak streams and refresh the coordination sets.
    for (int j = 0; j < d.num_tx; ++j)
    {
        const double tau = opts.tau >= 0.0 ? opts.tau : 1e-4 * q(j) / d.num_sc;
        const auto &sj = streams[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < sj.size(); ++i)
            if (power[static_cast<std::size_t>(j)][i] < tau)
            {
                auto &S = st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(sj[i].c)];
                S = without(S, sj[i].k);
            }
    }
    update_coordination(st, sc.clusters);

    // Lines 10-11: local parameters and beamformers.
    Allocation alloc(d);
    for (int j = 0; j < d.num_tx; ++j)
    {
        const DualParams heur = heuristic_params(st, j, weights, sc.channels.noise(), q, d.num_sc);
        const auto &sj = streams[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < sj.size(); ++i)
        {
            const int k = sj[i].k;
            const int c = sj[i].c;
            if (!contains(st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)], k))
                continue;
            try
            {
                const CVector v = dvsinr_beamformer(j, k, c, sc, heur);
                alloc.set(k, c, embed(sc, j, v), power[static_cast<std::size_t>(j)][i]);
            }
            catch (const UnservableError &)
            {
                dropped.emplace_back(k, c);
            }
        }
    }
    StrategyOutput out = evaluate_allocation("dvsinr", std::move(alloc), std::move(st), sc, weights, qf);
    out.dropped = std::move(dropped);
    return out;
}

StrategyOutput coordinated_zf(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                              const ZfOptions &opts)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    const RVector q = transmitter_limits(sc);
    ScheduleState st;
    if (opts.serve)
        st = make_schedule(sc, *opts.serve);
    else
    {
        // Single-cell scheduling: every transmitter ignores the others.
        ServeSets serve = ScheduleState::empty(d).serve;
        for (int j = 0; j < d.num_tx; ++j)
            for (int c = 0; c < d.num_sc; ++c)
                serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] =
                    prosched_local(sc, j, c, {}, {}, weights, qf, q(j));
        resolve_claims(sc, serve);
        st = make_schedule(sc, std::move(serve));
    }
    std::vector<std::pair<int, int>> dropped;
    Allocation alloc(d);
    for (int j = 0; j < d.num_tx; ++j)
    {
        std::vector<Stream> streams;
        for (int c = 0; c < d.num_sc; ++c)
        {
            auto &S = st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            const ZfCell cell = zf_cell(sc, j, c, S, st.coord[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)]);
            for (int k : cell.removed)
                dropped.emplace_back(k, c);
            S = cell.S;
            for (std::size_t i = 0; i < cell.S.size(); ++i)
                streams.push_back({cell.S[i], c, cell.v[i], cell.rho[i]});
        }
        const std::vector<double> p = waterfill_streams(streams, weights, qf, q(j));
        for (std::size_t i = 0; i < streams.size(); ++i)
            if (p[i] > 0.0)
                alloc.set(streams[i].k, streams[i].c, embed(sc, j, streams[i].v), p[i]);
    }
    for (int j = 0; j < d.num_tx; ++j)
        for (int c = 0; c < d.num_sc; ++c)
        {
            auto &S = st.serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            S.erase(std::remove_if(S.begin(), S.end(), [&](int k) { return alloc.power(k, c) <= 0.0; }), S.end());
        }
    update_coordination(st, sc.clusters);
    StrategyOutput out = evaluate_allocation("coordinated_zf", std::move(alloc), std::move(st), sc, weights, qf);
    out.dropped = std::move(dropped);
    return out;
}

std::vector<int> strongest_server(const Scenario &sc)
{
    const Dimensions &d = sc.dims;
    std::vector<int> home(static_cast<std::size_t>(d.num_rx), -1);
    for (int k = 0; k < d.num_rx; ++k)
    {
        double best = -1.0;
        for (int j = 0; j < d.num_tx; ++j)
        {
            if (!sc.clusters.serves(j, k))
                continue;
            double g = 0.0;
            for (int c = 0; c < d.num_sc; ++c)
                g += server_gain(sc, j, k, c);
            if (g > best)
            {
                best = g;
                home[static_cast<std::size_t>(k)] = j;
            }
        }
    }
    return home;
}

RMatrix default_intercell_noise(const Scenario &sc, const std::vector<int> &home)
{
    const Dimensions &d = sc.dims;
    const RVector q = transmitter_limits(sc);
    RMatrix out = RMatrix::Zero(d.num_rx, d.num_sc);
    for (int k = 0; k < d.num_rx; ++k)
        for (int c = 0; c < d.num_sc; ++c)
            for (int i = 0; i < d.num_tx; ++i)
                if (i != home[static_cast<std::size_t>(k)] && sc.clusters.coordinates(i, k))
                    out(k, c) += q(i) / (d.num_sc * d.antennas[static_cast<std::size_t>(i)]) *
                                 server_gain(sc, i, k, c);
    return out;
}

StrategyOutput single_cell(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                           const std::optional<RMatrix> &intercell_noise, const DvsinrOptions &opts)
{
    check_weights(sc, weights);
    const Dimensions &d = sc.dims;
    const RVector q = transmitter_limits(sc);
    const std::vector<int> home = strongest_server(sc);
    const RMatrix extra = intercell_noise ? *intercell_noise : default_intercell_noise(sc, home);
    if (extra.rows() != d.num_rx || extra.cols() != d.num_sc || (extra.array() < 0.0).any())
        throw InvalidArgument("inter-cell noise must be a nonnegative K_r x K_c matrix");

    Allocation alloc(d);
    ServeSets serve = ScheduleState::empty(d).serve;
    std::vector<std::pair<int, int>> dropped;
    for (int j = 0; j < d.num_tx; ++j)
    {
        TerminalSet members;
        for (int k = 0; k < d.num_rx; ++k)
            if (home[static_cast<std::size_t>(k)] == j)
                members.push_back(k);
        if (members.empty())
            continue;
        const int nm = static_cast<int>(members.size());
        const int nj = d.antennas[static_cast<std::size_t>(j)];
        Dimensions sd = Dimensions::uniform(1, nj, nm, d.num_sc);
        ChannelSet ch(sd, 1.0);
        RVector w(nm);
        for (int m = 0; m < nm; ++m)
        {
            const int k = members[static_cast<std::size_t>(m)];
            w(m) = weights(k);
            for (int c = 0; c < d.num_sc; ++c)
            {
                ch.set_block(0, m, c, sc.channels.block(j, k, c));
                ch.set_noise(m, c, sc.channels.noise(k, c) + extra(k, c));
            }
        }
        const Scenario cell = Scenario::make(std::move(ch), ClusterConfig::network_mimo(sd),
                                             PowerConstraintSet::per_transmitter(sd, RVector::Constant(1, q(j))));
        const StrategyOutput r = dvsinr(cell, w, qf, ScheduleState::empty(sd), opts);
        for (int m = 0; m < nm; ++m)
        {
            const int k = members[static_cast<std::size_t>(m)];
            for (int c = 0; c < d.num_sc; ++c)
                if (r.allocation.power(m, c) > 0.0)
                {
                    alloc.set(k, c, embed(sc, j, r.allocation.direction(m, c)), r.allocation.power(m, c));
                    serve[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].push_back(k);
                }
        }
        for (auto [m, c] : r.dropped)
            dropped.emplace_back(members[static_cast<std::size_t>(m)], c);
    }
    StrategyOutput out =
        evaluate_allocation("single_cell", std::move(alloc), make_schedule(sc, std::move(serve)), sc, weights, qf);
    out.dropped = std::move(dropped);
    return out;
}

} // namespace multicell
