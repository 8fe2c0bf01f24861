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

// Resource allocation strategies: centralized and distributed virtual-SINR
// allocation, ProSched-style scheduling with coordination sets, waterfilling,
// and the coordinated zero-forcing and single-cell baselines.

#ifndef MULTICELL_STRATEGIES_HPP
#define MULTICELL_STRATEGIES_HPP

#include "multicell/dual_params.hpp"
#include "multicell/model.hpp"
#include "multicell/sinr.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace multicell
{

using ServeSets = std::vector<std::vector<TerminalSet>>; // [j][c]

/// S_n(j, c) and A_n(j, c) for every transmitter and subcarrier.
struct ScheduleState
{
    int slot = 0;
    ServeSets serve; // S_n(j, c)
    ServeSets coord; // A_n(j, c)

    static ScheduleState empty(const Dimensions &dims);
    bool is_empty() const;
    /// Union over transmitters of S_n(j, c).
    TerminalSet scheduled(int c) const;
    /// Serving transmitter of k on c, or -1.
    int server(int k, int c) const;
    bool operator==(const ScheduleState &) const = default;
};

/// A(j, c) = union over i != j of S(i, c) intersected with C_j.
void update_coordination(ScheduleState &st, const ClusterConfig &clusters);

/// Schedule with the given serve sets and the coordination sets they imply.
/// Throws InvalidArgument if a set leaves D_j, or if `single_server` and a
/// terminal has two servers on one subcarrier.
ScheduleState make_schedule(const Scenario &sc, ServeSets serve, bool single_server = true);

struct StrategyOutput
{
    std::string strategy;
    Allocation allocation;
    ScheduleState schedule;
    SinrModel model = SinrModel::coherent;
    RMatrix sinr;                 // K_r x K_c under `model`
    RVector per_terminal_rate;    // sum_c log2(1 + sinr)
    RVector per_terminal_quality; // sum_c quality_value(sinr)
    double utility = 0.0;         // weighted sum of per_terminal_quality
    DualParams params;            // parameters behind the directions, if global ones exist
    std::vector<std::pair<int, int>> dropped; // (terminal, subcarrier) removed as unservable
};

/// SINRs, rates and the weighted-sum utility of an allocation.
StrategyOutput evaluate_allocation(std::string name, Allocation alloc, ScheduleState schedule, const Scenario &sc,
                                   const RVector &weights, const QualityFunction &qf,
                                   SinrModel model = SinrModel::coherent);

/// Per-transmitter limits q_j; throws InvalidArgument for other constraint sets.
RVector transmitter_limits(const Scenario &sc);

// ---------- scheduling ----------

/// mu_k (g(x) - g(0)) with x = q_j ||P h_jkc||^2 / (sigma^2 K_c |S|), where P
/// projects onto the null space of BS j's channels to (S u A) \ {k}.
double prosched_metric(const Scenario &sc, int j, int k, int c, const TerminalSet &S, const TerminalSet &A,
                       const RVector &weights, const QualityFunction &qf, double q_j);

double prosched_sum_metric(const Scenario &sc, int j, int c, const TerminalSet &S, const TerminalSet &A,
                           const RVector &weights, const QualityFunction &qf, double q_j);

/// Greedy add/remove search for one (transmitter, subcarrier) pair started
/// from `start`. Candidates are D_j \ A and |S| <= N_j; members of A that do
/// not fit next to S are ignored, weakest first. An empty start is replaced
/// by the strongest singleton.
TerminalSet prosched_local(const Scenario &sc, int j, int c, const TerminalSet &start, const TerminalSet &A,
                           const RVector &weights, const QualityFunction &qf, double q_j);

/// One scheduling slot: local searches against the previous coordination
/// sets, central resolution of double claims (larger ||h_jkc||^2 wins, then
/// the lower transmitter index), then fresh coordination sets.
ScheduleState prosched_schedule(const ScheduleState &prev, const Scenario &sc, const RVector &weights,
                                const QualityFunction &qf);

/// Global-CSI scheduling per subcarrier with |S_c n C_j| <= N_j, equal power
/// sum_j q_j / (K_c |S_c|) and zero forcing inside each terminal's serving
/// antennas.
std::vector<TerminalSet> prosched_central(const Scenario &sc, const RVector &weights, const QualityFunction &qf);

// ---------- power allocation and beamforming ----------

struct WaterfillResult
{
    RVector power;      // per stream
    double level = 0.0; // nu
    bool empty = false; // no stream receives power
};

/// Maximizes sum_s mu_s g(p_s rho_s) subject to sum_s p_s = budget, p >= 0.
WaterfillResult waterfill(const RVector &rho, const RVector &mu, const QualityFunction &qf, double budget);

/// Unit-norm projection of h onto the null space of the columns of `others`.
/// Zero when h lies in their span.
CVector zero_forcing_direction(const CVector &h, const CMatrix &others);

/// Local parameters of transmitter j: omega_i = K_c / q_i and
/// lambda_kc = mu_k / (sigma_kc^2 mean_{SA} mu) for k in S(j,c) u A(j,c).
DualParams heuristic_params(const ScheduleState &st, int j, const RVector &weights, const RMatrix &noise,
                            const RVector &q, int num_sc);

/// (omega_j I + sum lambda_kb h_jkb h_jkb^H)^+ h_jkc over kb in C_j \ {k},
/// normalized. Reads only BS j's channels. Throws UnservableError.
CVector dvsinr_beamformer(int j, int k, int c, const Scenario &sc, const DualParams &heur);

// ---------- strategies ----------

struct CvsinrOptions
{
    std::optional<std::vector<TerminalSet>> schedule; // per subcarrier; skips scheduling
};

StrategyOutput cvsinr(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                      const CvsinrOptions &opts = {});

struct DvsinrOptions
{
    double tau = -1.0; // negative: 1e-4 q_j / K_c
    int slots = 1;     // scheduling slots run on the same channels
    std::optional<ServeSets> serve; // fixed S(j, c); skips scheduling
};

StrategyOutput dvsinr(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                      const ScheduleState &prev, const DvsinrOptions &opts = {});

struct ZfOptions
{
    std::optional<ServeSets> serve;
};

StrategyOutput coordinated_zf(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                              const ZfOptions &opts = {});

/// Strongest serving transmitter of every terminal (summed over subcarriers).
std::vector<int> strongest_server(const Scenario &sc);

/// sum over other cells i coordinating towards k of (q_i / (K_c N_i)) ||h_ikc||^2.
RMatrix default_intercell_noise(const Scenario &sc, const std::vector<int> &home);

StrategyOutput single_cell(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                           const std::optional<RMatrix> &intercell_noise = std::nullopt,
                           const DvsinrOptions &opts = {});

} // namespace multicell

#endif
