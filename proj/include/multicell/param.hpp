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

// Map from dual parameters (omega, lambda) to beamforming directions, QoS
// levels, the coupling matrices and downlink powers, plus full-power
// rescaling.

#ifndef MULTICELL_PARAM_HPP
#define MULTICELL_PARAM_HPP

#include "multicell/dual_params.hpp"
#include "multicell/model.hpp"
#include "multicell/sinr.hpp"

#include <vector>

namespace multicell
{

struct RealizedAllocation
{
    Allocation alloc;
    RMatrix gamma;                   // K_r x K_c, zero for inactive pairs
    std::vector<RMatrix> M;          // per subcarrier, rows/cols follow active[c]
    std::vector<TerminalSet> active; // per subcarrier: terminals with lambda_kc > 0
    RVector consumed;                // per constraint: sum_kc tr(Q_l S_kc)
    std::vector<int> active_constraints;
    bool nonnegative = true;   // the power systems had nonnegative solutions
    bool within_budget = true; // every power constraint holds
    bool feasible = true;      // both of the above
    bool empty = false;        // nothing consumes power
    double scale = 1.0;        // factor applied by the last rescale
};

/// Unnormalized receive filter A^+ D_k h_kc of the virtual uplink. It has the
/// direction of the linear MMSE receiver and of the optimal beamformer.
CVector mmse_filter(const DualParams &duals, const Scenario &sc, int k, int c);

/// Unit-norm v proportional to A^+ D_k h_kc with h^H D_k v real positive.
/// Throws UnservableError when D_k h_kc has no component in the range of A.
CVector beamformer_from_params(const DualParams &duals, const Scenario &sc, int k, int c);

/// lambda_kc h^H D_k A^+ D_k h_kc.
double gamma_from_params(const DualParams &duals, const Scenario &sc, int k, int c);

/// Coupling matrix over `active`: M[m][m] = |h_m^H D_m v_m|^2,
/// M[m][n] = -gamma_n |h_n^H C_n D_m v_m|^2. `gammas` and `directions` are
/// indexed by terminal.
RMatrix build_M(const RVector &gammas, const std::vector<CVector> &directions, const ChannelSet &chans,
                const SelectionMasks &masks, int c, const TerminalSet &active);

/// Solves p M = (gamma_k sigma_k^2) over the active set. Throws InfeasibleError
/// when a component is negative beyond 1e-9 of the largest power or the system
/// has no exact solution.
RVector power_allocation(const RMatrix &M, const RVector &gammas, const RVector &noise);

/// Directions from the duals, QoS levels from gamma_from_params, then powers.
RealizedAllocation realize_allocation(const DualParams &duals, const Scenario &sc);

/// Directions from the duals but powers that meet the given targets exactly.
/// The active set is {(k, c) : targets(k, c) > 0}.
RealizedAllocation realize_with_targets(const DualParams &duals, const RMatrix &targets, const Scenario &sc);

/// sum_kc tr(Q_l S_kc) for every constraint l.
RVector consumed_power(const Allocation &alloc, const Scenario &sc);

/// Indices l with consumed_l >= q_l (1 - rel_tol).
std::vector<int> tight_constraints(const RVector &consumed, const RVector &q, double rel_tol = 1e-9);

/// Scale every power by eps = min_l q_l / consumed_l, skipping constraints
/// that consume nothing. Returns eps, or 1 when nothing consumes power.
/// eps < 1 is allowed and pulls an overloaded allocation back into budget.
double rescale_full_power(Allocation &alloc, const Scenario &sc);

RealizedAllocation rescale_full_power(const RealizedAllocation &ra, const Scenario &sc);

} // namespace multicell

#endif
