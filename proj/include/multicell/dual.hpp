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

// QoS feasibility through the Lagrange dual: a fixed point in lambda for
// given omega and an outer maximization over omega.

#ifndef MULTICELL_DUAL_HPP
#define MULTICELL_DUAL_HPP

#include "multicell/param.hpp"

#include <string>

namespace multicell
{

/// SINR floor per (terminal, subcarrier); zero means not scheduled.
struct QosTargets
{
    RMatrix gamma; // K_r x K_c
};

struct DualSolverOptions
{
    int inner_max = 500;
    int outer_max = 200;
    // Relative primal-dual gap at which the omega search stops.
    double tolerance = 1e-8;
    // lambda_kc sigma_kc^2 above this declares the targets infeasible.
    double lambda_cap = 1e8;
    // Smallest y_l on the simplex; much lower and the recovered directions lose accuracy.
    double omega_floor = 1e-9;
    // Power overshoot up to this fraction is absorbed by scaling all powers down,
    // which costs at most the same fraction of SINR.
    double overshoot = 1e-6;
};

enum class P2Status
{
    feasible,
    infeasible,
    max_iter,
};

const char *to_string(P2Status s);

struct P2Result
{
    P2Status status = P2Status::max_iter;
    RealizedAllocation allocation;
    DualParams duals;         // normalized to max entry 1
    double dual_gap = 0.0;    // sum lambda sigma^2 - sum omega q
    double power_scale = 0.0; // smallest beta with consumed_l <= beta q_l for the recovered primal
    double certificate_gap = 0.0; // sum lambda sigma^2 - power_scale * sum omega q
    int iterations = 0;       // outer iterations
    int inner_iterations = 0; // total inner iterations
    std::string message;
};

P2Result solve_p2(const QosTargets &targets, const Scenario &sc, const DualSolverOptions &opts = {});

struct QosReport
{
    RMatrix sinr_margin; // SINR - target on targeted pairs, 0 elsewhere
    RVector power_slack; // q_l - consumed_l
    double worst_relative_margin = 0.0; // min over targeted pairs of (SINR - target) / target
};

QosReport verify_qos(const Allocation &alloc, const QosTargets &targets, const Scenario &sc);

} // namespace multicell

#endif
