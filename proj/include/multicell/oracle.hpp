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

// Desk-scale references: grid search over the dual parametrization and
// exhaustive enumeration of schedules.

#ifndef MULTICELL_ORACLE_HPP
#define MULTICELL_ORACLE_HPP

#include "multicell/strategies.hpp"

namespace multicell
{

struct GridOptions
{
    int resolution = 21; // points per axis on [0, 1]
    // Grid lambda_kc sigma_kc^2 and omega_l q_l / K_c instead of the raw
    // parameters, so that the grid resolves the ratios that matter.
    bool natural_units = true;
    UtilityKind utility = UtilityKind::weighted_sum;
    // Serve each terminal from one transmitter only and score with
    // incoherent interference. Every association is searched when there are
    // at most max_associations of them, else the strongest server is used.
    bool restrict_single_transmitter = false;
    int max_associations = 64;
    // When there are more associations than this, a 3-level grid ranks them
    // and only the best ones get the full grid (0: search all).
    int association_prescreen = 4;
    // Coordinate pattern search from this many of the best grid points.
    int refine_starts = 0;
    int refine_evaluations = 4000;
    double refine_min_step = 1e-4;
    int max_dimensions = 8;
    int workers = 1;
};

/// Best (rescaled) realization over the grid of parameters [lambda, omega]
/// (in natural units unless disabled) whose largest entry equals 1. StrategyOutput::utility holds the utility
/// selected in the options.
StrategyOutput grid_search_p1(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                              const GridOptions &opts = {});

/// Utility of one parameter point after realization and rescaling; nullopt
/// when the point is skipped (unservable or negative powers).
std::optional<StrategyOutput> evaluate_params(const DualParams &duals, const Scenario &sc, const RVector &weights,
                                              const QualityFunction &qf, UtilityKind utility,
                                              SinrModel model = SinrModel::coherent);

/// Every choice of one serving transmitter per terminal, or only the
/// strongest-server choice when there are more than `cap`.
std::vector<std::vector<int>> single_server_associations(const Scenario &sc, std::size_t cap);

/// Scenario in which terminal k is served by transmitter home[k] only.
Scenario single_transmitter_restriction(const Scenario &sc, const std::vector<int> &home);

enum class InnerStrategy
{
    cvsinr,
    dvsinr,
    coordinated_zf,
};

/// Best inner-strategy result over every admissible fixed schedule. Limited
/// to 6 terminals, 2 subcarriers and 200000 schedules.
StrategyOutput exhaustive_schedule(const Scenario &sc, const RVector &weights, const QualityFunction &qf,
                                   InnerStrategy inner);

} // namespace multicell

#endif
