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

#ifndef MULTICELL_DUAL_PARAMS_HPP
#define MULTICELL_DUAL_PARAMS_HPP

#include "multicell/types.hpp"

#include <algorithm>

namespace multicell
{

/// Multipliers that parametrize the optimal single-stream precoders: omega_l
/// per power constraint and lambda_kc per (terminal, subcarrier).
struct DualParams
{
    RVector omega;  // length L
    RMatrix lambda; // K_r x K_c

    static DualParams zeros(int num_constraints, int num_rx, int num_sc)
    {
        return {RVector::Zero(num_constraints), RMatrix::Zero(num_rx, num_sc)};
    }

    /// Largest entry over omega and lambda (0 when everything vanishes).
    double max_coeff() const
    {
        double m = 0.0;
        if (omega.size())
            m = std::max(m, omega.maxCoeff());
        if (lambda.size())
            m = std::max(m, lambda.maxCoeff());
        return m;
    }

    /// Divide by the largest entry so that everything lies in [0, 1].
    DualParams normalized() const
    {
        const double m = max_coeff();
        if (m <= 0.0)
            return *this;
        return {omega / m, lambda / m};
    }

    DualParams scaled(double t) const { return {omega * t, lambda * t}; }
};

} // namespace multicell

#endif
