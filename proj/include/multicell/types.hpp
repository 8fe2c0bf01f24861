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

#ifndef MULTICELL_TYPES_HPP
#define MULTICELL_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace multicell
{

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Diagonal 0/1 selection pattern of length N.
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Sorted, duplicate-free list of 0-based terminal indices.
using TerminalSet = std::vector<int>;

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Inputs that violate a documented precondition (dimensions, index ranges, set relations).
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

// A numerical procedure could not produce a meaningful answer.
class NumericalError : public Error
{
public:
    using Error::Error;
};

// The masked channel of a terminal lies in the null space of its beamforming matrix.
class UnservableError : public NumericalError
{
public:
    UnservableError(int terminal, int subcarrier)
        : NumericalError("terminal " + std::to_string(terminal) + " is unservable on subcarrier " +
                         std::to_string(subcarrier)),
          terminal(terminal), subcarrier(subcarrier)
    {
    }
    int terminal;
    int subcarrier;
};

// SINR targets that cannot be met with nonnegative powers.
class InfeasibleError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

} // namespace multicell

#endif
