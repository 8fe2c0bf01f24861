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

// Synthetic channels: Rayleigh fading with per-link path loss, the per-link
// phase error model, proportional-fair weights and CSV import.

#ifndef MULTICELL_CHANNELS_HPP
#define MULTICELL_CHANNELS_HPP

#include "multicell/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace multicell
{

/// Seed for an independent stream identified by a tuple of integers.
std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/// Each entry of h_jkc is CN(0, path_loss(j, k)). `correlation` in [0, 1]
/// mixes a component common to all transmitters into the blocks of a
/// terminal. Noise power is set to `noise` everywhere.
ChannelSet rayleigh(const Dimensions &dims, const RMatrix &path_loss, std::uint64_t seed, double noise = 1.0,
                    double correlation = 0.0);

/// Multiplies every block h_jkc by exp(i phi_jkc), phi_jkc ~ N(0, sigma^2).
ChannelSet phase_perturb(const ChannelSet &chans, double sigma, std::uint64_t seed);

/// mu_k proportional to 1 / E[log2(1 + K_t/(K_r sigma^2) max_j P_j ||h_jk||^2)],
/// the expectation taken over the ensemble and the subcarriers, scaled so the
/// weights sum to K_r.
RVector proportional_fair_weights(const std::vector<ChannelSet> &ensemble, const RVector &tx_power);

/// Same, with P_j read from per-transmitter constraints.
RVector proportional_fair_weights(const std::vector<ChannelSet> &ensemble, const PowerConstraintSet &pcs);

/// Lines "j,k,c,re_0,im_0,re_1,im_1,..." (0-based indices). Blank lines and
/// lines starting with '#' are skipped. Unlisted blocks stay zero.
ChannelSet read_channel_csv(const std::string &path, const Dimensions &dims, double noise = 1.0);

} // namespace multicell

#endif
