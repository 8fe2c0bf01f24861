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

// System model: dimensions, channels, dynamic cooperation clusters, the
// selection masks they induce, and linear power constraints.
//
// Indices are 0-based throughout: transmitter j in [0, num_tx), terminal k in
// [0, num_rx), subcarrier c in [0, num_sc), constraint l in [0, L).

#ifndef MULTICELL_MODEL_HPP
#define MULTICELL_MODEL_HPP

#include "multicell/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace multicell
{

struct Dimensions
{
    int num_tx = 1;
    std::vector<int> antennas{1}; // N_j per transmitter
    int num_rx = 1;
    int num_sc = 1;

    static Dimensions uniform(int num_tx, int antennas_per_tx, int num_rx, int num_sc);

    int total_antennas() const;
    int offset(int j) const; // first stacked index of transmitter j
    int streams() const { return num_rx * num_sc; }

    /// Throws InvalidArgument if any count is < 1 or antennas.size() != num_tx.
    void validate() const;

    bool operator==(const Dimensions &) const = default;
};

/// Channel vectors h_jkc stored in stacked form h_kc (length N) plus the
/// per-(k, c) noise power sigma^2_kc on a linear scale.
class ChannelSet
{
public:
    ChannelSet() = default;
    explicit ChannelSet(Dimensions dims, double noise_power = 1.0);

    const Dimensions &dims() const { return dims_; }

    const CVector &stacked(int k, int c) const { return h_[index(k, c)]; }
    CVector &stacked(int k, int c) { return h_[index(k, c)]; }

    /// Per-transmitter block h_jkc (length N_j).
    Eigen::VectorBlock<const CVector> block(int j, int k, int c) const;
    void set_block(int j, int k, int c, const CVector &h);

    double noise(int k, int c) const { return noise_(k, c); }
    void set_noise(int k, int c, double sigma2);
    const RMatrix &noise() const { return noise_; }

private:
    std::size_t index(int k, int c) const;

    Dimensions dims_;
    std::vector<CVector> h_;
    RMatrix noise_;
};

/// Dynamic cooperation clusters: transmitter j serves data_sets[j] and
/// coordinates interference towards coord_sets[j].
struct ClusterConfig
{
    std::vector<TerminalSet> data_sets;  // D_j
    std::vector<TerminalSet> coord_sets; // C_j

    bool serves(int j, int k) const;
    bool coordinates(int j, int k) const;

    /// Every transmitter serves and coordinates towards every terminal.
    static ClusterConfig network_mimo(const Dimensions &dims);
    /// Transmitter j serves terminal j only and coordinates towards all (needs num_tx == num_rx).
    static ClusterConfig interference_channel(const Dimensions &dims);
    /// Transmitter j serves the terminals with home[k] == j and coordinates towards all.
    static ClusterConfig home_cells(const Dimensions &dims, const std::vector<int> &home);
};

/// Throws InvalidArgument on out-of-range indices, D_j not a subset of C_j,
/// or a terminal that no transmitter serves.
void validate_clusters(const ClusterConfig &clusters, const Dimensions &dims);

/// Diagonals of D_k and C_k, stored as N x K_r boolean columns, together with
/// the block layout they were built from.
struct SelectionMasks
{
    Dimensions dims;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> data;  // column k: diag(D_k)
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> coord; // column k: diag(C_k)

    Mask data_mask(int k) const { return data.col(k).array(); }
    Mask coord_mask(int k) const { return coord.col(k).array(); }
    /// diag(C_a D_b): the antennas of transmitters that serve b and coordinate towards a.
    Mask coupling_mask(int coordinated, int served) const
    {
        return data.col(served).array() && coord.col(coordinated).array();
    }
    bool serves(int j, int k) const { return data(dims.offset(j), k); }
    bool coordinates(int j, int k) const { return coord(dims.offset(j), k); }

    bool operator==(const SelectionMasks &) const = default;
};

SelectionMasks build_selection_masks(const ClusterConfig &clusters, const Dimensions &dims);

/// I_k: co-terminals served by the transmitters whose interference reaches k.
TerminalSet interferer_set(int k, const ClusterConfig &clusters);

/// Ĩ_k: terminals that the transmitters serving k coordinate interference towards.
TerminalSet coordinated_set(int k, const ClusterConfig &clusters);

/// sum_k sum_c tr(Q_l S_kc) <= q_l for every l.
struct PowerConstraintSet
{
    std::vector<CMatrix> Q;
    RVector q;

    int size() const { return static_cast<int>(Q.size()); }

    static PowerConstraintSet total(const Dimensions &dims, double limit);
    static PowerConstraintSet per_transmitter(const Dimensions &dims, const RVector &limits);
    static PowerConstraintSet per_antenna(const Dimensions &dims, const RVector &limits);

    /// Limits q_j when the set is exactly one identity block per transmitter.
    std::optional<RVector> per_transmitter_limits(const Dimensions &dims) const;
};

struct ConstraintViolation
{
    enum class Kind
    {
        dimension,
        not_psd,
        leaks_outside_data_block, // Q_l - D_k Q_l D_k is not diagonal
        singular_sum,             // sum_l Q_l is not positive definite
        nonpositive_limit,
    };
    Kind kind;
    int constraint = -1;
    int terminal = -1;
    std::string detail;
};

struct ValidationReport
{
    std::vector<ConstraintViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_power_constraints(const PowerConstraintSet &pcs, const SelectionMasks &masks);

/// Everything a strategy needs about one network snapshot.
struct Scenario
{
    Dimensions dims;
    ChannelSet channels;
    ClusterConfig clusters;
    SelectionMasks masks;
    PowerConstraintSet constraints;

    /// Validates clusters and constraints; throws InvalidArgument on any violation.
    static Scenario make(ChannelSet channels, ClusterConfig clusters, PowerConstraintSet constraints);

    Scenario with_channels(ChannelSet channels) const;
};

} // namespace multicell

#endif
