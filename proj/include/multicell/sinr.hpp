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

// Downlink and virtual-uplink SINR, terminal quality functions and system
// utilities.

#ifndef MULTICELL_SINR_HPP
#define MULTICELL_SINR_HPP

#include "multicell/dual_params.hpp"
#include "multicell/model.hpp"

#include <vector>

namespace multicell
{

/// Rank-one signal correlation S_kc = p_kc (D_k v_kc)(D_k v_kc)^H for every
/// (terminal, subcarrier) pair.
class Allocation
{
public:
    Allocation() = default;
    explicit Allocation(const Dimensions &dims);

    int num_rx() const { return static_cast<int>(p_.rows()); }
    int num_sc() const { return static_cast<int>(p_.cols()); }
    int length() const { return n_; }

    const CVector &direction(int k, int c) const { return v_[index(k, c)]; }
    double power(int k, int c) const { return p_(k, c); }
    const RMatrix &powers() const { return p_; }

    /// Stores a stream. The direction is normalized when p > 0; p = 0 clears it.
    void set(int k, int c, const CVector &v, double p);
    void set_power(int k, int c, double p);
    void clear(int k, int c) { set(k, c, CVector::Zero(n_), 0.0); }
    void scale_powers(double factor);

    /// p_kc (D_k v)(D_k v)^H.
    CMatrix correlation(int k, int c, const SelectionMasks &masks) const;

    /// Empty string when the invariants hold against the given masks.
    std::string check(const SelectionMasks &masks, double tol = 1e-9) const;

private:
    std::size_t index(int k, int c) const;

    int n_ = 0;
    std::vector<CVector> v_;
    RMatrix p_;
};

enum class SinrModel
{
    coherent,   // joint transmission with phase-aligned interference
    incoherent, // interference powers add per transmitter
};

double downlink_sinr(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks, int k,
                     int c);

/// General-rank variant: S[k] is the N x N signal correlation of terminal k on subcarrier c.
double downlink_sinr(const std::vector<CMatrix> &S, const ChannelSet &chans, const SelectionMasks &masks,
                     int k, int c);

double incoherent_sinr(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks, int k,
                       int c);

/// K_r x K_c matrix of SINR values under the given reception model.
RMatrix all_sinrs(const Allocation &alloc, const ChannelSet &chans, const SelectionMasks &masks,
                  SinrModel model = SinrModel::coherent);

/// sum_l omega_l Q_l + sum_{kb != k} lambda_kb (D_k C_kb h_kb)(D_k C_kb h_kb)^H.
CMatrix virtual_uplink_matrix(const DualParams &duals, const ChannelSet &chans, const SelectionMasks &masks,
                              const PowerConstraintSet &pcs, int k, int c);

double virtual_uplink_sinr(const CVector &wbar, const DualParams &duals, const ChannelSet &chans,
                           const SelectionMasks &masks, const PowerConstraintSet &pcs, int k, int c);

// ---------- quality functions ----------

enum class QualityKind
{
    rate,
    mse,
    chernoff_ser,
};

enum class Constellation
{
    pam,
    psk,
    qam,
};

struct QualityFunction
{
    QualityKind kind = QualityKind::rate;
    int order = 4; // M, only used by chernoff_ser
    Constellation family = Constellation::qam;

    static QualityFunction rate() { return {}; }
    static QualityFunction mse() { return {QualityKind::mse, 4, Constellation::qam}; }
    static QualityFunction chernoff_ser(int order, Constellation family)
    {
        return {QualityKind::chernoff_ser, order, family};
    }

    /// Exponent constant z of the Chernoff bound. Throws for M < 2.
    double z() const;
};

/// rate in bits: log2(1 + x); mse: -1/(1 + x); chernoff_ser: -((M-1)/M) exp(-x z).
double quality_value(const QualityFunction &qf, double sinr);

/// Derivative with the natural-log convention (rate: 1/(1 + x)).
double quality_derivative(const QualityFunction &qf, double sinr);

/// Inverse of quality_derivative. May be negative. Throws for y <= 0.
double quality_inv_derivative(const QualityFunction &qf, double y);

/// g_k = sum_c quality_value(sinr_kc).
RVector terminal_quality(const QualityFunction &qf, const RMatrix &sinrs);

enum class UtilityKind
{
    weighted_sum,
    weighted_max_min,
};

struct UtilityConfig
{
    UtilityKind kind = UtilityKind::weighted_sum;
    RVector weights;
};

/// sum_k mu_k g_k, or min over mu_k > 0 of g_k / mu_k.
double system_utility(const UtilityConfig &cfg, const RVector &per_terminal);

} // namespace multicell

#endif
