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

// Dense kernels shared by the model, the parametrization and the strategies.
// Everything here is templated on the Eigen expression type so that real and
// complex matrices go through the same code.

#ifndef MULTICELL_LINALG_HPP
#define MULTICELL_LINALG_HPP

#include "multicell/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace multicell
{

// Singular values below this fraction of the largest one are treated as zero.
inline constexpr double kPinvCutoff = 1e-12;

template <typename Derived>
using PlainMatrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Moore-Penrose inverse through the SVD, with a relative singular-value cutoff.
template <typename Derived>
PlainMatrix<Derived> pseudo_inverse(const Eigen::MatrixBase<Derived> &a, double rel_cutoff = kPinvCutoff)
{
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    PlainMatrix<Derived> out = PlainMatrix<Derived>::Zero(a.cols(), a.rows());
    if (a.size() == 0)
        return out;
    Eigen::JacobiSVD<PlainMatrix<Derived>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &s = svd.singularValues();
    const Real smax = s.size() ? s(0) : Real(0);
    if (smax <= Real(0))
        return out;
    const Real cut = Real(rel_cutoff) * smax;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut)
            out.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).adjoint();
    return out;
}

/// Moore-Penrose inverse of a Hermitian matrix. Eigenvalue magnitudes are the
/// singular values, so the cutoff rule is the same as in pseudo_inverse().
template <typename Derived>
PlainMatrix<Derived> hermitian_pseudo_inverse(const Eigen::MatrixBase<Derived> &a,
                                              double rel_cutoff = kPinvCutoff)
{
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    PlainMatrix<Derived> out = PlainMatrix<Derived>::Zero(a.rows(), a.cols());
    if (a.size() == 0)
        return out;
    Eigen::SelfAdjointEigenSolver<PlainMatrix<Derived>> es(a);
    const auto &ev = es.eigenvalues();
    const Real smax = ev.cwiseAbs().maxCoeff();
    if (smax <= Real(0))
        return out;
    const Real cut = Real(rel_cutoff) * smax;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) > cut)
            out.noalias() += (es.eigenvectors().col(i) / ev(i)) * es.eigenvectors().col(i).adjoint();
    return out;
}

/// Orthonormal basis of the column span of `a` (rank decided with the pinv cutoff).
template <typename Derived>
PlainMatrix<Derived> orthonormal_basis(const Eigen::MatrixBase<Derived> &a, double rel_cutoff = kPinvCutoff)
{
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (a.cols() == 0 || a.rows() == 0)
        return PlainMatrix<Derived>(a.rows(), 0);
    Eigen::JacobiSVD<PlainMatrix<Derived>> svd(a, Eigen::ComputeThinU);
    const auto &s = svd.singularValues();
    const Real cut = Real(rel_cutoff) * (s.size() ? s(0) : Real(0));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > cut && s(rank) > Real(0))
        ++rank;
    return svd.matrixU().leftCols(rank);
}

/// Projector onto the orthogonal complement of the column span of `a` (dimension `dim`).
template <typename Derived>
PlainMatrix<Derived> null_space_projector(const Eigen::MatrixBase<Derived> &a, Eigen::Index dim,
                                          double rel_cutoff = kPinvCutoff)
{
    PlainMatrix<Derived> p = PlainMatrix<Derived>::Identity(dim, dim);
    if (a.cols() == 0)
        return p;
    const PlainMatrix<Derived> basis = orthonormal_basis(a, rel_cutoff);
    p.noalias() -= basis * basis.adjoint();
    return p;
}

/// Extreme eigenvalues of a Hermitian matrix as (smallest, largest).
template <typename Derived>
std::pair<double, double> hermitian_eigen_range(const Eigen::MatrixBase<Derived> &a)
{
    if (a.size() == 0)
        return {0.0, 0.0};
    Eigen::SelfAdjointEigenSolver<PlainMatrix<Derived>> es(a, Eigen::EigenvaluesOnly);
    return {double(es.eigenvalues()(0)), double(es.eigenvalues()(es.eigenvalues().size() - 1))};
}

/// PSD within tolerance: smallest eigenvalue >= -rel_tol * largest |eigenvalue|.
template <typename Derived>
bool is_positive_semidefinite(const Eigen::MatrixBase<Derived> &a, double rel_tol = 1e-9)
{
    const auto [lo, hi] = hermitian_eigen_range(a);
    const double scale = std::max(std::abs(lo), std::abs(hi));
    return lo >= -rel_tol * scale;
}

/// Strictly positive definite: smallest eigenvalue > rel_tol * largest eigenvalue.
template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived> &a, double rel_tol = 1e-9)
{
    const auto [lo, hi] = hermitian_eigen_range(a);
    return hi > 0.0 && lo > rel_tol * hi;
}

/// Apply a 0/1 diagonal mask to a vector expression.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> masked(const Mask &mask,
                                                                   const Eigen::MatrixBase<Derived> &v)
{
    return mask.select(v.array(), typename Derived::Scalar(0)).matrix();
}

} // namespace multicell

#endif
