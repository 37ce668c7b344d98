// SPDX-License-Identifier: Apache-2.0
//
// onebit-mmse: MMSE channel estimation for one-bit quantized MIMO systems
// Copyright (C) 2026 The onebit-mmse authors
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

// Dense linear-algebra primitives: typed symmetric/Hermitian containers,
// Kronecker products, Cholesky with a bounded jitter policy, Cholesky-based
// inversion and covariance standardization.
//
// Layout convention: matrices are addressed (row, col). vec() stacks columns,
// so for B of size N_R x tau the entry B(i, t) lands at index t * N_R + i.

#pragma once

#include "onebit/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace onebit
{

using Index = Eigen::Index;
using cdouble = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Eigenvalues of a HermitianPSD may dip to -kPsdTolerance * trace.
inline constexpr double kPsdTolerance = 1e-10;

/// Off-diagonal correlations are clamped into [-1 + eps, 1 - eps].
inline constexpr double kCorrelationClamp = 1e-12;

/// Relative asymmetry accepted (and then removed) when wrapping a matrix.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Cholesky retries with delta * trace / dim added to the diagonal.
inline constexpr std::array<double, 3> kJitterSteps{1e-12, 1e-10, 1e-8};

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived> &m)
{
    return m.derived().allFinite();
}

inline double clamp_correlation(double psi)
{
    return std::clamp(psi, -1.0 + kCorrelationClamp, 1.0 - kCorrelationClamp);
}

namespace detail
{

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
double max_abs(const DenseMatrix<Scalar> &m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Copies the upper triangle onto the lower one so that symmetry is exact.
template <class Scalar>
DenseMatrix<Scalar> make_exactly_hermitian(DenseMatrix<Scalar> m)
{
    const Index n = m.rows();
    for (Index i = 0; i < n; ++i)
    {
        if constexpr (std::is_same_v<Scalar, cdouble>)
            m(i, i) = cdouble(m(i, i).real(), 0.0);
        for (Index k = i + 1; k < n; ++k)
        {
            const Scalar upper = (m(i, k) + Eigen::numext::conj(m(k, i))) / 2.0;
            m(i, k) = upper;
            m(k, i) = Eigen::numext::conj(upper);
        }
    }
    return m;
}

template <class Scalar>
void check_square_finite_hermitian(const DenseMatrix<Scalar> &m, double tol, const char *what)
{
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch,
            std::string(what) + " must be square, got " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()));
    require(all_finite(m), ErrorCode::NotFinite, std::string(what) + " has non-finite entries");
    const double scale = std::max(1.0, max_abs<Scalar>(m));
    const double asym = m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
    require(asym <= tol * scale, ErrorCode::NotSymmetric,
            std::string(what) + " is not symmetric/Hermitian (max deviation " + std::to_string(asym) + ")");
}

template <class Scalar>
DenseMatrix<Scalar> cholesky_with_jitter(const DenseMatrix<Scalar> &m)
{
    Eigen::LLT<DenseMatrix<Scalar>> llt(m);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    const Index n = m.rows();
    const double base = n == 0 ? 0.0 : std::abs(m.trace()) / static_cast<double>(n);
    for (double delta : kJitterSteps)
    {
        DenseMatrix<Scalar> jittered = m;
        jittered.diagonal().array() += Scalar(delta * base);
        llt.compute(jittered);
        if (llt.info() == Eigen::Success)
            return llt.matrixL();
    }
    fail(ErrorCode::NotPositiveDefinite,
         "Cholesky failed after jitter up to " + std::to_string(kJitterSteps.back()) + " * trace/dim");
}

template <class Scalar>
DenseMatrix<Scalar> inverse_from_cholesky(const DenseMatrix<Scalar> &m)
{
    const DenseMatrix<Scalar> lower = cholesky_with_jitter<Scalar>(m);
    const Index n = m.rows();
    DenseMatrix<Scalar> linv = lower.template triangularView<Eigen::Lower>().solve(
        DenseMatrix<Scalar>::Identity(n, n));
    return make_exactly_hermitian<Scalar>(linv.adjoint() * linv);
}

template <class Scalar>
DenseMatrix<Scalar> kron(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &b)
{
    constexpr Index max_index = std::numeric_limits<Index>::max();
    require(a.rows() == 0 || b.rows() <= max_index / std::max<Index>(a.rows(), 1), ErrorCode::DimensionOverflow,
            "kron row count overflows");
    require(a.cols() == 0 || b.cols() <= max_index / std::max<Index>(a.cols(), 1), ErrorCode::DimensionOverflow,
            "kron column count overflows");
    require(all_finite(a) && all_finite(b), ErrorCode::NotFinite, "kron input has non-finite entries");
    DenseMatrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

} // namespace detail

/// Hermitian matrix with eigenvalues >= -kPsdTolerance * trace.
/// The wrapped matrix is exactly Hermitian by construction.
class HermitianPSD
{
public:
    HermitianPSD() = default;

    explicit HermitianPSD(const ComplexMatrix &m, double symmetry_tol = kSymmetryTolerance)
    {
        detail::check_square_finite_hermitian<cdouble>(m, symmetry_tol, "HermitianPSD");
        m_ = detail::make_exactly_hermitian<cdouble>(m);
        if (m_.rows() > 0)
        {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m_, Eigen::EigenvaluesOnly);
            const double trace = m_.trace().real();
            require(eig.eigenvalues().minCoeff() >= -kPsdTolerance * std::max(trace, 1.0),
                    ErrorCode::NotPositiveDefinite, "HermitianPSD has a negative eigenvalue");
        }
    }

    static HermitianPSD identity(Index n) { return HermitianPSD(ComplexMatrix::Identity(n, n)); }

    const ComplexMatrix &matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    cdouble operator()(Index i, Index k) const { return m_(i, k); }

    bool is_real(double tol = 1e-12) const
    {
        return m_.size() == 0 || m_.imag().cwiseAbs().maxCoeff() <= tol * std::max(1.0, m_.cwiseAbs().maxCoeff());
    }

private:
    ComplexMatrix m_;
};

/// Real matrix with entries(i,k) == entries(k,i) exactly.
class RealSymmetric
{
public:
    RealSymmetric() = default;

    explicit RealSymmetric(const RealMatrix &m, double symmetry_tol = kSymmetryTolerance)
    {
        detail::check_square_finite_hermitian<double>(m, symmetry_tol, "RealSymmetric");
        m_ = detail::make_exactly_hermitian<double>(m);
    }

    static RealSymmetric identity(Index n) { return RealSymmetric(RealMatrix::Identity(n, n)); }

    const RealMatrix &matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double operator()(Index i, Index k) const { return m_(i, k); }

private:
    RealMatrix m_;
};

/// Standardized covariance: unit diagonal, off-diagonals clamped to
/// [-1 + kCorrelationClamp, 1 - kCorrelationClamp]. Obtain one through
/// standardize(); positive definiteness is checked where it matters
/// (Cholesky inside the orthant backends).
class Correlation
{
public:
    Correlation() = default;

    const RealMatrix &matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double operator()(Index i, Index k) const { return m_(i, k); }

    /// Principal submatrix over `keep` (ascending indices); stays a correlation.
    Correlation submatrix(const std::vector<Index> &keep) const
    {
        Correlation out;
        const Index n = static_cast<Index>(keep.size());
        out.m_.resize(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index k = 0; k < n; ++k)
                out.m_(i, k) = m_(keep[i], keep[k]);
        return out;
    }

    /// Conjugation by a +-1 diagonal: entries become s_i s_k psi_ik.
    Correlation sign_flipped(const RealVector &signs) const
    {
        require(signs.size() == dim(), ErrorCode::DimensionMismatch, "sign vector length mismatch");
        Correlation out = *this;
        for (Index i = 0; i < dim(); ++i)
            for (Index k = 0; k < dim(); ++k)
                if (i != k)
                    out.m_(i, k) = signs(i) * signs(k) * m_(i, k);
        return out;
    }

    RealSymmetric as_symmetric() const { return RealSymmetric(m_); }

private:
    friend Correlation standardize(const RealSymmetric &m);
    RealMatrix m_;
};

inline ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b)
{
    return detail::kron<cdouble>(a, b);
}

inline RealMatrix kron(const RealMatrix &a, const RealMatrix &b)
{
    return detail::kron<double>(a, b);
}

/// Lower-triangular L with L L^H = m (jitter policy kJitterSteps).
inline ComplexMatrix cholesky(const HermitianPSD &m)
{
    return detail::cholesky_with_jitter<cdouble>(m.matrix());
}

inline RealMatrix cholesky(const RealSymmetric &m)
{
    return detail::cholesky_with_jitter<double>(m.matrix());
}

inline RealMatrix cholesky(const Correlation &m)
{
    return detail::cholesky_with_jitter<double>(m.matrix());
}

inline HermitianPSD invert_hermitian(const HermitianPSD &m)
{
    return HermitianPSD(detail::inverse_from_cholesky<cdouble>(m.matrix()));
}

/// Inverse of a symmetric positive definite matrix, through Cholesky.
inline RealSymmetric invert_symmetric(const RealSymmetric &m)
{
    return RealSymmetric(detail::inverse_from_cholesky<double>(m.matrix()));
}

inline Correlation standardize(const RealSymmetric &m)
{
    const Index n = m.dim();
    RealVector inv_sd(n);
    for (Index i = 0; i < n; ++i)
    {
        require(m(i, i) > 0.0, ErrorCode::NonPositiveDiagonal,
                "diagonal entry " + std::to_string(i) + " is not positive");
        inv_sd(i) = 1.0 / std::sqrt(m(i, i));
    }
    Correlation out;
    out.m_.resize(n, n);
    for (Index i = 0; i < n; ++i)
    {
        out.m_(i, i) = 1.0;
        for (Index k = i + 1; k < n; ++k)
        {
            const double psi = clamp_correlation(m(i, k) * inv_sd(i) * inv_sd(k));
            out.m_(i, k) = psi;
            out.m_(k, i) = psi;
        }
    }
    return out;
}

inline Correlation standardize(const Correlation &c)
{
    return c;
}

/// The (dim-1)x(dim-1) principal submatrix without row/column k.
inline RealSymmetric delete_row_col(const RealSymmetric &m, Index k)
{
    const Index n = m.dim();
    require(n >= 2, ErrorCode::IndexOutOfRange, "delete_row_col needs dim >= 2");
    require(k >= 0 && k < n, ErrorCode::IndexOutOfRange,
            "delete_row_col index " + std::to_string(k) + " out of range for dim " + std::to_string(n));
    RealMatrix out(n - 1, n - 1);
    for (Index i = 0, oi = 0; i < n; ++i)
    {
        if (i == k)
            continue;
        for (Index j = 0, oj = 0; j < n; ++j)
        {
            if (j == k)
                continue;
            out(oi, oj++) = m(i, j);
        }
        ++oi;
    }
    return RealSymmetric(out, 0.0);
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix &m)
{
    ComplexVector out(m.size());
    for (Index c = 0; c < m.cols(); ++c)
        out.segment(c * m.rows(), m.rows()) = m.col(c);
    return out;
}

} // namespace onebit
