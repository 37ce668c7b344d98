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

// Scenario description, channel/noise sampling, one-bit quantization and the
// second-order matrices of the received vector.
//
// Signal model: B = H S^T + N with H (N_R x N_T), S (tau x N_T) and
// b = vec(B) = (S kron I_NR) h + n, h = vec(H). Entry (i, t) of B sits at
// index t * N_R + i of b; entry (i, j) of H sits at index j * N_R + i of h.

#pragma once

#include "onebit/numerics.hpp"
#include "onebit/rng.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

namespace onebit
{

// ---- covariance variants ----------------------------------------------------

struct CovIdentity
{
};

/// Sigma = Sigma_TX kron I_NR.
struct CovKroneckerTx
{
    ComplexMatrix sigma_tx;
};

/// Receive correlation [Sigma_RX]_ik = rho^|i-k|, Sigma = I_NT kron Sigma_RX.
struct CovExponentialRx
{
    double rho = 0.0;
};

/// Transmit correlation [Sigma_TX]_ik = rho^|i-k|, Sigma = Sigma_TX kron I_NR.
struct CovExponentialTx
{
    double rho = 0.0;
};

/// Unit diagonal, every receive pair correlated by rho.
struct CovEquicorrelatedRx
{
    double rho = 0.0;
};

struct CovExplicit
{
    ComplexMatrix sigma;
};

using CovarianceSpec =
    std::variant<CovIdentity, CovKroneckerTx, CovExponentialRx, CovExponentialTx, CovEquicorrelatedRx, CovExplicit>;

// ---- pilot variants ---------------------------------------------------------

struct PilotSingleSymbol
{
    cdouble s{1.0, 0.0};
};

/// sqrt(eta) times the unitary DFT matrix; tau = N_T.
struct PilotUnitaryScaled
{
    double eta = 1.0;
};

/// S = sqrt(eta) U^H with Sigma_TX = U Xi U^H.
struct PilotEvdMatched
{
    double eta = 1.0;
};

/// S^T = [s1 s2], tau = 2.
struct PilotTwoRealVectors
{
    RealVector s1;
    RealVector s2;
};

/// S^T = [s1 s2] with s2 = j (s2_norm / |s1|) s1; s2_norm <= 0 means |s1|.
struct PilotQuarterPhasePair
{
    ComplexVector s1;
    double s2_norm = 0.0;
};

/// Column `column` (0-based) of the Sylvester Hadamard matrix of order tau,
/// scaled by `amplitude`; N_T = 1.
struct PilotHadamardColumn
{
    Index column = 1;
    double amplitude = 1.0;
};

struct PilotExplicit
{
    ComplexMatrix s;
};

using PilotSpec = std::variant<PilotSingleSymbol, PilotUnitaryScaled, PilotEvdMatched, PilotTwoRealVectors,
                               PilotQuarterPhasePair, PilotHadamardColumn, PilotExplicit>;

struct ScenarioConfig
{
    std::string id = "scenario";
    Index n_tx = 1;
    Index n_rx = 1;
    Index tau = 1;
    double sigma2 = 1.0;
    CovarianceSpec covariance = CovIdentity{};
    PilotSpec pilots = PilotSingleSymbol{};
    std::uint64_t seed = 1;
};

inline void validate(const ScenarioConfig &cfg)
{
    require(cfg.n_tx >= 1 && cfg.n_rx >= 1 && cfg.tau >= 1, ErrorCode::InvalidConfig,
            "n_tx, n_rx and tau must all be >= 1");
    require(std::isfinite(cfg.sigma2) && cfg.sigma2 > 0.0, ErrorCode::InvalidConfig, "sigma2 must be > 0");
}

// ---- covariance -------------------------------------------------------------

inline RealMatrix exponential_correlation(Index n, double rho)
{
    require(rho >= 0.0 && rho < 1.0, ErrorCode::InvalidConfig, "exponential correlation needs rho in [0, 1)");
    RealMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k)
            m(i, k) = std::pow(rho, static_cast<double>(std::abs(i - k)));
    return m;
}

inline RealMatrix equicorrelation(Index n, double rho)
{
    require(rho >= 0.0 && rho < 1.0, ErrorCode::InvalidConfig, "equicorrelation needs rho in [0, 1)");
    RealMatrix m = RealMatrix::Constant(n, n, rho);
    m.diagonal().setOnes();
    return m;
}

inline ComplexMatrix to_complex(const RealMatrix &m)
{
    return m.cast<cdouble>();
}

/// Sigma_TX when the covariance has the form Sigma_TX kron I_NR.
inline std::optional<ComplexMatrix> tx_covariance(const ScenarioConfig &cfg)
{
    if (std::holds_alternative<CovIdentity>(cfg.covariance))
        return ComplexMatrix::Identity(cfg.n_tx, cfg.n_tx);
    if (const auto *k = std::get_if<CovKroneckerTx>(&cfg.covariance))
        return k->sigma_tx;
    if (const auto *e = std::get_if<CovExponentialTx>(&cfg.covariance))
        return to_complex(exponential_correlation(cfg.n_tx, e->rho));
    return std::nullopt;
}

inline HermitianPSD build_sigma(const ScenarioConfig &cfg)
{
    validate(cfg);
    const Index nt = cfg.n_tx, nr = cfg.n_rx;
    const ComplexMatrix eye_rx = ComplexMatrix::Identity(nr, nr);
    const ComplexMatrix eye_tx = ComplexMatrix::Identity(nt, nt);
    return std::visit(
        [&](const auto &spec) -> HermitianPSD {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, CovIdentity>)
                return HermitianPSD::identity(nt * nr);
            else if constexpr (std::is_same_v<T, CovKroneckerTx>)
            {
                require(spec.sigma_tx.rows() == nt && spec.sigma_tx.cols() == nt, ErrorCode::DimensionMismatch,
                        "Sigma_TX must be n_tx x n_tx");
                return HermitianPSD(kron(HermitianPSD(spec.sigma_tx).matrix(), eye_rx));
            }
            else if constexpr (std::is_same_v<T, CovExponentialRx>)
                return HermitianPSD(kron(eye_tx, to_complex(exponential_correlation(nr, spec.rho))));
            else if constexpr (std::is_same_v<T, CovExponentialTx>)
                return HermitianPSD(kron(to_complex(exponential_correlation(nt, spec.rho)), eye_rx));
            else if constexpr (std::is_same_v<T, CovEquicorrelatedRx>)
                return HermitianPSD(kron(eye_tx, to_complex(equicorrelation(nr, spec.rho))));
            else
            {
                require(spec.sigma.rows() == nt * nr && spec.sigma.cols() == nt * nr, ErrorCode::DimensionMismatch,
                        "explicit Sigma must be (n_tx*n_rx) square");
                return HermitianPSD(spec.sigma);
            }
        },
        cfg.covariance);
}

// ---- pilots -----------------------------------------------------------------

inline ComplexMatrix unitary_dft(Index n)
{
    ComplexMatrix f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index t = 0; t < n; ++t)
        for (Index k = 0; k < n; ++k)
            f(t, k) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(t * k) / static_cast<double>(n));
    return f;
}

inline RealMatrix sylvester_hadamard(Index n)
{
    require(n >= 1 && (n & (n - 1)) == 0, ErrorCode::UnsupportedCombination,
            "Hadamard order must be a power of two, got " + std::to_string(n));
    RealMatrix h = RealMatrix::Ones(1, 1);
    while (h.rows() < n)
    {
        const Index m = h.rows();
        RealMatrix next(2 * m, 2 * m);
        next << h, h, h, -h;
        h = std::move(next);
    }
    return h;
}

/// Eigen-decomposition Sigma_TX = U diag(xi) U^H used by the EVD-matched
/// pilots and the matching closed-form estimator.
struct TxEigen
{
    ComplexMatrix u;
    RealVector xi;
};

inline TxEigen tx_eigen(const ComplexMatrix &sigma_tx)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(HermitianPSD(sigma_tx).matrix());
    require(eig.info() == Eigen::Success, ErrorCode::NotPositiveDefinite, "eigendecomposition of Sigma_TX failed");
    return {eig.eigenvectors(), eig.eigenvalues().cwiseMax(0.0)};
}

inline ComplexMatrix build_pilots(const ScenarioConfig &cfg)
{
    validate(cfg);
    const Index nt = cfg.n_tx, tau = cfg.tau;
    auto need = [](bool ok, const std::string &what) { require(ok, ErrorCode::UnsupportedCombination, what); };
    ComplexMatrix s = std::visit(
        [&](const auto &spec) -> ComplexMatrix {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, PilotSingleSymbol>)
            {
                need(tau == 1 && nt == 1, "single-symbol pilots need tau = n_tx = 1");
                return ComplexMatrix::Constant(1, 1, spec.s);
            }
            else if constexpr (std::is_same_v<T, PilotUnitaryScaled>)
            {
                need(tau == nt, "unitary pilots need tau = n_tx");
                require(spec.eta > 0.0, ErrorCode::InvalidConfig, "eta must be > 0");
                ComplexMatrix out = std::sqrt(spec.eta) * unitary_dft(nt);
                const double dev = (out * out.adjoint() - spec.eta * ComplexMatrix::Identity(nt, nt)).cwiseAbs().maxCoeff();
                require(dev <= 1e-12 * std::max(1.0, spec.eta), ErrorCode::PreconditionViolated,
                        "unitary pilot construction lost orthogonality");
                return out;
            }
            else if constexpr (std::is_same_v<T, PilotEvdMatched>)
            {
                need(tau == nt, "EVD-matched pilots need tau = n_tx");
                const auto sigma_tx = tx_covariance(cfg);
                need(sigma_tx.has_value(), "EVD-matched pilots need a transmit-Kronecker covariance");
                require(spec.eta > 0.0, ErrorCode::InvalidConfig, "eta must be > 0");
                return std::sqrt(spec.eta) * tx_eigen(*sigma_tx).u.adjoint();
            }
            else if constexpr (std::is_same_v<T, PilotTwoRealVectors>)
            {
                need(tau == 2, "two-real-vector pilots need tau = 2");
                need(spec.s1.size() == nt && spec.s2.size() == nt, "pilot vectors must have length n_tx");
                ComplexMatrix out(2, nt);
                out.row(0) = spec.s1.transpose().template cast<cdouble>();
                out.row(1) = spec.s2.transpose().template cast<cdouble>();
                return out;
            }
            else if constexpr (std::is_same_v<T, PilotQuarterPhasePair>)
            {
                need(tau == 2, "quarter-phase pilots need tau = 2");
                need(spec.s1.size() == nt, "pilot vector must have length n_tx");
                const double n1 = spec.s1.norm();
                require(n1 > 0.0, ErrorCode::ZeroPilotEnergy, "s1 has zero energy");
                const double n2 = spec.s2_norm > 0.0 ? spec.s2_norm : n1;
                ComplexMatrix out(2, nt);
                out.row(0) = spec.s1.transpose();
                out.row(1) = (cdouble(0.0, n2 / n1) * spec.s1).transpose();
                return out;
            }
            else if constexpr (std::is_same_v<T, PilotHadamardColumn>)
            {
                need(nt == 1, "Hadamard-column pilots need n_tx = 1");
                need(spec.column >= 0 && spec.column < tau, "Hadamard column index out of range");
                const RealMatrix h = sylvester_hadamard(tau);
                return ComplexMatrix((spec.amplitude * h.col(spec.column)).template cast<cdouble>());
            }
            else
            {
                need(spec.s.rows() == tau && spec.s.cols() == nt, "explicit pilots must be tau x n_tx");
                return spec.s;
            }
        },
        cfg.pilots);
    require(all_finite(s), ErrorCode::NotFinite, "pilot matrix has non-finite entries");
    return s;
}

/// A = S kron I_NR.
inline ComplexMatrix pilot_operator(const ComplexMatrix &s, Index n_rx)
{
    return kron(s, ComplexMatrix(ComplexMatrix::Identity(n_rx, n_rx)));
}

// ---- sampling ---------------------------------------------------------------

/// h = L w with L L^H = Sigma (L passed in so it can be reused across draws).
inline ComplexVector sample_channel_from_factor(const ComplexMatrix &lower, Rng &rng)
{
    return lower * standard_cn(lower.rows(), rng);
}

inline ComplexVector sample_channel(const HermitianPSD &sigma, Rng &rng)
{
    return sample_channel_from_factor(cholesky(sigma), rng);
}

/// vec(H S^T) for h = vec(H).
inline ComplexVector apply_pilots(const ComplexVector &h, const ComplexMatrix &s, Index n_rx)
{
    const Index nt = s.cols();
    require(h.size() == nt * n_rx, ErrorCode::DimensionMismatch, "channel length does not match n_tx * n_rx");
    const Eigen::Map<const ComplexMatrix> hm(h.data(), n_rx, nt);
    const ComplexMatrix b = hm * s.transpose();
    return Eigen::Map<const ComplexVector>(b.data(), b.size());
}

/// b = (S kron I) h + sqrt(sigma2) w for a given unit-variance noise draw w.
inline ComplexVector observe_with_noise(const ComplexVector &h, const ComplexMatrix &s, Index n_rx, double sigma2,
                                        const ComplexVector &unit_noise)
{
    require(sigma2 >= 0.0, ErrorCode::InvalidConfig, "sigma2 must be >= 0");
    ComplexVector b = apply_pilots(h, s, n_rx);
    require(unit_noise.size() == b.size(), ErrorCode::DimensionMismatch, "noise length mismatch");
    if (sigma2 > 0.0)
        b += std::sqrt(sigma2) * unit_noise;
    return b;
}

/// sigma2 = 0 gives the noiseless observation.
inline ComplexVector observe(const ComplexVector &h, const ComplexMatrix &s, Index n_rx, double sigma2, Rng &rng)
{
    const ComplexVector w = standard_cn(s.rows() * n_rx, rng);
    return observe_with_noise(h, s, n_rx, sigma2, w);
}

// ---- quantization -----------------------------------------------------------

/// Signs of the real and imaginary parts, each entry exactly +1 or -1.
struct QuantizedObservation
{
    RealVector r_re;
    RealVector r_im;

    Index size() const noexcept { return r_re.size(); }

    ComplexVector complex() const
    {
        ComplexVector r(r_re.size());
        for (Index i = 0; i < r.size(); ++i)
            r(i) = cdouble(r_re(i), r_im(i));
        return r;
    }

    QuantizedObservation negated() const { return {-r_re, -r_im}; }

    /// Accepts only entries +-1 +- j; reports the first offending index.
    static QuantizedObservation from_complex(const ComplexVector &r)
    {
        QuantizedObservation q{RealVector(r.size()), RealVector(r.size())};
        for (Index i = 0; i < r.size(); ++i)
        {
            const double re = r(i).real(), im = r(i).imag();
            require((re == 1.0 || re == -1.0) && (im == 1.0 || im == -1.0), ErrorCode::InvalidObservation,
                    "observation entry " + std::to_string(i) + " is not +-1 +- j");
            q.r_re(i) = re;
            q.r_im(i) = im;
        }
        return q;
    }
};

/// sgn(0) is taken as +1.
inline QuantizedObservation quantize_one_bit(const ComplexVector &b)
{
    require(all_finite(b), ErrorCode::NotFinite, "cannot quantize non-finite samples");
    QuantizedObservation q{RealVector(b.size()), RealVector(b.size())};
    for (Index i = 0; i < b.size(); ++i)
    {
        q.r_re(i) = b(i).real() >= 0.0 ? 1.0 : -1.0;
        q.r_im(i) = b(i).imag() >= 0.0 ? 1.0 : -1.0;
    }
    return q;
}

// ---- second-order matrices --------------------------------------------------

/// Omega_b = A Sigma A^H + sigma2 I.
inline HermitianPSD omega_b(const HermitianPSD &sigma, const ComplexMatrix &a, double sigma2)
{
    require(a.cols() == sigma.dim(), ErrorCode::DimensionMismatch, "A and Sigma dimensions differ");
    require(sigma2 >= 0.0, ErrorCode::InvalidConfig, "sigma2 must be >= 0");
    ComplexMatrix om = a * sigma.matrix() * a.adjoint();
    om.diagonal().array() += sigma2;
    return HermitianPSD(om);
}

/// C = [[L_R D_R L_R, L_R D_I^T L_I], [L_I D_I L_R, L_I D_R L_I]] from a
/// precomputed D = Omega_b^-1.
inline RealSymmetric build_c_from_inverse(const HermitianPSD &omega_inv, const QuantizedObservation &r)
{
    const Index n = omega_inv.dim();
    require(r.size() == n, ErrorCode::DimensionMismatch, "observation length does not match Omega_b");
    const RealMatrix dr = omega_inv.matrix().real();
    const RealMatrix di = omega_inv.matrix().imag();
    RealMatrix c(2 * n, 2 * n);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k)
        {
            c(i, k) = r.r_re(i) * dr(i, k) * r.r_re(k);
            c(n + i, n + k) = r.r_im(i) * dr(i, k) * r.r_im(k);
            c(n + i, k) = r.r_im(i) * di(i, k) * r.r_re(k);
            c(i, n + k) = r.r_re(i) * di(k, i) * r.r_im(k);
        }
    return RealSymmetric(c);
}

inline RealSymmetric build_c(const HermitianPSD &omega, const QuantizedObservation &r)
{
    return build_c_from_inverse(invert_hermitian(omega), r);
}

} // namespace onebit
