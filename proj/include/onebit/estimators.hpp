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

// Channel estimators for one-bit observations: the Bussgang linear MMSE
// (BLMMSE) estimator, the conditional-mean (MMSE) estimator in its general
// orthant-probability form, and exact fast paths for structured scenarios.

#pragma once

#include "onebit/channel_model.hpp"
#include "onebit/orthant.hpp"

#include <array>
#include <map>
#include <numbers>
#include <optional>
#include <string_view>

namespace onebit
{

enum class EstimatorKind
{
    Blmmse,
    MmseGeneral,
    MmseRealOmega,
    WhiteUnitary,
    TxCorrEvd,
    TwoRealPilots,
    QuarterPhase,
    Simo2,
    Simo3Closed,
    SimoEquicorr,
    SisoMultipilot
};

inline constexpr std::array<EstimatorKind, 11> kAllEstimators{
    EstimatorKind::Blmmse,        EstimatorKind::MmseGeneral,  EstimatorKind::MmseRealOmega,
    EstimatorKind::WhiteUnitary,  EstimatorKind::TxCorrEvd,    EstimatorKind::TwoRealPilots,
    EstimatorKind::QuarterPhase,  EstimatorKind::Simo2,        EstimatorKind::Simo3Closed,
    EstimatorKind::SimoEquicorr,  EstimatorKind::SisoMultipilot};

constexpr std::string_view to_string(EstimatorKind k)
{
    switch (k)
    {
    case EstimatorKind::Blmmse: return "Blmmse";
    case EstimatorKind::MmseGeneral: return "MmseGeneral";
    case EstimatorKind::MmseRealOmega: return "MmseRealOmega";
    case EstimatorKind::WhiteUnitary: return "WhiteUnitary";
    case EstimatorKind::TxCorrEvd: return "TxCorrEvd";
    case EstimatorKind::TwoRealPilots: return "TwoRealPilots";
    case EstimatorKind::QuarterPhase: return "QuarterPhase";
    case EstimatorKind::Simo2: return "Simo2";
    case EstimatorKind::Simo3Closed: return "Simo3Closed";
    case EstimatorKind::SimoEquicorr: return "SimoEquicorr";
    case EstimatorKind::SisoMultipilot: return "SisoMultipilot";
    }
    return "Unknown";
}

inline std::optional<EstimatorKind> estimator_from_string(std::string_view name)
{
    for (EstimatorKind k : kAllEstimators)
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

/// Linear-in-r estimators (everything else is nonlinear in general).
constexpr bool is_linear(EstimatorKind k)
{
    return k == EstimatorKind::Blmmse || k == EstimatorKind::WhiteUnitary || k == EstimatorKind::TxCorrEvd ||
           k == EstimatorKind::TwoRealPilots || k == EstimatorKind::QuarterPhase || k == EstimatorKind::Simo2;
}

struct ChannelEstimate
{
    ComplexVector h_hat;
    EstimatorKind estimator = EstimatorKind::Blmmse;
    double orthant_stderr_budget = 0.0; // largest per-entry standard error from sampling backends
};

struct OptimalityReport
{
    bool is_optimal = false;
    Index max_row_nnz = 0;
    double tolerance_used = 0.0;
};

// ---- second-order model -----------------------------------------------------

/// Everything that depends on (scenario, sigma2) but not on the observation.
struct LinearModel
{
    ScenarioConfig cfg;
    double sigma2 = 1.0;
    HermitianPSD sigma;
    ComplexMatrix s;         // tau x N_T
    ComplexMatrix a;         // S kron I_NR
    HermitianPSD omega;      // A Sigma A^H + sigma2 I
    HermitianPSD omega_inv;
    RealVector d_inv_sqrt;   // Diag(Omega_b)^-1/2
    ComplexMatrix sigma_ah;  // Sigma A^H

    Index n_tx() const noexcept { return cfg.n_tx; }
    Index n_rx() const noexcept { return cfg.n_rx; }
    Index tau() const noexcept { return cfg.tau; }
    Index n_obs() const noexcept { return cfg.tau * cfg.n_rx; }
};

inline LinearModel make_linear_model(const ScenarioConfig &cfg, double sigma2)
{
    require(std::isfinite(sigma2) && sigma2 > 0.0, ErrorCode::InvalidConfig, "sigma2 must be > 0");
    LinearModel m;
    m.cfg = cfg;
    m.cfg.sigma2 = sigma2;
    m.sigma2 = sigma2;
    m.sigma = build_sigma(m.cfg);
    m.s = build_pilots(m.cfg);
    m.a = pilot_operator(m.s, cfg.n_rx);
    m.omega = omega_b(m.sigma, m.a, sigma2);
    m.omega_inv = invert_hermitian(m.omega);
    m.d_inv_sqrt = m.omega.matrix().diagonal().real().cwiseSqrt().cwiseInverse();
    m.sigma_ah = m.sigma.matrix() * m.a.adjoint();
    return m;
}

inline LinearModel make_linear_model(const ScenarioConfig &cfg)
{
    return make_linear_model(cfg, cfg.sigma2);
}

// ---- BLMMSE -----------------------------------------------------------------

/// T = arcsin(Re K) + j arcsin(Im K), K the standardized Omega_b. The
/// diagonal is exactly pi/2; only off-diagonal arguments are clamped.
inline ComplexMatrix t_blm(const HermitianPSD &omega)
{
    const Index n = omega.dim();
    const RealVector d = omega.matrix().diagonal().real().cwiseSqrt().cwiseInverse();
    ComplexMatrix t(n, n);
    for (Index i = 0; i < n; ++i)
    {
        t(i, i) = cdouble(std::numbers::pi / 2.0, 0.0);
        for (Index k = i + 1; k < n; ++k)
        {
            const cdouble kik = omega(i, k) * d(i) * d(k);
            const cdouble v(std::asin(clamp_correlation(kik.real())), std::asin(clamp_correlation(kik.imag())));
            t(i, k) = v;
            t(k, i) = std::conj(v);
        }
    }
    return t;
}

inline ComplexMatrix t_blm_inverse(const HermitianPSD &omega)
{
    try
    {
        return detail::inverse_from_cholesky<cdouble>(t_blm(omega));
    }
    catch (const Error &e)
    {
        fail(ErrorCode::SingularTblm, std::string("arcsin matrix is not invertible: ") + e.what());
    }
}

/// W with h_BLM = W r, W = (sqrt(pi)/2) Sigma A^H D^-1/2 T^-1.
inline ComplexMatrix blmmse_matrix(const HermitianPSD &sigma, const ComplexMatrix &a, const HermitianPSD &omega)
{
    const RealVector d = omega.matrix().diagonal().real().cwiseSqrt().cwiseInverse();
    const ComplexMatrix g = (sigma.matrix() * a.adjoint()) * d.cast<cdouble>().asDiagonal();
    return (std::sqrt(std::numbers::pi) / 2.0) * g * t_blm_inverse(omega);
}

inline ComplexMatrix blmmse_matrix(const LinearModel &m)
{
    return blmmse_matrix(m.sigma, m.a, m.omega);
}

inline ChannelEstimate blmmse(const HermitianPSD &sigma, const ComplexMatrix &a, const HermitianPSD &omega,
                              const QuantizedObservation &r)
{
    require(r.size() == omega.dim(), ErrorCode::DimensionMismatch, "observation length does not match Omega_b");
    return {blmmse_matrix(sigma, a, omega) * r.complex(), EstimatorKind::Blmmse, 0.0};
}

inline ChannelEstimate blmmse(const LinearModel &m, const QuantizedObservation &r)
{
    return blmmse(m.sigma, m.a, m.omega, r);
}

/// Per-antenna MSE of the BLMMSE estimator.
inline double blmmse_mse_theoretical(const HermitianPSD &sigma, const ComplexMatrix &a, const HermitianPSD &omega)
{
    const RealVector d = omega.matrix().diagonal().real().cwiseSqrt().cwiseInverse();
    const ComplexMatrix g = (sigma.matrix() * a.adjoint()) * d.cast<cdouble>().asDiagonal();
    const ComplexMatrix tinv = t_blm_inverse(omega);
    const double explained = (g * tinv * g.adjoint()).trace().real();
    return (sigma.matrix().trace().real() - explained) / static_cast<double>(sigma.dim());
}

inline double blmmse_mse_theoretical(const LinearModel &m)
{
    return blmmse_mse_theoretical(m.sigma, m.a, m.omega);
}

// ---- general MMSE -----------------------------------------------------------

/// Conditional mean through the orthant-probability quotient on the
/// 2 tau N_R dimensional matrix C.
inline ChannelEstimate mmse_general(const HermitianPSD &sigma, const ComplexMatrix &a, const HermitianPSD &omega,
                                    const QuantizedObservation &r, const BackendPolicy &policy = {})
{
    const Index n = omega.dim();
    require(r.size() == n, ErrorCode::DimensionMismatch, "observation length does not match Omega_b");
    require(2 * n <= policy.max_general_dim, ErrorCode::BudgetExceeded,
            "general MMSE needs orthant probabilities of dimension " + std::to_string(2 * n) + " (budget " +
                std::to_string(policy.max_general_dim) + ")");
    const HermitianPSD omega_inv = invert_hermitian(omega);
    const RealSymmetric c = build_c_from_inverse(omega_inv, r);
    const TruncatedMean tm = truncated_mean_positive_orthant(c, policy);

    ComplexMatrix signs = ComplexMatrix::Zero(n, 2 * n);
    for (Index i = 0; i < n; ++i)
    {
        signs(i, i) = r.r_re(i);
        signs(i, n + i) = cdouble(0.0, r.r_im(i));
    }
    const ComplexMatrix f = sigma.matrix() * a.adjoint() * omega_inv.matrix() * signs;

    ChannelEstimate out{f * tm.mean.cast<cdouble>(), EstimatorKind::MmseGeneral, 0.0};
    if (tm.std_error.maxCoeff() > 0.0)
        out.orthant_stderr_budget =
            std::sqrt((f.cwiseAbs2() * tm.std_error.cwiseAbs2()).maxCoeff());
    return out;
}

inline ChannelEstimate mmse_general(const LinearModel &m, const QuantizedObservation &r,
                                    const BackendPolicy &policy = {})
{
    return mmse_general(m.sigma, m.a, m.omega, r, policy);
}

inline bool omega_is_real(const HermitianPSD &omega, double tol = 1e-12)
{
    return omega.is_real(tol);
}

namespace detail
{

struct HalfQuotient
{
    RealVector x;    // lambda_k v_k / P
    RealVector x_se; // standard error of x
};

// lambda .* [P(((L D L)_-k)^-1)]_k / P(L Omega L) for one sign vector.
inline HalfQuotient real_omega_half(const RealSymmetric &omega_r, const RealSymmetric &d_r, const RealVector &lambda,
                                    const BackendPolicy &policy, std::uint64_t stream)
{
    const Index n = omega_r.dim();
    const RealMatrix lam = lambda.asDiagonal();
    auto policy_for = [&](std::uint64_t call) {
        BackendPolicy p = policy;
        p.seed = derive_seed(derive_seed(policy.seed, stream), call);
        return p;
    };
    const OrthantResult p = orthant_p(RealSymmetric(lam * omega_r.matrix() * lam, 0.0), policy_for(0));
    require(p.value >= 1e-300, ErrorCode::DegenerateObservation, "orthant probability underflows");
    const RealSymmetric m(lam * d_r.matrix() * lam, 0.0);
    HalfQuotient h{RealVector(n), RealVector(n)};
    for (Index k = 0; k < n; ++k)
    {
        OrthantResult v{1.0, 0.0, OrthantBackend::Trivial};
        if (n > 1)
            v = orthant_p(invert_symmetric(delete_row_col(m, k)), policy_for(1 + static_cast<std::uint64_t>(k)));
        h.x(k) = lambda(k) * v.value / p.value;
        h.x_se(k) = std::hypot(v.std_error / p.value, h.x(k) * p.std_error / p.value);
    }
    return h;
}

} // namespace detail

/// MMSE for real Omega_b: C splits into two blocks and the quotient needs
/// orthant probabilities of dimension tau N_R only.
inline ChannelEstimate mmse_real_omega(const HermitianPSD &sigma, const ComplexMatrix &a, const HermitianPSD &omega,
                                       const QuantizedObservation &r, const BackendPolicy &policy = {})
{
    const Index n = omega.dim();
    require(r.size() == n, ErrorCode::DimensionMismatch, "observation length does not match Omega_b");
    require(omega_is_real(omega), ErrorCode::NotRealOmega, "Omega_b has a non-zero imaginary part");
    const RealSymmetric omega_r(omega.matrix().real(), 0.0);
    const RealSymmetric d_r = invert_symmetric(omega_r);

    const detail::HalfQuotient re = detail::real_omega_half(omega_r, d_r, r.r_re, policy, 1);
    const detail::HalfQuotient im = detail::real_omega_half(omega_r, d_r, r.r_im, policy, 2);

    const RealVector d = omega_r.matrix().diagonal().cwiseSqrt().cwiseInverse();
    const ComplexMatrix g =
        (sigma.matrix() * a.adjoint()) * d.cast<cdouble>().asDiagonal() / (2.0 * std::sqrt(std::numbers::pi));
    ComplexVector x(n);
    for (Index k = 0; k < n; ++k)
        x(k) = cdouble(re.x(k), im.x(k));

    ChannelEstimate out{g * x, EstimatorKind::MmseRealOmega, 0.0};
    const RealVector var = re.x_se.cwiseAbs2() + im.x_se.cwiseAbs2();
    if (var.maxCoeff() > 0.0)
        out.orthant_stderr_budget = std::sqrt((g.cwiseAbs2() * var).maxCoeff());
    return out;
}

inline ChannelEstimate mmse_real_omega(const LinearModel &m, const QuantizedObservation &r,
                                       const BackendPolicy &policy = {})
{
    return mmse_real_omega(m.sigma, m.a, m.omega, r, policy);
}

// ---- closed-form linear paths -----------------------------------------------

/// Sigma = I and S S^H = eta I: (S^H kron I) / sqrt(pi (eta + sigma2)).
inline ComplexMatrix white_unitary_matrix(const ComplexMatrix &s, double eta, double sigma2, Index n_rx)
{
    require(s.rows() == s.cols(), ErrorCode::PreconditionViolated, "unitary pilots need tau = n_tx");
    const double dev = (s * s.adjoint() - eta * ComplexMatrix::Identity(s.rows(), s.rows())).cwiseAbs().maxCoeff();
    require(dev <= 1e-10 * std::max(1.0, eta), ErrorCode::PreconditionViolated, "S S^H is not eta I");
    return pilot_operator(s.adjoint(), n_rx) / std::sqrt(std::numbers::pi * (eta + sigma2));
}

inline ChannelEstimate mmse_white_unitary(const ComplexMatrix &s, double eta, double sigma2, Index n_rx,
                                          const QuantizedObservation &r)
{
    return {white_unitary_matrix(s, eta, sigma2, n_rx) * r.complex(), EstimatorKind::WhiteUnitary, 0.0};
}

/// Sigma = Sigma_TX kron I with S = sqrt(eta) U^H:
/// (U Diag(xi sqrt(eta) / sqrt(eta xi + sigma2)) kron I) / sqrt(pi).
inline ComplexMatrix tx_corr_evd_matrix(const ComplexMatrix &sigma_tx, double eta, double sigma2, Index n_rx)
{
    require(eta > 0.0, ErrorCode::PreconditionViolated, "eta must be > 0");
    const TxEigen e = tx_eigen(sigma_tx);
    RealVector w(e.xi.size());
    for (Index i = 0; i < w.size(); ++i)
        w(i) = e.xi(i) * std::sqrt(eta) / std::sqrt(eta * e.xi(i) + sigma2);
    const ComplexMatrix core = e.u * w.cast<cdouble>().asDiagonal();
    return pilot_operator(core, n_rx) / std::sqrt(std::numbers::pi);
}

inline ChannelEstimate mmse_tx_corr_evd(const ComplexMatrix &sigma_tx, double eta, double sigma2, Index n_rx,
                                        const QuantizedObservation &r)
{
    return {tx_corr_evd_matrix(sigma_tx, eta, sigma2, n_rx) * r.complex(), EstimatorKind::TxCorrEvd, 0.0};
}

/// Per-antenna MSE for the EVD-matched case with standardized Sigma_TX.
inline double tx_corr_evd_mse(const ComplexMatrix &sigma_tx, double eta, double sigma2)
{
    const TxEigen e = tx_eigen(sigma_tx);
    double acc = 0.0;
    for (Index i = 0; i < e.xi.size(); ++i)
        acc += eta * e.xi(i) * e.xi(i) / (eta * e.xi(i) + sigma2);
    return 1.0 - 2.0 / (std::numbers::pi * static_cast<double>(e.xi.size())) * acc;
}

/// Sigma = I, tau = 2, real pilots s1, s2.
inline ComplexMatrix two_real_pilots_matrix(const RealVector &s1, const RealVector &s2, double sigma2, Index n_rx)
{
    require(s1.size() == s2.size() && s1.size() >= 1, ErrorCode::PreconditionViolated, "pilot vectors must match");
    const RealVector n1 = s1 / std::sqrt(s1.squaredNorm() + sigma2);
    const RealVector n2 = s2 / std::sqrt(s2.squaredNorm() + sigma2);
    const double a = std::asin(clamp_correlation(n1.dot(n2))) / (std::numbers::pi / 2.0);
    Eigen::Matrix2d m;
    m << 1.0, a, a, 1.0;
    RealMatrix sw(s1.size(), 2);
    sw.col(0) = n1;
    sw.col(1) = n2;
    const RealMatrix core = sw * m.inverse();
    return pilot_operator(core.cast<cdouble>(), n_rx) / std::sqrt(std::numbers::pi);
}

inline ChannelEstimate mmse_two_real_pilots(const RealVector &s1, const RealVector &s2, double sigma2, Index n_rx,
                                            const QuantizedObservation &r)
{
    return {two_real_pilots_matrix(s1, s2, sigma2, n_rx) * r.complex(), EstimatorKind::TwoRealPilots, 0.0};
}

/// Sigma = I, tau = 2, s2 = j (s2_norm / |s1|) s1; s2_norm <= 0 means |s1|.
inline ComplexMatrix quarter_phase_matrix(const ComplexVector &s1, double s2_norm, double sigma2, Index n_rx)
{
    const double l1 = s1.norm();
    require(l1 > 0.0, ErrorCode::PreconditionViolated, "s1 has zero energy");
    const double l2 = s2_norm > 0.0 ? s2_norm : l1;
    const ComplexVector s2 = cdouble(0.0, l2 / l1) * s1;
    const ComplexVector n1 = s1 / std::sqrt(l1 * l1 + sigma2);
    const ComplexVector n2 = s2 / std::sqrt(l2 * l2 + sigma2);
    const double a = std::asin(clamp_correlation(n1.norm() * n2.norm())) / (std::numbers::pi / 2.0);
    Eigen::Matrix2cd m;
    m << 1.0, cdouble(0.0, -a), cdouble(0.0, a), 1.0;
    ComplexMatrix sw(s1.size(), 2);
    sw.col(0) = n1.conjugate();
    sw.col(1) = n2.conjugate();
    return pilot_operator(sw * m.inverse(), n_rx) / std::sqrt(std::numbers::pi);
}

inline ChannelEstimate mmse_quarter_phase(const ComplexVector &s1, double s2_norm, double sigma2, Index n_rx,
                                          const QuantizedObservation &r)
{
    return {quarter_phase_matrix(s1, s2_norm, sigma2, n_rx) * r.complex(), EstimatorKind::QuarterPhase, 0.0};
}

/// SIMO, N_R = 2, real standardized Sigma with correlation rho12.
inline ComplexMatrix simo2_matrix(double rho12, cdouble s, double sigma2)
{
    const double e = std::norm(s);
    require(e > 0.0, ErrorCode::PreconditionViolated, "pilot symbol has zero energy");
    const double beta = rho12 * e / (e + sigma2);
    const double a = std::asin(clamp_correlation(beta)) / (std::numbers::pi / 2.0);
    Eigen::Matrix2d m, sig;
    m << 1.0, a, a, 1.0;
    sig << 1.0, rho12, rho12, 1.0;
    const RealMatrix core = sig * m.inverse();
    return std::conj(s) * core.cast<cdouble>() / std::sqrt(std::numbers::pi * (e + sigma2));
}

inline ChannelEstimate mmse_simo2(double rho12, cdouble s, double sigma2, const QuantizedObservation &r)
{
    require(r.size() == 2, ErrorCode::DimensionMismatch, "SIMO-2 needs two observations");
    return {simo2_matrix(rho12, s, sigma2) * r.complex(), EstimatorKind::Simo2, 0.0};
}

// ---- nonlinear closed/semi-closed paths -------------------------------------

/// SIMO, N_R = 3, real standardized Sigma: arcsin closed form.
inline ChannelEstimate mmse_simo3_closed(const RealMatrix &sigma3, cdouble s, double sigma2,
                                         const QuantizedObservation &r)
{
    require(sigma3.rows() == 3 && sigma3.cols() == 3, ErrorCode::PreconditionViolated, "Sigma must be 3x3");
    require(r.size() == 3, ErrorCode::DimensionMismatch, "SIMO-3 needs three observations");
    for (Index i = 0; i < 3; ++i)
        require(std::abs(sigma3(i, i) - 1.0) <= 1e-12, ErrorCode::PreconditionViolated, "Sigma must be standardized");
    const double e = std::norm(s);
    require(e > 0.0, ErrorCode::PreconditionViolated, "pilot symbol has zero energy");
    const double f = e / (e + sigma2);
    const double b12 = sigma3(0, 1) * f, b13 = sigma3(0, 2) * f, b23 = sigma3(1, 2) * f;
    constexpr double pi = std::numbers::pi;

    auto partial = [](double bjk, double bij, double bik) {
        return clamp_correlation((bjk - bij * bik) / (std::sqrt(1.0 - bij * bij) * std::sqrt(1.0 - bik * bik)));
    };
    const std::array<double, 3> as{std::asin(partial(b23, b12, b13)), std::asin(partial(b13, b12, b23)),
                                   std::asin(partial(b12, b13, b23))};

    auto part = [&](const RealVector &q) {
        const double prod = q(0) * q(1) * q(2);
        RealVector v(3);
        for (Index k = 0; k < 3; ++k)
            v(k) = q(k) / 4.0 + prod / (2.0 * pi) * as[static_cast<std::size_t>(k)];
        const double p = 0.125 + (q(0) * q(1) * std::asin(clamp_correlation(b12)) +
                                  q(0) * q(2) * std::asin(clamp_correlation(b13)) +
                                  q(1) * q(2) * std::asin(clamp_correlation(b23))) /
                                     (4.0 * pi);
        require(p >= 1e-300, ErrorCode::DegenerateObservation, "orthant probability underflows");
        return RealVector(v / p);
    };
    const RealVector xr = part(r.r_re), xi = part(r.r_im);
    ComplexVector x(3);
    for (Index k = 0; k < 3; ++k)
        x(k) = cdouble(xr(k), xi(k));
    const ComplexMatrix sig = sigma3.cast<cdouble>();
    return {std::conj(s) * sig * x / (2.0 * std::sqrt(pi * (e + sigma2))), EstimatorKind::Simo3Closed, 0.0};
}

/// Which denominator to use inside the deleted-vector Q-product integrals of
/// the equicorrelated SIMO estimator. Direct uses sqrt(|s|^2 + sigma2) and
/// reproduces the exact orthant probabilities; LoadingForm uses
/// sqrt(|s|^2 (1 + rho) + sigma2) and is kept for comparison only.
enum class EquicorrDenominator
{
    Direct,
    LoadingForm
};

/// SIMO, tau = N_T = 1, equicorrelated Sigma: 1-D Q-product integrals.
inline ChannelEstimate mmse_simo_equicorr(double rho, Index n_rx, cdouble s, double sigma2,
                                          const QuantizedObservation &r, const QuadratureSpec &quad = {},
                                          EquicorrDenominator denom = EquicorrDenominator::Direct)
{
    require(rho >= 0.0 && rho < 1.0, ErrorCode::PreconditionViolated, "rho must be in [0, 1)");
    require(n_rx >= 1 && r.size() == n_rx, ErrorCode::DimensionMismatch, "observation length must equal n_rx");
    const double e = std::norm(s);
    require(e > 0.0, ErrorCode::PreconditionViolated, "pilot symbol has zero energy");
    const double cp = std::sqrt(rho * e) / std::sqrt(e * (1.0 - rho) + sigma2);
    const double cv = std::sqrt(rho * e) /
                      std::sqrt(denom == EquicorrDenominator::Direct ? e + sigma2 : e * (1.0 + rho) + sigma2);

    auto part = [&](const RealVector &q) {
        QProductSpec pspec;
        for (Index k = 0; k < n_rx; ++k)
            pspec.coefficients.push_back(q(k) * cp);
        const double p = q_product_integral(pspec, quad);
        require(p >= 1e-300, ErrorCode::DegenerateObservation, "orthant probability underflows");
        // v_k only depends on the sign of the dropped entry
        std::map<double, double> cache;
        RealVector x(n_rx);
        for (Index k = 0; k < n_rx; ++k)
        {
            auto it = cache.find(q(k));
            if (it == cache.end())
            {
                QProductSpec vspec;
                for (Index i = 0; i < n_rx; ++i)
                    if (i != k)
                        vspec.coefficients.push_back(q(i) * cv);
                it = cache.emplace(q(k), q_product_integral(vspec, quad)).first;
            }
            x(k) = q(k) * it->second / p;
        }
        return x;
    };
    const RealVector xr = part(r.r_re), xi = part(r.r_im);
    ComplexVector x(n_rx);
    for (Index k = 0; k < n_rx; ++k)
        x(k) = cdouble(xr(k), xi(k));
    // Sigma x = (1 - rho) x + rho sum(x)
    const ComplexVector sx = (1.0 - rho) * x + ComplexVector::Constant(n_rx, rho * x.sum());
    return {std::conj(s) * sx / (2.0 * std::sqrt(std::numbers::pi * (e + sigma2))), EstimatorKind::SimoEquicorr, 0.0};
}

/// N_T = 1, spatially white, real pilot vector s of length tau. Entry (t, i)
/// of the observation (time t, antenna i) is r[t * n_rx + i]; each antenna
/// is estimated independently.
inline ChannelEstimate mmse_siso_multipilot(const RealVector &s, double sigma2, Index n_rx,
                                            const QuantizedObservation &r, const QuadratureSpec &quad = {})
{
    const Index tau = s.size();
    require(tau >= 1 && n_rx >= 1, ErrorCode::PreconditionViolated, "need tau >= 1 and n_rx >= 1");
    require(r.size() == tau * n_rx, ErrorCode::DimensionMismatch, "observation length must be tau * n_rx");
    require(sigma2 > 0.0, ErrorCode::PreconditionViolated, "sigma2 must be > 0");
    const double sigma = std::sqrt(sigma2);
    constexpr double pi = std::numbers::pi;

    auto part = [&](const RealVector &q) {
        QProductSpec pspec;
        for (Index t = 0; t < tau; ++t)
            pspec.coefficients.push_back(q(t) * s(t) / sigma);
        const double p = q_product_integral(pspec, quad);
        require(p >= 1e-300, ErrorCode::DegenerateObservation, "orthant probability underflows");
        // v_k depends on k only through (s_k^2, q_k s_k)
        std::map<std::pair<double, double>, double> cache;
        double acc = 0.0;
        for (Index k = 0; k < tau; ++k)
        {
            const double scale = std::sqrt(s(k) * s(k) + sigma2);
            const auto key = std::make_pair(s(k) * s(k), q(k) * s(k));
            auto it = cache.find(key);
            if (it == cache.end())
            {
                QProductSpec vspec;
                for (Index i = 0; i < tau; ++i)
                    if (i != k)
                        vspec.coefficients.push_back(q(i) * s(i) / scale);
                it = cache.emplace(key, q_product_integral(vspec, quad)).first;
            }
            acc += s(k) / scale * q(k) * it->second;
        }
        return acc / p;
    };

    ComplexVector h(n_rx);
    RealVector qr(tau), qi(tau);
    for (Index i = 0; i < n_rx; ++i)
    {
        for (Index t = 0; t < tau; ++t)
        {
            qr(t) = r.r_re(t * n_rx + i);
            qi(t) = r.r_im(t * n_rx + i);
        }
        h(i) = cdouble(part(qr), part(qi)) / (2.0 * std::sqrt(pi));
    }
    return {h, EstimatorKind::SisoMultipilot, 0.0};
}

// ---- optimality check -------------------------------------------------------

/// BLMMSE is optimal when every row of C has at most two entries above
/// tol * max|C| (the diagonal included).
inline OptimalityReport check_blmmse_optimality(const RealSymmetric &c, double tol = 1e-10)
{
    OptimalityReport rep;
    rep.tolerance_used = tol;
    const double scale = c.dim() == 0 ? 0.0 : c.matrix().cwiseAbs().maxCoeff();
    for (Index i = 0; i < c.dim(); ++i)
    {
        Index nnz = 0;
        for (Index k = 0; k < c.dim(); ++k)
            if (std::abs(c(i, k)) > tol * scale)
                ++nnz;
        rep.max_row_nnz = std::max(rep.max_row_nnz, nnz);
    }
    rep.is_optimal = rep.max_row_nnz <= 2;
    return rep;
}

// ---- applicability and dispatch ---------------------------------------------

namespace detail
{

inline bool near(const ComplexMatrix &a, const ComplexMatrix &b, double tol)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || (a - b).cwiseAbs().maxCoeff() <= tol * std::max(1.0, b.cwiseAbs().maxCoeff()));
}

inline bool sigma_is_identity(const LinearModel &m)
{
    return near(m.sigma.matrix(), ComplexMatrix::Identity(m.sigma.dim(), m.sigma.dim()), 1e-12);
}

inline bool is_real_matrix(const ComplexMatrix &a)
{
    return a.size() == 0 || a.imag().cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

inline bool simo_standardized_real(const LinearModel &m)
{
    if (m.n_tx() != 1 || m.tau() != 1 || !is_real_matrix(m.sigma.matrix()))
        return false;
    for (Index i = 0; i < m.sigma.dim(); ++i)
        if (std::abs(m.sigma(i, i).real() - 1.0) > 1e-12)
            return false;
    return std::norm(m.s(0, 0)) > 0.0;
}

inline std::optional<double> equicorr_rho(const LinearModel &m)
{
    if (!simo_standardized_real(m))
        return std::nullopt;
    const Index n = m.sigma.dim();
    const double rho = n > 1 ? m.sigma(0, 1).real() : 0.0;
    if (rho < 0.0 || rho >= 1.0)
        return std::nullopt;
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k)
            if (i != k && std::abs(m.sigma(i, k).real() - rho) > 1e-12)
                return std::nullopt;
    return rho;
}

inline double pilot_eta(const LinearModel &m)
{
    return (m.s * m.s.adjoint()).trace().real() / static_cast<double>(m.tau());
}

inline bool quarter_phase_structure(const LinearModel &m)
{
    if (m.tau() != 2 || !sigma_is_identity(m))
        return false;
    const double l1 = m.s.row(0).norm(), l2 = m.s.row(1).norm();
    if (l1 == 0.0 || l2 == 0.0)
        return false;
    const ComplexMatrix expect = cdouble(0.0, l2 / l1) * m.s.row(0);
    return near(m.s.row(1), expect, 1e-12);
}

} // namespace detail

inline bool is_applicable(EstimatorKind kind, const LinearModel &m, const BackendPolicy &policy = {})
{
    switch (kind)
    {
    case EstimatorKind::Blmmse: return true;
    case EstimatorKind::MmseGeneral: return 2 * m.n_obs() <= policy.max_general_dim;
    case EstimatorKind::MmseRealOmega: return omega_is_real(m.omega);
    case EstimatorKind::WhiteUnitary:
        return detail::sigma_is_identity(m) && m.tau() == m.n_tx() &&
               detail::near(m.s * m.s.adjoint(),
                            detail::pilot_eta(m) * ComplexMatrix::Identity(m.tau(), m.tau()), 1e-10);
    case EstimatorKind::TxCorrEvd:
        return std::holds_alternative<PilotEvdMatched>(m.cfg.pilots) && tx_covariance(m.cfg).has_value();
    case EstimatorKind::TwoRealPilots:
        return m.tau() == 2 && detail::sigma_is_identity(m) && detail::is_real_matrix(m.s);
    case EstimatorKind::QuarterPhase: return detail::quarter_phase_structure(m);
    case EstimatorKind::Simo2: return m.n_rx() == 2 && detail::simo_standardized_real(m);
    case EstimatorKind::Simo3Closed: return m.n_rx() == 3 && detail::simo_standardized_real(m);
    case EstimatorKind::SimoEquicorr: return detail::equicorr_rho(m).has_value();
    case EstimatorKind::SisoMultipilot:
        return m.n_tx() == 1 && detail::sigma_is_identity(m) && detail::is_real_matrix(m.s);
    }
    return false;
}

/// Matrix W with estimate = W r for the linear estimators.
inline ComplexMatrix linear_estimator_matrix(EstimatorKind kind, const LinearModel &m)
{
    require(is_linear(kind), ErrorCode::UnsupportedCombination,
            std::string(to_string(kind)) + " is not a linear estimator");
    require(is_applicable(kind, m), ErrorCode::PreconditionViolated,
            std::string(to_string(kind)) + " does not apply to scenario " + m.cfg.id);
    switch (kind)
    {
    case EstimatorKind::WhiteUnitary: return white_unitary_matrix(m.s, detail::pilot_eta(m), m.sigma2, m.n_rx());
    case EstimatorKind::TxCorrEvd:
        return tx_corr_evd_matrix(*tx_covariance(m.cfg), std::get<PilotEvdMatched>(m.cfg.pilots).eta, m.sigma2,
                                  m.n_rx());
    case EstimatorKind::TwoRealPilots:
        return two_real_pilots_matrix(m.s.row(0).real().transpose(), m.s.row(1).real().transpose(), m.sigma2,
                                      m.n_rx());
    case EstimatorKind::QuarterPhase:
        return quarter_phase_matrix(m.s.row(0).transpose(), m.s.row(1).norm(), m.sigma2, m.n_rx());
    case EstimatorKind::Simo2: return simo2_matrix(m.sigma(0, 1).real(), m.s(0, 0), m.sigma2);
    default: return blmmse_matrix(m);
    }
}

inline ChannelEstimate estimate(EstimatorKind kind, const LinearModel &m, const QuantizedObservation &r,
                                const BackendPolicy &policy = {},
                                EquicorrDenominator denom = EquicorrDenominator::Direct)
{
    require(r.size() == m.n_obs(), ErrorCode::DimensionMismatch,
            "observation length " + std::to_string(r.size()) + " does not match tau * n_rx = " +
                std::to_string(m.n_obs()));
    if (kind != EstimatorKind::MmseGeneral)
        require(is_applicable(kind, m, policy), ErrorCode::PreconditionViolated,
                std::string(to_string(kind)) + " does not apply to scenario " + m.cfg.id);
    switch (kind)
    {
    case EstimatorKind::Blmmse: return blmmse(m, r);
    case EstimatorKind::MmseGeneral: return mmse_general(m, r, policy);
    case EstimatorKind::MmseRealOmega: return mmse_real_omega(m, r, policy);
    case EstimatorKind::Simo3Closed: return mmse_simo3_closed(m.sigma.matrix().real(), m.s(0, 0), m.sigma2, r);
    case EstimatorKind::SimoEquicorr:
        return mmse_simo_equicorr(*detail::equicorr_rho(m), m.n_rx(), m.s(0, 0), m.sigma2, r, policy.quad, denom);
    case EstimatorKind::SisoMultipilot:
        return mmse_siso_multipilot(m.s.col(0).real(), m.sigma2, m.n_rx(), r, policy.quad);
    default: return {linear_estimator_matrix(kind, m) * r.complex(), kind, 0.0};
    }
}

/// Cheapest exact MMSE path for the scenario: closed forms, then 1-D
/// integrals, then the real-Omega form, then the general form.
inline EstimatorKind select_estimator(const LinearModel &m, const BackendPolicy &policy = {})
{
    constexpr std::array<EstimatorKind, 8> order{
        EstimatorKind::WhiteUnitary, EstimatorKind::TxCorrEvd,    EstimatorKind::TwoRealPilots,
        EstimatorKind::QuarterPhase, EstimatorKind::Simo2,        EstimatorKind::Simo3Closed,
        EstimatorKind::SimoEquicorr, EstimatorKind::SisoMultipilot};
    for (EstimatorKind k : order)
        if (is_applicable(k, m, policy))
            return k;
    if (omega_is_real(m.omega) && m.n_obs() <= policy.max_general_dim)
        return EstimatorKind::MmseRealOmega;
    return EstimatorKind::MmseGeneral;
}

inline ChannelEstimate dispatch(const LinearModel &m, const QuantizedObservation &r, const BackendPolicy &policy = {})
{
    return estimate(select_estimator(m, policy), m, r, policy);
}

inline ChannelEstimate dispatch(const ScenarioConfig &cfg, const QuantizedObservation &r,
                                const BackendPolicy &policy = {})
{
    return dispatch(make_linear_model(cfg), r, policy);
}

} // namespace onebit
