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

// Positive-orthant probability P(Psi) = Pr(x > 0), x ~ N(0, Psi), and the
// positive-orthant truncated mean built on it.

#pragma once

#include "onebit/numerics.hpp"
#include "onebit/quadrature.hpp"
#include "onebit/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace onebit
{

enum class OrthantBackend
{
    Trivial,      // L = 1
    Diagonal,     // independent coordinates, 2^-L
    BlockProduct, // product over independent blocks
    Closed2,
    Closed3,
    Childs4,
    EquicorrQ,
    GenzMC
};

constexpr std::string_view to_string(OrthantBackend b)
{
    switch (b)
    {
    case OrthantBackend::Trivial: return "Trivial";
    case OrthantBackend::Diagonal: return "Diagonal";
    case OrthantBackend::BlockProduct: return "BlockProduct";
    case OrthantBackend::Closed2: return "Closed2";
    case OrthantBackend::Closed3: return "Closed3";
    case OrthantBackend::Childs4: return "Childs4";
    case OrthantBackend::EquicorrQ: return "EquicorrQ";
    case OrthantBackend::GenzMC: return "GenzMC";
    }
    return "Unknown";
}

/// Auto picks the cheapest exact backend. Closed allows L <= 3 blocks, Childs
/// adds L = 4, Equicorr requires one-factor blocks, Genz always samples.
enum class BackendChoice
{
    Auto,
    Closed,
    Childs,
    Genz,
    Equicorr
};

struct BackendPolicy
{
    BackendChoice choice = BackendChoice::Auto;
    std::size_t genz_points = 8192; // lattice points per shift
    std::size_t genz_shifts = 12;
    std::uint64_t seed = 20240601;
    QuadratureSpec quad{};
    Index max_general_dim = 16; // largest orthant dimension the general MMSE path accepts
};

struct OrthantResult
{
    double value = 0.0;
    double std_error = 0.0; // 0 for deterministic backends
    OrthantBackend backend = OrthantBackend::Trivial;
};

/// Entries with magnitude at or below this are treated as exact zeros when
/// splitting a correlation matrix into independent blocks.
inline constexpr double kBlockZero = 1e-13;

inline double orthant_closed2(double psi12)
{
    return 0.25 + std::asin(clamp_correlation(psi12)) / (2.0 * std::numbers::pi);
}

inline double orthant_closed3(double psi12, double psi13, double psi23)
{
    const double det = 1.0 - psi12 * psi12 - psi13 * psi13 - psi23 * psi23 + 2.0 * psi12 * psi13 * psi23;
    require(det > 0.0, ErrorCode::NotPositiveDefinite, "3x3 correlation is not positive definite");
    return 0.125 + (std::asin(clamp_correlation(psi12)) + std::asin(clamp_correlation(psi13)) +
                    std::asin(clamp_correlation(psi23))) /
                       (4.0 * std::numbers::pi);
}

/// Four-dimensional orthant probability: arcsin terms plus three 1-D integrals.
inline double orthant_childs4(const Correlation &psi, const QuadratureSpec &quad = {})
{
    require(psi.dim() == 4, ErrorCode::DimensionMismatch, "orthant_childs4 needs a 4x4 correlation");
    Eigen::LLT<RealMatrix> llt(psi.matrix());
    require(llt.info() == Eigen::Success, ErrorCode::NotPositiveDefinite, "4x4 correlation is not positive definite");

    // 1-based names to keep the coefficient table readable
    const double p12 = psi(0, 1), p13 = psi(0, 2), p14 = psi(0, 3);
    const double p23 = psi(1, 2), p24 = psi(1, 3), p34 = psi(2, 3);

    const double d23a = p23 - p24 * p34;
    const double d24a = p24 - p23 * p34;
    const double d34a = p34 - p23 * p24;
    const double d23b = p12 * p13 + p14 * p14 * p23 - p12 * p14 * p34 - p13 * p14 * p24;
    const double d24b = p12 * p14 + p13 * p13 * p24 - p12 * p13 * p34 - p13 * p14 * p23;
    const double d34b = p13 * p14 + p12 * p12 * p34 - p12 * p14 * p23 - p12 * p13 * p24;

    auto mu_a = [](double pik) { return 1.0 - pik * pik; };
    auto mu_b = [](double p1i, double p1k, double pik) { return p1i * p1i + p1k * p1k - 2.0 * p1i * p1k * pik; };
    const double m23a = mu_a(p23), m24a = mu_a(p24), m34a = mu_a(p34);
    const double m23b = mu_b(p12, p13, p23), m24b = mu_b(p12, p14, p24), m34b = mu_b(p13, p14, p34);

    auto term = [&](double lead, double da, double db, double ma1, double mb1, double ma2, double mb2) {
        if (lead == 0.0)
            return 0.0;
        auto f = [=](double t) {
            const double t2 = t * t;
            const double denom = std::sqrt(std::max((ma1 - t2 * mb1) * (ma2 - t2 * mb2), 0.0));
            const double num = da - t2 * db;
            double arg = denom > 0.0 ? num / denom : (num > 0.0 ? 1.0 : (num < 0.0 ? -1.0 : 0.0));
            arg = std::clamp(arg, -1.0, 1.0);
            return lead * std::asin(arg) / std::sqrt(1.0 - t2 * lead * lead);
        };
        return integrate(f, 0.0, 1.0, quad);
    };

    const double j1 = term(p12, d34a, d34b, m23a, m23b, m24a, m24b);
    const double j2 = term(p13, d24a, d24b, m23a, m23b, m34a, m34b);
    const double j3 = term(p14, d23a, d23b, m24a, m24b, m34a, m34b);

    const double arcsins = std::asin(clamp_correlation(p12)) + std::asin(clamp_correlation(p13)) +
                           std::asin(clamp_correlation(p14)) + std::asin(clamp_correlation(p23)) +
                           std::asin(clamp_correlation(p24)) + std::asin(clamp_correlation(p34));
    constexpr double pi = std::numbers::pi;
    return 1.0 / 16.0 + arcsins / (8.0 * pi) + (j1 + j2 + j3) / (4.0 * pi * pi);
}

namespace detail
{

inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_quantile(double p)
{
    constexpr double lo = std::numeric_limits<double>::min();
    p = std::clamp(p, lo, 1.0 - 1e-16);
    using no_promote = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, no_promote());
}

inline std::vector<double> lattice_generator(std::size_t n)
{
    std::vector<double> z;
    z.reserve(n);
    for (std::uint64_t cand = 2; z.size() < n; ++cand)
    {
        bool prime = true;
        for (std::uint64_t d = 2; d * d <= cand; ++d)
            if (cand % d == 0)
            {
                prime = false;
                break;
            }
        if (prime)
        {
            const double r = std::sqrt(static_cast<double>(cand));
            z.push_back(r - std::floor(r));
        }
    }
    return z;
}

} // namespace detail

/// Randomized-lattice estimate (Cholesky + sequential conditioning, Richtmyer
/// generator, baker transform, antithetic pairs). The standard error is the
/// spread of the per-shift means.
inline OrthantResult orthant_genz(const Correlation &psi, std::size_t points, std::uint64_t seed,
                                  std::size_t shifts = 12)
{
    const Index L = psi.dim();
    require(L >= 1, ErrorCode::DimensionMismatch, "orthant_genz needs dim >= 1");
    require(shifts >= 10, ErrorCode::PreconditionViolated, "orthant_genz needs at least 10 shifts");
    require(points * shifts >= 1000, ErrorCode::PreconditionViolated, "orthant_genz needs at least 1000 samples");
    const RealMatrix chol = cholesky(psi);
    if (L == 1)
        return {0.5, 0.0, OrthantBackend::GenzMC};

    // Pr(x > 0) = Pr(x < 0); integrate the lower orthant with upper limits 0.
    const std::size_t m = static_cast<std::size_t>(L - 1);
    const std::vector<double> z = detail::lattice_generator(m);
    const double e1 = 0.5;

    Rng rng(derive_seed(seed, 0x6E6E7A));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> shift_means(shifts, 0.0);
    std::vector<double> w(m), y(static_cast<std::size_t>(L));

    auto sample = [&](const std::vector<double> &u) {
        double f = e1;
        y[0] = detail::normal_quantile(u[0] * e1);
        for (Index i = 1; i < L; ++i)
        {
            double s = 0.0;
            for (Index j = 0; j < i; ++j)
                s += chol(i, j) * y[static_cast<std::size_t>(j)];
            const double ei = detail::normal_cdf(-s / chol(i, i));
            f *= ei;
            if (f == 0.0)
                return 0.0;
            if (i + 1 < L)
                y[static_cast<std::size_t>(i)] = detail::normal_quantile(u[static_cast<std::size_t>(i)] * ei);
        }
        return f;
    };

    std::vector<double> delta(m), anti(m);
    for (std::size_t s = 0; s < shifts; ++s)
    {
        for (auto &d : delta)
            d = unif(rng);
        double acc = 0.0;
        for (std::size_t n = 1; n <= points; ++n)
        {
            for (std::size_t j = 0; j < m; ++j)
            {
                double x = static_cast<double>(n) * z[j] + delta[j];
                x -= std::floor(x);
                w[j] = std::abs(2.0 * x - 1.0);
                anti[j] = 1.0 - w[j];
            }
            acc += 0.5 * (sample(w) + sample(anti));
        }
        shift_means[s] = acc / static_cast<double>(points);
    }

    double mean = 0.0;
    for (double v : shift_means)
        mean += v;
    mean /= static_cast<double>(shifts);
    double var = 0.0;
    for (double v : shift_means)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(shifts - 1);
    return {std::clamp(mean, 0.0, 1.0), std::sqrt(var / static_cast<double>(shifts)), OrthantBackend::GenzMC};
}

/// Coefficients c_k of the integral of prod_k Q(c_k t) against the standard
/// normal density.
struct QProductSpec
{
    std::vector<double> coefficients;
};

inline double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double q_product_integral(const QProductSpec &spec, const QuadratureSpec &quad = {})
{
    if (spec.coefficients.empty())
        return 1.0;
    for (double c : spec.coefficients)
        require(std::isfinite(c), ErrorCode::NotFinite, "Q-product coefficient is not finite");

    std::vector<double> sorted = spec.coefficients;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, int>> groups;
    for (double c : sorted)
    {
        if (!groups.empty() && groups.back().first == c)
            ++groups.back().second;
        else
            groups.emplace_back(c, 1);
    }
    auto f = [&](double t) {
        double prod = 1.0;
        for (const auto &[c, mult] : groups)
        {
            prod *= mult == 1 ? q_function(c * t) : std::pow(q_function(c * t), mult);
            if (prod == 0.0)
                break;
        }
        return prod;
    };
    return integrate_against_normal(f, quad);
}

/// Loadings lambda with psi_ik = lambda_i lambda_k (i != k), |lambda_i| < 1,
/// when the correlation has that one-factor structure.
inline std::optional<RealVector> one_factor_loadings(const Correlation &psi, double tol = 1e-10)
{
    const Index L = psi.dim();
    if (L == 1)
        return RealVector::Zero(1);
    RealVector lambda(L);
    if (L == 2)
    {
        const double a = std::sqrt(std::abs(psi(0, 1)));
        lambda << a, psi(0, 1) < 0.0 ? -a : a;
        return lambda;
    }
    for (Index i = 0; i < L; ++i)
    {
        const Index j = i == 0 ? 1 : 0;
        const Index k = (i == 0 || i == 1) ? 2 : 1;
        if (psi(j, k) == 0.0)
            return std::nullopt;
        const double sq = psi(i, j) * psi(i, k) / psi(j, k);
        if (sq < -tol || sq >= 1.0)
            return std::nullopt;
        lambda(i) = std::sqrt(std::max(sq, 0.0));
    }
    for (Index i = 1; i < L; ++i)
        if (psi(0, i) < 0.0)
            lambda(i) = -lambda(i);
    for (Index i = 0; i < L; ++i)
        for (Index k = i + 1; k < L; ++k)
            if (std::abs(psi(i, k) - lambda(i) * lambda(k)) > tol)
                return std::nullopt;
    return lambda;
}

/// P(Psi) for a one-factor correlation via a single Q-product integral.
inline double orthant_one_factor(const RealVector &lambda, const QuadratureSpec &quad = {})
{
    QProductSpec spec;
    spec.coefficients.reserve(static_cast<std::size_t>(lambda.size()));
    for (Index i = 0; i < lambda.size(); ++i)
        spec.coefficients.push_back(lambda(i) / std::sqrt(1.0 - lambda(i) * lambda(i)));
    return q_product_integral(spec, quad);
}

namespace detail
{

inline std::vector<std::vector<Index>> independent_blocks(const Correlation &psi)
{
    const Index L = psi.dim();
    std::vector<int> label(static_cast<std::size_t>(L), -1);
    std::vector<std::vector<Index>> blocks;
    for (Index start = 0; start < L; ++start)
    {
        if (label[static_cast<std::size_t>(start)] >= 0)
            continue;
        const int id = static_cast<int>(blocks.size());
        blocks.emplace_back();
        std::vector<Index> stack{start};
        label[static_cast<std::size_t>(start)] = id;
        while (!stack.empty())
        {
            const Index i = stack.back();
            stack.pop_back();
            blocks.back().push_back(i);
            for (Index k = 0; k < L; ++k)
                if (label[static_cast<std::size_t>(k)] < 0 && std::abs(psi(i, k)) > kBlockZero)
                {
                    label[static_cast<std::size_t>(k)] = id;
                    stack.push_back(k);
                }
        }
        std::sort(blocks.back().begin(), blocks.back().end());
    }
    return blocks;
}

inline OrthantResult orthant_block(const Correlation &block, const BackendPolicy &policy)
{
    const Index L = block.dim();
    if (L == 1)
        return {0.5, 0.0, OrthantBackend::Trivial};
    const bool closed_ok = policy.choice != BackendChoice::Equicorr;
    const bool childs_ok = policy.choice == BackendChoice::Auto || policy.choice == BackendChoice::Childs;
    if (L == 2 && closed_ok)
        return {orthant_closed2(block(0, 1)), 0.0, OrthantBackend::Closed2};
    if (L == 3 && closed_ok)
        return {orthant_closed3(block(0, 1), block(0, 2), block(1, 2)), 0.0, OrthantBackend::Closed3};
    if (L == 4 && childs_ok)
        return {orthant_childs4(block, policy.quad), 0.0, OrthantBackend::Childs4};
    if (policy.choice == BackendChoice::Auto || policy.choice == BackendChoice::Equicorr)
    {
        if (auto lambda = one_factor_loadings(block))
        {
            cholesky(block); // positive definiteness check
            return {orthant_one_factor(*lambda, policy.quad), 0.0, OrthantBackend::EquicorrQ};
        }
        if (policy.choice == BackendChoice::Equicorr)
            fail(ErrorCode::UnsupportedBackend, "equicorr backend needs a one-factor correlation");
        return orthant_genz(block, policy.genz_points, policy.seed, policy.genz_shifts);
    }
    fail(ErrorCode::UnsupportedBackend, "requested backend cannot handle a correlated block of dimension " +
                                            std::to_string(L));
}

} // namespace detail

/// Orthant probability with backend dispatch. The input is standardized
/// first, so any positive multiple of Psi gives the same result.
inline OrthantResult orthant_p(const Correlation &psi, const BackendPolicy &policy = {})
{
    const Index L = psi.dim();
    require(L >= 1, ErrorCode::DimensionMismatch, "orthant_p needs dim >= 1");
    if (L == 1)
        return {0.5, 0.0, OrthantBackend::Trivial};
    if (policy.choice == BackendChoice::Genz)
        return orthant_genz(psi, policy.genz_points, policy.seed, policy.genz_shifts);

    const auto blocks = detail::independent_blocks(psi);
    if (blocks.size() == static_cast<std::size_t>(L))
    {
        cholesky(psi);
        return {std::ldexp(1.0, -static_cast<int>(L)), 0.0, OrthantBackend::Diagonal};
    }
    if (blocks.size() == 1)
        return detail::orthant_block(psi, policy);

    double value = 1.0;
    double rel_var = 0.0;
    for (const auto &idx : blocks)
    {
        const OrthantResult part = detail::orthant_block(psi.submatrix(idx), policy);
        value *= part.value;
        if (part.std_error > 0.0)
            rel_var += part.value > 0.0 ? std::pow(part.std_error / part.value, 2) : 0.0;
    }
    return {value, value * std::sqrt(rel_var), OrthantBackend::BlockProduct};
}

inline OrthantResult orthant_p(const RealSymmetric &psi, const BackendPolicy &policy = {})
{
    return orthant_p(standardize(psi), policy);
}

struct TruncatedMean
{
    RealVector mean;      // E[z | z > 0] direction of the quotient of integrals
    RealVector std_error; // first-order propagation of orthant standard errors
    OrthantResult denominator;
};

/// Quotient of int z exp(-z'Cz) dz over int exp(-z'Cz) dz on the positive
/// orthant, as C^-1 Diag(C^-1)^-1/2 g / (2 sqrt(pi) P(C^-1)) with
/// g_k = P((C_-k)^-1). Sampling backends draw an independent stream per call.
inline TruncatedMean truncated_mean_positive_orthant(const RealSymmetric &c, const BackendPolicy &policy = {})
{
    const Index n = c.dim();
    require(n >= 1, ErrorCode::DimensionMismatch, "truncated mean needs dim >= 1");
    const RealSymmetric cinv = invert_symmetric(c);

    auto policy_for = [&](std::uint64_t call) {
        BackendPolicy p = policy;
        p.seed = derive_seed(policy.seed, call);
        return p;
    };

    const OrthantResult denom = orthant_p(cinv, policy_for(0));
    require(denom.value >= 1e-300, ErrorCode::DegenerateObservation, "orthant probability underflows");

    RealVector g(n), g_se(n);
    for (Index k = 0; k < n; ++k)
    {
        if (n == 1)
        {
            g(k) = 1.0;
            g_se(k) = 0.0;
            continue;
        }
        const OrthantResult gk = orthant_p(invert_symmetric(delete_row_col(c, k)), policy_for(1 + k));
        g(k) = gk.value;
        g_se(k) = gk.std_error;
    }

    RealMatrix m = cinv.matrix();
    for (Index k = 0; k < n; ++k)
        m.col(k) /= std::sqrt(cinv(k, k));
    m /= 2.0 * std::sqrt(std::numbers::pi) * denom.value;

    TruncatedMean out;
    out.mean = m * g;
    out.std_error.resize(n);
    const double rel_p = denom.std_error / denom.value;
    for (Index i = 0; i < n; ++i)
    {
        double var = (m.row(i).transpose().array() * g_se.array()).square().sum();
        var += std::pow(out.mean(i) * rel_p, 2);
        out.std_error(i) = std::sqrt(var);
    }
    out.denominator = denom;
    return out;
}

/// Closed form of Lambda_q times the truncated mean for the 2x2 matrix
/// Lambda_q [[s1^2, phi s1 s2], [phi s1 s2, s2^2]] Lambda_q.
inline Eigen::Vector2d truncated_mean_2d_signed(double breve_sigma1, double breve_sigma2, double phi12,
                                               const Eigen::Vector2d &q)
{
    const double a = std::asin(phi12) / (std::numbers::pi / 2.0);
    const double diag = 1.0 - phi12 * a;
    const double off = a - phi12;
    Eigen::Matrix2d m;
    m << breve_sigma2 * diag, breve_sigma2 * off, breve_sigma1 * off, breve_sigma1 * diag;
    const double denom =
        breve_sigma1 * breve_sigma2 * std::sqrt(std::numbers::pi * (1.0 - phi12 * phi12)) * (1.0 - a * a);
    return m * q / denom;
}

} // namespace onebit
