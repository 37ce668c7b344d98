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

#pragma once

#include "onebit/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

namespace onebit
{

/// Adaptive Gauss-Kronrod settings shared by every 1-D integral.
///   tolerance   error target, relative to the integral of |f| (all integrands
///               here have L1 norm of order one, so this is also the absolute
///               target)
///   max_depth   bisection depth limit
///   truncation  infinite domains are cut to [-truncation, truncation]; the
///               normal density mass beyond 8.5 is below 1e-17
struct QuadratureSpec
{
    double tolerance = 1e-10;
    unsigned max_depth = 20;
    double truncation = 8.5;
};

/// Integrates f over [a, b]; throws QuadratureNotConverged if the error
/// estimate misses the target.
template <class F>
double integrate(F &&f, double a, double b, const QuadratureSpec &spec = {})
{
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    double l1 = 0.0;
    const double value = gauss_kronrod<double, 31>::integrate(f, a, b, spec.max_depth, spec.tolerance, &error, &l1);
    require(std::isfinite(value), ErrorCode::QuadratureNotConverged, "integral is not finite");
    const double target = std::max(spec.tolerance * l1, 1e-16);
    require(error <= target, ErrorCode::QuadratureNotConverged,
            "quadrature error estimate " + std::to_string(error) + " above target " + std::to_string(target));
    return value;
}

/// Integral of f(t) * phi(t) over the real line, phi the standard normal
/// density. Split at zero so each half is smooth for Q-product integrands.
template <class F>
double integrate_against_normal(F &&f, const QuadratureSpec &spec = {})
{
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    auto g = [&](double t) { return f(t) * inv_sqrt_2pi * std::exp(-0.5 * t * t); };
    return integrate(g, -spec.truncation, 0.0, spec) + integrate(g, 0.0, spec.truncation, spec);
}

} // namespace onebit
