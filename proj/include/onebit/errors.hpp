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

#include <stdexcept>
#include <string>
#include <string_view>

namespace onebit
{

enum class ErrorCode
{
    NotFinite,
    DimensionMismatch,
    DimensionOverflow,
    IndexOutOfRange,
    NotPositiveDefinite,
    NonPositiveDiagonal,
    NotSymmetric,
    QuadratureNotConverged,
    UnsupportedBackend,
    SingularTblm,
    PreconditionViolated,
    NotRealOmega,
    BudgetExceeded,
    DegenerateObservation,
    UnsupportedCombination,
    ZeroPilotEnergy,
    UnknownPreset,
    InvalidConfig,
    InvalidObservation,
    Io
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::NotFinite: return "NotFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::UnsupportedBackend: return "UnsupportedBackend";
    case ErrorCode::SingularTblm: return "SingularTblm";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotRealOmega: return "NotRealOmega";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateObservation: return "DegenerateObservation";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::ZeroPilotEnergy: return "ZeroPilotEnergy";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what)
{
    throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string &what)
{
    if (!condition)
        fail(code, what);
}

} // namespace onebit
