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

// JSON configuration, observation and matrix readers.
//
// Complex numbers are written as [re, im] or as a plain real number.
// Matrices are arrays of rows. Every error message starts with the JSON
// path of the offending field (e.g. "scenario.covariance.rho").

#pragma once

#include "onebit/sim_harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace onebit::io
{

using Json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string &path, const std::string &msg)
{
    fail(ErrorCode::InvalidConfig, path + ": " + msg);
}

inline std::string read_text_file(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Parses JSON text; syntax errors report the line and column.
inline Json parse_json_text(const std::string &text, const std::string &source = "<input>")
{
    try
    {
        return Json::parse(text);
    }
    catch (const Json::parse_error &e)
    {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size()); ++i)
        {
            if (text[i] == '\n')
                ++line, col = 1;
            else
                ++col;
        }
        fail(ErrorCode::InvalidConfig,
             source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + e.what());
    }
}

inline Json load_json(const std::string &path)
{
    return parse_json_text(read_text_file(path), path);
}

// ---- field helpers ----------------------------------------------------------

inline void check_keys(const Json &j, const std::set<std::string> &allowed, const std::string &path)
{
    if (!j.is_object())
        config_error(path, "expected an object");
    for (const auto &[key, value] : j.items())
        if (!allowed.count(key))
            config_error(path + "." + key, "unknown field");
}

inline const Json &field(const Json &j, const std::string &key, const std::string &path)
{
    if (!j.contains(key))
        config_error(path + "." + key, "missing required field");
    return j.at(key);
}

inline double as_number(const Json &j, const std::string &path)
{
    if (!j.is_number())
        config_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        config_error(path, "not finite");
    return v;
}

inline Index as_index(const Json &j, const std::string &path)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        config_error(path, "expected a non-negative integer");
    return static_cast<Index>(j.get<long long>());
}

inline std::uint64_t as_seed(const Json &j, const std::string &path)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        config_error(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline std::string as_string(const Json &j, const std::string &path)
{
    if (!j.is_string())
        config_error(path, "expected a string");
    return j.get<std::string>();
}

inline cdouble as_complex(const Json &j, const std::string &path)
{
    if (j.is_number())
        return {as_number(j, path), 0.0};
    if (j.is_array() && j.size() == 2)
        return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
    config_error(path, "expected a number or an [re, im] pair");
}

inline RealVector as_real_vector(const Json &j, const std::string &path)
{
    if (!j.is_array() || j.empty())
        config_error(path, "expected a non-empty array of numbers");
    RealVector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

inline ComplexVector as_complex_vector(const Json &j, const std::string &path)
{
    if (!j.is_array() || j.empty())
        config_error(path, "expected a non-empty array");
    ComplexVector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = as_complex(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

inline ComplexMatrix as_complex_matrix(const Json &j, const std::string &path)
{
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        config_error(path, "expected a non-empty array of rows");
    const std::size_t cols = j[0].size();
    ComplexMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r)
    {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols)
            config_error(rp, "row length differs from row 0");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = as_complex(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline RealMatrix as_real_matrix(const Json &j, const std::string &path)
{
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        config_error(path, "expected a non-empty array of rows");
    const std::size_t cols = j[0].size();
    RealMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r)
    {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols)
            config_error(rp, "row length differs from row 0");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = as_number(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline Json complex_to_json(cdouble z)
{
    return Json::array({z.real(), z.imag()});
}

inline Json complex_vector_to_json(const ComplexVector &v)
{
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(complex_to_json(v(i)));
    return out;
}

// ---- scenario ---------------------------------------------------------------

inline CovarianceSpec covariance_from_json(const Json &j, const std::string &path)
{
    const std::string type = as_string(field(j, "type", path), path + ".type");
    if (type == "identity")
    {
        check_keys(j, {"type"}, path);
        return CovIdentity{};
    }
    if (type == "kronecker_tx")
    {
        check_keys(j, {"type", "sigma_tx"}, path);
        return CovKroneckerTx{as_complex_matrix(field(j, "sigma_tx", path), path + ".sigma_tx")};
    }
    if (type == "exponential_rx" || type == "exponential_tx" || type == "equicorrelated_rx")
    {
        check_keys(j, {"type", "rho"}, path);
        const double rho = as_number(field(j, "rho", path), path + ".rho");
        if (!(rho >= 0.0 && rho < 1.0))
            config_error(path + ".rho", "must lie in [0, 1)");
        if (type == "exponential_rx")
            return CovExponentialRx{rho};
        if (type == "exponential_tx")
            return CovExponentialTx{rho};
        return CovEquicorrelatedRx{rho};
    }
    if (type == "explicit")
    {
        check_keys(j, {"type", "sigma"}, path);
        return CovExplicit{as_complex_matrix(field(j, "sigma", path), path + ".sigma")};
    }
    config_error(path + ".type", "unknown covariance type '" + type +
                                     "' (identity, kronecker_tx, exponential_rx, exponential_tx, "
                                     "equicorrelated_rx, explicit)");
}

inline PilotSpec pilots_from_json(const Json &j, const std::string &path)
{
    const std::string type = as_string(field(j, "type", path), path + ".type");
    if (type == "single_symbol")
    {
        check_keys(j, {"type", "s"}, path);
        return PilotSingleSymbol{as_complex(field(j, "s", path), path + ".s")};
    }
    if (type == "unitary_scaled" || type == "evd_matched")
    {
        check_keys(j, {"type", "eta"}, path);
        const double eta = j.contains("eta") ? as_number(j["eta"], path + ".eta") : 1.0;
        if (!(eta > 0.0))
            config_error(path + ".eta", "must be > 0");
        if (type == "unitary_scaled")
            return PilotUnitaryScaled{eta};
        return PilotEvdMatched{eta};
    }
    if (type == "two_real_vectors")
    {
        check_keys(j, {"type", "s1", "s2"}, path);
        return PilotTwoRealVectors{as_real_vector(field(j, "s1", path), path + ".s1"),
                                   as_real_vector(field(j, "s2", path), path + ".s2")};
    }
    if (type == "quarter_phase_pair")
    {
        check_keys(j, {"type", "s1", "s2_norm"}, path);
        PilotQuarterPhasePair p;
        p.s1 = as_complex_vector(field(j, "s1", path), path + ".s1");
        if (j.contains("s2_norm"))
            p.s2_norm = as_number(j["s2_norm"], path + ".s2_norm");
        return p;
    }
    if (type == "hadamard_column")
    {
        check_keys(j, {"type", "column", "amplitude"}, path);
        PilotHadamardColumn p;
        if (j.contains("column"))
            p.column = as_index(j["column"], path + ".column");
        if (j.contains("amplitude"))
            p.amplitude = as_number(j["amplitude"], path + ".amplitude");
        return p;
    }
    if (type == "explicit")
    {
        check_keys(j, {"type", "s"}, path);
        return PilotExplicit{as_complex_matrix(field(j, "s", path), path + ".s")};
    }
    config_error(path + ".type", "unknown pilot type '" + type +
                                     "' (single_symbol, unitary_scaled, evd_matched, two_real_vectors, "
                                     "quarter_phase_pair, hadamard_column, explicit)");
}

inline ScenarioConfig scenario_from_json(const Json &j, const std::string &path = "scenario")
{
    check_keys(j, {"id", "n_tx", "n_rx", "tau", "sigma2", "covariance", "pilots", "seed"}, path);
    ScenarioConfig cfg;
    if (j.contains("id"))
        cfg.id = as_string(j["id"], path + ".id");
    if (j.contains("n_tx"))
        cfg.n_tx = as_index(j["n_tx"], path + ".n_tx");
    if (j.contains("n_rx"))
        cfg.n_rx = as_index(j["n_rx"], path + ".n_rx");
    if (j.contains("tau"))
        cfg.tau = as_index(j["tau"], path + ".tau");
    if (j.contains("sigma2"))
        cfg.sigma2 = as_number(j["sigma2"], path + ".sigma2");
    if (j.contains("seed"))
        cfg.seed = as_seed(j["seed"], path + ".seed");
    if (j.contains("covariance"))
        cfg.covariance = covariance_from_json(j["covariance"], path + ".covariance");
    if (j.contains("pilots"))
        cfg.pilots = pilots_from_json(j["pilots"], path + ".pilots");
    for (const char *k : {"n_tx", "n_rx", "tau"})
        if (j.contains(k) && j[k].get<long long>() < 1)
            config_error(path + "." + k, "must be >= 1");
    if (!(cfg.sigma2 > 0.0))
        config_error(path + ".sigma2", "must be > 0");
    try
    {
        // build both once so dimension errors surface at load time
        const HermitianPSD sigma = build_sigma(cfg);
        const ComplexMatrix s = build_pilots(cfg);
        (void)sigma;
        (void)s;
    }
    catch (const Error &e)
    {
        throw Error(e.code(), path + ": " + e.what());
    }
    return cfg;
}

/// A scenario file holds either a scenario object or a sweep with a "scenario" field.
inline ScenarioConfig load_scenario(const std::string &path)
{
    const Json j = load_json(path);
    if (j.is_object() && j.contains("scenario"))
        return scenario_from_json(j["scenario"], "scenario");
    return scenario_from_json(j, "scenario");
}

// ---- sweeps -----------------------------------------------------------------

/// "A:STEP:B" -> A, A+STEP, ..., including B when the grid lands on it.
inline std::vector<double> parse_snr_range(const std::string &text)
{
    const std::string where = "SNR range '" + text + "'";
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':'))
    {
        try
        {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size())
                fail(ErrorCode::InvalidConfig, where + ": bad number '" + item + "'");
        }
        catch (const std::logic_error &)
        {
            fail(ErrorCode::InvalidConfig, where + ": bad number '" + item + "'");
        }
    }
    require(parts.size() == 3, ErrorCode::InvalidConfig, where + ": expected A:STEP:B");
    const double a = parts[0], step = parts[1], b = parts[2];
    require(std::isfinite(a) && std::isfinite(b) && std::isfinite(step) && step > 0.0, ErrorCode::InvalidConfig,
            where + ": STEP must be > 0");
    require(b >= a, ErrorCode::InvalidConfig, where + ": B must be >= A");
    const double span = (b - a) / step;
    const auto count = static_cast<long long>(std::floor(span + 1e-9));
    require(count < 100000, ErrorCode::InvalidConfig, where + ": too many points");
    std::vector<double> grid;
    for (long long k = 0; k <= count; ++k)
        grid.push_back(a + static_cast<double>(k) * step);
    if (std::abs(grid.back() - b) < 1e-9 * std::max(1.0, std::abs(b)))
        grid.back() = b;
    return grid;
}

inline BackendChoice backend_from_string(const std::string &name)
{
    if (name == "auto")
        return BackendChoice::Auto;
    if (name == "closed")
        return BackendChoice::Closed;
    if (name == "childs")
        return BackendChoice::Childs;
    if (name == "genz")
        return BackendChoice::Genz;
    if (name == "equicorr")
        return BackendChoice::Equicorr;
    fail(ErrorCode::InvalidConfig, "unknown backend '" + name + "' (auto, closed, childs, genz, equicorr)");
}

inline EstimatorKind estimator_or_throw(const std::string &name, const std::string &path)
{
    if (auto k = estimator_from_string(name))
        return *k;
    std::string valid;
    for (EstimatorKind k : kAllEstimators)
        valid += (valid.empty() ? "" : ", ") + std::string(to_string(k));
    fail(ErrorCode::InvalidConfig, path + ": unknown estimator '" + name + "' (" + valid + ")");
}

inline SweepConfig sweep_from_json(const Json &j, const std::string &path = "sweep")
{
    check_keys(j,
               {"scenario", "snr_db", "trials", "estimators", "seed", "backend", "genz_points", "genz_shifts",
                "orthant_seed", "output"},
               path);
    SweepConfig s;
    s.scenario = scenario_from_json(field(j, "scenario", path), path + ".scenario");
    s.snr_grid_db = default_snr_grid();
    if (j.contains("snr_db"))
    {
        const Json &g = j["snr_db"];
        if (g.is_string())
        {
            try
            {
                s.snr_grid_db = parse_snr_range(g.get<std::string>());
            }
            catch (const Error &e)
            {
                config_error(path + ".snr_db", e.what());
            }
        }
        else
        {
            const RealVector v = as_real_vector(g, path + ".snr_db");
            s.snr_grid_db.assign(v.data(), v.data() + v.size());
        }
        for (std::size_t i = 1; i < s.snr_grid_db.size(); ++i)
            if (!(s.snr_grid_db[i] > s.snr_grid_db[i - 1]))
                config_error(path + ".snr_db", "grid must be strictly increasing");
    }
    if (j.contains("trials"))
    {
        s.trials = static_cast<std::size_t>(as_index(j["trials"], path + ".trials"));
        if (s.trials < 100)
            config_error(path + ".trials", "must be >= 100");
    }
    if (j.contains("estimators"))
    {
        const Json &e = j["estimators"];
        if (!e.is_array() || e.empty())
            config_error(path + ".estimators", "expected a non-empty array of names");
        s.estimators.clear();
        for (std::size_t i = 0; i < e.size(); ++i)
        {
            const std::string p = path + ".estimators[" + std::to_string(i) + "]";
            s.estimators.push_back(estimator_or_throw(as_string(e[i], p), p));
        }
    }
    if (j.contains("seed"))
        s.master_seed = as_seed(j["seed"], path + ".seed");
    if (j.contains("backend"))
    {
        try
        {
            s.orthant_policy.choice = backend_from_string(as_string(j["backend"], path + ".backend"));
        }
        catch (const Error &e)
        {
            config_error(path + ".backend", e.what());
        }
    }
    if (j.contains("genz_points"))
        s.orthant_policy.genz_points = as_index(j["genz_points"], path + ".genz_points");
    if (j.contains("genz_shifts"))
        s.orthant_policy.genz_shifts = as_index(j["genz_shifts"], path + ".genz_shifts");
    if (j.contains("orthant_seed"))
        s.orthant_policy.seed = as_seed(j["orthant_seed"], path + ".orthant_seed");
    if (j.contains("output"))
        s.output_path = as_string(j["output"], path + ".output");
    return s;
}

/// Accepts a single sweep object, an array of sweeps, or {"sweeps": [...]}.
inline std::vector<SweepConfig> sweeps_from_json(const Json &j)
{
    std::vector<SweepConfig> out;
    const Json *list = nullptr;
    std::string base = "sweeps";
    if (j.is_array())
        list = &j;
    else if (j.is_object() && j.contains("sweeps"))
    {
        check_keys(j, {"sweeps"}, "<root>");
        list = &j["sweeps"];
        if (!list->is_array() || list->empty())
            config_error("sweeps", "expected a non-empty array");
    }
    if (!list)
    {
        out.push_back(sweep_from_json(j, "sweep"));
        return out;
    }
    for (std::size_t i = 0; i < list->size(); ++i)
        out.push_back(sweep_from_json((*list)[i], base + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<SweepConfig> load_sweeps(const std::string &path)
{
    const Json j = load_json(path);
    try
    {
        return sweeps_from_json(j);
    }
    catch (const Error &e)
    {
        throw Error(e.code(), path + ": " + e.what());
    }
}

// ---- observations and matrices ---------------------------------------------

/// Either an array of [re, im] pairs or {"r": [...]}. Entries must be +-1 +- j.
inline QuantizedObservation observation_from_json(const Json &j)
{
    const Json &arr = j.is_object() ? field(j, "r", "observation") : j;
    if (!arr.is_array() || arr.empty())
        config_error("observation.r", "expected a non-empty array of [re, im] pairs");
    ComplexVector r(static_cast<Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i)
        r(static_cast<Index>(i)) = as_complex(arr[i], "observation.r[" + std::to_string(i) + "]");
    return QuantizedObservation::from_complex(r);
}

inline QuantizedObservation load_observation(const std::string &path)
{
    return observation_from_json(load_json(path));
}

/// JSON nested arrays, or a whitespace grid with one row per line ('#' starts a comment).
inline RealMatrix parse_matrix_text(const std::string &text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    require(first != std::string::npos, ErrorCode::InvalidConfig, "matrix input is empty");
    if (text[first] == '[')
        return as_real_matrix(parse_json_text(text, "matrix"), "matrix");

    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok)
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size())
                    throw std::invalid_argument(tok);
            }
            catch (const std::logic_error &)
            {
                fail(ErrorCode::InvalidConfig, "matrix line " + std::to_string(line_no) + ": bad number '" + tok + "'");
            }
        }
        if (row.empty())
            continue;
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorCode::InvalidConfig, "matrix line " + std::to_string(line_no) + ": row length differs");
        rows.push_back(std::move(row));
    }
    RealMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return m;
}

inline RealMatrix load_matrix(const std::string &path)
{
    return parse_matrix_text(read_text_file(path));
}

inline Json estimate_to_json(const std::string &scenario_id, const ChannelEstimate &est, const OptimalityReport &rep)
{
    Json j;
    j["scenario_id"] = scenario_id;
    j["estimator"] = std::string(to_string(est.estimator));
    j["h_hat"] = complex_vector_to_json(est.h_hat);
    j["orthant_stderr_budget"] = est.orthant_stderr_budget;
    j["optimality"] = {{"is_optimal", rep.is_optimal},
                       {"max_row_nnz", rep.max_row_nnz},
                       {"tolerance_used", rep.tolerance_used}};
    return j;
}

} // namespace onebit::io
