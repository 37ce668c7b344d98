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

// Monte-Carlo MSE sweeps over (scenario, estimator, SNR).
//
// Trial t draws h and a unit-variance noise vector from stream
// derive_seed(master_seed, t); the same draws are reused at every SNR point
// and for every estimator. Per-trial errors are stored by index and summed
// in index order, so results do not depend on the thread count.

#pragma once

#include "onebit/estimators.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace onebit
{

struct SweepConfig
{
    ScenarioConfig scenario;
    std::vector<double> snr_grid_db;
    std::size_t trials = 10000;
    std::vector<EstimatorKind> estimators{EstimatorKind::Blmmse};
    std::uint64_t master_seed = 1;
    BackendPolicy orthant_policy{};
    std::string output_path;
};

struct MseRecord
{
    std::string scenario_id;
    std::string estimator;
    double snr_db = 0.0;
    std::size_t trials = 0;
    double mse_per_antenna = 0.0;
    double std_error = 0.0;
    std::optional<double> theoretical_mse; // BLMMSE closed form, linear estimators only
};

inline std::vector<double> default_snr_grid()
{
    std::vector<double> g;
    for (int db = -10; db <= 30; db += 2)
        g.push_back(static_cast<double>(db));
    return g;
}

inline void validate(const SweepConfig &sweep)
{
    validate(sweep.scenario);
    require(sweep.trials >= 100, ErrorCode::InvalidConfig, "trials must be >= 100");
    require(!sweep.snr_grid_db.empty(), ErrorCode::InvalidConfig, "SNR grid is empty");
    for (std::size_t i = 1; i < sweep.snr_grid_db.size(); ++i)
        require(sweep.snr_grid_db[i] > sweep.snr_grid_db[i - 1], ErrorCode::InvalidConfig,
                "SNR grid must be strictly increasing");
    require(!sweep.estimators.empty(), ErrorCode::InvalidConfig, "no estimators selected");
}

/// sigma2 = tr(S S^H) / (tau N_T SNR). Covers the single-symbol (|s|^2/sigma2),
/// vector (|s|^2/(tau sigma2)) and matrix definitions alike.
inline double snr_to_noise(const ScenarioConfig &cfg, double snr_db)
{
    const ComplexMatrix s = build_pilots(cfg);
    const double energy = s.squaredNorm();
    require(energy > 0.0, ErrorCode::ZeroPilotEnergy, "pilot matrix has zero energy");
    const double snr = std::pow(10.0, snr_db / 10.0);
    return energy / (static_cast<double>(cfg.tau * cfg.n_tx) * snr);
}

struct Trial
{
    ComplexVector h;
    ComplexVector unit_noise;
};

/// Draws shared by every SNR point and estimator of one sweep.
class TrialSource
{
public:
    TrialSource(const ScenarioConfig &cfg, std::uint64_t master_seed)
        : lower_(cholesky(build_sigma(cfg))), s_(build_pilots(cfg)), n_rx_(cfg.n_rx), seed_(master_seed)
    {
    }

    Trial draw(std::size_t index) const
    {
        Rng rng = make_rng(seed_, index);
        Trial t;
        t.h = sample_channel_from_factor(lower_, rng);
        t.unit_noise = standard_cn(s_.rows() * n_rx_, rng);
        return t;
    }

    QuantizedObservation observe(const Trial &t, double sigma2) const
    {
        return quantize_one_bit(observe_with_noise(t.h, s_, n_rx_, sigma2, t.unit_noise));
    }

private:
    ComplexMatrix lower_;
    ComplexMatrix s_;
    Index n_rx_;
    std::uint64_t seed_;
};

/// Per-antenna squared error |h - F(r)|^2 / (N_T N_R) of trial `index`.
template <class F>
double run_trial(const TrialSource &src, double sigma2, std::size_t index, F &&estimator)
{
    const Trial t = src.draw(index);
    const QuantizedObservation r = src.observe(t, sigma2);
    const ComplexVector h_hat = estimator(r);
    require(h_hat.size() == t.h.size(), ErrorCode::DimensionMismatch, "estimate length does not match channel");
    return (t.h - h_hat).squaredNorm() / static_cast<double>(t.h.size());
}

/// Convenience form: one trial of one estimator, built from scratch.
inline double run_trial(const ScenarioConfig &cfg, double sigma2, EstimatorKind kind, std::size_t trial_index,
                        std::uint64_t master_seed = 1, const BackendPolicy &policy = {})
{
    const TrialSource src(cfg, master_seed);
    const LinearModel model = make_linear_model(cfg, sigma2);
    return run_trial(src, sigma2, trial_index,
                     [&](const QuantizedObservation &r) { return estimate(kind, model, r, policy).h_hat; });
}

namespace detail
{

struct Moments
{
    double mean = 0.0;
    double std_error = 0.0;
};

inline Moments moments(const std::vector<double> &x)
{
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x)
        sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Runs body(i) for i in [0, n) on `threads` workers; rethrows the first error.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body &&body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::exception_ptr error;
    std::mutex mu;
    auto worker = [&](unsigned w) {
        try
        {
            for (std::size_t i = w; i < n; i += threads)
            {
                {
                    std::lock_guard lock(mu);
                    if (error)
                        return;
                }
                body(i);
            }
        }
        catch (...)
        {
            std::lock_guard lock(mu);
            if (!error)
                error = std::current_exception();
        }
    };
    if (threads == 1)
        worker(0);
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(worker, w);
        for (auto &t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

/// threads = 0 uses the hardware concurrency.
inline std::vector<MseRecord> run_sweep(const SweepConfig &sweep, unsigned threads = 0)
{
    validate(sweep);
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    const ScenarioConfig &cfg = sweep.scenario;
    const TrialSource src(cfg, sweep.master_seed);

    std::vector<MseRecord> records;
    for (double snr_db : sweep.snr_grid_db)
    {
        const double sigma2 = snr_to_noise(cfg, snr_db);
        const LinearModel model = make_linear_model(cfg, sigma2);
        for (EstimatorKind kind : sweep.estimators)
        {
            const std::string context = "scenario " + cfg.id + ", estimator " + std::string(to_string(kind)) +
                                        ", SNR " + std::to_string(snr_db) + " dB";
            std::vector<double> errors(sweep.trials);
            try
            {
                require(kind == EstimatorKind::MmseGeneral || is_applicable(kind, model, sweep.orthant_policy),
                        ErrorCode::UnsupportedCombination, "estimator does not apply");
                if (is_linear(kind))
                {
                    const ComplexMatrix w = linear_estimator_matrix(kind, model);
                    detail::parallel_for(sweep.trials, threads, [&](std::size_t t) {
                        errors[t] = run_trial(src, sigma2, t,
                                              [&](const QuantizedObservation &r) { return ComplexVector(w * r.complex()); });
                    });
                }
                else
                {
                    detail::parallel_for(sweep.trials, threads, [&](std::size_t t) {
                        BackendPolicy policy = sweep.orthant_policy;
                        policy.seed = derive_seed(sweep.orthant_policy.seed, t);
                        errors[t] = run_trial(src, sigma2, t, [&](const QuantizedObservation &r) {
                            return estimate(kind, model, r, policy).h_hat;
                        });
                    });
                }
            }
            catch (const Error &e)
            {
                throw Error(e.code(), context + ": " + e.what());
            }

            const detail::Moments mo = detail::moments(errors);
            MseRecord rec;
            rec.scenario_id = cfg.id;
            rec.estimator = std::string(to_string(kind));
            rec.snr_db = snr_db;
            rec.trials = sweep.trials;
            rec.mse_per_antenna = mo.mean;
            rec.std_error = mo.std_error;
            if (is_linear(kind))
                rec.theoretical_mse = blmmse_mse_theoretical(model);
            records.push_back(std::move(rec));
        }
    }
    std::stable_sort(records.begin(), records.end(), [](const MseRecord &a, const MseRecord &b) {
        return a.estimator != b.estimator ? a.estimator < b.estimator : a.snr_db < b.snr_db;
    });
    return records;
}

// ---- CSV --------------------------------------------------------------------

inline constexpr const char *kCsvHeader = "scenario_id,estimator,snr_db,trials,mse_per_antenna,stderr,theoretical_mse";

inline std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_csv(std::ostream &os, const std::vector<MseRecord> &records)
{
    os << kCsvHeader << '\n';
    for (const MseRecord &r : records)
    {
        os << r.scenario_id << ',' << r.estimator << ',' << format_double(r.snr_db) << ',' << r.trials << ','
           << format_double(r.mse_per_antenna) << ',' << format_double(r.std_error) << ',';
        if (r.theoretical_mse)
            os << format_double(*r.theoretical_mse);
        os << '\n';
    }
}

/// Writes through a temporary file so a failure never leaves a partial CSV.
inline void write_csv_file(const std::string &path, const std::vector<MseRecord> &records)
{
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        write_csv(os, records);
        os.flush();
        require(static_cast<bool>(os), ErrorCode::Io, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec)
    {
        std::filesystem::remove(tmp);
        fail(ErrorCode::Io, "cannot move output into " + path + ": " + ec.message());
    }
}

// ---- presets ----------------------------------------------------------------

inline const std::vector<std::string> &preset_names()
{
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5"};
    return names;
}

inline std::string format_rho(double rho)
{
    std::ostringstream os;
    os << rho;
    return os.str();
}

/// Desk-scale sweeps (10^4 trials, SNR -10:2:30 dB) for the five standard
/// experiments. Each preset expands into one sweep per configuration.
inline std::vector<SweepConfig> preset(const std::string &name)
{
    std::vector<SweepConfig> out;
    auto base = [](ScenarioConfig sc, std::vector<EstimatorKind> est) {
        SweepConfig s;
        s.scenario = std::move(sc);
        s.snr_grid_db = default_snr_grid();
        s.trials = 10000;
        s.estimators = std::move(est);
        s.master_seed = 1;
        s.output_path = "";
        return s;
    };
    if (name == "fig1")
    {
        // MISO, exponential transmit correlation, EVD-matched pilots (eta = 1)
        for (Index nt : {16, 32})
            for (double rho : {0.5, 0.9})
            {
                ScenarioConfig sc;
                sc.id = "fig1_nt" + std::to_string(nt) + "_rho" + format_rho(rho);
                sc.n_tx = nt;
                sc.n_rx = 1;
                sc.tau = nt;
                sc.covariance = CovExponentialTx{rho};
                sc.pilots = PilotEvdMatched{1.0};
                out.push_back(base(sc, {EstimatorKind::Blmmse, EstimatorKind::TxCorrEvd}));
            }
    }
    else if (name == "fig2")
    {
        for (Index nr : {3, 4})
            for (double rho : {0.5, 0.9})
            {
                ScenarioConfig sc;
                sc.id = "fig2_nr" + std::to_string(nr) + "_rho" + format_rho(rho);
                sc.n_rx = nr;
                sc.covariance = CovExponentialRx{rho};
                sc.pilots = PilotSingleSymbol{cdouble(1.0, 0.0)};
                out.push_back(base(sc, {EstimatorKind::Blmmse,
                                        nr == 3 ? EstimatorKind::Simo3Closed : EstimatorKind::MmseRealOmega}));
            }
    }
    else if (name == "fig3" || name == "fig4")
    {
        const std::vector<Index> sizes = name == "fig3" ? std::vector<Index>{4, 16, 32} : std::vector<Index>{8, 16, 32, 64};
        for (Index nr : sizes)
        {
            ScenarioConfig sc;
            sc.id = name + "_nr" + std::to_string(nr) + "_rho0.9";
            sc.n_rx = nr;
            sc.covariance = CovEquicorrelatedRx{0.9};
            sc.pilots = PilotSingleSymbol{cdouble(1.0, 0.0)};
            std::vector<EstimatorKind> est{EstimatorKind::Blmmse, EstimatorKind::SimoEquicorr};
            if (name == "fig3" && nr == 4)
                est.push_back(EstimatorKind::MmseRealOmega);
            out.push_back(base(sc, est));
        }
    }
    else if (name == "fig5")
    {
        // SISO, second Sylvester-Hadamard column as the real pilot vector
        for (Index tau : {2, 16, 32})
        {
            ScenarioConfig sc;
            sc.id = "fig5_tau" + std::to_string(tau);
            sc.tau = tau;
            sc.pilots = PilotHadamardColumn{1, 1.0};
            std::vector<EstimatorKind> est{EstimatorKind::Blmmse, EstimatorKind::SisoMultipilot};
            if (tau == 2)
                est.push_back(EstimatorKind::TwoRealPilots);
            out.push_back(base(sc, est));
        }
    }
    else
    {
        std::string valid;
        for (const auto &n : preset_names())
            valid += (valid.empty() ? "" : ", ") + n;
        fail(ErrorCode::UnknownPreset, "unknown preset '" + name + "'; valid names: " + valid);
    }
    return out;
}

} // namespace onebit
