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

// onebit: command-line front end (simulate, estimate, orthant, presets).

#include "onebit.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace
{

using namespace onebit;

struct SimulateArgs
{
    std::string config;
    std::string preset;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string snr_db;
    std::string out;
    unsigned threads = 0;
    std::string backend;
    std::string only;
};

void check_output_path(const std::string &path)
{
    const std::filesystem::path p(path);
    const std::filesystem::path dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
    require(std::filesystem::is_directory(dir), ErrorCode::Io, "output directory does not exist: " + dir.string());
    require(!std::filesystem::is_directory(p), ErrorCode::Io, "output path is a directory: " + path);
}

int run_simulate(const SimulateArgs &a)
{
    std::vector<SweepConfig> sweeps = a.config.empty() ? preset(a.preset) : io::load_sweeps(a.config);
    if (!a.only.empty())
    {
        std::erase_if(sweeps, [&](const SweepConfig &s) { return s.scenario.id != a.only; });
        require(!sweeps.empty(), ErrorCode::InvalidConfig, "--only: no scenario with id '" + a.only + "'");
    }
    const std::optional<std::vector<double>> grid =
        a.snr_db.empty() ? std::nullopt : std::optional(io::parse_snr_range(a.snr_db));
    for (SweepConfig &s : sweeps)
    {
        if (a.trials)
            s.trials = *a.trials;
        if (a.seed)
            s.master_seed = *a.seed;
        if (grid)
            s.snr_grid_db = *grid;
        if (!a.backend.empty())
            s.orthant_policy.choice = io::backend_from_string(a.backend);
        validate(s);
    }
    check_output_path(a.out);

    for (const SweepConfig &s : sweeps)
        std::printf("seed: %llu (%s)\n", static_cast<unsigned long long>(s.master_seed), s.scenario.id.c_str());
    std::fflush(stdout);

    std::vector<MseRecord> all;
    for (const SweepConfig &s : sweeps)
    {
        std::vector<MseRecord> rec = run_sweep(s, a.threads);
        all.insert(all.end(), rec.begin(), rec.end());
    }
    write_csv_file(a.out, all);

    std::printf("%-24s %-16s %8s %14s %12s %14s\n", "scenario", "estimator", "snr_db", "mse", "stderr", "theory");
    for (const MseRecord &r : all)
    {
        std::printf("%-24s %-16s %8.2f %14.6e %12.3e ", r.scenario_id.c_str(), r.estimator.c_str(), r.snr_db,
                    r.mse_per_antenna, r.std_error);
        if (r.theoretical_mse)
            std::printf("%14.6e\n", *r.theoretical_mse);
        else
            std::printf("%14s\n", "-");
    }
    std::printf("wrote %zu records to %s\n", all.size(), a.out.c_str());
    return 0;
}

int run_estimate(const std::string &config, const std::string &observation, const std::string &estimator,
                 const std::string &backend, std::uint64_t seed)
{
    const ScenarioConfig cfg = io::load_scenario(config);
    const QuantizedObservation r = io::load_observation(observation);
    BackendPolicy policy;
    policy.choice = io::backend_from_string(backend);
    policy.seed = seed;

    const LinearModel model = make_linear_model(cfg);
    require(r.size() == model.n_obs(), ErrorCode::DimensionMismatch,
            "observation has " + std::to_string(r.size()) + " entries, scenario needs " +
                std::to_string(model.n_obs()));
    const ChannelEstimate est = estimator == "auto" ? dispatch(model, r, policy)
                                                    : estimate(io::estimator_or_throw(estimator, "--estimator"),
                                                               model, r, policy);
    const OptimalityReport rep = check_blmmse_optimality(build_c(model.omega, r));
    io::Json j = io::estimate_to_json(cfg.id, est, rep);
    j["seed"] = seed;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_orthant(const std::string &matrix, const std::string &backend, std::size_t samples, std::uint64_t seed)
{
    const RealSymmetric psi(io::load_matrix(matrix));
    // orthant probabilities need a valid covariance
    const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(psi.matrix(), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, psi.matrix().cwiseAbs().maxCoeff());
    require(eig.eigenvalues().minCoeff() >= -kPsdTolerance * scale, ErrorCode::NotPositiveDefinite,
            "matrix is not positive semidefinite");
    BackendPolicy policy;
    policy.choice = io::backend_from_string(backend);
    policy.genz_points = static_cast<Index>(samples);
    policy.seed = seed;
    const OrthantResult res = orthant_p(psi, policy);
    std::printf("value: %.15g\nstderr: %.6g\nbackend: %s\nseed: %llu\n", res.value, res.std_error,
                std::string(to_string(res.backend)).c_str(), static_cast<unsigned long long>(seed));
    return 0;
}

int run_presets()
{
    for (const std::string &name : preset_names())
    {
        std::printf("%s\n", name.c_str());
        for (const SweepConfig &s : preset(name))
        {
            std::string est;
            for (EstimatorKind k : s.estimators)
                est += (est.empty() ? "" : ",") + std::string(to_string(k));
            std::printf("  %-22s N_T=%-3lld N_R=%-3lld tau=%-3lld %s\n", s.scenario.id.c_str(),
                        static_cast<long long>(s.scenario.n_tx), static_cast<long long>(s.scenario.n_rx),
                        static_cast<long long>(s.scenario.tau), est.c_str());
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"onebit: MMSE channel estimation for one-bit quantized MIMO"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "run Monte-Carlo MSE sweeps and write CSV");
    auto *opt_config = simulate->add_option("--config", sim.config, "sweep JSON file")->check(CLI::ExistingFile);
    auto *opt_preset = simulate->add_option("--preset", sim.preset, "built-in preset (see 'presets')");
    opt_config->excludes(opt_preset);
    opt_preset->excludes(opt_config);
    simulate->add_option("--trials", sim.trials, "trials per SNR point (>= 100)");
    simulate->add_option("--seed", sim.seed, "master seed (default: from config or preset)");
    simulate->add_option("--snr-db", sim.snr_db, "SNR grid A:STEP:B in dB, B included when reached");
    simulate->add_option("--out", sim.out, "CSV output path")->required();
    simulate->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
    simulate->add_option("--backend", sim.backend, "orthant backend: auto|closed|childs|genz|equicorr");
    simulate->add_option("--only", sim.only, "run only the sweep with this scenario id");

    std::string est_config, est_obs, est_name = "auto", est_backend = "auto";
    std::uint64_t est_seed = BackendPolicy{}.seed;
    auto *est = app.add_subcommand("estimate", "estimate h from one quantized observation");
    est->add_option("--config", est_config, "scenario JSON file")->required()->check(CLI::ExistingFile);
    est->add_option("--observation", est_obs, "observation JSON file")->required()->check(CLI::ExistingFile);
    est->add_option("--estimator", est_name, "estimator name or 'auto'");
    est->add_option("--backend", est_backend, "orthant backend: auto|closed|childs|genz|equicorr");
    est->add_option("--seed", est_seed, "seed for sampling backends");

    std::string orth_matrix, orth_backend = "auto";
    std::size_t orth_samples = static_cast<std::size_t>(BackendPolicy{}.genz_points);
    std::uint64_t orth_seed = BackendPolicy{}.seed;
    auto *orth = app.add_subcommand("orthant", "positive-orthant probability of a covariance matrix");
    orth->add_option("--matrix", orth_matrix, "matrix file: JSON nested arrays or whitespace grid")
        ->required()
        ->check(CLI::ExistingFile);
    orth->add_option("--backend", orth_backend, "auto|closed|childs|genz|equicorr");
    orth->add_option("--samples", orth_samples, "lattice points per shift for the genz backend");
    orth->add_option("--seed", orth_seed, "seed for the genz backend");

    auto *presets = app.add_subcommand("presets", "list built-in presets");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (simulate->parsed())
        {
            if (sim.config.empty() && sim.preset.empty())
                throw CLI::RequiredError("--config or --preset");
            return run_simulate(sim);
        }
        if (est->parsed())
            return run_estimate(est_config, est_obs, est_name, est_backend, est_seed);
        if (orth->parsed())
            return run_orthant(orth_matrix, orth_backend, orth_samples, orth_seed);
        if (presets->parsed())
            return run_presets();
    }
    catch (const CLI::Error &e)
    {
        return app.exit(e);
    }
    catch (const Error &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
