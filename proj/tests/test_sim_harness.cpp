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


#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <numbers>
#include <sstream>

using namespace onebit;
using onebit::test::error_code_of;

namespace
{

SweepConfig small_sweep()
{
    SweepConfig s;
    s.scenario.id = "simo3";
    s.scenario.n_rx = 3;
    s.scenario.covariance = CovExponentialRx{0.5};
    s.snr_grid_db = {-5.0, 5.0, 15.0};
    s.trials = 200;
    s.estimators = {EstimatorKind::Simo3Closed, EstimatorKind::Blmmse};
    s.master_seed = 99;
    return s;
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

TEST_CASE("SNR to noise variance", "[sim]")
{
    ScenarioConfig ev;
    ev.n_tx = ev.tau = 4;
    ev.covariance = CovExponentialTx{0.5};
    ev.pilots = PilotEvdMatched{1.0};
    // tr(SS^H) = eta * N_T and tau = N_T, so sigma2 = eta / (N_T * snr)
    for (double db : {-10.0, 0.0, 7.0, 30.0})
    {
        const double want = std::pow(10.0, -db / 10.0) / 4.0;
        CHECK(std::abs(snr_to_noise(ev, db) - want) < 1e-14 * want);
    }

    ScenarioConfig single;
    single.pilots = PilotSingleSymbol{cdouble(1.0, 1.0)};
    CHECK(std::abs(snr_to_noise(single, 10.0) - 0.2) < 1e-15);

    ScenarioConfig vec;
    vec.tau = 16;
    vec.pilots = PilotHadamardColumn{1, 1.0};
    CHECK(std::abs(snr_to_noise(vec, 0.0) - 1.0) < 1e-15);

    ScenarioConfig zero;
    zero.pilots = PilotSingleSymbol{cdouble(0.0, 0.0)};
    CHECK(error_code_of([&] { snr_to_noise(zero, 0.0); }) == ErrorCode::ZeroPilotEnergy);
}

TEST_CASE("sweep validation", "[sim]")
{
    SweepConfig s = small_sweep();
    s.trials = 99;
    CHECK(error_code_of([&] { validate(s); }) == ErrorCode::InvalidConfig);
    s = small_sweep();
    s.snr_grid_db = {0.0, 0.0};
    CHECK(error_code_of([&] { validate(s); }) == ErrorCode::InvalidConfig);
    s.snr_grid_db.clear();
    CHECK(error_code_of([&] { validate(s); }) == ErrorCode::InvalidConfig);
    s = small_sweep();
    s.estimators = {EstimatorKind::SimoEquicorr}; // exponential is not equicorrelated
    try
    {
        run_sweep(s, 1);
        FAIL("expected an error");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("simo3") != std::string::npos);
        CHECK(std::string(e.what()).find("SimoEquicorr") != std::string::npos);
    }
}

TEST_CASE("trials are reproducible", "[sim]")
{
    const SweepConfig s = small_sweep();
    const double a = run_trial(s.scenario, 0.3, EstimatorKind::Simo3Closed, 17, 5);
    const double b = run_trial(s.scenario, 0.3, EstimatorKind::Simo3Closed, 17, 5);
    CHECK(a == b);
    CHECK(run_trial(s.scenario, 0.3, EstimatorKind::Simo3Closed, 18, 5) != a);
}

TEST_CASE("sweep output does not depend on the thread count", "[sim][property]")
{
    SweepConfig s = small_sweep();
    s.estimators.push_back(EstimatorKind::MmseRealOmega);
    s.orthant_policy.choice = BackendChoice::Genz;
    s.orthant_policy.genz_points = 200;
    const std::vector<MseRecord> one = run_sweep(s, 1);
    for (unsigned threads : {2u, 3u, 8u})
    {
        const std::vector<MseRecord> many = run_sweep(s, threads);
        REQUIRE(many.size() == one.size());
        for (std::size_t i = 0; i < one.size(); ++i)
        {
            CHECK(many[i].estimator == one[i].estimator);
            CHECK(many[i].mse_per_antenna == one[i].mse_per_antenna);
            CHECK(many[i].std_error == one[i].std_error);
        }
    }
}

TEST_CASE("records are sorted and carry theory for linear estimators", "[sim]")
{
    const std::vector<MseRecord> rec = run_sweep(small_sweep(), 1);
    REQUIRE(rec.size() == 6);
    CHECK(rec[0].estimator == "Blmmse");
    CHECK(rec[3].estimator == "Simo3Closed");
    for (std::size_t i = 0; i < rec.size(); ++i)
    {
        CHECK(rec[i].scenario_id == "simo3");
        CHECK(rec[i].trials == 200);
        CHECK(rec[i].theoretical_mse.has_value() == (rec[i].estimator == "Blmmse"));
        if (i % 3)
            CHECK(rec[i].snr_db > rec[i - 1].snr_db);
    }
}

TEST_CASE("CSV schema", "[sim][csv]")
{
    const std::vector<MseRecord> rec = run_sweep(small_sweep(), 1);
    std::ostringstream os;
    write_csv(os, rec);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "scenario_id,estimator,snr_db,trials,mse_per_antenna,stderr,theoretical_mse");
    std::size_t rows = 0;
    while (std::getline(is, line))
    {
        const auto cells = split(line);
        REQUIRE(cells.size() == 7);
        CHECK(cells[0] == "simo3");
        CHECK(std::stod(cells[4]) > 0.0);
        CHECK(std::stod(cells[5]) > 0.0);
        CHECK(std::stoul(cells[3]) == 200);
        if (cells[1] == "Blmmse")
            CHECK(std::stod(cells[6]) > 0.0);
        else
            CHECK(cells[6].empty());
        CHECK(line.find(';') == std::string::npos);
        ++rows;
    }
    CHECK(rows == rec.size());
}

TEST_CASE("CSV file writes are all-or-nothing", "[sim][csv]")
{
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "onebit_csv_test";
    std::filesystem::create_directories(dir);
    const std::string good = (dir / "out.csv").string();
    write_csv_file(good, run_sweep(small_sweep(), 1));
    CHECK(std::filesystem::exists(good));
    CHECK_FALSE(std::filesystem::exists(good + ".tmp"));
    const std::string bad = (dir / "missing" / "out.csv").string();
    CHECK(error_code_of([&] { write_csv_file(bad, {}); }) == ErrorCode::Io);
    CHECK_FALSE(std::filesystem::exists(bad));
    std::filesystem::remove_all(dir);
}

TEST_CASE("presets", "[sim][preset]")
{
    CHECK(preset_names().size() == 5);
    for (const std::string &name : preset_names())
        for (const SweepConfig &s : preset(name))
        {
            CHECK_NOTHROW(validate(s));
            CHECK(s.trials == 10000);
            CHECK(s.snr_grid_db.size() == 21);
            CHECK(s.snr_grid_db.front() == -10.0);
            CHECK(s.snr_grid_db.back() == 30.0);
            CHECK(s.estimators.front() == EstimatorKind::Blmmse);
            const LinearModel m = make_linear_model(s.scenario);
            for (EstimatorKind k : s.estimators)
                CHECK(is_applicable(k, m, s.orthant_policy));
        }

    for (const SweepConfig &s : preset("fig1"))
    {
        CHECK(s.scenario.n_rx == 1);
        CHECK(std::holds_alternative<PilotEvdMatched>(s.scenario.pilots));
        CHECK(std::find(s.estimators.begin(), s.estimators.end(), EstimatorKind::TxCorrEvd) != s.estimators.end());
    }
    for (const SweepConfig &s : preset("fig3"))
        CHECK(std::find(s.estimators.begin(), s.estimators.end(), EstimatorKind::SimoEquicorr) != s.estimators.end());
    for (const SweepConfig &s : preset("fig5"))
    {
        CHECK(s.scenario.n_tx == 1);
        CHECK(s.scenario.n_rx == 1);
        CHECK(std::holds_alternative<PilotHadamardColumn>(s.scenario.pilots));
        CHECK(make_linear_model(s.scenario).s.imag().cwiseAbs().maxCoeff() == 0.0);
    }

    try
    {
        preset("fig9");
        FAIL("expected an error");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::UnknownPreset);
        for (const std::string &name : preset_names())
            CHECK(std::string(e.what()).find(name) != std::string::npos);
    }
}

TEST_CASE("fig1 theoretical curve is the EVD closed form", "[sim][preset]")
{
    for (SweepConfig s : preset("fig1"))
    {
        s.trials = 100;
        s.snr_grid_db = {-10.0, 10.0, 30.0};
        s.estimators = {EstimatorKind::Blmmse};
        const std::vector<MseRecord> rec = run_sweep(s, 1);
        const auto sigma_tx = tx_covariance(s.scenario);
        REQUIRE(sigma_tx.has_value());
        for (const MseRecord &r : rec)
        {
            REQUIRE(r.theoretical_mse.has_value());
            const double want = tx_corr_evd_mse(*sigma_tx, 1.0, snr_to_noise(s.scenario, r.snr_db));
            CHECK(std::abs(*r.theoretical_mse - want) < 1e-10);
        }
    }
}

TEST_CASE("high-SNR white unitary error concentrates at the floor", "[sim][statistics]")
{
    SweepConfig s;
    s.scenario.id = "white";
    s.scenario.n_tx = s.scenario.tau = 2;
    s.scenario.n_rx = 2;
    s.scenario.pilots = PilotUnitaryScaled{1.0};
    s.snr_grid_db = {90.0};
    s.trials = 5000;
    s.estimators = {EstimatorKind::WhiteUnitary};
    const MseRecord r = run_sweep(s, 1).front();
    const double floor = 1.0 - 2.0 / std::numbers::pi;
    CHECK(std::abs(r.mse_per_antenna - floor) < 4.0 * r.std_error);
    CHECK(std::abs(*r.theoretical_mse - floor) < 1e-6);
}
