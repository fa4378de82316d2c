// SPDX-License-Identifier: Apache-2.0
//
// risbeam: cooperative beamforming for multi-RIS-assisted downlink systems
// Copyright (C) 2026 The risbeam authors
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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risbeam/experiments.hpp"

using namespace risbeam;
using nlohmann::json;

namespace {

ExperimentSpec small_spec(SweepAxis axis, std::vector<double> values, std::size_t R = 4) {
    ExperimentSpec s;
    s.axis = axis;
    s.values = std::move(values);
    s.realizations = R;
    s.seed = 11;
    for (auto& r : s.base.ris) r.nx = r.ny = 3;
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

TEST(Axis, NamesRoundTrip) {
    for (const auto& [axis, name] : kAxisNames) EXPECT_EQ(parse_axis(name), axis);
    EXPECT_THROW(parse_axis("bandwidth"), ConfigError);
}

TEST(SpecPoint, AxisApplication) {
    auto s = small_spec(SweepAxis::snr_db, {10.0});
    EXPECT_NEAR(make_point(s, 10.0).cfg.tx_power_w, 10.0 * s.base.noise_power_w, 1e-28);

    s.axis = SweepAxis::elements_per_ris;
    const auto pe = make_point(s, 36.0);
    for (const auto& r : pe.cfg.ris) EXPECT_EQ(r.elements(), 36u);

    s.axis = SweepAxis::ris1_x_position;
    const auto px = make_point(s, 4.0);
    EXPECT_EQ(px.cfg.ris[0].position.x, 4.0);
    EXPECT_EQ(px.cfg.ris[1].position.x, 16.0);
    EXPECT_THROW(make_point(s, 10.0), ConfigError);

    s.axis = SweepAxis::ris_count;
    const auto pl = make_point(s, 3.0);
    ASSERT_EQ(pl.cfg.ris.size(), 3u);
    EXPECT_EQ(pl.cfg.ris[1].position.x, 5.0);
    EXPECT_EQ(pl.cfg.ris[2].position.x, 9.0);
    EXPECT_EQ(pl.cfg.ris[0].elements(), 20u);
    const auto p6 = make_point(s, 6.0);
    EXPECT_EQ(p6.cfg.ris[0].position.x, 0.0);
    EXPECT_EQ(p6.cfg.ris[5].position.x, 10.0);
    EXPECT_THROW(make_point(s, 7.0), ConfigError);

    s.axis = SweepAxis::element_split;
    const auto ps = make_point(s, 24.0);
    EXPECT_EQ(ps.cfg.ris[0].elements(), 24u);
    EXPECT_EQ(ps.cfg.ris[1].elements(), 36u);
    EXPECT_THROW(make_point(s, 60.0), ConfigError);
    EXPECT_THROW(make_point(s, 2.5), ConfigError);

    s.axis = SweepAxis::quantization_bits;
    EXPECT_EQ(make_point(s, 3.0).bits, 3u);
    EXPECT_THROW(make_point(s, 0.0), ConfigError);

    s.axis = SweepAxis::csi_error_variance;
    EXPECT_THROW(make_point(s, -1.0), ConfigError);
}

TEST(MonteCarlo, SingleRealizationHasZeroSpread) {
    const auto s = small_spec(SweepAxis::snr_db, {140.0}, 1);
    const RunRecord r = monte_carlo(make_point(s, 140.0), Method::proposed);
    EXPECT_EQ(r.std_rate, 0.0);
    EXPECT_EQ(r.realizations, 1u);
    EXPECT_GT(r.mean_rate, 0.0);
    EXPECT_FALSE(r.mean_ms.has_value());
}

TEST(MonteCarlo, DeterministicAcrossRunsAndThreadCounts) {
    auto s = small_spec(SweepAxis::snr_db, {140.0}, 6);
    s.threads = 1;
    const auto a = monte_carlo(make_point(s, 140.0), Method::proposed);
    const auto b = monte_carlo(make_point(s, 140.0), Method::proposed);
    s.threads = 3;
    const auto c = monte_carlo(make_point(s, 140.0), Method::proposed);
    EXPECT_EQ(a.mean_rate, b.mean_rate);
    EXPECT_EQ(a.mean_rate, c.mean_rate);
    EXPECT_EQ(a.std_rate, c.std_rate);
}

TEST(MonteCarlo, ProposedDominatesRandomPhasesOnPairedSeeds) {
    auto s = small_spec(SweepAxis::snr_db, {155.0}, 50);
    s.base.ris = SystemConfig{}.ris;
    const auto pt = make_point(s, 155.0);
    double margin = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
        margin += run_realization(pt, Method::proposed, i).rate - run_realization(pt, Method::random_phase, i).rate;
    EXPECT_GT(margin, 0.0);
}

TEST(MonteCarlo, ZeroCsiErrorMatchesPerfectKnowledge) {
    const auto s = small_spec(SweepAxis::csi_error_variance, {0.0}, 3);
    auto perfect = s;
    perfect.axis = SweepAxis::snr_db;
    const double snr = 10.0 * std::log10(s.base.tx_power_w / s.base.noise_power_w);
    const auto a = monte_carlo(make_point(s, 0.0), Method::proposed);
    const auto b = monte_carlo(make_point(perfect, snr), Method::proposed);
    EXPECT_NEAR(a.mean_rate, b.mean_rate, 1e-9 * a.mean_rate);
}

TEST(MonteCarlo, BaselinesRun) {
    const auto s = small_spec(SweepAxis::snr_db, {150.0}, 2);
    const auto pt = make_point(s, 150.0);
    for (Method m : {Method::random_phase, Method::single_reflection, Method::single_ris}) {
        const auto r = monte_carlo(pt, m);
        EXPECT_GT(r.mean_rate, 0.0) << to_string(m);
        EXPECT_EQ(r.method, std::string(to_string(m)));
    }
}

TEST(Sweep, OneRecordPerValueAndMethod) {
    auto s = small_spec(SweepAxis::quantization_bits, {1.0, 2.0}, 2);
    s.baselines.random_phase = true;
    const auto recs = run_sweep(s);
    ASSERT_EQ(recs.size(), 6u);
    EXPECT_EQ(recs[0].method, "proposed");
    EXPECT_EQ(recs[1].method, "continuous");
    EXPECT_EQ(recs[2].method, "random-phase");
    EXPECT_EQ(recs[3].axis_value, 2.0);
    EXPECT_EQ(recs[0].axis, "quantization-bits");
    EXPECT_EQ(recs[1].mean_rate, recs[4].mean_rate);
}

TEST(Sweep, InvalidSpecs) {
    auto s = small_spec(SweepAxis::snr_db, {}, 2);
    EXPECT_THROW(run_sweep(s), ConfigError);
    s.values = {1.0};
    s.realizations = 0;
    EXPECT_THROW(run_sweep(s), ConfigError);
}

TEST(Csv, HeaderOnlyAndSingleRecord) {
    EXPECT_EQ(csv_text({}), "axis,axis_value,method,mean_rate,std_rate,realizations,mean_iters,mean_ms\n");
    RunRecord r{"snr-dB", 5.0, "proposed", 12.3456789, 0.5, 100, 7.25, std::nullopt};
    const std::string t = csv_text({r});
    EXPECT_EQ(t, std::string(kCsvHeader) + "\nsnr-dB,5,proposed,12.3457,0.5,100,7.25,\n");
    r.mean_ms = 1.5;
    EXPECT_EQ(split(csv_text({r}).substr(kCsvHeader.size() + 1), ',').back(), "1.5\n");
}

TEST(Csv, ParseBackRecoversSixDigits) {
    std::vector<RunRecord> recs;
    Rng rng(5);
    for (int i = 0; i < 20; ++i)
        recs.push_back({"elements-per-RIS", double(i), "proposed", rng.uniform(0, 100), rng.uniform(0, 5), 10,
                        rng.uniform(1, 50), rng.uniform(0, 3)});
    const std::string path = ::testing::TempDir() + "/roundtrip.csv";
    write_csv(recs, path);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, kCsvHeader);
    for (const auto& r : recs) {
        ASSERT_TRUE(std::getline(f, line));
        const auto cells = split(line, ',');
        ASSERT_EQ(cells.size(), 8u);
        EXPECT_NEAR(std::stod(cells[3]), r.mean_rate, 5e-6 * r.mean_rate);
        EXPECT_NEAR(std::stod(cells[4]), r.std_rate, 5e-6 * r.std_rate);
        EXPECT_NEAR(std::stod(cells[7]), *r.mean_ms, 5e-6 * *r.mean_ms);
    }
    EXPECT_FALSE(std::getline(f, line));
}

TEST(Csv, UnwritablePath) { EXPECT_THROW(write_csv({}, "/nonexistent-dir/x.csv"), IoError); }

TEST(Config, ParsesEveryField) {
    const json j = json::parse(R"({
        "base": {"M": 6, "K": 2, "ris": [{"nx": 2, "ny": 3, "position": [1, 0, 3]}],
                 "tx_power_dbw": 20, "noise_power_dbm": -100, "rician_factor": "inf",
                 "user_center": [12, 0, 0], "user_radius": 4},
        "axis": "element-split-N1", "values": [10, 20], "realizations": 7, "seed": 99,
        "solver": {"threshold": 1e-4, "max_iters": 30, "phase_rule": "exact"},
        "baselines": {"random_phase": true, "single_ris": true},
        "single_ris_position": [4, 0, 3], "element_total": 40, "csi_error_scale": "absolute",
        "record_timing": true, "threads": 2})");
    const ExperimentSpec s = parse_spec(j);
    EXPECT_EQ(s.base.M, 6u);
    EXPECT_EQ(s.base.ris.size(), 1u);
    EXPECT_EQ(s.base.ris[0].ny, 3u);
    EXPECT_NEAR(s.base.tx_power_w, 100.0, 1e-12);
    EXPECT_NEAR(s.base.noise_power_w, 1e-13, 1e-25);
    EXPECT_TRUE(std::isinf(s.base.rician_factor));
    EXPECT_EQ(s.axis, SweepAxis::element_split);
    EXPECT_EQ(s.values.size(), 2u);
    EXPECT_EQ(s.realizations, 7u);
    EXPECT_EQ(s.seed, 99u);
    EXPECT_EQ(s.solver.max_iters, 30u);
    EXPECT_TRUE(s.baselines.random_phase);
    EXPECT_FALSE(s.baselines.single_reflection);
    EXPECT_EQ(s.element_total, 40u);
    EXPECT_EQ(s.csi_error_scale, ErrorScale::absolute);
    EXPECT_TRUE(s.record_timing);
}

TEST(Config, ErrorsNameTheField) {
    auto expect_msg = [](const char* text, const std::string& needle) {
        try {
            parse_spec(json::parse(text));
            ADD_FAILURE() << "no error for " << text;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_msg(R"({"axis": "bandwidth", "values": [1]})", "axis");
    expect_msg(R"({"axis": "snr-dB"})", "values");
    expect_msg(R"({"axis": "snr-dB", "values": [1], "realizatons": 3})", "realizatons");
    expect_msg(R"({"axis": "snr-dB", "values": [1], "base": {"M": -1}})", "base.M");
    expect_msg(R"({"axis": "snr-dB", "values": [1], "solver": {"threshold": "x"}})", "solver.threshold");
    expect_msg(R"({"axis": "snr-dB", "values": [1], "base": {"ris": [{"position": [1, 2]}]}})", "base.ris.0.position");
    expect_msg(R"({"axis": "snr-dB", "values": [1], "realizations": 0})", "realizations");
}

TEST(Config, DottedOverrides) {
    json j = json::parse(R"({"axis": "snr-dB", "values": [1], "base": {"ris": [{"nx": 2}, {"nx": 3}]}})");
    apply_overrides(j, {"solver.max_iters=5", "base.ris.1.nx=7", "axis=quantization-bits", "values=[1,2,3]"});
    const auto s = parse_spec(j);
    EXPECT_EQ(s.solver.max_iters, 5u);
    EXPECT_EQ(s.base.ris[1].nx, 7u);
    EXPECT_EQ(s.axis, SweepAxis::quantization_bits);
    EXPECT_EQ(s.values.size(), 3u);
    EXPECT_THROW(apply_overrides(j, {"novalue"}), ConfigError);
    EXPECT_THROW(apply_overrides(j, {"base.ris.9.nx=1"}), ConfigError);
    EXPECT_THROW(apply_overrides(j, {"base.ris.x.nx=1"}), ConfigError);
}

TEST(Config, LoadFromFile) {
    const std::string path = ::testing::TempDir() + "/spec.json";
    {
        std::ofstream f(path);
        f << R"({"axis": "snr-dB", "values": [0, 10], "realizations": 3})";
    }
    const auto s = load_spec(path, {"seed=5"});
    EXPECT_EQ(s.seed, 5u);
    EXPECT_EQ(s.realizations, 3u);
    EXPECT_THROW(load_spec(path + ".missing"), ConfigError);
    {
        std::ofstream f(path);
        f << "{not json";
    }
    EXPECT_THROW(load_spec(path), ConfigError);
}
