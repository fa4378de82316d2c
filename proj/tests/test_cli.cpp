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

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Outcome {
    int code = -1;
    std::string output;
};

Outcome cli(const std::string& args) {
    const std::string cmd = std::string(RISBEAM_CLI_PATH) + ' ' + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {};
    Outcome o;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) o.output.append(buf, n);
    const int status = pclose(p);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

std::string config(const char* name) { return std::string(RISBEAM_CONFIG_DIR) + '/' + name; }

std::string tmp(const std::string& name) { return ::testing::TempDir() + "/risbeam_cli_" + name; }

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, VerifyPasses) {
    const auto o = cli("verify");
    EXPECT_EQ(o.code, 0) << o.output;
    EXPECT_NE(o.output.find("all 10 properties pass"), std::string::npos);
}

TEST(Cli, VerifyReportsInjectedFault) {
    const auto o = cli("verify --inject-fault eta-sign-flip");
    EXPECT_EQ(o.code, 1) << o.output;
    EXPECT_NE(o.output.find("first failing property: phase-stationarity"), std::string::npos) << o.output;
}

TEST(Cli, VerifyIsReproducible) {
    const auto a = cli("verify --seed 7");
    const auto b = cli("verify --seed 7");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.output, b.output);
}

TEST(Cli, ConvergenceTrajectory) {
    const std::string out = tmp("conv.csv");
    const auto o = cli("convergence --config " + config("reference.json") + " --out " + out);
    ASSERT_EQ(o.code, 0) << o.output;
    const auto rows = lines(slurp(out));
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows[0], "iter,objective");
    EXPECT_LE(rows.size() - 1, 50u);
    double prev = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto comma = rows[i].find(',');
        EXPECT_EQ(std::stoul(rows[i].substr(0, comma)), i);
        const double v = std::stod(rows[i].substr(comma + 1));
        EXPECT_GE(v, prev - 1e-8 * std::abs(prev));
        prev = v;
    }
}

TEST(Cli, ConvergenceOverride) {
    const std::string out = tmp("conv1.csv");
    const auto o = cli("convergence --config " + config("reference.json") + " --out " + out + " --set solver.max_iters=1");
    ASSERT_EQ(o.code, 0) << o.output;
    EXPECT_EQ(lines(slurp(out)).size(), 2u);
}

TEST(Cli, MinimalSweep) {
    const std::string out = tmp("min.csv");
    const auto o = cli("sweep --config " + config("minimal.json") + " --out " + out);
    ASSERT_EQ(o.code, 0) << o.output;
    const auto rows = lines(slurp(out));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "axis,axis_value,method,mean_rate,std_rate,realizations,mean_iters,mean_ms");
    EXPECT_EQ(rows[1].rfind("snr-dB,10,proposed,", 0), 0u) << rows[1];
}

TEST(Cli, SweepIsByteIdentical) {
    const std::string a = tmp("det_a.csv"), b = tmp("det_b.csv");
    const std::string args = "sweep --config " + config("quantization.json") + " --realizations 3 --set values=[1,4]";
    ASSERT_EQ(cli(args + " --out " + a).code, 0);
    ASSERT_EQ(cli(args + " --out " + b).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(lines(slurp(a)).size(), 5u);
}

TEST(Cli, UnknownAxisIsAConfigError) {
    const auto o = cli("sweep --config " + config("minimal.json") + " --out " + tmp("x.csv") + " --set axis=bandwidth");
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.output.find("axis"), std::string::npos) << o.output;
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("sweep --out " + tmp("y.csv")).code, 2);
    EXPECT_EQ(cli("sweep --config /nonexistent.json --out " + tmp("y.csv")).code, 2);
    EXPECT_EQ(cli("sweep --config " + config("minimal.json") + " --out " + tmp("y.csv") + " --set bogus").code, 2);
    EXPECT_EQ(cli("sweep --config " + config("minimal.json") + " --out " + tmp("y.csv") + " --realizations 0").code, 2);
}

TEST(Cli, UnwritableOutputIsAnIoError) {
    const auto o = cli("sweep --config " + config("minimal.json") + " --out /nonexistent-dir/out.csv");
    EXPECT_EQ(o.code, 3) << o.output;
}

TEST(Cli, OracleCheckReportsEveryInstance) {
    const std::string out = tmp("oracle.csv");
    const auto o = cli("oracle-check --config " + config("oracle_tiny.json") + " --realizations 4 --out " + out);
    const bool below = o.output.find("BELOW ORACLE") != std::string::npos;
    EXPECT_EQ(o.code, below ? 1 : 0) << o.output;
    const auto rows = lines(slurp(out));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "instance,continuous_rate,oracle_rate,quantized_rate");
}

TEST(Cli, OracleCheckRejectsBadBits) {
    EXPECT_EQ(cli("oracle-check --config " + config("oracle_tiny.json") + " --bits 0").code, 2);
}

TEST(Cli, ScalingSlopes) {
    const std::string out = tmp("scaling.csv");
    const auto o = cli("scaling --config " + config("reference.json") + " --out " + out);
    ASSERT_EQ(o.code, 0) << o.output;
    EXPECT_NE(o.output.find("single  reflection: log-log slope 2.0"), std::string::npos) << o.output;
    EXPECT_NE(o.output.find("double  reflection: log-log slope 4.0"), std::string::npos) << o.output;
    EXPECT_EQ(lines(slurp(out)).size(), 9u);
}
