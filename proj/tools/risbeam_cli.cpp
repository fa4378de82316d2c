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

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risbeam/experiments.hpp"
#include "risbeam/oracle.hpp"
#include "risbeam/solver.hpp"
#include "risbeam/verify.hpp"

namespace {

using namespace risbeam;

enum Exit : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kIoError = 3 };

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::optional<std::size_t> realizations;
};

ExperimentSpec load(const Common& c, bool require_axis) {
    ExperimentSpec s = load_spec(c.config, c.overrides, require_axis);
    if (c.seed) s.seed = *c.seed;
    if (c.realizations) {
        if (*c.realizations < 1) throw ConfigError("--realizations: must be >= 1");
        s.realizations = *c.realizations;
    }
    return s;
}

int cmd_verify(std::uint64_t seed, const std::string& fault) {
    verify::SuiteOptions o;
    o.seed = seed;
    if (fault == "eta-sign-flip") {
        o.fault = verify::Fault::eta_sign_flip;
    } else if (!fault.empty()) {
        throw ConfigError("--inject-fault: unknown fault '" + fault + "'");
    }
    const auto results = verify::run_suite(o);
    std::printf("%-24s %-6s %-12s %s\n", "property", "result", "worst", "tolerance");
    const verify::PropertyResult* first_fail = nullptr;
    for (const auto& r : results) {
        std::printf("%-24s %-6s %-12.3e %.1e\n", r.name.c_str(), r.pass ? "pass" : "FAIL", r.value, r.tolerance);
        if (!r.pass && !first_fail) first_fail = &r;
    }
    if (first_fail) {
        std::printf("first failing property: %s\n", first_fail->name.c_str());
        return kVerifyFailed;
    }
    std::printf("all %zu properties pass\n", results.size());
    return kOk;
}

int cmd_convergence(const Common& c) {
    const ExperimentSpec s = load(c, false);
    Rng rng(s.seed);
    const ChannelSet set = gen_channel_set(s.base, rng);
    auto [st, rep] = run(set, s.base, s.solver, rng);
    write_text(c.out, convergence_csv_text(rep.objective));
    std::printf("iterations: %zu (%s)\n", rep.iterations, to_string(rep.cause));
    std::printf("sum rate: %.6g bits/s/Hz (initial %.6g)\n", rep.sum_rate, rep.initial_rate);
    std::printf("wrote %s\n", c.out.c_str());
    return kOk;
}

int cmd_sweep(const Common& c) {
    const ExperimentSpec s = load(c, true);
    const auto records = run_sweep(s);
    write_csv(records, c.out);
    for (const auto& r : records)
        std::printf("%s=%-10g %-18s %.4f +/- %.4f\n", r.axis.c_str(), r.axis_value, r.method.c_str(), r.mean_rate,
                    r.std_rate);
    std::printf("wrote %zu records to %s\n", records.size(), c.out.c_str());
    return kOk;
}

int cmd_oracle_check(const Common& c, unsigned bits) {
    const ExperimentSpec s = load(c, false);
    const LinkBudget budget{s.base.tx_power_w, s.base.noise_power_w};
    std::ostringstream csv;
    csv << "instance,continuous_rate,oracle_rate,quantized_rate\n";
    std::size_t violations = 0;
    for (std::size_t i = 0; i < s.realizations; ++i) {
        Rng rng(s.seed + i);
        const ChannelSet set = gen_channel_set(s.base, rng);
        auto [st, rep] = run(set, budget, s.solver, rng);
        const auto best = oracle::exhaustive_discrete_search(set, budget, bits);
        const PhaseSet q = quantize_phases(st.phases, bits);
        const auto hq = equivalent_channels(set, q);
        const double quantized = sum_rate(hq, matched_beams(hq, budget.tx_power), budget.noise_power);
        const bool ok = rep.sum_rate >= best.rate;
        if (!ok) ++violations;
        std::printf("instance %3zu  continuous %.6g  oracle %.6g  quantized %.6g  %s\n", i, rep.sum_rate, best.rate,
                    quantized, ok ? "ok" : "BELOW ORACLE");
        csv << i << ',' << format_g6(rep.sum_rate) << ',' << format_g6(best.rate) << ',' << format_g6(quantized) << '\n';
    }
    if (!c.out.empty()) write_text(c.out, csv.str());
    std::printf("%zu of %zu instances below the exhaustive optimum\n", violations, s.realizations);
    return violations == 0 ? kOk : kVerifyFailed;
}

int cmd_scaling(const Common& c, const std::vector<std::size_t>& elements) {
    const ExperimentSpec s = load(c, false);
    std::ostringstream csv;
    csv << "mode,elements,received_power\n";
    for (auto mode : {oracle::ReflectionMode::single, oracle::ReflectionMode::double_reflection}) {
        const char* name = mode == oracle::ReflectionMode::single ? "single" : "double";
        const auto r = oracle::scaling_probe(s.base, elements, mode);
        for (std::size_t i = 0; i < r.elements.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", r.received_power[i]);
            csv << name << ',' << r.elements[i] << ',' << buf << '\n';
        }
        std::printf("%-7s reflection: log-log slope %.4f\n", name, r.slope);
    }
    if (!c.out.empty()) write_text(c.out, csv.str());
    return kOk;
}

void add_common(CLI::App* sub, Common& c, bool needs_out) {
    sub->add_option("--config", c.config, "JSON experiment spec")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", c.out, "output CSV path");
    if (needs_out) out->required();
    sub->add_option("--seed", c.seed, "seed base (overrides the spec)");
    sub->add_option("--set", c.overrides, "dotted.key=value override, repeatable")->allow_extra_args(false);
    sub->add_option("--realizations", c.realizations, "realization count (overrides the spec)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative beamforming for multi-hop RIS links"};
    app.require_subcommand(1);

    std::uint64_t verify_seed = 1;
    std::string fault;
    auto* verify_cmd = app.add_subcommand("verify", "run the property suite");
    verify_cmd->add_option("--seed", verify_seed, "seed for the random instances");
    verify_cmd->add_option("--inject-fault", fault)->group("");

    Common conv, sweep, orc, scal;
    auto* conv_cmd = app.add_subcommand("convergence", "objective trajectory of one realization");
    add_common(conv_cmd, conv, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep to CSV");
    add_common(sweep_cmd, sweep, true);
    unsigned bits = 3;
    auto* orc_cmd = app.add_subcommand("oracle-check", "continuous solution versus exhaustive discrete search");
    add_common(orc_cmd, orc, false);
    orc_cmd->add_option("--bits", bits, "phase quantization bits of the search")->check(CLI::Range(1u, 8u));
    std::vector<std::size_t> elements{16, 36, 64, 100};
    auto* scal_cmd = app.add_subcommand("scaling", "array-gain exponent of single and double reflection");
    add_common(scal_cmd, scal, false);
    scal_cmd->add_option("--elements", elements, "total element counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*verify_cmd) return cmd_verify(verify_seed, fault);
        if (*conv_cmd) return cmd_convergence(conv);
        if (*sweep_cmd) return cmd_sweep(sweep);
        if (*orc_cmd) return cmd_oracle_check(orc, bits);
        if (*scal_cmd) return cmd_scaling(scal, elements);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kVerifyFailed;
    }
    return kConfigError;
}
