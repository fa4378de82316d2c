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

#ifndef RISBEAM_VERIFY_HPP
#define RISBEAM_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/model.hpp"
#include "risbeam/numerics.hpp"
#include "risbeam/oracle.hpp"
#include "risbeam/solver.hpp"

namespace risbeam::verify {

/// Deliberate defects for exercising the checks.
enum class Fault { none, eta_sign_flip };

struct PropertyResult {
    std::string name;
    bool pass = false;
    double value = 0.0;      // worst observed statistic
    double tolerance = 0.0;
    std::string detail;
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    Fault fault = Fault::none;
    std::size_t identity_instances = 200;
    std::size_t stationarity_instances = 20;
    std::size_t monotone_runs = 10;
};

/// Channel set with i.i.d. CN(0, 1) entries and the given RIS sizes.
inline ChannelSet unit_channel_set(Rng& rng, std::size_t M, std::size_t K, const std::vector<std::size_t>& sizes) {
    ChannelSet set;
    auto fill = [&](std::span<cplx> xs) {
        for (auto& x : xs) x = rng.cscg(1.0);
    };
    set.G1 = CMatrix(sizes.at(0), M);
    fill(set.G1.data());
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        set.inter.emplace_back(sizes[l], sizes[l - 1]);
        fill(set.inter.back().data());
    }
    set.g.assign(sizes.size(), {});
    for (std::size_t l = 0; l < sizes.size(); ++l)
        for (std::size_t k = 0; k < K; ++k) {
            set.g[l].emplace_back(sizes[l]);
            fill(set.g[l].back().span());
        }
    set.users.assign(K, Vec3{});
    return set;
}

namespace detail {

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
}

inline SystemConfig small_config(Rng& rng) {
    SystemConfig cfg;
    cfg.M = pick(rng, 2, 6);
    cfg.K = pick(rng, 1, 3);
    const std::size_t L = pick(rng, 1, 3);
    cfg.ris.clear();
    for (std::size_t l = 0; l < L; ++l)
        cfg.ris.push_back(RisConfig{pick(rng, 1, 3), pick(rng, 2, 3), {1.0 + 8.0 * static_cast<double>(l) / 2.0, 0.0, 3.0}, {}});
    return cfg;
}

}  // namespace detail

/// max |phibar_l A_{l,k} + b_{l,k} - h_k^H| over random unit-variance instances, all l and k.
inline PropertyResult check_reformulation_identity(const SuiteOptions& o) {
    Rng rng(o.seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < o.identity_instances; ++t) {
        const std::size_t M = detail::pick(rng, 1, 4), K = detail::pick(rng, 1, 3), L = detail::pick(rng, 1, 3);
        std::vector<std::size_t> sizes;
        for (std::size_t l = 0; l < L; ++l) sizes.push_back(detail::pick(rng, 1, 8));
        const ChannelSet set = unit_channel_set(rng, M, K, sizes);
        const PhaseSet p = PhaseSet::random(set, rng);
        for (std::size_t k = 0; k < K; ++k) {
            const CVector h = equivalent_channel(set, p, k);
            for (std::size_t l = 0; l < L; ++l) {
                const CVector r = stacked_phases(p, l) * reform_A(set, p, l, k) + reform_b(set, p, l, k);
                worst = std::max(worst, max_abs_diff(r.span(), h.span()));
            }
        }
    }
    return {"reformulation-identity", worst < 1e-10, worst, 1e-10, ""};
}

struct StationarityResults {
    PropertyResult alpha, xi, beam, power, epsilon, phase;
};

/// Finite-difference gradients of every surrogate at its closed-form update, on
/// small geometric instances.
inline StationarityResults check_stationarity(const SuiteOptions& o) {
    Rng rng(o.seed + 1);
    const double tol = 1e-5;
    StationarityResults r{{"alpha-stationarity", true, 0, tol, ""}, {"xi-stationarity", true, 0, tol, ""},
                          {"beam-stationarity", true, 0, tol, ""},  {"power-dual", true, 0, 1e-6, ""},
                          {"epsilon-stationarity", true, 0, tol, ""}, {"phase-stationarity", true, 0, tol, ""}};
    const PhaseRule rule = o.fault == Fault::eta_sign_flip ? PhaseRule::mutant_sign_flip : PhaseRule::exact;
    for (std::size_t t = 0; t < o.stationarity_instances; ++t) {
        const SystemConfig cfg = detail::small_config(rng);
        const ChannelSet set = gen_channel_set(cfg, rng);
        const double noise = cfg.noise_power_w, pt = cfg.tx_power_w;
        PhaseSet p = PhaseSet::random(set, rng);
        auto h = equivalent_channels(set, p);
        CMatrix W = matched_beams(h, pt);

        const auto alpha = update_alpha(h, W, noise);
        r.alpha.value = std::max(r.alpha.value, oracle::check_alpha_stationarity(sinrs(h, W, noise), alpha).max_rel_deviation);
        const auto xi = update_xi(h, W, alpha, noise);
        r.xi.value = std::max(r.xi.value, oracle::check_xi_stationarity(h, W, xi, alpha, noise).max_rel_deviation);
        const auto lam = solve_lambda(h, xi, alpha, pt);
        r.beam.value = std::max(
            r.beam.value, oracle::check_beam_stationarity(h, lam.W, xi, alpha, noise, lam.lambda, pt).max_rel_deviation);
        const double gap = lam.active ? std::abs(lam.power - pt) / pt : std::max(0.0, lam.power - pt) / pt;
        r.power.value = std::max(r.power.value, gap);
        W = lam.W;

        for (std::size_t l = 0; l < set.L(); ++l) {
            const ReformProducts prods = reform_products(set, p, W, l);
            const auto eps = update_epsilon(prods, stacked_phases(p, l), alpha, noise);
            r.epsilon.value = std::max(
                r.epsilon.value, oracle::check_epsilon_stationarity(set, p, W, eps, alpha, noise).max_rel_deviation);
            PhaseCoordinateAscent ascent(prods, p.phi[l], eps, alpha, rule);
            for (std::size_t n = 0; n < set.N(l); ++n) {
                ascent.update(n);
                PhaseSet q = p;
                q.phi[l] = ascent.phases();
                const double dev =
                    oracle::check_phase_element_stationarity(set, q, W, eps, alpha, noise, l, n).max_rel_deviation;
                r.phase.value = std::max(r.phase.value, dev);
            }
            p.phi[l] = ascent.phases();
        }
    }
    for (auto* pr : {&r.alpha, &r.xi, &r.beam, &r.power, &r.epsilon, &r.phase}) pr->pass = pr->value < pr->tolerance;
    r.power.pass = r.power.value <= r.power.tolerance;
    return r;
}

/// Objective trajectories never drop by more than 1e-8 relative; beams stay within
/// budget and phases on the unit circle; f2 right after the alpha update equals the
/// sum rate.
inline std::vector<PropertyResult> check_solver_invariants(const SuiteOptions& o) {
    Rng rng(o.seed + 2);
    PropertyResult mono{"monotone-objective", true, 0.0, 1e-8, ""};
    PropertyResult feas{"feasibility", true, 0.0, 1e-9, ""};
    PropertyResult cons{"alpha-consistency", true, 0.0, 1e-10, ""};
    SolverOptions opts;
    if (o.fault == Fault::eta_sign_flip) opts.phase_rule = PhaseRule::mutant_sign_flip;
    opts.max_iters = 30;
    for (std::size_t t = 0; t < o.monotone_runs; ++t) {
        SystemConfig cfg = detail::small_config(rng);
        const ChannelSet set = gen_channel_set(cfg, rng);
        auto [st, rep] = run(set, cfg, opts, rng);
        for (std::size_t i = 1; i < rep.objective.size(); ++i) {
            const double drop = (rep.objective[i - 1] - rep.objective[i]) / std::abs(rep.objective[i - 1]);
            mono.value = std::max(mono.value, drop);
        }
        feas.value = std::max(feas.value, std::max(0.0, total_power(st.W) / cfg.tx_power_w - 1.0));
        feas.value = std::max(feas.value, st.phases.modulus_error());

        const auto h = equivalent_channels(set, st.phases);
        const auto gamma = sinrs(h, st.W, cfg.noise_power_w);
        const double f2 = dual_objective(update_alpha(h, st.W, cfg.noise_power_w), gamma) / std::log(2.0);
        const double rate = sum_rate(h, st.W, cfg.noise_power_w);
        cons.value = std::max(cons.value, std::abs(f2 - rate) / std::max(std::abs(rate), 1e-300));
    }
    mono.pass = mono.value <= mono.tolerance;
    feas.pass = feas.value <= feas.tolerance;
    cons.pass = cons.value <= cons.tolerance;
    return {mono, feas, cons};
}

/// Every property, in reporting order.
inline std::vector<PropertyResult> run_suite(const SuiteOptions& o) {
    std::vector<PropertyResult> out{check_reformulation_identity(o)};
    const auto s = check_stationarity(o);
    for (const auto& r : {s.alpha, s.xi, s.beam, s.power, s.epsilon, s.phase}) out.push_back(r);
    for (auto& r : check_solver_invariants(o)) out.push_back(std::move(r));
    return out;
}

}  // namespace risbeam::verify

#endif
