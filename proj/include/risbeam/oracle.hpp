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

#ifndef RISBEAM_ORACLE_HPP
#define RISBEAM_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/model.hpp"
#include "risbeam/numerics.hpp"
#include "risbeam/solver.hpp"

// Independent verifiers. Objectives here are evaluated straight from the
// equivalent channel, never through the reformulated products or the closed
// forms they check.

namespace risbeam::oracle {

struct GradientCheckReport {
    double max_rel_deviation = 0.0;
    double step = 0.0;
};

using RealObjective = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
inline std::vector<double> fd_gradient(const RealObjective& f, std::span<const double> x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = xp[i];
        xp[i] = x0 + h;
        const double fp = f(xp);
        xp[i] = x0 - h;
        const double fm = f(xp);
        xp[i] = x0;
        if (!std::isfinite(fp) || !std::isfinite(fm)) throw std::domain_error("fd_gradient: non-finite objective");
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline constexpr double kFdStep = 1e-5;

namespace detail {

/// Gradient in unit-scaled coordinates (x = x0 + scale * u), normalised by |f(x0)|.
inline GradientCheckReport scaled_check(const RealObjective& f, const std::vector<double>& x0,
                                        const std::vector<double>& scale) {
    auto fu = [&](std::span<const double> u) {
        std::vector<double> x(x0.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + scale[i] * u[i];
        return f(x);
    };
    const std::vector<double> zero(x0.size(), 0.0);
    const auto g = fd_gradient(fu, zero, kFdStep);
    const double mag = std::max(std::abs(f(x0)), 1e-300);
    double dev = 0.0;
    for (double gi : g) dev = std::max(dev, std::abs(gi) / mag);
    return {dev, kFdStep};
}

inline std::vector<double> to_real(const std::vector<cplx>& z) {
    std::vector<double> x;
    for (const auto& v : z) {
        x.push_back(v.real());
        x.push_back(v.imag());
    }
    return x;
}

inline std::vector<cplx> to_complex(std::span<const double> x) {
    std::vector<cplx> z(x.size() / 2);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = {x[2 * i], x[2 * i + 1]};
    return z;
}

inline double block_scale(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s > 0.0 ? s : 1.0;
}

inline std::vector<double> pairwise_scale(const std::vector<cplx>& z) {
    std::vector<double> s;
    for (const auto& v : z) {
        const double a = std::abs(v) > 0.0 ? std::abs(v) : 1.0;
        s.push_back(a);
        s.push_back(a);
    }
    return s;
}

inline cplx row_times_col(const CVector& h, const CMatrix& W, std::size_t i) {
    cplx s = 0.0;
    for (std::size_t m = 0; m < h.size(); ++m) s += h[m] * W(m, i);
    return s;
}

/// sum_k 2 sqrt(1+a_k) Re{aux_k^* h_k^H w_k} - |aux_k|^2 (sum_i |h_k^H w_i|^2 + noise)
inline double quadratic_transform(const std::vector<CVector>& h, const CMatrix& W, const std::vector<cplx>& aux,
                                  const std::vector<double>& alpha, double noise) {
    double f = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        double denom = noise;
        for (std::size_t i = 0; i < W.cols(); ++i) denom += std::norm(row_times_col(h[k], W, i));
        f += 2.0 * std::sqrt(1.0 + alpha[k]) * (std::conj(aux[k]) * row_times_col(h[k], W, k)).real() -
             std::norm(aux[k]) * denom;
    }
    return f;
}

}  // namespace detail

/// Stationarity of the log-decoupled objective in alpha at alpha = gamma.
/// Written as sum ln(1+a) + (g - a)/(1+g), which avoids the a - (1+a)g/(1+g) cancellation.
inline GradientCheckReport check_alpha_stationarity(const std::vector<double>& gamma, const std::vector<double>& alpha) {
    auto f = [&](std::span<const double> a) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::log1p(a[k]) + (gamma[k] - a[k]) / (1.0 + gamma[k]);
        return s;
    };
    std::vector<double> scale;
    for (double a : alpha) scale.push_back(a > 0.0 ? a : 1.0);
    return detail::scaled_check(f, alpha, scale);
}

/// Stationarity of the beamformer quadratic transform in xi at fixed W.
inline GradientCheckReport check_xi_stationarity(const std::vector<CVector>& h, const CMatrix& W,
                                                 const std::vector<cplx>& xi, const std::vector<double>& alpha,
                                                 double noise) {
    auto f = [&](std::span<const double> x) {
        return detail::quadratic_transform(h, W, detail::to_complex(x), alpha, noise);
    };
    return detail::scaled_check(f, detail::to_real(xi), detail::pairwise_scale(xi));
}

/// Stationarity of the power-constrained Lagrangian in W at fixed xi and lambda.
inline GradientCheckReport check_beam_stationarity(const std::vector<CVector>& h, const CMatrix& W,
                                                   const std::vector<cplx>& xi, const std::vector<double>& alpha,
                                                   double noise, double lambda, double tx_power) {
    const std::vector<cplx> w0(W.data().begin(), W.data().end());
    auto f = [&](std::span<const double> x) {
        const auto w = detail::to_complex(x);
        CMatrix Wx(W.rows(), W.cols());
        std::copy(w.begin(), w.end(), Wx.data().begin());
        return detail::quadratic_transform(h, Wx, xi, alpha, noise) - lambda * (norm_sq(Wx.data()) - tx_power);
    };
    const auto x0 = detail::to_real(w0);
    const std::vector<double> scale(x0.size(), detail::block_scale(x0));
    return detail::scaled_check(f, x0, scale);
}

/// Stationarity of the phase quadratic transform of RIS l in epsilon.
inline GradientCheckReport check_epsilon_stationarity(const ChannelSet& set, const PhaseSet& phases, const CMatrix& W,
                                                      const std::vector<cplx>& eps, const std::vector<double>& alpha,
                                                      double noise) {
    const auto h = equivalent_channels(set, phases);
    auto f = [&](std::span<const double> x) {
        return detail::quadratic_transform(h, W, detail::to_complex(x), alpha, noise);
    };
    return detail::scaled_check(f, detail::to_real(eps), detail::pairwise_scale(eps));
}

/// Derivative of the phase quadratic transform with respect to the angle of
/// element n of RIS l (all other phases fixed).
inline GradientCheckReport check_phase_element_stationarity(const ChannelSet& set, const PhaseSet& phases,
                                                            const CMatrix& W, const std::vector<cplx>& eps,
                                                            const std::vector<double>& alpha, double noise,
                                                            std::size_t l, std::size_t n) {
    auto f = [&](std::span<const double> t) {
        PhaseSet p = phases;
        p.phi[l][n] = phases.phi[l][n] * std::polar(1.0, t[0]);
        return detail::quadratic_transform(equivalent_channels(set, p), W, eps, alpha, noise);
    };
    return detail::scaled_check(f, {0.0}, {1.0});
}

/// Value of the phase quadratic transform, from the equivalent channel.
inline double phase_transform_value(const ChannelSet& set, const PhaseSet& phases, const CMatrix& W,
                                    const std::vector<cplx>& eps, const std::vector<double>& alpha, double noise) {
    return detail::quadratic_transform(equivalent_channels(set, phases), W, eps, alpha, noise);
}

// ---- exhaustive discrete search ---------------------------------------------------

struct DiscreteSearchResult {
    PhaseSet phases;
    double rate = 0.0;
    std::uint64_t candidates = 0;
};

enum class BeamRule { mrt };

inline constexpr std::uint64_t kMaxSearchSpace = 1'000'000;

/// Globally best discrete-phase sum rate under MRT beams (equal power split).
/// Ties resolve to the lexicographically smallest phase-index tuple
/// (element 0 of RIS 0 most significant), independent of enumeration order.
inline DiscreteSearchResult exhaustive_discrete_search(const ChannelSet& set, const LinkBudget& budget, unsigned bits,
                                                       BeamRule rule = BeamRule::mrt, bool reverse_order = false,
                                                       unsigned threads = 0) {
    (void)rule;
    if (bits == 0) throw std::invalid_argument("exhaustive_discrete_search: bits must be >= 1");
    set.check_consistent();
    const std::uint64_t B = std::uint64_t{1} << bits;
    std::size_t total_n = 0;
    for (std::size_t l = 0; l < set.L(); ++l) total_n += set.N(l);
    std::uint64_t space = 1;
    for (std::size_t i = 0; i < total_n; ++i) {
        if (space > kMaxSearchSpace / B) throw std::invalid_argument("exhaustive_discrete_search: search space too large");
        space *= B;
    }

    const double step = 2.0 * kPi / static_cast<double>(B);
    auto phases_of = [&](std::uint64_t idx) {
        PhaseSet p = PhaseSet::ones(set);
        std::uint64_t rem = idx;
        for (std::size_t l = set.L(); l-- > 0;)
            for (std::size_t n = set.N(l); n-- > 0;) {
                p.phi[l][n] = std::polar(1.0, static_cast<double>(rem % B) * step);
                rem /= B;
            }
        return p;
    };
    auto rate_of = [&](const PhaseSet& p) {
        const auto h = equivalent_channels(set, p);
        return sum_rate(h, matched_beams(h, budget.tx_power), budget.noise_power);
    };

    struct Best {
        std::uint64_t idx = 0;
        double rate = -1.0;
    };
    auto better = [](const Best& a, const Best& b) {  // a beats b
        return a.rate > b.rate || (a.rate == b.rate && a.idx < b.idx);
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, space));
    std::vector<Best> partial(threads);
    auto worker = [&](unsigned t) {
        const std::uint64_t lo = space * t / threads, hi = space * (t + 1) / threads;
        Best best;
        for (std::uint64_t j = 0; j < hi - lo; ++j) {
            const std::uint64_t idx = reverse_order ? hi - 1 - j : lo + j;
            const Best cand{idx, rate_of(phases_of(idx))};
            if (best.rate < 0.0 || better(cand, best)) best = cand;
        }
        partial[t] = best;
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    Best best = partial.front();
    for (const auto& b : partial)
        if (better(b, best)) best = b;
    return {phases_of(best.idx), best.rate, space};
}

// ---- array-gain scaling probe -----------------------------------------------------

enum class ReflectionMode { single, double_reflection };

struct ScalingProbeResult {
    std::vector<double> elements;
    std::vector<double> received_power;
    double slope = 0.0;
};

/// Received power of the co-phased link versus total element count, LoS only,
/// one user at the cluster centre. Geometry is fixed, so path loss only adds a
/// constant offset in log domain and the fitted slope is the array-gain exponent.
/// Double-reflection mode splits N evenly over RIS 0 and RIS 1 and measures only
/// the BS -> RIS 0 -> RIS 1 -> user link.
inline ScalingProbeResult scaling_probe(const SystemConfig& templ, const std::vector<std::size_t>& n_list,
                                        ReflectionMode mode) {
    if (n_list.size() < 3) throw std::invalid_argument("scaling_probe: need at least 3 element counts");
    if (mode == ReflectionMode::double_reflection && templ.ris.size() < 2)
        throw std::invalid_argument("scaling_probe: double-reflection mode needs two RIS positions");
    ScalingProbeResult res;
    for (std::size_t N : n_list) {
        SystemConfig cfg = templ;
        cfg.K = 1;
        cfg.user_radius = 0.0;
        cfg.rician_factor = std::numeric_limits<double>::infinity();
        if (mode == ReflectionMode::single) {
            auto [nx, ny] = near_square_grid(N);
            cfg.ris = {RisConfig{nx, ny, templ.ris[0].position, templ.ris[0].orientation}};
        } else {
            if (N % 2 != 0) throw std::invalid_argument("scaling_probe: double-reflection mode needs even N");
            auto [nx, ny] = near_square_grid(N / 2);
            cfg.ris = {RisConfig{nx, ny, templ.ris[0].position, templ.ris[0].orientation},
                       RisConfig{nx, ny, templ.ris[1].position, templ.ris[1].orientation}};
        }
        Rng rng(0);
        ChannelSet set = gen_channel_set(cfg, rng);
        PhaseSet p = PhaseSet::ones(set);
        if (mode == ReflectionMode::single) {
            for (std::size_t n = 0; n < set.N(0); ++n)
                p.phi[0][n] = std::polar(1.0, -std::arg(set.g[0][0][n] * set.G1(n, 0)));
        } else {
            for (auto& x : set.g[0][0]) x = 0.0;
            for (std::size_t n = 0; n < set.N(0); ++n)
                p.phi[0][n] = std::polar(1.0, -std::arg(set.H(1)(0, n) * set.G1(n, 0)));
            const CVector v = set.H(1) * hadamard(p.phi[0], set.G1.col(0));
            for (std::size_t n = 0; n < set.N(1); ++n) p.phi[1][n] = std::polar(1.0, -std::arg(set.g[1][0][n] * v[n]));
        }
        const CVector h = equivalent_channel(set, p, 0);
        res.elements.push_back(static_cast<double>(N));
        res.received_power.push_back(cfg.tx_power_w * norm_sq(h.span()));
    }
    double mx = 0.0, my = 0.0;
    const double cnt = static_cast<double>(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        mx += std::log(res.elements[i]) / cnt;
        my += std::log(res.received_power[i]) / cnt;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const double dx = std::log(res.elements[i]) - mx;
        sxy += dx * (std::log(res.received_power[i]) - my);
        sxx += dx * dx;
    }
    res.slope = sxy / sxx;
    return res;
}

}  // namespace risbeam::oracle

#endif
