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

#ifndef RISBEAM_SOLVER_HPP
#define RISBEAM_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/model.hpp"
#include "risbeam/numerics.hpp"

namespace risbeam {

/// How the per-element phase coefficient is formed.
enum class PhaseRule {
    /// Exact single-variable restriction: all stacked copies of phi_{l,n} are
    /// aggregated and excluded together. Never decreases the phase surrogate.
    exact,
    /// Coefficient from the first stacked copy only, excluding just that position.
    /// Identical to `exact` for the last RIS.
    paper_literal,
    /// Test fixture: interference sum enters with the wrong sign.
    mutant_sign_flip,
};

struct SolverOptions {
    double threshold = 1e-3;          // stop when the objective gains at most this (bits/s/Hz)
    std::size_t max_iters = 200;
    double bisection_tol = 1e-10;     // relative power mismatch
    std::size_t bisection_max_steps = 400;
    PhaseRule phase_rule = PhaseRule::exact;
    bool optimize_beams = true;
    bool optimize_phases = true;
    unsigned phase_bits = 0;          // 0: continuous phases; b: restrict to 2^b uniform levels

    void validate() const {
        if (phase_bits > 30) throw std::invalid_argument("SolverOptions: phase_bits must be <= 30");
        if (!(threshold > 0.0)) throw std::invalid_argument("SolverOptions: threshold must be positive");
        if (max_iters < 1) throw std::invalid_argument("SolverOptions: max_iters must be >= 1");
        if (!(bisection_tol > 0.0)) throw std::invalid_argument("SolverOptions: bisection_tol must be positive");
        if (bisection_max_steps < 1) throw std::invalid_argument("SolverOptions: bisection_max_steps must be >= 1");
    }
};

struct LinkBudget {
    double tx_power = 0.0;
    double noise_power = 0.0;
};

struct SolverState {
    CMatrix W;
    PhaseSet phases;
    std::vector<double> alpha;
    std::vector<cplx> xi;
    std::vector<cplx> epsilon;  // from the most recent RIS update
    double lambda = 0.0;
};

enum class Termination { threshold, max_iterations, degenerate };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::threshold: return "threshold";
        case Termination::max_iterations: return "max-iter";
        case Termination::degenerate: return "degenerate";
    }
    return "?";
}

struct SolverReport {
    std::vector<double> objective;  // f2 after each iteration, in bits/s/Hz
    double initial_rate = 0.0;
    double sum_rate = 0.0;
    std::size_t iterations = 0;
    Termination cause = Termination::max_iterations;
    double wall_ms = 0.0;
    std::vector<double> iteration_ms;
    double alpha_ms = 0.0;
    double beam_ms = 0.0;
    double phase_ms = 0.0;
};

// ---- Lagrangian dual transform -------------------------------------------------

/// Optimal log-decoupling auxiliaries: alpha_k = gamma_k.
inline std::vector<double> update_alpha(const std::vector<CVector>& h, const CMatrix& W, double noise_power) {
    return sinrs(h, W, noise_power);
}

/// sum_k ln(1+a_k) - a_k + (1+a_k) g_k / (1+g_k), in nats.
inline double dual_objective(const std::vector<double>& alpha, const std::vector<double>& gamma) {
    if (alpha.size() != gamma.size()) throw std::invalid_argument("dual_objective: size mismatch");
    double f = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        f += std::log1p(alpha[k]) - alpha[k] + (1.0 + alpha[k]) * gamma[k] / (1.0 + gamma[k]);
    return f;
}

// ---- beamformer update -------------------------------------------------------------

/// Quadratic-transform auxiliaries for the beamformer subproblem.
inline std::vector<cplx> update_xi(const std::vector<CVector>& h, const CMatrix& W, const std::vector<double>& alpha,
                                   double noise_power) {
    const auto hw = gains(h, W);
    std::vector<cplx> xi(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        double denom = noise_power;
        for (const auto& x : hw[k]) denom += std::norm(x);
        xi[k] = std::sqrt(1.0 + alpha[k]) * hw[k][k] / denom;
    }
    return xi;
}

/// Beamformer surrogate: sum_k 2 sqrt(1+a_k) Re{xi_k^* h_k^H w_k} - |xi_k|^2 (sum_i |h_k^H w_i|^2 + noise).
inline double beam_surrogate(const std::vector<CVector>& h, const CMatrix& W, const std::vector<cplx>& xi,
                             const std::vector<double>& alpha, double noise_power) {
    const auto hw = gains(h, W);
    double f = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        double denom = noise_power;
        for (const auto& x : hw[k]) denom += std::norm(x);
        f += 2.0 * std::sqrt(1.0 + alpha[k]) * (std::conj(xi[k]) * hw[k][k]).real() - std::norm(xi[k]) * denom;
    }
    return f;
}

/// Beamformer surrogate minus lambda (sum ||w_k||^2 - P_T).
inline double beam_lagrangian(const std::vector<CVector>& h, const CMatrix& W, const std::vector<cplx>& xi,
                              const std::vector<double>& alpha, double noise_power, double lambda, double tx_power) {
    return beam_surrogate(h, W, xi, alpha, noise_power) - lambda * (total_power(W) - tx_power);
}

namespace detail {

/// sum_i |xi_i|^2 h_i h_i^H with h_i the column channel (conjugate of the stored row).
inline CMatrix weighted_gram(const std::vector<CVector>& h, const std::vector<cplx>& xi, std::size_t M) {
    CMatrix G(M, M);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double w = std::norm(xi[i]);
        if (w == 0.0) continue;
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = 0; b < M; ++b) G(a, b) += w * std::conj(h[i][a]) * h[i][b];
    }
    return G;
}

inline CMatrix solve_beams(const CMatrix& gram, const std::vector<CVector>& h, const std::vector<cplx>& xi,
                           const std::vector<double>& alpha, double lambda) {
    const std::size_t M = gram.rows(), K = h.size();
    CMatrix A = gram;
    for (std::size_t i = 0; i < M; ++i) A(i, i) += lambda;
    const Cholesky chol(A);
    CMatrix W(M, K);
    for (std::size_t k = 0; k < K; ++k) {
        const cplx s = std::sqrt(1.0 + alpha[k]) * xi[k];
        CVector rhs(M);
        for (std::size_t m = 0; m < M; ++m) rhs[m] = s * std::conj(h[k][m]);
        W.set_col(k, chol.solve(rhs));
    }
    return W;
}

}  // namespace detail

/// w_k = sqrt(1+a_k) xi_k (sum_i |xi_i|^2 h_i h_i^H + lambda I)^{-1} h_k, via Cholesky.
/// Throws SingularMatrixError when the system is singular (typically lambda = 0, K < M).
inline CMatrix update_w(const std::vector<CVector>& h, const std::vector<cplx>& xi, const std::vector<double>& alpha,
                        double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("update_w: lambda must be >= 0");
    if (h.empty()) throw std::invalid_argument("update_w: no users");
    const std::size_t M = h.front().size();
    return detail::solve_beams(detail::weighted_gram(h, xi, M), h, xi, alpha, lambda);
}

struct LambdaResult {
    double lambda = 0.0;
    CMatrix W;
    double power = 0.0;
    std::size_t steps = 0;
    /// False when the power constraint is slack; lambda is then reported as 0.
    bool active = false;
};

/// Smallest lambda >= 0 whose beamformers meet the power budget, by bracketing
/// and geometric bisection. The returned W always satisfies the budget.
inline LambdaResult solve_lambda(const std::vector<CVector>& h, const std::vector<cplx>& xi,
                                 const std::vector<double>& alpha, double tx_power, const SolverOptions& opts = {}) {
    if (!(tx_power > 0.0)) throw std::invalid_argument("solve_lambda: tx_power must be positive");
    if (h.empty()) throw std::invalid_argument("solve_lambda: no users");
    const std::size_t M = h.front().size(), K = h.size();
    const CMatrix gram = detail::weighted_gram(h, xi, M);

    double rhs_energy = 0.0;
    for (std::size_t k = 0; k < K; ++k) rhs_energy += std::norm(xi[k]) * norm_sq(h[k].span());
    if (rhs_energy == 0.0) return {0.0, CMatrix(M, K), 0.0, 0, false};

    LambdaResult res;
    try {
        CMatrix W0 = detail::solve_beams(gram, h, xi, alpha, 0.0);
        const double p0 = total_power(W0);
        if (p0 <= tx_power) return {0.0, std::move(W0), p0, 0, false};
    } catch (const SingularMatrixError&) {
    }

    double trace = 0.0;
    for (std::size_t i = 0; i < M; ++i) trace += gram(i, i).real();
    const double scale = trace / static_cast<double>(M);
    auto eval = [&](double lambda) {
        ++res.steps;
        try {
            CMatrix W = detail::solve_beams(gram, h, xi, alpha, lambda);
            const double p = total_power(W);
            return std::pair{std::move(W), p};
        } catch (const SingularMatrixError&) {
            // numerically singular at this lambda: treat as over budget
            return std::pair{CMatrix(M, K), std::numeric_limits<double>::infinity()};
        }
    };

    double lo = 0.0, hi = scale;
    auto [W_hi, p_hi] = eval(hi);
    if (p_hi > tx_power) {
        while (p_hi > tx_power) {
            if (res.steps > opts.bisection_max_steps) throw std::runtime_error("solve_lambda: no upper bracket found");
            lo = hi;
            hi *= 2.0;
            std::tie(W_hi, p_hi) = eval(hi);
        }
    } else {
        for (;;) {
            const double cand = hi / 2.0;
            if (cand < scale * 1e-18) return {0.0, std::move(W_hi), p_hi, res.steps, false};
            auto [W_c, p_c] = eval(cand);
            if (p_c > tx_power) {
                lo = cand;
                break;
            }
            hi = cand;
            W_hi = std::move(W_c);
            p_hi = p_c;
        }
    }

    while (std::abs(p_hi - tx_power) > opts.bisection_tol * tx_power) {
        if (res.steps > opts.bisection_max_steps) throw std::runtime_error("solve_lambda: bisection did not converge");
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) {
            // bracket exhausted: below budget here means the lower end was only numerically singular
            if (p_hi < tx_power) return {0.0, std::move(W_hi), p_hi, res.steps, false};
            break;
        }
        auto [W_m, p_m] = eval(mid);
        if (p_m > tx_power) {
            lo = mid;
        } else {
            hi = mid;
            W_hi = std::move(W_m);
            p_hi = p_m;
        }
    }
    res.lambda = hi;
    res.W = std::move(W_hi);
    res.power = p_hi;
    res.active = true;
    return res;
}

// ---- phase update ------------------------------------------------------------------

namespace detail {

/// s[k][i] = x z[k][i] + c[k][i] = h_k^H w_i under stacked phases x.
inline std::vector<std::vector<cplx>> reformed_gains(const ReformProducts& p, const CVector& x) {
    std::vector<std::vector<cplx>> s(p.z.size());
    for (std::size_t k = 0; k < p.z.size(); ++k) {
        s[k].resize(p.z[k].size());
        for (std::size_t i = 0; i < p.z[k].size(); ++i) s[k][i] = dotu(x.span(), p.z[k][i].span()) + p.c[k][i];
    }
    return s;
}

}  // namespace detail

/// Quadratic-transform auxiliaries for the phase subproblem of one RIS.
inline std::vector<cplx> update_epsilon(const ReformProducts& p, const CVector& stacked, const std::vector<double>& alpha,
                                        double noise_power) {
    const auto s = detail::reformed_gains(p, stacked);
    std::vector<cplx> eps(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        double denom = noise_power;
        for (const auto& x : s[k]) denom += std::norm(x);
        eps[k] = std::sqrt(1.0 + alpha[k]) * s[k][k] / denom;
    }
    return eps;
}

/// Phase surrogate of one RIS at stacked phases x (same shape as beam_surrogate).
inline double phase_surrogate(const ReformProducts& p, const CVector& stacked, const std::vector<cplx>& eps,
                              const std::vector<double>& alpha, double noise_power) {
    const auto s = detail::reformed_gains(p, stacked);
    double f = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        double denom = noise_power;
        for (const auto& x : s[k]) denom += std::norm(x);
        f += 2.0 * std::sqrt(1.0 + alpha[k]) * (std::conj(eps[k]) * s[k][k]).real() - std::norm(eps[k]) * denom;
    }
    return f;
}

/// Nearest of the 2^bits levels {0, 2pi/B, ...} to the angle of x; exact ties go to the smaller angle.
inline cplx snap_phase(cplx x, unsigned bits) {
    if (bits == 0) throw std::invalid_argument("snap_phase: bits must be >= 1");
    if (bits > 30) throw std::invalid_argument("snap_phase: bits must be <= 30");
    const double levels = std::ldexp(1.0, static_cast<int>(bits));
    const double step = 2.0 * kPi / levels;
    double theta = std::fmod(std::arg(x), 2.0 * kPi);
    if (theta < 0.0) theta += 2.0 * kPi;
    const double q = theta / step;
    double idx = std::floor(q);
    if (q - idx > 0.5) idx += 1.0;
    idx = std::fmod(idx, levels);
    return std::polar(1.0, idx * step);
}

/// Coordinate-ascent state for the elements of one RIS. Holds t[k][i] = x z[k][i]
/// so each element coefficient costs O(K^2 (L-l)).
class PhaseCoordinateAscent {
  public:
    PhaseCoordinateAscent(const ReformProducts& p, CVector phi, std::vector<cplx> eps, std::vector<double> alpha,
                          PhaseRule rule, unsigned bits = 0)
        : p_(p), phi_(std::move(phi)), eps_(std::move(eps)), alpha_(std::move(alpha)), rule_(rule), bits_(bits) {
        const std::size_t K = p_.z.size();
        if (K == 0) throw std::invalid_argument("PhaseCoordinateAscent: no users");
        const std::size_t len = p_.z[0][0].size();
        n_ = phi_.size();
        if (n_ == 0 || len % n_ != 0) throw std::invalid_argument("PhaseCoordinateAscent: stacked length mismatch");
        copies_ = len / n_;
        t_.assign(K, std::vector<cplx>(p_.z[0].size()));
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < t_[k].size(); ++i) {
                const CVector& z = p_.z[k][i];
                cplx s = 0.0;
                for (std::size_t j = 0; j < len; ++j) s += phi_[j % n_] * z[j];
                t_[k][i] = s;
            }
    }

    /// Coefficient eta with f = const + 2 Re{phi_n eta} (restricted to element n).
    cplx coefficient(std::size_t n) const {
        const std::size_t K = p_.z.size();
        const cplx cur = phi_[n];
        cplx eta = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double e = std::norm(eps_[k]);
            for (std::size_t i = 0; i < t_[k].size(); ++i) {
                const CVector& z = p_.z[k][i];
                cplx Z = 0.0;
                if (rule_ == PhaseRule::paper_literal) {
                    Z = z[n];
                } else {
                    for (std::size_t b = 0; b < copies_; ++b) Z += z[b * n_ + n];
                }
                if (i == k) eta += std::sqrt(1.0 + alpha_[k]) * std::conj(eps_[k]) * Z;
                const cplx rest = t_[k][i] - cur * Z;
                if (rule_ == PhaseRule::mutant_sign_flip)
                    eta += e * Z * std::conj(rest - p_.c[k][i]);
                else
                    eta -= e * Z * std::conj(rest + p_.c[k][i]);
            }
        }
        return eta;
    }

    /// Sets phi_n = e^{-j angle(eta)} (or the nearest allowed level) and refreshes the running products.
    void update(std::size_t n) {
        const cplx eta = coefficient(n);
        if (std::abs(eta) == 0.0) return;
        const cplx best = std::polar(1.0, -std::arg(eta));
        set(n, bits_ ? snap_phase(best, bits_) : best);
    }

    void set(std::size_t n, cplx value) {
        const cplx delta = value - phi_[n];
        phi_[n] = value;
        for (std::size_t k = 0; k < t_.size(); ++k)
            for (std::size_t i = 0; i < t_[k].size(); ++i) {
                const CVector& z = p_.z[k][i];
                cplx Z = 0.0;
                for (std::size_t b = 0; b < copies_; ++b) Z += z[b * n_ + n];
                t_[k][i] += delta * Z;
            }
    }

    void sweep() {
        for (std::size_t n = 0; n < n_; ++n) update(n);
    }

    const CVector& phases() const { return phi_; }

  private:
    const ReformProducts& p_;
    CVector phi_;
    std::vector<cplx> eps_;
    std::vector<double> alpha_;
    PhaseRule rule_;
    unsigned bits_ = 0;
    std::size_t n_ = 0;
    std::size_t copies_ = 1;
    std::vector<std::vector<cplx>> t_;
};

/// One sequential sweep over the elements of RIS l (n = 0..N_l-1, immediate refresh).
inline CVector update_phi(const ReformProducts& p, const CVector& phi, const std::vector<cplx>& eps,
                          const std::vector<double>& alpha, PhaseRule rule = PhaseRule::exact, unsigned bits = 0) {
    PhaseCoordinateAscent ascent(p, phi, eps, alpha, rule, bits);
    ascent.sweep();
    return ascent.phases();
}

// ---- discrete phases ----------------------------------------------------------------

/// Snaps every phase to the nearest point of {0, 2pi/B, ..., (B-1) 2pi/B}, B = 2^bits;
/// exact ties go to the smaller angle.
inline PhaseSet quantize_phases(const PhaseSet& phases, unsigned bits) {
    if (bits == 0) throw std::invalid_argument("quantize_phases: bits must be >= 1");
    if (bits > 30) throw std::invalid_argument("quantize_phases: bits must be <= 30");
    PhaseSet out = phases;
    for (auto& v : out.phi)
        for (auto& x : v) x = snap_phase(x, bits);
    return out;
}

// ---- alternating optimization ---------------------------------------------------------

/// Channel-matched beams sqrt(P_T/K) h_k / ||h_k||; zero for a zero channel.
inline CMatrix matched_beams(const std::vector<CVector>& h, double tx_power) {
    const std::size_t K = h.size(), M = h.front().size();
    CMatrix W(M, K);
    const double amp = std::sqrt(tx_power / static_cast<double>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const double nk = norm(h[k].span());
        if (nk == 0.0) continue;
        for (std::size_t m = 0; m < M; ++m) W(m, k) = amp * std::conj(h[k][m]) / nk;
    }
    return W;
}

/// Alternating closed-form updates of alpha, (xi, lambda, W) and each RIS's phases.
/// Phases start from `initial` when given, otherwise uniform random from `rng`.
/// Beams start from `initial_W` when given, otherwise channel-matched.
inline std::pair<SolverState, SolverReport> run(const ChannelSet& set, const LinkBudget& budget,
                                                const SolverOptions& opts, Rng& rng,
                                                std::optional<PhaseSet> initial = std::nullopt,
                                                std::optional<CMatrix> initial_W = std::nullopt) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    opts.validate();
    set.check_consistent();
    if (!(budget.tx_power > 0.0) || !(budget.noise_power > 0.0))
        throw std::invalid_argument("run: powers must be positive");
    const auto t_start = clock::now();
    const double ln2 = std::log(2.0);

    SolverState st;
    st.phases = initial ? std::move(*initial) : PhaseSet::random(set, rng);
    detail::check_phases(set, st.phases);
    if (opts.phase_bits && opts.optimize_phases) st.phases = quantize_phases(st.phases, opts.phase_bits);
    auto h = equivalent_channels(set, st.phases);
    if (initial_W) {
        if (initial_W->rows() != set.M() || initial_W->cols() != set.K())
            throw std::invalid_argument("run: initial beamformer has wrong shape");
        if (total_power(*initial_W) > budget.tx_power * (1.0 + 1e-9))
            throw std::invalid_argument("run: initial beamformer exceeds the power budget");
        st.W = std::move(*initial_W);
    } else {
        st.W = matched_beams(h, budget.tx_power);
    }
    st.alpha.assign(set.K(), 0.0);
    st.xi.assign(set.K(), 0.0);

    SolverReport rep;
    rep.initial_rate = sum_rate(h, st.W, budget.noise_power);

    bool all_zero = true;
    for (const auto& hk : h)
        if (norm_sq(hk.span()) > 0.0) all_zero = false;
    if (all_zero) {
        rep.objective = {0.0};
        rep.iterations = 1;
        rep.cause = Termination::degenerate;
        rep.sum_rate = 0.0;
        rep.iteration_ms = {ms_since(t_start)};
        rep.wall_ms = rep.iteration_ms.front();
        return {std::move(st), std::move(rep)};
    }

    double prev = rep.initial_rate;
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
        const auto t_it = clock::now();

        auto t0 = clock::now();
        st.alpha = update_alpha(h, st.W, budget.noise_power);
        rep.alpha_ms += ms_since(t0);

        if (opts.optimize_beams) {
            t0 = clock::now();
            st.xi = update_xi(h, st.W, st.alpha, budget.noise_power);
            auto lam = solve_lambda(h, st.xi, st.alpha, budget.tx_power, opts);
            st.lambda = lam.lambda;
            st.W = std::move(lam.W);
            rep.beam_ms += ms_since(t0);
        }

        if (opts.optimize_phases) {
            t0 = clock::now();
            for (std::size_t l = 0; l < set.L(); ++l) {
                const ReformProducts prods = reform_products(set, st.phases, st.W, l);
                st.epsilon = update_epsilon(prods, stacked_phases(st.phases, l), st.alpha, budget.noise_power);
                st.phases.phi[l] =
                    update_phi(prods, st.phases.phi[l], st.epsilon, st.alpha, opts.phase_rule, opts.phase_bits);
            }
            rep.phase_ms += ms_since(t0);
            h = equivalent_channels(set, st.phases);
        }

        const double f2 = dual_objective(st.alpha, sinrs(h, st.W, budget.noise_power)) / ln2;
        rep.objective.push_back(f2);
        rep.iteration_ms.push_back(ms_since(t_it));
        rep.iterations = it;
        if (f2 - prev <= opts.threshold) {
            rep.cause = Termination::threshold;
            break;
        }
        prev = f2;
        rep.cause = Termination::max_iterations;
    }
    rep.sum_rate = sum_rate(h, st.W, budget.noise_power);
    rep.wall_ms = ms_since(t_start);
    return {std::move(st), std::move(rep)};
}

inline std::pair<SolverState, SolverReport> run(const ChannelSet& set, const SystemConfig& cfg,
                                                const SolverOptions& opts, Rng& rng,
                                                std::optional<PhaseSet> initial = std::nullopt) {
    return run(set, LinkBudget{cfg.tx_power_w, cfg.noise_power_w}, opts, rng, std::move(initial));
}

}  // namespace risbeam

#endif
