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

#ifndef RISBEAM_MODEL_HPP
#define RISBEAM_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/numerics.hpp"

namespace risbeam {

/// Unit-modulus reflection coefficients, one vector per RIS.
struct PhaseSet {
    std::vector<CVector> phi;

    std::size_t L() const { return phi.size(); }

    static PhaseSet from_angles(const std::vector<std::vector<double>>& theta) {
        PhaseSet p;
        for (const auto& t : theta) {
            CVector v(t.size());
            for (std::size_t n = 0; n < t.size(); ++n) v[n] = std::polar(1.0, t[n]);
            p.phi.push_back(std::move(v));
        }
        return p;
    }

    static PhaseSet ones(const ChannelSet& set) {
        PhaseSet p;
        for (std::size_t l = 0; l < set.L(); ++l) p.phi.emplace_back(set.N(l), cplx{1.0, 0.0});
        return p;
    }

    static PhaseSet random(const ChannelSet& set, Rng& rng) {
        PhaseSet p;
        for (std::size_t l = 0; l < set.L(); ++l) {
            CVector v(set.N(l));
            for (auto& x : v) x = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
            p.phi.push_back(std::move(v));
        }
        return p;
    }

    /// Largest deviation of |phi_{l,n}| from one.
    double modulus_error() const {
        double e = 0.0;
        for (const auto& v : phi)
            for (const auto& x : v) e = std::max(e, std::abs(std::abs(x) - 1.0));
        return e;
    }

    bool operator==(const PhaseSet&) const = default;
};

namespace detail {

inline void check_phases(const ChannelSet& set, const PhaseSet& phases) {
    if (phases.L() != set.L()) throw std::invalid_argument("phase set does not match RIS count");
    for (std::size_t l = 0; l < set.L(); ++l)
        if (phases.phi[l].size() != set.N(l)) throw std::invalid_argument("phase vector length mismatch");
}

inline void check_index(std::size_t l, std::size_t L, const char* what) {
    if (l >= L) throw std::out_of_range(what);
}

}  // namespace detail

/// h_k^H (a 1 x M row) for user k: every prefix path BS -> RIS 0 -> ... -> RIS l -> user.
/// Evaluated right to left as h = e_0 Phi_0 G1 with e_l = g_l + e_{l+1} Phi_{l+1} H_{l+1}.
inline CVector equivalent_channel(const ChannelSet& set, const PhaseSet& phases, std::size_t k) {
    detail::check_phases(set, phases);
    detail::check_index(k, set.K(), "equivalent_channel: user index out of range");
    const std::size_t L = set.L();
    CVector e = set.g[L - 1][k];
    for (std::size_t l = L - 1; l >= 1; --l) e = set.g[l - 1][k] + hadamard(e, phases.phi[l]) * set.H(l);
    return hadamard(e, phases.phi[0]) * set.G1;
}

inline std::vector<CVector> equivalent_channels(const ChannelSet& set, const PhaseSet& phases) {
    std::vector<CVector> h;
    h.reserve(set.K());
    for (std::size_t k = 0; k < set.K(); ++k) h.push_back(equivalent_channel(set, phases, k));
    return h;
}

/// h_k^H w_i for every pair, h given as rows.
inline std::vector<std::vector<cplx>> gains(const std::vector<CVector>& h, const CMatrix& W) {
    std::vector<std::vector<cplx>> out(h.size(), std::vector<cplx>(W.cols()));
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k].size() != W.rows()) throw std::invalid_argument("gains: channel/beamformer size mismatch");
        for (std::size_t i = 0; i < W.cols(); ++i) {
            cplx s = 0.0;
            for (std::size_t m = 0; m < W.rows(); ++m) s += h[k][m] * W(m, i);
            out[k][i] = s;
        }
    }
    return out;
}

/// |h_k^H w_k|^2 / (sum_{i != k} |h_k^H w_i|^2 + noise).
inline double sinr(const std::vector<CVector>& h, const CMatrix& W, double noise_power, std::size_t k) {
    if (!(noise_power > 0.0)) throw std::invalid_argument("sinr: noise power must be positive");
    detail::check_index(k, h.size(), "sinr: user index out of range");
    const CVector& hk = h[k];
    double signal = 0.0, interference = 0.0;
    for (std::size_t i = 0; i < W.cols(); ++i) {
        cplx s = 0.0;
        for (std::size_t m = 0; m < W.rows(); ++m) s += hk[m] * W(m, i);
        (i == k ? signal : interference) += std::norm(s);
    }
    return signal / (interference + noise_power);
}

inline std::vector<double> sinrs(const std::vector<CVector>& h, const CMatrix& W, double noise_power) {
    std::vector<double> g(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) g[k] = sinr(h, W, noise_power, k);
    return g;
}

/// Sum rate in bits/s/Hz.
inline double sum_rate(const std::vector<CVector>& h, const CMatrix& W, double noise_power) {
    double r = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) r += std::log2(1.0 + sinr(h, W, noise_power, k));
    return r;
}

inline double total_power(const CMatrix& W) { return norm_sq(W.data()); }

// ---- per-RIS channel reformulation: h_k^H = phibar_l A_{l,k} + b_{l,k} --------------
//
// phibar_l stacks L-l copies of phi_l^T (zero-based l), so that g Phi_l R = phi_l^T diag(g) R.

/// Cascade from the BS up to the input of RIS l: G1, then H_l Phi_{l-1} R_{l-1}.
inline CMatrix reform_R(const ChannelSet& set, const PhaseSet& phases, std::size_t l) {
    detail::check_phases(set, phases);
    detail::check_index(l, set.L(), "reform_R: RIS index out of range");
    CMatrix R = set.G1;
    for (std::size_t m = 1; m <= l; ++m) R = set.H(m) * scale_rows(phases.phi[m - 1], R);
    return R;
}

/// Downstream cascade from the output of RIS l to user k through RISs l+1..i.
inline CVector reform_u(const ChannelSet& set, const PhaseSet& phases, std::size_t l, std::size_t i, std::size_t k) {
    detail::check_phases(set, phases);
    if (!(i > l && i < set.L())) throw std::out_of_range("reform_u: need l < i < L");
    detail::check_index(k, set.K(), "reform_u: user index out of range");
    CVector u = set.g[i][k];
    for (std::size_t j = i; j > l; --j) u = hadamard(u, phases.phi[j]) * set.H(j);
    return u;
}

/// (L-l) N_l x M stack [diag(g_{l,k}) R_l; diag(u_{l+1}) R_l; ...; diag(u_{L-1}) R_l].
inline CMatrix reform_A(const ChannelSet& set, const PhaseSet& phases, std::size_t l, std::size_t k) {
    detail::check_index(k, set.K(), "reform_A: user index out of range");
    const CMatrix R = reform_R(set, phases, l);
    const std::size_t n = set.N(l), M = set.M(), blocks = set.L() - l;
    CMatrix A(blocks * n, M);
    for (std::size_t b = 0; b < blocks; ++b) {
        const CVector coef = b == 0 ? set.g[l][k] : reform_u(set, phases, l, l + b, k);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < M; ++c) A(b * n + r, c) = coef[r] * R(r, c);
    }
    return A;
}

/// Every path contribution that does not traverse RIS l.
inline CVector reform_b(const ChannelSet& set, const PhaseSet& phases, std::size_t l, std::size_t k) {
    detail::check_phases(set, phases);
    detail::check_index(l, set.L(), "reform_b: RIS index out of range");
    detail::check_index(k, set.K(), "reform_b: user index out of range");
    CVector b(set.M());
    CMatrix R = set.G1;
    for (std::size_t m = 0; m < l; ++m) {
        b = b + hadamard(set.g[m][k], phases.phi[m]) * R;
        R = set.H(m + 1) * scale_rows(phases.phi[m], R);
    }
    return b;
}

struct ReformParts {
    CMatrix A;
    CVector b;
};

inline ReformParts reform_parts(const ChannelSet& set, const PhaseSet& phases, std::size_t l, std::size_t k) {
    return {reform_A(set, phases, l, k), reform_b(set, phases, l, k)};
}

/// phibar_l: L-l copies of phi_l.
inline CVector stacked_phases(const PhaseSet& phases, std::size_t l) {
    const std::size_t L = phases.L(), n = phases.phi.at(l).size();
    CVector x((L - l) * n);
    for (std::size_t b = 0; b < L - l; ++b)
        for (std::size_t j = 0; j < n; ++j) x[b * n + j] = phases.phi[l][j];
    return x;
}

/// Reformulated products for RIS l: z[k][i] = A_{l,k} w_i and c[k][i] = b_{l,k} w_i.
/// Built from matrix-vector cascades, without forming A_{l,k}.
struct ReformProducts {
    std::vector<std::vector<CVector>> z;
    std::vector<std::vector<cplx>> c;
};

inline ReformProducts reform_products(const ChannelSet& set, const PhaseSet& phases, const CMatrix& W, std::size_t l) {
    detail::check_phases(set, phases);
    detail::check_index(l, set.L(), "reform_products: RIS index out of range");
    if (W.rows() != set.M()) throw std::invalid_argument("reform_products: W has wrong row count");
    const std::size_t K = set.K(), Kw = W.cols(), L = set.L(), n = set.N(l);

    // r[i][m] = R_m w_i for m = 0..l
    std::vector<std::vector<CVector>> r(Kw);
    for (std::size_t i = 0; i < Kw; ++i) {
        r[i].push_back(set.G1 * W.col(i));
        for (std::size_t m = 1; m <= l; ++m) r[i].push_back(set.H(m) * hadamard(phases.phi[m - 1], r[i][m - 1]));
    }

    ReformProducts out;
    out.z.assign(K, std::vector<CVector>(Kw, CVector((L - l) * n)));
    out.c.assign(K, std::vector<cplx>(Kw));
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<CVector> coef{set.g[l][k]};
        for (std::size_t i = l + 1; i < L; ++i) {
            // u_i = g_i Phi_i H_i ... Phi_{l+1} H_{l+1}
            CVector u = set.g[i][k];
            for (std::size_t j = i; j > l; --j) u = hadamard(u, phases.phi[j]) * set.H(j);
            coef.push_back(std::move(u));
        }
        std::vector<CVector> upstream;
        for (std::size_t m = 0; m < l; ++m) upstream.push_back(hadamard(set.g[m][k], phases.phi[m]));
        for (std::size_t i = 0; i < Kw; ++i) {
            CVector& z = out.z[k][i];
            const CVector& rl = r[i][l];
            for (std::size_t b = 0; b < coef.size(); ++b)
                for (std::size_t j = 0; j < n; ++j) z[b * n + j] = coef[b][j] * rl[j];
            cplx c = 0.0;
            for (std::size_t m = 0; m < l; ++m) c += dotu(upstream[m].span(), r[i][m].span());
            out.c[k][i] = c;
        }
    }
    return out;
}

// ---- single-reflection model -------------------------------------------------------

/// Single-reflection-only model: RIS l is fed directly by the BS and only reflects
/// toward the users. It is exactly one RIS whose elements are the concatenation of
/// all RISs, so it is returned as an L = 1 channel set.
inline ChannelSet stack_single_reflection(const ChannelSet& set) {
    if (set.bs_to_ris.size() != set.L())
        throw std::invalid_argument("stack_single_reflection: channel set lacks direct BS feeds");
    std::size_t total = 0;
    for (std::size_t l = 0; l < set.L(); ++l) total += set.N(l);
    ChannelSet out;
    out.users = set.users;
    out.G1 = CMatrix(total, set.M());
    out.g.assign(1, std::vector<CVector>(set.K(), CVector(total)));
    std::size_t off = 0;
    for (std::size_t l = 0; l < set.L(); ++l) {
        const CMatrix& F = set.bs_to_ris[l];
        for (std::size_t r = 0; r < F.rows(); ++r)
            for (std::size_t c = 0; c < F.cols(); ++c) out.G1(off + r, c) = F(r, c);
        for (std::size_t k = 0; k < set.K(); ++k)
            for (std::size_t j = 0; j < set.N(l); ++j) out.g[0][k][off + j] = set.g[l][k][j];
        off += set.N(l);
    }
    return out;
}

/// Splits a concatenated single-RIS phase vector back into per-RIS vectors.
inline PhaseSet split_phases(const CVector& joint, const ChannelSet& layout) {
    PhaseSet p;
    std::size_t off = 0;
    for (std::size_t l = 0; l < layout.L(); ++l) {
        CVector v(layout.N(l));
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = joint.at(off + j);
        off += v.size();
        p.phi.push_back(std::move(v));
    }
    return p;
}

inline CVector concat_phases(const PhaseSet& p) {
    std::vector<cplx> all;
    for (const auto& v : p.phi) all.insert(all.end(), v.begin(), v.end());
    return CVector(std::move(all));
}

}  // namespace risbeam

#endif
