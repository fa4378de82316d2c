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

#ifndef RISBEAM_CHANNEL_HPP
#define RISBEAM_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "risbeam/numerics.hpp"

namespace risbeam {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double length() const { return std::sqrt(dot(*this)); }
    bool operator==(const Vec3&) const = default;
};

/// Orientation of a planar array: outward normal plus the two grid axes.
/// The default panel lies in the x-z plane facing +y, with its first grid
/// axis along x and its second along z.
struct PanelOrientation {
    Vec3 normal{0.0, 1.0, 0.0};
    Vec3 axis_x{1.0, 0.0, 0.0};
    Vec3 axis_y{0.0, 0.0, 1.0};
    bool operator==(const PanelOrientation&) const = default;
};

struct RisConfig {
    std::size_t nx = 4;
    std::size_t ny = 4;
    Vec3 position{1.0, 0.0, 3.0};
    PanelOrientation orientation{};

    std::size_t elements() const { return nx * ny; }
    bool operator==(const RisConfig&) const = default;
};

/// Everything needed to synthesize one channel realization.
struct SystemConfig {
    std::size_t M = 10;  // BS antennas
    std::size_t K = 3;   // users
    std::vector<RisConfig> ris{RisConfig{4, 4, {1.0, 0.0, 3.0}, {}}, RisConfig{4, 4, {9.0, 0.0, 3.0}, {}}};
    Vec3 bs_position{0.0, 0.0, 0.0};
    Vec3 bs_array_axis{1.0, 0.0, 0.0};
    Vec3 user_center{10.0, 0.0, 0.0};
    double user_radius = 8.0;
    double spacing_x = 0.2;  // element spacing over wavelength
    double spacing_y = 0.2;
    double carrier_hz = 2.4e9;
    double tx_power_w = 10.0;       // 10 dBW
    double noise_power_w = 1e-14;   // -110 dBm
    double rician_factor = 3.0;     // linear; +inf gives pure LoS
    std::optional<double> antenna_area_m2;  // default 0.13 lambda^2
    std::optional<double> element_area_m2;  // default (lambda/5)^2

    std::size_t L() const { return ris.size(); }
    std::size_t N(std::size_t l) const { return ris.at(l).elements(); }
    std::size_t total_elements() const {
        std::size_t n = 0;
        for (const auto& r : ris) n += r.elements();
        return n;
    }
    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    double antenna_area() const {
        const double lam = wavelength();
        return antenna_area_m2.value_or(0.13 * lam * lam);
    }
    double element_area() const {
        const double lam = wavelength();
        return element_area_m2.value_or(lam * lam / 25.0);
    }

    void validate() const {
        auto fail = [](const char* what) { throw std::invalid_argument(what); };
        if (M < 1) fail("SystemConfig: M must be >= 1");
        if (K < 1) fail("SystemConfig: K must be >= 1");
        if (ris.empty()) fail("SystemConfig: at least one RIS is required");
        for (const auto& r : ris)
            if (r.elements() < 1) fail("SystemConfig: every RIS needs at least one element");
        if (!(tx_power_w > 0.0)) fail("SystemConfig: tx_power_w must be positive");
        if (!(noise_power_w > 0.0)) fail("SystemConfig: noise_power_w must be positive");
        if (!(rician_factor >= 0.0)) fail("SystemConfig: rician_factor must be >= 0");
        if (!(user_radius >= 0.0)) fail("SystemConfig: user_radius must be >= 0");
        if (!(carrier_hz > 0.0)) fail("SystemConfig: carrier_hz must be positive");
        if (!(spacing_x > 0.0) || !(spacing_y > 0.0)) fail("SystemConfig: element spacing must be positive");
        if (antenna_area_m2 && !(*antenna_area_m2 > 0.0)) fail("SystemConfig: antenna area must be positive");
        if (element_area_m2 && !(*element_area_m2 > 0.0)) fail("SystemConfig: element area must be positive");
    }
};

/// Channels of one realization. Index l is zero-based: RIS 0 is fed by the BS.
struct ChannelSet {
    CMatrix G1;                               // N_0 x M, BS -> RIS 0
    std::vector<CMatrix> inter;               // inter[l-1]: N_l x N_{l-1}, RIS l-1 -> RIS l
    std::vector<std::vector<CVector>> g;      // g[l][k]: 1 x N_l, RIS l -> user k
    std::vector<Vec3> users;
    std::vector<CMatrix> bs_to_ris;           // optional N_l x M direct feeds, only for baselines

    std::size_t L() const { return g.size(); }
    std::size_t K() const { return g.empty() ? 0 : g.front().size(); }
    std::size_t M() const { return G1.cols(); }
    std::size_t N(std::size_t l) const { return g.at(l).empty() ? 0 : g[l].front().size(); }
    const CMatrix& H(std::size_t l) const { return inter.at(l - 1); }

    bool operator==(const ChannelSet&) const = default;

    void check_consistent() const {
        if (g.empty()) throw std::invalid_argument("ChannelSet: no RIS");
        if (inter.size() + 1 != g.size()) throw std::invalid_argument("ChannelSet: inter-RIS count mismatch");
        if (G1.rows() != N(0)) throw std::invalid_argument("ChannelSet: G1 rows mismatch");
        for (std::size_t l = 1; l < L(); ++l)
            if (H(l).rows() != N(l) || H(l).cols() != N(l - 1))
                throw std::invalid_argument("ChannelSet: inter-RIS dimension mismatch");
        for (const auto& per_ris : g)
            if (per_ris.size() != K()) throw std::invalid_argument("ChannelSet: user count mismatch");
    }
};

// ---- array responses -------------------------------------------------------

/// Half-wavelength ULA response [1, e^{j pi sin t}, ..., e^{j pi (M-1) sin t}]^T.
inline CVector ula_response(std::size_t M, double zenith) {
    if (M == 0) throw std::invalid_argument("ula_response: M must be >= 1");
    CVector a(M);
    const double s = std::sin(zenith);
    for (std::size_t m = 0; m < M; ++m) a[m] = std::polar(1.0, kPi * static_cast<double>(m) * s);
    return a;
}

/// UPA response: x-axis steering vector kron y-axis steering vector.
inline CVector upa_response(std::size_t nx, std::size_t ny, double dx, double dy, double theta, double omega) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("upa_response: grid sizes must be >= 1");
    constexpr double slack = 1e-12;
    if (std::abs(theta) > 1.0 + slack || std::abs(omega) > 1.0 + slack)
        throw std::invalid_argument("upa_response: direction cosines must lie in [-1, 1]");
    CVector ax(nx), ay(ny);
    for (std::size_t i = 0; i < nx; ++i) ax[i] = std::polar(1.0, 2.0 * kPi * static_cast<double>(i) * dx * theta);
    for (std::size_t i = 0; i < ny; ++i) ay[i] = std::polar(1.0, 2.0 * kPi * static_cast<double>(i) * dy * omega);
    return kron(ax, ay);
}

struct Angles {
    double azimuth = 0.0;
    double zenith = 0.0;
    /// sin(zenith) cos(azimuth)
    double theta() const { return std::sin(zenith) * std::cos(azimuth); }
    /// sin(zenith) sin(azimuth)
    double omega() const { return std::sin(zenith) * std::sin(azimuth); }
};

/// Direction from p_from to p_to in the panel frame: zenith from the normal,
/// azimuth in the panel plane measured from axis_x.
inline Angles angles_between(const Vec3& p_from, const Vec3& p_to, const PanelOrientation& frame = {}) {
    const Vec3 d = p_to - p_from;
    const double len = d.length();
    if (!(len > 0.0)) throw std::invalid_argument("angles_between: coincident points");
    const Vec3 u = d * (1.0 / len);
    const double cn = std::clamp(u.dot(frame.normal), -1.0, 1.0);
    const double cx = u.dot(frame.axis_x);
    const double cy = u.dot(frame.axis_y);
    Angles a;
    a.zenith = std::acos(cn);
    a.azimuth = (cx == 0.0 && cy == 0.0) ? 0.0 : std::atan2(cy, cx);
    return a;
}

/// Aperture form of the Friis formula: A_tx A_rx / (lambda^2 d^2).
inline double friis_path_loss(double distance, double wavelength, double area_tx, double area_rx) {
    if (!(distance > 0.0) || !(wavelength > 0.0) || !(area_tx > 0.0) || !(area_rx > 0.0))
        throw std::invalid_argument("friis_path_loss: inputs must be positive");
    return area_tx * area_rx / (wavelength * wavelength * distance * distance);
}

/// sqrt(beta) (sqrt(F/(F+1)) LoS + sqrt(1/(F+1)) NLoS) with NLoS ~ CN(0,1).
/// F = +inf yields the pure LoS channel and consumes no random draws.
inline CMatrix gen_rician(Rng& rng, double beta, double rician_factor, const CMatrix& los) {
    if (!(beta > 0.0)) throw std::invalid_argument("gen_rician: beta must be positive");
    if (!(rician_factor >= 0.0)) throw std::invalid_argument("gen_rician: Rician factor must be >= 0");
    const double sb = std::sqrt(beta);
    CMatrix out(los.rows(), los.cols());
    if (std::isinf(rician_factor)) {
        for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = sb * los.data()[i];
        return out;
    }
    const double w_los = std::sqrt(rician_factor / (rician_factor + 1.0));
    const double w_nlos = std::sqrt(1.0 / (rician_factor + 1.0));
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = sb * (w_los * los.data()[i] + w_nlos * rng.cscg(1.0));
    return out;
}

inline CVector gen_rician(Rng& rng, double beta, double rician_factor, const CVector& los) {
    CMatrix m(1, los.size());
    for (std::size_t i = 0; i < los.size(); ++i) m(0, i) = los[i];
    const CMatrix r = gen_rician(rng, beta, rician_factor, m);
    return CVector(std::vector<cplx>(r.data().begin(), r.data().end()));
}

/// Nearly square grid (nx <= ny) with nx * ny == n.
inline std::pair<std::size_t, std::size_t> near_square_grid(std::size_t n) {
    if (n == 0) throw std::invalid_argument("near_square_grid: n must be >= 1");
    std::size_t nx = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (nx > 1 && n % nx != 0) --nx;
    return {nx, n / nx};
}

/// Users uniformly distributed over the disc of the configured radius (height 0).
inline std::vector<Vec3> sample_users(const SystemConfig& cfg, Rng& rng) {
    std::vector<Vec3> users(cfg.K);
    for (auto& u : users) {
        const double rad = cfg.user_radius * std::sqrt(rng.uniform());
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        u = {cfg.user_center.x + rad * std::cos(ang), cfg.user_center.y + rad * std::sin(ang), 0.0};
    }
    return users;
}

namespace detail {

inline CVector ris_response(const SystemConfig& cfg, const RisConfig& ris, const Vec3& toward) {
    const Angles a = angles_between(ris.position, toward, ris.orientation);
    return upa_response(ris.nx, ris.ny, cfg.spacing_x, cfg.spacing_y, a.theta(), a.omega());
}

inline CVector bs_response(const SystemConfig& cfg, const Vec3& toward) {
    const Vec3 d = toward - cfg.bs_position;
    const double len = d.length();
    if (!(len > 0.0)) throw std::invalid_argument("gen_channel_set: BS coincides with a RIS");
    const double s = std::clamp(d.dot(cfg.bs_array_axis) / (len * cfg.bs_array_axis.length()), -1.0, 1.0);
    return ula_response(cfg.M, std::asin(s));
}

inline CMatrix bs_feed(const SystemConfig& cfg, const RisConfig& ris, Rng& rng) {
    const double lam = cfg.wavelength();
    const CMatrix los = outer_adj(ris_response(cfg, ris, cfg.bs_position), bs_response(cfg, ris.position));
    const double beta =
        friis_path_loss((ris.position - cfg.bs_position).length(), lam, cfg.antenna_area(), cfg.element_area());
    return gen_rician(rng, beta, cfg.rician_factor, los);
}

}  // namespace detail

struct ChannelOptions {
    /// Also draw BS -> RIS l feeds for l >= 1 (single-reflection baseline).
    bool direct_bs_links = false;
};

/// Draws user positions and every channel of one realization. Draw order is
/// users, G1, inter-RIS, RIS-user, then optional direct feeds, so adding the
/// optional feeds leaves the other channels unchanged for a given seed.
inline ChannelSet gen_channel_set(const SystemConfig& cfg, Rng& rng, ChannelOptions opts = {}) {
    cfg.validate();
    const double lam = cfg.wavelength();
    const double a_ant = cfg.antenna_area();
    const double a_el = cfg.element_area();
    const std::size_t L = cfg.L();

    ChannelSet set;
    set.users = sample_users(cfg, rng);
    set.G1 = detail::bs_feed(cfg, cfg.ris[0], rng);

    for (std::size_t l = 1; l < L; ++l) {
        const auto& prev = cfg.ris[l - 1];
        const auto& cur = cfg.ris[l];
        const double d = (cur.position - prev.position).length();
        if (!(d > 0.0)) throw std::invalid_argument("gen_channel_set: coincident RIS positions");
        const CMatrix los =
            outer_adj(detail::ris_response(cfg, cur, prev.position), detail::ris_response(cfg, prev, cur.position));
        set.inter.push_back(gen_rician(rng, friis_path_loss(d, lam, a_el, a_el), cfg.rician_factor, los));
    }

    set.g.assign(L, {});
    for (std::size_t l = 0; l < L; ++l) {
        const auto& r = cfg.ris[l];
        for (const auto& u : set.users) {
            const double d = (u - r.position).length();
            if (!(d > 0.0)) throw std::invalid_argument("gen_channel_set: user coincides with a RIS");
            const CVector los = detail::ris_response(cfg, r, u);
            set.g[l].push_back(gen_rician(rng, friis_path_loss(d, lam, a_el, a_ant), cfg.rician_factor, los));
        }
    }

    if (opts.direct_bs_links) {
        set.bs_to_ris.push_back(set.G1);
        for (std::size_t l = 1; l < L; ++l) set.bs_to_ris.push_back(detail::bs_feed(cfg, cfg.ris[l], rng));
    }
    return set;
}

enum class ErrorScale {
    absolute,      // entries get CN(0, v)
    channel_gain,  // entries of each channel block get CN(0, v * mean |entry|^2 of that block)
};

/// Estimated channels: every entry plus independent zero-mean complex Gaussian noise.
inline ChannelSet perturb_channels(const ChannelSet& set, double error_variance, Rng& rng,
                                   ErrorScale scale = ErrorScale::absolute) {
    if (!(error_variance >= 0.0)) throw std::invalid_argument("perturb_channels: variance must be >= 0");
    ChannelSet out = set;
    if (error_variance == 0.0) return out;
    auto add = [&](std::span<cplx> xs) {
        double var = error_variance;
        if (scale == ErrorScale::channel_gain && !xs.empty()) {
            double p = 0.0;
            for (const auto& x : xs) p += std::norm(x);
            var *= p / static_cast<double>(xs.size());
        }
        for (auto& x : xs) x += rng.cscg(var);
    };
    add(out.G1.data());
    for (auto& h : out.inter) add(h.data());
    for (auto& per_ris : out.g)
        for (auto& v : per_ris) add(v.span());
    for (auto& f : out.bs_to_ris) add(f.data());
    return out;
}

}  // namespace risbeam

#endif
