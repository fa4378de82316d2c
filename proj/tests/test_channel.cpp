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

#include <cmath>
#include <limits>

#include "risbeam/channel.hpp"

using namespace risbeam;

TEST(Ula, SmallCases) {
    EXPECT_EQ(ula_response(1, 0.7), CVector{1.0});
    const CVector flat = ula_response(2, 0.0);
    EXPECT_NEAR(std::abs(flat[1] - 1.0), 0.0, 1e-15);
    const CVector end = ula_response(2, kPi / 2.0);
    EXPECT_NEAR(std::abs(end[1] + 1.0), 0.0, 1e-15);
    EXPECT_THROW(ula_response(0, 0.0), std::invalid_argument);
}

TEST(Ula, EntryPhasesAndUnitModulus) {
    const double t = 0.37;
    const CVector a = ula_response(7, t);
    for (std::size_t m = 0; m < a.size(); ++m) {
        EXPECT_NEAR(std::abs(a[m]), 1.0, 1e-15);
        EXPECT_NEAR(std::abs(a[m] - std::polar(1.0, kPi * m * std::sin(t))), 0.0, 1e-14);
    }
}

TEST(Upa, SmallCases) {
    EXPECT_EQ(upa_response(1, 1, 0.2, 0.2, 0.3, 0.4), CVector{1.0});
    for (const auto& x : upa_response(3, 4, 0.2, 0.2, 0.0, 0.0)) EXPECT_EQ(x, cplx(1.0));
    const CVector v = upa_response(2, 1, 0.5, 0.5, 1.0, 0.0);
    EXPECT_NEAR(std::abs(v[1] + 1.0), 0.0, 1e-15);
    EXPECT_THROW(upa_response(2, 2, 0.2, 0.2, 1.5, 0.0), std::invalid_argument);
    EXPECT_THROW(upa_response(0, 2, 0.2, 0.2, 0.0, 0.0), std::invalid_argument);
}

TEST(Upa, KroneckerStructure) {
    const double th = 0.3, om = -0.6, dx = 0.2, dy = 0.35;
    const CVector v = upa_response(3, 4, dx, dy, th, om);
    ASSERT_EQ(v.size(), 12u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const cplx want = std::polar(1.0, 2.0 * kPi * (i * dx * th + j * dy * om));
            EXPECT_NEAR(std::abs(v[i * 4 + j] - want), 0.0, 1e-13);
        }
    const CVector line = upa_response(5, 1, dx, dy, th, om);
    const CVector xs = upa_response(5, 1, dx, dy, th, 0.9);
    EXPECT_EQ(line, xs);
}

TEST(Angles, NormalAndInPlaneDirections) {
    const Angles n = angles_between({0, 0, 0}, {0, 5, 0});
    EXPECT_NEAR(n.zenith, 0.0, 1e-15);
    const Angles x = angles_between({0, 0, 0}, {2, 0, 0});
    EXPECT_NEAR(x.zenith, kPi / 2.0, 1e-15);
    EXPECT_NEAR(x.azimuth, 0.0, 1e-15);
    EXPECT_THROW(angles_between({1, 2, 3}, {1, 2, 3}), std::invalid_argument);
}

TEST(Angles, DirectionCosinesStayInTheUnitDisc) {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Vec3 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Angles ang = angles_between(a, b);
        EXPECT_LE(ang.theta() * ang.theta() + ang.omega() * ang.omega(), 1.0 + 1e-12);
    }
}

TEST(Friis, UnitsAndInverseSquare) {
    const double lam = 0.125;
    EXPECT_NEAR(friis_path_loss(lam, lam, lam * lam, lam * lam), 1.0, 1e-15);
    const double b1 = friis_path_loss(3.0, lam, 0.01, 0.02);
    EXPECT_NEAR(friis_path_loss(6.0, lam, 0.01, 0.02), b1 / 4.0, 1e-18);
    EXPECT_DOUBLE_EQ(friis_path_loss(3.0, lam, 0.02, 0.01), b1);
    EXPECT_THROW(friis_path_loss(0.0, lam, 1, 1), std::invalid_argument);
    EXPECT_THROW(friis_path_loss(1.0, lam, -1, 1), std::invalid_argument);
}

TEST(Friis, TableGeometryHandValue) {
    const double lam = 299792458.0 / 2.4e9;
    const double d = 3.162;
    const double want = 8.115187057110166e-06;  // 0.0052 lam^2 / d^2, evaluated offline
    EXPECT_NEAR(friis_path_loss(d, lam, 0.13 * lam * lam, lam * lam / 25.0), want, want * 1e-6);
}

TEST(Rician, LosDominantLimit) {
    Rng rng(1);
    const CMatrix los = outer_adj(ula_response(4, 0.3), ula_response(3, -0.2));
    const double beta = 2e-6;
    const CMatrix g = gen_rician(rng, beta, 1e9, los);
    for (std::size_t i = 0; i < los.data().size(); ++i)
        EXPECT_NEAR(std::abs(g.data()[i] - std::sqrt(beta) * los.data()[i]) / std::sqrt(beta), 0.0, 1e-3);
    const CMatrix pure = gen_rician(rng, beta, std::numeric_limits<double>::infinity(), los);
    for (std::size_t i = 0; i < los.data().size(); ++i) EXPECT_EQ(pure.data()[i], std::sqrt(beta) * los.data()[i]);
}

TEST(Rician, SecondMomentEqualsPathLoss) {
    const double beta = 3e-5;
    for (double F : {0.0, 3.0, 100.0}) {
        Rng rng(17);
        const CMatrix los(100, 100, cplx(std::polar(1.0, 0.4)));
        const CMatrix g = gen_rician(rng, beta, F, los);
        double p = 0.0;
        for (const auto& x : g.data()) p += std::norm(x);
        p /= static_cast<double>(g.data().size());
        EXPECT_GT(p, 0.9 * beta) << "F=" << F;
        EXPECT_LT(p, 1.1 * beta) << "F=" << F;
    }
}

TEST(Rician, InvalidInputs) {
    Rng rng(1);
    EXPECT_THROW(gen_rician(rng, 0.0, 3.0, CMatrix(1, 1)), std::invalid_argument);
    EXPECT_THROW(gen_rician(rng, 1.0, -1.0, CMatrix(1, 1)), std::invalid_argument);
}

TEST(Grid, NearSquareFactorizations) {
    EXPECT_EQ(near_square_grid(60), (std::pair<std::size_t, std::size_t>{6, 10}));
    EXPECT_EQ(near_square_grid(30), (std::pair<std::size_t, std::size_t>{5, 6}));
    EXPECT_EQ(near_square_grid(16), (std::pair<std::size_t, std::size_t>{4, 4}));
    EXPECT_EQ(near_square_grid(7), (std::pair<std::size_t, std::size_t>{1, 7}));
    EXPECT_THROW(near_square_grid(0), std::invalid_argument);
}

TEST(ChannelSet, DimensionsAndStructure) {
    SystemConfig cfg;
    cfg.M = 5;
    cfg.K = 2;
    cfg.ris = {RisConfig{2, 3, {1, 0, 3}, {}}, RisConfig{3, 3, {5, 0, 3}, {}}, RisConfig{1, 4, {9, 0, 3}, {}}};
    Rng rng(4);
    const ChannelSet s = gen_channel_set(cfg, rng);
    EXPECT_NO_THROW(s.check_consistent());
    EXPECT_EQ(s.G1.rows(), 6u);
    EXPECT_EQ(s.G1.cols(), 5u);
    ASSERT_EQ(s.inter.size(), 2u);
    EXPECT_EQ(s.H(1).rows(), 9u);
    EXPECT_EQ(s.H(1).cols(), 6u);
    EXPECT_EQ(s.H(2).rows(), 4u);
    EXPECT_EQ(s.H(2).cols(), 9u);
    EXPECT_EQ(s.g[2][1].size(), 4u);
    for (const auto& u : s.users) {
        EXPECT_EQ(u.z, 0.0);
        EXPECT_LE((u - cfg.user_center).length(), cfg.user_radius);
    }

    cfg.ris.resize(1);
    Rng rng1(4);
    const ChannelSet one = gen_channel_set(cfg, rng1);
    EXPECT_TRUE(one.inter.empty());
    EXPECT_EQ(one.g.size(), 1u);
    EXPECT_EQ(one.g[0].size(), 2u);
}

TEST(ChannelSet, LosPartOfBsFeedHasRankOne) {
    SystemConfig cfg;
    cfg.rician_factor = std::numeric_limits<double>::infinity();
    Rng rng(2);
    const ChannelSet s = gen_channel_set(cfg, rng);
    // every 2x2 minor of a rank-one matrix vanishes
    double worst = 0.0, scale = 0.0;
    for (const auto& x : s.G1.data()) scale = std::max(scale, std::norm(x));
    for (std::size_t i = 1; i < s.G1.rows(); ++i)
        for (std::size_t j = 1; j < s.G1.cols(); ++j)
            worst = std::max(worst, std::abs(s.G1(0, 0) * s.G1(i, j) - s.G1(0, j) * s.G1(i, 0)));
    EXPECT_LT(worst, 1e-12 * scale);
}

TEST(ChannelSet, DeterministicAndOptionalFeedsDoNotShiftDraws) {
    SystemConfig cfg;
    Rng a(77), b(77), c(77);
    const ChannelSet s1 = gen_channel_set(cfg, a);
    const ChannelSet s2 = gen_channel_set(cfg, b);
    EXPECT_EQ(s1, s2);
    const ChannelSet s3 = gen_channel_set(cfg, c, ChannelOptions{.direct_bs_links = true});
    EXPECT_EQ(s3.G1, s1.G1);
    EXPECT_EQ(s3.inter, s1.inter);
    EXPECT_EQ(s3.g, s1.g);
    ASSERT_EQ(s3.bs_to_ris.size(), 2u);
    EXPECT_EQ(s3.bs_to_ris[0], s1.G1);
    EXPECT_EQ(s3.bs_to_ris[1].rows(), cfg.N(1));
}

TEST(ChannelSet, InvalidGeometry) {
    SystemConfig cfg;
    cfg.ris[1].position = cfg.ris[0].position;
    Rng rng(1);
    EXPECT_THROW(gen_channel_set(cfg, rng), std::invalid_argument);
    SystemConfig bad;
    bad.K = 0;
    EXPECT_THROW(gen_channel_set(bad, rng), std::invalid_argument);
    bad = SystemConfig{};
    bad.tx_power_w = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Perturb, ZeroVarianceIsIdentity) {
    SystemConfig cfg;
    Rng rng(1), err(2);
    const ChannelSet s = gen_channel_set(cfg, rng);
    EXPECT_EQ(perturb_channels(s, 0.0, err), s);
    EXPECT_THROW(perturb_channels(s, -1.0, err), std::invalid_argument);
}

TEST(Perturb, AbsoluteErrorVariance) {
    SystemConfig cfg;
    for (auto& r : cfg.ris) r.nx = r.ny = 12;
    Rng rng(1), err(2);
    const ChannelSet s = gen_channel_set(cfg, rng);
    const ChannelSet p = perturb_channels(s, 1e-4, err);
    double acc = 0.0;
    std::size_t n = 0;
    auto tally = [&](std::span<const cplx> a, std::span<const cplx> b) {
        for (std::size_t i = 0; i < a.size(); ++i, ++n) acc += std::norm(a[i] - b[i]);
    };
    tally(p.G1.data(), s.G1.data());
    for (std::size_t i = 0; i < s.inter.size(); ++i) tally(p.inter[i].data(), s.inter[i].data());
    for (std::size_t l = 0; l < s.L(); ++l)
        for (std::size_t k = 0; k < s.K(); ++k) tally(p.g[l][k].span(), s.g[l][k].span());
    const double mean = acc / static_cast<double>(n);
    EXPECT_GT(mean, 0.9e-4);
    EXPECT_LT(mean, 1.1e-4);

    Rng other(3);
    EXPECT_NE(perturb_channels(s, 1e-4, other), p);
}

TEST(Perturb, ChannelGainScaledError) {
    SystemConfig cfg;
    for (auto& r : cfg.ris) r.nx = r.ny = 12;
    Rng rng(1), err(2);
    const ChannelSet s = gen_channel_set(cfg, rng);
    const ChannelSet p = perturb_channels(s, 1e-2, err, ErrorScale::channel_gain);
    double ds = 0.0, ps = 0.0;
    for (std::size_t i = 0; i < s.G1.data().size(); ++i) {
        ds += std::norm(p.G1.data()[i] - s.G1.data()[i]);
        ps += std::norm(s.G1.data()[i]);
    }
    EXPECT_NEAR(ds / ps, 1e-2, 1e-3);
}
