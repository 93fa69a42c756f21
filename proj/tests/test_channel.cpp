// SPDX-License-Identifier: Apache-2.0
//
// mmbeam: beam training and allocation for multiuser mmWave massive MIMO
// Copyright (C) 2026 The mmbeam authors
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

#include <catch2/catch_amalgamated.hpp>

#include <mmbeam/channel.hpp>

// Covered tests:
// - Steering vector entries, norm and constant modulus
// - Codebook directions and codeword values
// - Channel assembly from path parameters, reconstruction, determinism, mean power
// - Virtual channel vs. triple-loop oracle, on-grid peak, shape errors
// - Leakage closed form vs. direct inner product, worst case, range

using namespace mmbeam;
using Catch::Approx;

TEST_CASE("Channel - Steering vector")
{
    auto v1 = steering_vector(1, 0.37);
    CHECK(std::abs(v1(0) - cd(1.0, 0.0)) < 1e-15);

    auto v2 = steering_vector(2, 1.0);
    CHECK(std::abs(v2(0) - cd(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(v2(1) - cd(-1.0 / std::sqrt(2.0), 0.0)) < 1e-15);

    auto v4 = steering_vector(4, 0.0);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(v4(i) - cd(0.5, 0.0)) < 1e-15);

    CHECK_THROWS_AS(steering_vector(4, 1.5), std::domain_error);
    CHECK_THROWS_AS(steering_vector(4, -1.0001), std::domain_error);
    CHECK_THROWS_AS(steering_vector(0, 0.0), std::invalid_argument);

    Rng rng(7);
    for (int t = 0; t < 200; ++t)
    {
        const int n = 1 + static_cast<int>(uniform_index(rng, 128));
        const double a = uniform(rng, -1.0, 1.0);
        auto v = steering_vector(n, a);
        CHECK(std::abs(v.entries().norm() - 1.0) < 1e-12);
        for (int i = 0; i < n; ++i)
        {
            CHECK(std::abs(std::abs(v(i)) - 1.0 / std::sqrt(double(n))) < 1e-12);
            const cd expect = std::exp(cd(0.0, pi * i * a)) / std::sqrt(double(n));
            CHECK(std::abs(v(i) - expect) < 1e-12);
        }
    }
}

TEST_CASE("Channel - Codebook")
{
    auto b2 = make_codebook(2);
    CHECK(b2.size() == 2);
    // First codeword points at -1/2: (1/sqrt2)[1, -j]
    CHECK(std::abs(b2[0](0) - cd(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(b2[0](1) - cd(0.0, -1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(b2[1].direction() == Approx(0.5).margin(1e-15));

    auto b64 = make_codebook(64);
    CHECK(b64.size() == 64);
    for (int n = 0; n < 64; ++n)
    {
        CHECK(std::abs(b64[n].direction() - (-63.0 + 2.0 * n) / 64.0) < 1e-12);
        CHECK(std::abs(b64[n].entries().norm() - 1.0) < 1e-12);
        CHECK((b64.matrix().col(n) - b64[n].entries()).norm() == 0.0);
    }

    // DFT codebook: codewords are orthonormal
    const ComplexMatrix G = b64.matrix().adjoint() * b64.matrix();
    CHECK((G - ComplexMatrix::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Channel - Assembly and generation")
{
    // Single path at broadside, 2x2: every entry equals 1
    ChannelParams p{{cd(1.0, 0.0)}, {0.0}, {0.0}};
    const ComplexMatrix H = assemble_channel(p, 2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(std::abs(H(r, c) - cd(1.0, 0.0)) < 1e-14);

    CHECK_THROWS_AS(assemble_channel(ChannelParams{{cd(1.0)}, {1.2}, {0.0}}, 2, 2), std::domain_error);
    CHECK_THROWS_AS(assemble_channel(ChannelParams{{cd(1.0)}, {0.0, 0.1}, {0.0}}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(assemble_channel(ChannelParams{}, 2, 2), std::invalid_argument);

    ChannelSpec spec;
    Rng a(123), b(123);
    const auto ca = gen_channel(spec, 16, 64, a);
    const auto cb = gen_channel(spec, 16, 64, b);
    CHECK(ca.matrix == cb.matrix);
    CHECK(ca.params.n_paths() >= 3);
    CHECK(ca.params.n_paths() <= 5);

    // Reconstruction with an independent element-wise loop
    Rng rng(99);
    for (int t = 0; t < 50; ++t)
    {
        const auto ch = gen_channel(spec, 4, 8, rng);
        const int L = ch.params.n_paths();
        double worst = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 8; ++j)
            {
                cd acc = 0.0;
                for (int l = 0; l < L; ++l)
                    acc += ch.params.gains[l] * std::exp(cd(0.0, pi * i * ch.params.aoa_sines[l])) / 2.0 *
                           std::exp(cd(0.0, -pi * j * ch.params.aod_sines[l])) / std::sqrt(8.0);
                acc *= std::sqrt(32.0 / L);
                worst = std::max(worst, std::abs(acc - ch.matrix(i, j)));
            }
        CHECK(worst < 1e-10 * std::max(1.0, ch.matrix.norm()));
        CHECK(all_finite(ch.matrix));
    }

    // E||H||_F^2 = N_BS N_UE E[sum |beta|^2 / L]
    double acc = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t)
        acc += gen_channel(spec, 16, 64, rng).matrix.squaredNorm();
    const double expected = 16.0 * 64.0 * spec.mean_entry_power();
    CHECK(std::abs(acc / draws - expected) / expected < 0.03);

    CHECK_THROWS_AS(gen_channel(ChannelSpec{0, 3}, 4, 4, rng), ConfigError);
    CHECK_THROWS_AS(gen_channel(ChannelSpec{3, 5, -1.0}, 4, 4, rng), ConfigError);
}

TEST_CASE("Channel - Virtual channel")
{
    const Codebooks books(4, 8);
    CHECK(virtual_channel(ComplexMatrix::Zero(4, 8), books).norm() == 0.0);
    CHECK_THROWS_AS(virtual_channel(ComplexMatrix::Zero(4, 7), books), ShapeError);

    Rng rng(5);
    for (int t = 0; t < 20; ++t)
    {
        const auto ch = gen_channel(ChannelSpec{}, 4, 8, rng);
        const ComplexMatrix V = virtual_channel(ch.matrix, books);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 8; ++j)
            {
                cd acc = 0.0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 8; ++b)
                        acc += books.ue[i](a) * ch.matrix(a, b) * std::conj(books.bs[j](b));
                CHECK(std::abs(acc - V(i, j)) < 1e-10);
            }
    }

    // On-grid single path: one peak of magnitude sqrt(N_BS N_UE) |beta|. Neither side is
    // conjugated against the path, so codeword n matches a path at minus its direction.
    const Codebooks big(16, 64);
    const int ue_idx = 5, bs_idx = 40;
    const cd beta(0.6, -0.8);
    ChannelParams p{{beta}, {-Codebook::direction(64, bs_idx)}, {-Codebook::direction(16, ue_idx)}};
    const ComplexMatrix V = virtual_channel(assemble_channel(p, 16, 64), big);
    Eigen::Index r, c;
    const double peak = V.cwiseAbs().maxCoeff(&r, &c);
    CHECK(peak == Approx(std::sqrt(64.0 * 16.0) * std::abs(beta)).epsilon(1e-12));
    CHECK(r == ue_idx);
    CHECK(c == bs_idx);
    ComplexMatrix rest = V;
    rest(r, c) = 0.0;
    CHECK(rest.cwiseAbs().maxCoeff() < 1e-9 * peak);
}

TEST_CASE("Channel - Leakage correlation")
{
    for (int n = 0; n < 64; ++n)
        CHECK(leakage_correlation(64, -Codebook::direction(64, n), n) == Approx(1.0).margin(1e-12));

    // Half a grid step off: 1 / (64 sin(pi / 128))
    const double worst = 1.0 / (64.0 * std::sin(pi / 128.0));
    CHECK(worst == Approx(0.63668).margin(1e-4));
    const int n = 20;
    CHECK(leakage_correlation(64, -Codebook::direction(64, n) + 1.0 / 64.0, n) == Approx(worst).margin(1e-12));

    const Codebook book(64);
    Rng rng(11);
    for (int t = 0; t < 100; ++t)
    {
        const double phi = uniform(rng, -1.0, 1.0);
        const int idx = static_cast<int>(uniform_index(rng, 64));
        const double direct = std::abs(
            (steering_vector(64, phi).entries().adjoint() * book[idx].entries().conjugate())(0));
        const double closed = leakage_correlation(64, phi, idx);
        CHECK(std::abs(direct - closed) < 1e-9);
        CHECK(closed >= 0.0);
        CHECK(closed <= 1.0);
    }
    CHECK_THROWS_AS(leakage_correlation(64, 0.0, 64), std::out_of_range);
}
