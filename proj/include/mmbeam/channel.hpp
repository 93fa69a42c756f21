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

#ifndef MMBEAM_CHANNEL_HPP
#define MMBEAM_CHANNEL_HPP

#include "core.hpp"
#include "random.hpp"

#include <vector>

namespace mmbeam
{

// ---------- Steering vectors and codebooks ----------

// Half-wavelength ULA response u(N, a) = [1, e^{j pi a}, ..., e^{j (N-1) pi a}]^T / sqrt(N).
// `direction` is the sine of the physical angle.
class SteeringVector
{
  public:
    SteeringVector(int n_antennas, double direction)
        : direction_(direction), entries_(n_antennas)
    {
        if (n_antennas < 1)
            throw std::invalid_argument("SteeringVector: n_antennas must be >= 1");
        if (!(direction >= -1.0 && direction <= 1.0))
            throw std::domain_error("SteeringVector: direction must lie in [-1, 1]");
        const double amp = 1.0 / std::sqrt(static_cast<double>(n_antennas));
        for (int i = 0; i < n_antennas; ++i)
            entries_(i) = std::polar(amp, pi * i * direction);
    }

    int size() const { return static_cast<int>(entries_.size()); }
    double direction() const { return direction_; }
    const ComplexVector &entries() const { return entries_; }
    cd operator()(int i) const { return entries_(i); }

  private:
    double direction_;
    ComplexVector entries_;
};

inline SteeringVector steering_vector(int n_antennas, double direction)
{
    return SteeringVector(n_antennas, direction);
}

// N equally spaced beams; codeword n (0-based) points at -1 + (2n+1)/N.
class Codebook
{
  public:
    explicit Codebook(int n_antennas)
    {
        if (n_antennas < 1)
            throw std::invalid_argument("Codebook: n_antennas must be >= 1");
        codewords_.reserve(n_antennas);
        matrix_.resize(n_antennas, n_antennas);
        for (int n = 0; n < n_antennas; ++n)
        {
            codewords_.emplace_back(n_antennas, direction(n_antennas, n));
            matrix_.col(n) = codewords_.back().entries();
        }
    }

    static double direction(int n_antennas, int index)
    {
        return -1.0 + (2.0 * index + 1.0) / n_antennas;
    }

    int size() const { return static_cast<int>(codewords_.size()); }
    int n_antennas() const { return size(); }
    const SteeringVector &operator[](int n) const { return codewords_.at(n); }

    // Codewords as columns.
    const ComplexMatrix &matrix() const { return matrix_; }

  private:
    std::vector<SteeringVector> codewords_;
    ComplexMatrix matrix_;
};

inline Codebook make_codebook(int n_antennas)
{
    return Codebook(n_antennas);
}

// UE-side and BS-side codebooks of one link geometry.
struct Codebooks
{
    Codebooks(int n_ue, int n_bs) : ue(n_ue), bs(n_bs) {}
    Codebook ue;
    Codebook bs;
    int n_ue() const { return ue.size(); }
    int n_bs() const { return bs.size(); }
};

// ---------- Geometric channel ----------

struct ChannelParams
{
    std::vector<cd> gains;         // beta_l
    std::vector<double> aod_sines; // phi_l, BS side
    std::vector<double> aoa_sines; // theta_l, UE side

    int n_paths() const { return static_cast<int>(gains.size()); }

    void validate() const
    {
        if (gains.empty())
            throw std::invalid_argument("ChannelParams: at least one path required");
        if (aod_sines.size() != gains.size() || aoa_sines.size() != gains.size())
            throw std::invalid_argument("ChannelParams: gains, AoD and AoA lengths differ");
        for (std::size_t l = 0; l < gains.size(); ++l)
            if (!(std::abs(aod_sines[l]) <= 1.0 && std::abs(aoa_sines[l]) <= 1.0))
                throw std::domain_error("ChannelParams: direction sines must lie in [-1, 1]");
    }
};

// H = sqrt(N_BS N_UE / L) sum_l beta_l a_UE(theta_l) a_BS(phi_l)^H
inline ComplexMatrix assemble_channel(const ChannelParams &params, int n_ue, int n_bs)
{
    params.validate();
    const int L = params.n_paths();
    ComplexMatrix H = ComplexMatrix::Zero(n_ue, n_bs);
    for (int l = 0; l < L; ++l)
    {
        const SteeringVector a_ue(n_ue, params.aoa_sines[l]);
        const SteeringVector a_bs(n_bs, params.aod_sines[l]);
        H.noalias() += params.gains[l] * a_ue.entries() * a_bs.entries().adjoint();
    }
    H *= std::sqrt(static_cast<double>(n_bs) * n_ue / L);
    return H;
}

struct ChannelRealization
{
    ChannelParams params;
    ComplexMatrix matrix; // N_UE x N_BS downlink channel

    int n_ue() const { return static_cast<int>(matrix.rows()); }
    int n_bs() const { return static_cast<int>(matrix.cols()); }
};

inline ChannelRealization make_channel(ChannelParams params, int n_ue, int n_bs)
{
    ComplexMatrix H = assemble_channel(params, n_ue, n_bs);
    return {std::move(params), std::move(H)};
}

// Random path-count rule and gain variances. The first path is the dominant one.
struct ChannelSpec
{
    int min_paths = 3;
    int max_paths = 5;
    double dominant_variance = 1.0;
    double other_variance = 0.1;

    void validate() const
    {
        if (min_paths < 1 || max_paths < min_paths)
            throw ConfigError("ChannelSpec: need 1 <= min_paths <= max_paths");
        if (!(dominant_variance > 0.0) || !(other_variance > 0.0))
            throw ConfigError("ChannelSpec: gain variances must be positive");
    }

    // E[sum_l |beta_l|^2 / L], the expected per-entry power of H.
    double mean_entry_power() const
    {
        double acc = 0.0;
        for (int L = min_paths; L <= max_paths; ++L)
            acc += (dominant_variance + (L - 1) * other_variance) / L;
        return acc / (max_paths - min_paths + 1);
    }
};

inline ChannelRealization gen_channel(const ChannelSpec &spec, int n_ue, int n_bs, Rng &rng)
{
    spec.validate();
    if (n_ue < 1 || n_bs < 1)
        throw ConfigError("gen_channel: antenna counts must be >= 1");
    const int L = spec.min_paths + static_cast<int>(uniform_index(rng, spec.max_paths - spec.min_paths + 1));
    ChannelParams p;
    p.gains.reserve(L);
    for (int l = 0; l < L; ++l)
    {
        p.gains.push_back(complex_normal(rng, l == 0 ? spec.dominant_variance : spec.other_variance));
        p.aod_sines.push_back(uniform(rng, -1.0, 1.0));
        p.aoa_sines.push_back(uniform(rng, -1.0, 1.0));
    }
    return make_channel(std::move(p), n_ue, n_bs);
}

// H^v = W^T H F^*; entry (i, j) = w_c(i)^T H f_c(j)^*.
inline ComplexMatrix virtual_channel(const ComplexMatrix &H, const Codebook &ue_book, const Codebook &bs_book)
{
    if (H.rows() != ue_book.size() || H.cols() != bs_book.size())
        throw ShapeError("virtual_channel: channel is " + std::to_string(H.rows()) + "x" +
                         std::to_string(H.cols()) + ", codebooks are " + std::to_string(ue_book.size()) + "/" +
                         std::to_string(bs_book.size()));
    return ue_book.matrix().transpose() * H * bs_book.matrix().conjugate();
}

inline ComplexMatrix virtual_channel(const ComplexMatrix &H, const Codebooks &books)
{
    return virtual_channel(H, books.ue, books.bs);
}

// Closed-form |a_BS(phi)^H f_c(n)^*|: a Dirichlet kernel in phi + dir(n).
// `index` is 0-based. The removable singularity (x = 0, +-2) evaluates to 1.
inline double leakage_correlation(int n_bs, double phi, int index)
{
    if (n_bs < 1 || index < 0 || index >= n_bs)
        throw std::out_of_range("leakage_correlation: codeword index out of range");
    const double x = phi + Codebook::direction(n_bs, index);
    const double den = std::sin(pi * x / 2.0);
    if (std::abs(den) < 1e-12)
        return 1.0;
    const double num = std::sin(pi * n_bs * x / 2.0);
    return std::min(1.0, std::abs(num / den) / n_bs);
}

} // namespace mmbeam

#endif
