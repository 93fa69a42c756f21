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

#ifndef MMBEAM_PRECODING_HPP
#define MMBEAM_PRECODING_HPP

#include "allocation.hpp"

#include <Eigen/SVD>

#include <optional>
#include <span>
#include <vector>

namespace mmbeam
{

// Hybrid precoder of one downlink slot. Columns of f_rf and f_bb follow `served`
// (ascending user index); combiners are indexed by user and empty when unserved.
struct PrecoderSet
{
    ComplexMatrix f_rf;
    ComplexMatrix f_bb;
    std::vector<std::optional<ComplexVector>> combiners;
    std::vector<int> served;

    int k_served() const { return static_cast<int>(served.size()); }

    // Column position of user k, or -1.
    int column_of(int k) const
    {
        for (int i = 0; i < k_served(); ++i)
            if (served[i] == k)
                return i;
        return -1;
    }
};

// F_RF column j = f_c(bs of served user j)^*, combiner w_k = w_c(ue of user k)^*.
// f_bb is left empty.
inline PrecoderSet assemble_analog(const Allocation &alloc, const Codebooks &books)
{
    PrecoderSet ps;
    ps.served = alloc.served_users();
    ps.combiners.resize(alloc.users());
    ps.f_rf.resize(books.n_bs(), ps.k_served());
    for (int j = 0; j < ps.k_served(); ++j)
    {
        const BeamPair &b = *alloc.assign[ps.served[j]];
        if (b.bs < 0 || b.bs >= books.n_bs() || b.ue < 0 || b.ue >= books.n_ue())
            throw std::out_of_range("assemble_analog: codeword index out of range");
        ps.f_rf.col(j) = books.bs[b.bs].entries().conjugate();
        ps.combiners[ps.served[j]] = books.ue[b.ue].entries().conjugate();
    }
    return ps;
}

// K_served x K_served estimate; entry (i, j) is user i's measurement at its own UE row
// and user j's BS column.
struct EffectiveChannelEstimate
{
    ComplexMatrix h_tilde;
};

inline EffectiveChannelEstimate estimate_effective_channel(std::span<const MeasurementMatrix> R,
                                                           const Allocation &alloc)
{
    const auto served = alloc.served_users();
    const int n = static_cast<int>(served.size());
    ComplexMatrix h(n, n);
    for (int i = 0; i < n; ++i)
    {
        const int ui = served[i];
        const int row = alloc.assign[ui]->ue;
        for (int j = 0; j < n; ++j)
        {
            const int col = alloc.assign[served[j]]->bs;
            if (!R[ui].is_tested(row, col))
                throw EstimationGapError(ui, row, col);
            h(i, j) = R[ui](row, col);
        }
    }
    return {std::move(h)};
}

// Measures the entries estimate_effective_channel needs that training skipped.
// Returns the number of tests added per user.
inline std::vector<int> top_up_measurements(const BeamSounder &sounder, std::span<MeasurementMatrix> R,
                                            const Allocation &alloc)
{
    std::vector<int> added(R.size(), 0);
    const auto served = alloc.served_users();
    for (int ui : served)
        for (int uj : served)
            if (sounder.ensure_tested(R[ui], alloc.assign[ui]->ue, alloc.assign[uj]->bs))
                ++added[ui];
    return added;
}

// Noiseless counterpart H-bar: w_i^H H_i f_j over the assembled analog precoder.
inline ComplexMatrix true_effective_channel(std::span<const ChannelRealization> channels, const PrecoderSet &ps)
{
    const int n = ps.k_served();
    ComplexMatrix h(n, n);
    for (int i = 0; i < n; ++i)
    {
        const int k = ps.served[i];
        const ComplexVector &w = *ps.combiners[k];
        h.row(i) = w.adjoint() * channels[k].matrix * ps.f_rf;
    }
    return h;
}

inline constexpr double max_condition_number = 1e12;

inline double condition_number(const ComplexMatrix &m)
{
    if (m.size() == 0)
        return 1.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto &s = svd.singularValues();
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

// H^H (H H^H)^{-1}. Throws RankDeficientError when cond(H H^H) exceeds 1e12.
inline ComplexMatrix zf_precoder(const EffectiveChannelEstimate &h)
{
    const ComplexMatrix &H = h.h_tilde;
    if (H.rows() != H.cols())
        throw ShapeError("zf_precoder: effective channel must be square");
    if (H.size() == 0)
        return ComplexMatrix(0, 0);
    const double cond = condition_number(H);
    if (!(cond * cond <= max_condition_number))
        throw RankDeficientError("zf_precoder: H H^H is singular or ill-conditioned (beam conflict?)");
    const ComplexMatrix gram = H * H.adjoint();
    return H.adjoint() * gram.partialPivLu().solve(ComplexMatrix::Identity(H.rows(), H.rows()));
}

// Moore-Penrose pseudo-inverse; the ZF substitute for rank-deficient estimates.
inline ComplexMatrix pinv_precoder(const EffectiveChannelEstimate &h)
{
    if (h.h_tilde.size() == 0)
        return ComplexMatrix(0, 0);
    return h.h_tilde.completeOrthogonalDecomposition().pseudoInverse();
}

// H^H ((P/K) H H^H + sigma^2 I)^{-1}.
inline ComplexMatrix mmse_precoder(const EffectiveChannelEstimate &h, double p_dl, int k, double sigma_dl_sq)
{
    const ComplexMatrix &H = h.h_tilde;
    if (H.rows() != H.cols())
        throw ShapeError("mmse_precoder: effective channel must be square");
    if (k < 1 && H.size() > 0)
        throw ConfigError("mmse_precoder: k must be >= 1");
    if (H.size() == 0)
        return ComplexMatrix(0, 0);
    const ComplexMatrix A =
        (p_dl / k) * H * H.adjoint() + sigma_dl_sq * ComplexMatrix::Identity(H.rows(), H.rows());
    if (sigma_dl_sq > 0.0)
        return H.adjoint() * A.ldlt().solve(ComplexMatrix::Identity(H.rows(), H.rows()));
    if (!(condition_number(A) <= max_condition_number))
        throw RankDeficientError("mmse_precoder: singular system with sigma^2 = 0");
    return H.adjoint() * A.partialPivLu().solve(ComplexMatrix::Identity(H.rows(), H.rows()));
}

// Scales column k of f_bb so that ||F_RF f_k|| = 1.
inline ComplexMatrix normalize_columns(const ComplexMatrix &f_rf, const ComplexMatrix &f_bb_raw)
{
    if (f_rf.cols() != f_bb_raw.rows())
        throw ShapeError("normalize_columns: F_RF and F_BB do not conform");
    ComplexMatrix out = f_bb_raw;
    for (Eigen::Index k = 0; k < out.cols(); ++k)
    {
        const double n = (f_rf * out.col(k)).norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DegeneratePrecoderError(static_cast<int>(k));
        out.col(k) /= n;
    }
    return out;
}

enum class DigitalScheme
{
    zf,
    mmse,
};

struct DigitalDesign
{
    ComplexMatrix f_bb;   // normalized
    bool conflict = false; // ZF fell back to the pseudo-inverse
};

// Digital stage on top of an assembled analog precoder. P/K uses the served count.
inline DigitalDesign design_digital(DigitalScheme scheme, const EffectiveChannelEstimate &h, const PrecoderSet &ps,
                                    double p_dl, double sigma_dl_sq)
{
    DigitalDesign d;
    ComplexMatrix raw;
    if (scheme == DigitalScheme::mmse)
        raw = mmse_precoder(h, p_dl, std::max(1, ps.k_served()), sigma_dl_sq);
    else
    {
        try
        {
            raw = zf_precoder(h);
        }
        catch (const RankDeficientError &)
        {
            raw = pinv_precoder(h);
            d.conflict = true;
        }
    }
    d.f_bb = normalize_columns(ps.f_rf, raw);
    return d;
}

} // namespace mmbeam

#endif
