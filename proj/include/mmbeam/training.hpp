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

#ifndef MMBEAM_TRAINING_HPP
#define MMBEAM_TRAINING_HPP

#include "channel.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace mmbeam
{

// Uplink training noise. Each despread measurement carries CN(0, sigma_ul^2 / (tau P_ul)).
struct NoiseModel
{
    double sigma_ul_sq = 0.0;
    int tau = 1;
    double p_ul = 1.0;

    double measurement_variance() const { return sigma_ul_sq / (tau * p_ul); }

    void validate(int k_users) const
    {
        if (sigma_ul_sq < 0.0)
            throw ConfigError("NoiseModel: sigma_ul^2 must be >= 0");
        if (tau < 1 || !(p_ul > 0.0))
            throw ConfigError("NoiseModel: tau >= 1 and P_ul > 0 required");
        if (tau < k_users)
            throw ConfigError("NoiseModel: pilot length tau must be >= K for orthogonal pilots");
    }
};

// N_UE x N_BS observations of one user plus which entries were actually measured.
// Rows index UE codewords, columns BS codewords (both 0-based).
class MeasurementMatrix
{
  public:
    MeasurementMatrix(int user, int n_ue, int n_bs)
        : user_(user), values_(ComplexMatrix::Zero(n_ue, n_bs)), tested_(Mask::Constant(n_ue, n_bs, false))
    {
    }

    int user() const { return user_; }
    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }
    const ComplexMatrix &values() const { return values_; }
    const Mask &tested() const { return tested_; }
    bool is_tested(int r, int c) const { return tested_(r, c); }
    cd operator()(int r, int c) const { return values_(r, c); }
    int tested_count() const { return static_cast<int>(tested_.count()); }

    void store(int r, int c, cd value)
    {
        if (tested_(r, c))
            throw std::logic_error("MeasurementMatrix: entry measured twice");
        tested_(r, c) = true;
        values_(r, c) = value;
    }

  private:
    int user_;
    ComplexMatrix values_;
    Mask tested_;
};

// One despread observation w^T H f^* + eta, eta ~ CN(0, sigma_ul^2 / (tau P_ul)).
inline cd measure_pair(const ComplexMatrix &H, const SteeringVector &ue_codeword, const SteeringVector &bs_codeword,
                       const NoiseModel &noise, Rng &rng)
{
    if (H.rows() != ue_codeword.size() || H.cols() != bs_codeword.size())
        throw ShapeError("measure_pair: codeword sizes do not match the channel");
    const cd signal = ue_codeword.entries().transpose() * H * bs_codeword.entries().conjugate();
    const double var = noise.measurement_variance();
    return var > 0.0 ? signal + complex_normal(rng, var) : signal;
}

// Literal uplink slot: users send sqrt(tau P_ul) phi_k through w, the BS combines with
// the N_RF codewords in `bs_codewords`, then despreads with phi_k^*. Pilots are DFT rows,
// which are orthonormal. Returns r_k (length N_RF) for every user. Meant for validating
// the algebraic shortcut on small sizes.
inline std::vector<ComplexVector> reference_slot_measurements(std::span<const ChannelRealization> channels,
                                                              const SteeringVector &ue_codeword,
                                                              std::span<const SteeringVector> bs_codewords,
                                                              const NoiseModel &noise, Rng &rng)
{
    const int K = static_cast<int>(channels.size());
    noise.validate(K);
    const int tau = noise.tau;
    const int n_bs = channels.front().n_bs();
    const int n_rf = static_cast<int>(bs_codewords.size());

    ComplexMatrix pilots(K, tau);
    for (int k = 0; k < K; ++k)
        for (int t = 0; t < tau; ++t)
            pilots(k, t) = std::polar(1.0 / std::sqrt(static_cast<double>(tau)), -2.0 * pi * k * t / tau);

    ComplexMatrix F(n_bs, n_rf);
    for (int m = 0; m < n_rf; ++m)
        F.col(m) = bs_codewords[m].entries();

    const double amp = std::sqrt(tau * noise.p_ul);
    ComplexMatrix Y = ComplexMatrix::Zero(n_rf, tau);
    for (int k = 0; k < K; ++k)
    {
        const ComplexMatrix H_ul = channels[k].matrix.transpose();
        Y += amp * F.adjoint() * H_ul * ue_codeword.entries() * pilots.row(k);
    }
    ComplexMatrix N(n_bs, tau);
    for (int i = 0; i < n_bs; ++i)
        for (int t = 0; t < tau; ++t)
            N(i, t) = noise.sigma_ul_sq > 0.0 ? complex_normal(rng, noise.sigma_ul_sq) : cd{};
    Y += F.adjoint() * N;

    std::vector<ComplexVector> out;
    out.reserve(K);
    for (int k = 0; k < K; ++k)
        out.emplace_back((pilots.row(k).conjugate() * Y.transpose()).transpose() / amp);
    return out;
}

// Noisy oracle for all codeword-pair measurements of one trial. The virtual channels
// are computed once; the noise of every (user, row, col) entry is drawn up front so
// that a given seed yields the same observation regardless of scheme or test order.
class BeamSounder
{
  public:
    BeamSounder(std::span<const ChannelRealization> channels, const Codebooks &books, const NoiseModel &noise,
                Rng &rng)
        : n_ue_(books.n_ue()), n_bs_(books.n_bs())
    {
        noise.validate(static_cast<int>(channels.size()));
        const double var = noise.measurement_variance();
        virtual_.reserve(channels.size());
        noise_.reserve(channels.size());
        for (const auto &ch : channels)
        {
            virtual_.push_back(virtual_channel(ch.matrix, books));
            ComplexMatrix field = ComplexMatrix::Zero(n_ue_, n_bs_);
            if (var > 0.0)
                for (int c = 0; c < n_bs_; ++c)
                    for (int r = 0; r < n_ue_; ++r)
                        field(r, c) = complex_normal(rng, var);
            noise_.push_back(std::move(field));
        }
    }

    int users() const { return static_cast<int>(virtual_.size()); }
    int n_ue() const { return n_ue_; }
    int n_bs() const { return n_bs_; }
    const ComplexMatrix &virtual_channel_of(int user) const { return virtual_.at(user); }

    cd measure(int user, int row, int col) const { return virtual_[user](row, col) + noise_[user](row, col); }

    void test(MeasurementMatrix &R, int row, int col) const { R.store(row, col, measure(R.user(), row, col)); }

    // Measures the entry if it has not been tested yet; returns whether a test happened.
    bool ensure_tested(MeasurementMatrix &R, int row, int col) const
    {
        if (R.is_tested(row, col))
            return false;
        test(R, row, col);
        return true;
    }

    std::vector<MeasurementMatrix> empty_measurements() const
    {
        std::vector<MeasurementMatrix> out;
        out.reserve(users());
        for (int k = 0; k < users(); ++k)
            out.emplace_back(k, n_ue_, n_bs_);
        return out;
    }

  private:
    int n_ue_, n_bs_;
    std::vector<ComplexMatrix> virtual_;
    std::vector<ComplexMatrix> noise_;
};

// ---------- Overhead accounting ----------

// Training cost of one run. Additional tests and feedback bits are per-user quantities;
// the scalar accessors average them over users.
struct OverheadReport
{
    int initial_tests = 0;
    std::vector<int> additional_per_user;
    std::vector<int> bits_per_user;

    static double mean_of(const std::vector<int> &v)
    {
        if (v.empty())
            return 0.0;
        return static_cast<double>(std::accumulate(v.begin(), v.end(), 0LL)) / static_cast<double>(v.size());
    }
    double additional_tests() const { return mean_of(additional_per_user); }
    double feedback_bits() const { return mean_of(bits_per_user); }
    double overall() const { return initial_tests + additional_tests(); }
};

struct TrainingResult
{
    std::vector<MeasurementMatrix> measurements;
    OverheadReport overhead;
};

inline int ceil_div(int a, int b)
{
    return (a + b - 1) / b;
}

inline int ceil_log2(int n)
{
    int bits = 0;
    while ((1LL << bits) < n)
        ++bits;
    return bits;
}

// Slots needed to test `scheduled` when every slot fixes one UE codeword (shared by all
// users) and combines with up to N_RF BS codewords.
inline int slots_for(const Mask &scheduled, int n_rf)
{
    int slots = 0;
    for (Eigen::Index r = 0; r < scheduled.rows(); ++r)
        slots += ceil_div(static_cast<int>(scheduled.row(r).count()), n_rf);
    return slots;
}

inline void check_geometry(int n_ue, int n_bs, int n_rf)
{
    if (n_ue < 1 || n_bs < 1)
        throw ConfigError("training: antenna counts must be >= 1");
    if (n_rf < 1 || n_rf > n_bs)
        throw ConfigError("training: need 1 <= N_RF <= N_BS");
}

// (i + j) odd in 1-based indexing; parity is the same in 0-based indexing.
inline Mask checkerboard_mask(int n_ue, int n_bs)
{
    Mask m(n_ue, n_bs);
    for (int r = 0; r < n_ue; ++r)
        for (int c = 0; c < n_bs; ++c)
            m(r, c) = ((r + c) % 2) == 1;
    return m;
}

// ---------- OP: orthogonal pilots, exhaustive ----------

inline TrainingResult op_training(const BeamSounder &sounder, int n_rf)
{
    check_geometry(sounder.n_ue(), sounder.n_bs(), n_rf);
    TrainingResult out{sounder.empty_measurements(), {}};
    for (auto &R : out.measurements)
        for (int c = 0; c < sounder.n_bs(); ++c)
            for (int r = 0; r < sounder.n_ue(); ++r)
                sounder.test(R, r, c);
    out.overhead.initial_tests = slots_for(Mask::Constant(sounder.n_ue(), sounder.n_bs(), true), n_rf);
    out.overhead.additional_per_user.assign(sounder.users(), 0);
    out.overhead.bits_per_user.assign(sounder.users(), 0);
    return out;
}

inline TrainingResult op_training(std::span<const ChannelRealization> channels, const Codebooks &books,
                                  const NoiseModel &noise, int n_rf, Rng &rng)
{
    return op_training(BeamSounder(channels, books, noise, rng), n_rf);
}

// ---------- Cross refinement ----------

namespace detail
{
// Index p maximizing (||v_p||_2 + ||v_{p+1}||_2) / (||v_p||_0 + ||v_{p+1}||_0).
inline int select_pair(const std::vector<double> &l2, const std::vector<int> &l0)
{
    const int n = static_cast<int>(l2.size());
    if (n == 1)
    {
        if (l0[0] == 0)
            throw NotFoundError("pair selection: all entries are zero");
        return 0;
    }
    int best = -1;
    double best_score = -1.0;
    for (int p = 0; p + 1 < n; ++p)
    {
        const int count = l0[p] + l0[p + 1];
        if (count == 0)
            continue;
        const double score = (l2[p] + l2[p + 1]) / count;
        if (score > best_score)
        {
            best_score = score;
            best = p;
        }
    }
    if (best < 0)
        throw NotFoundError("pair selection: all entries are zero");
    return best;
}
} // namespace detail

// Upper row p of the adjacent row pair (p, p+1) with the largest average power.
// Zero entries are treated as absent. Ties go to the smallest p.
inline int select_row_pair(const ComplexMatrix &R)
{
    std::vector<double> l2(R.rows());
    std::vector<int> l0(R.rows());
    for (Eigen::Index r = 0; r < R.rows(); ++r)
    {
        l2[r] = R.row(r).norm();
        l0[r] = static_cast<int>((R.row(r).array() != cd{}).count());
    }
    return detail::select_pair(l2, l0);
}

// Column analogue of select_row_pair.
inline int select_col_pair(const ComplexMatrix &R)
{
    std::vector<double> l2(R.cols());
    std::vector<int> l0(R.cols());
    for (Eigen::Index c = 0; c < R.cols(); ++c)
    {
        l2[c] = R.col(c).norm();
        l0[c] = static_cast<int>((R.col(c).array() != cd{}).count());
    }
    return detail::select_pair(l2, l0);
}

// Plus-shaped neighbourhood of the 2x2 block at rows {p, p+1}, cols {q, q+1}:
// the block rows widened by one column each side, and the block columns widened by
// one row each side. Twelve cells when interior; out-of-range cells are dropped.
struct CrossRegion
{
    int anchor_row = 0;
    int anchor_col = 0;
    std::vector<std::pair<int, int>> cells; // sorted by (row, col)

    // Cells on line `line` (0..3 for rows p-1, p, p+1, p+2).
    int cells_on_line(int line) const
    {
        const int row = anchor_row - 1 + line;
        return static_cast<int>(std::count_if(cells.begin(), cells.end(), [row](auto &c) { return c.first == row; }));
    }
};

inline CrossRegion cross_region(int p, int q, int n_ue, int n_bs)
{
    CrossRegion cr{p, q, {}};
    auto add = [&](int r, int c) {
        if (r >= 0 && r < n_ue && c >= 0 && c < n_bs)
            cr.cells.emplace_back(r, c);
    };
    for (int c = q; c <= q + 1; ++c)
        add(p - 1, c);
    for (int r = p; r <= p + 1; ++r)
        for (int c = q - 1; c <= q + 2; ++c)
            add(r, c);
    for (int c = q; c <= q + 1; ++c)
        add(p + 2, c);
    return cr;
}

struct RefinementOutcome
{
    int additional_tests = 0;
    std::vector<CrossRegion> crosses;
};

// T rounds of cross search on a working copy of R (which only loses entries). Every cross
// costs one test per cell that the initial phase left untested, since that is what the
// users are told to measure; a cell already filled by an earlier cross is measured again
// but R keeps the first value.
inline RefinementOutcome refine_with_crosses(const BeamSounder &sounder, MeasurementMatrix &R, int t_crosses)
{
    RefinementOutcome out;
    ComplexMatrix work = R.values();
    const Mask initial = R.tested();
    for (int t = 0; t < t_crosses; ++t)
    {
        if ((work.array() == cd{}).all())
            break;
        const int p = select_row_pair(work);
        const int q = select_col_pair(work);
        CrossRegion cross = cross_region(p, q, R.rows(), R.cols());
        for (auto [r, c] : cross.cells)
        {
            work(r, c) = cd{};
            if (!initial(r, c))
            {
                ++out.additional_tests;
                sounder.ensure_tested(R, r, c);
            }
        }
        out.crosses.push_back(std::move(cross));
    }
    return out;
}

// ---------- IS: interlaced scanning ----------

inline TrainingResult is_training(const BeamSounder &sounder, int n_rf, int t_crosses)
{
    check_geometry(sounder.n_ue(), sounder.n_bs(), n_rf);
    if (t_crosses < 0)
        throw ConfigError("is_training: T must be >= 0");
    const Mask board = checkerboard_mask(sounder.n_ue(), sounder.n_bs());
    TrainingResult out{sounder.empty_measurements(), {}};
    out.overhead.initial_tests = slots_for(board, n_rf);
    const int row_bits = ceil_log2(sounder.n_ue());
    for (auto &R : out.measurements)
    {
        for (int c = 0; c < sounder.n_bs(); ++c)
            for (int r = 0; r < sounder.n_ue(); ++r)
                if (board(r, c))
                    sounder.test(R, r, c);
        const auto refined = refine_with_crosses(sounder, R, t_crosses);
        out.overhead.additional_per_user.push_back(refined.additional_tests);
        out.overhead.bits_per_user.push_back(static_cast<int>(refined.crosses.size()) * row_bits);
    }
    return out;
}

inline TrainingResult is_training(std::span<const ChannelRealization> channels, const Codebooks &books,
                                  const NoiseModel &noise, int n_rf, int t_crosses, Rng &rng)
{
    return is_training(BeamSounder(channels, books, noise, rng), n_rf, t_crosses);
}

// ---------- SP: selection probability ----------

// Bookkeeping of SP sampling: normalized selection probabilities of UE codewords,
// the BS codewords not yet paired with each UE codeword, and how often each UE
// codeword has been drawn.
struct SpState
{
    int n_rf = 1;
    std::vector<double> probs;
    std::vector<std::vector<int>> untested_bs;
    std::vector<int> select_counts;
    std::vector<std::vector<int>> initial_sets;

    int n_ue() const { return static_cast<int>(probs.size()); }
    int initial_size(int n) const { return static_cast<int>(initial_sets[n].size()); }

    bool in_initial_set(int row, int col) const
    {
        const auto &set = initial_sets.at(row);
        return std::find(set.begin(), set.end(), col) != set.end();
    }

    // Every BS codeword is a candidate for every UE codeword.
    static SpState full(int n_ue, int n_bs, int n_rf)
    {
        std::vector<int> all(n_bs);
        std::iota(all.begin(), all.end(), 0);
        return make(std::vector<std::vector<int>>(n_ue, all), n_rf);
    }

    // Candidates restricted to the IS checkerboard: row r pairs with columns c, (r + c) odd.
    static SpState checkerboard(int n_ue, int n_bs, int n_rf)
    {
        std::vector<std::vector<int>> sets(n_ue);
        for (int r = 0; r < n_ue; ++r)
            for (int c = 0; c < n_bs; ++c)
                if ((r + c) % 2 == 1)
                    sets[r].push_back(c);
        return make(std::move(sets), n_rf);
    }

    static SpState make(std::vector<std::vector<int>> sets, int n_rf)
    {
        if (n_rf < 1)
            throw ConfigError("SpState: N_RF must be >= 1");
        SpState s;
        s.n_rf = n_rf;
        const int n = static_cast<int>(sets.size());
        s.probs.assign(n, 0.0);
        s.select_counts.assign(n, 0);
        for (int i = 0; i < n; ++i)
            s.probs[i] = sets[i].empty() ? 0.0 : 1.0;
        s.initial_sets = sets;
        s.untested_bs = std::move(sets);
        s.normalize();
        return s;
    }

    void normalize()
    {
        double total = 0.0;
        for (double p : probs)
            total += p;
        if (total > 0.0)
            for (double &p : probs)
                p /= total;
    }
};

enum class SpInit
{
    full,
    checkerboard,
};

inline SpState make_sp_state(SpInit init, int n_ue, int n_bs, int n_rf)
{
    return init == SpInit::full ? SpState::full(n_ue, n_bs, n_rf) : SpState::checkerboard(n_ue, n_bs, n_rf);
}

// Removes `drawn` from the untested set of UE codeword n, scales p(n) by
// (S - q N_RF) / (S - (q-1) N_RF) with S the initial set size and q the updated draw
// count (clamped at zero), then renormalizes.
inline SpState sp_update(SpState state, int n, const std::vector<int> &drawn)
{
    auto &pool = state.untested_bs.at(n);
    if (pool.empty())
        throw std::logic_error("sp_update: UE codeword has no untested BS codewords");
    for (int j : drawn)
    {
        auto it = std::find(pool.begin(), pool.end(), j);
        if (it == pool.end())
            throw std::logic_error("sp_update: drawn BS codeword " + std::to_string(j) + " is not untested");
        pool.erase(it);
    }
    const int q = ++state.select_counts[n];
    const double S = state.initial_size(n);
    const double num = std::max(0.0, S - q * state.n_rf);
    const double den = S - (q - 1) * state.n_rf;
    state.probs[n] = pool.empty() ? 0.0 : state.probs[n] * (den > 0.0 ? num / den : 0.0);
    state.normalize();
    return state;
}

// d_max for a ratio of the full OP slot budget.
inline int d_max_from_ratio(double ratio, int n_ue, int n_bs, int n_rf)
{
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw ConfigError("d_max ratio must lie in (0, 1]");
    const int full = n_ue * ceil_div(n_bs, n_rf);
    return std::max(1, static_cast<int>(std::lround(ratio * full)));
}

// Bits to tell one user where the untested cells of one cross are: the row index of the
// first line plus, per line, a count field wide enough for the cells on that line that
// could have been left untested by the initial sampling.
inline int sp_cross_bits(const CrossRegion &cross, const SpState &initial, int n_ue)
{
    int bits = ceil_log2(n_ue);
    for (int line = 0; line < 4; ++line)
    {
        const int row = cross.anchor_row - 1 + line;
        int uncertain = 0;
        for (auto [r, c] : cross.cells)
            if (r == row && initial.in_initial_set(r, c))
                ++uncertain;
        bits += ceil_log2(1 + uncertain);
    }
    return bits;
}

inline TrainingResult sp_training(const BeamSounder &sounder, int n_rf, int t_crosses, int d_max, SpState state,
                                  Rng &selection_rng)
{
    const int n_ue = sounder.n_ue(), n_bs = sounder.n_bs();
    check_geometry(n_ue, n_bs, n_rf);
    const int budget = n_ue * ceil_div(n_bs, n_rf);
    if (d_max < 1 || d_max > budget)
        throw ConfigError("sp_training: need 1 <= d_max <= " + std::to_string(budget));
    if (state.n_ue() != n_ue || state.n_rf != n_rf)
        throw ConfigError("sp_training: SpState does not match the geometry");
    const SpState initial = state;

    TrainingResult out{sounder.empty_measurements(), {}};
    int slots = 0;
    for (int d = 0; d < d_max; ++d)
    {
        if (std::all_of(state.probs.begin(), state.probs.end(), [](double p) { return p <= 0.0; }))
            break;
        const int n = static_cast<int>(sample_discrete(state.probs, selection_rng));
        auto drawn = sample_without_replacement(state.untested_bs[n], static_cast<std::size_t>(n_rf), selection_rng);
        for (auto &R : out.measurements)
            for (int c : drawn)
                sounder.test(R, n, c);
        state = sp_update(std::move(state), n, drawn);
        ++slots;
    }
    out.overhead.initial_tests = slots;
    for (auto &R : out.measurements)
    {
        const auto refined = refine_with_crosses(sounder, R, t_crosses);
        int bits = 0;
        for (const auto &cross : refined.crosses)
            bits += sp_cross_bits(cross, initial, n_ue);
        out.overhead.additional_per_user.push_back(refined.additional_tests);
        out.overhead.bits_per_user.push_back(bits);
    }
    return out;
}

inline TrainingResult sp_training(std::span<const ChannelRealization> channels, const Codebooks &books,
                                  const NoiseModel &noise, int n_rf, int t_crosses, int d_max, SpState init,
                                  Rng &rng)
{
    // Noise fields first, then selection draws, so the same seed gives IS and SP the same noise.
    BeamSounder sounder(channels, books, noise, rng);
    return sp_training(sounder, n_rf, t_crosses, d_max, std::move(init), rng);
}

// ---------- Closed-form accounting ----------

struct OverheadFormula
{
    int initial = 0;
    double additional = 0.0;
    int bits = 0;
    double overall() const { return initial + additional; }
};

inline OverheadFormula op_overhead_formula(int n_ue, int n_bs, int n_rf)
{
    return {n_ue * ceil_div(n_bs, n_rf), 0.0, 0};
}

inline OverheadFormula is_overhead_formula(int n_ue, int n_bs, int n_rf, int t_crosses)
{
    return {slots_for(checkerboard_mask(n_ue, n_bs), n_rf), 6.0 * t_crosses, t_crosses * ceil_log2(n_ue)};
}

// Expected additional tests 12 T (1 - d_max / budget); bits for an interior cross.
inline OverheadFormula sp_overhead_formula(int n_ue, int n_bs, int n_rf, int t_crosses, int d_max, SpInit init)
{
    const double budget = n_ue * ceil_div(n_bs, n_rf);
    if (n_ue < 4 || n_bs < 4)
        throw ConfigError("sp_overhead_formula: an interior cross needs N_UE, N_BS >= 4");
    const SpState s = make_sp_state(init, n_ue, n_bs, n_rf);
    const int bits = sp_cross_bits(cross_region(1, 1, n_ue, n_bs), s, n_ue);
    return {d_max, 12.0 * t_crosses * (1.0 - d_max / budget), t_crosses * bits};
}

} // namespace mmbeam

#endif
