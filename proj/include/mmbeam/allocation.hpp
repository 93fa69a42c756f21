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

#ifndef MMBEAM_ALLOCATION_HPP
#define MMBEAM_ALLOCATION_HPP

#include "training.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace mmbeam
{

struct QosThresholds
{
    std::vector<double> gamma; // per-user minimum equivalent channel gain |w^H H f|

    static QosThresholds uniform(int k_users, double value) { return {std::vector<double>(k_users, value)}; }

    void validate(int k_users) const
    {
        if (static_cast<int>(gamma.size()) != k_users)
            throw ConfigError("QosThresholds: need one threshold per user");
        for (double g : gamma)
            if (!(g >= 0.0))
                throw ConfigError("QosThresholds: thresholds must be >= 0");
    }
};

// UE codeword (row) and BS codeword (column), 0-based.
struct BeamPair
{
    int ue = 0;
    int bs = 0;
    bool operator==(const BeamPair &) const = default;
};

// Per-user beam pair; empty for unserved users.
struct Allocation
{
    std::vector<std::optional<BeamPair>> assign;

    explicit Allocation(int k_users = 0) : assign(k_users) {}

    int users() const { return static_cast<int>(assign.size()); }
    bool served(int k) const { return assign.at(k).has_value(); }

    std::vector<int> served_users() const
    {
        std::vector<int> out;
        for (int k = 0; k < users(); ++k)
            if (served(k))
                out.push_back(k);
        return out;
    }
    int served_count() const { return static_cast<int>(served_users().size()); }

    // No two served users share a BS codeword.
    bool is_conflict_free() const
    {
        std::set<int> seen;
        for (const auto &a : assign)
            if (a && !seen.insert(a->bs).second)
                return false;
        return true;
    }
};

// Position of the largest-magnitude tested entry; ties go to the smallest (row, col).
inline BeamPair best_beam_naive(const MeasurementMatrix &R)
{
    std::optional<BeamPair> best;
    double best_mag = -1.0;
    for (int r = 0; r < R.rows(); ++r)
        for (int c = 0; c < R.cols(); ++c)
            if (R.is_tested(r, c) && std::abs(R(r, c)) > best_mag)
            {
                best_mag = std::abs(R(r, c));
                best = BeamPair{r, c};
            }
    if (!best)
        throw NotFoundError("best_beam_naive: no tested entries");
    return *best;
}

// Every user takes its own strongest pair, conflicts included.
inline Allocation allocate_naive(std::span<const MeasurementMatrix> R)
{
    Allocation a(static_cast<int>(R.size()));
    for (std::size_t k = 0; k < R.size(); ++k)
        if (R[k].tested_count() > 0)
            a.assign[k] = best_beam_naive(R[k]);
    return a;
}

// Per BS codeword, the best tested UE codeword; sorted by gain (descending, ties to
// the lower BS index) and truncated below gamma.
struct CandidateList
{
    std::vector<double> gains;
    std::vector<int> bs_idx;
    std::vector<int> ue_idx;

    int size() const { return static_cast<int>(gains.size()); }
    bool empty() const { return gains.empty(); }

    void erase_bs(int bs)
    {
        for (int i = size() - 1; i >= 0; --i)
            if (bs_idx[i] == bs)
            {
                gains.erase(gains.begin() + i);
                bs_idx.erase(bs_idx.begin() + i);
                ue_idx.erase(ue_idx.begin() + i);
            }
    }
    void clear()
    {
        gains.clear();
        bs_idx.clear();
        ue_idx.clear();
    }
};

inline CandidateList build_candidates(const MeasurementMatrix &R, double gamma)
{
    struct Entry
    {
        double gain;
        int bs, ue;
    };
    std::vector<Entry> entries;
    for (int c = 0; c < R.cols(); ++c)
    {
        int best_row = -1;
        double best = -1.0;
        for (int r = 0; r < R.rows(); ++r)
            if (R.is_tested(r, c) && std::abs(R(r, c)) > best)
            {
                best = std::abs(R(r, c));
                best_row = r;
            }
        if (best_row >= 0 && best >= gamma)
            entries.push_back({best, c, best_row});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) { return a.gain > b.gain; });
    CandidateList out;
    for (const auto &e : entries)
    {
        out.gains.push_back(e.gain);
        out.bs_idx.push_back(e.bs);
        out.ue_idx.push_back(e.ue);
    }
    return out;
}

// QoS-constrained sequential allocation. Each round takes the strongest head candidate
// among unallocated users; if that user still has alternatives but single-candidate
// users want the same BS beam, the strongest of those gets it instead. The allocated
// user leaves the pool and its BS beam is struck from every other list. Users whose
// lists run empty are dropped; the loop stops when nobody is left.
inline Allocation allocate_qc(std::span<const MeasurementMatrix> R, const QosThresholds &thresholds)
{
    const int K = static_cast<int>(R.size());
    thresholds.validate(K);
    std::vector<CandidateList> lists;
    lists.reserve(K);
    for (int k = 0; k < K; ++k)
        lists.push_back(build_candidates(R[k], thresholds.gamma[k]));

    Allocation alloc(K);
    std::vector<int> pool;
    for (int k = 0; k < K; ++k)
        pool.push_back(k);

    while (true)
    {
        std::erase_if(pool, [&](int k) { return lists[k].empty(); });
        if (pool.empty())
            break;

        int k_max = pool.front();
        for (int k : pool)
            if (lists[k].gains.front() > lists[k_max].gains.front())
                k_max = k;

        int k_a = k_max;
        if (lists[k_max].size() > 1)
        {
            const int beam = lists[k_max].bs_idx.front();
            std::optional<int> k_c;
            for (int k : pool)
                if (k != k_max && lists[k].size() == 1 && lists[k].bs_idx.front() == beam &&
                    (!k_c || lists[k].gains.front() > lists[*k_c].gains.front()))
                    k_c = k;
            if (k_c)
                k_a = *k_c;
        }

        const int beam = lists[k_a].bs_idx.front();
        alloc.assign[k_a] = BeamPair{lists[k_a].ue_idx.front(), beam};
        lists[k_a].clear();
        for (int k : pool)
            lists[k].erase_bs(beam);
        std::erase(pool, k_a);
    }
    return alloc;
}

// Probability that K users drawing beams uniformly from N_BS pick pairwise distinct
// beams, N_BS! / (N_BS^K (N_BS - K)!), evaluated as a running product.
inline double conflict_free_probability(int n_bs, int k)
{
    if (n_bs < 1 || k < 0)
        throw std::invalid_argument("conflict_free_probability: need n_bs >= 1, k >= 0");
    if (k > n_bs)
        return 0.0;
    double p = 1.0;
    for (int i = 0; i < k; ++i)
        p *= static_cast<double>(n_bs - i) / n_bs;
    return p;
}

// Measured gain of user k's allocated pair, or nullopt if unserved.
inline std::optional<double> allocated_gain(const Allocation &a, std::span<const MeasurementMatrix> R, int k)
{
    if (!a.served(k))
        return std::nullopt;
    const auto &p = *a.assign[k];
    return std::abs(R[k](p.ue, p.bs));
}

inline int qos_satisfied_count(const Allocation &a, std::span<const MeasurementMatrix> R,
                               const QosThresholds &thresholds)
{
    int n = 0;
    for (int k = 0; k < a.users(); ++k)
        if (auto g = allocated_gain(a, R, k); g && *g >= thresholds.gamma[k])
            ++n;
    return n;
}

inline constexpr int oracle_max_users = 6;
inline constexpr int oracle_max_bs = 12;

// Exhaustive search over conflict-free assignments (each user: unserved, or any BS
// codeword with its best tested UE codeword and gain >= gamma). Maximizes the number of
// served users, then the descending-sorted gain vector lexicographically.
inline Allocation allocate_oracle(std::span<const MeasurementMatrix> R, const QosThresholds &thresholds)
{
    const int K = static_cast<int>(R.size());
    thresholds.validate(K);
    if (K > oracle_max_users || (K > 0 && R[0].cols() > oracle_max_bs))
        throw RefusalError("allocate_oracle: instance too large for exhaustive search");

    struct Option
    {
        int bs, ue;
        double gain;
    };
    std::vector<std::vector<Option>> options(K);
    for (int k = 0; k < K; ++k)
    {
        const auto c = build_candidates(R[k], thresholds.gamma[k]);
        for (int i = 0; i < c.size(); ++i)
            options[k].push_back({c.bs_idx[i], c.ue_idx[i], c.gains[i]});
    }

    Allocation best(K), current(K);
    std::vector<double> best_gains;
    int best_count = -1;
    std::vector<bool> used(K > 0 ? R[0].cols() : 0, false);

    auto score = [&]() {
        std::vector<double> g;
        for (int k = 0; k < K; ++k)
            if (current.assign[k])
                g.push_back(std::abs(R[k](current.assign[k]->ue, current.assign[k]->bs)));
        std::sort(g.begin(), g.end(), std::greater<>());
        const int count = static_cast<int>(g.size());
        if (count > best_count || (count == best_count && g > best_gains))
        {
            best_count = count;
            best_gains = std::move(g);
            best = current;
        }
    };

    auto recurse = [&](auto &&self, int k) -> void {
        if (k == K)
        {
            score();
            return;
        }
        for (const auto &o : options[k])
        {
            if (used[o.bs])
                continue;
            used[o.bs] = true;
            current.assign[k] = BeamPair{o.ue, o.bs};
            self(self, k + 1);
            current.assign[k].reset();
            used[o.bs] = false;
        }
        self(self, k + 1);
    };
    recurse(recurse, 0);
    return best;
}

} // namespace mmbeam

#endif
