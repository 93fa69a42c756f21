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

#ifndef MMBEAM_SIM_HPP
#define MMBEAM_SIM_HPP

#include "metrics.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace mmbeam
{

enum class Scheme
{
    op,
    is,
    sp,
};

enum class AllocatorKind
{
    naive,
    qc,
};

// One curve of an experiment: training scheme, allocator and digital precoder.
struct Variant
{
    Scheme scheme = Scheme::op;
    double d_max_ratio = 0.5; // SP only
    SpInit sp_init = SpInit::checkerboard;
    AllocatorKind allocator = AllocatorKind::qc;
    DigitalScheme digital = DigitalScheme::zf;

    std::string scheme_label() const
    {
        switch (scheme)
        {
        case Scheme::op:
            return "OP";
        case Scheme::is:
            return "IS";
        case Scheme::sp: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "SP(%g)", d_max_ratio);
            return buf;
        }
        }
        return "?";
    }
    std::string allocator_label() const { return allocator == AllocatorKind::qc ? "QC" : "naive"; }
    std::string digital_label() const { return digital == DigitalScheme::zf ? "ZF" : "MMSE"; }
    std::string label() const { return scheme_label() + "-" + allocator_label() + "-" + digital_label(); }
};

// QoS threshold: `value` times sigma_dl, or `value` itself. Only the ratio
// P_dl / (sigma_dl^2 K) is fixed by the downlink SNR, so sigma_dl depends on which side
// is normalized: unit power per stream gives sigma_dl = 10^(-SNR_dl/20), unit noise
// gives sigma_dl = 1.
struct GammaRule
{
    enum class Kind
    {
        sigma_multiple,
        absolute,
    };
    enum class Reference
    {
        unit_stream_power,
        unit_noise,
    };
    Kind kind = Kind::sigma_multiple;
    double value = 10.0;
    Reference reference = Reference::unit_stream_power;

    double sigma_dl(double snr_dl_db) const
    {
        return reference == Reference::unit_noise ? 1.0 : std::pow(10.0, -snr_dl_db / 20.0);
    }
    double threshold(double snr_dl_db) const
    {
        return kind == Kind::sigma_multiple ? value * sigma_dl(snr_dl_db) : value;
    }
};

inline const std::vector<std::string> &sweep_axes()
{
    static const std::vector<std::string> axes{"k_users", "snr_dl_db", "n_ue", "n_bs"};
    return axes;
}

struct SweepSpec
{
    std::string axis;
    std::vector<double> values;
};

// Noise variances are 1 on both links; powers carry the SNRs.
struct SimConfig
{
    int n_bs = 64;
    int n_ue = 16;
    int n_rf = 20;
    int k_users = 8;
    double snr_ul_db = 20.0;
    double snr_dl_db = 10.0;
    bool noiseless_training = false;
    int trials = 2000;
    std::uint64_t seed = 1;
    int t_crosses = 2;
    int tau = 0; // pilot length; 0 means K
    GammaRule gamma;
    ChannelSpec channel;
    std::vector<Variant> variants{Variant{}};
    std::optional<SweepSpec> sweep;

    int pilot_length() const { return tau > 0 ? tau : k_users; }

    void validate() const
    {
        if (n_bs < 1 || n_ue < 1 || n_rf < 1 || k_users < 1)
            throw ConfigError("n_bs, n_ue, n_rf and k_users must be positive");
        if (n_rf > n_bs)
            throw ConfigError("n_rf must not exceed n_bs");
        if (k_users > n_rf)
            throw ConfigError("k_users must not exceed n_rf");
        if (trials < 1)
            throw ConfigError("trials must be >= 1");
        if (t_crosses < 1)
            throw ConfigError("t_crosses must be >= 1");
        if (tau != 0 && tau < k_users)
            throw ConfigError("tau must be >= k_users");
        if (!(gamma.value >= 0.0))
            throw ConfigError("gamma value must be >= 0");
        channel.validate();
        if (variants.empty())
            throw ConfigError("at least one variant is required");
        for (const auto &v : variants)
            if (v.scheme == Scheme::sp)
            {
                if (!(v.d_max_ratio > 0.0 && v.d_max_ratio <= 1.0))
                    throw ConfigError("d_max_ratio must lie in (0, 1]");
                if (v.sp_init == SpInit::checkerboard && v.d_max_ratio > 0.5)
                    throw ConfigError("checkerboard SP initialization supports d_max_ratio <= 0.5");
            }
        if (sweep)
        {
            if (std::find(sweep_axes().begin(), sweep_axes().end(), sweep->axis) == sweep_axes().end())
                throw ConfigError("unknown sweep axis '" + sweep->axis + "'");
            if (sweep->values.empty())
                throw ConfigError("sweep needs at least one value");
        }
    }
};

// Sets one sweep axis on a copy of `config`.
inline SimConfig with_axis(SimConfig config, const std::string &axis, double value)
{
    auto as_int = [&](double v) {
        if (v != std::floor(v))
            throw ConfigError("axis " + axis + " needs integer values");
        return static_cast<int>(v);
    };
    if (axis == "k_users")
        config.k_users = as_int(value);
    else if (axis == "snr_dl_db")
        config.snr_dl_db = value;
    else if (axis == "n_ue")
        config.n_ue = as_int(value);
    else if (axis == "n_bs")
        config.n_bs = as_int(value);
    else
        throw ConfigError("unknown sweep axis '" + axis + "'");
    return config;
}

// Outcome of one variant in one trial.
struct TrialRecord
{
    double sum_rate = 0.0;
    double per_user_average = 0.0;
    int served = 0;
    int init_tests = 0;
    double add_tests = 0.0; // mean over users, including the estimation top-up
    double feedback_bits = 0.0;
    bool conflict = false;
};

// Everything a variant needs from one trial, drawn once and shared by all variants.
struct TrialContext
{
    std::vector<ChannelRealization> channels;
    Codebooks books;
    BeamSounder sounder;
    std::uint64_t selection_seed;
};

inline TrialContext make_trial_context(const SimConfig &config, std::uint64_t trial)
{
    std::vector<ChannelRealization> channels;
    channels.reserve(config.k_users);
    for (int k = 0; k < config.k_users; ++k)
    {
        Rng rng = make_rng(config.seed, trial, static_cast<std::uint64_t>(k), Stream::channel);
        channels.push_back(gen_channel(config.channel, config.n_ue, config.n_bs, rng));
    }
    Codebooks books(config.n_ue, config.n_bs);
    const auto [p_ul, p_dl] = snr_to_power(config.snr_ul_db, config.snr_dl_db, config.k_users);
    NoiseModel noise{config.noiseless_training ? 0.0 : 1.0, config.pilot_length(), p_ul};
    Rng noise_rng = make_rng(config.seed, trial, 0, Stream::noise);
    BeamSounder sounder(channels, books, noise, noise_rng);
    return {std::move(channels), std::move(books), std::move(sounder),
            derive_seed(config.seed, trial, 0, Stream::selection)};
}

inline TrainingResult run_training(const SimConfig &config, const TrialContext &ctx, const Variant &v)
{
    switch (v.scheme)
    {
    case Scheme::op:
        return op_training(ctx.sounder, config.n_rf);
    case Scheme::is:
        return is_training(ctx.sounder, config.n_rf, config.t_crosses);
    case Scheme::sp: {
        Rng rng(ctx.selection_seed);
        const int d_max = d_max_from_ratio(v.d_max_ratio, config.n_ue, config.n_bs, config.n_rf);
        return sp_training(ctx.sounder, config.n_rf, config.t_crosses, d_max,
                           make_sp_state(v.sp_init, config.n_ue, config.n_bs, config.n_rf), rng);
    }
    }
    throw std::logic_error("run_training: unknown scheme");
}

// Allocation, precoding and rate evaluation on top of finished training.
inline TrialRecord evaluate_variant(const SimConfig &config, const TrialContext &ctx, const Variant &v,
                                    const TrainingResult &training)
{
    const auto [p_ul, p_dl] = snr_to_power(config.snr_ul_db, config.snr_dl_db, config.k_users);
    const double sigma_dl_sq = 1.0; // rates depend on P_dl / sigma_dl^2 only
    std::vector<MeasurementMatrix> R = training.measurements;

    const Allocation alloc =
        v.allocator == AllocatorKind::qc
            ? allocate_qc(R, QosThresholds::uniform(config.k_users, config.gamma.threshold(config.snr_dl_db)))
            : allocate_naive(R);

    const auto top_up = top_up_measurements(ctx.sounder, R, alloc);
    std::vector<int> additional = training.overhead.additional_per_user;
    for (std::size_t k = 0; k < additional.size(); ++k)
        additional[k] += top_up[k];

    PrecoderSet ps = assemble_analog(alloc, ctx.books);
    const auto estimate = estimate_effective_channel(R, alloc);
    const DigitalDesign design = design_digital(v.digital, estimate, ps, p_dl, sigma_dl_sq);
    ps.f_bb = design.f_bb;
    const RateReport rates = sum_rate(ctx.channels, ps, p_dl, sigma_dl_sq);

    TrialRecord rec;
    rec.sum_rate = rates.sum_rate;
    rec.per_user_average = rates.per_user_average;
    rec.served = rates.served_count;
    rec.init_tests = training.overhead.initial_tests;
    rec.add_tests = OverheadReport::mean_of(additional);
    rec.feedback_bits = training.overhead.feedback_bits();
    rec.conflict = design.conflict || !alloc.is_conflict_free();
    return rec;
}

// One record per configured variant. Variants with the same training share it.
inline std::vector<TrialRecord> run_trial(const SimConfig &config, std::uint64_t trial)
{
    const TrialContext ctx = make_trial_context(config, trial);
    std::map<std::tuple<int, double, int>, TrainingResult> cache;
    std::vector<TrialRecord> out;
    out.reserve(config.variants.size());
    for (const auto &v : config.variants)
    {
        const auto key = std::make_tuple(static_cast<int>(v.scheme), v.scheme == Scheme::sp ? v.d_max_ratio : 0.0,
                                         v.scheme == Scheme::sp ? static_cast<int>(v.sp_init) : 0);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, run_training(config, ctx, v)).first;
        out.push_back(evaluate_variant(config, ctx, v, it->second));
    }
    return out;
}

// Compensated (Neumaier) running sum.
class NeumaierSum
{
  public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanSe
{
    double mean = 0.0;
    double se = 0.0;
};

// Sample mean and its standard error; se is 0 for a single sample.
inline MeanSe mean_se(const std::vector<double> &x)
{
    const std::size_t n = x.size();
    if (n == 0)
        return {};
    NeumaierSum s;
    for (double v : x)
        s.add(v);
    const double mean = s.value() / n;
    if (n == 1)
        return {mean, 0.0};
    NeumaierSum ss;
    for (double v : x)
        ss.add((v - mean) * (v - mean));
    return {mean, std::sqrt(ss.value() / (n - 1) / n)};
}

struct AggregateResult
{
    Variant variant;
    MeanSe sum_rate;
    MeanSe per_user_rate;
    double mean_served = 0.0;
    double init_tests = 0.0;
    double add_tests = 0.0;
    double feedback_bits = 0.0;
    double conflict_rate = 0.0;
    int trials_run = 0;
};

// records[trial][variant] for trials 0..config.trials-1, computed on `threads` workers.
// Each trial owns its seeds, so the output does not depend on the thread count.
inline std::vector<std::vector<TrialRecord>> run_trials(const SimConfig &config, int threads = 0)
{
    config.validate();
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, config.trials);
    std::vector<std::vector<TrialRecord>> records(config.trials);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (int t = next++; t < config.trials; t = next++)
        {
            try
            {
                records[t] = run_trial(config, static_cast<std::uint64_t>(t));
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = config.trials;
            }
        }
    };
    if (threads == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return records;
}

inline std::vector<AggregateResult> aggregate(const SimConfig &config,
                                              const std::vector<std::vector<TrialRecord>> &records)
{
    std::vector<AggregateResult> out;
    const std::size_t n = records.size();
    for (std::size_t v = 0; v < config.variants.size(); ++v)
    {
        std::vector<double> sum, avg;
        NeumaierSum served, init, add, bits, conflicts;
        for (const auto &trial : records)
        {
            const TrialRecord &r = trial[v];
            sum.push_back(r.sum_rate);
            avg.push_back(r.per_user_average);
            served.add(r.served);
            init.add(r.init_tests);
            add.add(r.add_tests);
            bits.add(r.feedback_bits);
            conflicts.add(r.conflict ? 1.0 : 0.0);
        }
        AggregateResult a;
        a.variant = config.variants[v];
        a.sum_rate = mean_se(sum);
        a.per_user_rate = mean_se(avg);
        a.mean_served = served.value() / n;
        a.init_tests = init.value() / n;
        a.add_tests = add.value() / n;
        a.feedback_bits = bits.value() / n;
        a.conflict_rate = conflicts.value() / n;
        a.trials_run = static_cast<int>(n);
        out.push_back(a);
    }
    return out;
}

inline std::vector<AggregateResult> run_monte_carlo(const SimConfig &config, int threads = 0)
{
    return aggregate(config, run_trials(config, threads));
}

// ---------- Sweeps and CSV ----------

struct SweepRow
{
    double axis_value = 0.0;
    SimConfig config;
    AggregateResult result;
};

inline std::vector<SweepRow> sweep(const SimConfig &base, const std::string &axis, const std::vector<double> &values,
                                   int threads = 0)
{
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
        throw ConfigError("unknown sweep axis '" + axis + "'");
    std::vector<SweepRow> rows;
    for (double value : values)
    {
        SimConfig c = with_axis(base, axis, value);
        c.sweep.reset();
        for (const auto &r : run_monte_carlo(c, threads))
            rows.push_back({value, c, r});
    }
    return rows;
}

inline constexpr const char *csv_header = "axis,scheme,allocator,digital,K,N_BS,N_UE,N_RF,snr_dl_db,mean_sum_rate,"
                                          "se_sum_rate,mean_per_user_rate,mean_served,init_tests,add_tests,"
                                          "feedback_bits,conflict_rate";

inline std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline void write_csv(std::ostream &os, const std::vector<SweepRow> &rows)
{
    os << csv_header << '\n';
    for (const auto &row : rows)
    {
        const auto &c = row.config;
        const auto &r = row.result;
        os << format_number(row.axis_value) << ',' << r.variant.scheme_label() << ',' << r.variant.allocator_label()
           << ',' << r.variant.digital_label() << ',' << c.k_users << ',' << c.n_bs << ',' << c.n_ue << ','
           << c.n_rf << ',' << format_number(c.snr_dl_db) << ',' << format_number(r.sum_rate.mean) << ','
           << format_number(r.sum_rate.se) << ',' << format_number(r.per_user_rate.mean) << ','
           << format_number(r.mean_served) << ',' << format_number(r.init_tests) << ','
           << format_number(r.add_tests) << ',' << format_number(r.feedback_bits) << ','
           << format_number(r.conflict_rate) << '\n';
    }
}

// ---------- Overhead table ----------

struct OverheadRow
{
    std::string scheme;
    int initial = 0;
    double additional = 0.0;
    double overall = 0.0;
    int bits = 0;
};

// Closed-form accounting for OP, IS and one SP row per ratio.
inline std::vector<OverheadRow> overhead_table(int n_ue, int n_bs, int n_rf, int t_crosses,
                                               const std::vector<double> &sp_ratios,
                                               SpInit sp_init = SpInit::checkerboard)
{
    check_geometry(n_ue, n_bs, n_rf);
    std::vector<OverheadRow> rows;
    auto push = [&](std::string name, const OverheadFormula &f) {
        rows.push_back({std::move(name), f.initial, f.additional, f.overall(), f.bits});
    };
    push("OP", op_overhead_formula(n_ue, n_bs, n_rf));
    push("IS", is_overhead_formula(n_ue, n_bs, n_rf, t_crosses));
    for (double ratio : sp_ratios)
    {
        Variant v{Scheme::sp, ratio, sp_init};
        push(v.scheme_label(), sp_overhead_formula(n_ue, n_bs, n_rf, t_crosses,
                                                   d_max_from_ratio(ratio, n_ue, n_bs, n_rf), sp_init));
    }
    return rows;
}

// Training-only SP overhead averaged over `runs` single-user noiseless runs.
struct SimulatedOverhead
{
    MeanSe initial;
    MeanSe additional;
    MeanSe bits;
};

inline SimulatedOverhead simulate_sp_overhead(int n_ue, int n_bs, int n_rf, int t_crosses, double ratio,
                                              SpInit sp_init, const ChannelSpec &channel, int runs,
                                              std::uint64_t seed)
{
    const Codebooks books(n_ue, n_bs);
    const int d_max = d_max_from_ratio(ratio, n_ue, n_bs, n_rf);
    std::vector<double> init, add, bits;
    for (int t = 0; t < runs; ++t)
    {
        Rng ch_rng = make_rng(seed, t, 0, Stream::channel);
        std::vector<ChannelRealization> ch{gen_channel(channel, n_ue, n_bs, ch_rng)};
        Rng noise_rng = make_rng(seed, t, 0, Stream::noise);
        BeamSounder sounder(ch, books, NoiseModel{0.0, 1, 1.0}, noise_rng);
        Rng sel = make_rng(seed, t, 0, Stream::selection);
        const auto r = sp_training(sounder, n_rf, t_crosses, d_max, make_sp_state(sp_init, n_ue, n_bs, n_rf), sel);
        init.push_back(r.overhead.initial_tests);
        add.push_back(r.overhead.additional_tests());
        bits.push_back(r.overhead.feedback_bits());
    }
    return {mean_se(init), mean_se(add), mean_se(bits)};
}

// ---------- Conflict probability ----------

// Fraction of `trials` in which K uniform beam draws out of N_BS collide.
inline double simulate_conflict_probability(int n_bs, int k, int trials, std::uint64_t seed)
{
    if (n_bs < 1 || k < 0 || trials < 1)
        throw ConfigError("simulate_conflict_probability: need n_bs >= 1, k >= 0, trials >= 1");
    Rng rng = make_rng(seed, 0, 0, Stream::auxiliary);
    std::vector<char> used(n_bs);
    int conflicts = 0;
    for (int t = 0; t < trials; ++t)
    {
        std::fill(used.begin(), used.end(), 0);
        for (int i = 0; i < k; ++i)
        {
            const auto b = uniform_index(rng, static_cast<std::uint64_t>(n_bs));
            if (used[b])
            {
                ++conflicts;
                break;
            }
            used[b] = 1;
        }
    }
    return static_cast<double>(conflicts) / trials;
}

} // namespace mmbeam

#endif
