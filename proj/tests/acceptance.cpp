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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any
// criterion fails. Diagnostics go to lines starting with "  ".

#include <mmbeam/mmbeam.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>

using namespace mmbeam;

namespace
{
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
    bool pass = true;
    std::string summary;
};

int failures = 0;

void report(int id, double budget_s, const std::function<Outcome()> &body)
{
    const auto t0 = Clock::now();
    Outcome o;
    try
    {
        o = body();
    }
    catch (const std::exception &e)
    {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    if (elapsed > budget_s)
    {
        o.pass = false;
        o.summary += " [runtime " + format_number(elapsed) + " s over budget " + format_number(budget_s) + " s]";
    }
    if (!o.pass)
        ++failures;
    std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, o.summary.c_str(), elapsed);
    std::fflush(stdout);
}

std::string fmt(const char *f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------- 1: conflict probability ----------

Outcome conflict_probability()
{
    Outcome o;
    const int trials = 100000;
    const double reference[] = {0.523, 0.871};
    const int ks[] = {10, 16};
    for (int i = 0; i < 2; ++i)
    {
        const int k = ks[i];
        // Independent oracle: 1 - prod (1 - j/N)
        double oracle = 1.0;
        for (int j = 1; j < k; ++j)
            oracle *= 1.0 - static_cast<double>(j) / 64.0;
        const double p_nc = conflict_free_probability(64, k);
        const double p_c = 1.0 - p_nc;
        const double mc = simulate_conflict_probability(64, k, trials, 1);
        const double sd = std::sqrt(p_c * (1.0 - p_c) / trials);
        const bool closed_ok = std::abs(p_nc - oracle) < 1e-12;
        const bool mc_ok = std::abs(mc - p_c) < 3.0 * sd;
        const bool ref_ok = std::abs(p_c - reference[i]) < 5e-4;
        std::printf("  (64,%d): closed P_C=%.6f oracle=%.6f MC=%.5f (3 sd=%.5f) reference %.3f\n", k, p_c,
                    1.0 - oracle, mc, 3.0 * sd, reference[i]);
        o.pass = o.pass && closed_ok && mc_ok && ref_ok;
        o.summary += "P_C(64," + std::to_string(k) + ")=" + fmt("%.4f", p_c) + " MC " + fmt("%.4f", mc) + "; ";
    }
    return o;
}

// ---------- 2: overhead table ----------

Outcome overhead()
{
    Outcome o;
    const auto rows = overhead_table(16, 64, 16, 2, {0.25, 0.375, 0.5});
    const bool op_ok = rows[0].initial == 64 && rows[0].additional == 0.0 && rows[0].overall == 64.0 &&
                       rows[0].bits == 0;
    const bool is_ok = rows[1].initial == 32 && rows[1].additional == 12.0 && rows[1].overall == 44.0 &&
                       rows[1].bits == 8;
    o.pass = op_ok && is_ok;
    o.summary = std::string("OP ") + (op_ok ? "exact" : "wrong") + ", IS " + (is_ok ? "exact" : "wrong");

    const double ratios[] = {0.25, 0.375, 0.5};
    const int initial[] = {16, 24, 32};
    const double additional[] = {18.0, 15.0, 12.0};
    for (int i = 0; i < 3; ++i)
    {
        const auto sim = simulate_sp_overhead(16, 64, 16, 2, ratios[i], SpInit::checkerboard, ChannelSpec{}, 10000,
                                              1000 + i);
        const double rel = std::abs(sim.additional.mean - additional[i]) / additional[i];
        const bool ok = rows[2 + i].initial == initial[i] && sim.initial.mean == initial[i] && rel < 0.05;
        std::printf("  %s: initial %d (simulated %.2f), additional %.3f +- %.3f vs %.0f (%.1f%%), bits %d\n",
                    rows[2 + i].scheme.c_str(), rows[2 + i].initial, sim.initial.mean, sim.additional.mean,
                    sim.additional.se, additional[i], 100.0 * rel, rows[2 + i].bits);
        o.pass = o.pass && ok;
        o.summary += ", " + rows[2 + i].scheme + " add " + fmt("%.2f", sim.additional.mean);
    }
    return o;
}

// ---------- 3: zero interference ----------

Outcome zero_interference()
{
    SimConfig c;
    c.k_users = 8;
    c.noiseless_training = true;
    int trials_ok = 0;
    double worst = 0.0;
    int checked = 0;
    for (int t = 0; t < 500; ++t)
    {
        const TrialContext ctx = make_trial_context(c, t);
        const auto training = op_training(ctx.sounder, c.n_rf);
        const auto alloc =
            allocate_qc(training.measurements, QosThresholds::uniform(c.k_users, c.gamma.threshold(c.snr_dl_db)));
        PrecoderSet ps = assemble_analog(alloc, ctx.books);
        const auto estimate = estimate_effective_channel(training.measurements, alloc);
        const auto [p_ul, p_dl] = snr_to_power(c.snr_ul_db, c.snr_dl_db, c.k_users);
        const auto design = design_digital(DigitalScheme::zf, estimate, ps, p_dl, 1.0);
        ps.f_bb = design.f_bb;
        const ComplexMatrix g = true_effective_channel(ctx.channels, ps) * ps.f_bb;
        bool ok = !design.conflict;
        for (int i = 0; i < ps.k_served(); ++i)
        {
            const double signal = std::norm(g(i, i));
            for (int j = 0; j < ps.k_served(); ++j)
                if (i != j)
                {
                    const double ratio = std::norm(g(i, j)) / signal;
                    worst = std::max(worst, ratio);
                    ok = ok && ratio < 1e-16;
                    ++checked;
                }
        }
        trials_ok += ok;
    }
    Outcome o;
    o.pass = trials_ok == 500;
    o.summary = std::to_string(trials_ok) + "/500 trials clean, " + std::to_string(checked) +
                " cross terms, worst ratio " + fmt("%.2e", worst);
    return o;
}

// ---------- 4-6: Fig. 6 preset ----------

SimConfig fig6_base()
{
    SimConfig c;
    c.n_bs = 64;
    c.n_ue = 16;
    c.n_rf = 20;
    c.snr_ul_db = 20.0;
    c.snr_dl_db = 10.0;
    c.trials = 2000;
    c.seed = 1;
    c.t_crosses = 2;
    c.channel = ChannelSpec{3, 5, 1.0, 0.1};
    c.variants = {
        Variant{Scheme::op, 0.5, SpInit::checkerboard, AllocatorKind::naive, DigitalScheme::zf},
        Variant{Scheme::op},
        Variant{Scheme::is},
        Variant{Scheme::sp, 0.25},
        Variant{Scheme::sp, 0.375},
        Variant{Scheme::sp, 0.5},
    };
    return c;
}

enum Column
{
    op_naive,
    op_qc,
    is_qc,
    sp_25,
    sp_375,
    sp_50,
};

std::map<int, std::vector<AggregateResult>> fig6_results;
double fig6_seconds = 0.0;

const std::vector<AggregateResult> &fig6_at(int k)
{
    auto it = fig6_results.find(k);
    if (it == fig6_results.end())
    {
        const auto t0 = Clock::now();
        SimConfig c = fig6_base();
        c.k_users = k;
        it = fig6_results.emplace(k, run_monte_carlo(c, 0)).first;
        fig6_seconds += seconds_since(t0);
        const auto &r = it->second;
        std::printf("  K=%2d:", k);
        for (const auto &a : r)
            std::printf(" %s %.2f+-%.2f;", a.variant.label().c_str(), a.sum_rate.mean, a.sum_rate.se);
        std::printf("\n");
        std::fflush(stdout);
    }
    return it->second;
}

double pooled_se(const MeanSe &a, const MeanSe &b)
{
    return std::sqrt(a.se * a.se + b.se * b.se);
}

Outcome fig6_dominance()
{
    Outcome o;
    double min_z = 1e300;
    int min_k = 0;
    for (int k = 8; k <= 20; ++k)
    {
        const auto &r = fig6_at(k);
        const double gap = r[op_qc].sum_rate.mean - r[op_naive].sum_rate.mean;
        const double z = gap / pooled_se(r[op_qc].sum_rate, r[op_naive].sum_rate);
        if (z < min_z)
        {
            min_z = z;
            min_k = k;
        }
        o.pass = o.pass && z > 3.0;
    }
    const auto &r8 = fig6_at(8);
    const double gain = 100.0 * (r8[op_qc].sum_rate.mean / r8[op_naive].sum_rate.mean - 1.0);
    const bool soft = std::abs(gain - 36.48) <= 10.0;
    std::printf("  soft target: OP-QC-ZF over OP-naive-ZF at K=8 is %.2f%% (target 36.48%% +- 10pp): %s\n", gain,
                soft ? "met" : "MISSED");
    o.summary = "OP-QC-ZF > OP-naive-ZF for K=8..20, smallest gap " + fmt("%.1f", min_z) + " SE at K=" +
                std::to_string(min_k) + "; soft target K=8 gain " + fmt("%.2f", gain) + "% vs 36.48% " +
                (soft ? "met" : "missed");
    return o;
}

Outcome fig6_partial_training()
{
    const auto &r = fig6_at(16);
    const double op = r[op_qc].sum_rate.mean, is = r[is_qc].sum_rate.mean;
    const double loss = (op - is) / op;
    const bool is_ok = std::abs(loss) < 0.05;
    const double s25 = r[sp_25].sum_rate.mean, s375 = r[sp_375].sum_rate.mean, s50 = r[sp_50].sum_rate.mean;
    const bool mono = s25 <= s375 && s375 <= s50;
    std::printf("  K=16: OP %.2f, IS %.2f (loss %.2f bps/Hz, %.2f%%), SP(0.25) %.2f, SP(0.375) %.2f, SP(0.5) %.2f\n",
                op, is, op - is, 100.0 * loss, s25, s375, s50);
    Outcome o;
    o.pass = is_ok && mono;
    o.summary = "IS within " + fmt("%.2f", 100.0 * loss) + "% of OP; SP " + fmt("%.2f", s25) + " <= " +
                fmt("%.2f", s375) + " <= " + fmt("%.2f", s50) + (mono ? "" : " (not monotone)");
    return o;
}

Outcome is_sp_equivalence()
{
    Outcome o;
    const int n_ue = 16, n_bs = 64, n_rf = 20;
    const Codebooks books(n_ue, n_bs);
    const Mask board = checkerboard_mask(n_ue, n_bs);
    const int d_max = d_max_from_ratio(0.5, n_ue, n_bs, n_rf);
    int equal = 0;
    for (int seed = 0; seed < 200; ++seed)
    {
        Rng ch_rng = make_rng(seed, 0, 0, Stream::channel);
        std::vector<ChannelRealization> ch{gen_channel(ChannelSpec{}, n_ue, n_bs, ch_rng)};
        Rng noise_rng = make_rng(seed, 0, 0, Stream::noise);
        BeamSounder sounder(ch, books, NoiseModel{1.0, 1, 100.0}, noise_rng);
        Rng sel = make_rng(seed, 0, 0, Stream::selection);
        const auto r = sp_training(sounder, n_rf, 0, d_max, SpState::checkerboard(n_ue, n_bs, n_rf), sel);
        equal += (r.measurements[0].tested() == board).all();
    }
    double worst_z = 0.0;
    int worst_k = 0;
    for (const auto &[k, r] : fig6_results)
    {
        const double z = std::abs(r[is_qc].sum_rate.mean - r[sp_50].sum_rate.mean) /
                         std::max(pooled_se(r[is_qc].sum_rate, r[sp_50].sum_rate), 1e-300);
        if (z >= worst_z)
        {
            worst_z = z;
            worst_k = k;
        }
    }
    const auto &r8 = fig6_at(8);
    std::printf("  K=8: IS %.4f +- %.4f, SP(0.5) %.4f +- %.4f\n", r8[is_qc].sum_rate.mean, r8[is_qc].sum_rate.se,
                r8[sp_50].sum_rate.mean, r8[sp_50].sum_rate.se);
    o.pass = equal == 200 && worst_z < 2.0;
    o.summary = "initial set equals checkerboard on " + std::to_string(equal) +
                "/200 seeds; largest IS vs SP(0.5) gap " + fmt("%.2f", worst_z) + " SE (K=" +
                std::to_string(worst_k) + ")";
    return o;
}

// ---------- 7: allocation oracle ----------

Outcome allocation_oracle()
{
    Rng rng = make_rng(7, 0, 0, Stream::auxiliary);
    int valid = 0, match = 0;
    const int instances = 1000;
    for (int t = 0; t < instances; ++t)
    {
        const int K = 1 + static_cast<int>(uniform_index(rng, 4));
        const int n_ue = 1 + static_cast<int>(uniform_index(rng, 4));
        const int n_bs = 1 + static_cast<int>(uniform_index(rng, 8));
        const double frac = uniform01(rng) < 0.5 ? 1.0 : 0.6;
        std::vector<MeasurementMatrix> R;
        for (int k = 0; k < K; ++k)
        {
            MeasurementMatrix m(k, n_ue, n_bs);
            for (int i = 0; i < n_ue; ++i)
                for (int j = 0; j < n_bs; ++j)
                    if (uniform01(rng) < frac)
                        m.store(i, j, complex_normal(rng, 1.0));
            R.push_back(std::move(m));
        }
        QosThresholds q;
        for (int k = 0; k < K; ++k)
            q.gamma.push_back(uniform(rng, 0.0, 1.5));

        const auto a = allocate_qc(R, q);
        const auto best = allocate_oracle(R, q);
        const int qc = qos_satisfied_count(a, R, q);
        const int opt = qos_satisfied_count(best, R, q);
        valid += a.is_conflict_free() && qc == a.served_count();
        match += qc == opt;
        if (qc != opt)
            std::printf("  instance %d (K=%d, N_UE=%d, N_BS=%d): QC serves %d, optimum %d (gap %d)\n", t, K, n_ue,
                        n_bs, qc, opt, opt - qc);
    }
    Outcome o;
    o.pass = valid == instances && match >= 0.95 * instances;
    o.summary = std::to_string(valid) + "/1000 conflict-free and QoS-valid, " + std::to_string(match) +
                "/1000 match the exhaustive optimum";
    return o;
}

// ---------- 8: numerical identities ----------

Outcome numerical_identities()
{
    Rng rng = make_rng(8, 0, 0, Stream::auxiliary);
    auto random_square = [&](int n) {
        ComplexMatrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = complex_normal(rng, 1.0);
        return m;
    };

    double zf_err = 0.0, angle = 0.0;
    for (int t = 0; t < 200; ++t)
    {
        const int n = 1 + static_cast<int>(uniform_index(rng, 16));
        const ComplexMatrix H = random_square(n);
        if (condition_number(H) > 1e3)
            continue;
        zf_err = std::max(zf_err, (H * zf_precoder({H}) - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff());
        const ComplexMatrix I = ComplexMatrix::Identity(n, n);
        const ComplexMatrix zf = normalize_columns(I, zf_precoder({H}));
        const ComplexMatrix mm = normalize_columns(I, mmse_precoder({H}, n, n, 1e-12));
        for (int k = 0; k < n; ++k)
        {
            const double c = std::abs(zf.col(k).dot(mm.col(k)));
            angle = std::max(angle, std::acos(std::min(1.0, c)));
        }
    }

    const double leak = leakage_correlation(64, -Codebook::direction(64, 20) + 1.0 / 64.0, 20);

    double rate_err = 0.0;
    const int K = 3, n_ue = 4, n_bs = 8;
    const Codebooks books(n_ue, n_bs);
    for (int t = 0; t < 100; ++t)
    {
        std::vector<ChannelRealization> ch;
        for (int k = 0; k < K; ++k)
            ch.push_back(gen_channel(ChannelSpec{}, n_ue, n_bs, rng));
        Allocation a(K);
        std::vector<int> beams(n_bs);
        std::iota(beams.begin(), beams.end(), 0);
        beams = sample_without_replacement(beams, K, rng);
        for (int k = 0; k < K; ++k)
            a.assign[k] = BeamPair{static_cast<int>(uniform_index(rng, n_ue)), beams[k]};
        PrecoderSet ps = assemble_analog(a, books);
        ps.f_bb = normalize_columns(ps.f_rf, random_square(K));
        const double p = 10.0, s2 = 1.0;
        for (int k = 0; k < K; ++k)
        {
            std::vector<cd> g(K, 0.0);
            for (int i = 0; i < K; ++i)
                for (int x = 0; x < n_ue; ++x)
                    for (int y = 0; y < n_bs; ++y)
                        for (int m = 0; m < K; ++m)
                            g[i] += std::conj((*ps.combiners[k])(x)) * ch[k].matrix(x, y) * ps.f_rf(y, m) *
                                    ps.f_bb(m, i);
            double interference = 0.0;
            for (int i = 0; i < K; ++i)
                if (i != k)
                    interference += std::norm(g[i]);
            const double oracle = std::log2(1.0 + (p / K) * std::norm(g[k]) / ((p / K) * interference + s2));
            rate_err = std::max(rate_err, std::abs(user_rate(k, ch, ps, p, s2) - oracle));
        }
    }

    std::printf("  max |H F - I| %.2e, max MMSE/ZF column angle %.2e rad, leakage %.6f, max rate error %.2e\n",
                zf_err, angle, leak, rate_err);
    Outcome o;
    o.pass = zf_err < 1e-8 && angle < 1e-6 && std::abs(leak - 0.63668) < 1e-4 && rate_err < 1e-10;
    o.summary = "ZF residual " + fmt("%.1e", zf_err) + ", MMSE->ZF angle " + fmt("%.1e", angle) + ", leakage " +
                fmt("%.5f", leak) + ", rate vs scalar oracle " + fmt("%.1e", rate_err);
    return o;
}
} // namespace

int main()
{
    report(1, 5.0, conflict_probability);
    report(2, 30.0, overhead);
    report(3, 60.0, zero_interference);
    report(4, 900.0, fig6_dominance);
    report(5, 900.0, fig6_partial_training);
    report(6, 900.0, is_sp_equivalence);
    report(7, 60.0, allocation_oracle);
    report(8, 60.0, numerical_identities);
    std::printf("Fig. 6 preset simulation time: %.1f s\n", fig6_seconds);
    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
    return failures == 0 ? 0 : 1;
}
