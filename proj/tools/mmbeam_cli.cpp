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

// Command-line front end: sweep, overhead, conflict-prob, single-trial.

#include <mmbeam/config.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mmbeam;

namespace
{

std::vector<double> parse_values(const std::string &text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument(item);
        }
        catch (const std::exception &)
        {
            throw ConfigError("--values: cannot parse '" + item + "'");
        }
    }
    if (out.empty())
        throw ConfigError("--values: empty list");
    return out;
}

struct Common
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int threads = 0;
};

SimConfig load_with_overrides(const Common &c)
{
    SimConfig cfg = c.config_path.empty() ? SimConfig{} : load_config(c.config_path);
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.trials)
        cfg.trials = *c.trials;
    cfg.validate();
    return cfg;
}

int run_sweep(const Common &common, const std::string &axis_flag, const std::string &values_flag,
              const std::string &out_path)
{
    SimConfig cfg = load_with_overrides(common);
    std::string axis = "k_users";
    std::vector<double> values{static_cast<double>(cfg.k_users)};
    if (cfg.sweep)
    {
        axis = cfg.sweep->axis;
        values = cfg.sweep->values;
    }
    if (!axis_flag.empty())
    {
        axis = axis_flag;
        if (values_flag.empty() && (!cfg.sweep || cfg.sweep->axis != axis))
            throw ConfigError("--axis given without --values");
    }
    if (!values_flag.empty())
        values = parse_values(values_flag);

    const auto rows = sweep(cfg, axis, values, common.threads);
    if (out_path.empty() || out_path == "-")
        write_csv(std::cout, rows);
    else
    {
        std::ofstream out(out_path);
        if (!out)
            throw ConfigError("cannot write '" + out_path + "'");
        write_csv(out, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << '\n';
    }
    return 0;
}

int run_overhead(int n_bs, int n_ue, int n_rf, int t, const std::string &ratios_flag, const std::string &init_flag,
                 int runs, std::uint64_t seed)
{
    const auto ratios = parse_values(ratios_flag);
    const SpInit init = init_flag == "full" ? SpInit::full : SpInit::checkerboard;
    if (init_flag != "full" && init_flag != "checkerboard")
        throw ConfigError("--sp-init must be 'checkerboard' or 'full'");
    const auto rows = overhead_table(n_ue, n_bs, n_rf, t, ratios, init);
    std::printf("N_BS=%d N_UE=%d N_RF=%d T=%d\n", n_bs, n_ue, n_rf, t);
    std::printf("%-10s %8s %11s %9s %5s %16s\n", "scheme", "initial", "additional", "overall", "bits",
                "simulated_add");
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const auto &r = rows[i];
        std::string sim = "-";
        if (i >= 2 && runs > 0)
        {
            const auto s = simulate_sp_overhead(n_ue, n_bs, n_rf, t, ratios[i - 2], init, ChannelSpec{}, runs, seed);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3f+-%.3f", s.additional.mean, s.additional.se);
            sim = buf;
        }
        std::printf("%-10s %8d %11g %9g %5d %16s\n", r.scheme.c_str(), r.initial, r.additional, r.overall, r.bits,
                    sim.c_str());
    }
    return 0;
}

int run_conflict(int n_bs, const std::string &k_flag, int trials, std::uint64_t seed)
{
    std::printf("%6s %4s %14s %14s %10s\n", "N_BS", "K", "closed_form", "monte_carlo", "binom_sd");
    for (double kv : parse_values(k_flag))
    {
        const int k = static_cast<int>(kv);
        const double p = 1.0 - conflict_free_probability(n_bs, k);
        const double mc = simulate_conflict_probability(n_bs, k, trials, seed);
        std::printf("%6d %4d %14.6f %14.6f %10.6f\n", n_bs, k, p, mc, std::sqrt(p * (1.0 - p) / trials));
    }
    return 0;
}

int run_single(const Common &common, std::uint64_t trial)
{
    const SimConfig cfg = load_with_overrides(common);
    const auto records = run_trial(cfg, trial);
    std::printf("%-22s %10s %7s %6s %9s %9s %8s\n", "variant", "sum_rate", "served", "init", "add", "bits",
                "conflict");
    for (std::size_t v = 0; v < records.size(); ++v)
    {
        const auto &r = records[v];
        std::printf("%-22s %10.4f %7d %6d %9.3f %9.3f %8s\n", cfg.variants[v].label().c_str(), r.sum_rate, r.served,
                    r.init_tests, r.add_tests, r.feedback_bits, r.conflict ? "yes" : "no");
    }
    return 0;
}

void add_common(CLI::App *cmd, Common &c)
{
    cmd->add_option("--config", c.config_path, "JSON configuration file");
    cmd->add_option("--seed", c.seed, "root seed (overrides config)");
    cmd->add_option("--trials", c.trials, "Monte-Carlo trials (overrides config)");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mmbeam: multiuser mmWave beam training, allocation and hybrid precoding simulator"};
    app.require_subcommand(1);

    Common sweep_opts;
    std::string axis, values, out;
    auto *sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over one parameter, CSV output");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis, "k_users, snr_dl_db, n_ue or n_bs");
    sweep_cmd->add_option("--values", values, "comma-separated axis values");
    sweep_cmd->add_option("--out", out, "CSV output path (default stdout)");

    int n_bs = 64, n_ue = 16, n_rf = 16, t = 2, runs = 10000;
    std::uint64_t ov_seed = 1;
    std::string ratios = "0.25,0.375,0.5", sp_init = "checkerboard";
    auto *ov_cmd = app.add_subcommand("overhead", "Training overhead table");
    ov_cmd->add_option("--n-bs", n_bs);
    ov_cmd->add_option("--n-ue", n_ue);
    ov_cmd->add_option("--n-rf", n_rf);
    ov_cmd->add_option("-t,--t-crosses", t);
    ov_cmd->add_option("--ratios", ratios, "SP d_max ratios");
    ov_cmd->add_option("--sp-init", sp_init, "checkerboard or full");
    ov_cmd->add_option("--runs", runs, "stochastic SP runs for the simulated column (0 to skip)");
    ov_cmd->add_option("--seed", ov_seed);

    int cp_bs = 64, cp_trials = 100000;
    std::string cp_k = "10,16";
    std::uint64_t cp_seed = 1;
    auto *cp_cmd = app.add_subcommand("conflict-prob", "Beam conflict probability, closed form and Monte Carlo");
    cp_cmd->add_option("--n-bs", cp_bs);
    cp_cmd->add_option("-k,--k", cp_k, "comma-separated user counts");
    cp_cmd->add_option("--trials", cp_trials);
    cp_cmd->add_option("--seed", cp_seed);

    Common single_opts;
    std::uint64_t trial_index = 0;
    auto *single_cmd = app.add_subcommand("single-trial", "Run one seeded trial and print every variant");
    add_common(single_cmd, single_opts);
    single_cmd->add_option("--trial", trial_index, "trial index");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*sweep_cmd)
            return run_sweep(sweep_opts, axis, values, out);
        if (*ov_cmd)
            return run_overhead(n_bs, n_ue, n_rf, t, ratios, sp_init, runs, ov_seed);
        if (*cp_cmd)
            return run_conflict(cp_bs, cp_k, cp_trials, cp_seed);
        if (*single_cmd)
            return run_single(single_opts, trial_index);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
