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

#ifndef MMBEAM_CONFIG_HPP
#define MMBEAM_CONFIG_HPP

// JSON reader for SimConfig. Separate from sim.hpp so that the core library does not
// depend on nlohmann/json.

#include "sim.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <string>

namespace mmbeam
{

namespace detail
{
using json = nlohmann::json;

inline void reject_unknown(const json &j, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char *a) { return it.key() == a; }) ==
            allowed.end())
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void read(const json &j, const char *key, T &out)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

inline Scheme parse_scheme(const std::string &s)
{
    if (s == "OP")
        return Scheme::op;
    if (s == "IS")
        return Scheme::is;
    if (s == "SP")
        return Scheme::sp;
    throw ConfigError("unknown scheme '" + s + "' (OP, IS, SP)");
}

inline AllocatorKind parse_allocator(const std::string &s)
{
    if (s == "naive")
        return AllocatorKind::naive;
    if (s == "QC")
        return AllocatorKind::qc;
    throw ConfigError("unknown allocator '" + s + "' (naive, QC)");
}

inline DigitalScheme parse_digital(const std::string &s)
{
    if (s == "ZF")
        return DigitalScheme::zf;
    if (s == "MMSE")
        return DigitalScheme::mmse;
    throw ConfigError("unknown digital precoder '" + s + "' (ZF, MMSE)");
}

inline SpInit parse_sp_init(const std::string &s)
{
    if (s == "checkerboard")
        return SpInit::checkerboard;
    if (s == "full")
        return SpInit::full;
    throw ConfigError("unknown sp_init '" + s + "' (checkerboard, full)");
}

inline Variant parse_variant(const json &j)
{
    reject_unknown(j, "variant", {"scheme", "d_max_ratio", "sp_init", "allocator", "digital"});
    Variant v;
    std::string s;
    if (!j.contains("scheme"))
        throw ConfigError("variant: 'scheme' is required");
    read(j, "scheme", s);
    v.scheme = parse_scheme(s);
    read(j, "d_max_ratio", v.d_max_ratio);
    if (j.contains("sp_init"))
    {
        read(j, "sp_init", s);
        v.sp_init = parse_sp_init(s);
    }
    if (j.contains("allocator"))
    {
        read(j, "allocator", s);
        v.allocator = parse_allocator(s);
    }
    if (j.contains("digital"))
    {
        read(j, "digital", s);
        v.digital = parse_digital(s);
    }
    return v;
}
} // namespace detail

// Builds a SimConfig from JSON; absent keys keep their defaults, unknown keys throw.
inline SimConfig parse_config(const nlohmann::json &j)
{
    using detail::read;
    detail::reject_unknown(j, "config",
                           {"n_bs", "n_ue", "n_rf", "k_users", "snr_ul_db", "snr_dl_db", "noiseless_training",
                            "trials", "seed", "t_crosses", "tau", "gamma", "channel", "variants", "sweep"});
    SimConfig c;
    read(j, "n_bs", c.n_bs);
    read(j, "n_ue", c.n_ue);
    read(j, "n_rf", c.n_rf);
    read(j, "k_users", c.k_users);
    read(j, "snr_ul_db", c.snr_ul_db);
    read(j, "snr_dl_db", c.snr_dl_db);
    read(j, "noiseless_training", c.noiseless_training);
    read(j, "trials", c.trials);
    read(j, "seed", c.seed);
    read(j, "t_crosses", c.t_crosses);
    read(j, "tau", c.tau);
    if (j.contains("gamma"))
    {
        const auto &g = j["gamma"];
        detail::reject_unknown(g, "gamma", {"rule", "value", "reference"});
        std::string rule = "sigma_multiple";
        read(g, "rule", rule);
        if (rule == "sigma_multiple")
            c.gamma.kind = GammaRule::Kind::sigma_multiple;
        else if (rule == "absolute")
            c.gamma.kind = GammaRule::Kind::absolute;
        else
            throw ConfigError("gamma.rule must be 'sigma_multiple' or 'absolute'");
        read(g, "value", c.gamma.value);
        std::string reference = "unit_stream_power";
        read(g, "reference", reference);
        if (reference == "unit_stream_power")
            c.gamma.reference = GammaRule::Reference::unit_stream_power;
        else if (reference == "unit_noise")
            c.gamma.reference = GammaRule::Reference::unit_noise;
        else
            throw ConfigError("gamma.reference must be 'unit_stream_power' or 'unit_noise'");
    }
    if (j.contains("channel"))
    {
        const auto &ch = j["channel"];
        detail::reject_unknown(ch, "channel", {"min_paths", "max_paths", "dominant_variance", "other_variance"});
        read(ch, "min_paths", c.channel.min_paths);
        read(ch, "max_paths", c.channel.max_paths);
        read(ch, "dominant_variance", c.channel.dominant_variance);
        read(ch, "other_variance", c.channel.other_variance);
    }
    if (j.contains("variants"))
    {
        if (!j["variants"].is_array())
            throw ConfigError("variants: expected an array");
        c.variants.clear();
        for (const auto &v : j["variants"])
            c.variants.push_back(detail::parse_variant(v));
    }
    if (j.contains("sweep"))
    {
        const auto &s = j["sweep"];
        detail::reject_unknown(s, "sweep", {"axis", "values"});
        SweepSpec spec;
        read(s, "axis", spec.axis);
        read(s, "values", spec.values);
        c.sweep = spec;
    }
    c.validate();
    return c;
}

inline SimConfig parse_config(const std::string &text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(j);
}

inline SimConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace mmbeam

#endif
