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

#ifndef MMBEAM_METRICS_HPP
#define MMBEAM_METRICS_HPP

#include "precoding.hpp"

#include <span>
#include <utility>
#include <vector>

namespace mmbeam
{

// Achievable rate of user k in bits/s/Hz, evaluated on the true channels:
//   log2(1 + (P/K) |w^H H F_RF f_k|^2 / ((P/K) sum_{i != k} |w^H H F_RF f_i|^2 + sigma^2))
// with K the served count. Unserved users get 0.
inline double user_rate(int k, std::span<const ChannelRealization> channels, const PrecoderSet &ps, double p_dl,
                        double sigma_dl_sq)
{
    const int col = ps.column_of(k);
    if (col < 0)
        return 0.0;
    if (ps.f_bb.rows() != ps.f_rf.cols() || ps.f_bb.cols() != ps.k_served())
        throw ShapeError("user_rate: digital precoder not set or mis-sized");
    const double share = p_dl / ps.k_served();
    const Eigen::RowVectorXcd g = ps.combiners[k]->adjoint() * channels[k].matrix * ps.f_rf * ps.f_bb;
    const double signal = share * std::norm(g(col));
    double interference = 0.0;
    for (int i = 0; i < ps.k_served(); ++i)
        if (i != col)
            interference += std::norm(g(i));
    const double sinr = signal / (share * interference + sigma_dl_sq);
    return std::log2(1.0 + sinr);
}

struct RateReport
{
    std::vector<double> per_user_rate;
    double sum_rate = 0.0;
    int served_count = 0;
    double per_user_average = 0.0; // sum_rate over configured users
};

inline RateReport sum_rate(std::span<const ChannelRealization> channels, const PrecoderSet &ps, double p_dl,
                           double sigma_dl_sq)
{
    RateReport r;
    const int K = static_cast<int>(channels.size());
    r.per_user_rate.reserve(K);
    for (int k = 0; k < K; ++k)
    {
        r.per_user_rate.push_back(user_rate(k, channels, ps, p_dl, sigma_dl_sq));
        r.sum_rate += r.per_user_rate.back();
    }
    r.served_count = ps.k_served();
    r.per_user_average = K > 0 ? r.sum_rate / K : 0.0;
    return r;
}

// (P_ul / sigma_ul^2, P_dl / sigma_dl^2) for unit large-scale gain:
// P_ul = 10^(SNR_ul/10), P_dl = K 10^(SNR_dl/10).
inline std::pair<double, double> snr_to_power(double snr_db_ul, double snr_db_dl, int k)
{
    if (k < 1)
        throw ConfigError("snr_to_power: k must be >= 1");
    return {std::pow(10.0, snr_db_ul / 10.0), k * std::pow(10.0, snr_db_dl / 10.0)};
}

} // namespace mmbeam

#endif
