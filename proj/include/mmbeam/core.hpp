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

#ifndef MMBEAM_CORE_HPP
#define MMBEAM_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mmbeam
{

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double pi = std::numbers::pi;

// ---------- Errors ----------

// Invalid configuration or parameter combination.
struct ConfigError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

// Operand dimensions do not agree.
struct ShapeError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

// A search (argmax, pair selection) had nothing to select from.
struct NotFoundError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Effective channel too ill-conditioned to invert; usually a beam conflict.
struct RankDeficientError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Channel estimate needs a measurement entry that was never tested.
struct EstimationGapError : std::runtime_error
{
    EstimationGapError(int user, int row, int col)
        : std::runtime_error("entry (" + std::to_string(row) + ", " + std::to_string(col) + ") of user " +
                             std::to_string(user) + " was not tested"),
          user(user), row(row), col(col)
    {
    }
    int user, row, col;
};

// Precoder column with zero radiated norm.
struct DegeneratePrecoderError : std::runtime_error
{
    explicit DegeneratePrecoderError(int column)
        : std::runtime_error("precoder column " + std::to_string(column) + " has zero norm"), column(column)
    {
    }
    int column;
};

// Exhaustive search refused because the instance is too large.
struct RefusalError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const ComplexMatrix &m)
{
    return m.allFinite();
}

} // namespace mmbeam

#endif
