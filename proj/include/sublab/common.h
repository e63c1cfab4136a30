// Copyright 2026 The sublab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SUBLAB_COMMON_H
#define SUBLAB_COMMON_H

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace sublab {

/// Global numerical tolerance for equality and normalization checks.
inline constexpr double kTol = 1e-9;

class DimensionMismatch : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an operation would exceed a configured resource cap.
class CapExceeded : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Resource caps. Defaults can be overridden through environment variables
/// (read once, on first use):
///   SUBLAB_ENUM_CAP        max subspace dimension that may be enumerated (20)
///   SUBLAB_STATE_CAP       max qubits of a single statevector (20)
///   SUBLAB_JOINT_CAP       max qubits of a two-register joint state (24)
///   SUBLAB_EIGEN_CAP       max dimension of a dense operator (4096)
struct Caps {
    size_t enumeration_dim = 20;
    size_t statevector_qubits = 20;
    size_t joint_qubits = 24;
    size_t dense_dim = 4096;
};

const Caps &caps();

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). Lemire-style rejection keeps it unbiased and
/// independent of the standard library's distribution implementation.
uint64_t uniform_below(Rng &rng, uint64_t bound);

/// SplitMix64 finalizer; used to derive child seeds from a master seed.
uint64_t splitmix64(uint64_t x);

/// Child seed for stream `index` of `master`.
inline uint64_t child_seed(uint64_t master, uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

/// Formats with 12 significant digits, the serialization precision of every
/// result file.
std::string fmt12(double v);

struct Interval {
    double low;
    double high;
};

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// visited exactly once; the first exception thrown is rethrown.
void parallel_for(size_t count, size_t jobs, const std::function<void(size_t)> &body);

/// Wilson score interval for `successes` out of `trials` (95% by default).
Interval wilson_interval(size_t successes, size_t trials, double z = 1.959963984540054);

}  // namespace sublab

#endif
