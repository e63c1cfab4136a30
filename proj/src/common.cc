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

#include "sublab/common.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sublab {

namespace {

size_t env_or(const char *name, size_t fallback) {
    const char *v = std::getenv(name);
    if (v == nullptr || *v == '\0') {
        return fallback;
    }
    char *end = nullptr;
    unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') {
        return fallback;
    }
    return static_cast<size_t>(parsed);
}

}  // namespace

const Caps &caps() {
    static const Caps c = [] {
        Caps r;
        r.enumeration_dim = env_or("SUBLAB_ENUM_CAP", r.enumeration_dim);
        r.statevector_qubits = env_or("SUBLAB_STATE_CAP", r.statevector_qubits);
        r.joint_qubits = env_or("SUBLAB_JOINT_CAP", r.joint_qubits);
        r.dense_dim = env_or("SUBLAB_EIGEN_CAP", r.dense_dim);
        return r;
    }();
    return c;
}

uint64_t uniform_below(Rng &rng, uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_below: bound must be positive");
    }
    uint64_t threshold = (-bound) % bound;
    while (true) {
        uint64_t r = rng();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void parallel_for(size_t count, size_t jobs, const std::function<void(size_t)> &body) {
    jobs = std::max<size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (size_t i = 0; i < count; i++) {
            body(i);
        }
        return;
    }
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> threads;
    for (size_t j = 0; j < jobs; j++) {
        threads.emplace_back([&, j] {
            try {
                for (size_t i = j; i < count; i += jobs) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) {
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto &t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

Interval wilson_interval(size_t successes, size_t trials, double z) {
    if (trials == 0) {
        throw std::invalid_argument("wilson_interval: zero trials");
    }
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    double high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {low, high};
}

}  // namespace sublab
