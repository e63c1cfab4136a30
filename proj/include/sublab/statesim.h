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

#ifndef SUBLAB_STATESIM_H
#define SUBLAB_STATESIM_H

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "json.hpp"
#include "sublab/common.h"
#include "sublab/gf2.h"

namespace sublab {

using cdouble = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

/// Normalized pure state over n qubits. Qubit q is bit q of the basis index.
class PureState {
   public:
    /// Takes ownership of `amps`; throws if the size is not 2^n or the norm
    /// differs from one by more than kTol.
    PureState(size_t num_qubits, Amplitudes amps);

    static PureState basis(size_t num_qubits, uint64_t index);
    static PureState uniform(size_t num_qubits);
    static PureState haar_random(size_t num_qubits, Rng &rng);
    /// Normalizes `amps`; throws if it is (numerically) zero.
    static PureState normalized(size_t num_qubits, Amplitudes amps);

    size_t num_qubits() const {
        return n_;
    }
    size_t dim() const {
        return static_cast<size_t>(amps_.size());
    }
    const Amplitudes &amplitudes() const {
        return amps_;
    }
    cdouble operator[](uint64_t index) const {
        return amps_[static_cast<Eigen::Index>(index)];
    }

    /// Euclidean distance between amplitude vectors.
    double distance(const PureState &other) const;
    /// |<this|other>|^2
    double fidelity(const PureState &other) const;

    /// Debug form: array of [re, im] pairs in basis order.
    nlohmann::json to_json() const;
    static PureState from_json(const nlohmann::json &j);

   private:
    size_t n_;
    Amplitudes amps_;
};

/// Tensor product; `low` occupies the low qubits of the result.
PureState tensor(const PureState &low, const PureState &high);

/// Probabilistic mixture of pure states.
struct Ensemble {
    std::vector<std::pair<double, PureState>> entries;

    /// Throws unless weights are non-negative and sum to one within kTol and
    /// every state has the same qubit count.
    void validate() const;
};

/// Hermitian operator 0 <= M <= I on a proof space.
class AcceptOperator {
   public:
    /// Full validation: Hermiticity and spectrum within [-kTol, 1 + kTol].
    static AcceptOperator checked(Eigen::MatrixXcd m);
    /// For operators that are contractions by construction (products of
    /// projectors, convex combinations); only Hermiticity is verified.
    static AcceptOperator trusted(Eigen::MatrixXcd m);

    size_t dim() const {
        return static_cast<size_t>(m_.rows());
    }
    const Eigen::MatrixXcd &matrix() const {
        return m_;
    }

   private:
    explicit AcceptOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {
    }
    Eigen::MatrixXcd m_;
};

/// Uniform superposition over the members of s.
PureState subspace_state(const Subspace &s);

/// Global Walsh-Hadamard transform.
PureState hadamard_all(const PureState &psi);

/// In-place Hadamard on the `count` qubits starting at `offset` of a raw
/// (possibly unnormalized) amplitude vector.
void apply_hadamard(Amplitudes &amps, size_t offset, size_t count);

/// Zeroes every amplitude whose register (qubits [offset, offset+count))
/// is not a member of s. Requires s.ambient_dim() == count.
void apply_projector(Amplitudes &amps, size_t offset, size_t count, const Subspace &s);
void apply_projector(
    Amplitudes &amps, size_t offset, size_t count, const std::function<bool(uint64_t)> &keep);

/// Diagonal projector onto the members of s.
AcceptOperator membership_projector(const Subspace &s);

/// <psi|M|psi>, clamped into [0, 1].
double accept_probability(const AcceptOperator &m, const PureState &psi);
double accept_probability(const AcceptOperator &m, const Ensemble &e);

/// Matrix-free Hermitian operator: out = M * in.
struct LinearOperator {
    size_t dim;
    std::function<void(const Amplitudes &in, Amplitudes &out)> apply;
};

struct EigenOptions {
    double tolerance = 1e-11;
    size_t max_iterations = 20000;
    uint64_t seed = 0x5eed;
};

struct EigenResult {
    double value;
    Amplitudes vector;
    double residual;
    size_t iterations;
    bool dense_fallback;
};

/// Largest eigenvalue of a positive semidefinite operator.
///
/// Power iteration from a random start. When it stalls (tiny spectral gap) the
/// dense overload falls back to a full Hermitian eigendecomposition. Either way
/// the returned pair satisfies ||Mv - lambda v|| <= 1e-9, otherwise
/// NonConvergence is thrown.
EigenResult lambda_max(const AcceptOperator &m, const EigenOptions &opts = {});
EigenResult lambda_max(const LinearOperator &m, const EigenOptions &opts = {});

/// Dense Hermitian spectrum helper (ascending eigenvalues).
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd &m);

}  // namespace sublab

#endif
