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

#ifndef SUBLAB_PROTOCOL_H
#define SUBLAB_PROTOCOL_H

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sublab/gf2.h"
#include "sublab/statesim.h"
#include "sublab/verifier_program.h"

namespace sublab {

/// YES: dims (n/2, n/2). NO_AB: (n/2, n/4). NO_BA: (n/4, n/2).
enum class InstanceKind { Yes, NoAB, NoBA };

std::string to_string(InstanceKind k);
InstanceKind instance_kind_from_string(const std::string &s);

/// One length of the promise problem L_{A,B}: subspaces A, B of F_2^n with
/// B contained in A's dual and dimensions fixed by `kind`.
struct Instance {
    size_t n;
    Subspace a;
    Subspace b;
    InstanceKind kind;

    /// Throws unless n % 4 == 0, B is inside dual(A) and the dims match kind.
    void validate() const;
    OraclePair oracles() const {
        return OraclePair::of(a, b);
    }

    nlohmann::json to_json() const;
    static Instance from_json(const nlohmann::json &j);
};

/// The instance generator: for n divisible by 4 a YES instance with a uniform
/// A of dimension n/2 and B = dual(A); nullopt (bottom) otherwise.
std::optional<Instance> generator_G(size_t n, uint64_t seed);

/// A uniformly sampled NO instance of the given kind (A uniform of its
/// dimension, B uniform inside dual(A)).
Instance sample_no_instance(size_t n, InstanceKind kind, uint64_t seed);

/// The honest proof |A>.
PureState honest_prove(const Instance &inst);

struct VerifierReport {
    double accept_probability;
    /// 1-based step of the verification procedure that rejects with
    /// certainty, if any (1: input check, 2: A-test, 4: B-test).
    std::optional<int> step_rejected;
    size_t queries_used;
};

/// Exact acceptance probability ||Pi_B H Pi_A |proof>||^2 of the V* procedure
/// on public input x.
VerifierReport verify_vstar(const Instance &inst, const BitVector &x, const PureState &proof);

/// Sampled-measurement mode of V*: number of accepting runs out of `shots`.
size_t sample_vstar(const Instance &inst, const BitVector &x, const PureState &proof, size_t shots, Rng &rng);

/// Optimum acceptance over all proofs: lambda_max(Pi_A H Pi_B H Pi_A),
/// evaluated matrix-free.
double max_cheat_probability(const Instance &inst);

/// Dense V* accept operator (for small n only; bounded by the dense cap).
AcceptOperator vstar_accept_operator(const Instance &inst);

/// CSV row helpers for experiment output: instance_id,kind,probability.
void write_probability_csv_header(std::ostream &out);
void write_probability_csv_row(std::ostream &out, const std::string &instance_id, InstanceKind kind, double p);

}  // namespace sublab

#endif
