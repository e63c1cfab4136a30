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

#ifndef SUBLAB_VERIFIER_PROGRAM_H
#define SUBLAB_VERIFIER_PROGRAM_H

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sublab/gf2.h"
#include "sublab/statesim.h"

namespace sublab {

/// Precomputed membership predicate over F_2^n. Exposes membership only.
class MembershipTable {
   public:
    explicit MembershipTable(const Subspace &s);
    MembershipTable(size_t n, const std::function<bool(uint64_t)> &predicate);

    size_t n() const {
        return n_;
    }
    bool contains(uint64_t x) const {
        return table_[x] != 0;
    }

   private:
    size_t n_;
    std::vector<char> table_;
};

/// The two oracles a verifier may consult: the first plays O^A (or O_1), the
/// second O^B (or O_2).
struct OraclePair {
    std::shared_ptr<const MembershipTable> first;
    std::shared_ptr<const MembershipTable> second;

    static OraclePair of(const Subspace &a, const Subspace &b);
    size_t n() const {
        return first->n();
    }
};

enum class Slot { First, Second };

/// One verifier step on an n-qubit proof register.
///   Check       coherent membership query on a fresh flag, flag measured,
///               reject on 0 (one query)
///   Hadamard    global H^n on the register
///   DummyQuery  query then uncompute on the same flag (two queries, no effect)
struct VerifierStep {
    enum class Kind { Check, Hadamard, DummyQuery };
    Kind kind;
    Slot slot = Slot::First;
};

/// Classical data travelling alongside a proof register (the public input,
/// proof transcripts). Pirates may copy it freely.
using ClassicalPart = nlohmann::json;

/// An explicit verifier program over a single proof register. Acceptance is
/// `precheck(classical)` followed by every step passing.
struct VerifierProgram {
    std::string name;
    std::vector<VerifierStep> steps;
    std::function<bool(const ClassicalPart &)> precheck;

    size_t query_count() const;

    /// A-check, H^n, B-check; precheck accepts only x = 0^n.
    static VerifierProgram vstar();
    /// B-check in the Hadamard basis first: H^n, B-check, H^n, A-check.
    static VerifierProgram vstar_swapped();
    /// V* with a redundant query pair on each oracle.
    static VerifierProgram vstar_dummy();
};

/// Registry of named verifier programs ("vstar", "vstar-swapped",
/// "vstar-dummy" built in). Other modules may add entries.
class VerifierRegistry {
   public:
    static VerifierRegistry &global();
    void add(VerifierProgram p);
    const VerifierProgram &get(const std::string &name) const;
    std::vector<std::string> names() const;

   private:
    VerifierRegistry();
    std::vector<VerifierProgram> programs_;
};

/// A single-register effect E = sum_i w_i K_i^dagger K_i, each K_i a chain of
/// projectors and Hadamards acting on qubits [offset, offset + n).
struct RegisterEffect {
    struct Term {
        double weight;
        std::function<void(Amplitudes &, size_t offset)> kraus;
    };
    size_t n = 0;
    std::vector<Term> terms;

    /// <psi|E|psi> for an n-qubit state.
    double probability(const Amplitudes &psi) const;
};

/// The accept effect K^dagger K of a program (one term; empty when the
/// precheck fails).
RegisterEffect accept_effect(const VerifierProgram &p, const OraclePair &o, const ClassicalPart &classical);

/// The query-measurement POVM element of a program's run: pick one of its q
/// queries uniformly, measure that query's input register, accept iff the
/// outcome is in the queried subspace. Flags of earlier checks are measured
/// (rejecting runs never reach later queries), so the last check's term alone
/// reproduces acceptance and E_query >= E_accept / q.
RegisterEffect query_effect(const VerifierProgram &p, const OraclePair &o, const ClassicalPart &classical);

/// sum_{i,j} w_i w_j ||(K_i (x) K_j) psi||^2 for a 2n-qubit joint state with
/// register 1 in the low qubits.
double joint_probability(const RegisterEffect &e1, const RegisterEffect &e2, const Amplitudes &joint);

/// Applies the accept Kraus chain in place to the register at `offset`.
void apply_accept_kraus(const VerifierProgram &p, const OraclePair &o, Amplitudes &amps, size_t offset);

/// Simulates one run with sampled flag measurements on the register at
/// `offset`, collapsing `amps` (a possibly multi-register normalized state)
/// as it goes. Returns the accept bit.
bool sample_run(
    const VerifierProgram &p,
    const OraclePair &o,
    const ClassicalPart &classical,
    Amplitudes &amps,
    size_t offset,
    Rng &rng);

/// Samples the two-outcome instrument of `e` on the register at `offset`: a
/// term is picked with probability equal to its weight (leftover weight
/// rejects), then accepted with probability ||K psi||^2. On acceptance `amps`
/// collapses to K psi / ||K psi||; on rejection it is left unchanged.
bool sample_effect(const RegisterEffect &e, Amplitudes &amps, size_t offset, Rng &rng);

}  // namespace sublab

#endif
