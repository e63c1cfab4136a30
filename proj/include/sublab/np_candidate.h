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

#ifndef SUBLAB_NP_CANDIDATE_H
#define SUBLAB_NP_CANDIDATE_H

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "sublab/gf2.h"
#include "sublab/piracy.h"
#include "sublab/protocol.h"
#include "sublab/statesim.h"
#include "sublab/verifier_program.h"

namespace sublab {

/// Stamp carried by every candidate report: the obfuscator is an oracle handle
/// and the NIZK a trusted-setup signature, so nothing here is cryptographic
/// evidence.
inline constexpr const char *kIdealizedMode = "idealized-primitive mode";

/// A pluggable NP relation R(x, w).
struct NpRelation {
    std::string name;
    std::function<bool(const std::string &x, const std::string &w)> check;

    /// x is a bit string; x is in L iff its parity is even. The witness is
    /// ignored.
    static NpRelation parity();
    /// x is a CNF with clauses separated by ';' and literals by spaces
    /// ("1 -2 3;-1 2 -3"); w is an assignment bit string, w[i] for variable
    /// i + 1.
    static NpRelation three_sat();
};

NpRelation relation_by_name(const std::string &name);

/// Opaque membership-oracle handle standing in for an obfuscated subspace.
/// Only membership queries and a salted digest are exposed.
class OracleHandle {
   public:
    /// Obfuscates `s`; the salt is derived from `salt_seed`.
    static OracleHandle obfuscate(const Subspace &s, uint64_t salt_seed);

    size_t n() const {
        return table_->n();
    }
    bool contains(uint64_t x) const {
        return table_->contains(x);
    }
    /// Hex BLAKE2b-256 digest of the salt and the hidden subspace.
    const std::string &digest() const {
        return digest_;
    }
    std::shared_ptr<const MembershipTable> table() const {
        return table_;
    }

   private:
    OracleHandle(std::shared_ptr<const MembershipTable> table, std::string digest)
        : table_(std::move(table)), digest_(std::move(digest)) {
    }
    std::shared_ptr<const MembershipTable> table_;
    std::string digest_;
};

/// Membership in L_sub for explicit B and C: B inside dual(C), one of them of
/// dimension n/2, and x in L or one of them of dimension n/4.
bool lsub_decide(
    const std::string &x,
    const Subspace &b,
    const Subspace &c,
    const std::optional<std::string> &np_witness,
    const NpRelation &relation);

/// Mock NIZK transcript: an authenticated statement bit over (x, digests).
struct Transcript {
    bool statement = false;
    std::string relation;
    std::string x;
    std::string o1_digest;
    std::string o2_digest;
    std::string tag;

    nlohmann::json to_json() const;
    static Transcript from_json(const nlohmann::json &j);
};

/// Trusted setup: evaluates L_sub on the prover's hidden data and
/// authenticates the statement bit with a per-run key.
class SetupAuthority {
   public:
    /// Fresh random key.
    SetupAuthority();
    /// Key derived from a seed, for reproducible runs.
    explicit SetupAuthority(uint64_t seed);

    Transcript attest(
        const std::string &x,
        const Subspace &b,
        const Subspace &c,
        const std::optional<std::string> &np_witness,
        const NpRelation &relation,
        const std::string &o1_digest,
        const std::string &o2_digest) const;
    /// True iff the tag authenticates the transcript fields.
    bool authentic(const Transcript &t) const;

   private:
    std::string message(const Transcript &t) const;
    std::array<unsigned char, 32> key_;
};

struct CandidateProof {
    OracleHandle o1;
    OracleHandle o2;
    Transcript pi;
    PureState state;
};

/// Samples A of dimension n/2, publishes handles for A and dual(A), obtains
/// the transcript and outputs |A>. Throws before emitting anything when the
/// relation rejects (x, witness) or n is not a multiple of 4.
CandidateProof candidate_prove(
    const std::string &x,
    const std::string &np_witness,
    const NpRelation &relation,
    size_t n,
    uint64_t seed,
    const SetupAuthority &authority);

struct CandidateReport {
    VerifierReport result;
    bool transcript_ok = false;
    std::string reason;
    std::string mode = kIdealizedMode;
};

/// Checks the transcript (authenticity, statement bit, binding to x and the
/// handles' digests), then runs membership / Hadamard / membership against the
/// handles and returns the exact acceptance probability.
CandidateReport candidate_verify(const std::string &x, const CandidateProof &proof, const SetupAuthority &authority);

/// The candidate verifier as a verifier program named "npcand". Its
/// classical part is a proof bundle; the precheck validates the transcript
/// against `authority`.
VerifierProgram candidate_verifier_program(std::shared_ptr<const SetupAuthority> authority);

/// Adds (or replaces) "npcand" in the global registry.
void register_candidate_verifier(std::shared_ptr<const SetupAuthority> authority);

/// JSON {x, o1_digest, o2_digest, transcript, state_ref}. Handles are not
/// serialized.
nlohmann::json proof_bundle(const std::string &x, const CandidateProof &proof, const std::string &state_ref);

/// Game instances for the piracy harness: an honest candidate proof for a
/// fresh even-parity x.
InstanceSource candidate_instance_source(std::shared_ptr<const SetupAuthority> authority);

}  // namespace sublab

#endif
