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

#ifndef SUBLAB_ORACLE_H
#define SUBLAB_ORACLE_H

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sublab/gf2.h"
#include "sublab/statesim.h"

namespace sublab {

/// Describes the set members(inner) \ members(excluded). With no excluded
/// subspace the set is all of members(inner).
struct MassSet {
    std::string id;
    Subspace inner;
    std::optional<Subspace> excluded;

    bool contains(uint64_t x) const {
        return inner.contains(x) && !(excluded && excluded->contains(x));
    }
};

/// Squared-amplitude weight of basis states whose register (qubits
/// [offset, offset + set.inner.ambient_dim())) lies in the set, summed over
/// every other qubit. Works on subnormalized vectors.
double query_mass(const Amplitudes &amps, const MassSet &set, size_t offset = 0);
/// Same, on a normalized state whose first n qubits are the register.
double query_mass(const PureState &psi, const MassSet &set);

struct QueryRecord {
    size_t index;
    std::string oracle_id;
    /// (mass_set_id, mass). Always begins with ("member", mass on the oracle's
    /// own subspace).
    std::vector<std::pair<std::string, double>> masses;
    /// Register distribution (unnormalized) at the time of the query; present
    /// only when input recording is on.
    std::optional<Eigen::VectorXd> input_distribution;

    double member_mass() const {
        return masses.front().second;
    }
};

/// Append-only record of oracle calls.
class QueryLog {
   public:
    void append(QueryRecord r);
    const std::vector<QueryRecord> &records() const {
        return records_;
    }
    size_t size() const {
        return records_.size();
    }

    /// Rows (trial, query_index, oracle_id, mass_set_id, mass), 12 significant
    /// digits. Writes the header when `header` is set.
    void write_csv(std::ostream &out, size_t trial, bool header = true) const;

   private:
    std::vector<QueryRecord> records_;
};

/// Coherent membership oracle |x>|b> -> |x>|b xor [x in S]> with query
/// counting and per-query mass instrumentation.
///
/// The predicate can be a Subspace (mass sets may then refer to it) or an
/// opaque membership function, in which case only the "member" mass is
/// logged.
class MembershipOracle {
   public:
    MembershipOracle(std::string id, Subspace s);
    MembershipOracle(std::string id, size_t n, std::function<bool(uint64_t)> predicate);

    const std::string &id() const {
        return id_;
    }
    size_t ambient_dim() const {
        return n_;
    }
    size_t query_count() const {
        return count_;
    }
    const QueryLog &log() const {
        return log_;
    }
    bool contains(uint64_t x) const {
        return table_[x] != 0;
    }

    /// Additional mass sets evaluated on every query.
    void track(MassSet set);
    void record_inputs(bool on) {
        record_inputs_ = on;
    }
    /// Queries beyond the budget throw std::runtime_error.
    void set_budget(std::optional<size_t> budget) {
        budget_ = budget;
    }

    /// Applies the oracle to an (n+1)-qubit state whose last qubit is the flag.
    PureState apply(const PureState &psi);
    /// Applies the oracle to a raw vector: register at qubits
    /// [offset, offset + n), flag at `flag_qubit`.
    void apply_in_place(Amplitudes &amps, size_t offset, size_t flag_qubit);
    /// One query on a classical basis input.
    bool query_classical(uint64_t x);
    /// Logs and counts a query whose flag the caller resolves itself (the
    /// measured-flag convention: the flag is measured right after the call).
    void note_query(const Amplitudes &amps, size_t offset);

   private:
    void record(const Amplitudes &amps, size_t offset);

    std::string id_;
    size_t n_;
    std::optional<Subspace> subspace_;
    std::vector<char> table_;
    std::vector<MassSet> tracked_;
    size_t count_ = 0;
    bool record_inputs_ = false;
    std::optional<size_t> budget_;
    QueryLog log_;
};

/// PureState wrapper matching the two-argument form used in docs and tests.
inline PureState oracle_apply(MembershipOracle &o, const PureState &psi) {
    return o.apply(psi);
}

/// A verifier expressed as alternating unitaries and oracle calls on a
/// workspace of `total_qubits`: the register occupies the low
/// `register_qubits`, flag qubits sit above it.
struct OracleProgram {
    enum class Kind { Unitary, QueryA, QueryB };
    struct Step {
        Kind kind;
        std::string name;
        std::function<void(Amplitudes &)> unitary;
        size_t flag_qubit = 0;
    };

    size_t register_qubits = 0;
    size_t total_qubits = 0;
    std::vector<Step> steps;
    /// Qubits that must all read 1 for acceptance.
    std::vector<size_t> accept_flags;

    /// Fig.-style V*: A-check into flag 0, global Hadamard, B-check into flag 1.
    static OracleProgram vstar(size_t n);
    /// A program with no oracle calls at all.
    static OracleProgram no_queries(size_t n);
};

struct HybridResult {
    double prob_with_b;
    double prob_with_b_prime;
    /// Mass on B \ B' of each B-query's input in the run with oracle B.
    std::vector<double> masses;
    /// ||O^B psi_i - O^B' psi_i|| for each B-query.
    std::vector<double> deviations;
    /// sum_i 2 sqrt(mass_i)
    double mass_bound;
    size_t b_queries;

    double gap() const;
    bool bound_holds() const;
};

/// Runs `program` on |input>|0...0> with oracle B and again with oracle B'
/// (B' must be a subspace of B), instrumenting every B-query.
HybridResult replace_oracle_hybrid(
    const OracleProgram &program,
    const PureState &input,
    const Subspace &a,
    const Subspace &b,
    const Subspace &b_prime);

}  // namespace sublab

#endif
