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

#ifndef SUBLAB_PIRACY_H
#define SUBLAB_PIRACY_H

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "sublab/common.h"
#include "sublab/oracle.h"
#include "sublab/protocol.h"
#include "sublab/statesim.h"
#include "sublab/verifier_program.h"

namespace sublab {

/// One game instance as the pirate and the verifiers see it.
struct GameInstance {
    size_t n;
    OraclePair oracles;
    ClassicalPart classical;
    PureState proof;
};

using InstanceSource = std::function<GameInstance(size_t n, uint64_t seed)>;

/// generator_G followed by the honest prover; x = 0^n. Throws when n is not
/// a multiple of 4.
GameInstance vstar_game_instance(size_t n, uint64_t seed);

/// Two unentangled registers.
struct ProductBranch {
    Amplitudes first;
    Amplitudes second;
};

/// A 2n-qubit state; register 1 occupies the low n qubits.
struct JointBranch {
    Amplitudes joint;
};

struct PirateBranch {
    double weight;
    std::variant<ProductBranch, JointBranch> state;
};

/// The pirate's output as an ensemble of two-register pure states.
struct PirateOutput {
    std::vector<PirateBranch> branches;

    /// Throws unless weights are nonnegative and sum to 1 and every branch is
    /// a normalized state of the right size.
    void validate(size_t n) const;
};

/// What a pirate receives: public data, the proof, oracles for both
/// subspaces (with their budget already set) and a seed.
struct PirateInput {
    size_t n;
    const ClassicalPart &classical;
    const PureState &proof;
    MembershipOracle &first;
    MembershipOracle &second;
    size_t budget;
    uint64_t seed;
};

struct PirateStrategy {
    std::string name;
    /// Illegal strategies use resources a pirate does not have; they calibrate
    /// the harness and are flagged in every report.
    bool illegal = false;
    size_t default_budget = 0;
    std::function<PirateOutput(PirateInput &)> program;

    /// Register 1 = proof, register 2 = |0^n>.
    static PirateStrategy forward_and_pad();
    /// Measures the proof in the computational basis and outputs |a>|a>.
    static PirateStrategy measure_resend();
    /// Transversal CNOT into a fresh register: sum_x psi(x) |x>|x>.
    static PirateStrategy cnot_copy();
    /// Up to `budget` times: query the first oracle on |+^n> and measure the
    /// flag. A hit leaves the register in the subspace state, which becomes
    /// register 2; otherwise register 2 = |0^n>. Register 1 is the proof.
    static PirateStrategy oracle_sample();
    /// Outputs two honest copies. Illegal.
    static PirateStrategy second_copy_baseline();
};

/// Built-in strategies by name: forward-and-pad, measure-resend, cnot-copy,
/// oracle-sample, second-copy (illegal).
PirateStrategy pirate_by_name(const std::string &name);
std::vector<std::string> pirate_names();

struct PirateRun {
    PirateOutput output;
    /// Records of both oracles (first, then second), inputs included.
    QueryLog log;
    size_t queries = 0;
};

/// Runs a pirate against one instance with instrumented oracles.
PirateRun run_pirate(const PirateStrategy &pirate, const GameInstance &inst, size_t budget, uint64_t seed);

struct GameOptions {
    enum class Mode { Auto, Exact, MonteCarlo };
    Mode mode = Mode::Auto;
    size_t jobs = 1;
    /// Pirate query budget; defaults to the strategy's own.
    std::optional<size_t> budget;
    /// Exact mode averages over min(trials, exact_instances) instances.
    size_t exact_instances = 64;
    InstanceSource source = vstar_game_instance;
};

struct GameOutcome {
    size_t n = 0;
    std::string pirate;
    std::string v1;
    std::string v2;
    double joint_accept = 0;
    double ci_low = 0;
    double ci_high = 0;
    size_t trials = 0;
    /// Instances evaluated (equals trials in Monte Carlo mode).
    size_t instances = 0;
    /// Pirate queries per trial (maximum over trials).
    size_t queries = 0;
    bool exact = false;
    bool illegal = false;
};

/// The security game: generator, honest prover, pirate, then v1 on register 1
/// and v2 on register 2. Exact mode averages the exact per-instance joint
/// acceptance; Monte Carlo mode samples a branch and both verifier runs per
/// trial and reports a Wilson interval. Auto picks exact mode whenever the
/// joint state fits the cap.
GameOutcome run_piracy_game(
    size_t n,
    const PirateStrategy &pirate,
    const VerifierProgram &v1,
    const VerifierProgram &v2,
    size_t trials,
    uint64_t seed,
    const GameOptions &options = {});

/// Exact joint acceptance of a pirate output under two register effects.
double ensemble_probability(const PirateOutput &out, const RegisterEffect &e1, const RegisterEffect &e2);

/// Draws one branch by weight; returns its index.
size_t sample_branch(const PirateOutput &out, Rng &rng);

/// Result of one draw from the query-measurement POVM.
struct PovmSample {
    /// Chosen query (none if there were no queries).
    std::optional<size_t> query;
    std::optional<uint64_t> vector;
    bool accept = false;
};

/// Picks one logged query uniformly, samples a basis vector from its recorded
/// input distribution and reports membership in `target`. Zero queries reject.
/// Records must carry input distributions.
PovmSample query_povm_measure(const QueryLog &log, const std::function<bool(uint64_t)> &target, Rng &rng);

/// Exact acceptance probability of the same measurement.
double query_povm_probability(const QueryLog &log, const std::function<bool(uint64_t)> &target);

/// joint(V1, V2) <= p1 accept(M1 (x) V2) <= p1 p2 accept(M1 (x) M2), with Mi
/// the query-measurement POVM of verifier i and pi its query count.
struct ChainReport {
    size_t n = 0;
    std::string pirate;
    bool illegal = false;
    bool exact = false;
    size_t trials = 0;
    size_t p1 = 0;
    size_t p2 = 0;
    double joint = 0;
    double m_v = 0;
    double m_m = 0;
    Interval joint_ci{0, 0};
    Interval m_v_ci{0, 0};
    Interval m_m_ci{0, 0};
    bool first_holds = false;
    bool second_holds = false;

    bool holds() const {
        return first_holds && second_holds;
    }
};

/// Evaluates the reduction chain for one pirate. In exact mode both
/// inequalities are checked per instance (tolerance 1e-9); in Monte Carlo
/// mode each side is an independent sampled experiment and an inequality
/// holds when the left interval's lower end is at most the right interval's
/// upper end scaled by p.
ChainReport reduction_chain(
    size_t n,
    const PirateStrategy &pirate,
    const VerifierProgram &v1,
    const VerifierProgram &v2,
    size_t trials,
    uint64_t seed,
    const GameOptions &options = {});

struct CounterfeitPoint {
    size_t budget = 0;
    size_t trials = 0;
    size_t successes = 0;
    double rate = 0;
    Interval ci{0, 0};
    /// Closed-form success probability, when the family has one.
    std::optional<double> expected;
    double reference = 0;

    bool within_ci() const {
        return !expected || (ci.low <= *expected && *expected <= ci.high);
    }
    bool below_reference() const {
        return ci.low <= reference;
    }
};

struct CounterfeitCurve {
    size_t n = 0;
    std::string attack;
    bool illegal = false;
    std::vector<CounterfeitPoint> points;
};

/// Attack families: "measure-and-guess" (measure |A> for a; up to q uniform
/// guesses for b, each checked with one query to the dual oracle; q = 0 is a
/// single blind guess), "grover" (amplitude amplification for the dual with
/// the best iteration count k <= q), "both-copies" (illegal: measures |A> and
/// |dual(A)>).
CounterfeitCurve counterfeit_experiment(
    size_t n,
    const std::string &attack,
    const std::vector<size_t> &budgets,
    size_t trials,
    uint64_t seed,
    size_t jobs = 1);

std::vector<std::string> counterfeit_attacks();
std::optional<double> counterfeit_closed_form(size_t n, const std::string &attack, size_t budget);

/// min(1, (2q + 1)^2 / 2^{n/2}): the success a q-query amplitude amplification
/// can reach; the query lower bound says no attack scales faster in q.
double counterfeit_reference(size_t n, size_t budget);

void write_game_csv_header(std::ostream &out);
void write_game_csv_row(std::ostream &out, const GameOutcome &g);

}  // namespace sublab

#endif
