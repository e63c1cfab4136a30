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

#ifndef SUBLAB_CLONEABLE_H
#define SUBLAB_CLONEABLE_H

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sublab/common.h"
#include "sublab/statesim.h"

namespace sublab {

/// Completeness, cloning fidelity and soundness.
struct CalculusParams {
    double c = 1;
    double f = 1;
    double s = 0;
};

/// Raised by a calculus transformation; carries the stage name.
class StageError : public std::runtime_error {
   public:
    StageError(std::string stage, const std::string &what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {
    }
    const std::string &stage() const {
        return stage_;
    }

   private:
    std::string stage_;
};

/// Perfect cloner for the designated witness W|x>: the transversal copy
/// conjugated by the basis change W, C = (W (x) W) COPY (W^dagger (x) I).
class Cloner {
   public:
    Cloner(Eigen::MatrixXcd basis, uint64_t witness_index);
    static Cloner basis_copier(size_t p, uint64_t x);

    size_t p() const {
        return p_;
    }
    const Eigen::MatrixXcd &basis() const {
        return basis_;
    }
    uint64_t witness_index() const {
        return witness_index_;
    }
    PureState witness() const;
    /// Unitary on 2p qubits; the source register is the low p qubits.
    Eigen::MatrixXcd unitary() const;
    /// |<w|<w| C (|w> (x) |0>)|^2 for the designated witness w.
    double fidelity() const;

   private:
    size_t p_;
    Eigen::MatrixXcd basis_;
    uint64_t witness_index_;
};

/// Cloner of a tuple of proofs (proof 0 in the low qubits).
Cloner tensor_cloners(const std::vector<Cloner> &parts);

/// A toy verifier for a promise problem with one YES and one NO input. Each
/// input has its own accept operator on the k*p-qubit proof space; proof j
/// occupies qubits [j*p, (j+1)*p).
struct ToyVerifier {
    std::string name;
    size_t k = 1;
    size_t p = 1;
    Eigen::MatrixXcd yes_op;
    Eigen::MatrixXcd no_op;
    /// Claimed bounds.
    CalculusParams params;
    /// Designated honest proof tuple for the YES input.
    std::optional<std::vector<PureState>> witness;
    /// Set when both accept operators are separable across the proofs.
    bool separable = false;

    size_t proof_dim() const {
        return size_t{1} << p;
    }
    size_t dim() const {
        return size_t{1} << (k * p);
    }
    PureState witness_state() const;
    /// Honest acceptance <w|yes_op|w>.
    double honest_acceptance() const;
    /// Throws unless both operators are Hermitian contractions of the right
    /// size with spectrum in [0, 1] and the witness reaches c.
    void validate() const;
};

/// Toy verifier with a projective YES operator |u><u| (x) |0><0| (u =
/// sqrt(c)|0> + sqrt(1-c)|1> on qubit 0, witness |0...0>) and NO operator
/// 2s |Phi><Phi|, Phi maximally entangled between qubit 0 of proof 0 and
/// qubit 0 of proof 1, so the product-proof optimum is s. Needs k >= 2 unless
/// s = 0.
ToyVerifier projective_toy_verifier(size_t k, size_t p, double c, double s);

/// Named presets: "projective" (c = 2/3, s = 1/3) and "perfect" (c = 1,
/// s = 0).
ToyVerifier toy_preset(const std::string &name, size_t k, size_t p);

/// Basis copiers for the witness of a projective toy verifier.
std::vector<Cloner> default_cloners(const ToyVerifier &v);

struct ProductMaxOptions {
    size_t restarts = 16;
    size_t max_iterations = 2000;
    double tolerance = 1e-14;
    uint64_t seed = 1;
    size_t jobs = 1;
};

struct ProductMaxResult {
    double value = 0;
    /// Certificate: one unit vector per party attaining `value`.
    std::vector<Amplitudes> vectors;
    bool converged = false;
    /// Spread between the best and worst restart.
    double gap_estimate = 0;
};

/// max <e_1...e_k| M |e_1...e_k> over product unit vectors, by see-saw
/// alternation with random restarts. The result is achievable, hence a lower
/// bound on the true maximum. Party 0 occupies the least significant index.
ProductMaxResult product_max(const Eigen::MatrixXcd &m, const std::vector<size_t> &dims, const ProductMaxOptions &opt = {});

/// Value of M on a product state.
double product_value(const Eigen::MatrixXcd &m, const std::vector<Amplitudes> &parts);

enum class BoundStatus { Pass, Flagged, Fail };
std::string to_string(BoundStatus s);

struct UsefulBoundReport {
    double lambda_max = 0;
    double alpha = 0;
    size_t n = 0;
    /// alpha n^2.
    double bound = 0;
    /// alpha (sum of Schmidt coefficients of the top eigenvector)^2, the
    /// intermediate step of the bound; never above alpha n.
    double schmidt_bound = 0;
    BoundStatus status = BoundStatus::Fail;
};

/// Checks lambda_max(M) <= alpha n^2 + 1e-6 for M on C^n (x) C^n. When alpha
/// comes from a one-sided optimizer, an excess covered by `gap_estimate` is
/// flagged instead of failed.
UsefulBoundReport check_useful_bound(const Eigen::MatrixXcd &m, size_t n, double alpha, double gap_estimate = 0);

/// Random PSD contraction on C^d (largest eigenvalue uniform in (0, 1]).
Eigen::MatrixXcd random_psd_contraction(size_t d, Rng &rng);
/// Random separable PSD contraction on C^d1 (x) C^d2: a convex combination
/// of product projectors, scaled.
Eigen::MatrixXcd random_separable_contraction(size_t d1, size_t d2, size_t terms, Rng &rng);
/// |Phi+><Phi+| on C^d (x) C^d.
Eigen::MatrixXcd maximally_entangled_projector(size_t d);

struct TransformReport {
    std::string stage;
    CalculusParams input;
    double claimed_c = 0;
    double claimed_s = 0;
    double measured_c = 0;
    double measured_s = 0;
    bool pass_c = false;
    bool pass_s = false;
    /// Exact value the construction must produce from the measured input,
    /// when one is defined.
    std::optional<double> expected_c;
    std::vector<std::string> flags;
    nlohmann::json details = nlohmann::json::object();

    bool pass() const;
    nlohmann::json to_json() const;
};

struct Transformed {
    ToyVerifier verifier;
    TransformReport report;
};

/// P[Bin(m, a) >= t].
double binomial_upper_tail(size_t m, double a, size_t t);

struct AmplificationPoint {
    double c = 0;
    double s = 0;
    size_t q = 0;
    size_t ell = 0;
    size_t copies = 0;
    size_t threshold = 0;
    double completeness = 0;
    double bound = 0;

    bool pass() const {
        return completeness >= bound;
    }
};

/// Parameters of the thresholded repetition: N = 2 l q^2 clones, m = N + 1
/// parallel runs, threshold ceil((c + s)/2 * m), and the exact honest
/// completeness P[Bin(m, c) >= threshold] against 1 - 2^-l.
AmplificationPoint amplification_point(double c, double s, size_t q, size_t ell);

/// c in {2/3, 3/4, 0.9}, q in 1..5, l in 1..10, s in {c - 1/q, (c - 1/q)/2,
/// 0} (nonnegative values only).
std::vector<AmplificationPoint> amplification_grid();

/// Exact effective operator of the m-fold threshold test on cloned copies,
/// computed entrywise in the cloning basis.
Eigen::MatrixXcd threshold_operator(const Eigen::MatrixXcd &m, const Eigen::MatrixXcd &basis, size_t copies, size_t threshold);

/// Exact effective operator of the all-accept test on `copies` cloned copies.
Eigen::MatrixXcd repetition_operator(const Eigen::MatrixXcd &m, const Eigen::MatrixXcd &basis, size_t copies);

Transformed amplify_gap(const ToyVerifier &v, const std::vector<Cloner> &cloners, size_t q, size_t ell, const ProductMaxOptions &opt = {});

/// 1/2 + |<phi|psi>|^2 / 2.
double swap_test_probability(const Amplitudes &phi, const Amplitudes &psi);
/// prod_i (I + SWAP_i)/2 over k blocks of p qubits, on two k*p-qubit proofs
/// (proof 1 in the low qubits).
Eigen::MatrixXcd product_test_operator(size_t k, size_t p);

Transformed product_test_collapse(const ToyVerifier &v, const ProductMaxOptions &opt = {});

Transformed sequential_repeat(const ToyVerifier &v, const std::vector<Cloner> &cloners, size_t ell, const ProductMaxOptions &opt = {});

Transformed drop_unentanglement(const ToyVerifier &v, const ProductMaxOptions &opt = {});

struct PipelineOptions {
    size_t q = 3;
    size_t ell_amplify = 2;
    size_t ell_repeat = 1;
    ProductMaxOptions product_max;
};

struct PipelineReport {
    std::vector<TransformReport> stages;
    ToyVerifier final_verifier;

    bool pass() const;
    nlohmann::json to_json() const;
};

/// amplify_gap -> product_test_collapse -> sequential_repeat ->
/// drop_unentanglement with the bounds of each step asserted.
PipelineReport compose_theorem_pipeline(const ToyVerifier &v, const std::vector<Cloner> &cloners, const PipelineOptions &opt = {});

}  // namespace sublab

#endif
