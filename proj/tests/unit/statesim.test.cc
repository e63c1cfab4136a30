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

#include "sublab/statesim.h"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace sublab;

namespace {

// Dense Walsh-Hadamard matrix built entrywise, independent of apply_hadamard.
Eigen::MatrixXcd dense_hadamard(size_t n) {
    Eigen::Index d = Eigen::Index{1} << n;
    Eigen::MatrixXcd h(d, d);
    double scale = std::pow(2.0, -0.5 * static_cast<double>(n));
    for (Eigen::Index x = 0; x < d; x++) {
        for (Eigen::Index y = 0; y < d; y++) {
            h(x, y) = (__builtin_popcountll(static_cast<uint64_t>(x & y)) & 1) ? -scale : scale;
        }
    }
    return h;
}

Eigen::MatrixXcd dense_projector(const Subspace &s) {
    Eigen::Index d = Eigen::Index{1} << s.ambient_dim();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index x = 0; x < d; x++) {
        if (s.contains(static_cast<uint64_t>(x))) {
            p(x, x) = 1;
        }
    }
    return p;
}

struct NoInstance {
    Subspace a;
    Subspace b;
};

NoInstance no_instance_8(Rng &rng) {
    Subspace a = sample_subspace(8, 4, rng);
    Subspace b = sample_subspace_within(a.dual(), 2, rng);
    return {a, b};
}

}  // namespace

TEST(statesim, subspace_state_examples) {
    PureState z = subspace_state(Subspace(2));
    ASSERT_NEAR(std::abs(z[0] - 1.0), 0, 1e-12);
    PureState bell = subspace_state(canonicalize(2, std::vector<BitVector>{BitVector::from_string("11")}));
    double r = 1 / std::sqrt(2.0);
    ASSERT_NEAR(std::abs(bell[0] - r), 0, 1e-12);
    ASSERT_NEAR(std::abs(bell[3] - r), 0, 1e-12);
    ASSERT_NEAR(std::abs(bell[1]), 0, 1e-12);
    ASSERT_NEAR(std::abs(bell[2]), 0, 1e-12);
}

TEST(statesim, subspace_state_matches_enumeration) {
    Rng rng(1);
    Subspace s = sample_subspace(8, 4, rng);
    PureState psi = subspace_state(s);
    std::vector<bool> in(256, false);
    for (const auto &v : enumerate(s)) {
        in[v.bits()] = true;
    }
    for (uint64_t x = 0; x < 256; x++) {
        ASSERT_NEAR(std::abs(psi[x] - (in[x] ? 0.25 : 0.0)), 0, 1e-12);
    }
}

TEST(statesim, subspace_state_respects_cap) {
    ASSERT_THROW(subspace_state(Subspace(caps().statevector_qubits + 1)), CapExceeded);
}

TEST(statesim, hadamard_of_zero_is_uniform) {
    PureState u = hadamard_all(PureState::basis(5, 0));
    ASSERT_LE(u.distance(PureState::uniform(5)), 1e-12);
}

TEST(statesim, hadamard_matches_dense_matrix) {
    Rng rng(2);
    PureState psi = PureState::haar_random(6, rng);
    Amplitudes expected = dense_hadamard(6) * psi.amplitudes();
    ASSERT_LE((hadamard_all(psi).amplitudes() - expected).norm(), 1e-12);
}

TEST(statesim, self_dual_state_is_hadamard_invariant) {
    PureState bell = subspace_state(canonicalize(2, std::vector<BitVector>{BitVector::from_string("11")}));
    ASSERT_LE(hadamard_all(bell).distance(bell), 1e-12);
}

TEST(statesim, hadamard_maps_subspace_state_to_dual) {
    Rng rng(3);
    for (int trial = 0; trial < 200; trial++) {
        size_t n = 1 + uniform_below(rng, 12);
        Subspace a = sample_subspace(n, uniform_below(rng, n + 1), rng);
        ASSERT_LE(hadamard_all(subspace_state(a)).distance(subspace_state(a.dual())), 1e-9);
    }
}

TEST(statesim, hadamard_is_an_involution) {
    Rng rng(4);
    for (int trial = 0; trial < 50; trial++) {
        PureState psi = PureState::haar_random(1 + uniform_below(rng, 10), rng);
        ASSERT_LE(hadamard_all(hadamard_all(psi)).distance(psi), 1e-9);
    }
}

TEST(statesim, membership_projector_examples) {
    ASSERT_LE((membership_projector(Subspace::full(3)).matrix() - Eigen::MatrixXcd::Identity(8, 8)).norm(), 0);
    Eigen::MatrixXcd zero_proj = Eigen::MatrixXcd::Zero(8, 8);
    zero_proj(0, 0) = 1;
    ASSERT_LE((membership_projector(Subspace(3)).matrix() - zero_proj).norm(), 0);
    Rng rng(5);
    auto p = membership_projector(sample_subspace(4, 2, rng));
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(p.matrix());
    ASSERT_EQ(lu.rank(), 4);
    ASSERT_LE((p.matrix() * p.matrix() - p.matrix()).norm(), 1e-12);
}

TEST(statesim, accept_probability_examples) {
    Rng rng(6);
    PureState psi = PureState::haar_random(3, rng);
    ASSERT_NEAR(accept_probability(AcceptOperator::checked(Eigen::MatrixXcd::Identity(8, 8)), psi), 1, 1e-12);
    Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(2, 2);
    p0(0, 0) = 1;
    ASSERT_NEAR(accept_probability(AcceptOperator::checked(p0), PureState::basis(1, 1)), 0, 1e-15);
    ASSERT_THROW(accept_probability(AcceptOperator::checked(p0), psi), DimensionMismatch);
}

TEST(statesim, vstar_sandwich_on_no_instance_is_quarter) {
    Rng rng(7);
    for (int trial = 0; trial < 5; trial++) {
        auto inst = no_instance_8(rng);
        Eigen::MatrixXcd h = dense_hadamard(8);
        Eigen::MatrixXcd pa = dense_projector(inst.a);
        Eigen::MatrixXcd pb = dense_projector(inst.b);
        auto m = AcceptOperator::trusted(pa * h * pb * h * pa);
        ASSERT_NEAR(accept_probability(m, subspace_state(inst.a)), 0.25, 1e-9);
        ASSERT_NEAR(accept_probability(m, subspace_state(inst.a)), std::pow(2.0, -8.0 / 4), 1e-9);
    }
}

TEST(statesim, accept_probability_is_linear_over_ensembles) {
    Rng rng(8);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Random(8, 8);
    Eigen::MatrixXcd m = g * g.adjoint();
    m /= hermitian_eigenvalues(m).maxCoeff();
    auto op = AcceptOperator::checked(m);
    Ensemble e;
    double expected = 0;
    double weights[] = {0.2, 0.5, 0.3};
    for (double w : weights) {
        PureState psi = PureState::haar_random(3, rng);
        expected += w * accept_probability(op, psi);
        e.entries.emplace_back(w, psi);
    }
    ASSERT_NEAR(accept_probability(op, e), expected, 1e-12);
    e.entries[0].first = 0.3;
    ASSERT_THROW(accept_probability(op, e), std::invalid_argument);
}

TEST(statesim, checked_operator_rejects_non_contractions) {
    ASSERT_THROW(AcceptOperator::checked(2.0 * Eigen::MatrixXcd::Identity(2, 2)), std::invalid_argument);
    Eigen::MatrixXcd nh = Eigen::MatrixXcd::Zero(2, 2);
    nh(0, 1) = 0.5;
    ASSERT_THROW(AcceptOperator::checked(nh), std::invalid_argument);
}

TEST(statesim, lambda_max_examples) {
    ASSERT_NEAR(lambda_max(AcceptOperator::checked(Eigen::MatrixXcd::Identity(8, 8))).value, 1, 1e-9);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = 0.7;
    ASSERT_NEAR(lambda_max(AcceptOperator::checked(d)).value, 0.7, 1e-9);
}

TEST(statesim, lambda_max_of_sandwich_matches_full_eigendecomposition) {
    Rng rng(9);
    auto inst = no_instance_8(rng);
    Eigen::MatrixXcd h = dense_hadamard(8);
    Eigen::MatrixXcd m = dense_projector(inst.a) * h * dense_projector(inst.b) * h * dense_projector(inst.a);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> oracle(m);
    double top = oracle.eigenvalues().real().maxCoeff();
    ASSERT_NEAR(top, 0.25, 1e-9);
    auto res = lambda_max(AcceptOperator::trusted(m));
    ASSERT_NEAR(res.value, top, 1e-9);
    ASSERT_LE(res.residual, 1e-9);
}

TEST(statesim, lambda_max_dominates_random_rayleigh_quotients) {
    Rng rng(10);
    for (int trial = 0; trial < 5; trial++) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Random(16, 16);
        Eigen::MatrixXcd m = g * g.adjoint();
        m /= 1.1 * hermitian_eigenvalues(m).maxCoeff();
        auto op = AcceptOperator::checked(m);
        auto res = lambda_max(op);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> oracle(m);
        ASSERT_NEAR(res.value, oracle.eigenvalues().real().maxCoeff(), 1e-9);
        for (int i = 0; i < 2000; i++) {
            PureState v = PureState::haar_random(4, rng);
            ASSERT_LE(accept_probability(op, v), res.value + 1e-9);
        }
    }
}

TEST(statesim, lambda_max_handles_degenerate_gap) {
    // Two nearly equal top eigenvalues stall power iteration; the dense
    // fallback must still deliver a residual-verified answer.
    Eigen::VectorXd diag(6);
    diag << 0.1, 0.2, 0.3, 0.5, 0.8 - 1e-12, 0.8;
    Rng rng(11);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Random(6, 6);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd m = q * diag.cast<cdouble>().asDiagonal() * q.adjoint();
    m = 0.5 * (m + m.adjoint());
    auto res = lambda_max(AcceptOperator::checked(m));
    ASSERT_NEAR(res.value, 0.8, 1e-9);
}

TEST(statesim, matrix_free_lambda_max) {
    LinearOperator op{4, [](const Amplitudes &in, Amplitudes &out) {
                          out = in;
                          out[0] *= 0.9;
                          out[1] *= 0.1;
                          out[2] *= 0.0;
                          out[3] *= 0.4;
                      }};
    ASSERT_NEAR(lambda_max(op).value, 0.9, 1e-9);
}

TEST(statesim, pure_state_json_round_trip) {
    Rng rng(12);
    PureState psi = PureState::haar_random(3, rng);
    ASSERT_LE(PureState::from_json(psi.to_json()).distance(psi), 1e-15);
}
