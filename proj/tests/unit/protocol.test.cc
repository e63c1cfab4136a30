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

#include "sublab/protocol.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"

using namespace sublab;

namespace {

// Dense reference: Pi_B H Pi_A built from explicit matrices.
Eigen::MatrixXcd dense_projector(const Subspace &s) {
    size_t d = size_t{1} << s.ambient_dim();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
    for (size_t x = 0; x < d; x++) {
        if (s.contains(static_cast<uint64_t>(x))) {
            p(x, x) = 1;
        }
    }
    return p;
}

Eigen::MatrixXcd dense_hadamard(size_t n) {
    size_t d = size_t{1} << n;
    Eigen::MatrixXcd h(d, d);
    double scale = std::pow(2.0, -0.5 * n);
    for (size_t r = 0; r < d; r++) {
        for (size_t c = 0; c < d; c++) {
            h(r, c) = (__builtin_popcountll(r & c) & 1) ? -scale : scale;
        }
    }
    return h;
}

Eigen::MatrixXcd dense_kraus(const Instance &inst) {
    return dense_projector(inst.b) * dense_hadamard(inst.n) * dense_projector(inst.a);
}

Eigen::MatrixXcd dense_accept(const Instance &inst) {
    Eigen::MatrixXcd k = dense_kraus(inst);
    return k.adjoint() * k;
}

}  // namespace

TEST(protocol, generator_rejects_bad_lengths) {
    EXPECT_FALSE(generator_G(6, 1).has_value());
    EXPECT_FALSE(generator_G(0, 1).has_value());
    auto inst = generator_G(8, 1);
    ASSERT_TRUE(inst.has_value());
    EXPECT_EQ(inst->a.dim(), 4u);
    EXPECT_EQ(inst->b, inst->a.dual());
    inst->validate();
}

TEST(protocol, completeness_is_one) {
    for (size_t n : {4, 8, 12}) {
        for (uint64_t seed = 0; seed < 5; seed++) {
            auto inst = *generator_G(n, seed);
            auto r = verify_vstar(inst, BitVector::zero(n), honest_prove(inst));
            EXPECT_NEAR(r.accept_probability, 1.0, 1e-9);
            EXPECT_FALSE(r.step_rejected.has_value());
            EXPECT_EQ(r.queries_used, 2u);
        }
    }
}

TEST(protocol, nonzero_input_rejected_at_step_one) {
    auto inst = *generator_G(8, 3);
    auto x = BitVector::from_string("10000000");
    auto r = verify_vstar(inst, x, honest_prove(inst));
    EXPECT_EQ(r.accept_probability, 0.0);
    EXPECT_EQ(r.step_rejected, 1);
}

TEST(protocol, orthogonal_proof_rejected_at_a_test) {
    auto inst = *generator_G(8, 4);
    // A basis state outside A.
    uint64_t outside = 0;
    while (inst.a.contains(outside)) {
        outside++;
    }
    auto r = verify_vstar(inst, BitVector::zero(8), PureState::basis(8, outside));
    EXPECT_EQ(r.step_rejected, 2);
}

TEST(protocol, honest_prove_refuses_no_instances) {
    auto inst = sample_no_instance(8, InstanceKind::NoAB, 5);
    EXPECT_THROW(honest_prove(inst), std::invalid_argument);
}

TEST(protocol, no_instance_dims) {
    auto ab = sample_no_instance(8, InstanceKind::NoAB, 1);
    EXPECT_EQ(ab.a.dim(), 4u);
    EXPECT_EQ(ab.b.dim(), 2u);
    EXPECT_TRUE(ab.a.dual().contains(ab.b));
    auto ba = sample_no_instance(8, InstanceKind::NoBA, 1);
    EXPECT_EQ(ba.a.dim(), 2u);
    EXPECT_EQ(ba.b.dim(), 4u);
    EXPECT_THROW(sample_no_instance(6, InstanceKind::NoAB, 1), std::invalid_argument);
}

TEST(protocol, accept_operator_matches_dense_reference) {
    for (auto kind : {InstanceKind::Yes, InstanceKind::NoAB, InstanceKind::NoBA}) {
        Instance inst = kind == InstanceKind::Yes ? *generator_G(8, 11) : sample_no_instance(8, kind, 11);
        auto op = vstar_accept_operator(inst);
        EXPECT_LT((op.matrix() - dense_accept(inst)).norm(), 1e-9);
    }
}

TEST(protocol, max_cheat_matches_dense_eigensolver) {
    for (uint64_t seed = 0; seed < 4; seed++) {
        for (auto kind : {InstanceKind::NoAB, InstanceKind::NoBA}) {
            auto inst = sample_no_instance(8, kind, seed);
            // Largest squared singular value of the Kraus operator.
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense_kraus(inst));
            double ref = svd.singularValues()(0) * svd.singularValues()(0);
            EXPECT_NEAR(max_cheat_probability(inst), ref, 1e-9);
            // |A||B|/2^n
            EXPECT_NEAR(ref, std::pow(2.0, -2.0), 1e-9);
        }
    }
}

TEST(protocol, max_cheat_on_yes_is_one) {
    auto inst = *generator_G(12, 2);
    EXPECT_NEAR(max_cheat_probability(inst), 1.0, 1e-9);
}

TEST(protocol, sampled_mode_within_hoeffding) {
    auto inst = sample_no_instance(8, InstanceKind::NoAB, 9);
    // Best cheating proof: uniform over A (the top eigenvector).
    auto proof = subspace_state(inst.a);
    double exact = verify_vstar(inst, BitVector::zero(8), proof).accept_probability;
    Rng rng(17);
    size_t shots = 20000;
    double freq = static_cast<double>(sample_vstar(inst, BitVector::zero(8), proof, shots, rng)) / shots;
    double eps = std::sqrt(std::log(2 / 1e-6) / (2.0 * shots));
    EXPECT_LE(std::abs(freq - exact), eps);
}

TEST(protocol, json_round_trip) {
    auto inst = sample_no_instance(8, InstanceKind::NoBA, 21);
    auto j = inst.to_json();
    auto back = Instance::from_json(j);
    EXPECT_EQ(back.a, inst.a);
    EXPECT_EQ(back.b, inst.b);
    EXPECT_EQ(back.kind, inst.kind);
    EXPECT_EQ(back.to_json().dump(), j.dump());
}

TEST(protocol, csv_rows) {
    std::ostringstream out;
    write_probability_csv_header(out);
    write_probability_csv_row(out, "i0", InstanceKind::NoAB, 0.25);
    EXPECT_EQ(out.str(), "instance_id,kind,probability\ni0,NO_AB,0.25\n");
}
