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

#include "sublab/piracy.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"

using namespace sublab;

namespace {

Eigen::MatrixXcd dense_projector(const MembershipTable &t) {
    size_t d = size_t{1} << t.n();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
    for (size_t x = 0; x < d; x++) {
        if (t.contains(x)) {
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

// Kraus operator of the plain V* program, from explicit matrices.
Eigen::MatrixXcd dense_kraus(const OraclePair &o) {
    return dense_projector(*o.second) * dense_hadamard(o.n()) * dense_projector(*o.first);
}

Amplitudes random_state(size_t qubits, uint64_t seed) {
    Rng rng(seed);
    return PureState::haar_random(qubits, rng).amplitudes();
}

const VerifierProgram &vstar() {
    return VerifierRegistry::global().get("vstar");
}

GameOptions exact_options() {
    GameOptions o;
    o.mode = GameOptions::Mode::Exact;
    o.exact_instances = 8;
    return o;
}

}  // namespace

TEST(verifier_program, registry_contents) {
    auto names = VerifierRegistry::global().names();
    EXPECT_NE(std::find(names.begin(), names.end(), "vstar"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "vstar-swapped"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "vstar-dummy"), names.end());
    EXPECT_THROW(VerifierRegistry::global().get("nope"), std::invalid_argument);
    EXPECT_EQ(vstar().query_count(), 2u);
}

TEST(verifier_program, all_programs_complete_on_honest_proofs) {
    auto g = vstar_game_instance(8, 3);
    for (const auto &name : VerifierRegistry::global().names()) {
        const auto &p = VerifierRegistry::global().get(name);
        if (name.rfind("vstar", 0) != 0) {
            continue;
        }
        auto e = accept_effect(p, g.oracles, g.classical);
        EXPECT_NEAR(e.probability(g.proof.amplitudes()), 1.0, 1e-9) << name;
    }
}

TEST(verifier_program, accept_effect_matches_dense_kraus) {
    auto g = vstar_game_instance(4, 5);
    auto k = dense_kraus(g.oracles);
    auto e = accept_effect(vstar(), g.oracles, g.classical);
    for (uint64_t s = 0; s < 10; s++) {
        Amplitudes psi = random_state(4, s);
        EXPECT_NEAR(e.probability(psi), (k * psi).squaredNorm(), 1e-12);
    }
}

TEST(verifier_program, precheck_failure_rejects) {
    auto g = vstar_game_instance(4, 5);
    ClassicalPart bad = {{"x", "0100"}};
    auto e = accept_effect(vstar(), g.oracles, bad);
    EXPECT_EQ(e.probability(g.proof.amplitudes()), 0.0);
}

TEST(verifier_program, joint_probability_matches_kronecker) {
    auto g = vstar_game_instance(4, 7);
    auto k = dense_kraus(g.oracles);
    // Register 1 is the low qubits: joint index = x1 + 16 x2, i.e. K2 (x) K1.
    Eigen::MatrixXcd kk(256, 256);
    for (int r = 0; r < 256; r++) {
        for (int c = 0; c < 256; c++) {
            kk(r, c) = k(r >> 4, c >> 4) * k(r & 15, c & 15);
        }
    }
    auto e = accept_effect(vstar(), g.oracles, g.classical);
    for (uint64_t s = 0; s < 5; s++) {
        Amplitudes psi = random_state(8, 100 + s);
        EXPECT_NEAR(joint_probability(e, e, psi), (kk * psi).squaredNorm(), 1e-12);
    }
}

TEST(verifier_program, query_effect_dominates_accept_over_q) {
    auto g = vstar_game_instance(8, 9);
    for (const auto &name : {"vstar", "vstar-swapped", "vstar-dummy"}) {
        const auto &p = VerifierRegistry::global().get(name);
        auto a = accept_effect(p, g.oracles, g.classical);
        auto m = query_effect(p, g.oracles, g.classical);
        double total_weight = 0;
        for (const auto &t : m.terms) {
            total_weight += t.weight;
        }
        EXPECT_NEAR(total_weight, 1.0, 1e-12);
        for (uint64_t s = 0; s < 10; s++) {
            Amplitudes psi = random_state(8, s);
            EXPECT_GE(m.probability(psi) + 1e-12, a.probability(psi) / static_cast<double>(p.query_count()));
        }
    }
}

TEST(verifier_program, vstar_query_effect_closed_form) {
    auto g = vstar_game_instance(8, 10);
    auto k = dense_kraus(g.oracles);
    Eigen::MatrixXcd m = 0.5 * (dense_projector(*g.oracles.first) + k.adjoint() * k);
    auto e = query_effect(vstar(), g.oracles, g.classical);
    for (uint64_t s = 0; s < 5; s++) {
        Amplitudes psi = random_state(8, 40 + s);
        EXPECT_NEAR(e.probability(psi), (psi.adjoint() * m * psi)(0, 0).real(), 1e-12);
    }
}

TEST(verifier_program, sampled_runs_match_exact) {
    auto g = vstar_game_instance(8, 12);
    Amplitudes zero = Amplitudes::Zero(256);
    zero[0] = 1;
    auto e = accept_effect(vstar(), g.oracles, g.classical);
    double exact = e.probability(zero);
    Rng rng(5);
    size_t shots = 20000, hits = 0, hits_effect = 0;
    for (size_t i = 0; i < shots; i++) {
        Amplitudes v = zero;
        hits += sample_run(vstar(), g.oracles, g.classical, v, 0, rng);
        Amplitudes w = zero;
        hits_effect += sample_effect(e, w, 0, rng);
    }
    double sigma = std::sqrt(exact * (1 - exact) / shots);
    EXPECT_NEAR(static_cast<double>(hits) / shots, exact, 4 * sigma);
    EXPECT_NEAR(static_cast<double>(hits_effect) / shots, exact, 4 * sigma);
}

TEST(piracy, forward_and_pad_exact) {
    for (size_t n : {4, 8}) {
        auto g = run_piracy_game(n, PirateStrategy::forward_and_pad(), vstar(), vstar(), 8, 1, exact_options());
        EXPECT_TRUE(g.exact);
        EXPECT_NEAR(g.joint_accept, std::pow(2.0, -0.5 * n), 1e-9);
        EXPECT_DOUBLE_EQ(g.ci_low, g.joint_accept);
        EXPECT_DOUBLE_EQ(g.ci_high, g.joint_accept);
        EXPECT_EQ(g.queries, 0u);
    }
}

TEST(piracy, forward_and_pad_against_dense_reference) {
    auto inst = vstar_game_instance(4, 77);
    auto k = dense_kraus(inst.oracles);
    Amplitudes zero = Amplitudes::Zero(16);
    zero[0] = 1;
    double ref = (k * inst.proof.amplitudes()).squaredNorm() * (k * zero).squaredNorm();
    auto run = run_pirate(PirateStrategy::forward_and_pad(), inst, 0, 0);
    auto e = accept_effect(vstar(), inst.oracles, inst.classical);
    EXPECT_NEAR(ensemble_probability(run.output, e, e), ref, 1e-12);
    EXPECT_NEAR(ref, 0.25, 1e-12);
}

TEST(piracy, measure_resend_exact) {
    for (size_t n : {4, 8}) {
        auto g = run_piracy_game(n, PirateStrategy::measure_resend(), vstar(), vstar(), 8, 2, exact_options());
        EXPECT_NEAR(g.joint_accept, std::pow(2.0, -1.0 * n), 1e-9);
    }
}

TEST(piracy, cnot_copy_exact) {
    auto g = run_piracy_game(8, PirateStrategy::cnot_copy(), vstar(), vstar(), 4, 3, exact_options());
    EXPECT_NEAR(g.joint_accept, 1.0 / 16, 1e-9);
}

TEST(piracy, oracle_sample_exact) {
    double x = 1.0 / 16;
    auto g = run_piracy_game(8, PirateStrategy::oracle_sample(), vstar(), vstar(), 8, 4, exact_options());
    EXPECT_NEAR(g.joint_accept, x + (1 - x) * x, 1e-9);
    EXPECT_EQ(g.queries, 1u);
    GameOptions three = exact_options();
    three.budget = 3;
    auto g3 = run_piracy_game(8, PirateStrategy::oracle_sample(), vstar(), vstar(), 8, 4, three);
    double hit = 1 - std::pow(1 - x, 3);
    EXPECT_NEAR(g3.joint_accept, hit + (1 - hit) * x, 1e-9);
    EXPECT_EQ(g3.queries, 3u);
}

TEST(piracy, second_copy_baseline_is_flagged) {
    auto g = run_piracy_game(8, PirateStrategy::second_copy_baseline(), vstar(), vstar(), 4, 5, exact_options());
    EXPECT_NEAR(g.joint_accept, 1.0, 1e-9);
    EXPECT_TRUE(g.illegal);
}

TEST(piracy, mixed_verifiers) {
    const auto &sw = VerifierRegistry::global().get("vstar-swapped");
    const auto &dm = VerifierRegistry::global().get("vstar-dummy");
    auto g = run_piracy_game(8, PirateStrategy::forward_and_pad(), sw, dm, 4, 6, exact_options());
    EXPECT_NEAR(g.joint_accept, 1.0 / 16, 1e-9);
}

TEST(piracy, monte_carlo_agrees_with_exact) {
    GameOptions mc;
    mc.mode = GameOptions::Mode::MonteCarlo;
    for (auto pirate : {PirateStrategy::forward_and_pad(), PirateStrategy::measure_resend(),
                        PirateStrategy::oracle_sample()}) {
        auto ex = run_piracy_game(8, pirate, vstar(), vstar(), 8, 9, exact_options());
        auto g = run_piracy_game(8, pirate, vstar(), vstar(), 4000, 9, mc);
        EXPECT_FALSE(g.exact);
        EXPECT_LE(g.ci_low, g.joint_accept);
        EXPECT_GE(g.ci_high, g.joint_accept);
        double sigma = std::sqrt(ex.joint_accept * (1 - ex.joint_accept) / 4000);
        EXPECT_NEAR(g.joint_accept, ex.joint_accept, 3 * sigma) << pirate.name;
    }
}

TEST(piracy, jobs_do_not_change_results) {
    GameOptions mc;
    mc.mode = GameOptions::Mode::MonteCarlo;
    auto a = run_piracy_game(4, PirateStrategy::measure_resend(), vstar(), vstar(), 500, 11, mc);
    mc.jobs = 3;
    auto b = run_piracy_game(4, PirateStrategy::measure_resend(), vstar(), vstar(), 500, 11, mc);
    EXPECT_EQ(a.joint_accept, b.joint_accept);
}

TEST(piracy, zero_trials_rejected) {
    EXPECT_THROW(run_piracy_game(8, PirateStrategy::forward_and_pad(), vstar(), vstar(), 0, 1), std::invalid_argument);
}

TEST(piracy, exact_mode_respects_joint_cap) {
    GameOptions o = exact_options();
    EXPECT_THROW(run_piracy_game(16, PirateStrategy::forward_and_pad(), vstar(), vstar(), 1, 1, o), CapExceeded);
}

TEST(piracy, budget_is_enforced) {
    PirateStrategy greedy{"greedy", false, 1, [](PirateInput &in) {
                              in.first.query_classical(0);
                              in.first.query_classical(1);
                              PirateOutput out;
                              out.branches.push_back({1.0, ProductBranch{in.proof.amplitudes(), in.proof.amplitudes()}});
                              return out;
                          }};
    auto inst = vstar_game_instance(4, 1);
    EXPECT_THROW(run_pirate(greedy, inst, 1, 0), std::runtime_error);
}

TEST(piracy, malformed_output_rejected) {
    PirateStrategy broken{"broken", false, 0, [](PirateInput &in) {
                              PirateOutput out;
                              out.branches.push_back({0.5, ProductBranch{in.proof.amplitudes(), in.proof.amplitudes()}});
                              return out;
                          }};
    EXPECT_THROW(run_pirate(broken, vstar_game_instance(4, 1), 0, 0), std::invalid_argument);
}

TEST(query_povm, member_only_queries_accept) {
    Subspace a = sample_subspace(8, 4, uint64_t{3});
    MembershipOracle o("A", a);
    o.record_inputs(true);
    for (uint64_t m : a.member_words()) {
        o.query_classical(m);
    }
    auto target = [&](uint64_t x) { return a.contains(x); };
    EXPECT_NEAR(query_povm_probability(o.log(), target), 1.0, 1e-12);
    Rng rng(1);
    for (int i = 0; i < 100; i++) {
        EXPECT_TRUE(query_povm_measure(o.log(), target, rng).accept);
    }
}

TEST(query_povm, uniform_queries_hit_with_subspace_density) {
    auto inst = vstar_game_instance(8, 21);
    auto run = run_pirate(PirateStrategy::oracle_sample(), inst, 4, 0);
    ASSERT_EQ(run.log.size(), 4u);
    auto a = inst.oracles.first;
    auto target = [&](uint64_t x) { return a->contains(x); };
    EXPECT_NEAR(query_povm_probability(run.log, target), 1.0 / 16, 1e-12);
    Rng rng(2);
    size_t shots = 20000, hits = 0;
    for (size_t i = 0; i < shots; i++) {
        hits += query_povm_measure(run.log, target, rng).accept;
    }
    EXPECT_NEAR(static_cast<double>(hits) / shots, 1.0 / 16, 4 * std::sqrt(0.0625 * 0.9375 / shots));
}

TEST(query_povm, zero_queries_reject) {
    QueryLog empty;
    Rng rng(0);
    auto s = query_povm_measure(empty, [](uint64_t) { return true; }, rng);
    EXPECT_FALSE(s.accept);
    EXPECT_FALSE(s.query.has_value());
    EXPECT_EQ(query_povm_probability(empty, [](uint64_t) { return true; }), 0.0);
}

TEST(reduction_chain, holds_exactly_for_every_pirate) {
    for (const auto &name : pirate_names()) {
        auto r = reduction_chain(8, pirate_by_name(name), vstar(), vstar(), 4, 13, exact_options());
        EXPECT_TRUE(r.holds()) << name;
        EXPECT_EQ(r.p1, 2u);
        EXPECT_LE(r.joint, 4 * r.m_m + 1e-9) << name;
    }
}

TEST(reduction_chain, forward_and_pad_values) {
    auto r = reduction_chain(8, PirateStrategy::forward_and_pad(), vstar(), vstar(), 4, 14, exact_options());
    double x = 1.0 / 16;
    EXPECT_NEAR(r.joint, x, 1e-9);
    EXPECT_NEAR(r.m_v, x, 1e-9);
    EXPECT_NEAR(r.m_m, 0.5 * (1 + x), 1e-9);
}

TEST(reduction_chain, monte_carlo_mode) {
    GameOptions mc;
    mc.mode = GameOptions::Mode::MonteCarlo;
    auto r = reduction_chain(8, PirateStrategy::measure_resend(), vstar(), vstar(), 2000, 15, mc);
    EXPECT_FALSE(r.exact);
    EXPECT_TRUE(r.holds());
}

TEST(counterfeit, closed_forms) {
    EXPECT_NEAR(*counterfeit_closed_form(8, "measure-and-guess", 0), 1.0 / 16, 1e-12);
    EXPECT_NEAR(*counterfeit_closed_form(8, "measure-and-guess", 4), 1 - std::pow(15.0 / 16, 4), 1e-12);
    EXPECT_NEAR(*counterfeit_closed_form(8, "measure-and-guess", 4), 0.227524, 1e-6);
    EXPECT_NEAR(*counterfeit_closed_form(8, "both-copies", 3), 1.0, 0);
    // Three Grover iterations at marked fraction 1/16 nearly saturate.
    double theta = std::asin(0.25);
    EXPECT_NEAR(*counterfeit_closed_form(8, "grover", 2), std::pow(std::sin(5 * theta), 2), 1e-12);
}

TEST(counterfeit, measure_and_guess_matches_closed_form) {
    auto curve = counterfeit_experiment(8, "measure-and-guess", {0, 1, 4}, 4000, 7);
    ASSERT_EQ(curve.points.size(), 3u);
    for (const auto &pt : curve.points) {
        EXPECT_TRUE(pt.within_ci()) << pt.budget << " " << pt.rate;
        EXPECT_TRUE(pt.below_reference());
    }
}

TEST(counterfeit, grover_matches_closed_form) {
    auto curve = counterfeit_experiment(8, "grover", {0, 1, 2}, 3000, 8);
    for (const auto &pt : curve.points) {
        EXPECT_TRUE(pt.within_ci()) << pt.budget << " " << pt.rate << " " << *pt.expected;
        EXPECT_LE(*pt.expected, pt.reference + 1e-12);
    }
}

TEST(counterfeit, both_copies_baseline) {
    auto curve = counterfeit_experiment(6, "both-copies", {0}, 200, 9);
    EXPECT_TRUE(curve.illegal);
    EXPECT_EQ(curve.points[0].successes, 200u);
}

TEST(counterfeit, rejects_bad_arguments) {
    EXPECT_THROW(counterfeit_experiment(7, "grover", {1}, 10, 1), std::invalid_argument);
    EXPECT_THROW(counterfeit_experiment(8, "nope", {1}, 10, 1), std::invalid_argument);
}

TEST(piracy, csv_row) {
    GameOutcome g;
    g.n = 8;
    g.pirate = "measure-resend";
    g.v1 = g.v2 = "vstar";
    g.trials = 10;
    g.joint_accept = g.ci_low = g.ci_high = 0.00390625;
    std::ostringstream out;
    write_game_csv_header(out);
    write_game_csv_row(out, g);
    EXPECT_EQ(
        out.str(),
        "n,pirate,v1,v2,trials,joint_accept,ci_low,ci_high,queries,exact,illegal\n"
        "8,measure-resend,vstar,vstar,10,0.00390625,0.00390625,0.00390625,0,0,0\n");
}

TEST(wilson, known_values) {
    auto ci = wilson_interval(0, 100);
    EXPECT_EQ(ci.low, 0.0);
    EXPECT_NEAR(ci.high, 0.0369935, 1e-6);
    auto mid = wilson_interval(50, 100);
    EXPECT_NEAR(mid.low, 0.4038315, 1e-6);
    EXPECT_NEAR(mid.high, 0.5961685, 1e-6);
    auto all = wilson_interval(100, 100);
    EXPECT_EQ(all.high, 1.0);
    EXPECT_NEAR(all.low, 1 - 0.0369935, 1e-6);
}
