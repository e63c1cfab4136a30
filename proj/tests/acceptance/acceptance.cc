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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 125).

#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sublab/cloneable.h"
#include "sublab/common.h"
#include "sublab/gf2.h"
#include "sublab/np_candidate.h"
#include "sublab/piracy.h"
#include "sublab/protocol.h"
#include "sublab/statesim.h"
#include "sublab/verifier_program.h"

using namespace sublab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what) {
        if (!ok && pass) {
            detail << "first failure: " << what << "; ";
        }
        pass = pass && ok;
    }
};

struct Criterion {
    std::string name;
    double time_limit_s;  // 0: none
    std::function<void(Outcome &)> body;
};

double pow2(double e) {
    return std::pow(2.0, e);
}

/// |A^perp> by brute force over F_2^n.
Amplitudes brute_dual_state(const Subspace &a) {
    size_t n = a.ambient_dim();
    Amplitudes v = Amplitudes::Zero(Eigen::Index(1) << n);
    size_t count = 0;
    for (uint64_t y = 0; y < (uint64_t{1} << n); y++) {
        bool orth = true;
        for (uint64_t b : a.basis_words()) {
            orth = orth && std::popcount(b & y) % 2 == 0;
        }
        if (orth) {
            v[Eigen::Index(y)] = 1;
            count++;
        }
    }
    return v / std::sqrt(double(count));
}

/// P[Bin(m, a) >= t] by a log-space term sum.
double tail_oracle(size_t m, double a, size_t t) {
    if (a >= 1) {
        return t <= m ? 1.0 : 0.0;
    }
    double sum = 0;
    for (size_t i = t; i <= m; i++) {
        double lg = std::lgamma(double(m) + 1) - std::lgamma(double(i) + 1) - std::lgamma(double(m - i) + 1);
        sum += std::exp(lg + double(i) * std::log(a) + double(m - i) * std::log1p(-a));
    }
    return sum;
}

std::vector<Criterion> criteria() {
    std::vector<Criterion> out;

    out.push_back({"completeness", 10, [](Outcome &o) {
                       size_t checked = 0;
                       double worst = 0;
                       for (size_t n : {4, 8, 12, 16}) {
                           for (size_t i = 0; i < 100; i++) {
                               auto inst = generator_G(n, child_seed(1000 + n, i));
                               o.require(inst.has_value(), "generator_G returned no instance");
                               if (!inst) {
                                   return;
                               }
                               double p = verify_vstar(*inst, BitVector::zero(n), honest_prove(*inst)).accept_probability;
                               worst = std::max(worst, std::abs(p - 1));
                               o.require(std::abs(p - 1) <= 1e-9, "n=" + std::to_string(n));
                               checked++;
                           }
                       }
                       o.detail << checked << " YES instances, max |p-1| = " << worst;
                   }});

    out.push_back({"soundness optimum", 60, [](Outcome &o) {
                       size_t checked = 0;
                       double worst = 0;
                       for (size_t n : {4, 8, 12}) {
                           for (auto kind : {InstanceKind::NoAB, InstanceKind::NoBA}) {
                               for (size_t i = 0; i < 50; i++) {
                                   auto inst = sample_no_instance(n, kind, child_seed(2000 + n, i + 100 * size_t(kind)));
                                   double p = max_cheat_probability(inst);
                                   double err = std::abs(p - pow2(-0.25 * double(n)));
                                   worst = std::max(worst, err);
                                   o.require(err <= 1e-9, "n=" + std::to_string(n) + " " + to_string(kind));
                                   checked++;
                               }
                           }
                       }
                       o.detail << checked << " NO instances, max |lambda - 2^(-n/4)| = " << worst;
                   }});

    out.push_back({"duality", 0, [](Outcome &o) {
                       Rng rng(3);
                       double worst = 0;
                       for (size_t i = 0; i < 1000; i++) {
                           size_t n = 1 + i % 12;
                           size_t d = uniform_below(rng, n + 1);
                           auto a = sample_subspace(n, d, rng);
                           Amplitudes h = hadamard_all(subspace_state(a)).amplitudes();
                           double err = (h - brute_dual_state(a)).norm();
                           worst = std::max(worst, err);
                           o.require(err <= 1e-9, "n=" + std::to_string(n) + " d=" + std::to_string(d));
                       }
                       o.detail << "1000 subspaces, n <= 12, max distance = " << worst;
                   }});

    out.push_back({"piracy harness", 0, [](Outcome &o) {
                       const auto &v = VerifierRegistry::global().get("vstar");
                       for (size_t n : {4, 8}) {
                           for (const auto &[name, expect] :
                                std::vector<std::pair<std::string, double>>{{"forward-and-pad", pow2(-0.5 * double(n))},
                                                                            {"measure-resend", pow2(-double(n))}}) {
                               auto pirate = pirate_by_name(name);
                               GameOptions ex;
                               ex.mode = GameOptions::Mode::Exact;
                               auto e = run_piracy_game(n, pirate, v, v, 10000, 42, ex);
                               o.require(std::abs(e.joint_accept - expect) <= 1e-9, name + " exact n=" + std::to_string(n));
                               GameOptions mc;
                               mc.mode = GameOptions::Mode::MonteCarlo;
                               auto m = run_piracy_game(n, pirate, v, v, 10000, 42, mc);
                               double sigma = std::sqrt(e.joint_accept * (1 - e.joint_accept) / 10000.0);
                               double z = sigma > 0 ? (m.joint_accept - e.joint_accept) / sigma : 0;
                               o.require(std::abs(m.joint_accept - e.joint_accept) <= 3 * sigma,
                                         name + " Monte Carlo n=" + std::to_string(n));
                               o.detail << name << " n=" << n << ": exact " << fmt12(e.joint_accept) << ", MC "
                                        << fmt12(m.joint_accept) << " (z=" << fmt12(z) << "); ";
                           }
                       }
                   }});

    out.push_back({"reduction chain", 0, [](Outcome &o) {
                       const auto &v = VerifierRegistry::global().get("vstar");
                       GameOptions ex;
                       ex.mode = GameOptions::Mode::Exact;
                       for (const auto &name : pirate_names()) {
                           auto c = reduction_chain(8, pirate_by_name(name), v, v, 10000, 42, ex);
                           o.require(c.holds(), name);
                           o.require(c.joint <= double(c.p1 * c.p2) * c.m_m + 1e-9, name + " end to end");
                           o.detail << name << ": " << fmt12(c.joint) << " <= " << c.p1 * c.p2 << " * " << fmt12(c.m_m) << "; ";
                       }
                   }});

    out.push_back({"counterfeit curves", 0, [](Outcome &o) {
                       auto curve = counterfeit_experiment(8, "measure-and-guess", {1, 2, 4, 8, 16}, 10000, 42);
                       for (const auto &p : curve.points) {
                           double expect = 1 - std::pow(1 - pow2(-4), double(p.budget));
                           o.require(p.ci.low <= expect && expect <= p.ci.high, "q=" + std::to_string(p.budget) + " outside CI");
                           o.require(p.below_reference(), "q=" + std::to_string(p.budget) + " above reference");
                           o.detail << "q=" << p.budget << ": " << fmt12(p.rate) << " in [" << fmt12(p.ci.low) << ", "
                                    << fmt12(p.ci.high) << "] vs " << fmt12(expect) << "; ";
                       }
                   }});

    out.push_back({"amplification", 0, [](Outcome &o) {
                       auto grid = amplification_grid();
                       size_t failures = 0;
                       double worst = 0;
                       for (const auto &pt : grid) {
                           double tail = tail_oracle(pt.copies, pt.c, pt.threshold);
                           worst = std::max(worst, std::abs(tail - pt.completeness));
                           bool ok = tail >= 1 - pow2(-double(pt.ell)) && std::abs(tail - pt.completeness) <= 1e-9;
                           failures += !ok;
                       }
                       o.require(!grid.empty(), "empty grid");
                       o.require(failures == 0, std::to_string(failures) + " grid points");
                       o.detail << grid.size() << " grid points, " << failures << " failures, max tail disagreement " << worst;
                   }});

    out.push_back({"product test", 0, [](Outcome &o) {
                       for (double c : {2.0 / 3, 0.9, 1.0}) {
                           auto t = product_test_collapse(projective_toy_verifier(2, 1, c, 0.25));
                           o.require(std::abs(t.report.measured_c - (1 + c) / 2) <= 1e-9, "c=" + fmt12(c));
                           o.detail << "c=" << fmt12(c) << ": " << fmt12(t.report.measured_c) << "; ";
                       }
                       Rng rng(8);
                       for (size_t q : {1, 2, 3}) {
                           Amplitudes psi = PureState::haar_random(q, rng).amplitudes();
                           Amplitudes chi = PureState::haar_random(q, rng).amplitudes();
                           chi -= psi * psi.dot(chi);
                           chi.normalize();
                           o.require(std::abs(swap_test_probability(psi, psi) - 1) <= 1e-12, "identical states");
                           o.require(std::abs(swap_test_probability(psi, chi) - 0.5) <= 1e-12, "orthogonal states");
                       }
                       o.detail << "swap test 1 / 0.5 on identical / orthogonal states";
                   }});

    out.push_back({"sequential repetition", 0, [](Outcome &o) {
                       size_t flagged = 0;
                       for (double c : {2.0 / 3, 0.9, 1.0}) {
                           for (size_t ell = 0; ell <= 4; ell++) {
                               auto v = projective_toy_verifier(2, 1, c, 0);
                               auto t = sequential_repeat(v, default_cloners(v), ell);
                               o.require(std::abs(t.report.measured_c - std::pow(c, double(ell + 1))) <= 1e-9,
                                         "c=" + fmt12(c) + " l=" + std::to_string(ell));
                               o.require(t.report.pass(), "stage bound c=" + fmt12(c) + " l=" + std::to_string(ell));
                               flagged += !t.report.flags.empty();
                           }
                       }
                       o.detail << "15 verifiers, c^(l+1) within 1e-9, " << flagged << " flagged against c^l";
                   }});

    out.push_back({"useful bound", 0, [](Outcome &o) {
                       size_t fails = 0, flagged = 0;
                       for (size_t n : {2, 3, 4}) {
                           Rng rng(100 + n);
                           for (size_t i = 0; i < 1000; i++) {
                               auto m = random_psd_contraction(n * n, rng);
                               ProductMaxOptions opt;
                               opt.restarts = 4;
                               opt.seed = child_seed(n, i);
                               auto pm = product_max(m, {n, n}, opt);
                               auto r = check_useful_bound(m, n, pm.value, pm.gap_estimate);
                               fails += r.status == BoundStatus::Fail;
                               flagged += r.status == BoundStatus::Flagged;
                           }
                           auto phi = maximally_entangled_projector(n);
                           auto pm = product_max(phi, {n, n});
                           auto r = check_useful_bound(phi, n, pm.value);
                           o.require(std::abs(r.lambda_max - 1) <= 1e-9, "Phi+ lambda n=" + std::to_string(n));
                           o.require(std::abs(pm.value - 1.0 / double(n)) <= 1e-9, "Phi+ alpha n=" + std::to_string(n));
                           o.require(r.status == BoundStatus::Pass, "Phi+ bound n=" + std::to_string(n));
                       }
                       o.require(fails == 0, std::to_string(fails) + " random violations");
                       o.detail << "3000 random contractions: " << fails << " fail, " << flagged
                                << " flagged; Phi+ gives lambda = 1, alpha = 1/n";
                   }});

    out.push_back({"theorem pipeline k=2 p=1", 120, [](Outcome &o) {
                       auto v = toy_preset("projective", 2, 1);
                       auto rep = compose_theorem_pipeline(v, default_cloners(v));
                       o.require(rep.stages.size() == 4, "stage count");
                       for (const auto &s : rep.stages) {
                           o.require(s.pass(), s.stage);
                           o.detail << s.stage << (s.pass() ? " ok" : " FAILED") << "; ";
                       }
                       o.detail << "final c = " << fmt12(rep.final_verifier.params.c);
                   }});

    out.push_back({"np candidate", 0, [](Outcome &o) {
                       auto authority = std::make_shared<const SetupAuthority>(uint64_t{12});
                       for (size_t n : {4, 8, 12}) {
                           for (const std::string x : {"0110", "000000", "1111"}) {
                               auto proof = candidate_prove(x, "", NpRelation::parity(), n, child_seed(n, x.size()), *authority);
                               auto rep = candidate_verify(x, proof, *authority);
                               o.require(rep.transcript_ok && std::abs(rep.result.accept_probability - 1) <= 1e-9,
                                         "honest n=" + std::to_string(n));
                               proof.state = PureState::basis(n, 0);
                               double z = candidate_verify(x, proof, *authority).result.accept_probability;
                               o.require(std::abs(z - pow2(-0.5 * double(n))) <= 1e-9, "zero state n=" + std::to_string(n));
                           }
                       }
                       register_candidate_verifier(authority);
                       const auto &v = VerifierRegistry::global().get("npcand");
                       GameOptions opt;
                       opt.mode = GameOptions::Mode::Exact;
                       opt.exact_instances = 8;
                       opt.source = candidate_instance_source(authority);
                       for (const auto &name : pirate_names()) {
                           auto g = run_piracy_game(8, pirate_by_name(name), v, v, 8, 5, opt);
                           o.detail << name << " " << fmt12(g.joint_accept) << "; ";
                           if (name == "forward-and-pad") {
                               o.require(std::abs(g.joint_accept - 1.0 / 16) <= 1e-9, "forward-and-pad against npcand");
                           }
                           if (name == "second-copy") {
                               o.require(std::abs(g.joint_accept - 1) <= 1e-9, "second-copy against npcand");
                           }
                       }
                   }});
    return out;
}

}  // namespace

int main() {
    int failed = 0;
    for (const auto &c : criteria()) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception &e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0) {
            o.require(dt < c.time_limit_s, "runtime above " + fmt12(c.time_limit_s) + " s");
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << " (" << std::fixed << std::setprecision(2) << dt
                  << " s): " << std::defaultfloat << o.detail.str() << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " of " << criteria().size() << " criteria failed" << std::endl;
    return std::min(failed, 125);
}
