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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sublab {

GameInstance vstar_game_instance(size_t n, uint64_t seed) {
    auto inst = generator_G(n, seed);
    if (!inst) {
        throw std::invalid_argument("vstar_game_instance: generator outputs bottom for n=" + std::to_string(n));
    }
    return GameInstance{n, inst->oracles(), ClassicalPart{{"x", BitVector::zero(n).str()}}, honest_prove(*inst)};
}

namespace {

Amplitudes basis_amps(size_t n, uint64_t x) {
    Amplitudes v = Amplitudes::Zero(static_cast<Eigen::Index>(uint64_t{1} << n));
    v[static_cast<Eigen::Index>(x)] = 1;
    return v;
}

void check_state(const Amplitudes &v, size_t qubits) {
    if (static_cast<uint64_t>(v.size()) != (uint64_t{1} << qubits)) {
        throw DimensionMismatch("pirate output register has wrong size");
    }
    if (std::abs(v.squaredNorm() - 1) > 1e-9) {
        throw std::invalid_argument("pirate output register is not normalized");
    }
}

uint64_t measure_basis(const Amplitudes &v, Rng &rng) {
    double u = uniform01(rng) * v.squaredNorm();
    for (Eigen::Index i = 0; i < v.size(); i++) {
        u -= std::norm(v[i]);
        if (u < 0) {
            return static_cast<uint64_t>(i);
        }
    }
    // Rounding left a sliver; return the last supported outcome.
    for (Eigen::Index i = v.size() - 1; i >= 0; i--) {
        if (std::norm(v[i]) > 0) {
            return static_cast<uint64_t>(i);
        }
    }
    return 0;
}

}  // namespace

void PirateOutput::validate(size_t n) const {
    double total = 0;
    for (const auto &b : branches) {
        if (b.weight < 0) {
            throw std::invalid_argument("pirate output has a negative weight");
        }
        total += b.weight;
        if (const auto *p = std::get_if<ProductBranch>(&b.state)) {
            check_state(p->first, n);
            check_state(p->second, n);
        } else {
            check_state(std::get<JointBranch>(b.state).joint, 2 * n);
        }
    }
    if (std::abs(total - 1) > 1e-9) {
        throw std::invalid_argument("pirate output weights sum to " + fmt12(total));
    }
}

PirateStrategy PirateStrategy::forward_and_pad() {
    return {"forward-and-pad", false, 0, [](PirateInput &in) {
                PirateOutput out;
                out.branches.push_back({1.0, ProductBranch{in.proof.amplitudes(), basis_amps(in.n, 0)}});
                return out;
            }};
}

PirateStrategy PirateStrategy::measure_resend() {
    return {"measure-resend", false, 0, [](PirateInput &in) {
                PirateOutput out;
                const Amplitudes &psi = in.proof.amplitudes();
                double total = 0;
                for (Eigen::Index x = 0; x < psi.size(); x++) {
                    double w = std::norm(psi[x]);
                    if (w > 0) {
                        total += w;
                        auto e = basis_amps(in.n, static_cast<uint64_t>(x));
                        out.branches.push_back({w, ProductBranch{e, e}});
                    }
                }
                for (auto &b : out.branches) {
                    b.weight /= total;
                }
                return out;
            }};
}

PirateStrategy PirateStrategy::cnot_copy() {
    return {"cnot-copy", false, 0, [](PirateInput &in) {
                if (2 * in.n > caps().joint_qubits) {
                    throw CapExceeded("cnot-copy: 2n exceeds the joint cap");
                }
                const Amplitudes &psi = in.proof.amplitudes();
                Amplitudes joint = Amplitudes::Zero(static_cast<Eigen::Index>(uint64_t{1} << (2 * in.n)));
                for (Eigen::Index x = 0; x < psi.size(); x++) {
                    joint[x + (x << in.n)] = psi[x];
                }
                PirateOutput out;
                out.branches.push_back({1.0, JointBranch{std::move(joint)}});
                return out;
            }};
}

PirateStrategy PirateStrategy::oracle_sample() {
    return {"oracle-sample", false, 1, [](PirateInput &in) {
                size_t n = in.n;
                Amplitudes plus = Amplitudes::Constant(
                    static_cast<Eigen::Index>(uint64_t{1} << (n + 1)), 0);
                double amp = std::pow(2.0, -0.5 * static_cast<double>(n));
                for (uint64_t x = 0; x < (uint64_t{1} << n); x++) {
                    plus[static_cast<Eigen::Index>(x)] = amp;
                }
                uint64_t flag = uint64_t{1} << n;
                double miss = 1;
                Amplitudes hit;
                for (size_t i = 0; i < in.budget; i++) {
                    Amplitudes v = plus;
                    in.first.apply_in_place(v, 0, n);
                    Amplitudes h = Amplitudes::Zero(static_cast<Eigen::Index>(flag));
                    for (uint64_t x = 0; x < flag; x++) {
                        h[static_cast<Eigen::Index>(x)] = v[static_cast<Eigen::Index>(x | flag)];
                    }
                    double p = h.squaredNorm();
                    if (p > 0) {
                        hit = h / std::sqrt(p);
                    }
                    miss *= 1 - p;
                }
                PirateOutput out;
                if (miss < 1) {
                    out.branches.push_back({1 - miss, ProductBranch{in.proof.amplitudes(), hit}});
                }
                if (miss > 0) {
                    out.branches.push_back({miss, ProductBranch{in.proof.amplitudes(), basis_amps(n, 0)}});
                }
                return out;
            }};
}

PirateStrategy PirateStrategy::second_copy_baseline() {
    return {"second-copy", true, 0, [](PirateInput &in) {
                PirateOutput out;
                out.branches.push_back({1.0, ProductBranch{in.proof.amplitudes(), in.proof.amplitudes()}});
                return out;
            }};
}

PirateStrategy pirate_by_name(const std::string &name) {
    if (name == "forward-and-pad") {
        return PirateStrategy::forward_and_pad();
    }
    if (name == "measure-resend") {
        return PirateStrategy::measure_resend();
    }
    if (name == "cnot-copy") {
        return PirateStrategy::cnot_copy();
    }
    if (name == "oracle-sample") {
        return PirateStrategy::oracle_sample();
    }
    if (name == "second-copy") {
        return PirateStrategy::second_copy_baseline();
    }
    throw std::invalid_argument("unknown pirate '" + name + "'");
}

std::vector<std::string> pirate_names() {
    return {"forward-and-pad", "measure-resend", "cnot-copy", "oracle-sample", "second-copy"};
}

PirateRun run_pirate(const PirateStrategy &pirate, const GameInstance &inst, size_t budget, uint64_t seed) {
    auto a = inst.oracles.first;
    auto b = inst.oracles.second;
    MembershipOracle first("A", inst.n, [a](uint64_t x) { return a->contains(x); });
    MembershipOracle second("B", inst.n, [b](uint64_t x) { return b->contains(x); });
    for (auto *o : {&first, &second}) {
        o->record_inputs(true);
        o->set_budget(budget);
    }
    PirateInput in{inst.n, inst.classical, inst.proof, first, second, budget, seed};
    PirateRun run;
    run.output = pirate.program(in);
    run.output.validate(inst.n);
    run.queries = first.query_count() + second.query_count();
    if (run.queries > budget) {
        throw std::runtime_error(
            "pirate " + pirate.name + " made " + std::to_string(run.queries) + " queries, budget " +
            std::to_string(budget));
    }
    for (const auto *o : {&first, &second}) {
        for (const auto &r : o->log().records()) {
            run.log.append(r);
        }
    }
    return run;
}

double ensemble_probability(const PirateOutput &out, const RegisterEffect &e1, const RegisterEffect &e2) {
    double total = 0;
    for (const auto &b : out.branches) {
        if (b.weight == 0) {
            continue;
        }
        if (const auto *p = std::get_if<ProductBranch>(&b.state)) {
            double p1 = e1.probability(p->first);
            total += p1 == 0 ? 0 : b.weight * p1 * e2.probability(p->second);
        } else {
            total += b.weight * joint_probability(e1, e2, std::get<JointBranch>(b.state).joint);
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

size_t sample_branch(const PirateOutput &out, Rng &rng) {
    double u = uniform01(rng);
    for (size_t i = 0; i < out.branches.size(); i++) {
        u -= out.branches[i].weight;
        if (u < 0) {
            return i;
        }
    }
    return out.branches.size() - 1;
}

namespace {

bool sample_pair(
    const PirateOutput &out, const RegisterEffect &e1, const RegisterEffect &e2, size_t n, Rng &rng) {
    const auto &branch = out.branches[sample_branch(out, rng)];
    if (const auto *p = std::get_if<ProductBranch>(&branch.state)) {
        Amplitudes first = p->first;
        if (!sample_effect(e1, first, 0, rng)) {
            return false;
        }
        Amplitudes second = p->second;
        return sample_effect(e2, second, 0, rng);
    }
    Amplitudes joint = std::get<JointBranch>(branch.state).joint;
    if (!sample_effect(e1, joint, 0, rng)) {
        return false;
    }
    return sample_effect(e2, joint, n, rng);
}

struct Trial {
    GameInstance inst;
    PirateRun run;
};

Trial make_trial(
    size_t n, const PirateStrategy &pirate, size_t budget, uint64_t seed, size_t index, const GameOptions &opt) {
    GameInstance inst = opt.source(n, child_seed(seed, 2 * index));
    PirateRun run = run_pirate(pirate, inst, budget, child_seed(seed, 2 * index + 1));
    return {std::move(inst), std::move(run)};
}

bool use_exact(size_t n, const GameOptions &opt) {
    switch (opt.mode) {
        case GameOptions::Mode::Exact:
            if (2 * n > caps().joint_qubits) {
                throw CapExceeded("exact piracy game: 2n exceeds the joint cap");
            }
            return true;
        case GameOptions::Mode::MonteCarlo:
            return false;
        case GameOptions::Mode::Auto:
            return 2 * n <= caps().joint_qubits;
    }
    return false;
}

Interval mean_interval(const std::vector<double> &values, double mean) {
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi - *lo <= 1e-12) {
        return {mean, mean};
    }
    double var = 0;
    for (double v : values) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(values.size() - 1);
    double half = 1.959963984540054 * std::sqrt(var / static_cast<double>(values.size()));
    return {std::max(0.0, mean - half), std::min(1.0, mean + half)};
}

double mean_of(const std::vector<double> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

GameOutcome run_piracy_game(
    size_t n,
    const PirateStrategy &pirate,
    const VerifierProgram &v1,
    const VerifierProgram &v2,
    size_t trials,
    uint64_t seed,
    const GameOptions &options) {
    if (trials == 0) {
        throw std::invalid_argument("run_piracy_game: zero trials");
    }
    size_t budget = options.budget.value_or(pirate.default_budget);
    GameOutcome g;
    g.n = n;
    g.pirate = pirate.name;
    g.v1 = v1.name;
    g.v2 = v2.name;
    g.trials = trials;
    g.illegal = pirate.illegal;
    g.exact = use_exact(n, options);
    if (g.exact) {
        size_t m = std::min(trials, std::max<size_t>(1, options.exact_instances));
        std::vector<double> values(m);
        std::vector<size_t> queries(m);
        parallel_for(m, options.jobs, [&](size_t i) {
            Trial t = make_trial(n, pirate, budget, seed, i, options);
            auto e1 = accept_effect(v1, t.inst.oracles, t.inst.classical);
            auto e2 = accept_effect(v2, t.inst.oracles, t.inst.classical);
            values[i] = ensemble_probability(t.run.output, e1, e2);
            queries[i] = t.run.queries;
        });
        g.instances = m;
        g.joint_accept = mean_of(values);
        auto ci = mean_interval(values, g.joint_accept);
        g.ci_low = ci.low;
        g.ci_high = ci.high;
        g.queries = *std::max_element(queries.begin(), queries.end());
        return g;
    }
    std::vector<char> accepted(trials);
    std::vector<size_t> queries(trials);
    parallel_for(trials, options.jobs, [&](size_t i) {
        Trial t = make_trial(n, pirate, budget, seed, i, options);
        auto e1 = accept_effect(v1, t.inst.oracles, t.inst.classical);
        auto e2 = accept_effect(v2, t.inst.oracles, t.inst.classical);
        Rng rng(child_seed(seed ^ 0xA5A5A5A5A5A5A5A5ULL, i));
        accepted[i] = sample_pair(t.run.output, e1, e2, n, rng) ? 1 : 0;
        queries[i] = t.run.queries;
    });
    size_t hits = static_cast<size_t>(std::count(accepted.begin(), accepted.end(), 1));
    g.instances = trials;
    g.joint_accept = static_cast<double>(hits) / static_cast<double>(trials);
    auto ci = wilson_interval(hits, trials);
    g.ci_low = std::min(ci.low, g.joint_accept);
    g.ci_high = std::max(ci.high, g.joint_accept);
    g.queries = *std::max_element(queries.begin(), queries.end());
    return g;
}

PovmSample query_povm_measure(const QueryLog &log, const std::function<bool(uint64_t)> &target, Rng &rng) {
    PovmSample s;
    if (log.size() == 0) {
        return s;
    }
    size_t q = static_cast<size_t>(uniform_below(rng, log.size()));
    s.query = q;
    const auto &rec = log.records()[q];
    if (!rec.input_distribution) {
        throw std::invalid_argument("query_povm_measure: query record carries no input distribution");
    }
    const Eigen::VectorXd &dist = *rec.input_distribution;
    double total = dist.sum();
    if (total <= 0) {
        return s;
    }
    double u = uniform01(rng) * total;
    uint64_t x = static_cast<uint64_t>(dist.size() - 1);
    for (Eigen::Index i = 0; i < dist.size(); i++) {
        u -= dist[i];
        if (u < 0) {
            x = static_cast<uint64_t>(i);
            break;
        }
    }
    s.vector = x;
    s.accept = target(x);
    return s;
}

double query_povm_probability(const QueryLog &log, const std::function<bool(uint64_t)> &target) {
    if (log.size() == 0) {
        return 0;
    }
    double acc = 0;
    for (const auto &rec : log.records()) {
        if (!rec.input_distribution) {
            throw std::invalid_argument("query_povm_probability: query record carries no input distribution");
        }
        const Eigen::VectorXd &dist = *rec.input_distribution;
        double total = dist.sum();
        if (total <= 0) {
            continue;
        }
        double in = 0;
        for (Eigen::Index i = 0; i < dist.size(); i++) {
            if (target(static_cast<uint64_t>(i))) {
                in += dist[i];
            }
        }
        acc += in / total;
    }
    return acc / static_cast<double>(log.size());
}

ChainReport reduction_chain(
    size_t n,
    const PirateStrategy &pirate,
    const VerifierProgram &v1,
    const VerifierProgram &v2,
    size_t trials,
    uint64_t seed,
    const GameOptions &options) {
    if (trials == 0) {
        throw std::invalid_argument("reduction_chain: zero trials");
    }
    size_t budget = options.budget.value_or(pirate.default_budget);
    ChainReport r;
    r.n = n;
    r.pirate = pirate.name;
    r.illegal = pirate.illegal;
    r.p1 = v1.query_count();
    r.p2 = v2.query_count();
    r.exact = use_exact(n, options);
    double p1 = static_cast<double>(r.p1);
    double p2 = static_cast<double>(r.p2);
    if (r.exact) {
        size_t m = std::min(trials, std::max<size_t>(1, options.exact_instances));
        std::vector<double> joint(m), mv(m), mm(m);
        std::vector<char> first(m), second(m);
        parallel_for(m, options.jobs, [&](size_t i) {
            Trial t = make_trial(n, pirate, budget, seed, i, options);
            const auto &o = t.inst.oracles;
            const auto &c = t.inst.classical;
            auto a1 = accept_effect(v1, o, c);
            auto a2 = accept_effect(v2, o, c);
            auto m1 = query_effect(v1, o, c);
            auto m2 = query_effect(v2, o, c);
            joint[i] = ensemble_probability(t.run.output, a1, a2);
            mv[i] = ensemble_probability(t.run.output, m1, a2);
            mm[i] = ensemble_probability(t.run.output, m1, m2);
            first[i] = joint[i] <= p1 * mv[i] + 1e-9;
            second[i] = mv[i] <= p2 * mm[i] + 1e-9;
        });
        r.trials = m;
        r.joint = mean_of(joint);
        r.m_v = mean_of(mv);
        r.m_m = mean_of(mm);
        r.joint_ci = mean_interval(joint, r.joint);
        r.m_v_ci = mean_interval(mv, r.m_v);
        r.m_m_ci = mean_interval(mm, r.m_m);
        r.first_holds = std::all_of(first.begin(), first.end(), [](char b) { return b != 0; });
        r.second_holds = std::all_of(second.begin(), second.end(), [](char b) { return b != 0; });
        return r;
    }
    std::vector<char> joint(trials), mv(trials), mm(trials);
    parallel_for(trials, options.jobs, [&](size_t i) {
        Trial t = make_trial(n, pirate, budget, seed, i, options);
        const auto &o = t.inst.oracles;
        const auto &c = t.inst.classical;
        auto a1 = accept_effect(v1, o, c);
        auto a2 = accept_effect(v2, o, c);
        auto m1 = query_effect(v1, o, c);
        auto m2 = query_effect(v2, o, c);
        Rng rng(child_seed(seed ^ 0x5A5A5A5A5A5A5A5AULL, i));
        joint[i] = sample_pair(t.run.output, a1, a2, n, rng);
        mv[i] = sample_pair(t.run.output, m1, a2, n, rng);
        mm[i] = sample_pair(t.run.output, m1, m2, n, rng);
    });
    auto count = [](const std::vector<char> &v) { return static_cast<size_t>(std::count(v.begin(), v.end(), 1)); };
    double tn = static_cast<double>(trials);
    r.trials = trials;
    r.joint = static_cast<double>(count(joint)) / tn;
    r.m_v = static_cast<double>(count(mv)) / tn;
    r.m_m = static_cast<double>(count(mm)) / tn;
    r.joint_ci = wilson_interval(count(joint), trials);
    r.m_v_ci = wilson_interval(count(mv), trials);
    r.m_m_ci = wilson_interval(count(mm), trials);
    r.first_holds = r.joint_ci.low <= p1 * r.m_v_ci.high;
    r.second_holds = r.m_v_ci.low <= p2 * r.m_m_ci.high;
    return r;
}

std::vector<std::string> counterfeit_attacks() {
    return {"measure-and-guess", "grover", "both-copies"};
}

namespace {

size_t grover_iterations(size_t n, size_t budget) {
    double theta = std::asin(std::pow(2.0, -0.25 * static_cast<double>(n)));
    size_t best = 0;
    double best_p = -1;
    for (size_t k = 0; k <= budget; k++) {
        double p = std::pow(std::sin((2.0 * static_cast<double>(k) + 1) * theta), 2);
        if (p > best_p + 1e-15) {
            best_p = p;
            best = k;
        }
    }
    return best;
}

uint64_t grover_sample(size_t n, MembershipOracle &oracle, size_t iterations, Rng &rng) {
    uint64_t dim = uint64_t{1} << n;
    Amplitudes v = Amplitudes::Zero(static_cast<Eigen::Index>(2 * dim));
    double amp = std::pow(2.0, -0.5 * static_cast<double>(n + 1));
    for (uint64_t x = 0; x < dim; x++) {
        v[static_cast<Eigen::Index>(x)] = amp;
        v[static_cast<Eigen::Index>(x | dim)] = -amp;
    }
    for (size_t k = 0; k < iterations; k++) {
        oracle.apply_in_place(v, 0, n);
        apply_hadamard(v, 0, n);
        for (uint64_t x = 1; x < dim; x++) {
            v[static_cast<Eigen::Index>(x)] = -v[static_cast<Eigen::Index>(x)];
            v[static_cast<Eigen::Index>(x | dim)] = -v[static_cast<Eigen::Index>(x | dim)];
        }
        apply_hadamard(v, 0, n);
    }
    return measure_basis(v, rng) & (dim - 1);
}

}  // namespace

std::optional<double> counterfeit_closed_form(size_t n, const std::string &attack, size_t budget) {
    double x = std::pow(2.0, -0.5 * static_cast<double>(n));
    if (attack == "measure-and-guess") {
        return 1 - std::pow(1 - x, static_cast<double>(std::max<size_t>(budget, 1)));
    }
    if (attack == "grover") {
        double theta = std::asin(std::pow(2.0, -0.25 * static_cast<double>(n)));
        double k = static_cast<double>(grover_iterations(n, budget));
        return std::pow(std::sin((2 * k + 1) * theta), 2);
    }
    if (attack == "both-copies") {
        return 1.0;
    }
    return std::nullopt;
}

double counterfeit_reference(size_t n, size_t budget) {
    double q = static_cast<double>(budget);
    return std::min(1.0, (2 * q + 1) * (2 * q + 1) * std::pow(2.0, -0.5 * static_cast<double>(n)));
}

CounterfeitCurve counterfeit_experiment(
    size_t n,
    const std::string &attack,
    const std::vector<size_t> &budgets,
    size_t trials,
    uint64_t seed,
    size_t jobs) {
    const auto names = counterfeit_attacks();
    if (std::find(names.begin(), names.end(), attack) == names.end()) {
        throw std::invalid_argument("unknown counterfeit attack '" + attack + "'");
    }
    if (n == 0 || n % 2 != 0 || n > 16) {
        throw std::invalid_argument("counterfeit_experiment: n must be even and at most 16");
    }
    if (trials == 0) {
        throw std::invalid_argument("counterfeit_experiment: zero trials");
    }
    CounterfeitCurve curve;
    curve.n = n;
    curve.attack = attack;
    curve.illegal = attack == "both-copies";
    for (size_t bi = 0; bi < budgets.size(); bi++) {
        size_t q = budgets[bi];
        uint64_t stream = child_seed(seed, bi);
        std::vector<char> ok(trials);
        parallel_for(trials, jobs, [&](size_t t) {
            Rng rng(child_seed(stream, t));
            Subspace a = sample_subspace(n, n / 2, rng);
            Subspace b = a.dual();
            uint64_t x = measure_basis(subspace_state(a).amplitudes(), rng);
            uint64_t y = 0;
            MembershipOracle dual_oracle("dual", b);
            dual_oracle.set_budget(q);
            if (attack == "measure-and-guess") {
                uint64_t dim = uint64_t{1} << n;
                y = uniform_below(rng, dim);
                for (size_t i = 0; i < q; i++) {
                    if (dual_oracle.query_classical(y)) {
                        break;
                    }
                    if (i + 1 < q) {
                        y = uniform_below(rng, dim);
                    }
                }
            } else if (attack == "grover") {
                y = grover_sample(n, dual_oracle, grover_iterations(n, q), rng);
            } else {
                y = measure_basis(subspace_state(b).amplitudes(), rng);
            }
            ok[t] = a.contains(x) && b.contains(y);
        });
        CounterfeitPoint pt;
        pt.budget = q;
        pt.trials = trials;
        pt.successes = static_cast<size_t>(std::count(ok.begin(), ok.end(), 1));
        pt.rate = static_cast<double>(pt.successes) / static_cast<double>(trials);
        pt.ci = wilson_interval(pt.successes, trials);
        pt.expected = counterfeit_closed_form(n, attack, q);
        pt.reference = counterfeit_reference(n, q);
        curve.points.push_back(pt);
    }
    return curve;
}

void write_game_csv_header(std::ostream &out) {
    out << "n,pirate,v1,v2,trials,joint_accept,ci_low,ci_high,queries,exact,illegal\n";
}

void write_game_csv_row(std::ostream &out, const GameOutcome &g) {
    out << g.n << ',' << g.pirate << ',' << g.v1 << ',' << g.v2 << ',' << g.trials << ',' << fmt12(g.joint_accept)
        << ',' << fmt12(g.ci_low) << ',' << fmt12(g.ci_high) << ',' << g.queries << ',' << (g.exact ? 1 : 0) << ','
        << (g.illegal ? 1 : 0) << '\n';
}

}  // namespace sublab
