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

namespace sublab {

std::string to_string(InstanceKind k) {
    switch (k) {
        case InstanceKind::Yes:
            return "YES";
        case InstanceKind::NoAB:
            return "NO_AB";
        case InstanceKind::NoBA:
            return "NO_BA";
    }
    return "?";
}

InstanceKind instance_kind_from_string(const std::string &s) {
    if (s == "YES") {
        return InstanceKind::Yes;
    }
    if (s == "NO_AB") {
        return InstanceKind::NoAB;
    }
    if (s == "NO_BA") {
        return InstanceKind::NoBA;
    }
    throw std::invalid_argument("unknown instance kind '" + s + "'");
}

namespace {

std::pair<size_t, size_t> dims_for(size_t n, InstanceKind k) {
    switch (k) {
        case InstanceKind::Yes:
            return {n / 2, n / 2};
        case InstanceKind::NoAB:
            return {n / 2, n / 4};
        case InstanceKind::NoBA:
            return {n / 4, n / 2};
    }
    throw std::logic_error("dims_for");
}

void require_well_formed_n(size_t n) {
    if (n == 0 || n % 4 != 0) {
        throw std::invalid_argument("instance length n=" + std::to_string(n) + " is not a positive multiple of 4");
    }
}

}  // namespace

void Instance::validate() const {
    require_well_formed_n(n);
    if (a.ambient_dim() != n || b.ambient_dim() != n) {
        throw DimensionMismatch("Instance: subspaces not in F_2^n");
    }
    auto [da, db] = dims_for(n, kind);
    if (a.dim() != da || b.dim() != db) {
        throw std::invalid_argument("Instance: dimensions do not match kind " + to_string(kind));
    }
    if (!a.dual().contains(b)) {
        throw std::invalid_argument("Instance: B is not contained in dual(A)");
    }
}

nlohmann::json Instance::to_json() const {
    return {{"n", n}, {"kind", to_string(kind)}, {"A", a.to_json()}, {"B", b.to_json()}};
}

Instance Instance::from_json(const nlohmann::json &j) {
    Instance inst{
        j.at("n").get<size_t>(),
        Subspace::from_json(j.at("A")),
        Subspace::from_json(j.at("B")),
        instance_kind_from_string(j.at("kind").get<std::string>())};
    inst.validate();
    return inst;
}

std::optional<Instance> generator_G(size_t n, uint64_t seed) {
    if (n == 0 || n % 4 != 0) {
        return std::nullopt;
    }
    Subspace a = sample_subspace(n, n / 2, seed);
    Subspace b = a.dual();
    return Instance{n, std::move(a), std::move(b), InstanceKind::Yes};
}

Instance sample_no_instance(size_t n, InstanceKind kind, uint64_t seed) {
    require_well_formed_n(n);
    if (kind == InstanceKind::Yes) {
        throw std::invalid_argument("sample_no_instance: kind must be NO_AB or NO_BA");
    }
    auto [da, db] = dims_for(n, kind);
    Rng rng(seed);
    Subspace a = sample_subspace(n, da, rng);
    Subspace b = sample_subspace_within(a.dual(), db, rng);
    Instance inst{n, std::move(a), std::move(b), kind};
    inst.validate();
    return inst;
}

PureState honest_prove(const Instance &inst) {
    if (inst.kind != InstanceKind::Yes) {
        throw std::invalid_argument("honest_prove: instance is not a YES instance");
    }
    return subspace_state(inst.a);
}

VerifierReport verify_vstar(const Instance &inst, const BitVector &x, const PureState &proof) {
    if (x.size() != inst.n || proof.num_qubits() != inst.n) {
        throw DimensionMismatch("verify_vstar: input or proof length differs from n");
    }
    if (inst.n % 4 != 0) {
        return {0.0, 1, 0};
    }
    if (!x.is_zero()) {
        return {0.0, 1, 0};
    }
    Amplitudes v = proof.amplitudes();
    apply_projector(v, 0, inst.n, inst.a);
    if (v.squaredNorm() == 0) {
        return {0.0, 2, 2};
    }
    apply_hadamard(v, 0, inst.n);
    apply_projector(v, 0, inst.n, inst.b);
    double p = std::min(1.0, v.squaredNorm());
    if (p == 0) {
        return {0.0, 4, 2};
    }
    return {p, std::nullopt, 2};
}

size_t sample_vstar(const Instance &inst, const BitVector &x, const PureState &proof, size_t shots, Rng &rng) {
    auto prog = VerifierProgram::vstar();
    auto oracles = inst.oracles();
    ClassicalPart classical = {{"x", x.str()}};
    size_t accepted = 0;
    for (size_t s = 0; s < shots; s++) {
        Amplitudes v = proof.amplitudes();
        accepted += sample_run(prog, oracles, classical, v, 0, rng) ? 1 : 0;
    }
    return accepted;
}

double max_cheat_probability(const Instance &inst) {
    if (inst.n > caps().statevector_qubits) {
        throw CapExceeded("max_cheat_probability: n exceeds statevector cap");
    }
    auto table_a = std::make_shared<MembershipTable>(inst.a);
    auto table_b = std::make_shared<MembershipTable>(inst.b);
    size_t n = inst.n;
    auto proj = [n](Amplitudes &v, const MembershipTable &t) {
        for (Eigen::Index i = 0; i < v.size(); i++) {
            if (!t.contains(static_cast<uint64_t>(i))) {
                v[i] = 0;
            }
        }
    };
    LinearOperator op{size_t{1} << n, [&](const Amplitudes &in, Amplitudes &out) {
                          out = in;
                          proj(out, *table_a);
                          apply_hadamard(out, 0, n);
                          proj(out, *table_b);
                          apply_hadamard(out, 0, n);
                          proj(out, *table_a);
                      }};
    return lambda_max(op).value;
}

AcceptOperator vstar_accept_operator(const Instance &inst) {
    size_t d = size_t{1} << inst.n;
    if (d > caps().dense_dim) {
        throw CapExceeded("vstar_accept_operator: dimension exceeds dense cap");
    }
    auto prog = VerifierProgram::vstar();
    auto oracles = inst.oracles();
    // Columns of K = Pi_B H Pi_A, then M = K^dagger K.
    Eigen::MatrixXcd k(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (size_t c = 0; c < d; c++) {
        Amplitudes e = Amplitudes::Zero(static_cast<Eigen::Index>(d));
        e[static_cast<Eigen::Index>(c)] = 1;
        apply_accept_kraus(prog, oracles, e, 0);
        k.col(static_cast<Eigen::Index>(c)) = e;
    }
    Eigen::MatrixXcd m = k.adjoint() * k;
    m = 0.5 * (m + m.adjoint());
    return AcceptOperator::trusted(std::move(m));
}

void write_probability_csv_header(std::ostream &out) {
    out << "instance_id,kind,probability\n";
}

void write_probability_csv_row(std::ostream &out, const std::string &instance_id, InstanceKind kind, double p) {
    out << instance_id << ',' << to_string(kind) << ',' << fmt12(p) << '\n';
}

}  // namespace sublab
