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

#include "sublab/verifier_program.h"

#include <algorithm>
#include <cmath>

namespace sublab {

MembershipTable::MembershipTable(const Subspace &s)
    : MembershipTable(s.ambient_dim(), [&s](uint64_t x) { return s.contains(x); }) {
}

MembershipTable::MembershipTable(size_t n, const std::function<bool(uint64_t)> &predicate) : n_(n) {
    if (n > caps().statevector_qubits) {
        throw CapExceeded("MembershipTable: register exceeds statevector cap");
    }
    table_.resize(size_t{1} << n);
    for (uint64_t x = 0; x < table_.size(); x++) {
        table_[x] = predicate(x) ? 1 : 0;
    }
}

OraclePair OraclePair::of(const Subspace &a, const Subspace &b) {
    if (a.ambient_dim() != b.ambient_dim()) {
        throw DimensionMismatch("OraclePair: subspaces in different ambient spaces");
    }
    return {std::make_shared<const MembershipTable>(a), std::make_shared<const MembershipTable>(b)};
}

size_t VerifierProgram::query_count() const {
    size_t q = 0;
    for (const auto &s : steps) {
        if (s.kind == VerifierStep::Kind::Check) {
            q += 1;
        } else if (s.kind == VerifierStep::Kind::DummyQuery) {
            q += 2;
        }
    }
    return q;
}

namespace {

using K = VerifierStep::Kind;

bool x_is_zero(const ClassicalPart &c) {
    if (!c.is_object() || !c.contains("x")) {
        return false;
    }
    const auto &x = c.at("x");
    if (!x.is_string()) {
        return false;
    }
    const auto &s = x.get_ref<const std::string &>();
    return std::all_of(s.begin(), s.end(), [](char ch) { return ch == '0'; });
}

const MembershipTable &table_for(const OraclePair &o, Slot s) {
    return s == Slot::First ? *o.first : *o.second;
}

void project(Amplitudes &amps, size_t offset, const MembershipTable &t) {
    uint64_t mask = low_mask(t.n());
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        if (!t.contains((static_cast<uint64_t>(i) >> offset) & mask)) {
            amps[i] = 0;
        }
    }
}

double mass_in(const Amplitudes &amps, size_t offset, const MembershipTable &t) {
    uint64_t mask = low_mask(t.n());
    double m = 0;
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        if (t.contains((static_cast<uint64_t>(i) >> offset) & mask)) {
            m += std::norm(amps[i]);
        }
    }
    return m;
}

// Applies steps [0, end) of p; Checks become projectors.
void apply_prefix(const VerifierProgram &p, const OraclePair &o, Amplitudes &amps, size_t offset, size_t end) {
    for (size_t i = 0; i < end; i++) {
        const auto &s = p.steps[i];
        switch (s.kind) {
            case K::Check:
                project(amps, offset, table_for(o, s.slot));
                break;
            case K::Hadamard:
                apply_hadamard(amps, offset, o.n());
                break;
            case K::DummyQuery:
                break;
        }
    }
}

}  // namespace

VerifierProgram VerifierProgram::vstar() {
    return {"vstar",
            {{K::Check, Slot::First}, {K::Hadamard, Slot::First}, {K::Check, Slot::Second}},
            x_is_zero};
}

VerifierProgram VerifierProgram::vstar_swapped() {
    return {"vstar-swapped",
            {{K::Hadamard, Slot::First},
             {K::Check, Slot::Second},
             {K::Hadamard, Slot::First},
             {K::Check, Slot::First}},
            x_is_zero};
}

VerifierProgram VerifierProgram::vstar_dummy() {
    return {"vstar-dummy",
            {{K::DummyQuery, Slot::Second},
             {K::Check, Slot::First},
             {K::DummyQuery, Slot::First},
             {K::Hadamard, Slot::First},
             {K::Check, Slot::Second}},
            x_is_zero};
}

VerifierRegistry::VerifierRegistry() {
    programs_.push_back(VerifierProgram::vstar());
    programs_.push_back(VerifierProgram::vstar_swapped());
    programs_.push_back(VerifierProgram::vstar_dummy());
}

VerifierRegistry &VerifierRegistry::global() {
    static VerifierRegistry r;
    return r;
}

void VerifierRegistry::add(VerifierProgram p) {
    for (auto &existing : programs_) {
        if (existing.name == p.name) {
            existing = std::move(p);
            return;
        }
    }
    programs_.push_back(std::move(p));
}

const VerifierProgram &VerifierRegistry::get(const std::string &name) const {
    for (const auto &p : programs_) {
        if (p.name == name) {
            return p;
        }
    }
    throw std::invalid_argument("unknown verifier program '" + name + "'");
}

std::vector<std::string> VerifierRegistry::names() const {
    std::vector<std::string> out;
    for (const auto &p : programs_) {
        out.push_back(p.name);
    }
    return out;
}

double RegisterEffect::probability(const Amplitudes &psi) const {
    double total = 0;
    for (const auto &t : terms) {
        Amplitudes v = psi;
        t.kraus(v, 0);
        total += t.weight * v.squaredNorm();
    }
    return std::clamp(total, 0.0, 1.0);
}

void apply_accept_kraus(const VerifierProgram &p, const OraclePair &o, Amplitudes &amps, size_t offset) {
    apply_prefix(p, o, amps, offset, p.steps.size());
}

RegisterEffect accept_effect(const VerifierProgram &p, const OraclePair &o, const ClassicalPart &classical) {
    RegisterEffect e;
    e.n = o.n();
    if (p.precheck && !p.precheck(classical)) {
        return e;
    }
    e.terms.push_back({1.0, [p, o](Amplitudes &a, size_t off) { apply_accept_kraus(p, o, a, off); }});
    return e;
}

RegisterEffect query_effect(const VerifierProgram &p, const OraclePair &o, const ClassicalPart &classical) {
    RegisterEffect e;
    e.n = o.n();
    if (p.precheck && !p.precheck(classical)) {
        return e;
    }
    size_t q = p.query_count();
    if (q == 0) {
        return e;
    }
    double w = 1.0 / static_cast<double>(q);
    for (size_t i = 0; i < p.steps.size(); i++) {
        const auto &s = p.steps[i];
        if (s.kind == K::Hadamard) {
            continue;
        }
        size_t copies = s.kind == K::DummyQuery ? 2 : 1;
        // Both halves of a dummy pair see the same register state.
        e.terms.push_back({w * static_cast<double>(copies), [p, o, i](Amplitudes &a, size_t off) {
                               apply_prefix(p, o, a, off, i);
                               project(a, off, table_for(o, p.steps[i].slot));
                           }});
    }
    return e;
}

double joint_probability(const RegisterEffect &e1, const RegisterEffect &e2, const Amplitudes &joint) {
    if (e1.n != e2.n || static_cast<uint64_t>(joint.size()) != (uint64_t{1} << (e1.n + e2.n))) {
        throw DimensionMismatch("joint_probability: joint state does not match register sizes");
    }
    double total = 0;
    for (const auto &t1 : e1.terms) {
        Amplitudes left = joint;
        t1.kraus(left, 0);
        if (left.squaredNorm() == 0) {
            continue;
        }
        for (const auto &t2 : e2.terms) {
            Amplitudes both = left;
            t2.kraus(both, e1.n);
            total += t1.weight * t2.weight * both.squaredNorm();
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

bool sample_run(
    const VerifierProgram &p,
    const OraclePair &o,
    const ClassicalPart &classical,
    Amplitudes &amps,
    size_t offset,
    Rng &rng) {
    if (p.precheck && !p.precheck(classical)) {
        return false;
    }
    for (const auto &s : p.steps) {
        switch (s.kind) {
            case K::Hadamard:
                apply_hadamard(amps, offset, o.n());
                break;
            case K::DummyQuery:
                break;
            case K::Check: {
                const auto &t = table_for(o, s.slot);
                double total = amps.squaredNorm();
                double pass = mass_in(amps, offset, t) / total;
                if (uniform01(rng) >= pass) {
                    // Collapse onto the rejecting branch for callers that keep
                    // using the state.
                    uint64_t mask = low_mask(t.n());
                    for (Eigen::Index i = 0; i < amps.size(); i++) {
                        if (t.contains((static_cast<uint64_t>(i) >> offset) & mask)) {
                            amps[i] = 0;
                        }
                    }
                    amps /= amps.norm();
                    return false;
                }
                project(amps, offset, t);
                amps /= amps.norm();
                break;
            }
        }
    }
    return true;
}

bool sample_effect(const RegisterEffect &e, Amplitudes &amps, size_t offset, Rng &rng) {
    double u = uniform01(rng);
    const RegisterEffect::Term *picked = nullptr;
    for (const auto &t : e.terms) {
        if (u < t.weight) {
            picked = &t;
            break;
        }
        u -= t.weight;
    }
    if (picked == nullptr) {
        return false;
    }
    Amplitudes v = amps;
    picked->kraus(v, offset);
    double pass = v.squaredNorm() / amps.squaredNorm();
    if (uniform01(rng) >= pass) {
        return false;
    }
    amps = v / v.norm();
    return true;
}

}  // namespace sublab
