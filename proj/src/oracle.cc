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

#include "sublab/oracle.h"

#include <cmath>

namespace sublab {

double query_mass(const Amplitudes &amps, const MassSet &set, size_t offset) {
    size_t n = set.inner.ambient_dim();
    if (set.excluded && set.excluded->ambient_dim() != n) {
        throw DimensionMismatch("query_mass: mass set subspaces differ in ambient dimension");
    }
    if (n > caps().statevector_qubits) {
        throw CapExceeded("query_mass: register exceeds enumeration cap");
    }
    std::vector<char> in(size_t{1} << n, 0);
    for (uint64_t x : set.inner.member_words()) {
        in[x] = 1;
    }
    if (set.excluded) {
        for (uint64_t x : set.excluded->member_words()) {
            in[x] = 0;
        }
    }
    uint64_t mask = low_mask(n);
    double total = 0;
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        if (in[(static_cast<uint64_t>(i) >> offset) & mask]) {
            total += std::norm(amps[i]);
        }
    }
    return total;
}

double query_mass(const PureState &psi, const MassSet &set) {
    if (psi.num_qubits() < set.inner.ambient_dim()) {
        throw DimensionMismatch("query_mass: state smaller than register");
    }
    return query_mass(psi.amplitudes(), set, 0);
}

void QueryLog::append(QueryRecord r) {
    for (const auto &[id, m] : r.masses) {
        if (m < -kTol || m > 1 + kTol) {
            throw std::logic_error("QueryLog: mass " + fmt12(m) + " outside [0, 1] for set " + id);
        }
    }
    records_.push_back(std::move(r));
}

void QueryLog::write_csv(std::ostream &out, size_t trial, bool header) const {
    if (header) {
        out << "trial,query_index,oracle_id,mass_set_id,mass\n";
    }
    for (const auto &r : records_) {
        for (const auto &[id, m] : r.masses) {
            out << trial << ',' << r.index << ',' << r.oracle_id << ',' << id << ',' << fmt12(m) << '\n';
        }
    }
}

MembershipOracle::MembershipOracle(std::string id, Subspace s)
    : MembershipOracle(std::move(id), s.ambient_dim(), [s](uint64_t x) { return s.contains(x); }) {
    subspace_ = std::move(s);
}

MembershipOracle::MembershipOracle(std::string id, size_t n, std::function<bool(uint64_t)> predicate)
    : id_(std::move(id)), n_(n) {
    if (n > caps().statevector_qubits) {
        throw CapExceeded("MembershipOracle: register exceeds statevector cap");
    }
    table_.resize(size_t{1} << n);
    for (uint64_t x = 0; x < table_.size(); x++) {
        table_[x] = predicate(x) ? 1 : 0;
    }
}

void MembershipOracle::track(MassSet set) {
    if (set.inner.ambient_dim() != n_) {
        throw DimensionMismatch("MembershipOracle::track: mass set in a different ambient space");
    }
    tracked_.push_back(std::move(set));
}

void MembershipOracle::record(const Amplitudes &amps, size_t offset) {
    if (budget_ && count_ >= *budget_) {
        throw std::runtime_error("oracle " + id_ + ": query budget of " + std::to_string(*budget_) + " exhausted");
    }
    QueryRecord r;
    r.index = count_;
    r.oracle_id = id_;
    uint64_t mask = low_mask(n_);
    double member = 0;
    Eigen::VectorXd dist;
    if (record_inputs_) {
        dist = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table_.size()));
    }
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        uint64_t x = (static_cast<uint64_t>(i) >> offset) & mask;
        double p = std::norm(amps[i]);
        if (table_[x]) {
            member += p;
        }
        if (record_inputs_) {
            dist[static_cast<Eigen::Index>(x)] += p;
        }
    }
    r.masses.emplace_back("member", member);
    for (const auto &set : tracked_) {
        r.masses.emplace_back(set.id, query_mass(amps, set, offset));
    }
    if (record_inputs_) {
        r.input_distribution = std::move(dist);
    }
    log_.append(std::move(r));
    count_++;
}

void MembershipOracle::apply_in_place(Amplitudes &amps, size_t offset, size_t flag_qubit) {
    if (flag_qubit >= offset && flag_qubit < offset + n_) {
        throw std::invalid_argument("MembershipOracle: flag qubit overlaps the register");
    }
    if ((uint64_t{1} << std::max(flag_qubit + 1, offset + n_)) > static_cast<uint64_t>(amps.size())) {
        throw DimensionMismatch("MembershipOracle: workspace too small for register and flag");
    }
    record(amps, offset);
    uint64_t mask = low_mask(n_);
    uint64_t fbit = uint64_t{1} << flag_qubit;
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        uint64_t u = static_cast<uint64_t>(i);
        if ((u & fbit) == 0 && table_[(u >> offset) & mask]) {
            std::swap(amps[i], amps[static_cast<Eigen::Index>(u | fbit)]);
        }
    }
}

PureState MembershipOracle::apply(const PureState &psi) {
    if (psi.num_qubits() != n_ + 1) {
        throw DimensionMismatch(
            "oracle_apply: expected " + std::to_string(n_ + 1) + " qubits, got " +
            std::to_string(psi.num_qubits()));
    }
    Amplitudes a = psi.amplitudes();
    apply_in_place(a, 0, n_);
    return PureState(psi.num_qubits(), std::move(a));
}

bool MembershipOracle::query_classical(uint64_t x) {
    if (x >= table_.size()) {
        throw DimensionMismatch("query_classical: input out of range");
    }
    Amplitudes a = Amplitudes::Zero(static_cast<Eigen::Index>(table_.size()));
    a[static_cast<Eigen::Index>(x)] = 1;
    record(a, 0);
    return table_[x] != 0;
}

void MembershipOracle::note_query(const Amplitudes &amps, size_t offset) {
    record(amps, offset);
}

OracleProgram OracleProgram::vstar(size_t n) {
    OracleProgram p;
    p.register_qubits = n;
    p.total_qubits = n + 2;
    p.steps.push_back({Kind::QueryA, "check A", nullptr, n});
    p.steps.push_back({Kind::Unitary, "H^n", [n](Amplitudes &a) { apply_hadamard(a, 0, n); }, 0});
    p.steps.push_back({Kind::QueryB, "check B", nullptr, n + 1});
    p.accept_flags = {n, n + 1};
    return p;
}

OracleProgram OracleProgram::no_queries(size_t n) {
    OracleProgram p;
    p.register_qubits = n;
    p.total_qubits = n + 1;
    p.steps.push_back({Kind::Unitary, "H^n", [n](Amplitudes &a) { apply_hadamard(a, 0, n); }, 0});
    p.steps.push_back({Kind::Unitary, "X flag", [n](Amplitudes &a) {
                           uint64_t f = uint64_t{1} << n;
                           for (Eigen::Index i = 0; i < a.size(); i++) {
                               if ((static_cast<uint64_t>(i) & f) == 0) {
                                   std::swap(a[i], a[static_cast<Eigen::Index>(static_cast<uint64_t>(i) | f)]);
                               }
                           }
                       },
                       0});
    p.accept_flags = {n};
    return p;
}

double HybridResult::gap() const {
    return std::abs(prob_with_b - prob_with_b_prime);
}

bool HybridResult::bound_holds() const {
    double dev_sum = 0;
    for (double d : deviations) {
        dev_sum += d;
    }
    return gap() <= dev_sum + 1e-6 && dev_sum <= mass_bound + 1e-6;
}

namespace {

double accept_mass(const Amplitudes &a, const std::vector<size_t> &flags) {
    uint64_t need = 0;
    for (size_t f : flags) {
        need |= uint64_t{1} << f;
    }
    double p = 0;
    for (Eigen::Index i = 0; i < a.size(); i++) {
        if ((static_cast<uint64_t>(i) & need) == need) {
            p += std::norm(a[i]);
        }
    }
    return p;
}

}  // namespace

HybridResult replace_oracle_hybrid(
    const OracleProgram &program,
    const PureState &input,
    const Subspace &a,
    const Subspace &b,
    const Subspace &b_prime) {
    size_t n = program.register_qubits;
    if (input.num_qubits() != n || a.ambient_dim() != n || b.ambient_dim() != n || b_prime.ambient_dim() != n) {
        throw DimensionMismatch("replace_oracle_hybrid: register size mismatch");
    }
    if (!b.contains(b_prime)) {
        throw std::invalid_argument("replace_oracle_hybrid: B' must be a subspace of B");
    }
    if (program.total_qubits > caps().statevector_qubits) {
        throw CapExceeded("replace_oracle_hybrid: workspace exceeds statevector cap");
    }
    MassSet diff{"B\\B'", b, b_prime};

    auto run = [&](const Subspace &b_used, HybridResult *instrument) {
        MembershipOracle oa("A", a);
        MembershipOracle ob("B", b_used);
        MembershipOracle ob_alt("B'", b_prime);
        Amplitudes ws = Amplitudes::Zero(Eigen::Index{1} << program.total_qubits);
        ws.head(input.amplitudes().size()) = input.amplitudes();
        for (const auto &step : program.steps) {
            switch (step.kind) {
                case OracleProgram::Kind::Unitary:
                    step.unitary(ws);
                    break;
                case OracleProgram::Kind::QueryA:
                    oa.apply_in_place(ws, 0, step.flag_qubit);
                    break;
                case OracleProgram::Kind::QueryB:
                    if (instrument != nullptr) {
                        instrument->masses.push_back(query_mass(ws, diff, 0));
                        Amplitudes alt = ws;
                        MembershipOracle(ob_alt).apply_in_place(alt, 0, step.flag_qubit);
                        Amplitudes cur = ws;
                        MembershipOracle(ob).apply_in_place(cur, 0, step.flag_qubit);
                        instrument->deviations.push_back((cur - alt).norm());
                    }
                    ob.apply_in_place(ws, 0, step.flag_qubit);
                    break;
            }
        }
        return accept_mass(ws, program.accept_flags);
    };

    HybridResult r{};
    r.prob_with_b = run(b, &r);
    r.prob_with_b_prime = run(b_prime, nullptr);
    r.b_queries = r.masses.size();
    r.mass_bound = 0;
    for (double m : r.masses) {
        r.mass_bound += 2 * std::sqrt(std::max(0.0, m));
    }
    return r;
}

}  // namespace sublab
