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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace sublab {

namespace {

void check_state_cap(size_t n) {
    if (n > caps().statevector_qubits) {
        throw CapExceeded(
            "statevector of " + std::to_string(n) + " qubits exceeds cap " +
            std::to_string(caps().statevector_qubits));
    }
}

}  // namespace

PureState::PureState(size_t num_qubits, Amplitudes amps) : n_(num_qubits), amps_(std::move(amps)) {
    if (num_qubits > 62 || static_cast<uint64_t>(amps_.size()) != (uint64_t{1} << num_qubits)) {
        throw DimensionMismatch("PureState: amplitude count is not 2^" + std::to_string(num_qubits));
    }
    double norm2 = amps_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kTol) {
        throw std::invalid_argument("PureState: squared norm " + fmt12(norm2) + " != 1");
    }
}

PureState PureState::basis(size_t num_qubits, uint64_t index) {
    Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << num_qubits);
    if (index >= static_cast<uint64_t>(a.size())) {
        throw std::out_of_range("PureState::basis: index out of range");
    }
    a[static_cast<Eigen::Index>(index)] = 1.0;
    return PureState(num_qubits, std::move(a));
}

PureState PureState::uniform(size_t num_qubits) {
    Eigen::Index d = Eigen::Index{1} << num_qubits;
    return PureState(num_qubits, Amplitudes::Constant(d, cdouble(1.0 / std::sqrt(static_cast<double>(d)), 0.0)));
}

PureState PureState::haar_random(size_t num_qubits, Rng &rng) {
    std::normal_distribution<double> g;
    Amplitudes a(Eigen::Index{1} << num_qubits);
    for (auto &z : a) {
        double re = g(rng);
        double im = g(rng);
        z = cdouble(re, im);
    }
    return normalized(num_qubits, std::move(a));
}

PureState PureState::normalized(size_t num_qubits, Amplitudes amps) {
    double nrm = amps.norm();
    if (nrm < 1e-300) {
        throw std::invalid_argument("PureState::normalized: zero vector");
    }
    amps /= nrm;
    return PureState(num_qubits, std::move(amps));
}

double PureState::distance(const PureState &other) const {
    if (other.n_ != n_) {
        throw DimensionMismatch("PureState::distance: qubit counts differ");
    }
    return (amps_ - other.amps_).norm();
}

double PureState::fidelity(const PureState &other) const {
    if (other.n_ != n_) {
        throw DimensionMismatch("PureState::fidelity: qubit counts differ");
    }
    return std::norm(amps_.dot(other.amps_));
}

nlohmann::json PureState::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &z : amps_) {
        arr.push_back({z.real(), z.imag()});
    }
    return arr;
}

PureState PureState::from_json(const nlohmann::json &j) {
    Amplitudes a(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); i++) {
        a[static_cast<Eigen::Index>(i)] = cdouble(j[i].at(0).get<double>(), j[i].at(1).get<double>());
    }
    size_t n = 0;
    while ((size_t{1} << n) < j.size()) {
        n++;
    }
    return PureState(n, std::move(a));
}

PureState tensor(const PureState &low, const PureState &high) {
    size_t n = low.num_qubits() + high.num_qubits();
    check_state_cap(n);
    Amplitudes out(Eigen::Index{1} << n);
    Eigen::Index dl = static_cast<Eigen::Index>(low.dim());
    for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(high.dim()); h++) {
        out.segment(h * dl, dl) = high.amplitudes()[h] * low.amplitudes();
    }
    return PureState(n, std::move(out));
}

void Ensemble::validate() const {
    double total = 0;
    for (const auto &[w, psi] : entries) {
        if (w < 0) {
            throw std::invalid_argument("Ensemble: negative weight");
        }
        if (psi.num_qubits() != entries.front().second.num_qubits()) {
            throw DimensionMismatch("Ensemble: mixed qubit counts");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > kTol) {
        throw std::invalid_argument("Ensemble: weights sum to " + fmt12(total));
    }
}

AcceptOperator AcceptOperator::checked(Eigen::MatrixXcd m) {
    AcceptOperator op = trusted(std::move(m));
    Eigen::VectorXd ev = hermitian_eigenvalues(op.m_);
    if (ev.size() > 0 && (ev.minCoeff() < -kTol || ev.maxCoeff() > 1 + kTol)) {
        throw std::invalid_argument(
            "AcceptOperator: spectrum [" + fmt12(ev.minCoeff()) + ", " + fmt12(ev.maxCoeff()) +
            "] outside [0, 1]");
    }
    return op;
}

AcceptOperator AcceptOperator::trusted(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("AcceptOperator: matrix is not square");
    }
    if (static_cast<size_t>(m.rows()) > caps().dense_dim) {
        throw CapExceeded("AcceptOperator: dimension exceeds dense cap");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kTol) {
        throw std::invalid_argument("AcceptOperator: matrix is not Hermitian");
    }
    return AcceptOperator(std::move(m));
}

PureState subspace_state(const Subspace &s) {
    check_state_cap(s.ambient_dim());
    Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << s.ambient_dim());
    double amp = std::pow(2.0, -0.5 * static_cast<double>(s.dim()));
    for (uint64_t x : s.member_words()) {
        a[static_cast<Eigen::Index>(x)] = amp;
    }
    return PureState(s.ambient_dim(), std::move(a));
}

void apply_hadamard(Amplitudes &amps, size_t offset, size_t count) {
    const double r = 1.0 / std::sqrt(2.0);
    const uint64_t size = static_cast<uint64_t>(amps.size());
    cdouble *data = amps.data();
    for (size_t q = offset; q < offset + count; q++) {
        uint64_t bit = uint64_t{1} << q;
        for (uint64_t base = 0; base < size; base += 2 * bit) {
            for (uint64_t i = base; i < base + bit; i++) {
                cdouble a = data[i];
                cdouble b = data[i + bit];
                data[i] = (a + b) * r;
                data[i + bit] = (a - b) * r;
            }
        }
    }
}

PureState hadamard_all(const PureState &psi) {
    Amplitudes a = psi.amplitudes();
    apply_hadamard(a, 0, psi.num_qubits());
    // Renormalize against accumulated rounding so the result is a valid state.
    return PureState::normalized(psi.num_qubits(), std::move(a));
}

void apply_projector(
    Amplitudes &amps, size_t offset, size_t count, const std::function<bool(uint64_t)> &keep) {
    uint64_t reg_mask = low_mask(count);
    std::vector<char> table(size_t{1} << count);
    for (uint64_t x = 0; x < table.size(); x++) {
        table[x] = keep(x) ? 1 : 0;
    }
    for (Eigen::Index i = 0; i < amps.size(); i++) {
        if (!table[(static_cast<uint64_t>(i) >> offset) & reg_mask]) {
            amps[i] = 0;
        }
    }
}

void apply_projector(Amplitudes &amps, size_t offset, size_t count, const Subspace &s) {
    if (s.ambient_dim() != count) {
        throw DimensionMismatch("apply_projector: subspace dimension differs from register size");
    }
    apply_projector(amps, offset, count, [&](uint64_t x) { return s.contains(x); });
}

AcceptOperator membership_projector(const Subspace &s) {
    size_t d = size_t{1} << s.ambient_dim();
    if (d > caps().dense_dim) {
        throw CapExceeded("membership_projector: dimension exceeds dense cap");
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (uint64_t x : s.member_words()) {
        m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = 1.0;
    }
    return AcceptOperator::trusted(std::move(m));
}

double accept_probability(const AcceptOperator &m, const PureState &psi) {
    if (m.dim() != psi.dim()) {
        throw DimensionMismatch("accept_probability: operator and state dimensions differ");
    }
    double p = psi.amplitudes().dot(m.matrix() * psi.amplitudes()).real();
    return std::clamp(p, 0.0, 1.0);
}

double accept_probability(const AcceptOperator &m, const Ensemble &e) {
    e.validate();
    double total = 0;
    for (const auto &[w, psi] : e.entries) {
        total += w * accept_probability(m, psi);
    }
    return std::clamp(total, 0.0, 1.0);
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

namespace {

constexpr double kResidualBound = 1e-9;

// Returns true on convergence. `v` holds the unit iterate on exit.
bool power_iterate(const LinearOperator &m, const EigenOptions &opts, EigenResult &res) {
    Rng rng(opts.seed);
    std::normal_distribution<double> g;
    Amplitudes v(static_cast<Eigen::Index>(m.dim));
    for (auto &z : v) {
        double re = g(rng);
        double im = g(rng);
        z = cdouble(re, im);
    }
    v.normalize();
    Amplitudes w(v.size());
    for (size_t it = 1; it <= opts.max_iterations; it++) {
        m.apply(v, w);
        double lambda = v.dot(w).real();
        double residual = (w - lambda * v).norm();
        res.value = lambda;
        res.residual = residual;
        res.iterations = it;
        if (residual <= opts.tolerance) {
            res.vector = v;
            return true;
        }
        double nw = w.norm();
        if (nw < 1e-300) {
            // The start vector fell in the kernel; M = 0 on it, restart elsewhere.
            v = Amplitudes::Zero(v.size());
            v[static_cast<Eigen::Index>(it % m.dim)] = 1.0;
            continue;
        }
        v = w / nw;
    }
    res.vector = v;
    return res.residual <= kResidualBound;
}

}  // namespace

EigenResult lambda_max(const LinearOperator &m, const EigenOptions &opts) {
    if (m.dim == 0) {
        throw std::invalid_argument("lambda_max: empty operator");
    }
    EigenResult res{0, {}, 0, 0, false};
    if (!power_iterate(m, opts, res)) {
        throw NonConvergence(
            "lambda_max: residual " + fmt12(res.residual) + " after " + std::to_string(res.iterations) +
            " iterations");
    }
    return res;
}

EigenResult lambda_max(const AcceptOperator &m, const EigenOptions &opts) {
    if (m.dim() > caps().dense_dim) {
        throw CapExceeded("lambda_max: dimension exceeds dense-eigensolver cap");
    }
    const Eigen::MatrixXcd &mat = m.matrix();
    LinearOperator op{m.dim(), [&](const Amplitudes &in, Amplitudes &out) { out.noalias() = mat * in; }};
    EigenResult res{0, {}, 0, 0, false};
    EigenOptions budget = opts;
    budget.max_iterations = std::min<size_t>(opts.max_iterations, 500);
    if (power_iterate(op, budget, res)) {
        return res;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat);
    Eigen::Index top = es.eigenvalues().size() - 1;
    res.value = es.eigenvalues()[top];
    res.vector = es.eigenvectors().col(top);
    res.residual = (mat * res.vector - res.value * res.vector).norm();
    res.dense_fallback = true;
    if (res.residual > kResidualBound) {
        throw NonConvergence("lambda_max: dense fallback residual " + fmt12(res.residual));
    }
    return res;
}

}  // namespace sublab
