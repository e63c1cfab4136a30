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

#include "sublab/cloneable.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sublab {

namespace {

using Mat = Eigen::MatrixXcd;
using Index = Eigen::Index;

// Kronecker product with `low` on the least significant index.
Mat kron(const Mat &low, const Mat &high) {
    Index dl = low.rows(), cl = low.cols();
    Mat out(dl * high.rows(), cl * high.cols());
    for (Index hr = 0; hr < high.rows(); hr++) {
        for (Index hc = 0; hc < high.cols(); hc++) {
            out.block(hr * dl, hc * cl, dl, cl) = high(hr, hc) * low;
        }
    }
    return out;
}

Amplitudes kron_vec(const Amplitudes &low, const Amplitudes &high) {
    Amplitudes out(low.size() * high.size());
    for (Index h = 0; h < high.size(); h++) {
        out.segment(h * low.size(), low.size()) = high[h] * low;
    }
    return out;
}

bool is_pow2(Index d) {
    return d > 0 && (d & (d - 1)) == 0;
}

size_t log2_exact(Index d) {
    size_t p = 0;
    while ((Index{1} << p) < d) {
        p++;
    }
    return p;
}

double quad(const Mat &m, const Amplitudes &v) {
    return (v.adjoint() * m * v)(0, 0).real();
}

double log_choose(size_t n, size_t k) {
    return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
           std::lgamma(static_cast<double>(n - k) + 1);
}

double gaussian(Rng &rng) {
    double u1 = 1 - uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
}

Amplitudes random_unit(size_t d, Rng &rng) {
    Amplitudes v(static_cast<Index>(d));
    for (Index i = 0; i < v.size(); i++) {
        v[i] = cdouble(gaussian(rng), gaussian(rng));
    }
    return v / v.norm();
}

// Top eigenpair of a small Hermitian matrix.
std::pair<double, Amplitudes> top_eigen(const Mat &m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
    Index last = es.eigenvalues().size() - 1;
    return {es.eigenvalues()[last], es.eigenvectors().col(last)};
}

double spectral_max(const Mat &m) {
    if (m.rows() <= 1024) {
        return top_eigen(m).first;
    }
    return lambda_max(AcceptOperator::trusted(m)).value;
}

template <typename F>
auto in_stage(const std::string &stage, F &&body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError &) {
        throw;
    } catch (const std::exception &e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace

Cloner::Cloner(Eigen::MatrixXcd basis, uint64_t witness_index)
    : basis_(std::move(basis)), witness_index_(witness_index) {
    if (basis_.rows() != basis_.cols() || !is_pow2(basis_.rows())) {
        throw DimensionMismatch("Cloner: basis must be square with power-of-two size");
    }
    p_ = log2_exact(basis_.rows());
    if (witness_index_ >= static_cast<uint64_t>(basis_.rows())) {
        throw std::invalid_argument("Cloner: witness index out of range");
    }
    Mat id = Mat::Identity(basis_.rows(), basis_.cols());
    if ((basis_.adjoint() * basis_ - id).norm() > 1e-9) {
        throw std::invalid_argument("Cloner: basis change is not unitary");
    }
}

Cloner Cloner::basis_copier(size_t p, uint64_t x) {
    Index d = Index{1} << p;
    return Cloner(Mat::Identity(d, d), x);
}

PureState Cloner::witness() const {
    return PureState(p_, basis_.col(static_cast<Index>(witness_index_)));
}

Eigen::MatrixXcd Cloner::unitary() const {
    Index d = basis_.rows();
    Mat copy = Mat::Zero(d * d, d * d);
    for (Index x = 0; x < d; x++) {
        for (Index y = 0; y < d; y++) {
            copy(x + d * (y ^ x), x + d * y) = 1;
        }
    }
    return kron(basis_, basis_) * copy * kron(basis_.adjoint(), Mat::Identity(d, d));
}

double Cloner::fidelity() const {
    Index d = basis_.rows();
    Amplitudes w = basis_.col(static_cast<Index>(witness_index_));
    Amplitudes zero = Amplitudes::Zero(d);
    zero[0] = 1;
    Amplitudes out = unitary() * kron_vec(w, zero);
    return std::norm(kron_vec(w, w).dot(out));
}

Cloner tensor_cloners(const std::vector<Cloner> &parts) {
    if (parts.empty()) {
        throw std::invalid_argument("tensor_cloners: no cloners");
    }
    Mat basis = parts[0].basis();
    uint64_t index = parts[0].witness_index();
    size_t shift = parts[0].p();
    for (size_t i = 1; i < parts.size(); i++) {
        basis = kron(basis, parts[i].basis());
        index |= parts[i].witness_index() << shift;
        shift += parts[i].p();
    }
    return Cloner(std::move(basis), index);
}

PureState ToyVerifier::witness_state() const {
    if (!witness || witness->empty()) {
        throw std::invalid_argument("verifier " + name + " has no designated witness");
    }
    PureState w = (*witness)[0];
    for (size_t i = 1; i < witness->size(); i++) {
        w = tensor(w, (*witness)[i]);
    }
    return w;
}

double ToyVerifier::honest_acceptance() const {
    return quad(yes_op, witness_state().amplitudes());
}

void ToyVerifier::validate() const {
    auto d = static_cast<Index>(dim());
    for (const Mat *m : {&yes_op, &no_op}) {
        if (m->rows() != d || m->cols() != d) {
            throw DimensionMismatch("verifier " + name + ": accept operator size differs from 2^(k p)");
        }
        if ((*m - m->adjoint()).norm() > 1e-9) {
            throw std::invalid_argument("verifier " + name + ": accept operator is not Hermitian");
        }
        // The full spectral check is skipped above 1024 dimensions; operators
        // that large only come out of the exact constructions.
        if (d <= 1024) {
            auto ev = hermitian_eigenvalues(*m);
            if (ev.minCoeff() < -1e-9 || ev.maxCoeff() > 1 + 1e-9) {
                throw std::invalid_argument("verifier " + name + ": accept operator is not a PSD contraction");
            }
        }
    }
    if (witness) {
        if (witness->size() != k) {
            throw DimensionMismatch("verifier " + name + ": witness arity differs from k");
        }
        for (const auto &w : *witness) {
            if (w.num_qubits() != p) {
                throw DimensionMismatch("verifier " + name + ": witness proof size differs from p");
            }
        }
        if (honest_acceptance() < params.c - 1e-9) {
            throw std::invalid_argument("verifier " + name + ": witness acceptance below claimed completeness");
        }
    }
}

ToyVerifier projective_toy_verifier(size_t k, size_t p, double c, double s) {
    if (k == 0 || p == 0 || k * p > 12) {
        throw std::invalid_argument("projective_toy_verifier: need k, p >= 1 and k p <= 12");
    }
    if (c < 0 || c > 1 || s < 0 || 2 * s > 1) {
        throw std::invalid_argument("projective_toy_verifier: need c in [0, 1] and s in [0, 1/2]");
    }
    if (s > 0 && k < 2) {
        throw std::invalid_argument("projective_toy_verifier: s > 0 needs at least two proofs");
    }
    ToyVerifier v;
    v.name = "projective";
    v.k = k;
    v.p = p;
    auto d = static_cast<Index>(v.dim());
    Amplitudes u = Amplitudes::Zero(d);
    u[0] = std::sqrt(c);
    u[1] = std::sqrt(1 - c);
    v.yes_op = u * u.adjoint();
    v.no_op = Mat::Zero(d, d);
    if (s > 0) {
        Amplitudes phi = Amplitudes::Zero(d);
        phi[0] = M_SQRT1_2;
        phi[static_cast<Index>(1 | (uint64_t{1} << p))] = M_SQRT1_2;
        v.no_op = 2 * s * phi * phi.adjoint();
    }
    v.params = {c, 1, s};
    v.witness = std::vector<PureState>(k, PureState::basis(p, 0));
    v.separable = s == 0;
    v.validate();
    return v;
}

ToyVerifier toy_preset(const std::string &name, size_t k, size_t p) {
    ToyVerifier v;
    if (name == "projective") {
        v = projective_toy_verifier(k, p, 2.0 / 3, 1.0 / 3);
    } else if (name == "perfect") {
        v = projective_toy_verifier(k, p, 1, 0);
    } else {
        throw std::invalid_argument("unknown toy verifier preset '" + name + "'");
    }
    v.name = name;
    return v;
}

std::vector<Cloner> default_cloners(const ToyVerifier &v) {
    if (!v.witness) {
        throw std::invalid_argument("default_cloners: verifier has no witness");
    }
    std::vector<Cloner> out;
    for (const auto &w : *v.witness) {
        Index best = 0;
        w.amplitudes().cwiseAbs2().maxCoeff(&best);
        if (std::abs(std::norm(w.amplitudes()[best]) - 1) > 1e-9) {
            throw std::invalid_argument("default_cloners: witness is not a computational basis state");
        }
        out.push_back(Cloner::basis_copier(w.num_qubits(), static_cast<uint64_t>(best)));
    }
    return out;
}

double product_value(const Eigen::MatrixXcd &m, const std::vector<Amplitudes> &parts) {
    Amplitudes v = parts.at(0);
    for (size_t i = 1; i < parts.size(); i++) {
        v = kron_vec(v, parts[i]);
    }
    if (v.size() != m.rows()) {
        throw DimensionMismatch("product_value: party dimensions do not match the operator");
    }
    return quad(m, v);
}

ProductMaxResult product_max(const Eigen::MatrixXcd &m, const std::vector<size_t> &dims, const ProductMaxOptions &opt) {
    size_t total = std::accumulate(dims.begin(), dims.end(), size_t{1}, std::multiplies<size_t>());
    if (dims.empty() || static_cast<Index>(total) != m.rows() || m.rows() != m.cols()) {
        throw DimensionMismatch("product_max: party dimensions do not match the operator");
    }
    if (total > caps().dense_dim) {
        throw CapExceeded("product_max: operator dimension exceeds the dense cap");
    }
    size_t k = dims.size();
    std::vector<size_t> stride(k, 1);
    for (size_t i = 1; i < k; i++) {
        stride[i] = stride[i - 1] * dims[i - 1];
    }
    size_t restarts = std::max<size_t>(1, opt.restarts);
    struct Run {
        double value = -1;
        std::vector<Amplitudes> vectors;
        bool converged = false;
    };
    std::vector<Run> runs(restarts);
    parallel_for(restarts, opt.jobs, [&](size_t r) {
        Rng rng(child_seed(opt.seed, r));
        std::vector<Amplitudes> vs;
        for (size_t d : dims) {
            vs.push_back(random_unit(d, rng));
        }
        double prev = -1;
        double value = -1;
        bool converged = false;
        for (size_t it = 0; it < opt.max_iterations; it++) {
            for (size_t i = 0; i < k; i++) {
                // Columns: e_a in slot i, the other parties fixed.
                Mat proj = Mat::Zero(static_cast<Index>(total), static_cast<Index>(dims[i]));
                for (size_t idx = 0; idx < total; idx++) {
                    cdouble coef = 1;
                    for (size_t j = 0; j < k; j++) {
                        if (j != i) {
                            coef *= vs[j][static_cast<Index>((idx / stride[j]) % dims[j])];
                        }
                    }
                    proj(static_cast<Index>(idx), static_cast<Index>((idx / stride[i]) % dims[i])) = coef;
                }
                auto [val, vec] = top_eigen(proj.adjoint() * m * proj);
                vs[i] = vec / vec.norm();
                value = val;
            }
            if (std::abs(value - prev) <= opt.tolerance) {
                converged = true;
                break;
            }
            prev = value;
        }
        runs[r] = {product_value(m, vs), std::move(vs), converged};
    });
    ProductMaxResult out;
    double worst = 2;
    for (auto &run : runs) {
        worst = std::min(worst, run.value);
        if (run.value > out.value || out.vectors.empty()) {
            out.value = run.value;
            out.vectors = run.vectors;
            out.converged = run.converged;
        }
    }
    out.gap_estimate = out.value - worst;
    return out;
}

std::string to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::Pass:
            return "pass";
        case BoundStatus::Flagged:
            return "flagged";
        case BoundStatus::Fail:
            return "fail";
    }
    return "?";
}

UsefulBoundReport check_useful_bound(const Eigen::MatrixXcd &m, size_t n, double alpha, double gap_estimate) {
    if (m.rows() != static_cast<Index>(n * n) || m.cols() != m.rows()) {
        throw DimensionMismatch("check_useful_bound: operator is not on C^n (x) C^n");
    }
    UsefulBoundReport r;
    r.alpha = alpha;
    r.n = n;
    auto [lam, vec] = top_eigen(m);
    r.lambda_max = lam;
    double n2 = static_cast<double>(n * n);
    r.bound = alpha * n2;
    Mat schmidt(static_cast<Index>(n), static_cast<Index>(n));
    for (Index hi = 0; hi < static_cast<Index>(n); hi++) {
        for (Index lo = 0; lo < static_cast<Index>(n); lo++) {
            schmidt(lo, hi) = vec[lo + static_cast<Index>(n) * hi];
        }
    }
    double sum = Eigen::JacobiSVD<Mat>(schmidt).singularValues().sum();
    r.schmidt_bound = alpha * sum * sum;
    if (lam <= r.bound + 1e-6) {
        r.status = BoundStatus::Pass;
    } else if (lam <= (alpha + gap_estimate) * n2 + 1e-6) {
        r.status = BoundStatus::Flagged;
    } else {
        r.status = BoundStatus::Fail;
    }
    return r;
}

Eigen::MatrixXcd random_psd_contraction(size_t d, Rng &rng) {
    Mat g(static_cast<Index>(d), static_cast<Index>(d));
    for (Index i = 0; i < g.rows(); i++) {
        for (Index j = 0; j < g.cols(); j++) {
            g(i, j) = cdouble(gaussian(rng), gaussian(rng));
        }
    }
    Mat m = g * g.adjoint();
    m = 0.5 * (m + m.adjoint());
    double top = top_eigen(m).first;
    return m * ((1 - uniform01(rng)) / top);
}

Eigen::MatrixXcd random_separable_contraction(size_t d1, size_t d2, size_t terms, Rng &rng) {
    Mat m = Mat::Zero(static_cast<Index>(d1 * d2), static_cast<Index>(d1 * d2));
    std::vector<double> w(terms);
    double total = 0;
    for (auto &x : w) {
        x = 1 - uniform01(rng);
        total += x;
    }
    for (size_t t = 0; t < terms; t++) {
        Amplitudes v = kron_vec(random_unit(d1, rng), random_unit(d2, rng));
        m += (w[t] / total) * v * v.adjoint();
    }
    return m * (1 - uniform01(rng));
}

Eigen::MatrixXcd maximally_entangled_projector(size_t d) {
    Amplitudes phi = Amplitudes::Zero(static_cast<Index>(d * d));
    for (size_t i = 0; i < d; i++) {
        phi[static_cast<Index>(i + d * i)] = 1 / std::sqrt(static_cast<double>(d));
    }
    return phi * phi.adjoint();
}

bool TransformReport::pass() const {
    return pass_c && pass_s;
}

nlohmann::json TransformReport::to_json() const {
    nlohmann::json j = {
        {"stage", stage},
        {"input", {{"c", input.c}, {"f", input.f}, {"s", input.s}}},
        {"claimed", {{"c", claimed_c}, {"s", claimed_s}}},
        {"measured", {{"c", measured_c}, {"s", measured_s}}},
        {"pass", pass()},
        {"pass_c", pass_c},
        {"pass_s", pass_s},
        {"flags", flags},
        {"details", details}};
    if (expected_c) {
        j["expected_c"] = *expected_c;
    }
    return j;
}

double binomial_upper_tail(size_t m, double a, size_t t) {
    if (t == 0) {
        return 1;
    }
    if (t > m || a <= 0) {
        return 0;
    }
    if (a >= 1) {
        return 1;
    }
    double la = std::log(a);
    double lb = std::log1p(-a);
    double sum = 0;
    for (size_t j = t; j <= m; j++) {
        sum += std::exp(log_choose(m, j) + static_cast<double>(j) * la + static_cast<double>(m - j) * lb);
    }
    return std::min(1.0, sum);
}

AmplificationPoint amplification_point(double c, double s, size_t q, size_t ell) {
    if (q == 0) {
        throw std::invalid_argument("amplification_point: q must be positive");
    }
    AmplificationPoint pt;
    pt.c = c;
    pt.s = s;
    pt.q = q;
    pt.ell = ell;
    pt.copies = 2 * ell * q * q + 1;
    pt.threshold = static_cast<size_t>(std::ceil((c + s) / 2 * static_cast<double>(pt.copies) - 1e-9));
    pt.completeness = binomial_upper_tail(pt.copies, c, pt.threshold);
    pt.bound = 1 - std::pow(2.0, -static_cast<double>(ell));
    return pt;
}

std::vector<AmplificationPoint> amplification_grid() {
    std::vector<AmplificationPoint> out;
    for (double c : {2.0 / 3, 0.75, 0.9}) {
        for (size_t q = 1; q <= 5; q++) {
            double top = c - 1.0 / static_cast<double>(q);
            if (top < -1e-12) {
                continue;
            }
            top = std::max(0.0, top);
            std::vector<double> ss = {top};
            if (top / 2 > 1e-12) {
                ss.push_back(top / 2);
            }
            if (top > 1e-12) {
                ss.push_back(0);
            }
            for (double s : ss) {
                for (size_t ell = 1; ell <= 10; ell++) {
                    out.push_back(amplification_point(c, s, q, ell));
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXcd threshold_operator(const Eigen::MatrixXcd &m, const Eigen::MatrixXcd &basis, size_t copies, size_t threshold) {
    Mat a = basis.adjoint() * m * basis;
    Index d = a.rows();
    Mat f = Mat::Zero(d, d);
    for (Index x = 0; x < d; x++) {
        f(x, x) = binomial_upper_tail(copies, std::clamp(a(x, x).real(), 0.0, 1.0), threshold);
    }
    if (threshold >= 1 && threshold <= copies) {
        // Off the diagonal (I - M) = -M in the cloning basis, so the sum over
        // accepting subsets collapses to a^m (-1)^(m+t) C(m-1, t-1).
        double lc = log_choose(copies - 1, threshold - 1);
        double sign = ((copies + threshold) % 2 == 0) ? 1.0 : -1.0;
        for (Index x = 0; x < d; x++) {
            for (Index y = 0; y < d; y++) {
                if (x == y || std::abs(a(x, y)) == 0) {
                    continue;
                }
                double mag = std::exp(static_cast<double>(copies) * std::log(std::abs(a(x, y))) + lc);
                f(x, y) = sign * mag * std::polar(1.0, static_cast<double>(copies) * std::arg(a(x, y)));
            }
        }
    }
    return basis * f * basis.adjoint();
}

Eigen::MatrixXcd repetition_operator(const Eigen::MatrixXcd &m, const Eigen::MatrixXcd &basis, size_t copies) {
    Mat a = basis.adjoint() * m * basis;
    Mat f = Mat::Ones(a.rows(), a.cols());
    for (size_t i = 0; i < copies; i++) {
        f = f.cwiseProduct(a);
    }
    return basis * f * basis.adjoint();
}

namespace {

void check_cloners(const ToyVerifier &v, const std::vector<Cloner> &cloners) {
    if (!v.witness) {
        throw std::invalid_argument("verifier has no designated witness");
    }
    if (cloners.size() != v.k) {
        throw std::invalid_argument(
            "missing cloner: " + std::to_string(cloners.size()) + " cloners for " + std::to_string(v.k) + " proofs");
    }
    for (size_t j = 0; j < v.k; j++) {
        const auto &c = cloners[j];
        if (c.p() != v.p) {
            throw DimensionMismatch("cloner " + std::to_string(j) + " acts on the wrong number of qubits");
        }
        if (c.fidelity() < 1 - 1e-9) {
            throw std::invalid_argument("cloner " + std::to_string(j) + " does not clone its witness perfectly");
        }
        if ((*v.witness)[j].fidelity(c.witness()) < 1 - 1e-9) {
            throw std::invalid_argument("cloner " + std::to_string(j) + " is designated for a different witness");
        }
    }
}

ProductMaxResult party_max(const Mat &m, size_t k, size_t d, const ProductMaxOptions &opt) {
    return product_max(m, std::vector<size_t>(k, d), opt);
}

}  // namespace

Transformed amplify_gap(const ToyVerifier &v, const std::vector<Cloner> &cloners, size_t q, size_t ell, const ProductMaxOptions &opt) {
    return in_stage("amplify_gap", [&] {
        check_cloners(v, cloners);
        if (q == 0 || v.params.c - v.params.s < 1.0 / static_cast<double>(q) - 1e-12) {
            throw std::invalid_argument("gap c - s is below 1/q");
        }
        auto pt = amplification_point(v.params.c, v.params.s, q, ell);
        Mat basis = tensor_cloners(cloners).basis();
        Transformed out{v, {}};
        out.verifier.name = v.name + "/amplified";
        out.verifier.yes_op = threshold_operator(v.yes_op, basis, pt.copies, pt.threshold);
        out.verifier.no_op = threshold_operator(v.no_op, basis, pt.copies, pt.threshold);
        out.verifier.separable = false;
        auto &r = out.report;
        r.stage = "amplify_gap";
        r.input = v.params;
        r.claimed_c = pt.bound;
        r.claimed_s = 1 - 1 / (2.0 * static_cast<double>(q));
        r.measured_c = out.verifier.honest_acceptance();
        r.expected_c = binomial_upper_tail(pt.copies, v.honest_acceptance(), pt.threshold);
        auto pm = party_max(out.verifier.no_op, v.k, v.proof_dim(), opt);
        r.measured_s = pm.value;
        r.pass_c = r.measured_c >= r.claimed_c - 1e-9 && std::abs(r.measured_c - *r.expected_c) <= 1e-9;
        r.pass_s = r.measured_s <= r.claimed_s + 1e-9;
        if (!pm.converged) {
            r.flags.push_back("product maximization did not converge");
        }
        r.details = {{"q", q}, {"ell", ell}, {"clones", pt.copies - 1}, {"runs", pt.copies},
                     {"threshold", pt.threshold}, {"product_max_gap", pm.gap_estimate}};
        out.verifier.params = {r.measured_c, 1, r.claimed_s};
        out.verifier.validate();
        return out;
    });
}

double swap_test_probability(const Amplitudes &phi, const Amplitudes &psi) {
    if (phi.size() != psi.size()) {
        throw DimensionMismatch("swap_test_probability: states differ in size");
    }
    return 0.5 + 0.5 * std::norm(phi.dot(psi));
}

Eigen::MatrixXcd product_test_operator(size_t k, size_t p) {
    size_t half = k * p;
    if (2 * half > 24 || (size_t{1} << (2 * half)) > caps().dense_dim) {
        throw CapExceeded("product_test_operator: two-proof space exceeds the dense cap");
    }
    auto d = static_cast<Index>(uint64_t{1} << (2 * half));
    uint64_t block = low_mask(p);
    Mat out = Mat::Zero(d, d);
    double w = std::pow(0.5, static_cast<double>(k));
    for (uint64_t subset = 0; subset < (uint64_t{1} << k); subset++) {
        for (uint64_t idx = 0; idx < static_cast<uint64_t>(d); idx++) {
            uint64_t img = idx;
            for (size_t i = 0; i < k; i++) {
                if ((subset >> i) & 1) {
                    size_t lo = i * p;
                    size_t hi = half + i * p;
                    uint64_t a = (idx >> lo) & block;
                    uint64_t b = (idx >> hi) & block;
                    img &= ~((block << lo) | (block << hi));
                    img |= (b << lo) | (a << hi);
                }
            }
            out(static_cast<Index>(img), static_cast<Index>(idx)) += w;
        }
    }
    return out;
}

Transformed product_test_collapse(const ToyVerifier &v, const ProductMaxOptions &opt) {
    return in_stage("product_test_collapse", [&] {
        if (!v.witness) {
            throw std::invalid_argument("verifier has no designated witness");
        }
        Mat pt = product_test_operator(v.k, v.p);
        auto d = static_cast<Index>(v.dim());
        Mat id = Mat::Identity(d, d);
        PureState w = v.witness_state();
        Transformed out{v, {}};
        auto &nv = out.verifier;
        nv.name = v.name + "/collapsed";
        nv.k = 2;
        nv.p = v.k * v.p;
        nv.yes_op = 0.5 * kron(v.yes_op, id) + 0.5 * pt;
        nv.no_op = 0.5 * kron(v.no_op, id) + 0.5 * pt;
        nv.witness = std::vector<PureState>{w, w};
        nv.separable = true;
        auto &r = out.report;
        r.stage = "product_test_collapse";
        r.input = v.params;
        r.claimed_c = (1 + v.params.c) / 2;
        r.claimed_s = 1 - (1 - v.params.s) * (1 - v.params.s) / 100;
        r.measured_c = nv.honest_acceptance();
        r.expected_c = (1 + v.honest_acceptance()) / 2;
        auto pm = party_max(nv.no_op, 2, v.dim(), opt);
        r.measured_s = pm.value;
        r.pass_c = r.measured_c >= r.claimed_c - 1e-9 && std::abs(r.measured_c - *r.expected_c) <= 1e-9;
        r.pass_s = r.measured_s <= r.claimed_s + 1e-9;
        if (!pm.converged) {
            r.flags.push_back("product maximization did not converge");
        }
        r.details = {{"product_max_gap", pm.gap_estimate}};
        nv.params = {r.measured_c, 1, r.claimed_s};
        nv.validate();
        return out;
    });
}

Transformed sequential_repeat(const ToyVerifier &v, const std::vector<Cloner> &cloners, size_t ell, const ProductMaxOptions &opt) {
    return in_stage("sequential_repeat", [&] {
        if (!v.separable) {
            throw std::invalid_argument("input verifier is not flagged separable");
        }
        if (v.k != 2) {
            throw std::invalid_argument("input verifier must take two proofs");
        }
        check_cloners(v, cloners);
        Mat basis = tensor_cloners(cloners).basis();
        Transformed out{v, {}};
        auto &nv = out.verifier;
        nv.name = v.name + "/repeated";
        nv.yes_op = repetition_operator(v.yes_op, basis, ell + 1);
        nv.no_op = repetition_operator(v.no_op, basis, ell + 1);
        nv.separable = false;
        auto &r = out.report;
        double reps = static_cast<double>(ell + 1);
        r.stage = "sequential_repeat";
        r.input = v.params;
        r.claimed_c = std::pow(v.params.c, reps);
        r.claimed_s = std::pow(v.params.s, reps);
        r.measured_c = nv.honest_acceptance();
        r.expected_c = std::pow(v.honest_acceptance(), reps);
        auto pm = party_max(nv.no_op, 2, v.proof_dim(), opt);
        r.measured_s = pm.value;
        r.pass_c = r.measured_c >= r.claimed_c - 1e-9 && std::abs(r.measured_c - *r.expected_c) <= 1e-9;
        r.pass_s = r.measured_s <= r.claimed_s + 1e-9;
        double stated = std::pow(v.params.c, static_cast<double>(ell));
        if (std::abs(stated - r.claimed_c) > 1e-12) {
            r.flags.push_back(
                "stated completeness c^l = " + fmt12(stated) + " differs from the construction's c^(l+1) = " +
                fmt12(r.claimed_c));
        }
        if (!pm.converged) {
            r.flags.push_back("product maximization did not converge");
        }
        r.details = {{"ell", ell}, {"stated_c", stated}, {"product_max_gap", pm.gap_estimate}};
        nv.params = {r.measured_c, 1, r.claimed_s};
        nv.validate();
        return out;
    });
}

Transformed drop_unentanglement(const ToyVerifier &v, const ProductMaxOptions &opt) {
    return in_stage("drop_unentanglement", [&] {
        if (v.k != 2) {
            throw std::invalid_argument("input verifier must take two proofs");
        }
        if (v.dim() > caps().dense_dim) {
            throw CapExceeded("proof space exceeds the dense cap");
        }
        auto pm = party_max(v.no_op, 2, v.proof_dim(), opt);
        auto useful = check_useful_bound(v.no_op, v.proof_dim(), pm.value, pm.gap_estimate);
        Transformed out{v, {}};
        auto &nv = out.verifier;
        nv.name = v.name + "/single";
        nv.k = 1;
        nv.p = 2 * v.p;
        if (v.witness) {
            nv.witness = std::vector<PureState>{v.witness_state()};
        }
        nv.separable = true;
        auto &r = out.report;
        double inflation = static_cast<double>(v.dim());
        r.stage = "drop_unentanglement";
        r.input = v.params;
        r.claimed_c = v.params.c;
        r.claimed_s = std::min(1.0, inflation * v.params.s);
        r.measured_c = v.witness ? nv.honest_acceptance() : 0;
        if (v.witness) {
            r.expected_c = v.honest_acceptance();
        }
        r.measured_s = spectral_max(nv.no_op);
        r.pass_c = r.measured_c >= r.claimed_c - 1e-9;
        r.pass_s = r.measured_s <= inflation * v.params.s + 1e-6 && useful.status != BoundStatus::Fail;
        if (useful.status == BoundStatus::Flagged) {
            r.flags.push_back("useful bound exceeded only within the product-maximization gap");
        }
        r.details = {{"product_max", pm.value}, {"product_max_gap", pm.gap_estimate},
                     {"lambda_max", useful.lambda_max}, {"useful_bound", useful.bound},
                     {"schmidt_bound", useful.schmidt_bound}, {"useful_status", to_string(useful.status)}};
        nv.params = {r.measured_c, 1, r.claimed_s};
        nv.validate();
        return out;
    });
}

bool PipelineReport::pass() const {
    return !stages.empty() && std::all_of(stages.begin(), stages.end(), [](const auto &s) { return s.pass(); });
}

nlohmann::json PipelineReport::to_json() const {
    nlohmann::json j;
    j["stages"] = nlohmann::json::array();
    for (const auto &s : stages) {
        j["stages"].push_back(s.to_json());
    }
    j["pass"] = pass();
    j["final"] = {{"c", final_verifier.params.c}, {"s", final_verifier.params.s}, {"k", final_verifier.k},
                  {"p", final_verifier.p}};
    return j;
}

PipelineReport compose_theorem_pipeline(const ToyVerifier &v, const std::vector<Cloner> &cloners, const PipelineOptions &opt) {
    if (v.k > 3 || v.p > 2) {
        throw std::invalid_argument("compose_theorem_pipeline: exact evaluation needs k <= 3 and p <= 2");
    }
    PipelineReport rep;
    auto s1 = amplify_gap(v, cloners, opt.q, opt.ell_amplify, opt.product_max);
    rep.stages.push_back(s1.report);
    auto s2 = product_test_collapse(s1.verifier, opt.product_max);
    rep.stages.push_back(s2.report);
    Cloner tuple = tensor_cloners(cloners);
    auto s3 = sequential_repeat(s2.verifier, {tuple, tuple}, opt.ell_repeat, opt.product_max);
    rep.stages.push_back(s3.report);
    auto s4 = drop_unentanglement(s3.verifier, opt.product_max);
    rep.stages.push_back(s4.report);
    rep.final_verifier = s4.verifier;
    return rep;
}

}  // namespace sublab
