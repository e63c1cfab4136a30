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

#include "sublab/gf2.h"

#include <algorithm>
#include <bit>

namespace sublab {

namespace {

void check_n(size_t n) {
    if (n == 0 || n > 64) {
        throw std::invalid_argument("ambient dimension must be in [1, 64], got " + std::to_string(n));
    }
}

int pivot_of(uint64_t w) {
    return 63 - std::countl_zero(w);
}

// Full reduction to the canonical form described on Subspace.
std::vector<uint64_t> rref(std::vector<uint64_t> rows) {
    std::vector<uint64_t> out;
    for (uint64_t r : rows) {
        for (uint64_t b : out) {
            if ((r >> pivot_of(b)) & 1) {
                r ^= b;
            }
        }
        if (r == 0) {
            continue;
        }
        int p = pivot_of(r);
        for (uint64_t &b : out) {
            if ((b >> p) & 1) {
                b ^= r;
            }
        }
        out.push_back(r);
    }
    // Clearing lower pivots out of r requires a second sweep once all pivots are known.
    std::sort(out.begin(), out.end(), [](uint64_t a, uint64_t b) { return pivot_of(a) > pivot_of(b); });
    for (size_t i = 0; i < out.size(); i++) {
        for (size_t j = 0; j < out.size(); j++) {
            if (i != j && ((out[i] >> pivot_of(out[j])) & 1)) {
                out[i] ^= out[j];
            }
        }
    }
    return out;
}

}  // namespace

BitVector::BitVector(size_t n, uint64_t bits) : n_(n), bits_(bits) {
    check_n(n);
    if (bits & ~low_mask(n)) {
        throw std::invalid_argument("BitVector: bits set beyond length " + std::to_string(n));
    }
}

BitVector BitVector::from_string(std::string_view s) {
    uint64_t bits = 0;
    for (size_t i = 0; i < s.size(); i++) {
        if (s[i] == '1') {
            bits |= uint64_t{1} << i;
        } else if (s[i] != '0') {
            throw std::invalid_argument("BitVector: bad character in '" + std::string(s) + "'");
        }
    }
    return BitVector(s.size(), bits);
}

BitVector BitVector::operator^(const BitVector &other) const {
    if (n_ != other.n_) {
        throw DimensionMismatch("BitVector xor: lengths differ");
    }
    return BitVector(n_, bits_ ^ other.bits_);
}

bool BitVector::dot(const BitVector &other) const {
    if (n_ != other.n_) {
        throw DimensionMismatch("BitVector dot: lengths differ");
    }
    return std::popcount(bits_ & other.bits_) & 1;
}

std::string BitVector::str() const {
    std::string s(n_, '0');
    for (size_t i = 0; i < n_; i++) {
        if ((*this)[i]) {
            s[i] = '1';
        }
    }
    return s;
}

Subspace::Subspace(size_t n) : n_(n) {
    check_n(n);
}

Subspace Subspace::canonicalize(size_t n, std::span<const BitVector> vectors) {
    check_n(n);
    std::vector<uint64_t> words;
    words.reserve(vectors.size());
    for (const auto &v : vectors) {
        if (v.size() != n) {
            throw DimensionMismatch(
                "canonicalize: vector of length " + std::to_string(v.size()) + " in F_2^" + std::to_string(n));
        }
        words.push_back(v.bits());
    }
    return Subspace(n, rref(std::move(words)));
}

Subspace Subspace::from_words(size_t n, std::span<const uint64_t> words) {
    check_n(n);
    for (uint64_t w : words) {
        if (w & ~low_mask(n)) {
            throw DimensionMismatch("from_words: word exceeds ambient dimension " + std::to_string(n));
        }
    }
    return Subspace(n, rref(std::vector<uint64_t>(words.begin(), words.end())));
}

Subspace Subspace::full(size_t n) {
    check_n(n);
    std::vector<uint64_t> rows;
    for (size_t i = n; i-- > 0;) {
        rows.push_back(uint64_t{1} << i);
    }
    return Subspace(n, std::move(rows));
}

std::vector<BitVector> Subspace::basis() const {
    std::vector<BitVector> out;
    for (uint64_t r : rows_) {
        out.emplace_back(n_, r);
    }
    return out;
}

bool Subspace::contains(uint64_t x) const {
    for (uint64_t r : rows_) {
        if ((x >> pivot_of(r)) & 1) {
            x ^= r;
        }
    }
    return x == 0;
}

bool Subspace::contains(const BitVector &x) const {
    if (x.size() != n_) {
        throw DimensionMismatch("member: vector length " + std::to_string(x.size()) + " vs F_2^" + std::to_string(n_));
    }
    return contains(x.bits());
}

bool Subspace::contains(const Subspace &other) const {
    if (other.n_ != n_) {
        throw DimensionMismatch("subspace containment across ambient dimensions");
    }
    return std::all_of(other.rows_.begin(), other.rows_.end(), [&](uint64_t r) { return contains(r); });
}

Subspace Subspace::dual() const {
    uint64_t pivots = 0;
    for (uint64_t r : rows_) {
        pivots |= uint64_t{1} << pivot_of(r);
    }
    std::vector<uint64_t> out;
    for (size_t j = 0; j < n_; j++) {
        if ((pivots >> j) & 1) {
            continue;
        }
        uint64_t y = uint64_t{1} << j;
        for (uint64_t r : rows_) {
            if ((r >> j) & 1) {
                y |= uint64_t{1} << pivot_of(r);
            }
        }
        out.push_back(y);
    }
    return Subspace(n_, rref(std::move(out)));
}

std::vector<uint64_t> Subspace::member_words(size_t cap_dim) const {
    if (dim() > cap_dim) {
        throw CapExceeded(
            "enumerate: dimension " + std::to_string(dim()) + " exceeds cap " + std::to_string(cap_dim));
    }
    size_t count = size_t{1} << dim();
    std::vector<uint64_t> out;
    out.reserve(count);
    uint64_t cur = 0;
    out.push_back(cur);
    for (size_t i = 1; i < count; i++) {
        cur ^= rows_[std::countr_zero(i)];
        out.push_back(cur);
    }
    return out;
}

nlohmann::json Subspace::to_json() const {
    nlohmann::json basis = nlohmann::json::array();
    for (uint64_t r : rows_) {
        basis.push_back(BitVector(n_, r).str());
    }
    return {{"n", n_}, {"basis", basis}};
}

Subspace Subspace::from_json(const nlohmann::json &j) {
    size_t n = j.at("n").get<size_t>();
    std::vector<BitVector> vs;
    for (const auto &b : j.at("basis")) {
        vs.push_back(BitVector::from_string(b.get<std::string>()));
    }
    return canonicalize(n, vs);
}

Subspace canonicalize(size_t n, std::span<const BitVector> vectors) {
    return Subspace::canonicalize(n, vectors);
}

bool member(const Subspace &s, const BitVector &x) {
    return s.contains(x);
}

Subspace dual(const Subspace &s) {
    return s.dual();
}

size_t gf2_rank(std::span<const uint64_t> words) {
    return rref(std::vector<uint64_t>(words.begin(), words.end())).size();
}

Subspace sample_subspace(size_t n, size_t d, Rng &rng) {
    check_n(n);
    if (d > n) {
        throw std::invalid_argument(
            "sample_subspace: d=" + std::to_string(d) + " exceeds n=" + std::to_string(n));
    }
    // Rejection on full rank: the span of a uniform full-rank d x n matrix is
    // uniform over d-dimensional subspaces (GL_d acts freely and transitively
    // on the bases of each subspace).
    std::vector<uint64_t> rows(d);
    while (true) {
        for (auto &r : rows) {
            r = rng() & low_mask(n);
        }
        auto reduced = rref(rows);
        if (reduced.size() == d) {
            return Subspace::from_words(n, reduced);
        }
    }
}

Subspace sample_subspace(size_t n, size_t d, uint64_t seed) {
    Rng rng(seed);
    return sample_subspace(n, d, rng);
}

Subspace sample_subspace_within(const Subspace &parent, size_t d, Rng &rng) {
    if (d > parent.dim()) {
        throw std::invalid_argument("sample_subspace_within: d exceeds parent dimension");
    }
    const auto &pb = parent.basis_words();
    // Sample coordinates in F_2^{dim parent}, then map through the basis.
    Subspace coords = sample_subspace(std::max<size_t>(parent.dim(), 1), d, rng);
    std::vector<uint64_t> words;
    for (uint64_t c : coords.basis_words()) {
        uint64_t w = 0;
        for (size_t i = 0; i < pb.size(); i++) {
            if ((c >> i) & 1) {
                w ^= pb[i];
            }
        }
        words.push_back(w);
    }
    return Subspace::from_words(parent.ambient_dim(), words);
}

std::vector<BitVector> enumerate(const Subspace &s, size_t cap_dim) {
    std::vector<BitVector> out;
    for (uint64_t w : s.member_words(cap_dim)) {
        out.emplace_back(s.ambient_dim(), w);
    }
    return out;
}

uint64_t count_subspaces(size_t n, size_t d) {
    if (d > n) {
        return 0;
    }
    if (n * d > 120) {
        throw std::invalid_argument("count_subspaces: n*d too large for exact evaluation");
    }
    // prod_{i<d} (2^n - 2^i) / (2^d - 2^i), kept exact by dividing late in 128 bits.
    unsigned __int128 num = 1;
    unsigned __int128 den = 1;
    for (size_t i = 0; i < d; i++) {
        num *= ((unsigned __int128)1 << n) - ((unsigned __int128)1 << i);
        den *= ((unsigned __int128)1 << d) - ((unsigned __int128)1 << i);
    }
    return static_cast<uint64_t>(num / den);
}

}  // namespace sublab

size_t std::hash<sublab::Subspace>::operator()(const sublab::Subspace &s) const noexcept {
    uint64_t h = sublab::splitmix64(s.ambient_dim());
    for (uint64_t r : s.basis_words()) {
        h = sublab::splitmix64(h ^ r);
    }
    return static_cast<size_t>(h);
}
