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

#ifndef SUBLAB_GF2_H
#define SUBLAB_GF2_H

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sublab/common.h"

namespace sublab {

/// A vector in F_2^n, n <= 64, packed into one word. Bit i is coordinate i.
class BitVector {
   public:
    BitVector(size_t n, uint64_t bits);

    /// Parses a little-endian bitstring: character i is coordinate i.
    static BitVector from_string(std::string_view s);
    static BitVector zero(size_t n) {
        return BitVector(n, 0);
    }

    size_t size() const {
        return n_;
    }
    uint64_t bits() const {
        return bits_;
    }
    bool operator[](size_t i) const {
        return (bits_ >> i) & 1;
    }
    bool is_zero() const {
        return bits_ == 0;
    }

    BitVector operator^(const BitVector &other) const;
    /// Inner product mod 2.
    bool dot(const BitVector &other) const;

    std::string str() const;

    bool operator==(const BitVector &other) const = default;

   private:
    size_t n_;
    uint64_t bits_;
};

inline uint64_t low_mask(size_t n) {
    return n >= 64 ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
}

/// A linear subspace of F_2^n held in reduced row-echelon form.
///
/// Each basis row's pivot is its highest set bit; rows are sorted by pivot,
/// descending, and every pivot column is clear in all other rows. The form is
/// unique, so two Subspace values are equal iff they span the same space.
class Subspace {
   public:
    /// The zero subspace of F_2^n.
    explicit Subspace(size_t n);

    /// Span of the given vectors.
    static Subspace canonicalize(size_t n, std::span<const BitVector> vectors);
    /// Span of raw words (bits above n are rejected).
    static Subspace from_words(size_t n, std::span<const uint64_t> words);
    static Subspace full(size_t n);

    size_t ambient_dim() const {
        return n_;
    }
    size_t dim() const {
        return rows_.size();
    }
    const std::vector<uint64_t> &basis_words() const {
        return rows_;
    }
    std::vector<BitVector> basis() const;

    bool contains(uint64_t x) const;
    bool contains(const BitVector &x) const;
    /// True iff every basis vector of `other` lies in this subspace.
    bool contains(const Subspace &other) const;

    Subspace dual() const;

    /// All 2^dim members in Gray-code order starting at zero.
    std::vector<uint64_t> member_words(size_t cap_dim = caps().enumeration_dim) const;

    bool operator==(const Subspace &other) const = default;

    nlohmann::json to_json() const;
    static Subspace from_json(const nlohmann::json &j);

   private:
    Subspace(size_t n, std::vector<uint64_t> rows) : n_(n), rows_(std::move(rows)) {
    }

    size_t n_;
    std::vector<uint64_t> rows_;
};

/// Span of `vectors`. All vectors must have length n.
Subspace canonicalize(size_t n, std::span<const BitVector> vectors);

/// Membership test; throws DimensionMismatch when lengths differ.
bool member(const Subspace &s, const BitVector &x);

/// {y : x.y = 0 for all x in s}.
Subspace dual(const Subspace &s);

/// Uniformly random d-dimensional subspace of F_2^n.
Subspace sample_subspace(size_t n, size_t d, Rng &rng);
Subspace sample_subspace(size_t n, size_t d, uint64_t seed);

/// Uniformly random d-dimensional subspace of `parent`.
Subspace sample_subspace_within(const Subspace &parent, size_t d, Rng &rng);

/// All members of s; throws CapExceeded when dim(s) > cap_dim.
std::vector<BitVector> enumerate(const Subspace &s, size_t cap_dim = caps().enumeration_dim);

/// Rank over GF(2) of a list of words.
size_t gf2_rank(std::span<const uint64_t> words);

/// Gaussian binomial coefficient [n choose d]_2: the number of d-dimensional
/// subspaces of F_2^n.
uint64_t count_subspaces(size_t n, size_t d);

}  // namespace sublab

template <>
struct std::hash<sublab::Subspace> {
    size_t operator()(const sublab::Subspace &s) const noexcept;
};

#endif
