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

#include "sublab/np_candidate.h"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <sstream>

namespace sublab {

namespace {

void ensure_sodium() {
    static const bool ok = sodium_init() >= 0;
    if (!ok) {
        throw std::runtime_error("libsodium failed to initialize");
    }
}

std::string to_hex(const unsigned char *data, size_t len) {
    std::string out(2 * len + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data, len);
    out.pop_back();
    return out;
}

bool is_bitstring(const std::string &s) {
    return !s.empty() && s.find_first_not_of("01") == std::string::npos;
}

}  // namespace

NpRelation NpRelation::parity() {
    return {"parity", [](const std::string &x, const std::string &) {
                if (!is_bitstring(x)) {
                    return false;
                }
                return std::count(x.begin(), x.end(), '1') % 2 == 0;
            }};
}

NpRelation NpRelation::three_sat() {
    return {"3sat", [](const std::string &x, const std::string &w) {
                if (!is_bitstring(w)) {
                    return false;
                }
                std::stringstream clauses(x);
                std::string clause;
                size_t count = 0;
                while (std::getline(clauses, clause, ';')) {
                    std::stringstream lits(clause);
                    long lit = 0;
                    size_t width = 0;
                    bool sat = false;
                    while (lits >> lit) {
                        width++;
                        size_t var = static_cast<size_t>(lit < 0 ? -lit : lit);
                        if (var == 0 || var > w.size()) {
                            return false;
                        }
                        bool value = w[var - 1] == '1';
                        sat = sat || (lit > 0 ? value : !value);
                    }
                    if (!lits.eof() || width == 0 || width > 3 || !sat) {
                        return false;
                    }
                    count++;
                }
                return count > 0;
            }};
}

NpRelation relation_by_name(const std::string &name) {
    if (name == "parity") {
        return NpRelation::parity();
    }
    if (name == "3sat") {
        return NpRelation::three_sat();
    }
    throw std::invalid_argument("unknown relation '" + name + "'");
}

OracleHandle OracleHandle::obfuscate(const Subspace &s, uint64_t salt_seed) {
    ensure_sodium();
    Rng rng(salt_seed);
    std::array<uint64_t, 2> salt = {rng(), rng()};
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, 32);
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char *>(salt.data()), sizeof(salt));
    uint64_t n = s.ambient_dim();
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char *>(&n), sizeof(n));
    for (uint64_t w : s.basis_words()) {
        crypto_generichash_update(&st, reinterpret_cast<const unsigned char *>(&w), sizeof(w));
    }
    unsigned char out[32];
    crypto_generichash_final(&st, out, sizeof(out));
    return OracleHandle(std::make_shared<const MembershipTable>(s), to_hex(out, sizeof(out)));
}

bool lsub_decide(
    const std::string &x,
    const Subspace &b,
    const Subspace &c,
    const std::optional<std::string> &np_witness,
    const NpRelation &relation) {
    size_t n = b.ambient_dim();
    if (c.ambient_dim() != n) {
        return false;
    }
    if (!c.dual().contains(b)) {
        return false;
    }
    bool half = b.dim() * 2 == n || c.dim() * 2 == n;
    bool quarter = n % 4 == 0 && (b.dim() * 4 == n || c.dim() * 4 == n);
    bool in_l = np_witness && relation.check(x, *np_witness);
    return half && (in_l || quarter);
}

nlohmann::json Transcript::to_json() const {
    return {{"statement", statement}, {"relation", relation}, {"x", x},
            {"o1_digest", o1_digest}, {"o2_digest", o2_digest}, {"tag", tag}};
}

Transcript Transcript::from_json(const nlohmann::json &j) {
    Transcript t;
    t.statement = j.at("statement").get<bool>();
    t.relation = j.at("relation").get<std::string>();
    t.x = j.at("x").get<std::string>();
    t.o1_digest = j.at("o1_digest").get<std::string>();
    t.o2_digest = j.at("o2_digest").get<std::string>();
    t.tag = j.at("tag").get<std::string>();
    return t;
}

SetupAuthority::SetupAuthority() {
    ensure_sodium();
    crypto_auth_keygen(key_.data());
}

SetupAuthority::SetupAuthority(uint64_t seed) {
    ensure_sodium();
    static_assert(crypto_auth_KEYBYTES == 32);
    Rng rng(seed);
    for (size_t i = 0; i < key_.size(); i += 8) {
        uint64_t r = rng();
        std::memcpy(key_.data() + i, &r, 8);
    }
}

std::string SetupAuthority::message(const Transcript &t) const {
    nlohmann::json j = t.to_json();
    j.erase("tag");
    return j.dump();
}

Transcript SetupAuthority::attest(
    const std::string &x,
    const Subspace &b,
    const Subspace &c,
    const std::optional<std::string> &np_witness,
    const NpRelation &relation,
    const std::string &o1_digest,
    const std::string &o2_digest) const {
    Transcript t;
    t.statement = lsub_decide(x, b, c, np_witness, relation);
    t.relation = relation.name;
    t.x = x;
    t.o1_digest = o1_digest;
    t.o2_digest = o2_digest;
    std::string msg = message(t);
    unsigned char mac[crypto_auth_BYTES];
    crypto_auth(mac, reinterpret_cast<const unsigned char *>(msg.data()), msg.size(), key_.data());
    t.tag = to_hex(mac, sizeof(mac));
    return t;
}

bool SetupAuthority::authentic(const Transcript &t) const {
    unsigned char mac[crypto_auth_BYTES];
    size_t len = 0;
    if (sodium_hex2bin(mac, sizeof(mac), t.tag.data(), t.tag.size(), nullptr, &len, nullptr) != 0 ||
        len != sizeof(mac)) {
        return false;
    }
    std::string msg = message(t);
    return crypto_auth_verify(mac, reinterpret_cast<const unsigned char *>(msg.data()), msg.size(), key_.data()) == 0;
}

CandidateProof candidate_prove(
    const std::string &x,
    const std::string &np_witness,
    const NpRelation &relation,
    size_t n,
    uint64_t seed,
    const SetupAuthority &authority) {
    if (!relation.check(x, np_witness)) {
        throw std::invalid_argument("candidate_prove: witness rejected by relation " + relation.name);
    }
    if (n == 0 || n % 4 != 0) {
        throw std::invalid_argument("candidate_prove: n must be a positive multiple of 4");
    }
    Subspace a = sample_subspace(n, n / 2, child_seed(seed, 0));
    Subspace dual = a.dual();
    auto o1 = OracleHandle::obfuscate(a, child_seed(seed, 1));
    auto o2 = OracleHandle::obfuscate(dual, child_seed(seed, 2));
    Transcript pi = authority.attest(x, a, dual, np_witness, relation, o1.digest(), o2.digest());
    return CandidateProof{std::move(o1), std::move(o2), std::move(pi), subspace_state(a)};
}

namespace {

std::optional<std::string> transcript_problem(const Transcript &t, const std::string &x, const SetupAuthority &authority) {
    if (!authority.authentic(t)) {
        return "transcript tag does not verify";
    }
    if (!t.statement) {
        return "transcript attests a false statement";
    }
    if (t.x != x) {
        return "transcript is bound to a different x";
    }
    return std::nullopt;
}

}  // namespace

CandidateReport candidate_verify(const std::string &x, const CandidateProof &proof, const SetupAuthority &authority) {
    CandidateReport rep;
    rep.result = {0.0, 1, 0};
    if (auto problem = transcript_problem(proof.pi, x, authority)) {
        rep.reason = *problem;
        return rep;
    }
    if (proof.pi.o1_digest != proof.o1.digest() || proof.pi.o2_digest != proof.o2.digest()) {
        rep.reason = "transcript is bound to different oracles";
        return rep;
    }
    size_t n = proof.o1.n();
    if (proof.o2.n() != n || proof.state.num_qubits() != n) {
        rep.reason = "handle and state sizes disagree";
        return rep;
    }
    rep.transcript_ok = true;
    Amplitudes v = proof.state.amplitudes();
    apply_projector(v, 0, n, [&](uint64_t y) { return proof.o1.contains(y); });
    if (v.squaredNorm() == 0) {
        rep.result = {0.0, 2, 2};
        rep.reason = "state has no weight on the first oracle's set";
        return rep;
    }
    apply_hadamard(v, 0, n);
    apply_projector(v, 0, n, [&](uint64_t y) { return proof.o2.contains(y); });
    double p = std::min(1.0, v.squaredNorm());
    rep.result = {p, p == 0 ? std::optional<int>(4) : std::nullopt, 2};
    return rep;
}

VerifierProgram candidate_verifier_program(std::shared_ptr<const SetupAuthority> authority) {
    VerifierProgram p;
    p.name = "npcand";
    p.steps = {{VerifierStep::Kind::Check, Slot::First},
               {VerifierStep::Kind::Hadamard, Slot::First},
               {VerifierStep::Kind::Check, Slot::Second}};
    p.precheck = [authority](const ClassicalPart &c) {
        try {
            Transcript t = Transcript::from_json(c.at("transcript"));
            return !transcript_problem(t, c.at("x").get<std::string>(), *authority) &&
                   t.o1_digest == c.at("o1_digest").get<std::string>() &&
                   t.o2_digest == c.at("o2_digest").get<std::string>();
        } catch (const nlohmann::json::exception &) {
            return false;
        }
    };
    return p;
}

void register_candidate_verifier(std::shared_ptr<const SetupAuthority> authority) {
    VerifierRegistry::global().add(candidate_verifier_program(std::move(authority)));
}

nlohmann::json proof_bundle(const std::string &x, const CandidateProof &proof, const std::string &state_ref) {
    return {{"x", x}, {"o1_digest", proof.o1.digest()}, {"o2_digest", proof.o2.digest()},
            {"transcript", proof.pi.to_json()}, {"state_ref", state_ref}, {"mode", kIdealizedMode}};
}

InstanceSource candidate_instance_source(std::shared_ptr<const SetupAuthority> authority) {
    return [authority](size_t n, uint64_t seed) {
        Rng rng(child_seed(seed, 7));
        std::string x(n, '0');
        for (size_t i = 0; i + 1 < n; i++) {
            x[i] = (rng() & 1) ? '1' : '0';
        }
        // Fix the last bit so the parity is even.
        x[n - 1] = std::count(x.begin(), x.end() - 1, '1') % 2 ? '1' : '0';
        auto rel = NpRelation::parity();
        auto proof = candidate_prove(x, "", rel, n, seed, *authority);
        ClassicalPart classical = proof_bundle(x, proof, "in-memory");
        OraclePair oracles{proof.o1.table(), proof.o2.table()};
        return GameInstance{n, oracles, std::move(classical), proof.state};
    };
}

}  // namespace sublab
