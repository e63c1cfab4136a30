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

#include "sublab/experiments.h"

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sublab/cloneable.h"
#include "sublab/common.h"
#include "sublab/np_candidate.h"
#include "sublab/piracy.h"
#include "sublab/protocol.h"
#include "sublab/verifier_program.h"

namespace sublab {

namespace {

using nlohmann::json;

enum class FieldType { Uint, UintList, String, StringList, Bool, PairList, PipelineList, Object };

const std::map<std::string, std::map<std::string, FieldType>> &grid_schema() {
    static const std::map<std::string, std::map<std::string, FieldType>> schema = {
        {"soundness",
         {{"n", FieldType::UintList},
          {"kinds", FieldType::StringList},
          {"instances", FieldType::Uint},
          {"instance_out", FieldType::String}}},
        {"piracy",
         {{"n", FieldType::UintList},
          {"pirates", FieldType::StringList},
          {"verifiers", FieldType::PairList},
          {"trials", FieldType::Uint},
          {"mode", FieldType::String},
          {"budget", FieldType::Uint},
          {"chain", FieldType::Bool},
          {"exact_instances", FieldType::Uint}}},
        {"counterfeit",
         {{"n", FieldType::UintList},
          {"attacks", FieldType::StringList},
          {"budgets", FieldType::UintList},
          {"trials", FieldType::Uint}}},
        {"calculus",
         {{"pipelines", FieldType::PipelineList},
          {"q", FieldType::Uint},
          {"ell_amplify", FieldType::Uint},
          {"ell_repeat", FieldType::Uint},
          {"restarts", FieldType::Uint},
          {"amplification_grid", FieldType::Bool},
          {"useful_sweep", FieldType::Object}}},
        {"npcand",
         {{"n", FieldType::UintList},
          {"relation", FieldType::String},
          {"instances", FieldType::Uint},
          {"piracy", FieldType::Bool}}},
    };
    return schema;
}

bool is_uint(const json &v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0);
}

void check_field(const std::string &key, const json &v, FieldType t) {
    auto fail = [&](const std::string &what) {
        throw std::invalid_argument("grid." + key + ": expected " + what);
    };
    switch (t) {
        case FieldType::Uint:
            if (!is_uint(v)) {
                fail("a nonnegative integer");
            }
            break;
        case FieldType::UintList:
            if (is_uint(v)) {
                break;
            }
            if (!v.is_array()) {
                fail("a nonnegative integer or an array of them");
            }
            for (const auto &e : v) {
                if (!is_uint(e)) {
                    fail("an array of nonnegative integers");
                }
            }
            break;
        case FieldType::String:
            if (!v.is_string()) {
                fail("a string");
            }
            break;
        case FieldType::StringList:
            if (!v.is_array()) {
                fail("an array of strings");
            }
            for (const auto &e : v) {
                if (!e.is_string()) {
                    fail("an array of strings");
                }
            }
            break;
        case FieldType::Bool:
            if (!v.is_boolean()) {
                fail("a boolean");
            }
            break;
        case FieldType::PairList:
            if (!v.is_array()) {
                fail("an array of [v1, v2] name pairs");
            }
            for (const auto &e : v) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                    fail("an array of [v1, v2] name pairs");
                }
            }
            break;
        case FieldType::PipelineList:
            if (!v.is_array()) {
                fail("an array of {preset, k, p} objects");
            }
            for (const auto &e : v) {
                if (!e.is_object()) {
                    fail("an array of {preset, k, p} objects");
                }
                for (const auto &[k, x] : e.items()) {
                    if (k == "preset" ? !x.is_string() : (k == "k" || k == "p") ? !is_uint(x) : true) {
                        fail("an array of {preset, k, p} objects (bad entry '" + k + "')");
                    }
                }
            }
            break;
        case FieldType::Object:
            if (!v.is_object()) {
                fail("an object");
            }
            for (const auto &[k, x] : v.items()) {
                if (k == "dims") {
                    check_field(key + ".dims", x, FieldType::UintList);
                } else if (k == "instances") {
                    check_field(key + ".instances", x, FieldType::Uint);
                } else {
                    throw std::invalid_argument("grid." + key + ": unknown key '" + k + "'");
                }
            }
            break;
    }
}

std::vector<size_t> uint_list(const json &grid, const char *key, std::vector<size_t> fallback) {
    if (!grid.contains(key)) {
        return fallback;
    }
    const auto &v = grid.at(key);
    if (!v.is_array()) {
        return {v.get<size_t>()};
    }
    return v.get<std::vector<size_t>>();
}

std::vector<std::string> string_list(const json &grid, const char *key, std::vector<std::string> fallback) {
    return grid.contains(key) ? grid.at(key).get<std::vector<std::string>>() : fallback;
}

template <typename T>
T value_or(const json &grid, const char *key, T fallback) {
    return grid.contains(key) ? grid.at(key).get<T>() : fallback;
}

std::string pad(size_t v) {
    std::ostringstream s;
    s << std::setw(6) << std::setfill('0') << v;
    return s.str();
}

std::string str(size_t v) {
    return std::to_string(v);
}

std::string yes_no(bool b) {
    return b ? "true" : "false";
}

/// One unit of work; `run` fills the records of that point.
struct GridPoint {
    std::string key;
    std::function<std::vector<ResultRecord>(uint64_t seed)> run;
};

struct Plan {
    std::vector<std::string> columns;
    std::vector<GridPoint> points;
    std::vector<std::string> skipped;
    std::function<void(RunResult &, uint64_t seed)> finish;
};

void skip(Plan &plan, const std::string &reason) {
    std::cerr << "skipped: " << reason << "\n";
    plan.skipped.push_back(reason);
}

// ---------------------------------------------------------------- soundness

Plan plan_soundness(const ExperimentConfig &cfg) {
    Plan plan;
    plan.columns = {"n", "kind", "instances", "measured_min", "measured_max", "claimed"};
    const auto &g = cfg.grid;
    auto ns = uint_list(g, "n", {4, 8, 12});
    auto kinds = string_list(g, "kinds", {"NO_AB"});
    size_t instances = value_or<size_t>(g, "instances", 50);
    for (const auto &k : kinds) {
        instance_kind_from_string(k);
    }
    auto per_instance = std::make_shared<std::vector<std::vector<std::string>>>();
    for (size_t n : ns) {
        if (n == 0 || n % 4 != 0) {
            skip(plan, "soundness n=" + str(n) + ": n must be a positive multiple of 4");
            continue;
        }
        if (n > caps().statevector_qubits) {
            skip(plan, "soundness n=" + str(n) + ": above the state-vector cap");
            continue;
        }
        for (const auto &kname : kinds) {
            InstanceKind kind = instance_kind_from_string(kname);
            plan.points.push_back({"n=" + pad(n) + "/kind=" + kname, [=](uint64_t seed) {
                                       double lo = 1, hi = 0;
                                       double claimed = kind == InstanceKind::Yes ? 1.0 : std::pow(2.0, -0.25 * double(n));
                                       bool pass = true;
                                       for (size_t i = 0; i < instances; i++) {
                                           uint64_t s = child_seed(seed, i);
                                           double p;
                                           if (kind == InstanceKind::Yes) {
                                               auto inst = *generator_G(n, s);
                                               p = verify_vstar(inst, BitVector::zero(n), honest_prove(inst)).accept_probability;
                                           } else {
                                               p = max_cheat_probability(sample_no_instance(n, kind, s));
                                           }
                                           lo = std::min(lo, p);
                                           hi = std::max(hi, p);
                                           pass = pass && std::abs(p - claimed) <= 1e-9;
                                       }
                                       ResultRecord r;
                                       r.key = "n=" + pad(n) + "/kind=" + kname;
                                       r.values = {str(n), kname, str(instances), fmt12(instances ? lo : 0), fmt12(hi), fmt12(claimed)};
                                       r.pass = pass;
                                       return std::vector<ResultRecord>{r};
                                   }});
        }
    }
    if (g.contains("instance_out")) {
        // Per-instance probabilities, recomputed sequentially after the grid.
        std::string path = g.at("instance_out");
        plan.finish = [path, ns, kinds, instances](RunResult &, uint64_t master) {
            std::ofstream out(path);
            if (!out) {
                throw std::runtime_error("cannot write " + path);
            }
            write_probability_csv_header(out);
            size_t index = 0;
            for (size_t n : ns) {
                if (n == 0 || n % 4 != 0 || n > caps().statevector_qubits) {
                    continue;
                }
                for (const auto &kname : kinds) {
                    InstanceKind kind = instance_kind_from_string(kname);
                    uint64_t seed = grid_point_seed(master, index++);
                    for (size_t i = 0; i < instances; i++) {
                        uint64_t s = child_seed(seed, i);
                        double p;
                        if (kind == InstanceKind::Yes) {
                            auto inst = *generator_G(n, s);
                            p = verify_vstar(inst, BitVector::zero(n), honest_prove(inst)).accept_probability;
                        } else {
                            p = max_cheat_probability(sample_no_instance(n, kind, s));
                        }
                        write_probability_csv_row(out, "n" + str(n) + "-" + str(i), kind, p);
                    }
                }
            }
        };
    }
    return plan;
}

// ---------------------------------------------------------------- piracy

GameOptions::Mode parse_mode(const std::string &m) {
    if (m == "auto") {
        return GameOptions::Mode::Auto;
    }
    if (m == "exact") {
        return GameOptions::Mode::Exact;
    }
    if (m == "monte-carlo") {
        return GameOptions::Mode::MonteCarlo;
    }
    throw std::invalid_argument("grid.mode: expected auto, exact or monte-carlo, got '" + m + "'");
}

Plan plan_piracy(const ExperimentConfig &cfg) {
    Plan plan;
    plan.columns = {"n",       "pirate",  "v1",   "v2",   "trials", "joint_accept", "ci_low", "ci_high",    "queries",
                    "exact",   "illegal", "p1",   "p2",   "m_v",    "m_m",          "chain_holds"};
    const auto &g = cfg.grid;
    auto ns = uint_list(g, "n", {8});
    auto pirates = string_list(g, "pirates", pirate_names());
    std::vector<std::pair<std::string, std::string>> verifiers = {{"vstar", "vstar"}};
    if (g.contains("verifiers")) {
        verifiers.clear();
        for (const auto &p : g.at("verifiers")) {
            verifiers.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
        }
    }
    size_t trials = value_or<size_t>(g, "trials", 10000);
    bool chain = value_or<bool>(g, "chain", true);
    GameOptions base;
    base.mode = parse_mode(value_or<std::string>(g, "mode", "auto"));
    base.exact_instances = value_or<size_t>(g, "exact_instances", 64);
    if (g.contains("budget")) {
        base.budget = g.at("budget").get<size_t>();
    }
    for (const auto &p : pirates) {
        pirate_by_name(p);
    }

    // Registry additions happen here, before any grid point runs.
    std::shared_ptr<const SetupAuthority> authority;
    for (const auto &[a, b] : verifiers) {
        if (a == "npcand" || b == "npcand") {
            if (a != b) {
                throw std::invalid_argument("grid.verifiers: npcand can only be paired with itself");
            }
            if (!authority) {
                authority = std::make_shared<const SetupAuthority>(child_seed(cfg.seed, 0xA17));
                register_candidate_verifier(authority);
            }
        }
        VerifierRegistry::global().get(a);
        VerifierRegistry::global().get(b);
    }

    for (size_t n : ns) {
        if (n == 0 || n % 2 != 0) {
            skip(plan, "piracy n=" + str(n) + ": n must be positive and even");
            continue;
        }
        if (2 * n > caps().joint_qubits) {
            skip(plan, "piracy n=" + str(n) + ": joint register above the cap");
            continue;
        }
        for (const auto &[v1, v2] : verifiers) {
            if (v1 == "npcand" && n % 4 != 0) {
                skip(plan, "piracy n=" + str(n) + " npcand: n must be a multiple of 4");
                continue;
            }
            for (const auto &pname : pirates) {
                std::string key = "n=" + pad(n) + "/v1=" + v1 + "/v2=" + v2 + "/pirate=" + pname;
                GameOptions opt = base;
                if (v1 == "npcand") {
                    opt.source = candidate_instance_source(authority);
                }
                std::string a = v1, b = v2;
                plan.points.push_back({key, [=](uint64_t seed) {
                                           auto pirate = pirate_by_name(pname);
                                           const auto &pv1 = VerifierRegistry::global().get(a);
                                           const auto &pv2 = VerifierRegistry::global().get(b);
                                           auto game = run_piracy_game(n, pirate, pv1, pv2, trials, seed, opt);
                                           ResultRecord r;
                                           r.key = key;
                                           bool pass = true;
                                           std::string p1 = "", p2 = "", mv = "", mm = "", holds = "";
                                           if (chain) {
                                               auto c = reduction_chain(n, pirate, pv1, pv2, trials, child_seed(seed, 1), opt);
                                               p1 = str(c.p1);
                                               p2 = str(c.p2);
                                               mv = fmt12(c.m_v);
                                               mm = fmt12(c.m_m);
                                               holds = yes_no(c.holds());
                                               pass = pass && c.holds();
                                           }
                                           // Legal pirates without oracle access cannot beat forward-and-pad.
                                           if (!game.illegal && game.queries == 0) {
                                               pass = pass && game.ci_low <= std::pow(2.0, -0.5 * double(n)) + 1e-9;
                                           }
                                           r.values = {str(n),
                                                       pname,
                                                       a,
                                                       b,
                                                       str(game.trials),
                                                       fmt12(game.joint_accept),
                                                       fmt12(game.ci_low),
                                                       fmt12(game.ci_high),
                                                       str(game.queries),
                                                       yes_no(game.exact),
                                                       yes_no(game.illegal),
                                                       p1,
                                                       p2,
                                                       mv,
                                                       mm,
                                                       holds};
                                           r.pass = pass;
                                           return std::vector<ResultRecord>{r};
                                       }});
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------- counterfeit

Plan plan_counterfeit(const ExperimentConfig &cfg) {
    Plan plan;
    plan.columns = {"n",        "attack",    "budget",    "trials",        "successes",       "rate",
                    "ci_low",   "ci_high",   "expected",  "reference",     "within_ci",       "below_reference",
                    "illegal"};
    const auto &g = cfg.grid;
    auto ns = uint_list(g, "n", {8});
    auto attacks = string_list(g, "attacks", {"measure-and-guess"});
    auto budgets = uint_list(g, "budgets", {1, 2, 4, 8, 16});
    size_t trials = value_or<size_t>(g, "trials", 10000);
    auto known = counterfeit_attacks();
    for (const auto &a : attacks) {
        if (std::find(known.begin(), known.end(), a) == known.end()) {
            throw std::invalid_argument("grid.attacks: unknown attack '" + a + "'");
        }
    }
    if (trials == 0) {
        throw std::invalid_argument("grid.trials: must be positive");
    }
    for (size_t n : ns) {
        if (n == 0 || n % 2 != 0 || n > 16) {
            skip(plan, "counterfeit n=" + str(n) + ": n must be even and at most 16");
            continue;
        }
        if (budgets.empty()) {
            continue;
        }
        for (const auto &attack : attacks) {
            std::string key = "n=" + pad(n) + "/attack=" + attack;
            plan.points.push_back({key, [=](uint64_t seed) {
                                       auto curve = counterfeit_experiment(n, attack, budgets, trials, seed, 1);
                                       std::vector<ResultRecord> out;
                                       for (const auto &p : curve.points) {
                                           ResultRecord r;
                                           r.key = key + "/budget=" + pad(p.budget);
                                           r.values = {str(n),
                                                       attack,
                                                       str(p.budget),
                                                       str(p.trials),
                                                       str(p.successes),
                                                       fmt12(p.rate),
                                                       fmt12(p.ci.low),
                                                       fmt12(p.ci.high),
                                                       p.expected ? fmt12(*p.expected) : "",
                                                       fmt12(p.reference),
                                                       yes_no(p.within_ci()),
                                                       yes_no(p.below_reference()),
                                                       yes_no(curve.illegal)};
                                           r.pass = p.within_ci() && (curve.illegal || p.below_reference());
                                           out.push_back(r);
                                       }
                                       return out;
                                   }});
        }
    }
    return plan;
}

// ---------------------------------------------------------------- calculus

Plan plan_calculus(const ExperimentConfig &cfg) {
    Plan plan;
    plan.columns = {"section", "item", "claimed_c", "claimed_s", "measured_c", "measured_s", "flags"};
    const auto &g = cfg.grid;
    json pipelines = g.contains("pipelines") ? g.at("pipelines") : json::array({{{"preset", "projective"}, {"k", 2}, {"p", 1}}});
    PipelineOptions popt;
    popt.q = value_or<size_t>(g, "q", 3);
    popt.ell_amplify = value_or<size_t>(g, "ell_amplify", 2);
    popt.ell_repeat = value_or<size_t>(g, "ell_repeat", 1);
    popt.product_max.restarts = value_or<size_t>(g, "restarts", 16);
    bool grid_on = value_or<bool>(g, "amplification_grid", true);
    json sweep = g.contains("useful_sweep") ? g.at("useful_sweep") : json{{"dims", {2, 3, 4}}, {"instances", 1000}};
    auto dims = uint_list(sweep, "dims", {2, 3, 4});
    size_t sweep_instances = value_or<size_t>(sweep, "instances", 1000);

    auto pipeline_reports = std::make_shared<std::vector<json>>(pipelines.size());
    size_t slot = 0;
    for (const auto &p : pipelines) {
        std::string preset = value_or<std::string>(p, "preset", "projective");
        size_t k = value_or<size_t>(p, "k", 2);
        size_t pp = value_or<size_t>(p, "p", 1);
        if (preset != "projective" && preset != "perfect") {
            throw std::invalid_argument("grid.pipelines: unknown preset '" + preset + "'");
        }
        if (k < 2 || k > 3 || pp < 1 || pp > 2) {
            skip(plan, "pipeline " + preset + " k=" + str(k) + " p=" + str(pp) + ": exact evaluation needs 2 <= k <= 3 and 1 <= p <= 2");
            continue;
        }
        std::string key = "a/pipeline=" + preset + "/k=" + pad(k) + "/p=" + pad(pp);
        size_t mine = slot++;
        plan.points.push_back({key, [=](uint64_t seed) {
                                   auto v = toy_preset(preset, k, pp);
                                   PipelineOptions o = popt;
                                   o.product_max.seed = seed;
                                   std::vector<ResultRecord> out;
                                   PipelineReport rep;
                                   try {
                                       rep = compose_theorem_pipeline(v, default_cloners(v), o);
                                   } catch (const StageError &e) {
                                       ResultRecord r;
                                       r.key = key + "/error";
                                       r.values = {"pipeline", preset + " k=" + str(k) + " p=" + str(pp) + " " + e.stage(), "", "", "", "", e.what()};
                                       r.pass = false;
                                       (*pipeline_reports)[mine] = json{{"preset", preset}, {"k", k}, {"p", pp}, {"error", e.what()}, {"stage", e.stage()}};
                                       return std::vector<ResultRecord>{r};
                                   }
                                   json pj = rep.to_json();
                                   pj["preset"] = preset;
                                   pj["k"] = k;
                                   pj["p"] = pp;
                                   (*pipeline_reports)[mine] = pj;
                                   size_t i = 0;
                                   for (const auto &st : rep.stages) {
                                       ResultRecord r;
                                       r.key = key + "/stage=" + pad(i++);
                                       std::string flags;
                                       for (const auto &f : st.flags) {
                                           flags += (flags.empty() ? "" : "|") + f;
                                       }
                                       std::replace(flags.begin(), flags.end(), ',', ';');
                                       r.values = {"pipeline " + preset + " k=" + str(k) + " p=" + str(pp),
                                                   st.stage,
                                                   fmt12(st.claimed_c),
                                                   fmt12(st.claimed_s),
                                                   fmt12(st.measured_c),
                                                   fmt12(st.measured_s),
                                                   flags};
                                       r.pass = st.pass();
                                       out.push_back(r);
                                   }
                                   return out;
                               }});
    }
    if (grid_on) {
        plan.points.push_back({"b/amplification", [](uint64_t) {
                                   std::vector<ResultRecord> out;
                                   size_t i = 0;
                                   for (const auto &pt : amplification_grid()) {
                                       ResultRecord r;
                                       r.key = "b/amplification/" + pad(i++);
                                       std::ostringstream item;
                                       item << "c=" << fmt12(pt.c) << " s=" << fmt12(pt.s) << " q=" << pt.q << " l=" << pt.ell
                                            << " m=" << pt.copies << " t=" << pt.threshold;
                                       r.values = {"amplification", item.str(), fmt12(pt.bound), "", fmt12(pt.completeness), "", ""};
                                       r.pass = pt.pass();
                                       out.push_back(r);
                                   }
                                   return out;
                               }});
    }
    for (size_t d : dims) {
        if (d < 2 || d * d > caps().dense_dim) {
            skip(plan, "useful bound d=" + str(d) + ": needs 2 <= d and d^2 within the dense cap");
            continue;
        }
        std::string key = "c/useful/d=" + pad(d);
        plan.points.push_back({key, [=](uint64_t seed) {
                                   Rng rng(seed);
                                   size_t fails = 0, flagged = 0;
                                   double worst = 0;
                                   ProductMaxOptions po;
                                   po.restarts = 8;
                                   for (size_t i = 0; i < sweep_instances; i++) {
                                       auto m = (i % 2 == 0) ? random_psd_contraction(d * d, rng) : random_separable_contraction(d, d, 3, rng);
                                       po.seed = child_seed(seed, i);
                                       auto pm = product_max(m, {d, d}, po);
                                       auto rep = check_useful_bound(m, d, pm.value, pm.gap_estimate);
                                       fails += rep.status == BoundStatus::Fail;
                                       flagged += rep.status == BoundStatus::Flagged;
                                       worst = std::max(worst, rep.bound > 0 ? rep.lambda_max / rep.bound : 0.0);
                                   }
                                   ResultRecord r;
                                   r.key = key;
                                   std::ostringstream item;
                                   item << "d=" << d << " instances=" << sweep_instances << " fail=" << fails << " flagged=" << flagged;
                                   r.values = {"useful_bound", item.str(), "1", "", fmt12(worst), "", flagged ? "flagged" : ""};
                                   r.pass = fails == 0;
                                   return std::vector<ResultRecord>{r};
                               }});
    }
    plan.finish = [pipeline_reports](RunResult &result, uint64_t) {
        json arr = json::array();
        for (const auto &p : *pipeline_reports) {
            if (!p.is_null()) {
                arr.push_back(p);
            }
        }
        result.extra["pipelines"] = arr;
    };
    return plan;
}

// ---------------------------------------------------------------- npcand

std::string random_even_parity(size_t len, Rng &rng) {
    std::string x(len, '0');
    size_t ones = 0;
    for (size_t i = 0; i + 1 < len; i++) {
        if (rng() & 1) {
            x[i] = '1';
            ones++;
        }
    }
    if (ones % 2) {
        x[len - 1] = '1';
    }
    return x;
}

Plan plan_npcand(const ExperimentConfig &cfg) {
    Plan plan;
    plan.columns = {"n", "relation", "instances", "honest_min", "zero_state", "zero_state_expected", "piracy_max_legal", "piracy_forward_and_pad"};
    const auto &g = cfg.grid;
    auto ns = uint_list(g, "n", {4, 8, 12});
    std::string relation = value_or<std::string>(g, "relation", "parity");
    if (relation != "parity") {
        throw std::invalid_argument("grid.relation: only 'parity' has a random instance generator");
    }
    size_t instances = value_or<size_t>(g, "instances", 20);
    bool piracy = value_or<bool>(g, "piracy", true);
    auto authority = std::make_shared<const SetupAuthority>(child_seed(cfg.seed, 0xA17));
    if (piracy) {
        register_candidate_verifier(authority);
    }
    for (size_t n : ns) {
        if (n == 0 || n % 4 != 0 || 2 * n > caps().joint_qubits) {
            skip(plan, "npcand n=" + str(n) + ": n must be a positive multiple of 4 within the joint cap");
            continue;
        }
        std::string key = "n=" + pad(n);
        plan.points.push_back({key, [=](uint64_t seed) {
                                   Rng rng(seed);
                                   auto rel = relation_by_name(relation);
                                   double honest = 1, zero = 0;
                                   double expected = std::pow(2.0, -0.5 * double(n));
                                   bool pass = true;
                                   for (size_t i = 0; i < instances; i++) {
                                       std::string x = random_even_parity(8, rng);
                                       auto proof = candidate_prove(x, "", rel, n, child_seed(seed, i), *authority);
                                       auto rep = candidate_verify(x, proof, *authority);
                                       honest = std::min(honest, rep.result.accept_probability);
                                       pass = pass && rep.transcript_ok && std::abs(rep.result.accept_probability - 1) <= 1e-9;
                                       proof.state = PureState::basis(n, 0);
                                       double z = candidate_verify(x, proof, *authority).result.accept_probability;
                                       zero = std::max(zero, z);
                                       pass = pass && std::abs(z - expected) <= 1e-9;
                                   }
                                   std::string legal_max, fwd;
                                   if (piracy) {
                                       const auto &v = VerifierRegistry::global().get("npcand");
                                       GameOptions opt;
                                       opt.mode = GameOptions::Mode::Exact;
                                       opt.exact_instances = std::max<size_t>(1, std::min<size_t>(instances, 8));
                                       opt.source = candidate_instance_source(authority);
                                       double worst = 0, f = 0;
                                       for (const auto &name : pirate_names()) {
                                           auto p = pirate_by_name(name);
                                           if (p.illegal || p.default_budget > 0) {
                                               continue;
                                           }
                                           auto game = run_piracy_game(n, p, v, v, opt.exact_instances, child_seed(seed, 1u << 20), opt);
                                           worst = std::max(worst, game.joint_accept);
                                           if (name == "forward-and-pad") {
                                               f = game.joint_accept;
                                           }
                                       }
                                       legal_max = fmt12(worst);
                                       fwd = fmt12(f);
                                       pass = pass && worst <= expected + 1e-9;
                                   }
                                   ResultRecord r;
                                   r.key = key;
                                   r.values = {str(n), relation, str(instances), fmt12(instances ? honest : 0), fmt12(zero), fmt12(expected), legal_max, fwd};
                                   r.pass = pass;
                                   return std::vector<ResultRecord>{r};
                               }});
    }
    return plan;
}

std::string csv_cell(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); i++) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                i++;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw std::runtime_error("unterminated quoted field");
    }
    out.push_back(cur);
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json &j) {
    if (!j.is_object()) {
        throw std::invalid_argument("config: expected a JSON object");
    }
    for (const auto &[k, v] : j.items()) {
        if (k != "experiment" && k != "seed" && k != "jobs" && k != "out" && k != "grid") {
            throw std::invalid_argument("config: unknown key '" + k + "'");
        }
    }
    ExperimentConfig c;
    if (!j.contains("experiment") || !j.at("experiment").is_string()) {
        throw std::invalid_argument("config.experiment: required string");
    }
    c.experiment = j.at("experiment");
    const auto &schema = grid_schema();
    auto it = schema.find(c.experiment);
    if (it == schema.end()) {
        throw std::invalid_argument("config.experiment: unknown kind '" + c.experiment + "'");
    }
    if (j.contains("seed")) {
        if (!is_uint(j.at("seed"))) {
            throw std::invalid_argument("config.seed: expected a nonnegative integer");
        }
        c.seed = j.at("seed").get<uint64_t>();
    }
    if (j.contains("jobs")) {
        if (!is_uint(j.at("jobs")) || j.at("jobs").get<size_t>() == 0) {
            throw std::invalid_argument("config.jobs: expected a positive integer");
        }
        c.jobs = j.at("jobs").get<size_t>();
    }
    if (j.contains("out")) {
        if (!j.at("out").is_string()) {
            throw std::invalid_argument("config.out: expected a string");
        }
        c.out = j.at("out");
    }
    if (j.contains("grid")) {
        if (!j.at("grid").is_object()) {
            throw std::invalid_argument("config.grid: expected an object");
        }
        c.grid = j.at("grid");
    }
    for (const auto &[k, v] : c.grid.items()) {
        auto f = it->second.find(k);
        if (f == it->second.end()) {
            throw std::invalid_argument("grid: unknown key '" + k + "' for experiment " + c.experiment);
        }
        check_field(k, v, f->second);
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    return json{{"experiment", experiment}, {"seed", seed}, {"jobs", jobs}, {"out", out}, {"grid", grid}};
}

std::string ExperimentConfig::digest() const {
    // jobs and out do not change results.
    std::string s = json{{"experiment", experiment}, {"seed", seed}, {"grid", grid}}.dump();
    if (sodium_init() < 0) {
        throw std::runtime_error("libsodium initialization failed");
    }
    unsigned char h[8];
    crypto_generichash(h, sizeof h, reinterpret_cast<const unsigned char *>(s.data()), s.size(), nullptr, 0);
    char hex[2 * sizeof h + 1];
    sodium_bin2hex(hex, sizeof hex, h, sizeof h);
    return hex;
}

uint64_t grid_point_seed(uint64_t master, size_t index) {
    return child_seed(master, index);
}

bool RunResult::ok() const {
    for (const auto &r : records) {
        if (r.asserted && !r.pass) {
            return false;
        }
    }
    return true;
}

RunResult run_experiment(const ExperimentConfig &cfg) {
    auto t0 = std::chrono::steady_clock::now();
    Plan plan;
    if (cfg.experiment == "soundness") {
        plan = plan_soundness(cfg);
    } else if (cfg.experiment == "piracy") {
        plan = plan_piracy(cfg);
    } else if (cfg.experiment == "counterfeit") {
        plan = plan_counterfeit(cfg);
    } else if (cfg.experiment == "calculus") {
        plan = plan_calculus(cfg);
    } else if (cfg.experiment == "npcand") {
        plan = plan_npcand(cfg);
    } else {
        throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
    }
    std::vector<std::vector<ResultRecord>> slots(plan.points.size());
    parallel_for(plan.points.size(), cfg.jobs, [&](size_t i) {
        slots[i] = plan.points[i].run(grid_point_seed(cfg.seed, i));
    });
    RunResult result;
    result.experiment = cfg.experiment;
    result.columns = plan.columns;
    result.skipped = plan.skipped;
    for (auto &s : slots) {
        for (auto &r : s) {
            result.records.push_back(std::move(r));
        }
    }
    std::stable_sort(result.records.begin(), result.records.end(), [](const ResultRecord &a, const ResultRecord &b) {
        return a.key < b.key;
    });
    if (plan.finish) {
        plan.finish(result, cfg.seed);
    }
    result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_csv(std::ostream &out, const RunResult &r, const ExperimentConfig &cfg, const std::string &timestamp) {
    std::string digest = cfg.digest();
    out << "# sublab " << r.experiment << " results, generated " << timestamp << "\n";
    out << "# config_digest=" << digest << " seed=" << cfg.seed << " runtime_s=" << fmt12(r.runtime_s) << "\n";
    for (const auto &s : r.skipped) {
        out << "# skipped: " << s << "\n";
    }
    for (const auto &c : r.columns) {
        out << c << ",";
    }
    out << "pass,config_digest,seed\n";
    for (const auto &rec : r.records) {
        for (const auto &v : rec.values) {
            out << csv_cell(v) << ",";
        }
        out << (rec.asserted ? yes_no(rec.pass) : "") << "," << digest << "," << cfg.seed << "\n";
    }
}

nlohmann::ordered_json result_json(const RunResult &r, const ExperimentConfig &cfg, const std::string &timestamp) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["generated"] = timestamp;
    j["config"] = cfg.to_json();
    j["config_digest"] = cfg.digest();
    j["seed"] = cfg.seed;
    j["runtime_s"] = r.runtime_s;
    j["skipped"] = r.skipped;
    j["pass"] = r.ok();
    auto recs = nlohmann::ordered_json::array();
    for (const auto &rec : r.records) {
        nlohmann::ordered_json o;
        o["key"] = rec.key;
        for (size_t i = 0; i < r.columns.size() && i < rec.values.size(); i++) {
            o[r.columns[i]] = rec.values[i];
        }
        if (rec.asserted) {
            o["pass"] = rec.pass;
        }
        recs.push_back(o);
    }
    j["records"] = recs;
    for (const auto &[k, v] : r.extra.items()) {
        j[k] = v;
    }
    return j;
}

void write_result_file(const std::string &path, const RunResult &r, const ExperimentConfig &cfg) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    std::string ts = timestamp_now();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        out << result_json(r, cfg, ts).dump(2) << "\n";
    } else {
        write_csv(out, r, cfg, ts);
    }
    if (!out) {
        throw std::runtime_error("error writing " + path);
    }
}

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string render(const Table &t) {
    std::vector<size_t> w(t.header.size(), 0);
    for (size_t i = 0; i < t.header.size(); i++) {
        w[i] = t.header[i].size();
    }
    for (const auto &row : t.rows) {
        for (size_t i = 0; i < row.size() && i < w.size(); i++) {
            w[i] = std::max(w[i], row[i].size());
        }
    }
    std::ostringstream s;
    auto line = [&](const std::vector<std::string> &cells) {
        for (size_t i = 0; i < w.size(); i++) {
            std::string c = i < cells.size() ? cells[i] : "";
            s << (i ? "  " : "") << c << std::string(w[i] - c.size(), ' ');
        }
        s << "\n";
    };
    line(t.header);
    std::vector<std::string> rule;
    for (size_t x : w) {
        rule.push_back(std::string(x, '-'));
    }
    line(rule);
    for (const auto &row : t.rows) {
        line(row);
    }
    return s.str();
}

/// Failures first; order otherwise preserved.
void failures_first(Table &t, size_t pass_col) {
    std::stable_partition(t.rows.begin(), t.rows.end(), [&](const std::vector<std::string> &r) {
        return pass_col < r.size() && r[pass_col] == "false";
    });
}

std::string base_name(const std::string &path) {
    auto pos = path.find_last_of('/');
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

void report_pipeline(const nlohmann::ordered_json &p, const std::string &title, ReportOutput &out) {
    if (p.contains("error")) {
        out.all_pass = false;
        out.text += title + ": FAILED at stage " + p.value("stage", std::string("?")) + ": " + p.value("error", std::string()) + "\n\n";
        return;
    }
    if (!p.contains("stages") || !p.at("stages").is_array()) {
        throw std::runtime_error(title + ": pipeline report without stages");
    }
    Table t;
    t.header = {"stage", "pass", "claimed_c", "claimed_s", "measured_c", "measured_s"};
    for (const auto &st : p.at("stages")) {
        if (!st.contains("stage") || !st.contains("pass") || !st.contains("claimed") || !st.contains("measured")) {
            throw std::runtime_error(title + ": malformed stage entry");
        }
        bool pass = st.at("pass").get<bool>();
        out.all_pass = out.all_pass && pass;
        t.rows.push_back({st.at("stage").get<std::string>(),
                          yes_no(pass),
                          fmt12(st.at("claimed").at("c").get<double>()),
                          fmt12(st.at("claimed").at("s").get<double>()),
                          fmt12(st.at("measured").at("c").get<double>()),
                          fmt12(st.at("measured").at("s").get<double>())});
    }
    failures_first(t, 1);
    out.text += title + "\n" + render(t) + "\n";
}

void report_csv(const std::string &path, std::istream &in, ReportOutput &out) {
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string kind;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const std::string tag = "# sublab ";
            if (line.rfind(tag, 0) == 0) {
                kind = line.substr(tag.size(), line.find(' ', tag.size()) - tag.size());
            }
            continue;
        }
        auto cells = split_csv_line(line);
        if (header.empty()) {
            header = cells;
        } else {
            if (cells.size() != header.size()) {
                throw std::runtime_error(path + ": row with " + std::to_string(cells.size()) + " cells, header has " +
                                         std::to_string(header.size()));
            }
            rows.push_back(cells);
        }
    }
    if (header.empty()) {
        throw std::runtime_error(path + ": no CSV header");
    }
    auto col = [&](const std::string &name) -> std::optional<size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            return std::nullopt;
        }
        return size_t(it - header.begin());
    };
    // Drop the bookkeeping columns from the table.
    std::vector<size_t> keep;
    for (size_t i = 0; i < header.size(); i++) {
        if (header[i] != "config_digest" && header[i] != "seed") {
            keep.push_back(i);
        }
    }
    Table shown;
    for (size_t i : keep) {
        shown.header.push_back(header[i]);
    }
    for (const auto &r : rows) {
        std::vector<std::string> v;
        for (size_t i : keep) {
            v.push_back(r[i]);
        }
        shown.rows.push_back(v);
    }
    size_t fails = 0;
    if (auto pc = col("pass")) {
        for (const auto &r : rows) {
            fails += r[*pc] == "false";
        }
        auto it = std::find(shown.header.begin(), shown.header.end(), "pass");
        failures_first(shown, size_t(it - shown.header.begin()));
    }
    out.all_pass = out.all_pass && fails == 0;
    out.text += base_name(path) + (kind.empty() ? "" : " (" + kind + ")") + ": " + std::to_string(rows.size()) + " records, " +
                std::to_string(fails) + " failed\n" + render(shown) + "\n";

    // Counterfeit success vs budget, one series per attack, against the reference.
    auto budget = col("budget"), rate = col("rate"), lo = col("ci_low"), hi = col("ci_high"), ref = col("reference"),
         attack = col("attack");
    if (budget && rate && lo && hi && ref && attack) {
        std::map<std::string, std::vector<std::vector<std::string>>> by_attack;
        for (const auto &r : rows) {
            by_attack[r[*attack]].push_back(r);
        }
        std::ostringstream s;
        s << "series,x,y,ci_low,ci_high,reference\n";
        for (auto &[a, rs] : by_attack) {
            std::sort(rs.begin(), rs.end(), [&](const auto &x, const auto &y) {
                return std::stoull(x[*budget]) < std::stoull(y[*budget]);
            });
            for (const auto &r : rs) {
                s << a << "," << r[*budget] << "," << r[*rate] << "," << r[*lo] << "," << r[*hi] << "," << r[*ref] << "\n";
            }
        }
        out.series.emplace_back(base_name(path) + ".series.csv", s.str());
    }
}

}  // namespace

ReportOutput build_report(const std::vector<std::string> &files) {
    ReportOutput out;
    for (const auto &path : files) {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot read " + path);
        }
        bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
        if (!is_json) {
            report_csv(path, in, out);
            continue;
        }
        nlohmann::ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::ordered_json::parse_error &e) {
            throw std::runtime_error(path + ": " + e.what());
        }
        if (!j.is_object()) {
            throw std::runtime_error(path + ": expected a JSON object");
        }
        if (j.contains("stages")) {
            report_pipeline(j, base_name(path), out);
            continue;
        }
        if (!j.contains("records") || !j.contains("experiment")) {
            throw std::runtime_error(path + ": not a sublab result file");
        }
        if (j.contains("pipelines")) {
            for (const auto &p : j.at("pipelines")) {
                report_pipeline(p, base_name(path) + " pipeline " + p.value("preset", std::string()) + " k=" +
                                       std::to_string(p.value("k", 0)) + " p=" + std::to_string(p.value("p", 0)),
                                out);
            }
        }
        // Flatten records into a CSV-shaped table.
        std::vector<std::string> header;
        for (const auto &rec : j.at("records")) {
            for (const auto &[k, v] : rec.items()) {
                if (k != "key" && std::find(header.begin(), header.end(), k) == header.end()) {
                    header.push_back(k);
                }
            }
        }
        std::ostringstream csv;
        csv << "# sublab " << j.at("experiment").get<std::string>() << " results\n";
        for (size_t i = 0; i < header.size(); i++) {
            csv << (i ? "," : "") << header[i];
        }
        csv << "\n";
        for (const auto &rec : j.at("records")) {
            for (size_t i = 0; i < header.size(); i++) {
                std::string cell;
                if (rec.contains(header[i])) {
                    const auto &v = rec.at(header[i]);
                    cell = v.is_string() ? v.get<std::string>() : v.dump();
                }
                csv << (i ? "," : "") << csv_cell(cell);
            }
            csv << "\n";
        }
        std::istringstream again(csv.str());
        report_csv(path, again, out);
    }
    return out;
}

}  // namespace sublab
