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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sublab/cloneable.h"
#include "sublab/common.h"
#include "sublab/experiments.h"
#include "sublab/np_candidate.h"

using namespace sublab;
using nlohmann::json;

namespace {

constexpr int kExitFailedBound = 1;
constexpr int kExitUsage = 2;

struct Common {
    std::string config;
    std::optional<uint64_t> seed;
    std::string out;
    std::optional<size_t> jobs;
};

void add_common(CLI::App *app, Common &c) {
    app->add_option("--config", c.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--out", c.out, "Output file (.csv or .json); stdout when omitted");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

/// Config from --config (or defaults), with explicitly given flags on top.
ExperimentConfig make_config(const std::string &kind, const Common &c, const json &overrides) {
    json j = {{"experiment", kind}};
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        try {
            in >> j;
        } catch (const json::parse_error &e) {
            throw std::invalid_argument("config " + c.config + ": " + e.what());
        }
        if (!j.is_object() || j.value("experiment", std::string()) != kind) {
            throw std::invalid_argument("config " + c.config + " is not a '" + kind + "' experiment");
        }
    }
    if (!j.contains("grid")) {
        j["grid"] = json::object();
    }
    for (const auto &[k, v] : overrides.items()) {
        j["grid"][k] = v;
    }
    if (c.seed) {
        j["seed"] = *c.seed;
    }
    if (c.jobs) {
        j["jobs"] = *c.jobs;
    }
    if (!c.out.empty()) {
        j["out"] = c.out;
    }
    return ExperimentConfig::from_json(j);
}

int run_and_write(const ExperimentConfig &cfg) {
    auto result = run_experiment(cfg);
    if (cfg.out.empty()) {
        write_csv(std::cout, result, cfg, timestamp_now());
    } else {
        write_result_file(cfg.out, result, cfg);
    }
    size_t failed = 0;
    for (const auto &r : result.records) {
        failed += r.asserted && !r.pass;
    }
    std::cerr << cfg.experiment << ": " << result.records.size() << " records, " << failed << " failed, " << result.skipped.size()
              << " skipped, " << fmt12(result.runtime_s) << " s\n";
    return result.ok() ? 0 : kExitFailedBound;
}

template <typename T>
void set_if(json &j, const char *key, const CLI::Option *opt, const T &value) {
    if (opt->count() > 0) {
        j[key] = value;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"sublab: subset-state proofs, piracy games and cloneable-proof calculus"};
    app.require_subcommand(1);
    Common common;
    std::function<int()> action;

    // soundness
    auto *soundness = app.add_subcommand("soundness", "Completeness / soundness sweep of V*");
    add_common(soundness, common);
    std::vector<size_t> s_n;
    std::vector<std::string> s_kinds;
    size_t s_instances = 0;
    std::string s_instance_out;
    auto *s_n_opt = soundness->add_option("--n", s_n, "Qubit counts (multiples of 4)")->delimiter(',');
    auto *s_k_opt = soundness->add_option("--kinds", s_kinds, "YES, NO_AB, NO_BA")->delimiter(',');
    auto *s_i_opt = soundness->add_option("--instances", s_instances, "Instances per grid point");
    auto *s_o_opt = soundness->add_option("--instance-out", s_instance_out, "Per-instance CSV");
    soundness->callback([&] {
        action = [&] {
            json o;
            set_if(o, "n", s_n_opt, s_n);
            set_if(o, "kinds", s_k_opt, s_kinds);
            set_if(o, "instances", s_i_opt, s_instances);
            set_if(o, "instance_out", s_o_opt, s_instance_out);
            return run_and_write(make_config("soundness", common, o));
        };
    });

    // piracy [run]
    auto *piracy = app.add_subcommand("piracy", "Piracy games between pirates and verifier pairs");
    auto *piracy_run = piracy->add_subcommand("run", "Run one or more games");
    std::vector<size_t> p_n;
    std::vector<std::string> p_pirates;
    std::string p_v1 = "vstar", p_v2 = "vstar", p_mode;
    size_t p_trials = 0, p_budget = 0, p_exact = 0;
    bool p_no_chain = false;
    std::vector<CLI::Option *> p_opts;
    for (auto *cmd : {piracy, piracy_run}) {
        add_common(cmd, common);
        p_opts = {cmd->add_option("--n", p_n, "Qubit counts")->delimiter(','),
                  cmd->add_option("--pirate", p_pirates, "Pirate names")->delimiter(','),
                  cmd->add_option("--v1", p_v1, "Verifier on register 1"),
                  cmd->add_option("--v2", p_v2, "Verifier on register 2"),
                  cmd->add_option("--trials", p_trials, "Trials per game"),
                  cmd->add_option("--mode", p_mode, "auto, exact or monte-carlo"),
                  cmd->add_option("--budget", p_budget, "Query budget per oracle"),
                  cmd->add_option("--exact-instances", p_exact, "Instances averaged in exact mode"),
                  cmd->add_flag("--no-chain", p_no_chain, "Skip the reduction chain")};
        cmd->callback([&, cmd, opts = p_opts] {
            if (cmd == piracy && action) {
                return;
            }
            action = [&, opts] {
                json o;
                set_if(o, "n", opts[0], p_n);
                set_if(o, "pirates", opts[1], p_pirates);
                if (opts[2]->count() || opts[3]->count()) {
                    o["verifiers"] = json::array({json::array({p_v1, p_v2})});
                }
                set_if(o, "trials", opts[4], p_trials);
                set_if(o, "mode", opts[5], p_mode);
                set_if(o, "budget", opts[6], p_budget);
                set_if(o, "exact_instances", opts[7], p_exact);
                if (p_no_chain) {
                    o["chain"] = false;
                }
                return run_and_write(make_config("piracy", common, o));
            };
        });
    }

    // counterfeit
    auto *counterfeit = app.add_subcommand("counterfeit", "Counterfeiting success versus query budget");
    add_common(counterfeit, common);
    std::vector<size_t> c_n, c_budgets;
    std::vector<std::string> c_attacks;
    size_t c_trials = 0;
    auto *c_n_opt = counterfeit->add_option("--n", c_n, "Qubit counts (even, <= 16)")->delimiter(',');
    auto *c_a_opt = counterfeit->add_option("--attack", c_attacks, "measure-and-guess, grover, both-copies")->delimiter(',');
    auto *c_b_opt = counterfeit->add_option("--budgets", c_budgets, "Query budgets")->delimiter(',');
    auto *c_t_opt = counterfeit->add_option("--trials", c_trials, "Trials per budget");
    counterfeit->callback([&] {
        action = [&] {
            json o;
            set_if(o, "n", c_n_opt, c_n);
            set_if(o, "attacks", c_a_opt, c_attacks);
            set_if(o, "budgets", c_b_opt, c_budgets);
            set_if(o, "trials", c_t_opt, c_trials);
            return run_and_write(make_config("counterfeit", common, o));
        };
    });

    // calculus [pipeline | grid | useful]
    auto *calculus = app.add_subcommand("calculus", "Cloneable-proof calculus");
    add_common(calculus, common);
    calculus->callback([&] {
        if (!action) {
            action = [&] {
                return run_and_write(make_config("calculus", common, json::object()));
            };
        }
    });
    auto *pipeline = calculus->add_subcommand("pipeline", "Compose the four transforms on a toy verifier");
    add_common(pipeline, common);
    size_t k = 2, p = 1, q = 3, ell_amplify = 2, ell_repeat = 1, restarts = 16;
    std::string preset = "projective";
    pipeline->add_option("--k", k, "Number of proofs");
    pipeline->add_option("--p", p, "Qubits per proof");
    pipeline->add_option("--preset", preset, "projective or perfect");
    pipeline->add_option("--q", q, "Amplification parameter q");
    pipeline->add_option("--ell-amplify", ell_amplify, "Amplification rounds");
    pipeline->add_option("--ell-repeat", ell_repeat, "Sequential repetitions");
    pipeline->add_option("--restarts", restarts, "See-saw restarts");
    pipeline->callback([&] {
        action = [&] {
            json o = {{"pipelines", json::array({{{"preset", preset}, {"k", k}, {"p", p}}})},
                      {"q", q},
                      {"ell_amplify", ell_amplify},
                      {"ell_repeat", ell_repeat},
                      {"restarts", restarts},
                      {"amplification_grid", false},
                      {"useful_sweep", {{"dims", json::array()}}}};
            Common c = common;
            c.config.clear();
            auto cfg = make_config("calculus", c, o);
            auto result = run_experiment(cfg);
            if (result.extra["pipelines"].empty()) {
                throw std::invalid_argument(result.skipped.empty() ? "no pipeline ran" : result.skipped[0]);
            }
            json rep = result.extra["pipelines"][0];
            rep["generated"] = timestamp_now();
            rep["config_digest"] = cfg.digest();
            rep["seed"] = cfg.seed;
            if (cfg.out.empty()) {
                std::cout << rep.dump(2) << "\n";
            } else {
                std::ofstream(cfg.out) << rep.dump(2) << "\n";
            }
            std::cerr << "pipeline " << preset << " k=" << k << " p=" << p << ": " << (result.ok() ? "pass" : "FAIL") << "\n";
            return result.ok() ? 0 : kExitFailedBound;
        };
    });
    auto *grid = calculus->add_subcommand("grid", "Amplification parameter grid");
    add_common(grid, common);
    grid->callback([&] {
        action = [&] {
            json o = {{"pipelines", json::array()}, {"useful_sweep", {{"dims", json::array()}}}};
            return run_and_write(make_config("calculus", common, o));
        };
    });
    auto *useful = calculus->add_subcommand("useful", "Random sweep of the useful-operator bound");
    add_common(useful, common);
    std::vector<size_t> u_dims = {2, 3, 4};
    size_t u_instances = 1000;
    useful->add_option("--dims", u_dims, "Local dimensions")->delimiter(',');
    useful->add_option("--instances", u_instances, "Random operators per dimension");
    useful->callback([&] {
        action = [&] {
            json o = {{"pipelines", json::array()},
                      {"amplification_grid", false},
                      {"useful_sweep", {{"dims", u_dims}, {"instances", u_instances}}}};
            return run_and_write(make_config("calculus", common, o));
        };
    });

    // npcand [prove]
    auto *npcand = app.add_subcommand("npcand", "NP-candidate proof system (idealized-primitive mode)");
    add_common(npcand, common);
    std::vector<size_t> n_n;
    size_t n_instances = 0;
    bool n_no_piracy = false;
    auto *n_n_opt = npcand->add_option("--n", n_n, "Qubit counts (multiples of 4)")->delimiter(',');
    auto *n_i_opt = npcand->add_option("--instances", n_instances, "Instances per n");
    npcand->add_flag("--no-piracy", n_no_piracy, "Skip the piracy harness");
    npcand->callback([&] {
        if (!action) {
            action = [&] {
                json o;
                set_if(o, "n", n_n_opt, n_n);
                set_if(o, "instances", n_i_opt, n_instances);
                if (n_no_piracy) {
                    o["piracy"] = false;
                }
                return run_and_write(make_config("npcand", common, o));
            };
        }
    });
    auto *prove = npcand->add_subcommand("prove", "Produce a proof bundle for one statement");
    add_common(prove, common);
    std::string x, witness, relation = "parity", state_out;
    size_t prove_n = 8;
    prove->add_option("--x", x, "Statement")->required();
    prove->add_option("--witness", witness, "NP witness");
    prove->add_option("--relation", relation, "parity or 3sat");
    prove->add_option("--n", prove_n, "Qubits (multiple of 4)");
    prove->add_option("--state-out", state_out, "Where to write the proof state (JSON)");
    prove->callback([&] {
        action = [&] {
            uint64_t seed = common.seed.value_or(1);
            SetupAuthority authority(child_seed(seed, 0xA17));
            auto proof = candidate_prove(x, witness, relation_by_name(relation), prove_n, seed, authority);
            std::string ref = state_out.empty() ? "" : state_out;
            if (!state_out.empty()) {
                std::ofstream(state_out) << proof.state.to_json().dump() << "\n";
            }
            auto bundle = proof_bundle(x, proof, ref);
            auto rep = candidate_verify(x, proof, authority);
            bundle["verification"] = {{"accept_probability", rep.result.accept_probability},
                                      {"transcript_ok", rep.transcript_ok},
                                      {"reason", rep.reason}};
            bundle["seed"] = seed;
            if (common.out.empty()) {
                std::cout << bundle.dump(2) << "\n";
            } else {
                std::ofstream(common.out) << bundle.dump(2) << "\n";
            }
            return rep.transcript_ok && rep.result.accept_probability > 1 - 1e-9 ? 0 : kExitFailedBound;
        };
    });

    // report
    auto *report = app.add_subcommand("report", "Summary tables and plot series from result files");
    std::vector<std::string> files;
    std::string report_out, series_dir;
    report->add_option("files", files, "Result files (CSV or JSON)")->required();
    report->add_option("--out", report_out, "Summary text file; stdout when omitted");
    report->add_option("--series-dir", series_dir, "Directory for plot series (default: beside --out, else .)");
    report->callback([&] {
        action = [&] {
            auto rep = build_report(files);
            if (report_out.empty()) {
                std::cout << rep.text;
            } else {
                std::ofstream(report_out) << rep.text;
            }
            std::filesystem::path dir = !series_dir.empty()     ? std::filesystem::path(series_dir)
                                        : !report_out.empty()   ? std::filesystem::path(report_out).parent_path()
                                                                : std::filesystem::path(".");
            for (const auto &[name, content] : rep.series) {
                auto path = dir / name;
                std::ofstream(path) << content;
                std::cerr << "series: " << path.string() << "\n";
            }
            return rep.all_pass ? 0 : kExitFailedBound;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    try {
        return action ? action() : kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
