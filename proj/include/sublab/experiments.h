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

#ifndef SUBLAB_EXPERIMENTS_H
#define SUBLAB_EXPERIMENTS_H

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sublab {

/// One experiment run: kind, parameter grid, master seed and output path.
///
/// File format (JSON):
///   {"experiment": "soundness" | "piracy" | "counterfeit" | "calculus" | "npcand",
///    "seed": 42, "jobs": 1, "out": "results.csv", "grid": {...}}
/// Grid keys per kind are listed in configs/README.md; unknown keys are
/// rejected.
struct ExperimentConfig {
    std::string experiment;
    uint64_t seed = 1;
    size_t jobs = 1;
    std::string out;
    nlohmann::json grid = nlohmann::json::object();

    /// Validates the schema; throws std::invalid_argument naming the problem.
    static ExperimentConfig from_json(const nlohmann::json &j);
    static ExperimentConfig load(const std::string &path);
    nlohmann::json to_json() const;
    /// Short hex digest of the canonical JSON form.
    std::string digest() const;
};

/// Grid point seeds: child_seed(master, index of the point in canonical
/// grid order).
uint64_t grid_point_seed(uint64_t master, size_t index);

struct ResultRecord {
    /// Canonical grid-point key; records are ordered by it.
    std::string key;
    /// Values in column order, already formatted.
    std::vector<std::string> values;
    /// Whether this record carries an asserted bound, and its outcome.
    bool asserted = true;
    bool pass = true;
};

struct RunResult {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<ResultRecord> records;
    /// Grid points skipped for failing a precondition, with reasons.
    std::vector<std::string> skipped;
    /// Structured output some experiments add (pipeline reports).
    nlohmann::json extra = nlohmann::json::object();
    double runtime_s = 0;

    bool ok() const;
};

/// Executes the grid. Points run concurrently on cfg.jobs threads; records
/// come back in canonical order.
RunResult run_experiment(const ExperimentConfig &cfg);

/// UTC time, ISO 8601.
std::string timestamp_now();

/// CSV: '#' comment lines (timestamp, config digest, seed, runtime, skipped
/// points), then a header and one row per record with trailing pass,
/// config_digest and seed columns.
void write_csv(std::ostream &out, const RunResult &r, const ExperimentConfig &cfg, const std::string &timestamp);
nlohmann::ordered_json result_json(const RunResult &r, const ExperimentConfig &cfg, const std::string &timestamp);
/// Writes JSON when the path ends in ".json", CSV otherwise.
void write_result_file(const std::string &path, const RunResult &r, const ExperimentConfig &cfg);

struct ReportOutput {
    std::string text;
    /// (file name, CSV content) of plot-ready series.
    std::vector<std::pair<std::string, std::string>> series;
    bool all_pass = true;
};

/// Summaries of result files (CSV or JSON as written above, or a pipeline
/// report). Failures are listed first. Throws std::runtime_error on missing
/// or corrupt files.
ReportOutput build_report(const std::vector<std::string> &files);

}  // namespace sublab

#endif
