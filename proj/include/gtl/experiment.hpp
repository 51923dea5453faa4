// Copyright 2026 The GNN Transfer Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment orchestration behind the CLI subcommands.
//
// Pretrain output directory:
//   config.json, curves.csv, runs.json, summary.json,
//   run_<i>/checkpoint/{meta.json, weights.bin}
// Transfer output directory:
//   config.json, base/curves.csv, transfer/curves.csv, metrics.csv,
//   runs.json, summary.json
// curves.csv columns: run,epoch,split,metric,value
// metrics.csv columns: run,seed,transfer_ratio,jumpstart,asymptotic

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtl/config.hpp"
#include "gtl/train.hpp"

namespace gtl {

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  SplitCurves curves;
  std::filesystem::path checkpoint;  // empty when none was written
  double wall_seconds = 0.0;
};

/// Seed of run i: base seed + i. Streams for init, dropout and batching are
/// forked from it, so paired arms see identical randomness.
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run);

struct PretrainResult {
  std::vector<RunRecord> runs;
};

/// Trains `runs` models on config.dataset (after optional damage / label
/// permutation) and writes a checkpoint per run.
PretrainResult run_pretrain(const ExperimentConfig& config);

/// Welch comparison of one transfer metric against the control experiment.
struct ControlTest {
  std::string metric;
  double p = 0.0;  // NaN when the test was degenerate
  double t = 0.0;
  bool significant = false;
};

struct TransferResult {
  std::vector<RunRecord> base;
  std::vector<RunRecord> transfer;
  std::vector<TransferMetrics> metrics;  // per pair, computed on test curves
  std::vector<ControlTest> control;      // empty without a control
};

/// Paired base and transfer arms on config.dataset. Run i of both arms uses
/// run_seed(config, i); the transfer model is built from the same
/// initialisation before the source layers are copied in.
TransferResult run_transfer(const ExperimentConfig& config);

/// Runs fn(0..n-1) on up to `threads` worker threads. Rethrows the first
/// failure by index after all workers finish.
void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

void write_curves_csv(const std::filesystem::path& file, const std::vector<RunRecord>& runs);
/// Reads the rows for `split` back into one curve per run.
std::vector<LearningCurve> read_curves_csv(const std::filesystem::path& file, Split split);

void write_metrics_csv(const std::filesystem::path& file, const std::vector<RunRecord>& runs,
                       const std::vector<TransferMetrics>& metrics);
/// Per-run transfer metrics from a transfer output directory's metrics.csv.
std::vector<TransferMetrics> read_metrics_csv(const std::filesystem::path& file);

/// {modularity, within_inertia, I_S, I_A}; fields that do not apply to the
/// dataset kind are null.
nlohmann::json dataset_metrics(const Dataset& data);

/// Generates the dataset, writes it to config.output together with
/// generation.json (config and measured metrics), and returns the sidecar.
nlohmann::json run_generate(const GenerationConfig& config);

}  // namespace gtl
