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

// JSON experiment and generation configs. Unknown keys are rejected.
//
// Experiment config keys (all optional unless noted):
//   label                  row name in reports (default: output dir name)
//   profile                "desk" (epochs 200, runs 5) or "full"
//                          (epochs 2000, runs 10); explicit keys win
//   task                   "node" | "graph"; checked against the dataset
//   model                  "gcn" | "sage" | "gin"
//   num_layers, hidden_dim, epochs, runs, seed, eval_every, batch_size
//   learning_rate          default 0.01 for gcn/sage on synthetic node
//                          tasks, 0.001 otherwise
//   dropout, batch_norm
//   metric                 "accuracy" | "roc_auc"
//   dataset                required: training / target dataset directory
//   protocol               "none" | "fine_tune_reinit" |
//                          "fine_tune_old_layer" | "frozen"
//   source_checkpoint      checkpoint dir, or a pretrain output dir with
//                          run_<i>/checkpoint per run
//   source_dataset         pretrain on this first when no checkpoint is given
//   damage_source          replace source features with N(0, 1) noise
//   permute_source_labels  shuffle source labels before pretraining
//   synthetic              dataset is synthetic (learning-rate default)
//   control                transfer output dir to test against
//   tail, alpha, threads, output (required)
// Relative paths are resolved against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gtl/eval.hpp"
#include "gtl/gnn.hpp"
#include "gtl/synth.hpp"

namespace gtl {

enum class Protocol { kNone, kFineTuneReinit, kFineTuneOldLayer, kFrozen };

std::string_view protocol_name(Protocol protocol);
Protocol parse_protocol(std::string_view name);

struct ExperimentConfig {
  std::string label;
  std::optional<TaskKind> task;
  LayerKind model = LayerKind::kGcn;
  std::size_t num_layers = 3;
  std::size_t hidden_dim = 256;
  std::size_t epochs = 2000;
  std::optional<double> learning_rate;
  double dropout = 0.5;
  bool batch_norm = true;
  std::size_t batch_size = 32;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  MetricKind metric = MetricKind::kAccuracy;
  std::filesystem::path dataset;
  Protocol protocol = Protocol::kNone;
  std::filesystem::path source_checkpoint;
  std::filesystem::path source_dataset;
  bool damage_source = false;
  bool permute_source_labels = false;
  bool synthetic = true;
  std::filesystem::path control;
  std::size_t tail = 10;
  double alpha = 0.1;
  std::size_t threads = 1;
  std::filesystem::path output;

  /// Explicit value, else the default for (model, task, synthetic).
  double resolved_learning_rate(TaskKind task_kind) const;
  /// Throws InputError on inconsistent settings.
  void validate() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& file);
nlohmann::json to_json(const ExperimentConfig& config);

/// What `generate` should produce: a preset, or an explicit generator config
/// (node configs may carry calibration targets).
struct GenerationConfig {
  std::optional<int> preset;
  std::optional<GraphGenConfig> graph;
  std::optional<NodeGenConfig> node;
  std::optional<double> target_modularity;
  std::optional<double> target_inertia;
  int calibration_seeds = 5;
  std::optional<std::uint64_t> seed;  // overrides the preset/config seed
  std::filesystem::path output;

  void validate() const;
};

GenerationConfig parse_generation_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
GenerationConfig load_generation_config(const std::filesystem::path& file);

nlohmann::json to_json(const GraphGenConfig& config);
nlohmann::json to_json(const NodeGenConfig& config);
GraphGenConfig graph_gen_config_from_json(const nlohmann::json& j);
NodeGenConfig node_gen_config_from_json(const nlohmann::json& j);

/// Parses a JSON file, mapping syntax errors to InputError.
nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace gtl
