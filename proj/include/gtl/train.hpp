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

#include <array>
#include <cstdint>

#include "gtl/dataset_io.hpp"
#include "gtl/eval.hpp"
#include "gtl/gnn.hpp"

namespace gtl {

TaskKind task_of(const Dataset& data);
int num_classes_of(const Dataset& data);
std::size_t num_features_of(const Dataset& data);

/// Output width for a K-class task: a single logit for K = 2, else K.
std::size_t output_dim_for(int num_classes);

/// Model config matching a dataset's input and output dims.
ModelConfig model_config_for(const Dataset& data, LayerKind kind, std::size_t hidden_dim,
                             std::size_t num_layers, bool batch_norm, double dropout);

/// Shuffles labels across nodes (or graphs), keeping features, structure and
/// splits. Used to build a label-permuted control source.
Dataset permute_labels(Dataset data, Rng& rng);
/// Replaces every feature with an N(0, 1) draw.
Dataset damage_dataset(Dataset data, Rng& rng);

struct TrainOptions {
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;  // graph tasks
  std::size_t eval_every = 1;
  MetricKind metric = MetricKind::kAccuracy;
};

/// One curve per split (indexed by Split).
using SplitCurves = std::array<LearningCurve, 3>;

/// Scores `model` on one split in evaluation mode.
double evaluate(GnnModel& model, const Dataset& data, Split split, MetricKind metric);

/// Trains with Adam on the train split. Every split is evaluated at epoch 0
/// (before any update) and after every `eval_every`-th epoch. `rng` drives
/// dropout and mini-batch order.
SplitCurves train_model(GnnModel& model, const Dataset& data, const TrainOptions& options,
                        Rng& rng);

}  // namespace gtl
