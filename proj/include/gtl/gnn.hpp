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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gtl/graph.hpp"
#include "gtl/nn.hpp"

namespace gtl {

enum class LayerKind { kGcn, kSage, kGin };
enum class TaskKind { kNode, kGraph };

std::string_view layer_kind_name(LayerKind kind);
/// Accepts "gcn", "sage" (or "graphsage") and "gin". Throws InputError.
LayerKind parse_layer_kind(std::string_view name);
std::string_view task_kind_name(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

/// Message-passing structure of one graph or of a disjoint-union batch.
///
/// Messages flow along arcs, so node v aggregates over its in-neighbours.
/// For undirected graphs these are simply its neighbours.
class MessageGraph {
 public:
  MessageGraph() = default;
  explicit MessageGraph(const Adjacency& adj);
  /// Disjoint union; graph i owns nodes [offsets[i], offsets[i+1]).
  static MessageGraph batch(std::span<const Adjacency* const> graphs);

  std::size_t num_nodes() const { return renorm_.size(); }
  std::size_t num_graphs() const { return offsets_.size() - 1; }
  std::span<const std::size_t> graph_offsets() const { return offsets_; }

  /// Row v lists every u with an arc u -> v.
  const Adjacency& incoming() const { return incoming_; }
  /// |N_out(v) U N_in(v)| + 1.
  std::span<const double> renormalized_degree() const { return renorm_; }
  /// in-degree(v) + 1.
  std::span<const double> renormalized_in_degree() const { return renorm_in_; }

 private:
  void compute_degrees(const Adjacency& adj);

  Adjacency incoming_;
  std::vector<double> renorm_;
  std::vector<double> renorm_in_;
  std::vector<std::size_t> offsets_{0};
};

/// Neighbourhood aggregation before the weight matrix:
///   GCN:  sum_{u in N(v)+v} h_u / sqrt(d~_u d~_v)
///   SAGE: sum_{u in N(v)+v} h_u / d~in_v
///   GIN:  (1 + eps) h_v + sum_{u in N(v)} h_u
Tensor aggregate(LayerKind kind, const MessageGraph& graph, const Tensor& h, double gin_eps = 0.0);
/// Transpose of aggregate() applied to an upstream gradient.
Tensor aggregate_backward(LayerKind kind, const MessageGraph& graph, const Tensor& d_out,
                          double gin_eps = 0.0);

/// One message-passing layer: aggregate, then multiply by W (no bias).
class GraphConv {
 public:
  GraphConv() = default;
  GraphConv(LayerKind kind, std::size_t in_dim, std::size_t out_dim, const std::string& name);

  /// Glorot-uniform W; GIN eps back to 0.
  void reset_parameters(Rng& rng);

  Tensor forward(const MessageGraph& graph, const Tensor& h);
  /// Accumulates dW (and d eps). Returns dH unless `input_grad` is false, in
  /// which case an empty tensor comes back.
  Tensor backward(const Tensor& dy, bool input_grad = true);

  LayerKind kind() const { return kind_; }
  void collect(std::vector<Parameter*>& out);

  Linear linear;
  Parameter eps;  // 1 x 1, GIN only

 private:
  LayerKind kind_ = LayerKind::kGcn;
  const MessageGraph* graph_ = nullptr;
  Tensor input_;
};

/// Per-graph column means over a disjoint-union batch. Throws InputError on
/// an empty graph.
Tensor mean_pool(const Tensor& h, std::span<const std::size_t> offsets);
Tensor mean_pool_backward(const Tensor& d_pooled, std::span<const std::size_t> offsets);

struct ModelConfig {
  LayerKind kind = LayerKind::kGcn;
  TaskKind task = TaskKind::kNode;
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 256;
  std::size_t out_dim = 0;
  std::size_t num_layers = 3;
  bool batch_norm = true;
  double dropout = 0.5;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// A stack of message-passing blocks (conv -> batch norm -> ReLU -> dropout).
///
/// Node tasks: the last block is a bare conv producing logits. Graph tasks:
/// every block is full, followed by mean pooling and a linear head. The
/// output layer is the last conv or the head respectively; every other
/// parameter belongs to the feature layers.
class GnnModel {
 public:
  GnnModel() = default;
  GnnModel(const ModelConfig& config, Rng& init_rng);

  const ModelConfig& config() const { return config_; }

  /// Node tasks return one row per node, graph tasks one row per graph.
  Tensor forward(const MessageGraph& graph, const Tensor& x, bool train, Rng& dropout_rng);
  /// Evaluation-mode forward (running batch-norm stats, no dropout).
  Tensor predict(const MessageGraph& graph, const Tensor& x);
  /// Backpropagates the gradient of the loss w.r.t. the forward output.
  void backward(const Tensor& d_out);

  /// All parameters in declaration order.
  std::vector<Parameter*> parameters();
  std::vector<Parameter*> output_parameters();

  /// Fresh Glorot-uniform output layer; feature layers untouched.
  void reinit_output_layer(Rng& rng);
  /// Marks every feature-layer parameter non-trainable. Frozen blocks also
  /// run in evaluation mode, so their batch-norm statistics stay fixed.
  void freeze_feature_layers();
  bool feature_layers_frozen() const { return frozen_; }

  /// Copies feature-layer parameters and batch-norm statistics from `source`.
  /// Throws ProtocolError if the layer kinds or feature shapes differ.
  void copy_feature_layers_from(const GnnModel& source);
  /// Copies the output layer. Throws ProtocolError if its shape differs.
  void copy_output_layer_from(const GnnModel& source);

  struct NamedTensor {
    std::string name;
    Tensor* tensor;
  };
  /// Parameters and batch-norm buffers in checkpoint order.
  std::vector<NamedTensor> state();

 private:
  struct Block {
    GraphConv conv;
    BatchNorm bn;
    bool has_bn = false;
    bool activate = false;  // ReLU + dropout
    Relu relu;
    Dropout dropout;
  };
  bool is_output_block(std::size_t i) const {
    return config_.task == TaskKind::kNode && i + 1 == blocks_.size();
  }

  ModelConfig config_;
  std::vector<Block> blocks_;
  Linear head_;
  bool frozen_ = false;
  std::vector<std::size_t> pool_offsets_;
};

/// Checkpoint directory: meta.json (config, seed, tensor names and shapes)
/// and weights.bin (little-endian float64 tensors in state() order).
void save_checkpoint(GnnModel& model, std::uint64_t seed, const std::filesystem::path& dir);
GnnModel load_checkpoint(const std::filesystem::path& dir, std::uint64_t* seed = nullptr);

}  // namespace gtl
