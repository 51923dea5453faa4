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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gtl/rng.hpp"
#include "gtl/tensor.hpp"

namespace gtl {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Compressed sparse row adjacency over out-neighbours. Self-loops are never
/// stored; layers add the self contribution themselves.
///
/// Invariants: offsets is non-decreasing with offsets.back() ==
/// neighbors.size(); each neighbour list is sorted and duplicate-free; an
/// undirected adjacency is symmetric.
class Adjacency {
 public:
  Adjacency() : offsets_(1, 0) {}

  /// Builds from an edge list, dropping duplicates and self-loops. For an
  /// undirected adjacency both directions are inserted. Throws InputError on
  /// an out-of-range index.
  static Adjacency from_edges(std::span<const Edge> edges, std::size_t num_nodes, bool directed);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  /// Stored (directed) arcs. An undirected edge counts twice.
  std::size_t num_arcs() const { return neighbors_.size(); }
  /// Undirected edges (arcs / 2) or directed arcs.
  std::size_t num_edges() const { return directed_ ? num_arcs() : num_arcs() / 2; }
  bool directed() const { return directed_; }

  std::span<const NodeId> neighbors(std::size_t v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t out_degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_arc(NodeId u, NodeId v) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> neighbor_array() const { return neighbors_; }

  /// Each stored edge once: (u, v) with u < v for undirected graphs, every arc
  /// for directed ones.
  std::vector<Edge> edge_list() const;

  /// Reverse adjacency (in-neighbour lists). Identity for undirected graphs.
  Adjacency transposed() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  bool directed_ = false;
};

Adjacency build_adjacency(std::span<const Edge> edges, std::size_t num_nodes, bool directed);

/// Undirected adjacency containing {u, v} iff (u, v) or (v, u) was an arc.
Adjacency symmetrize(const Adjacency& adj);

struct DegreeVector {
  std::vector<std::size_t> out;
  std::vector<std::size_t> in;
  /// Undirected degree: |N_out(v) U N_in(v)|. Equals out == in for an
  /// undirected adjacency.
  std::vector<std::size_t> total;
  /// total + 1 (implicit self-loop).
  std::vector<double> renormalized;
  /// in + 1.
  std::vector<double> renormalized_in;
};

DegreeVector degrees(const Adjacency& adj);

/// Average undirected degree 2|E| / n (0 for an empty graph).
double average_degree(const Adjacency& adj);

enum class Split : std::uint8_t { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view split_name(Split s);
/// Parses "train" / "valid" / "test"; throws FormatError otherwise.
Split parse_split(std::string_view name);

/// Single attributed graph for node classification.
struct NodeGraph {
  Adjacency adj;
  Tensor features;  // num_nodes x num_features
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<Split> split;

  std::size_t num_nodes() const { return adj.num_nodes(); }
  std::size_t num_features() const { return features.cols(); }
  /// Throws InputError when shapes or label ranges are inconsistent.
  void validate() const;

  friend bool operator==(const NodeGraph&, const NodeGraph&) = default;
};

/// One graph of a graph-classification dataset.
struct GraphSample {
  Adjacency adj;
  Tensor features;
  int label = 0;

  friend bool operator==(const GraphSample&, const GraphSample&) = default;
};

struct GraphDataset {
  std::vector<GraphSample> samples;
  int num_classes = 0;
  std::size_t num_features = 0;
  std::vector<Split> split;

  std::size_t size() const { return samples.size(); }
  std::vector<int> labels() const;
  void validate() const;

  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

/// Replaces every feature entry with an independent standard-normal draw.
/// Topology, labels and splits are untouched.
NodeGraph damage_features(NodeGraph graph, Rng& rng);
GraphSample damage_features(GraphSample sample, Rng& rng);
GraphDataset damage_features(GraphDataset dataset, Rng& rng);

/// Stratified split: within each class the members are shuffled and the first
/// 60% go to train, the next 20% to valid, the rest to test. Each tag gets at
/// least one member of a class once the class has three or more members.
std::vector<Split> stratified_split(std::span<const int> labels, int num_classes, Rng& rng,
                                    double train_fraction = 0.6, double valid_fraction = 0.2);

}  // namespace gtl
