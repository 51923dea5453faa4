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

#include <span>
#include <vector>

#include "gtl/graph.hpp"
#include "gtl/tensor.hpp"

namespace gtl {

/// Item -> class assignment. Classes with no members are allowed and ignored
/// by every metric.
struct Partition {
  std::vector<int> assignment;
  int num_classes = 0;

  Partition() = default;
  Partition(std::vector<int> assignment, int num_classes);

  std::size_t size() const { return assignment.size(); }
  bool same_class(std::size_t i, std::size_t j) const { return assignment[i] == assignment[j]; }
};

/// Per-item property vectors (items x dims) with their class partition.
struct InertiaInput {
  Tensor properties;
  Partition partition;
};

/// Newman modularity of an undirected graph:
///   M = 1/(2|E|) * sum_ij (a_ij - d_i d_j / (2|E|)) * [c_i == c_j]
/// The double sum includes i == j. Throws UndefinedMetricError for a graph
/// with no edges and InputError for a directed adjacency (symmetrize first).
double modularity(const Adjacency& adj, const Partition& partition);

/// Ratio of within-class squared Euclidean scatter (about class centroids) to
/// total scatter (about the global centroid). Lies in [0, 1]; lower means
/// stronger community structure.
double within_inertia(const InertiaInput& input);

/// Same ratio for arbitrary per-item property vectors.
double general_within_inertia(const Tensor& properties, const Partition& partition);
/// Scalar properties, treated as 1-D vectors.
double general_within_inertia(std::span<const double> properties, const Partition& partition);

/// Node-level inertia of a node graph: raw features, node labels.
double within_inertia(const NodeGraph& graph);
/// Node-level modularity on the symmetrized adjacency with node labels.
double modularity(const NodeGraph& graph);

/// I^A: inertia of per-graph mean feature vectors, partitioned by graph label.
double attribute_within_inertia(const GraphDataset& dataset);
/// I^S: inertia of per-graph average node degree, partitioned by graph label.
double structural_within_inertia(const GraphDataset& dataset);

}  // namespace gtl
