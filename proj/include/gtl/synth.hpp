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
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gtl/graph.hpp"
#include "gtl/rng.hpp"

namespace gtl {

/// Graph-classification generator parameters.
struct GraphGenConfig {
  int num_classes = 3;
  std::size_t n_per_class = 200;
  std::size_t n_features = 8;
  double percent_swap = 0.0;
  double percent_damage = 0.0;
  std::size_t nodes_per_graph = 30;
  double class_separation = 1.0;
  std::uint64_t seed = 0;

  /// Throws InputError on out-of-range values.
  void validate() const;
};

/// Planted-partition node-classification generator parameters.
struct NodeGenConfig {
  std::size_t num_nodes = 1000;
  int num_communities = 5;
  double p_in = 0.04;
  double p_out = 0.0025;
  double attr_noise = 1.0;
  double centroid_separation = 1.0;
  std::size_t n_features = 8;
  std::uint64_t seed = 0;

  void validate() const;
  /// Expected node degree for these edge probabilities.
  double expected_degree() const;
};

/// Barabasi-Albert preferential attachment. Starts from m isolated nodes; the
/// first added node links to all of them and every later node links to m
/// distinct existing nodes drawn proportionally to degree. Always produces
/// exactly m * (n - m) undirected edges. Requires 1 <= m < n.
Adjacency barabasi_albert(std::size_t n, std::size_t m, Rng& rng);

/// Centre of class `c` on the signed hypercube: coordinate d is
/// +separation when bit d of c is set and -separation otherwise.
std::vector<double> hypercube_centroid(int c, std::size_t n_features, double separation);

struct AttributeTask {
  Tensor vectors;           // (num_classes * count_per_class) x n_features
  std::vector<int> labels;  // class-major: count_per_class zeros, then ones, ...
};

/// Labelled vectors: hypercube centroid per class plus standard-normal noise.
/// Requires n_features >= ceil(log2(num_classes)).
AttributeTask make_attribute_task(int num_classes, std::size_t count_per_class,
                                  std::size_t n_features, double class_separation, Rng& rng);

using SwapPair = std::pair<std::size_t, std::size_t>;

/// Draws floor(percent * N / 2) disjoint pairs of graphs uniformly at random
/// and exchanges the labels within each pair. Topology and features stay with
/// their graph. Same-label pairs are drawn too (their exchange is a no-op),
/// which is what makes percent = 1 mix the classes instead of relabelling
/// them. The drawn pairs are appended to `record` when given.
GraphDataset swap_labels(GraphDataset dataset, double percent, Rng& rng,
                         std::vector<SwapPair>* record = nullptr);

/// Replays recorded swaps. Each swap is an involution, so replaying the same
/// list twice restores the labels.
GraphDataset apply_label_swaps(GraphDataset dataset, std::span<const SwapPair> pairs);

/// Replaces the features of floor(percent * N) uniformly chosen graphs with
/// standard-normal draws.
GraphDataset damage_graph_attributes(GraphDataset dataset, double percent, Rng& rng);

/// The four-step graph-classification pipeline: attribute task, BA graphs with
/// per-class attachment m_c = c + 1, label swapping, attribute damage, then a
/// stratified 60/20/20 split. Pure function of the config (seed included).
GraphDataset generate_graph_dataset(const GraphGenConfig& config);

/// Equal-size communities, intra-community edges with p_in and
/// inter-community edges with p_out, hypercube-centroid features with
/// attr_noise Gaussian noise, labels = community ids, stratified split.
/// Throws InputError when no edge was generated.
NodeGraph planted_partition(const NodeGenConfig& config);

/// Node features only, identical to those planted_partition draws for the
/// same config.
Tensor planted_partition_features(const NodeGenConfig& config, std::vector<int>* labels = nullptr);

struct CalibrationResult {
  NodeGenConfig config;
  double modularity = 0.0;  // mean over calibration seeds
  double inertia = 0.0;
  int iterations = 0;
};

/// Searches the p_in / p_out ratio (expected degree held fixed) for the target
/// modularity, then attr_noise for the target within inertia. Each probe is
/// the mean over `num_seeds` graphs. Throws CalibrationError if either target
/// cannot be met within +-0.05 after 40 bisection steps.
CalibrationResult calibrate_node_config(double target_modularity, double target_inertia,
                                        const NodeGenConfig& base, int num_seeds = 5);

struct NodePreset {
  NodeGenConfig base;
  double target_modularity = 0.0;
  double target_inertia = 0.0;
};

struct Preset {
  int id = 0;
  std::string label;  // e.g. "M-strong/I-weak"
  std::variant<NodePreset, GraphGenConfig> config;

  bool is_node() const { return std::holds_alternative<NodePreset>(config); }
};

/// Configurations 1-4 (node classification, calibration targets) and 5-8
/// (graph classification, swap/damage percentages). Throws InputError for any
/// other id.
Preset preset(int id);

}  // namespace gtl
