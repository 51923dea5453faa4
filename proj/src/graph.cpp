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

#include "gtl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gtl/errors.hpp"

namespace gtl {

Adjacency Adjacency::from_edges(std::span<const Edge> edges, std::size_t num_nodes,
                                bool directed) {
  std::vector<Edge> arcs;
  arcs.reserve(directed ? edges.size() : 2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw InputError("build_adjacency: edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) continue;
    arcs.emplace_back(u, v);
    if (!directed) arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  Adjacency adj;
  adj.directed_ = directed;
  adj.offsets_.assign(num_nodes + 1, 0);
  adj.neighbors_.reserve(arcs.size());
  for (const auto& [u, v] : arcs) {
    ++adj.offsets_[u + 1];
    adj.neighbors_.push_back(v);
  }
  for (std::size_t v = 0; v < num_nodes; ++v) adj.offsets_[v + 1] += adj.offsets_[v];
  return adj;
}

bool Adjacency::has_arc(NodeId u, NodeId v) const {
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<Edge> Adjacency::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (directed_ || u < v) out.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  return out;
}

Adjacency Adjacency::transposed() const {
  if (!directed_) return *this;
  std::vector<Edge> reversed;
  reversed.reserve(num_arcs());
  for (std::size_t u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u)) reversed.emplace_back(v, static_cast<NodeId>(u));
  return from_edges(reversed, num_nodes(), true);
}

Adjacency build_adjacency(std::span<const Edge> edges, std::size_t num_nodes, bool directed) {
  return Adjacency::from_edges(edges, num_nodes, directed);
}

Adjacency symmetrize(const Adjacency& adj) {
  if (!adj.directed()) return adj;
  const auto arcs = adj.edge_list();
  return Adjacency::from_edges(arcs, adj.num_nodes(), false);
}

DegreeVector degrees(const Adjacency& adj) {
  const std::size_t n = adj.num_nodes();
  DegreeVector d;
  d.out.resize(n);
  d.in.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    d.out[v] = adj.out_degree(v);
    for (NodeId u : adj.neighbors(v)) ++d.in[u];
  }
  if (adj.directed()) {
    const Adjacency sym = symmetrize(adj);
    d.total.resize(n);
    for (std::size_t v = 0; v < n; ++v) d.total[v] = sym.out_degree(v);
  } else {
    d.total = d.out;
  }
  d.renormalized.resize(n);
  d.renormalized_in.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    d.renormalized[v] = static_cast<double>(d.total[v]) + 1.0;
    d.renormalized_in[v] = static_cast<double>(d.in[v]) + 1.0;
  }
  return d;
}

double average_degree(const Adjacency& adj) {
  if (adj.num_nodes() == 0) return 0.0;
  const Adjacency sym = symmetrize(adj);
  return static_cast<double>(sym.num_arcs()) / static_cast<double>(sym.num_nodes());
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split tag '" + std::string(name) + "'");
}

void NodeGraph::validate() const {
  const std::size_t n = num_nodes();
  if (features.rows() != n) throw InputError("NodeGraph: feature rows != num_nodes");
  if (labels.size() != n) throw InputError("NodeGraph: labels length != num_nodes");
  if (split.size() != n) throw InputError("NodeGraph: split length != num_nodes");
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw InputError("NodeGraph: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
}

std::vector<int> GraphDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void GraphDataset::validate() const {
  if (split.size() != samples.size()) throw InputError("GraphDataset: split length mismatch");
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= num_classes)
      throw InputError("GraphDataset: label outside [0, num_classes)");
    if (s.features.cols() != num_features || s.features.rows() != s.adj.num_nodes())
      throw InputError("GraphDataset: sample feature shape mismatch");
  }
}

namespace {

void fill_normal(Tensor& t, Rng& rng) {
  for (double& v : t.values()) v = rng.normal();
}

}  // namespace

NodeGraph damage_features(NodeGraph graph, Rng& rng) {
  fill_normal(graph.features, rng);
  return graph;
}

GraphSample damage_features(GraphSample sample, Rng& rng) {
  fill_normal(sample.features, rng);
  return sample;
}

GraphDataset damage_features(GraphDataset dataset, Rng& rng) {
  for (auto& s : dataset.samples) fill_normal(s.features, rng);
  return dataset;
}

std::vector<Split> stratified_split(std::span<const int> labels, int num_classes, Rng& rng,
                                    double train_fraction, double valid_fraction) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw InputError("stratified_split: label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<Split> out(labels.size(), Split::kTrain);
  for (auto& group : members) {
    rng.shuffle(std::span<std::size_t>(group));
    const std::size_t n = group.size();
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    auto n_valid = static_cast<std::size_t>(std::floor(valid_fraction * static_cast<double>(n)));
    if (n >= 3) {
      n_train = std::max<std::size_t>(n_train, 1);
      n_valid = std::max<std::size_t>(n_valid, 1);
      if (n_train + n_valid >= n) n_train = n - n_valid - 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
      out[group[k]] = k < n_train ? Split::kTrain
                      : k < n_train + n_valid ? Split::kValid
                                              : Split::kTest;
    }
  }
  return out;
}

}  // namespace gtl
