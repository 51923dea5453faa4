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

#include "gtl/community.hpp"

#include <algorithm>
#include <string>

#include "gtl/errors.hpp"

namespace gtl {

Partition::Partition(std::vector<int> assignment_in, int num_classes_in)
    : assignment(std::move(assignment_in)), num_classes(num_classes_in) {
  for (int c : assignment) {
    if (c < 0 || c >= num_classes)
      throw InputError("Partition: class " + std::to_string(c) + " outside [0, " +
                       std::to_string(num_classes) + ")");
  }
}

double modularity(const Adjacency& adj, const Partition& partition) {
  if (adj.directed()) throw InputError("modularity: adjacency must be undirected");
  if (partition.size() != adj.num_nodes())
    throw InputError("modularity: partition size != num_nodes");
  const double two_m = static_cast<double>(adj.num_arcs());
  if (two_m == 0.0) throw UndefinedMetricError("modularity: graph has no edges");

  // sum_ij a_ij [c_i == c_j] and per-class degree volumes; the expected term
  // sum_ij d_i d_j [c_i == c_j] collapses to sum_C vol(C)^2.
  std::vector<double> volume(static_cast<std::size_t>(partition.num_classes), 0.0);
  double internal = 0.0;
  for (std::size_t u = 0; u < adj.num_nodes(); ++u) {
    const auto c = partition.assignment[u];
    volume[static_cast<std::size_t>(c)] += static_cast<double>(adj.out_degree(u));
    for (NodeId v : adj.neighbors(u))
      if (partition.assignment[v] == c) internal += 1.0;
  }
  double expected = 0.0;
  for (double vol : volume) expected += vol * vol;
  return internal / two_m - expected / (two_m * two_m);
}

double general_within_inertia(const Tensor& properties, const Partition& partition) {
  const std::size_t n = properties.rows();
  const std::size_t dims = properties.cols();
  if (partition.size() != n) throw InputError("within_inertia: partition size != item count");
  if (n < 2) throw InputError("within_inertia: need at least two items");

  const auto k = static_cast<std::size_t>(partition.num_classes);
  Tensor centroid(k, dims);
  Tensor global(1, dims);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(partition.assignment[i]);
    ++count[c];
    for (std::size_t d = 0; d < dims; ++d) {
      centroid(c, d) += properties(i, d);
      global(0, d) += properties(i, d);
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] > 0)
      for (std::size_t d = 0; d < dims; ++d) centroid(c, d) /= static_cast<double>(count[c]);
  for (std::size_t d = 0; d < dims; ++d) global(0, d) /= static_cast<double>(n);

  double within = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(partition.assignment[i]);
    for (std::size_t d = 0; d < dims; ++d) {
      const double dw = properties(i, d) - centroid(c, d);
      const double dt = properties(i, d) - global(0, d);
      within += dw * dw;
      total += dt * dt;
    }
  }
  if (!(total > 0.0)) throw UndefinedMetricError("within_inertia: zero total scatter");
  // Huygens: within <= total exactly; rounding can push the ratio a hair past 1.
  return std::min(1.0, within / total);
}

double general_within_inertia(std::span<const double> properties, const Partition& partition) {
  return general_within_inertia(
      Tensor(properties.size(), 1, std::vector<double>(properties.begin(), properties.end())),
      partition);
}

double within_inertia(const InertiaInput& input) {
  return general_within_inertia(input.properties, input.partition);
}

double within_inertia(const NodeGraph& graph) {
  return general_within_inertia(graph.features, Partition(graph.labels, graph.num_classes));
}

double modularity(const NodeGraph& graph) {
  return modularity(symmetrize(graph.adj), Partition(graph.labels, graph.num_classes));
}

double attribute_within_inertia(const GraphDataset& dataset) {
  Tensor means(dataset.size(), dataset.num_features);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Tensor& x = dataset.samples[i].features;
    if (x.rows() == 0) throw InputError("attribute_within_inertia: empty graph");
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t d = 0; d < x.cols(); ++d) means(i, d) += x(r, d);
    for (std::size_t d = 0; d < x.cols(); ++d) means(i, d) /= static_cast<double>(x.rows());
  }
  return general_within_inertia(means, Partition(dataset.labels(), dataset.num_classes));
}

double structural_within_inertia(const GraphDataset& dataset) {
  std::vector<double> mean_degree;
  mean_degree.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    if (s.adj.num_nodes() == 0) throw InputError("structural_within_inertia: empty graph");
    mean_degree.push_back(average_degree(s.adj));
  }
  return general_within_inertia(mean_degree, Partition(dataset.labels(), dataset.num_classes));
}

}  // namespace gtl
