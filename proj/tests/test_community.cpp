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

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gtl/community.hpp"
#include "gtl/errors.hpp"
#include "gtl/synth.hpp"
#include "test_util.hpp"

using namespace gtl;

namespace {

// Literal double sum over all ordered pairs, diagonal included.
double brute_force_modularity(const Adjacency& adj, const std::vector<int>& cls) {
  const auto a = testing::dense(adj);
  const std::size_t n = a.size();
  std::vector<double> d(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      d[i] += a[i][j];
      two_m += a[i][j];
    }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cls[i] == cls[j]) sum += a[i][j] - d[i] * d[j] / two_m;
  return sum / two_m;
}

Adjacency disjoint_triangles(std::size_t k) {
  std::vector<Edge> edges;
  for (std::size_t t = 0; t < k; ++t) {
    const auto b = static_cast<NodeId>(3 * t);
    edges.insert(edges.end(), {{b, b + 1}, {b + 1, b + 2}, {b, b + 2}});
  }
  return build_adjacency(edges, 3 * k, false);
}

GraphSample graph_with_mean(std::vector<double> mean_row, const Adjacency& adj) {
  GraphSample s;
  s.adj = adj;
  s.features = Tensor(adj.num_nodes(), mean_row.size());
  for (std::size_t r = 0; r < adj.num_nodes(); ++r)
    for (std::size_t d = 0; d < mean_row.size(); ++d) s.features(r, d) = mean_row[d];
  return s;
}

}  // namespace

TEST_CASE("modularity: one class gives exactly zero") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto adj = testing::random_graph(10, 0.4, rng);
    if (adj.num_edges() == 0) continue;
    const Partition one(std::vector<int>(10, 0), 1);
    CHECK(std::abs(modularity(adj, one)) < 1e-12);
  }
}

TEST_CASE("modularity: two disjoint triangles, one class each, is 0.5") {
  const auto adj = disjoint_triangles(2);
  const Partition p({0, 0, 0, 1, 1, 1}, 2);
  CHECK(modularity(adj, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(modularity(adj, p) - 0.5) < 1e-12);
}

TEST_CASE("modularity: K disjoint triangles each in its own class is 1 - 1/K") {
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto adj = disjoint_triangles(k);
    std::vector<int> cls;
    for (std::size_t t = 0; t < k; ++t) cls.insert(cls.end(), 3, static_cast<int>(t));
    const double m = modularity(adj, Partition(cls, static_cast<int>(k)));
    CHECK(std::abs(m - (1.0 - 1.0 / static_cast<double>(k))) < 1e-12);
    CHECK(std::abs(m - brute_force_modularity(adj, cls)) < 1e-12);
  }
}

TEST_CASE("modularity matches the brute-force double sum on random graphs") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 50) {
    const std::size_t n = 2 + rng.below(9);
    const auto adj = testing::random_graph(n, rng.uniform(0.1, 0.9), rng);
    if (adj.num_edges() == 0) continue;
    const int k = 1 + static_cast<int>(rng.below(4));
    std::vector<int> cls(n);
    for (auto& c : cls) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    CHECK(std::abs(modularity(adj, Partition(cls, k)) - brute_force_modularity(adj, cls)) < 1e-12);
    ++checked;
  }
}

TEST_CASE("modularity is invariant to relabelling classes") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto adj = testing::random_graph(12, 0.3, rng);
    if (adj.num_edges() == 0) continue;
    std::vector<int> cls(12), perm{2, 0, 3, 1};
    for (auto& c : cls) c = static_cast<int>(rng.below(4));
    std::vector<int> relabelled(12);
    for (std::size_t i = 0; i < 12; ++i) relabelled[i] = perm[static_cast<std::size_t>(cls[i])];
    CHECK(std::abs(modularity(adj, Partition(cls, 4)) - modularity(adj, Partition(relabelled, 4))) <
          1e-12);
  }
}

TEST_CASE("modularity error paths") {
  CHECK_THROWS_AS(modularity(build_adjacency({}, 4, false), Partition({0, 0, 1, 1}, 2)),
                  UndefinedMetricError);
  const std::vector<Edge> arc{{0, 1}};
  CHECK_THROWS_AS(modularity(build_adjacency(arc, 2, true), Partition({0, 1}, 2)), InputError);
}

TEST_CASE("modularity of a planted partition with p_out = 0 matches brute force") {
  NodeGenConfig cfg;
  cfg.num_nodes = 200;
  cfg.num_communities = 5;
  cfg.p_in = 0.2;
  cfg.p_out = 0.0;
  const NodeGraph g = planted_partition(cfg);
  const double m = modularity(g.adj, Partition(g.labels, 5));
  CHECK(std::abs(m - brute_force_modularity(g.adj, g.labels)) < 1e-12);
  CHECK(m >= 0.75);
}

TEST_CASE("within_inertia hand cases") {
  SUBCASE("1-D four points") {
    const Tensor x = Tensor::from_rows({{0}, {2}, {10}, {12}});
    const double i = within_inertia(InertiaInput{x, Partition({0, 0, 1, 1}, 2)});
    CHECK(std::abs(i - 4.0 / 104.0) < 1e-12);
  }
  SUBCASE("items at their distinct class centroids") {
    const Tensor x = Tensor::from_rows({{1, 1}, {1, 1}, {5, 2}, {5, 2}});
    CHECK(within_inertia(InertiaInput{x, Partition({0, 0, 1, 1}, 2)}) == 0.0);
  }
  SUBCASE("single class") {
    const Tensor x = Tensor::from_rows({{1, 3}, {4, 1}, {0, 2}});
    CHECK(std::abs(within_inertia(InertiaInput{x, Partition({0, 0, 0}, 1)}) - 1.0) < 1e-12);
  }
  SUBCASE("empty classes are ignored") {
    const Tensor x = Tensor::from_rows({{0}, {2}, {10}, {12}});
    const double i = within_inertia(InertiaInput{x, Partition({0, 0, 3, 3}, 5)});
    CHECK(std::abs(i - 4.0 / 104.0) < 1e-12);
  }
  SUBCASE("zero total scatter") {
    const Tensor x = Tensor::from_rows({{3}, {3}});
    CHECK_THROWS_AS(within_inertia(InertiaInput{x, Partition({0, 1}, 2)}), UndefinedMetricError);
  }
  SUBCASE("fewer than two items") {
    CHECK_THROWS_AS(within_inertia(InertiaInput{Tensor::from_rows({{1}}), Partition({0}, 1)}),
                    InputError);
  }
}

TEST_CASE("property: inertia lies in [0, 1] and reduces to the node-level form") {
  Rng rng(77);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(30);
    const std::size_t dims = 1 + rng.below(5);
    const int k = 1 + static_cast<int>(rng.below(5));
    const Tensor x = testing::random_tensor(n, dims, rng, 10.0);
    std::vector<int> cls(n);
    for (auto& c : cls) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    const Partition p(cls, k);
    const double i = within_inertia(InertiaInput{x, p});
    CHECK(i >= 0.0);
    CHECK(i <= 1.0);
    CHECK(general_within_inertia(x, p) == i);

    NodeGraph g;
    g.adj = build_adjacency({}, n, false);
    g.features = x;
    g.labels = cls;
    g.num_classes = k;
    g.split.assign(n, Split::kTrain);
    CHECK(within_inertia(g) == i);
  }
}

TEST_CASE("general_within_inertia: constant per class and scalar form") {
  const std::vector<double> rho{1, 1, 1, 4, 4};
  CHECK(general_within_inertia(rho, Partition({0, 0, 0, 1, 1}, 2)) == 0.0);
  CHECK(std::abs(general_within_inertia(rho, Partition({0, 0, 0, 0, 0}, 1)) - 1.0) < 1e-12);
}

TEST_CASE("attribute_within_inertia: 2-class toy set of 4 graphs") {
  // Means: class 0 -> (0,0), (2,0); class 1 -> (10,4), (12,4).
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  const auto adj = build_adjacency(path, 3, false);
  GraphDataset ds;
  ds.num_classes = 2;
  ds.num_features = 2;
  ds.samples = {graph_with_mean({0, 0}, adj), graph_with_mean({2, 0}, adj),
                graph_with_mean({10, 4}, adj), graph_with_mean({12, 4}, adj)};
  ds.samples[2].label = ds.samples[3].label = 1;
  ds.split.assign(4, Split::kTrain);
  // Within: 1+1+1+1 = 4. Global mean (6, 2): 36+4 + 16+4 + 16+4 + 36+4 = 120.
  CHECK(std::abs(attribute_within_inertia(ds) - 4.0 / 120.0) < 1e-12);

  // Identical features inside each class -> 0.
  ds.samples[1] = graph_with_mean({0, 0}, adj);
  ds.samples[3] = graph_with_mean({10, 4}, adj);
  ds.samples[3].label = 1;
  CHECK(attribute_within_inertia(ds) == 0.0);
}

TEST_CASE("structural_within_inertia") {
  const std::vector<Edge> path{{0, 1}, {1, 2}};                 // mean degree 4/3
  const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};          // mean degree 2
  GraphDataset ds;
  ds.num_classes = 2;
  ds.num_features = 1;
  for (int i = 0; i < 4; ++i) {
    GraphSample s;
    s.adj = build_adjacency(i < 2 ? path : tri, 3, false);
    s.features = Tensor(3, 1);
    s.label = i < 2 ? 0 : 1;
    ds.samples.push_back(s);
  }
  ds.split.assign(4, Split::kTrain);
  CHECK(structural_within_inertia(ds) == 0.0);
  for (auto& s : ds.samples) s.label = 0;
  CHECK(std::abs(structural_within_inertia(ds) - 1.0) < 1e-12);
}
