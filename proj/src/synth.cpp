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

#include "gtl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gtl/community.hpp"
#include "gtl/errors.hpp"

namespace gtl {

namespace {

// Child-stream tags, fixed so that each stage draws from its own stream.
enum StreamTag : std::uint64_t {
  kAttributes = 1,
  kGraphs = 2,
  kSwap = 3,
  kDamage = 4,
  kSplit = 5,
  kEdges = 6,
  kFeatures = 7,
};

std::size_t bits_needed(int num_classes) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < static_cast<std::size_t>(num_classes)) ++bits;
  return bits;
}

void require_percent(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InputError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
}

int community_of(std::size_t v, std::size_t n, int k) {
  return static_cast<int>(v * static_cast<std::size_t>(k) / n);
}

}  // namespace

void GraphGenConfig::validate() const {
  if (num_classes < 1) throw InputError("num_classes must be >= 1");
  if (n_per_class < 1) throw InputError("n_per_class must be >= 1");
  require_percent(percent_swap, "percent_swap");
  require_percent(percent_damage, "percent_damage");
  if (nodes_per_graph < static_cast<std::size_t>(num_classes) + 1)
    throw InputError("nodes_per_graph must exceed the largest attachment parameter (" +
                     std::to_string(num_classes) + ")");
  if (n_features < bits_needed(num_classes))
    throw InputError("n_features too small for the number of classes");
  if (!(class_separation >= 0.0)) throw InputError("class_separation must be >= 0");
}

void NodeGenConfig::validate() const {
  if (num_communities < 1) throw InputError("num_communities must be >= 1");
  if (num_nodes < static_cast<std::size_t>(num_communities))
    throw InputError("num_nodes must be >= num_communities");
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
    throw InputError("edge probabilities must satisfy 0 <= p_out <= p_in <= 1");
  if (!(attr_noise >= 0.0)) throw InputError("attr_noise must be >= 0");
  if (n_features < bits_needed(num_communities))
    throw InputError("n_features too small for the number of communities");
}

double NodeGenConfig::expected_degree() const {
  const double n = static_cast<double>(num_nodes);
  const double size = n / num_communities;
  return (size - 1.0) * p_in + (n - size) * p_out;
}

Adjacency barabasi_albert(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 1 || m >= n)
    throw InputError("barabasi_albert: need 1 <= m < n, got m=" + std::to_string(m) +
                     " n=" + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(m * (n - m));
  // Every edge endpoint is appended here, so a uniform draw is a
  // degree-proportional draw.
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * m * (n - m));
  std::vector<NodeId> targets(m);
  std::iota(targets.begin(), targets.end(), NodeId{0});
  std::vector<char> chosen(n, 0);
  for (std::size_t source = m; source < n; ++source) {
    for (NodeId t : targets) {
      edges.emplace_back(static_cast<NodeId>(source), t);
      endpoints.push_back(t);
      endpoints.push_back(static_cast<NodeId>(source));
    }
    targets.clear();
    while (targets.size() < m) {
      const NodeId pick = endpoints[rng.below(endpoints.size())];
      if (!chosen[pick]) {
        chosen[pick] = 1;
        targets.push_back(pick);
      }
    }
    for (NodeId t : targets) chosen[t] = 0;
  }
  return Adjacency::from_edges(edges, n, false);
}

std::vector<double> hypercube_centroid(int c, std::size_t n_features, double separation) {
  std::vector<double> centre(n_features);
  for (std::size_t d = 0; d < n_features; ++d) {
    const bool bit = d < 63 && ((static_cast<std::uint64_t>(c) >> d) & 1U);
    centre[d] = bit ? separation : -separation;
  }
  return centre;
}

AttributeTask make_attribute_task(int num_classes, std::size_t count_per_class,
                                  std::size_t n_features, double class_separation, Rng& rng) {
  if (num_classes < 1) throw InputError("make_attribute_task: num_classes must be >= 1");
  if (n_features < bits_needed(num_classes))
    throw InputError("make_attribute_task: n_features=" + std::to_string(n_features) +
                     " cannot place " + std::to_string(num_classes) + " distinct centroids");
  AttributeTask task;
  task.vectors = Tensor(static_cast<std::size_t>(num_classes) * count_per_class, n_features);
  task.labels.reserve(task.vectors.rows());
  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto centre = hypercube_centroid(c, n_features, class_separation);
    for (std::size_t i = 0; i < count_per_class; ++i, ++row) {
      for (std::size_t d = 0; d < n_features; ++d) task.vectors(row, d) = centre[d] + rng.normal();
      task.labels.push_back(c);
    }
  }
  return task;
}

GraphDataset swap_labels(GraphDataset dataset, double percent, Rng& rng,
                         std::vector<SwapPair>* record) {
  require_percent(percent, "percent_swap");
  const std::size_t n = dataset.size();
  const auto num_pairs = static_cast<std::size_t>(std::floor(percent * static_cast<double>(n) / 2.0));
  if (num_pairs == 0) return dataset;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first 2 * num_pairs entries are a uniform
  // sample of distinct graphs, consecutive entries form the pairs.
  for (std::size_t i = 0; i < 2 * num_pairs; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<SwapPair> pairs;
  pairs.reserve(num_pairs);
  for (std::size_t p = 0; p < num_pairs; ++p) pairs.emplace_back(order[2 * p], order[2 * p + 1]);
  dataset = apply_label_swaps(std::move(dataset), pairs);
  if (record) record->insert(record->end(), pairs.begin(), pairs.end());
  return dataset;
}

GraphDataset apply_label_swaps(GraphDataset dataset, std::span<const SwapPair> pairs) {
  for (const auto& [a, b] : pairs) {
    if (a >= dataset.size() || b >= dataset.size())
      throw InputError("apply_label_swaps: graph index out of range");
    std::swap(dataset.samples[a].label, dataset.samples[b].label);
  }
  return dataset;
}

GraphDataset damage_graph_attributes(GraphDataset dataset, double percent, Rng& rng) {
  require_percent(percent, "percent_damage");
  const std::size_t n = dataset.size();
  const auto count = static_cast<std::size_t>(std::floor(percent * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  // Damage in index order so the draw sequence does not depend on the
  // permutation's tail.
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    auto& sample = dataset.samples[order[i]];
    sample = damage_features(std::move(sample), rng);
  }
  return dataset;
}

GraphDataset generate_graph_dataset(const GraphGenConfig& config) {
  config.validate();
  const Rng root(config.seed);
  Rng attr_rng = root.fork(kAttributes);
  Rng graph_rng = root.fork(kGraphs);
  Rng swap_rng = root.fork(kSwap);
  Rng damage_rng = root.fork(kDamage);
  Rng split_rng = root.fork(kSplit);

  const std::size_t nodes = config.nodes_per_graph;
  const AttributeTask task = make_attribute_task(
      config.num_classes, config.n_per_class * nodes, config.n_features, config.class_separation,
      attr_rng);

  GraphDataset ds;
  ds.num_classes = config.num_classes;
  ds.num_features = config.n_features;
  ds.samples.reserve(static_cast<std::size_t>(config.num_classes) * config.n_per_class);
  std::size_t next_row = 0;
  for (int c = 0; c < config.num_classes; ++c) {
    const auto m = static_cast<std::size_t>(c) + 1;
    for (std::size_t g = 0; g < config.n_per_class; ++g) {
      GraphSample s;
      s.adj = barabasi_albert(nodes, m, graph_rng);
      s.label = c;
      s.features = Tensor(nodes, config.n_features);
      for (std::size_t r = 0; r < nodes; ++r, ++next_row) {
        const auto src = task.vectors.row(next_row);
        std::copy(src.begin(), src.end(), s.features.row(r).begin());
      }
      ds.samples.push_back(std::move(s));
    }
  }

  ds = swap_labels(std::move(ds), config.percent_swap, swap_rng);
  ds = damage_graph_attributes(std::move(ds), config.percent_damage, damage_rng);
  const auto labels = ds.labels();
  ds.split = stratified_split(labels, ds.num_classes, split_rng);
  return ds;
}

Tensor planted_partition_features(const NodeGenConfig& config, std::vector<int>* labels) {
  Rng rng = Rng(config.seed).fork(kFeatures);
  const std::size_t n = config.num_nodes;
  Tensor x(n, config.n_features);
  std::vector<std::vector<double>> centres;
  for (int c = 0; c < config.num_communities; ++c)
    centres.push_back(hypercube_centroid(c, config.n_features, config.centroid_separation));
  if (labels) labels->assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const int c = community_of(v, n, config.num_communities);
    if (labels) (*labels)[v] = c;
    for (std::size_t d = 0; d < config.n_features; ++d)
      x(v, d) = centres[static_cast<std::size_t>(c)][d] + config.attr_noise * rng.normal();
  }
  return x;
}

NodeGraph planted_partition(const NodeGenConfig& config) {
  config.validate();
  const Rng root(config.seed);
  Rng edge_rng = root.fork(kEdges);
  Rng split_rng = root.fork(kSplit);

  NodeGraph g;
  g.num_classes = config.num_communities;
  g.features = planted_partition_features(config, &g.labels);

  const std::size_t n = config.num_nodes;
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = g.labels[u] == g.labels[v] ? config.p_in : config.p_out;
      if (edge_rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }
  if (edges.empty()) throw InputError("planted_partition: generated graph has no edges");
  g.adj = Adjacency::from_edges(edges, n, false);
  g.split = stratified_split(g.labels, g.num_classes, split_rng);
  return g;
}

namespace {

constexpr int kMaxCalibrationSteps = 40;
constexpr double kCalibrationTolerance = 0.05;
// Bisection keeps refining below the acceptance tolerance so that fresh seeds
// still land inside it.
constexpr double kCalibrationRefine = 0.01;

NodeGenConfig with_ratio(NodeGenConfig cfg, double ratio, double degree) {
  const double n = static_cast<double>(cfg.num_nodes);
  const double size = n / cfg.num_communities;
  double p_out = degree / ((size - 1.0) * ratio + (n - size));
  double p_in = ratio * p_out;
  if (p_in > 1.0) {
    p_in = 1.0;
    p_out = std::max(0.0, (degree - (size - 1.0)) / (n - size));
    p_out = std::min(p_out, p_in);
  }
  cfg.p_in = p_in;
  cfg.p_out = p_out;
  return cfg;
}

double mean_modularity(const NodeGenConfig& cfg, int num_seeds) {
  double sum = 0.0;
  for (int s = 0; s < num_seeds; ++s) {
    NodeGenConfig probe = cfg;
    probe.seed = cfg.seed + static_cast<std::uint64_t>(s);
    const NodeGraph g = planted_partition(probe);
    sum += modularity(g.adj, Partition(g.labels, g.num_classes));
  }
  return sum / num_seeds;
}

double mean_inertia(const NodeGenConfig& cfg, int num_seeds) {
  double sum = 0.0;
  for (int s = 0; s < num_seeds; ++s) {
    NodeGenConfig probe = cfg;
    probe.seed = cfg.seed + static_cast<std::uint64_t>(s);
    std::vector<int> labels;
    const Tensor x = planted_partition_features(probe, &labels);
    sum += general_within_inertia(x, Partition(labels, probe.num_communities));
  }
  return sum / num_seeds;
}

/// Bisection on log(parameter) for an increasing response.
template <typename Probe>
std::pair<double, double> bisect_log(double lo, double hi, double target, Probe&& probe,
                                     int* steps, const char* what) {
  double best_x = lo;
  double best_value = probe(lo);
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  for (int i = 0; i < kMaxCalibrationSteps; ++i) {
    ++*steps;
    const double x = std::exp(0.5 * (log_lo + log_hi));
    const double value = probe(x);
    if (std::abs(value - target) < std::abs(best_value - target)) {
      best_x = x;
      best_value = value;
    }
    if (std::abs(value - target) <= kCalibrationRefine) break;
    if (value < target)
      log_lo = std::log(x);
    else
      log_hi = std::log(x);
  }
  if (std::abs(best_value - target) > kCalibrationTolerance) {
    throw CalibrationError(std::string("calibration: ") + what + " target " +
                               std::to_string(target) + " unreachable, closest " +
                               std::to_string(best_value),
                           best_value);
  }
  return {best_x, best_value};
}

}  // namespace

CalibrationResult calibrate_node_config(double target_modularity, double target_inertia,
                                        const NodeGenConfig& base, int num_seeds) {
  base.validate();
  if (num_seeds < 1) throw InputError("calibrate_node_config: num_seeds must be >= 1");
  CalibrationResult result;
  const double degree = base.expected_degree();
  if (!(degree > 0.0)) throw InputError("calibrate_node_config: base expected degree is zero");

  auto modularity_at = [&](double ratio) {
    return mean_modularity(with_ratio(base, ratio, degree), num_seeds);
  };
  const auto [ratio, m] = bisect_log(1.0, 1e6, target_modularity, modularity_at,
                                     &result.iterations, "modularity");
  NodeGenConfig cfg = with_ratio(base, ratio, degree);

  auto inertia_at = [&](double noise) {
    NodeGenConfig probe = cfg;
    probe.attr_noise = noise;
    return mean_inertia(probe, num_seeds);
  };
  const auto [noise, inertia] = bisect_log(1e-3, 1e3, target_inertia, inertia_at,
                                           &result.iterations, "within inertia");
  cfg.attr_noise = noise;

  result.config = cfg;
  result.modularity = m;
  result.inertia = inertia;
  return result;
}

Preset preset(int id) {
  // Node configurations carry the measured targets they are calibrated to.
  struct NodeTarget {
    const char* label;
    double modularity;
    double inertia;
  };
  static constexpr NodeTarget kNode[] = {
      {"M-strong/I-strong", 0.64, 0.37},
      {"M-strong/I-weak", 0.64, 0.47},
      {"M-weak/I-strong", 0.32, 0.39},
      {"M-weak/I-weak", 0.28, 0.99},
  };
  struct GraphTarget {
    const char* label;
    double swap;
    double damage;
  };
  // 0.92 is listed as "strong" even though 92% of graphs are perturbed; the
  // values are kept as published.
  static constexpr GraphTarget kGraph[] = {
      {"IS-weak/IA-weak", 0.95, 0.95},
      {"IS-strong/IA-weak", 0.92, 0.95},
      {"IS-weak/IA-strong", 0.95, 0.92},
      {"IS-strong/IA-strong", 0.92, 0.92},
  };

  Preset p;
  p.id = id;
  if (id >= 1 && id <= 4) {
    const auto& t = kNode[id - 1];
    NodePreset node;
    node.base.seed = static_cast<std::uint64_t>(id);
    node.target_modularity = t.modularity;
    node.target_inertia = t.inertia;
    p.label = t.label;
    p.config = node;
    return p;
  }
  if (id >= 5 && id <= 8) {
    const auto& t = kGraph[id - 5];
    GraphGenConfig graph;
    graph.percent_swap = t.swap;
    graph.percent_damage = t.damage;
    graph.seed = static_cast<std::uint64_t>(id);
    p.label = t.label;
    p.config = graph;
    return p;
  }
  throw InputError("unknown preset " + std::to_string(id) + " (valid: 1-8)");
}

}  // namespace gtl
