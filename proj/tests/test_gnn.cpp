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
#include <cmath>
#include <numeric>

#include "gtl/dataset_io.hpp"
#include "gtl/errors.hpp"
#include "gtl/gnn.hpp"
#include "test_util.hpp"

using namespace gtl;

namespace {

constexpr LayerKind kAllKinds[] = {LayerKind::kGcn, LayerKind::kSage, LayerKind::kGin};

// Dense propagation matrix P with P[v][u] = weight of h_u in v's aggregate,
// built straight from the 0/1 matrix (a[u][v] = 1 for an arc u -> v).
std::vector<std::vector<double>> dense_propagation(LayerKind kind, const Adjacency& adj,
                                                   double eps) {
  const auto a = testing::dense(adj);
  const std::size_t n = a.size();
  std::vector<double> deg(n, 1.0), deg_in(n, 1.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w) {
      if (a[v][w] > 0 || a[w][v] > 0) deg[v] += 1.0;
      deg_in[v] += a[w][v];
    }
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) {
      const double a_hat = a[u][v] + (u == v ? 1.0 : 0.0);
      switch (kind) {
        case LayerKind::kGcn: p[v][u] = a_hat / std::sqrt(deg[u] * deg[v]); break;
        case LayerKind::kSage: p[v][u] = a_hat / deg_in[v]; break;
        case LayerKind::kGin: p[v][u] = a[u][v] + (u == v ? 1.0 + eps : 0.0); break;
      }
    }
  return p;
}

Tensor dense_layer(LayerKind kind, const Adjacency& adj, const Tensor& h, const Tensor& w,
                   double eps) {
  const auto p = dense_propagation(kind, adj, eps);
  const std::size_t n = h.rows();
  Tensor agg(n, h.cols());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t c = 0; c < h.cols(); ++c) agg(v, c) += p[v][u] * h(u, c);
  Tensor out(n, w.cols());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < w.rows(); ++k)
      for (std::size_t c = 0; c < w.cols(); ++c) out(v, c) += agg(v, k) * w(k, c);
  return out;
}

GraphConv conv_with_weight(LayerKind kind, const Tensor& w, double eps = 0.0) {
  GraphConv conv(kind, w.rows(), w.cols(), "c");
  conv.linear.weight.value = w;
  if (kind == LayerKind::kGin) conv.eps.value(0, 0) = eps;
  return conv;
}

Adjacency path2() {
  const std::vector<Edge> e{{0, 1}};
  return build_adjacency(e, 2, false);
}

Adjacency permute(const Adjacency& adj, const std::vector<std::size_t>& perm) {
  std::vector<Edge> arcs;
  for (std::size_t u = 0; u < adj.num_nodes(); ++u)
    for (NodeId v : adj.neighbors(u))
      arcs.emplace_back(static_cast<NodeId>(perm[u]), static_cast<NodeId>(perm[v]));
  return build_adjacency(arcs, adj.num_nodes(), adj.directed());
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(perm[r], c) = x(r, c);
  return out;
}

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return labels;
}

}  // namespace

TEST_CASE("layer hand cases") {
  const Tensor one = Tensor::from_rows({{1}});
  SUBCASE("isolated node with identity weight returns its own state") {
    const MessageGraph g(build_adjacency({}, 1, false));
    const Tensor h = Tensor::from_rows({{4.5}});
    for (LayerKind kind : kAllKinds) {
      GraphConv conv = conv_with_weight(kind, one);
      CHECK(conv.forward(g, h)(0, 0) == 4.5);
    }
  }
  SUBCASE("2-node path, x = (1, 3)") {
    const MessageGraph g(path2());
    const Tensor h = Tensor::from_rows({{1}, {3}});
    const double expected[] = {2.0, 2.0, 4.0};
    int i = 0;
    for (LayerKind kind : kAllKinds) {
      GraphConv conv = conv_with_weight(kind, one);
      const Tensor y = conv.forward(g, h);
      CHECK(std::abs(y(0, 0) - expected[i]) < 1e-15);
      CHECK(std::abs(y(1, 0) - expected[i]) < 1e-15);
      ++i;
    }
  }
}

TEST_CASE("sparse aggregation matches the dense oracle on 50 random graphs") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const bool directed = t % 5 == 4;
    const Adjacency adj = testing::random_graph(n, rng.uniform(0.1, 0.8), rng, directed);
    const MessageGraph g(adj);
    const Tensor h = testing::random_tensor(n, 3, rng, 2.0);
    const Tensor w = testing::random_tensor(3, 2, rng);
    const double eps = rng.uniform(-0.5, 0.5);
    for (LayerKind kind : kAllKinds) {
      GraphConv conv = conv_with_weight(kind, w, eps);
      const Tensor sparse = conv.forward(g, h);
      CHECK(max_abs_diff(sparse, dense_layer(kind, adj, h, w, eps)) < 1e-12);
    }
  }
}

TEST_CASE("aggregate_backward is the transpose of aggregate") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(7);
    const Adjacency adj = testing::random_graph(n, 0.4, rng, t % 2 == 1);
    const MessageGraph g(adj);
    const Tensor x = testing::random_tensor(n, 2, rng);
    const Tensor y = testing::random_tensor(n, 2, rng);
    for (LayerKind kind : kAllKinds) {
      // <A x, y> == <x, A^T y>
      const Tensor ax = aggregate(kind, g, x, 0.3);
      const Tensor aty = aggregate_backward(kind, g, y, 0.3);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        lhs += ax.values()[i] * y.values()[i];
        rhs += x.values()[i] * aty.values()[i];
      }
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("property: layers are equivariant to node permutations") {
  Rng rng(44);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(9);
    const Adjacency adj = testing::random_graph(n, 0.35, rng, t % 3 == 0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    const Tensor h = testing::random_tensor(n, 3, rng);
    const Tensor w = testing::random_tensor(3, 3, rng);
    const MessageGraph g(adj);
    const MessageGraph gp(permute(adj, perm));
    for (LayerKind kind : kAllKinds) {
      GraphConv conv = conv_with_weight(kind, w, 0.2);
      const Tensor lhs = permute_rows(conv.forward(g, h), perm);
      const Tensor rhs = conv.forward(gp, permute_rows(h, perm));
      CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
  }
}

TEST_CASE("GCN and SAGE coincide on a cycle") {
  std::vector<Edge> ring;
  for (NodeId v = 0; v < 7; ++v) ring.emplace_back(v, (v + 1) % 7);
  const MessageGraph g(build_adjacency(ring, 7, false));
  Rng rng(2);
  const Tensor h = testing::random_tensor(7, 4, rng);
  CHECK(max_abs_diff(aggregate(LayerKind::kGcn, g, h), aggregate(LayerKind::kSage, g, h)) <
        1e-15);
}

TEST_CASE("GIN eps gradient matches finite differences within 1e-6") {
  Rng rng(5);
  const Adjacency adj = testing::random_graph(6, 0.5, rng);
  const MessageGraph g(adj);
  const Tensor h = testing::random_tensor(6, 3, rng);
  const Tensor r = testing::random_tensor(6, 2, rng);
  GraphConv conv(LayerKind::kGin, 3, 2, "gin");
  conv.reset_parameters(rng);
  conv.eps.value(0, 0) = 0.15;
  std::vector<Parameter*> params{&conv.eps};
  auto probe = [&](const Tensor& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * r.values()[i];
    return s;
  };
  auto loss = [&] { return probe(conv.forward(g, h)); };
  auto grads = [&] {
    conv.forward(g, h);
    conv.backward(r);
  };
  CHECK(gradient_check(loss, grads, params).max_relative_error < 1e-6);
}

TEST_CASE("mean_pool") {
  SUBCASE("identical rows") {
    const Tensor h = Tensor::from_rows({{1, 2}, {1, 2}, {1, 2}});
    const std::vector<std::size_t> off{0, 3};
    CHECK(mean_pool(h, off) == Tensor::from_rows({{1, 2}}));
  }
  SUBCASE("two graphs of sizes 1 and 3") {
    const Tensor h = Tensor::from_rows({{5}, {1}, {2}, {6}});
    const std::vector<std::size_t> off{0, 1, 4};
    CHECK(mean_pool(h, off) == Tensor::from_rows({{5}, {3}}));
    const Tensor dh = mean_pool_backward(Tensor::from_rows({{2}, {3}}), off);
    CHECK(dh == Tensor::from_rows({{2}, {1}, {1}, {1}}));
  }
  SUBCASE("node order inside a graph does not matter") {
    Rng rng(3);
    const Tensor h = testing::random_tensor(5, 3, rng);
    const std::vector<std::size_t> off{0, 5};
    const Tensor hp = permute_rows(h, {3, 0, 4, 1, 2});
    CHECK(max_abs_diff(mean_pool(h, off), mean_pool(hp, off)) < 1e-15);
  }
  SUBCASE("empty graph") {
    const std::vector<std::size_t> off{0, 2, 2};
    CHECK_THROWS_AS(mean_pool(Tensor(2, 1), off), InputError);
  }
}

TEST_CASE("batched graph-level forward equals per-graph forwards") {
  Rng rng(8);
  for (LayerKind kind : kAllKinds) {
    ModelConfig cfg{kind, TaskKind::kGraph, 3, 8, 2, 3, true, 0.5};
    Rng init(1);
    GnnModel model(cfg, init);
    // Move running stats away from the identity so eval mode is non-trivial.
    Rng drop(2);
    const Adjacency warm = testing::random_graph(12, 0.3, rng);
    model.forward(MessageGraph(warm), testing::random_tensor(12, 3, rng), true, drop);

    std::vector<Adjacency> graphs;
    std::vector<Tensor> feats;
    for (int i = 0; i < 4; ++i) {
      const std::size_t n = 1 + rng.below(6);
      graphs.push_back(testing::random_graph(n, 0.5, rng));
      feats.push_back(testing::random_tensor(n, 3, rng));
    }
    std::vector<const Adjacency*> ptrs;
    std::size_t total = 0;
    for (const auto& a : graphs) {
      ptrs.push_back(&a);
      total += a.num_nodes();
    }
    Tensor x(total, 3);
    std::size_t row = 0;
    for (const auto& f : feats)
      for (std::size_t r = 0; r < f.rows(); ++r, ++row)
        for (std::size_t c = 0; c < 3; ++c) x(row, c) = f(r, c);
    const MessageGraph batch = MessageGraph::batch(ptrs);
    CHECK(batch.num_graphs() == 4);
    const Tensor pooled = model.predict(batch, x);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const Tensor single = model.predict(MessageGraph(graphs[i]), feats[i]);
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(single(0, c) - pooled(i, c)) < 1e-12);
    }
  }
}

TEST_CASE("full 3-layer models pass gradient_check at 1e-4") {
  for (LayerKind kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed * 7 + static_cast<std::uint64_t>(kind));
      const Adjacency adj = testing::random_graph(5, 0.5, rng);
      const MessageGraph g(adj);
      const Tensor x = testing::random_tensor(5, 3, rng);
      const auto labels = random_labels(5, 3, rng);
      ModelConfig cfg{kind, TaskKind::kNode, 3, 4, 3, 3, true, 0.0};
      Rng init = rng.fork(1);
      GnnModel model(cfg, init);
      Rng drop(0);
      auto params = model.parameters();
      auto loss = [&] { return softmax_cross_entropy(model.forward(g, x, true, drop), labels).loss; };
      auto grads = [&] {
        const auto out = softmax_cross_entropy(model.forward(g, x, true, drop), labels);
        model.backward(out.grad);
      };
      const auto res = gradient_check(loss, grads, params);
      INFO(layer_kind_name(kind), " seed ", seed, " worst ", res.worst_parameter);
      CHECK(res.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("graph-level models pass gradient_check at 1e-4") {
  for (LayerKind kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(1000 + seed);
      std::vector<Adjacency> graphs;
      std::size_t total = 0;
      for (int i = 0; i < 3; ++i) {
        graphs.push_back(testing::random_graph(2 + rng.below(4), 0.6, rng));
        total += graphs.back().num_nodes();
      }
      std::vector<const Adjacency*> ptrs;
      for (const auto& a : graphs) ptrs.push_back(&a);
      const MessageGraph batch = MessageGraph::batch(ptrs);
      const Tensor x = testing::random_tensor(total, 3, rng);
      const std::vector<int> labels = random_labels(3, 2, rng);
      ModelConfig cfg{kind, TaskKind::kGraph, 3, 4, 2, 3, true, 0.0};
      Rng init = rng.fork(1);
      GnnModel model(cfg, init);
      Rng drop(0);
      auto params = model.parameters();
      auto loss = [&] {
        return softmax_cross_entropy(model.forward(batch, x, true, drop), labels).loss;
      };
      auto grads = [&] {
        const auto out = softmax_cross_entropy(model.forward(batch, x, true, drop), labels);
        model.backward(out.grad);
      };
      const auto res = gradient_check(loss, grads, params);
      INFO(layer_kind_name(kind), " seed ", seed, " worst ", res.worst_parameter);
      CHECK(res.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("reinit_output_layer changes only the output layer") {
  Rng rng(6);
  const Adjacency adj = testing::random_graph(10, 0.3, rng);
  const MessageGraph g(adj);
  const Tensor x = testing::random_tensor(10, 4, rng);
  for (TaskKind task : {TaskKind::kNode, TaskKind::kGraph}) {
    ModelConfig cfg{LayerKind::kGcn, task, 4, 8, 3, 3, true, 0.5};
    Rng init(3);
    GnnModel model(cfg, init);
    const GnnModel before = model;
    const Tensor y0 = model.predict(g, x);
    Rng fresh(99);
    model.reinit_output_layer(fresh);
    CHECK(max_abs_diff(model.predict(g, x), y0) > 0.0);
    GnnModel copy = before;
    auto now = model.parameters();
    auto old = copy.parameters();
    auto outputs = model.output_parameters();
    for (std::size_t i = 0; i < now.size(); ++i) {
      const bool is_output = std::find(outputs.begin(), outputs.end(), now[i]) != outputs.end();
      if (!is_output) CHECK(now[i]->value == old[i]->value);
    }
  }
}

TEST_CASE("frozen feature layers stay bit-identical through training") {
  Rng rng(7);
  const Adjacency adj = testing::random_graph(20, 0.2, rng);
  const MessageGraph g(adj);
  const Tensor x = testing::random_tensor(20, 4, rng);
  const auto labels = random_labels(20, 3, rng);
  for (LayerKind kind : kAllKinds) {
    ModelConfig cfg{kind, TaskKind::kNode, 4, 8, 3, 3, true, 0.5};
    Rng init(4);
    GnnModel model(cfg, init);
    model.freeze_feature_layers();
    GnnModel before = model;
    auto params = model.parameters();
    AdamState adam;
    Rng drop(5);
    for (int step = 0; step < 10; ++step) {
      const auto out = softmax_cross_entropy(model.forward(g, x, true, drop), labels);
      model.backward(out.grad);
      adam_step(params, adam, 0.01);
    }
    auto after_state = model.state();
    auto before_state = before.state();
    const std::size_t output_tensors = model.output_parameters().size();
    for (std::size_t i = 0; i + output_tensors < after_state.size(); ++i)
      CHECK(*after_state[i].tensor == *before_state[i].tensor);
    CHECK(*after_state.back().tensor != *before_state.back().tensor);
  }
}

TEST_CASE("checkpoint round trip reproduces predictions bitwise") {
  Rng rng(10);
  const Adjacency adj = testing::random_graph(9, 0.4, rng);
  const MessageGraph g(adj);
  const Tensor x = testing::random_tensor(9, 3, rng);
  for (LayerKind kind : kAllKinds) {
    for (TaskKind task : {TaskKind::kNode, TaskKind::kGraph}) {
      ModelConfig cfg{kind, task, 3, 5, 2, 3, true, 0.5};
      Rng init(11);
      GnnModel model(cfg, init);
      Rng drop(1);
      model.forward(g, x, true, drop);  // non-trivial running stats
      const auto dir = testing::scratch_dir("ckpt");
      save_checkpoint(model, 42, dir);
      std::uint64_t seed = 0;
      GnnModel back = load_checkpoint(dir, &seed);
      CHECK(seed == 42);
      CHECK(back.config() == cfg);
      CHECK(back.predict(g, x) == model.predict(g, x));
    }
  }
}

TEST_CASE("checkpoint errors") {
  ModelConfig cfg{LayerKind::kSage, TaskKind::kNode, 3, 5, 2, 3, true, 0.5};
  Rng init(1);
  GnnModel model(cfg, init);
  const auto dir = testing::scratch_dir("ckpt_err");
  save_checkpoint(model, 1, dir);
  SUBCASE("truncated weights") {
    const std::string bytes = read_text_file(dir / "weights.bin");
    write_text_file(dir / "weights.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_checkpoint(dir), FormatError);
  }
  SUBCASE("version") {
    std::string meta = read_text_file(dir / "meta.json");
    meta.replace(meta.find("\"version\": 1"), 12, "\"version\": 3");
    write_text_file(dir / "meta.json", meta);
    CHECK_THROWS_AS(load_checkpoint(dir), UnsupportedVersionError);
  }
}

TEST_CASE("copy_feature_layers_from checks shapes") {
  Rng init(1);
  GnnModel source(ModelConfig{LayerKind::kGcn, TaskKind::kNode, 3, 8, 5, 3, true, 0.5}, init);
  GnnModel target(ModelConfig{LayerKind::kGcn, TaskKind::kNode, 3, 8, 2, 3, true, 0.5}, init);
  target.copy_feature_layers_from(source);
  auto s = source.state();
  auto t = target.state();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) CHECK(*s[i].tensor == *t[i].tensor);
  CHECK(*s.back().tensor != *t.back().tensor);

  GnnModel wrong(ModelConfig{LayerKind::kGcn, TaskKind::kNode, 4, 8, 2, 3, true, 0.5}, init);
  CHECK_THROWS_AS(wrong.copy_feature_layers_from(source), ProtocolError);
  GnnModel other_kind(ModelConfig{LayerKind::kGin, TaskKind::kNode, 3, 8, 2, 3, true, 0.5}, init);
  CHECK_THROWS_AS(other_kind.copy_feature_layers_from(source), ProtocolError);
}
