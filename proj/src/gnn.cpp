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

#include "gtl/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "gtl/dataset_io.hpp"
#include "gtl/errors.hpp"

namespace gtl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kGcn: return "gcn";
    case LayerKind::kSage: return "sage";
    case LayerKind::kGin: return "gin";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "gcn") return LayerKind::kGcn;
  if (name == "sage" || name == "graphsage") return LayerKind::kSage;
  if (name == "gin") return LayerKind::kGin;
  throw InputError("unknown layer kind '" + std::string(name) + "' (expected gcn, sage or gin)");
}

std::string_view task_kind_name(TaskKind kind) {
  return kind == TaskKind::kNode ? "node" : "graph";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "node") return TaskKind::kNode;
  if (name == "graph") return TaskKind::kGraph;
  throw InputError("unknown task kind '" + std::string(name) + "' (expected node or graph)");
}

// --- MessageGraph ---------------------------------------------------------

MessageGraph::MessageGraph(const Adjacency& adj) : incoming_(adj.transposed()) {
  compute_degrees(adj);
  offsets_ = {0, adj.num_nodes()};
}

void MessageGraph::compute_degrees(const Adjacency& adj) {
  const DegreeVector d = degrees(adj);
  renorm_ = d.renormalized;
  renorm_in_ = d.renormalized_in;
}

MessageGraph MessageGraph::batch(std::span<const Adjacency* const> graphs) {
  std::vector<Edge> arcs;
  std::vector<std::size_t> offsets{0};
  for (const Adjacency* g : graphs) {
    const auto base = static_cast<NodeId>(offsets.back());
    for (std::size_t u = 0; u < g->num_nodes(); ++u)
      for (NodeId v : g->neighbors(u)) arcs.emplace_back(base + static_cast<NodeId>(u), base + v);
    offsets.push_back(offsets.back() + g->num_nodes());
  }
  // Every stored arc is kept verbatim, so undirected members stay symmetric.
  const Adjacency all = Adjacency::from_edges(arcs, offsets.back(), /*directed=*/true);
  MessageGraph out;
  out.incoming_ = all.transposed();
  out.compute_degrees(all);
  out.offsets_ = std::move(offsets);
  return out;
}

// --- aggregation ----------------------------------------------------------

namespace {

void check_rows(const MessageGraph& graph, const Tensor& h, const char* what) {
  if (h.rows() != graph.num_nodes())
    throw InputError(std::string(what) + ": " + h.shape_string() + " features for " +
                     std::to_string(graph.num_nodes()) + " nodes");
}

// Weight of the message u -> v and of v's own state.
struct Weights {
  LayerKind kind;
  std::span<const double> deg;
  std::span<const double> deg_in;
  double gin_eps;

  double edge(std::size_t u, std::size_t v) const {
    switch (kind) {
      case LayerKind::kGcn: return 1.0 / std::sqrt(deg[u] * deg[v]);
      case LayerKind::kSage: return 1.0 / deg_in[v];
      case LayerKind::kGin: return 1.0;
    }
    return 0.0;
  }
  double self(std::size_t v) const {
    switch (kind) {
      case LayerKind::kGcn: return 1.0 / deg[v];
      case LayerKind::kSage: return 1.0 / deg_in[v];
      case LayerKind::kGin: return 1.0 + gin_eps;
    }
    return 0.0;
  }
};

}  // namespace

Tensor aggregate(LayerKind kind, const MessageGraph& graph, const Tensor& h, double gin_eps) {
  check_rows(graph, h, "aggregate");
  const Weights w{kind, graph.renormalized_degree(), graph.renormalized_in_degree(), gin_eps};
  const std::size_t cols = h.cols();
  Tensor out(h.rows(), cols);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    auto dst = out.row(v);
    const double s = w.self(v);
    auto own = h.row(v);
    for (std::size_t c = 0; c < cols; ++c) dst[c] = s * own[c];
    for (NodeId u : graph.incoming().neighbors(v)) {
      const double a = w.edge(u, v);
      auto src = h.row(u);
      for (std::size_t c = 0; c < cols; ++c) dst[c] += a * src[c];
    }
  }
  return out;
}

Tensor aggregate_backward(LayerKind kind, const MessageGraph& graph, const Tensor& d_out,
                          double gin_eps) {
  check_rows(graph, d_out, "aggregate_backward");
  const Weights w{kind, graph.renormalized_degree(), graph.renormalized_in_degree(), gin_eps};
  const std::size_t cols = d_out.cols();
  Tensor dh(d_out.rows(), cols);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    auto up = d_out.row(v);
    const double s = w.self(v);
    auto own = dh.row(v);
    for (std::size_t c = 0; c < cols; ++c) own[c] += s * up[c];
    for (NodeId u : graph.incoming().neighbors(v)) {
      const double a = w.edge(u, v);
      auto dst = dh.row(u);
      for (std::size_t c = 0; c < cols; ++c) dst[c] += a * up[c];
    }
  }
  return dh;
}

// --- GraphConv ------------------------------------------------------------

GraphConv::GraphConv(LayerKind kind, std::size_t in_dim, std::size_t out_dim,
                     const std::string& name)
    : linear(in_dim, out_dim, /*bias=*/false, name),
      eps(name + ".eps", Tensor(kind == LayerKind::kGin ? 1 : 0, kind == LayerKind::kGin ? 1 : 0)),
      kind_(kind) {}

void GraphConv::reset_parameters(Rng& rng) {
  linear.reset_parameters(rng);
  eps.value.fill(0.0);
}

Tensor GraphConv::forward(const MessageGraph& graph, const Tensor& h) {
  if (h.cols() != linear.in_dim())
    throw InputError("GraphConv: expected " + std::to_string(linear.in_dim()) +
                     " input features, got " + h.shape_string());
  graph_ = &graph;
  input_ = h;
  const double e = kind_ == LayerKind::kGin ? eps.value(0, 0) : 0.0;
  return linear.forward(aggregate(kind_, graph, h, e));
}

Tensor GraphConv::backward(const Tensor& dy, bool input_grad) {
  const Tensor d_agg = linear.backward(dy);
  if (kind_ == LayerKind::kGin && eps.trainable) {
    double g = 0.0;
    auto a = d_agg.values();
    auto h = input_.values();
    for (std::size_t i = 0; i < a.size(); ++i) g += a[i] * h[i];
    eps.grad(0, 0) += g;
  }
  if (!input_grad) return {};
  const double e = kind_ == LayerKind::kGin ? eps.value(0, 0) : 0.0;
  return aggregate_backward(kind_, *graph_, d_agg, e);
}

void GraphConv::collect(std::vector<Parameter*>& out) {
  linear.collect(out);
  if (kind_ == LayerKind::kGin) out.push_back(&eps);
}

// --- pooling --------------------------------------------------------------

namespace {

void check_offsets(std::span<const std::size_t> offsets, std::size_t rows) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != rows)
    throw InputError("mean_pool: graph offsets do not partition " + std::to_string(rows) +
                     " rows");
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g)
    if (offsets[g + 1] <= offsets[g])
      throw InputError("mean_pool: graph " + std::to_string(g) + " has no nodes");
}

}  // namespace

Tensor mean_pool(const Tensor& h, std::span<const std::size_t> offsets) {
  check_offsets(offsets, h.rows());
  const std::size_t graphs = offsets.size() - 1;
  Tensor out(graphs, h.cols());
  for (std::size_t g = 0; g < graphs; ++g) {
    auto dst = out.row(g);
    for (std::size_t r = offsets[g]; r < offsets[g + 1]; ++r) {
      auto src = h.row(r);
      for (std::size_t c = 0; c < h.cols(); ++c) dst[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(offsets[g + 1] - offsets[g]);
    for (double& v : dst) v *= inv;
  }
  return out;
}

Tensor mean_pool_backward(const Tensor& d_pooled, std::span<const std::size_t> offsets) {
  if (d_pooled.rows() + 1 != offsets.size())
    throw InputError("mean_pool_backward: " + d_pooled.shape_string() + " gradient for " +
                     std::to_string(offsets.size() - 1) + " graphs");
  check_offsets(offsets, offsets.back());
  Tensor dh(offsets.back(), d_pooled.cols());
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    const double inv = 1.0 / static_cast<double>(offsets[g + 1] - offsets[g]);
    auto up = d_pooled.row(g);
    for (std::size_t r = offsets[g]; r < offsets[g + 1]; ++r) {
      auto dst = dh.row(r);
      for (std::size_t c = 0; c < d_pooled.cols(); ++c) dst[c] = up[c] * inv;
    }
  }
  return dh;
}

// --- model ----------------------------------------------------------------

void ModelConfig::validate() const {
  if (in_dim == 0 || out_dim == 0) throw InputError("model: input and output dims must be > 0");
  if (hidden_dim == 0) throw InputError("model: hidden_dim must be > 0");
  if (num_layers == 0) throw InputError("model: num_layers must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("model: dropout must be in [0, 1)");
}

GnnModel::GnnModel(const ModelConfig& config, Rng& init_rng) : config_(config) {
  config_.validate();
  const bool node = config_.task == TaskKind::kNode;
  for (std::size_t i = 0; i < config_.num_layers; ++i) {
    const bool last = i + 1 == config_.num_layers;
    const std::size_t in = i == 0 ? config_.in_dim : config_.hidden_dim;
    const std::size_t out = node && last ? config_.out_dim : config_.hidden_dim;
    const std::string name = "conv" + std::to_string(i);
    Block b;
    b.conv = GraphConv(config_.kind, in, out, name);
    b.conv.reset_parameters(init_rng);
    b.activate = !(node && last);
    b.has_bn = b.activate && config_.batch_norm;
    if (b.has_bn) b.bn = BatchNorm(out, "bn" + std::to_string(i));
    b.dropout = Dropout(config_.dropout);
    blocks_.push_back(std::move(b));
  }
  if (!node) {
    head_ = Linear(config_.hidden_dim, config_.out_dim, /*bias=*/true, "head");
    head_.reset_parameters(init_rng);
  }
}

Tensor GnnModel::forward(const MessageGraph& graph, const Tensor& x, bool train,
                         Rng& dropout_rng) {
  Tensor h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    Block& b = blocks_[i];
    // Frozen feature blocks behave as a fixed feature extractor.
    const bool block_train = train && !(frozen_ && !is_output_block(i));
    h = b.conv.forward(graph, h);
    if (b.has_bn) h = b.bn.forward(h, block_train);
    if (b.activate) {
      h = b.relu.forward(h);
      h = b.dropout.forward(h, block_train, dropout_rng);
    }
  }
  if (config_.task == TaskKind::kNode) return h;
  const auto offsets = graph.graph_offsets();
  pool_offsets_.assign(offsets.begin(), offsets.end());
  return head_.forward(mean_pool(h, offsets));
}

Tensor GnnModel::predict(const MessageGraph& graph, const Tensor& x) {
  Rng unused(0);
  return forward(graph, x, /*train=*/false, unused);
}

void GnnModel::backward(const Tensor& d_out) {
  Tensor d = d_out;
  if (config_.task == TaskKind::kGraph) {
    d = head_.backward(d);
    if (frozen_) return;
    d = mean_pool_backward(d, pool_offsets_);
  }
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    Block& b = blocks_[i];
    if (frozen_ && !is_output_block(i)) return;
    if (b.activate) {
      d = b.dropout.backward(d);
      d = b.relu.backward(d);
    }
    if (b.has_bn) d = b.bn.backward(d);
    const bool more = i > 0 && !(frozen_ && is_output_block(i));
    d = b.conv.backward(d, more);
    if (!more) return;
  }
}

std::vector<Parameter*> GnnModel::parameters() {
  std::vector<Parameter*> out;
  for (Block& b : blocks_) {
    b.conv.collect(out);
    if (b.has_bn) b.bn.collect(out);
  }
  if (config_.task == TaskKind::kGraph) head_.collect(out);
  return out;
}

std::vector<Parameter*> GnnModel::output_parameters() {
  std::vector<Parameter*> out;
  if (config_.task == TaskKind::kGraph)
    head_.collect(out);
  else
    blocks_.back().conv.collect(out);
  return out;
}

void GnnModel::reinit_output_layer(Rng& rng) {
  if (config_.task == TaskKind::kGraph)
    head_.reset_parameters(rng);
  else
    blocks_.back().conv.reset_parameters(rng);
}

void GnnModel::freeze_feature_layers() {
  std::vector<Parameter*> outputs = output_parameters();
  for (Parameter* p : parameters())
    if (std::find(outputs.begin(), outputs.end(), p) == outputs.end()) p->trainable = false;
  frozen_ = true;
}

void GnnModel::copy_feature_layers_from(const GnnModel& source) {
  const ModelConfig& s = source.config_;
  if (s.kind != config_.kind || s.task != config_.task || s.in_dim != config_.in_dim ||
      s.hidden_dim != config_.hidden_dim || s.num_layers != config_.num_layers ||
      s.batch_norm != config_.batch_norm)
    throw ProtocolError("source model (" + std::string(layer_kind_name(s.kind)) + ", in " +
                        std::to_string(s.in_dim) + ", hidden " + std::to_string(s.hidden_dim) +
                        ", layers " + std::to_string(s.num_layers) +
                        ") does not match the target feature layers (" +
                        std::string(layer_kind_name(config_.kind)) + ", in " +
                        std::to_string(config_.in_dim) + ", hidden " +
                        std::to_string(config_.hidden_dim) + ", layers " +
                        std::to_string(config_.num_layers) + ")");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (is_output_block(i)) continue;
    Block& dst = blocks_[i];
    const Block& src = source.blocks_[i];
    dst.conv.linear.weight.value = src.conv.linear.weight.value;
    dst.conv.eps.value = src.conv.eps.value;
    if (dst.has_bn) {
      dst.bn.gamma.value = src.bn.gamma.value;
      dst.bn.beta.value = src.bn.beta.value;
      dst.bn.running_mean = src.bn.running_mean;
      dst.bn.running_var = src.bn.running_var;
    }
  }
}

void GnnModel::copy_output_layer_from(const GnnModel& source) {
  const ModelConfig& s = source.config_;
  if (s.kind != config_.kind || s.task != config_.task || s.out_dim != config_.out_dim ||
      s.hidden_dim != config_.hidden_dim || (s.num_layers == 1) != (config_.num_layers == 1))
    throw ProtocolError("cannot keep the source output layer: source has " +
                        std::to_string(s.out_dim) + " outputs, target needs " +
                        std::to_string(config_.out_dim));
  if (config_.task == TaskKind::kGraph) {
    head_.weight.value = source.head_.weight.value;
    head_.bias.value = source.head_.bias.value;
  } else {
    if (blocks_.back().conv.linear.weight.value.rows() !=
        source.blocks_.back().conv.linear.weight.value.rows())
      throw ProtocolError("cannot keep the source output layer: input widths differ");
    blocks_.back().conv.linear.weight.value = source.blocks_.back().conv.linear.weight.value;
    blocks_.back().conv.eps.value = source.blocks_.back().conv.eps.value;
  }
}

std::vector<GnnModel::NamedTensor> GnnModel::state() {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    Block& b = blocks_[i];
    out.push_back({b.conv.linear.weight.name, &b.conv.linear.weight.value});
    if (config_.kind == LayerKind::kGin) out.push_back({b.conv.eps.name, &b.conv.eps.value});
    if (b.has_bn) {
      const std::string bn = "bn" + std::to_string(i);
      out.push_back({b.bn.gamma.name, &b.bn.gamma.value});
      out.push_back({b.bn.beta.name, &b.bn.beta.value});
      out.push_back({bn + ".running_mean", &b.bn.running_mean});
      out.push_back({bn + ".running_var", &b.bn.running_var});
    }
  }
  if (config_.task == TaskKind::kGraph) {
    out.push_back({head_.weight.name, &head_.weight.value});
    out.push_back({head_.bias.name, &head_.bias.value});
  }
  return out;
}

// --- checkpoints ----------------------------------------------------------

namespace {

constexpr const char* kCheckpointFormat = "gtl-checkpoint";
constexpr int kCheckpointVersion = 1;

json config_to_json(const ModelConfig& c) {
  return {{"kind", layer_kind_name(c.kind)}, {"task", task_kind_name(c.task)},
          {"in_dim", c.in_dim},             {"hidden_dim", c.hidden_dim},
          {"out_dim", c.out_dim},           {"num_layers", c.num_layers},
          {"batch_norm", c.batch_norm},     {"dropout", c.dropout}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.kind = parse_layer_kind(j.at("kind").get<std::string>());
  c.task = parse_task_kind(j.at("task").get<std::string>());
  c.in_dim = j.at("in_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.out_dim = j.at("out_dim").get<std::size_t>();
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.batch_norm = j.at("batch_norm").get<bool>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

}  // namespace

void save_checkpoint(GnnModel& model, std::uint64_t seed, const fs::path& dir) {
  json tensors = json::array();
  std::vector<double> flat;
  for (const auto& [name, t] : model.state()) {
    tensors.push_back({{"name", name}, {"rows", t->rows()}, {"cols", t->cols()}});
    flat.insert(flat.end(), t->values().begin(), t->values().end());
  }
  const json meta = {{"format", kCheckpointFormat},
                     {"version", kCheckpointVersion},
                     {"model", config_to_json(model.config())},
                     {"seed", seed},
                     {"frozen_feature_layers", model.feature_layers_frozen()},
                     {"tensors", tensors}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  write_f64_file(dir / "weights.bin", flat);
}

GnnModel load_checkpoint(const fs::path& dir, std::uint64_t* seed) {
  const fs::path meta_file = dir / "meta.json";
  if (!fs::exists(meta_file)) throw FormatError(meta_file.string() + ": missing");
  json meta;
  ModelConfig config;
  try {
    meta = json::parse(read_text_file(meta_file));
    if (meta.at("format").get<std::string>() != kCheckpointFormat)
      throw FormatError(meta_file.string() + ": not a checkpoint");
    const int version = meta.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw UnsupportedVersionError(meta_file.string() + ": unsupported checkpoint version " +
                                    std::to_string(version));
    config = config_from_json(meta.at("model"));
    if (seed) *seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(meta_file.string() + ": " + e.what());
  }

  Rng unused(0);
  GnnModel model(config, unused);
  auto state = model.state();
  const json& tensors = meta.at("tensors");
  if (!tensors.is_array() || tensors.size() != state.size())
    throw FormatError(meta_file.string() + ": tensor list does not match the model layout");
  std::size_t total = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const json& t = tensors[i];
    if (t.value("name", "") != state[i].name || t.value("rows", 0u) != state[i].tensor->rows() ||
        t.value("cols", 0u) != state[i].tensor->cols())
      throw FormatError(meta_file.string() + ": tensor " + std::to_string(i) + " is " +
                        t.dump() + ", expected " + state[i].name + " " +
                        state[i].tensor->shape_string());
    total += state[i].tensor->size();
  }
  const std::vector<double> flat = read_f64_file(dir / "weights.bin", total);
  std::size_t pos = 0;
  for (auto& [name, t] : state) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + t->size()), t->values().begin());
    pos += t->size();
  }
  if (meta.value("frozen_feature_layers", false)) model.freeze_feature_layers();
  return model;
}

}  // namespace gtl
