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

#include "gtl/train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "gtl/errors.hpp"

namespace gtl {

TaskKind task_of(const Dataset& data) {
  return std::holds_alternative<NodeGraph>(data) ? TaskKind::kNode : TaskKind::kGraph;
}

int num_classes_of(const Dataset& data) {
  return std::visit([](const auto& d) { return d.num_classes; }, data);
}

std::size_t num_features_of(const Dataset& data) {
  if (const auto* g = std::get_if<NodeGraph>(&data)) return g->num_features();
  return std::get<GraphDataset>(data).num_features;
}

std::size_t output_dim_for(int num_classes) {
  return num_classes == 2 ? 1 : static_cast<std::size_t>(num_classes);
}

ModelConfig model_config_for(const Dataset& data, LayerKind kind, std::size_t hidden_dim,
                             std::size_t num_layers, bool batch_norm, double dropout) {
  ModelConfig c;
  c.kind = kind;
  c.task = task_of(data);
  c.in_dim = num_features_of(data);
  c.hidden_dim = hidden_dim;
  c.out_dim = output_dim_for(num_classes_of(data));
  c.num_layers = num_layers;
  c.batch_norm = batch_norm;
  c.dropout = dropout;
  return c;
}

Dataset permute_labels(Dataset data, Rng& rng) {
  if (auto* g = std::get_if<NodeGraph>(&data)) {
    rng.shuffle(std::span<int>(g->labels));
  } else {
    auto& ds = std::get<GraphDataset>(data);
    std::vector<int> labels = ds.labels();
    rng.shuffle(std::span<int>(labels));
    for (std::size_t i = 0; i < labels.size(); ++i) ds.samples[i].label = labels[i];
  }
  return data;
}

Dataset damage_dataset(Dataset data, Rng& rng) {
  return std::visit([&](auto& d) -> Dataset { return damage_features(std::move(d), rng); }, data);
}

namespace {

struct Batch {
  MessageGraph graph;
  Tensor x;
  std::vector<int> labels;
};

Batch make_batch(const GraphDataset& ds, std::span<const std::size_t> members) {
  Batch b;
  std::vector<const Adjacency*> adjs;
  std::size_t rows = 0;
  for (std::size_t i : members) {
    adjs.push_back(&ds.samples[i].adj);
    rows += ds.samples[i].adj.num_nodes();
    b.labels.push_back(ds.samples[i].label);
  }
  b.graph = MessageGraph::batch(adjs);
  b.x = Tensor(rows, ds.num_features);
  std::size_t r = 0;
  for (std::size_t i : members) {
    const Tensor& f = ds.samples[i].features;
    std::copy(f.values().begin(), f.values().end(), b.x.values().begin() + static_cast<std::ptrdiff_t>(r * ds.num_features));
    r += f.rows();
  }
  return b;
}

LossResult task_loss(const Tensor& logits, std::span<const int> labels) {
  return logits.cols() == 1 ? binary_logistic_loss(logits, labels)
                            : softmax_cross_entropy(logits, labels);
}

double score(const Tensor& logits, std::span<const int> labels, MetricKind metric) {
  const std::size_t n = logits.rows();
  if (metric == MetricKind::kRocAuc) {
    if (logits.cols() != 1) throw InputError("roc_auc needs a binary task");
    std::vector<double> s(n);
    for (std::size_t r = 0; r < n; ++r) s[r] = logits(r, 0);
    return roc_auc(s, labels);
  }
  std::vector<int> pred(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (logits.cols() == 1) {
      pred[r] = logits(r, 0) > 0.0 ? 1 : 0;
    } else {
      auto row = logits.row(r);
      pred[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
  }
  return accuracy(pred, labels);
}

Tensor select_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out(rows.size(), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = t.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// Per-split structures reused across epochs.
class Prepared {
 public:
  explicit Prepared(const Dataset& data) : data_(data) {
    if (const auto* g = std::get_if<NodeGraph>(&data)) {
      node_graph_ = MessageGraph(g->adj);
      for (std::size_t v = 0; v < g->num_nodes(); ++v) {
        const auto s = static_cast<std::size_t>(g->split[v]);
        node_index_[s].push_back(v);
        node_labels_[s].push_back(g->labels[v]);
      }
    } else {
      const auto& ds = std::get<GraphDataset>(data);
      for (std::size_t i = 0; i < ds.samples.size(); ++i)
        graph_index_[static_cast<std::size_t>(ds.split[i])].push_back(i);
      for (std::size_t s = 0; s < 3; ++s)
        if (!graph_index_[s].empty()) split_batches_[s] = make_batch(ds, graph_index_[s]);
    }
    if (split_size(Split::kTrain) == 0) throw InputError("dataset has an empty train split");
  }

  std::size_t split_size(Split s) const {
    const auto i = static_cast<std::size_t>(s);
    return is_node() ? node_index_[i].size() : graph_index_[i].size();
  }

  bool is_node() const { return std::holds_alternative<NodeGraph>(data_); }

  /// Scores for all three splits (NaN for an empty split).
  std::array<double, 3> evaluate_all(GnnModel& model, MetricKind metric) {
    std::array<double, 3> out{};
    if (is_node()) {
      const auto& g = std::get<NodeGraph>(data_);
      const Tensor logits = model.predict(node_graph_, g.features);
      for (std::size_t s = 0; s < 3; ++s)
        out[s] = node_index_[s].empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : score(select_rows(logits, node_index_[s]), node_labels_[s], metric);
    } else {
      for (std::size_t s = 0; s < 3; ++s) {
        if (graph_index_[s].empty()) {
          out[s] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const Batch& b = split_batches_[s];
        out[s] = score(model.predict(b.graph, b.x), b.labels, metric);
      }
    }
    return out;
  }

  double evaluate(GnnModel& model, Split split, MetricKind metric) {
    if (split_size(split) == 0) throw InputError("cannot evaluate an empty split");
    return evaluate_all(model, metric)[static_cast<std::size_t>(split)];
  }

  void train_epoch(GnnModel& model, std::span<Parameter* const> params, AdamState& adam,
                   const TrainOptions& options, Rng& rng) {
    if (is_node()) {
      const auto& g = std::get<NodeGraph>(data_);
      const auto& train = node_index_[0];
      const Tensor logits = model.forward(node_graph_, g.features, true, rng);
      const LossResult loss = task_loss(select_rows(logits, train), node_labels_[0]);
      Tensor full(logits.rows(), logits.cols());
      for (std::size_t i = 0; i < train.size(); ++i) {
        auto src = loss.grad.row(i);
        std::copy(src.begin(), src.end(), full.row(train[i]).begin());
      }
      model.backward(full);
      adam_step(params, adam, options.learning_rate);
      return;
    }
    const auto& ds = std::get<GraphDataset>(data_);
    std::vector<std::size_t> order = graph_index_[0];
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const std::span<const std::size_t> members(order.data() + start, end - start);
      Batch b = make_batch(ds, members);
      // Batch statistics need at least two rows.
      if (b.x.rows() < 2) continue;
      const Tensor logits = model.forward(b.graph, b.x, true, rng);
      model.backward(task_loss(logits, b.labels).grad);
      adam_step(params, adam, options.learning_rate);
    }
  }

 private:
  const Dataset& data_;
  MessageGraph node_graph_;
  std::array<std::vector<std::size_t>, 3> node_index_;
  std::array<std::vector<int>, 3> node_labels_;
  std::array<std::vector<std::size_t>, 3> graph_index_;
  std::array<Batch, 3> split_batches_;
};

}  // namespace

double evaluate(GnnModel& model, const Dataset& data, Split split, MetricKind metric) {
  Prepared prepared(data);
  return prepared.evaluate(model, split, metric);
}

SplitCurves train_model(GnnModel& model, const Dataset& data, const TrainOptions& options,
                        Rng& rng) {
  if (options.epochs < 1 || options.eval_every < 1 || options.batch_size < 1)
    throw InputError("train: epochs, eval_every and batch_size must be >= 1");
  if (options.metric == MetricKind::kRocAuc && num_classes_of(data) != 2)
    throw InputError("roc_auc needs a binary task, dataset has " +
                     std::to_string(num_classes_of(data)) + " classes");
  if (model.config().in_dim != num_features_of(data))
    throw InputError("model expects " + std::to_string(model.config().in_dim) +
                     " features, dataset has " + std::to_string(num_features_of(data)));
  if (model.config().out_dim != output_dim_for(num_classes_of(data)))
    throw ProtocolError("model has " + std::to_string(model.config().out_dim) +
                        " outputs, dataset needs " +
                        std::to_string(output_dim_for(num_classes_of(data))));
  if (model.config().task != task_of(data))
    throw InputError("model task does not match the dataset");

  Prepared prepared(data);
  SplitCurves curves;
  for (auto& c : curves) c.metric = options.metric;
  auto record = [&](std::size_t epoch) {
    const auto scores = prepared.evaluate_all(model, options.metric);
    for (std::size_t s = 0; s < 3; ++s) {
      curves[s].epochs.push_back(static_cast<double>(epoch));
      curves[s].scores.push_back(scores[s]);
    }
  };

  record(0);
  auto params = model.parameters();
  AdamState adam;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    prepared.train_epoch(model, params, adam, options, rng);
    if (epoch % options.eval_every == 0) record(epoch);
  }
  for (const auto& p : params)
    if (!p->value.all_finite()) throw NumericError("training diverged: " + p->name + " is not finite");
  return curves;
}

}  // namespace gtl
