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

#include "gtl/config.hpp"

#include <set>

#include "gtl/dataset_io.hpp"
#include "gtl/errors.hpp"

namespace gtl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view protocol_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::kNone: return "none";
    case Protocol::kFineTuneReinit: return "fine_tune_reinit";
    case Protocol::kFineTuneOldLayer: return "fine_tune_old_layer";
    case Protocol::kFrozen: return "frozen";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::kNone, Protocol::kFineTuneReinit, Protocol::kFineTuneOldLayer,
                     Protocol::kFrozen})
    if (protocol_name(p) == name) return p;
  throw InputError("unknown protocol '" + std::string(name) +
                   "' (expected none, fine_tune_reinit, fine_tune_old_layer or frozen)");
}

json read_json_file(const fs::path& file) {
  if (!fs::exists(file)) throw InputError(file.string() + ": no such file");
  try {
    return json::parse(read_text_file(file));
  } catch (const json::parse_error& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j.is_object()) throw InputError(context_ + ": expected a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (v.get<long long>() < 0) fail(key, "a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "a number");
    } else {
      if (!v.is_string()) fail(key, "a string");
    }
    out = v.get<T>();
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (!has(key)) return;
    T value{};
    read(key, value);
    out = value;
  }

  void read_path(const char* key, fs::path& out, const fs::path& base) {
    std::string s;
    read(key, s);
    if (s.empty()) return;
    fs::path p(s);
    out = p.is_relative() && !base.empty() ? base / p : p;
  }

  const json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        std::string known;
        for (const auto& k : seen_) known += (known.empty() ? "" : ", ") + k;
        throw InputError(context_ + ": unknown key '" + key + "' (known keys: " + known + ")");
      }
    }
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw InputError(context_ + ": '" + key + "' must be " + what);
  }

  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace

double ExperimentConfig::resolved_learning_rate(TaskKind task_kind) const {
  if (learning_rate) return *learning_rate;
  const bool fast = synthetic && task_kind == TaskKind::kNode &&
                    (model == LayerKind::kGcn || model == LayerKind::kSage);
  return fast ? 0.01 : 0.001;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw InputError("config: 'dataset' is required");
  if (output.empty()) throw InputError("config: 'output' is required");
  if (runs < 1) throw InputError("config: runs must be >= 1");
  if (epochs < 1) throw InputError("config: epochs must be >= 1");
  if (eval_every < 1) throw InputError("config: eval_every must be >= 1");
  if (batch_size < 1) throw InputError("config: batch_size must be >= 1");
  if (num_layers < 1 || hidden_dim < 1) throw InputError("config: num_layers and hidden_dim must be >= 1");
  if (threads < 1) throw InputError("config: threads must be >= 1");
  if (tail < 1) throw InputError("config: tail must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("config: dropout must be in [0, 1)");
  if (learning_rate && !(*learning_rate > 0.0)) throw InputError("config: learning_rate must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("config: alpha must be in (0, 1)");
  if (protocol != Protocol::kNone && source_checkpoint.empty() && source_dataset.empty())
    throw InputError("config: protocol '" + std::string(protocol_name(protocol)) +
                     "' needs source_checkpoint or source_dataset");
}

ExperimentConfig parse_experiment_config(const json& j, const fs::path& base_dir) {
  Fields f(j, "experiment config");
  ExperimentConfig c;
  if (f.has("profile")) {
    std::string profile;
    f.read("profile", profile);
    if (profile == "desk") {
      c.epochs = 200;
      c.runs = 5;
      c.eval_every = 1;
    } else if (profile == "full") {
      c.epochs = 2000;
      c.runs = 10;
    } else {
      throw InputError("experiment config: profile must be 'desk' or 'full'");
    }
  }
  f.read("label", c.label);
  if (f.has("task")) {
    std::string s;
    f.read("task", s);
    c.task = parse_task_kind(s);
  }
  if (f.has("model")) {
    std::string s;
    f.read("model", s);
    c.model = parse_layer_kind(s);
  }
  f.read("num_layers", c.num_layers);
  f.read("hidden_dim", c.hidden_dim);
  f.read("epochs", c.epochs);
  f.read("learning_rate", c.learning_rate);
  f.read("dropout", c.dropout);
  f.read("batch_norm", c.batch_norm);
  f.read("batch_size", c.batch_size);
  f.read("runs", c.runs);
  f.read("seed", c.seed);
  f.read("eval_every", c.eval_every);
  if (f.has("metric")) {
    std::string s;
    f.read("metric", s);
    c.metric = parse_metric(s);
  }
  f.read_path("dataset", c.dataset, base_dir);
  if (f.has("protocol")) {
    std::string s;
    f.read("protocol", s);
    c.protocol = parse_protocol(s);
  }
  f.read_path("source_checkpoint", c.source_checkpoint, base_dir);
  f.read_path("source_dataset", c.source_dataset, base_dir);
  f.read("damage_source", c.damage_source);
  f.read("permute_source_labels", c.permute_source_labels);
  f.read("synthetic", c.synthetic);
  f.read_path("control", c.control, base_dir);
  f.read("tail", c.tail);
  f.read("alpha", c.alpha);
  f.read("threads", c.threads);
  f.read_path("output", c.output, base_dir);
  f.reject_unknown();
  if (c.label.empty() && !c.output.empty()) c.label = c.output.filename().string();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
  return parse_experiment_config(read_json_file(file), fs::absolute(file).parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j = {{"label", c.label},
            {"model", layer_kind_name(c.model)},
            {"num_layers", c.num_layers},
            {"hidden_dim", c.hidden_dim},
            {"epochs", c.epochs},
            {"dropout", c.dropout},
            {"batch_norm", c.batch_norm},
            {"batch_size", c.batch_size},
            {"runs", c.runs},
            {"seed", c.seed},
            {"eval_every", c.eval_every},
            {"metric", metric_name(c.metric)},
            {"dataset", c.dataset.string()},
            {"protocol", protocol_name(c.protocol)},
            {"damage_source", c.damage_source},
            {"permute_source_labels", c.permute_source_labels},
            {"synthetic", c.synthetic},
            {"tail", c.tail},
            {"alpha", c.alpha},
            {"threads", c.threads},
            {"output", c.output.string()}};
  j["task"] = c.task ? json(task_kind_name(*c.task)) : json(nullptr);
  j["learning_rate"] = c.learning_rate ? json(*c.learning_rate) : json(nullptr);
  j["source_checkpoint"] = c.source_checkpoint.empty() ? json(nullptr) : json(c.source_checkpoint.string());
  j["source_dataset"] = c.source_dataset.empty() ? json(nullptr) : json(c.source_dataset.string());
  j["control"] = c.control.empty() ? json(nullptr) : json(c.control.string());
  return j;
}

// --- generation -----------------------------------------------------------

json to_json(const GraphGenConfig& c) {
  return {{"num_classes", c.num_classes},       {"n_per_class", c.n_per_class},
          {"n_features", c.n_features},         {"percent_swap", c.percent_swap},
          {"percent_damage", c.percent_damage}, {"nodes_per_graph", c.nodes_per_graph},
          {"class_separation", c.class_separation}, {"seed", c.seed}};
}

json to_json(const NodeGenConfig& c) {
  return {{"num_nodes", c.num_nodes},
          {"num_communities", c.num_communities},
          {"p_in", c.p_in},
          {"p_out", c.p_out},
          {"attr_noise", c.attr_noise},
          {"centroid_separation", c.centroid_separation},
          {"n_features", c.n_features},
          {"seed", c.seed}};
}

GraphGenConfig graph_gen_config_from_json(const json& j) {
  Fields f(j, "graph generator config");
  GraphGenConfig c;
  f.read("num_classes", c.num_classes);
  f.read("n_per_class", c.n_per_class);
  f.read("n_features", c.n_features);
  f.read("percent_swap", c.percent_swap);
  f.read("percent_damage", c.percent_damage);
  f.read("nodes_per_graph", c.nodes_per_graph);
  f.read("class_separation", c.class_separation);
  f.read("seed", c.seed);
  f.reject_unknown();
  c.validate();
  return c;
}

NodeGenConfig node_gen_config_from_json(const json& j) {
  Fields f(j, "node generator config");
  NodeGenConfig c;
  f.read("num_nodes", c.num_nodes);
  f.read("num_communities", c.num_communities);
  f.read("p_in", c.p_in);
  f.read("p_out", c.p_out);
  f.read("attr_noise", c.attr_noise);
  f.read("centroid_separation", c.centroid_separation);
  f.read("n_features", c.n_features);
  f.read("seed", c.seed);
  f.reject_unknown();
  c.validate();
  return c;
}

void GenerationConfig::validate() const {
  const int sources = (preset ? 1 : 0) + (graph ? 1 : 0) + (node ? 1 : 0);
  if (sources != 1) throw InputError("generation config: give exactly one of preset, graph, node");
  if ((target_modularity || target_inertia) && !node)
    throw InputError("generation config: calibration targets need a node config");
  if (target_modularity.has_value() != target_inertia.has_value())
    throw InputError("generation config: give both target_modularity and target_inertia");
  if (calibration_seeds < 1) throw InputError("generation config: calibration_seeds must be >= 1");
  if (output.empty()) throw InputError("generation config: 'output' is required");
}

GenerationConfig parse_generation_config(const json& j, const fs::path& base_dir) {
  Fields f(j, "generation config");
  GenerationConfig c;
  f.read("preset", c.preset);
  if (f.has("graph")) c.graph = graph_gen_config_from_json(f.sub("graph"));
  if (f.has("node")) c.node = node_gen_config_from_json(f.sub("node"));
  f.read("target_modularity", c.target_modularity);
  f.read("target_inertia", c.target_inertia);
  f.read("calibration_seeds", c.calibration_seeds);
  f.read("seed", c.seed);
  f.read_path("output", c.output, base_dir);
  f.reject_unknown();
  c.validate();
  return c;
}

GenerationConfig load_generation_config(const fs::path& file) {
  return parse_generation_config(read_json_file(file), fs::absolute(file).parent_path());
}

}  // namespace gtl
