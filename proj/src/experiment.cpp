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

#include "gtl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "gtl/community.hpp"
#include "gtl/errors.hpp"

namespace gtl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream tags forked from a run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainStream = 2;
// Fresh output layer of a transferred model. Kept apart from kInitStream so
// it is independent of the source model's initial output layer when the
// source was pretrained with the same run seed.
constexpr std::uint64_t kHeadStream = 3;
// Stream tags forked from the experiment seed.
constexpr std::uint64_t kDamageStream = 100;
constexpr std::uint64_t kPermuteStream = 101;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double parse_double(const std::string& s, const fs::path& file, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw FormatError(file.filename().string() + ":" + std::to_string(line) + ": bad number '" +
                      s + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Dataset load_checked(const ExperimentConfig& config, const fs::path& dir) {
  Dataset data = load_dataset(dir);
  if (config.task && *config.task != task_of(data))
    throw InputError("config task '" + std::string(task_kind_name(*config.task)) + "' but " +
                     dir.string() + " is a " + std::string(task_kind_name(task_of(data))) +
                     " dataset");
  return data;
}

TrainOptions train_options(const ExperimentConfig& config, TaskKind task) {
  TrainOptions o;
  o.epochs = config.epochs;
  o.learning_rate = config.resolved_learning_rate(task);
  o.batch_size = config.batch_size;
  o.eval_every = config.eval_every;
  o.metric = config.metric;
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json record_json(const RunRecord& r) {
  json j = {{"run", r.run}, {"seed", r.seed}, {"wall_seconds", r.wall_seconds}};
  j["checkpoint"] = r.checkpoint.empty() ? json(nullptr) : json(r.checkpoint.string());
  json final_scores;
  for (std::size_t s = 0; s < 3; ++s)
    final_scores[std::string(split_name(static_cast<Split>(s)))] =
        json_number(r.curves[s].scores.back());
  j["final"] = final_scores;
  j["curve_points"] = r.curves[0].size();
  return j;
}

void write_json(const fs::path& file, const json& j) { write_text_file(file, j.dump(2) + "\n"); }

fs::path checkpoint_for_run(const fs::path& source, std::size_t run) {
  if (fs::exists(source / "meta.json")) return source;
  std::size_t available = 0;
  while (fs::exists(source / ("run_" + std::to_string(available)) / "checkpoint" / "meta.json"))
    ++available;
  if (available == 0)
    throw InputError(source.string() + ": neither a checkpoint nor a pretrain output directory");
  return source / ("run_" + std::to_string(run % available)) / "checkpoint";
}

json summary_block(const std::vector<double>& values) {
  const Summary s = summarize(values);
  return {{"mean", s.mean}, {"std", s.std}, {"values", values}};
}

}  // namespace

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run) {
  return config.seed + run;
}

void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(threads, n));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// --- CSV ------------------------------------------------------------------

void write_curves_csv(const fs::path& file, const std::vector<RunRecord>& runs) {
  std::string out = "run,epoch,split,metric,value\n";
  for (const RunRecord& r : runs)
    for (std::size_t s = 0; s < 3; ++s) {
      const LearningCurve& c = r.curves[s];
      const std::string prefix = std::to_string(r.run) + ",";
      for (std::size_t i = 0; i < c.size(); ++i)
        out += prefix + fmt_double(c.epochs[i]) + "," +
               std::string(split_name(static_cast<Split>(s))) + "," +
               std::string(metric_name(c.metric)) + "," + fmt_double(c.scores[i]) + "\n";
    }
  write_text_file(file, out);
}

std::vector<LearningCurve> read_curves_csv(const fs::path& file, Split split) {
  std::istringstream in(read_text_file(file));
  std::string line;
  if (!std::getline(in, line) || line != "run,epoch,split,metric,value")
    throw FormatError(file.string() + ": bad header");
  std::map<long, LearningCurve> by_run;
  std::size_t lineno = 1;
  const std::string wanted(split_name(split));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5)
      throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                        ": expected 5 columns");
    if (cells[2] != wanted) continue;
    LearningCurve& c = by_run[static_cast<long>(parse_double(cells[0], file, lineno))];
    c.metric = parse_metric(cells[3]);
    c.epochs.push_back(parse_double(cells[1], file, lineno));
    c.scores.push_back(parse_double(cells[4], file, lineno));
  }
  std::vector<LearningCurve> out;
  for (auto& [run, c] : by_run) out.push_back(std::move(c));
  return out;
}

void write_metrics_csv(const fs::path& file, const std::vector<RunRecord>& runs,
                       const std::vector<TransferMetrics>& metrics) {
  std::string out = "run,seed,transfer_ratio,jumpstart,asymptotic\n";
  for (std::size_t i = 0; i < metrics.size(); ++i)
    out += std::to_string(runs[i].run) + "," + std::to_string(runs[i].seed) + "," +
           fmt_double(metrics[i].transfer_ratio) + "," + fmt_double(metrics[i].jumpstart) + "," +
           fmt_double(metrics[i].asymptotic) + "\n";
  write_text_file(file, out);
}

std::vector<TransferMetrics> read_metrics_csv(const fs::path& file) {
  std::istringstream in(read_text_file(file));
  std::string line;
  if (!std::getline(in, line) || line != "run,seed,transfer_ratio,jumpstart,asymptotic")
    throw FormatError(file.string() + ": bad header");
  std::vector<TransferMetrics> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5)
      throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                        ": expected 5 columns");
    out.push_back({parse_double(cells[2], file, lineno), parse_double(cells[3], file, lineno),
                   parse_double(cells[4], file, lineno)});
  }
  return out;
}

// --- pretrain -------------------------------------------------------------

PretrainResult run_pretrain(const ExperimentConfig& config) {
  config.validate();
  Dataset data = load_checked(config, config.dataset);
  const Rng experiment_rng(config.seed);
  if (config.damage_source) {
    Rng rng = experiment_rng.fork(kDamageStream);
    data = damage_dataset(std::move(data), rng);
  }
  if (config.permute_source_labels) {
    Rng rng = experiment_rng.fork(kPermuteStream);
    data = permute_labels(std::move(data), rng);
  }
  const ModelConfig model_config = model_config_for(data, config.model, config.hidden_dim,
                                                    config.num_layers, config.batch_norm,
                                                    config.dropout);
  const TrainOptions options = train_options(config, task_of(data));

  PretrainResult result;
  result.runs.resize(config.runs);
  run_parallel(config.runs, config.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord& r = result.runs[i];
    r.run = i;
    r.seed = run_seed(config, i);
    const Rng root(r.seed);
    Rng init = root.fork(kInitStream);
    Rng train_rng = root.fork(kTrainStream);
    GnnModel model(model_config, init);
    r.curves = train_model(model, data, options, train_rng);
    r.checkpoint = config.output / ("run_" + std::to_string(i)) / "checkpoint";
    save_checkpoint(model, r.seed, r.checkpoint);
    r.wall_seconds = seconds_since(start);
  });

  write_json(config.output / "config.json", to_json(config));
  write_curves_csv(config.output / "curves.csv", result.runs);
  json runs = json::array();
  for (const auto& r : result.runs) runs.push_back(record_json(r));
  write_json(config.output / "runs.json", runs);
  json finals;
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<double> v;
    for (const auto& r : result.runs) v.push_back(r.curves[s].scores.back());
    finals[std::string(split_name(static_cast<Split>(s)))] = summary_block(v);
  }
  write_json(config.output / "summary.json",
             {{"kind", "pretrain"},
              {"label", config.label},
              {"model", layer_kind_name(config.model)},
              {"task", task_kind_name(task_of(data))},
              {"metric", metric_name(config.metric)},
              {"runs", config.runs},
              {"epochs", config.epochs},
              {"damage_source", config.damage_source},
              {"permute_source_labels", config.permute_source_labels},
              {"final", finals}});
  return result;
}

// --- transfer -------------------------------------------------------------

TransferResult run_transfer(const ExperimentConfig& config) {
  config.validate();
  const Dataset data = load_checked(config, config.dataset);
  const ModelConfig model_config = model_config_for(data, config.model, config.hidden_dim,
                                                    config.num_layers, config.batch_norm,
                                                    config.dropout);
  const TrainOptions options = train_options(config, task_of(data));

  fs::path source = config.source_checkpoint;
  if (config.protocol != Protocol::kNone && source.empty()) {
    ExperimentConfig pre = config;
    pre.dataset = config.source_dataset;
    pre.output = config.output / "source";
    pre.protocol = Protocol::kNone;
    pre.control.clear();
    pre.task.reset();
    pre.label = config.label + " (source)";
    run_pretrain(pre);
    source = pre.output;
  }

  TransferResult result;
  result.base.resize(config.runs);
  result.transfer.resize(config.runs);
  run_parallel(config.runs, config.threads, [&](std::size_t i) {
    const std::uint64_t seed = run_seed(config, i);
    const Rng root(seed);

    auto start = std::chrono::steady_clock::now();
    Rng init = root.fork(kInitStream);
    GnnModel base(model_config, init);
    Rng train_rng = root.fork(kTrainStream);
    result.base[i] = {i, seed, train_model(base, data, options, train_rng), {}, 0.0};
    result.base[i].wall_seconds = seconds_since(start);

    start = std::chrono::steady_clock::now();
    Rng init_again = root.fork(kInitStream);
    GnnModel model(model_config, init_again);
    if (config.protocol != Protocol::kNone) {
      const GnnModel src = load_checkpoint(checkpoint_for_run(source, i));
      model.copy_feature_layers_from(src);
      if (config.protocol == Protocol::kFineTuneOldLayer) {
        model.copy_output_layer_from(src);
      } else {
        Rng head = root.fork(kHeadStream);
        model.reinit_output_layer(head);
      }
      if (config.protocol == Protocol::kFrozen) model.freeze_feature_layers();
    }
    Rng train_again = root.fork(kTrainStream);
    result.transfer[i] = {i, seed, train_model(model, data, options, train_again), {}, 0.0};
    result.transfer[i].wall_seconds = seconds_since(start);
  });

  const auto test = static_cast<std::size_t>(Split::kTest);
  for (std::size_t i = 0; i < config.runs; ++i)
    result.metrics.push_back(transfer_metrics(result.transfer[i].curves[test],
                                              result.base[i].curves[test], config.tail));

  std::array<std::vector<double>, 3> values;
  for (const auto& m : result.metrics) {
    values[0].push_back(m.transfer_ratio);
    values[1].push_back(m.jumpstart);
    values[2].push_back(m.asymptotic);
  }
  const char* names[] = {"transfer_ratio", "jumpstart", "asymptotic"};

  json control_json = nullptr;
  if (!config.control.empty()) {
    const auto control = read_metrics_csv(config.control / "metrics.csv");
    std::array<std::vector<double>, 3> cv;
    for (const auto& m : control) {
      cv[0].push_back(m.transfer_ratio);
      cv[1].push_back(m.jumpstart);
      cv[2].push_back(m.asymptotic);
    }
    control_json = {{"dir", config.control.string()}, {"alpha", config.alpha}};
    for (std::size_t k = 0; k < 3; ++k) {
      ControlTest t{names[k], std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN(), false};
      try {
        const TTestResult r = welch_t_greater(values[k], cv[k]);
        t.p = r.p;
        t.t = r.t;
        t.significant = r.significant(config.alpha);
      } catch (const StatsError&) {
      }
      result.control.push_back(t);
      control_json[names[k]] = {{"p", json_number(t.p)},
                                {"t", json_number(t.t)},
                                {"significant", t.significant}};
    }
  }

  write_json(config.output / "config.json", to_json(config));
  write_curves_csv(config.output / "base" / "curves.csv", result.base);
  write_curves_csv(config.output / "transfer" / "curves.csv", result.transfer);
  write_metrics_csv(config.output / "metrics.csv", result.transfer, result.metrics);
  json runs = json::array();
  for (std::size_t i = 0; i < config.runs; ++i)
    runs.push_back({{"base", record_json(result.base[i])},
                    {"transfer", record_json(result.transfer[i])}});
  write_json(config.output / "runs.json", runs);
  json metrics;
  for (std::size_t k = 0; k < 3; ++k) metrics[names[k]] = summary_block(values[k]);
  write_json(config.output / "summary.json",
             {{"kind", "transfer"},
              {"label", config.label},
              {"model", layer_kind_name(config.model)},
              {"task", task_kind_name(task_of(data))},
              {"protocol", protocol_name(config.protocol)},
              {"metric", metric_name(config.metric)},
              {"runs", config.runs},
              {"epochs", config.epochs},
              {"source", source.empty() ? json(nullptr) : json(source.string())},
              {"metrics", metrics},
              {"control", control_json}});
  return result;
}

// --- datasets -------------------------------------------------------------

json dataset_metrics(const Dataset& data) {
  json j = {{"modularity", nullptr}, {"within_inertia", nullptr}, {"I_S", nullptr},
            {"I_A", nullptr}};
  if (const auto* g = std::get_if<NodeGraph>(&data)) {
    j["kind"] = "node";
    j["modularity"] = modularity(*g);
    j["within_inertia"] = within_inertia(*g);
  } else {
    const auto& ds = std::get<GraphDataset>(data);
    j["kind"] = "graph";
    j["I_S"] = structural_within_inertia(ds);
    j["I_A"] = attribute_within_inertia(ds);
  }
  return j;
}

json run_generate(const GenerationConfig& config) {
  config.validate();
  json sidecar;
  sidecar["preset"] = config.preset ? json(*config.preset) : json(nullptr);
  sidecar["calibration"] = nullptr;

  std::optional<GraphGenConfig> graph = config.graph;
  std::optional<NodeGenConfig> node = config.node;
  std::optional<double> target_m = config.target_modularity;
  std::optional<double> target_i = config.target_inertia;
  if (config.preset) {
    const Preset p = preset(*config.preset);
    sidecar["label"] = p.label;
    if (p.is_node()) {
      const auto& np = std::get<NodePreset>(p.config);
      node = np.base;
      target_m = np.target_modularity;
      target_i = np.target_inertia;
    } else {
      graph = std::get<GraphGenConfig>(p.config);
    }
  }

  Dataset data;
  if (graph) {
    if (config.seed) graph->seed = *config.seed;
    sidecar["kind"] = "graph";
    sidecar["config"] = to_json(*graph);
    data = generate_graph_dataset(*graph);
  } else {
    if (config.seed) node->seed = *config.seed;
    if (target_m) {
      const CalibrationResult cal =
          calibrate_node_config(*target_m, *target_i, *node, config.calibration_seeds);
      node = cal.config;
      sidecar["calibration"] = {{"target_modularity", *target_m},
                                {"target_inertia", *target_i},
                                {"mean_modularity", cal.modularity},
                                {"mean_inertia", cal.inertia},
                                {"seeds", config.calibration_seeds},
                                {"iterations", cal.iterations}};
    }
    sidecar["kind"] = "node";
    sidecar["config"] = to_json(*node);
    data = planted_partition(*node);
  }
  sidecar["measured"] = dataset_metrics(data);
  sidecar["measured"].erase("kind");
  save_dataset(data, config.output);
  write_json(config.output / "generation.json", sidecar);
  return sidecar;
}

}  // namespace gtl
