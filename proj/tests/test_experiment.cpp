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
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "gtl/errors.hpp"
#include "gtl/experiment.hpp"
#include "gtl/report.hpp"
#include "test_util.hpp"

using namespace gtl;
namespace fs = std::filesystem;

namespace {

GraphDataset small_graph_dataset(std::uint64_t seed, int num_classes = 3) {
  GraphGenConfig c;
  c.num_classes = num_classes;
  c.n_per_class = 12;
  c.nodes_per_graph = 10;
  c.n_features = 4;
  c.seed = seed;
  return generate_graph_dataset(c);
}

NodeGraph small_node_graph(std::uint64_t seed) {
  NodeGenConfig c;
  c.num_nodes = 90;
  c.num_communities = 3;
  c.p_in = 0.2;
  c.p_out = 0.02;
  c.n_features = 4;
  c.seed = seed;
  return planted_partition(c);
}

ExperimentConfig tiny_config(const fs::path& dataset, const fs::path& output) {
  ExperimentConfig c;
  c.model = LayerKind::kGcn;
  c.hidden_dim = 8;
  c.epochs = 12;
  c.runs = 2;
  c.tail = 3;
  c.dataset = dataset;
  c.output = output;
  c.label = output.filename().string();
  return c;
}

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("train_model records every split from epoch 0") {
  const Dataset data = small_graph_dataset(1);
  const ModelConfig mc = model_config_for(data, LayerKind::kSage, 8, 2, true, 0.0);
  Rng init(3), rng(4);
  GnnModel model(mc, init);
  TrainOptions o;
  o.epochs = 7;
  o.eval_every = 3;
  o.learning_rate = 0.01;
  const SplitCurves curves = train_model(model, data, o, rng);
  for (const auto& c : curves) {
    REQUIRE(c.size() == 3);  // epochs 0, 3, 6
    CHECK(c.epochs[0] == 0.0);
    CHECK(c.epochs[1] == 3.0);
    CHECK(c.epochs[2] == 6.0);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Dataset data = Dataset(small_node_graph(2));
  const ModelConfig mc = model_config_for(data, LayerKind::kGin, 8, 3, true, 0.5);
  TrainOptions o;
  o.epochs = 5;
  auto run = [&] {
    Rng init(9), rng(10);
    GnnModel model(mc, init);
    return train_model(model, data, o, rng);
  };
  const SplitCurves a = run(), b = run();
  for (std::size_t s = 0; s < 3; ++s) CHECK(a[s].scores == b[s].scores);
}

TEST_CASE("graph training beats chance on the train split") {
  // Unperturbed generator output: strong attribute and structure signal.
  const Dataset data = small_graph_dataset(5);
  const ModelConfig mc = model_config_for(data, LayerKind::kGcn, 16, 2, true, 0.0);
  Rng init(1), rng(2);
  GnnModel model(mc, init);
  TrainOptions o;
  o.epochs = 40;
  o.learning_rate = 0.01;
  const SplitCurves curves = train_model(model, data, o, rng);
  // Chance is 1/3; 3 sigma of a binomial proportion over the train graphs.
  const double n = 0.6 * 36;
  const double chance = 1.0 / 3.0;
  CHECK(curves[0].scores.back() > chance + 3.0 * std::sqrt(chance * (1 - chance) / n));
}

TEST_CASE("roc_auc needs a binary task and scores binary models") {
  const Dataset three = small_graph_dataset(1);
  const ModelConfig mc3 = model_config_for(three, LayerKind::kGcn, 4, 1, true, 0.0);
  Rng init(1), rng(1);
  GnnModel m3(mc3, init);
  TrainOptions o;
  o.epochs = 1;
  o.metric = MetricKind::kRocAuc;
  CHECK_THROWS_AS(train_model(m3, three, o, rng), InputError);

  const Dataset two = small_graph_dataset(2, 2);
  const ModelConfig mc2 = model_config_for(two, LayerKind::kGcn, 4, 1, true, 0.0);
  CHECK(mc2.out_dim == 1);
  GnnModel m2(mc2, init);
  const SplitCurves curves = train_model(m2, two, o, rng);
  CHECK(curves[2].scores[0] >= 0.0);
  CHECK(curves[2].scores[0] <= 1.0);
}

TEST_CASE("dataset / model mismatches are rejected") {
  const Dataset three = small_graph_dataset(1);
  const Dataset two = small_graph_dataset(1, 2);
  Rng init(1), rng(1);
  GnnModel m(model_config_for(three, LayerKind::kGcn, 4, 1, true, 0.0), init);
  TrainOptions o;
  o.epochs = 1;
  CHECK_THROWS_AS(train_model(m, two, o, rng), ProtocolError);
  const Dataset node = Dataset(small_node_graph(1));
  CHECK_THROWS_AS(train_model(m, node, o, rng), InputError);
}

TEST_CASE("permute_labels keeps the label multiset, damage keeps shapes") {
  const Dataset data = small_graph_dataset(4);
  Rng rng(8);
  const Dataset permuted = permute_labels(data, rng);
  auto labels = std::get<GraphDataset>(data).labels();
  auto shuffled = std::get<GraphDataset>(permuted).labels();
  CHECK(labels != shuffled);
  std::sort(labels.begin(), labels.end());
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(labels == shuffled);
  CHECK(std::get<GraphDataset>(permuted).split == std::get<GraphDataset>(data).split);

  const Dataset damaged = damage_dataset(data, rng);
  const auto& a = std::get<GraphDataset>(data);
  const auto& b = std::get<GraphDataset>(damaged);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.samples[i].features.rows() == a.samples[i].features.rows());
    CHECK_FALSE(std::ranges::equal(b.samples[i].features.values(), a.samples[i].features.values()));
    CHECK(b.samples[i].label == a.samples[i].label);
  }
}

TEST_CASE("run_parallel covers every index and rethrows failures") {
  for (std::size_t threads : {1u, 3u, 8u}) {
    std::vector<int> hits(10, 0);
    run_parallel(10, threads, [&](std::size_t i) { ++hits[i]; });
    CHECK(hits == std::vector<int>(10, 1));
  }
  std::atomic<int> done{0};
  CHECK_THROWS_AS(run_parallel(6, 2,
                               [&](std::size_t i) {
                                 ++done;
                                 if (i == 3) throw NumericError("boom");
                               }),
                  NumericError);
  CHECK(done == 6);
}

TEST_CASE("pretrain writes checkpoints that reproduce the final evaluation") {
  const auto dir = testing::scratch_dir("exp_pretrain");
  save_dataset(small_graph_dataset(3), dir / "data");
  ExperimentConfig c = tiny_config(dir / "data", dir / "pre");
  c.dropout = 0.3;
  const PretrainResult r = run_pretrain(c);
  REQUIRE(r.runs.size() == 2);
  for (const char* f : {"config.json", "curves.csv", "runs.json", "summary.json"})
    CHECK(fs::exists(c.output / f));

  const Dataset data = load_dataset(dir / "data");
  for (const auto& run : r.runs) {
    CHECK(run.seed == c.seed + run.run);
    std::uint64_t seed = 0;
    GnnModel model = load_checkpoint(run.checkpoint, &seed);
    CHECK(seed == run.seed);
    for (std::size_t s = 0; s < 3; ++s)
      CHECK(evaluate(model, data, static_cast<Split>(s), c.metric) == run.curves[s].scores.back());
  }

  const auto test_curves = read_curves_csv(c.output / "curves.csv", Split::kTest);
  REQUIRE(test_curves.size() == 2);
  CHECK(test_curves[1].epochs == r.runs[1].curves[2].epochs);
  CHECK(test_curves[1].scores == r.runs[1].curves[2].scores);
}

TEST_CASE("pretrain on a damaged or label-permuted source completes") {
  const auto dir = testing::scratch_dir("exp_damaged");
  save_dataset(small_graph_dataset(3), dir / "data");
  ExperimentConfig c = tiny_config(dir / "data", dir / "damaged");
  c.damage_source = true;
  c.runs = 1;
  CHECK(run_pretrain(c).runs.size() == 1);
  c.damage_source = false;
  c.permute_source_labels = true;
  c.output = dir / "permuted";
  CHECK(run_pretrain(c).runs.size() == 1);
}

TEST_CASE("protocol none gives zero transfer metrics") {
  const auto dir = testing::scratch_dir("exp_none");
  save_dataset(Dataset(small_node_graph(4)), dir / "data");
  ExperimentConfig c = tiny_config(dir / "data", dir / "none");
  const TransferResult r = run_transfer(c);
  for (const auto& m : r.metrics) {
    CHECK(m.transfer_ratio == 0.0);
    CHECK(m.jumpstart == 0.0);
    CHECK(m.asymptotic == 0.0);
  }
}

TEST_CASE("transfer protocols: base arm unaffected, old layer carries the head") {
  const auto dir = testing::scratch_dir("exp_protocols");
  save_dataset(small_graph_dataset(6), dir / "target");
  save_dataset(small_graph_dataset(7), dir / "source");

  ExperimentConfig pre = tiny_config(dir / "source", dir / "pre");
  pre.seed = 50;
  run_pretrain(pre);

  ExperimentConfig none = tiny_config(dir / "target", dir / "none");
  const TransferResult base_only = run_transfer(none);

  for (Protocol p : {Protocol::kFineTuneReinit, Protocol::kFineTuneOldLayer, Protocol::kFrozen}) {
    INFO(protocol_name(p));
    ExperimentConfig c = tiny_config(dir / "target", dir / std::string(protocol_name(p)));
    c.protocol = p;
    c.source_checkpoint = pre.output;
    const TransferResult r = run_transfer(c);
    for (std::size_t i = 0; i < c.runs; ++i)
      for (std::size_t s = 0; s < 3; ++s)
        CHECK(r.base[i].curves[s].scores == base_only.base[i].curves[s].scores);
    CHECK(file_bytes(c.output / "base" / "curves.csv") ==
          file_bytes(none.output / "base" / "curves.csv"));
  }

  // Old-layer transfer starts from the source model exactly.
  const Dataset target = load_dataset(dir / "target");
  const auto old = read_curves_csv(dir / "fine_tune_old_layer" / "transfer" / "curves.csv",
                                   Split::kTest);
  for (std::size_t i = 0; i < 2; ++i) {
    GnnModel src = load_checkpoint(pre.output / ("run_" + std::to_string(i)) / "checkpoint");
    CHECK(old[i].scores[0] == evaluate(src, target, Split::kTest, MetricKind::kAccuracy));
  }
}

TEST_CASE("old-layer transfer with a mismatched label space is a protocol error") {
  const auto dir = testing::scratch_dir("exp_mismatch");
  save_dataset(small_graph_dataset(6, 2), dir / "target");
  save_dataset(small_graph_dataset(7, 3), dir / "source");
  ExperimentConfig pre = tiny_config(dir / "source", dir / "pre");
  pre.runs = 1;
  run_pretrain(pre);
  ExperimentConfig c = tiny_config(dir / "target", dir / "old");
  c.protocol = Protocol::kFineTuneOldLayer;
  c.source_checkpoint = pre.output / "run_0" / "checkpoint";
  CHECK_THROWS_AS(run_transfer(c), ProtocolError);
  // A fresh output layer makes the label spaces irrelevant.
  c.protocol = Protocol::kFineTuneReinit;
  c.output = dir / "reinit";
  CHECK_NOTHROW(run_transfer(c));
}

TEST_CASE("transfer from a source dataset pretrains first; outputs are bit-reproducible") {
  const auto dir = testing::scratch_dir("exp_repro");
  save_dataset(small_graph_dataset(8), dir / "target");
  save_dataset(small_graph_dataset(9), dir / "source");
  auto run = [&](const std::string& name) {
    ExperimentConfig c = tiny_config(dir / "target", dir / name);
    c.protocol = Protocol::kFrozen;
    c.source_dataset = dir / "source";
    c.threads = 2;
    run_transfer(c);
    CHECK(fs::exists(c.output / "source" / "run_1" / "checkpoint" / "weights.bin"));
    return c.output;
  };
  const fs::path a = run("a"), b = run("b");
  for (const char* f : {"metrics.csv", "base/curves.csv", "transfer/curves.csv",
                        "source/curves.csv", "source/run_0/checkpoint/weights.bin"})
    CHECK(file_bytes(a / f) == file_bytes(b / f));
}

TEST_CASE("control comparison and report rows") {
  const auto dir = testing::scratch_dir("exp_report");
  save_dataset(small_graph_dataset(10), dir / "target");
  save_dataset(small_graph_dataset(11), dir / "source");

  ExperimentConfig pre = tiny_config(dir / "source", dir / "pre");
  pre.seed = 70;
  run_pretrain(pre);

  ExperimentConfig control = tiny_config(dir / "target", dir / "control");
  control.runs = 3;
  run_transfer(control);

  ExperimentConfig c = tiny_config(dir / "target", dir / "frozen");
  c.runs = 3;
  c.protocol = Protocol::kFrozen;
  c.source_checkpoint = pre.output;
  c.control = control.output;
  const TransferResult r = run_transfer(c);
  REQUIRE(r.control.size() == 3);
  CHECK(r.control[0].metric == "transfer_ratio");
  // The control arm is identical to its base arm: every metric is exactly 0
  // with zero variance. The frozen arm varies, so the test is well defined.
  CHECK(r.control[0].p >= 0.0);
  CHECK(r.control[0].p <= 1.0);

  ReportOptions opts;
  opts.experiments = {control.output, c.output};
  opts.control = control.output;
  const Report rep = build_report(opts);
  REQUIRE(rep.rows.size() == 6);
  for (std::size_t k = 0; k < 3; ++k) {
    const ReportRow& row = rep.rows[k];
    CHECK(row.source_task == "control");
    CHECK(row.runs == 3);
    CHECK(row.mean == 0.0);
    CHECK(row.std == 0.0);
    // Both samples constant at zero: degenerate test.
    CHECK(std::isnan(row.p_vs_control));
    CHECK_FALSE(row.significant);
  }
  CHECK(rep.rows[3].p_vs_control == doctest::Approx(r.control[0].p).epsilon(1e-12));
  CHECK(rep.bands.size() == 4);

  opts.strict = true;
  CHECK_THROWS_AS(build_report(opts), StatsError);

  write_report(rep, dir / "report");
  const std::string csv = read_text_file(dir / "report" / "report.csv");
  CHECK(csv.rfind("model,source_task,metric,runs,mean,std,p_vs_control,significant,"
                  "p_best_greater,on_par_with_best\n", 0) == 0);
  const std::string svg = read_text_file(dir / "report" / "curves.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report rejects inconsistent epoch grids") {
  const auto dir = testing::scratch_dir("exp_grids");
  save_dataset(small_graph_dataset(12), dir / "target");
  ExperimentConfig a = tiny_config(dir / "target", dir / "a");
  run_transfer(a);
  ExperimentConfig b = tiny_config(dir / "target", dir / "b");
  b.eval_every = 2;
  run_transfer(b);
  ReportOptions opts;
  opts.experiments = {a.output, b.output};
  CHECK_THROWS_AS(build_report(opts), InputError);
  opts.experiments = {dir / "target"};
  CHECK_THROWS_AS(build_report(opts), InputError);
}

TEST_CASE("mean_band averages across runs") {
  LearningCurve x, y;
  x.epochs = y.epochs = {0, 1, 2};
  x.scores = {0.2, 0.4, 0.6};
  y.scores = {0.4, 0.6, 1.0};
  const CurveBand band = mean_band({x, y}, "b");
  CHECK(band.mean[0] == doctest::Approx(0.3));
  CHECK(band.mean[2] == doctest::Approx(0.8));
  CHECK(band.std[2] == doctest::Approx(std::sqrt(0.08)));
  y.epochs = {0, 1, 3};
  CHECK_THROWS_AS(mean_band({x, y}, "b"), InputError);
}

TEST_CASE("render_svg escapes labels") {
  CurveBand b;
  b.label = "a<b & \"c\"";
  b.epochs = {0, 1};
  b.mean = {0.1, 0.9};
  b.std = {0.0, 0.1};
  const std::string svg = render_svg({b}, "t", "score");
  CHECK(svg.find("a&lt;b &amp; &quot;c&quot;") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("csv readers reject malformed files") {
  const auto dir = testing::scratch_dir("exp_csv");
  write_text_file(dir / "m.csv", "run,seed,transfer_ratio,jumpstart,asymptotic\n0,1,0.1,x,0\n");
  CHECK_THROWS_AS(read_metrics_csv(dir / "m.csv"), FormatError);
  write_text_file(dir / "c.csv", "run,epoch,value\n");
  CHECK_THROWS_AS(read_curves_csv(dir / "c.csv", Split::kTest), FormatError);
  write_text_file(dir / "m2.csv", "run,seed,transfer_ratio,jumpstart,asymptotic\n0,1,nan,0,0\n");
  CHECK(std::isnan(read_metrics_csv(dir / "m2.csv")[0].transfer_ratio));
}

TEST_CASE("generate: presets, sidecar and determinism") {
  const auto dir = testing::scratch_dir("exp_generate");
  GenerationConfig g;
  g.preset = 8;
  g.output = dir / "p8";
  const nlohmann::json side = run_generate(g);
  CHECK(side["config"]["percent_swap"] == 0.92);
  CHECK(side["config"]["percent_damage"] == 0.92);
  CHECK(side["kind"] == "graph");
  CHECK(side["measured"]["I_S"].is_number());
  CHECK(side["measured"]["modularity"].is_null());
  CHECK(fs::exists(g.output / "generation.json"));

  g.output = dir / "p8_again";
  run_generate(g);
  for (const auto& entry : fs::directory_iterator(dir / "p8"))
    CHECK(file_bytes(entry.path()) == file_bytes(dir / "p8_again" / entry.path().filename()));

  g.seed = 123;
  g.output = dir / "p8_seed";
  CHECK(run_generate(g)["config"]["seed"] == 123);

  GenerationConfig n;
  n.node = NodeGenConfig{};
  n.node->num_nodes = 120;
  n.output = dir / "node";
  const nlohmann::json ns = run_generate(n);
  CHECK(ns["kind"] == "node");
  CHECK(ns["calibration"].is_null());
  CHECK(ns["measured"]["modularity"].is_number());
}

TEST_CASE("dataset_metrics reports the applicable fields") {
  const nlohmann::json g = dataset_metrics(Dataset(small_graph_dataset(1)));
  CHECK(g["I_S"].get<double>() >= 0.0);
  CHECK(g["I_A"].get<double>() <= 1.0);
  CHECK(g["within_inertia"].is_null());
  const nlohmann::json n = dataset_metrics(Dataset(small_node_graph(1)));
  CHECK(n["modularity"].get<double>() > 0.0);
  CHECK(n["I_S"].is_null());
}
