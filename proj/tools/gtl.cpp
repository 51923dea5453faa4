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

// gtl: command-line front end.
//
//   gtl generate  --config FILE | --preset ID --out DIR [--seed S]
//   gtl pretrain  --config FILE [--threads N]
//   gtl transfer  --config FILE [--threads N]
//   gtl report    DIR... [--control DIR] [--alpha A] [--out DIR] [--strict]
//   gtl metrics   DATASET_DIR
//
// Exit codes: 0 success, 1 input/config error, 2 numeric error,
// 3 degenerate significance test.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtl/config.hpp"
#include "gtl/dataset_io.hpp"
#include "gtl/errors.hpp"
#include "gtl/experiment.hpp"
#include "gtl/report.hpp"

namespace fs = std::filesystem;

namespace {

std::string pm(const std::vector<double>& v) {
  const gtl::Summary s = gtl::summarize(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f", s.mean, s.std);
  return buf;
}

int cmd_generate(const std::string& config_file, std::optional<int> preset_id,
                 const std::string& out, std::optional<std::uint64_t> seed) {
  gtl::GenerationConfig config;
  if (!config_file.empty()) {
    if (preset_id) throw gtl::InputError("generate: pass either --config or --preset");
    config = gtl::load_generation_config(config_file);
    if (!out.empty()) config.output = out;
  } else {
    if (!preset_id) throw gtl::InputError("generate: --config or --preset is required");
    if (out.empty()) throw gtl::InputError("generate: --out is required with --preset");
    config.preset = *preset_id;
    config.output = out;
  }
  if (seed) config.seed = *seed;
  const nlohmann::json sidecar = gtl::run_generate(config);
  std::cout << "wrote " << config.output.string() << "\n" << sidecar["measured"].dump(2) << "\n";
  return 0;
}

int cmd_pretrain(const std::string& config_file, std::optional<std::size_t> threads) {
  gtl::ExperimentConfig config = gtl::load_experiment_config(config_file);
  if (threads) config.threads = *threads;
  const gtl::PretrainResult result = gtl::run_pretrain(config);
  std::vector<double> finals;
  for (const auto& r : result.runs)
    finals.push_back(r.curves[static_cast<std::size_t>(gtl::Split::kTest)].scores.back());
  std::cout << config.label << ": " << result.runs.size() << " runs, final test "
            << gtl::metric_name(config.metric) << " " << pm(finals) << "\n"
            << "checkpoints under " << config.output.string() << "\n";
  return 0;
}

int cmd_transfer(const std::string& config_file, std::optional<std::size_t> threads) {
  gtl::ExperimentConfig config = gtl::load_experiment_config(config_file);
  if (threads) config.threads = *threads;
  const gtl::TransferResult result = gtl::run_transfer(config);
  std::vector<double> tr, js, ap;
  for (const auto& m : result.metrics) {
    tr.push_back(m.transfer_ratio);
    js.push_back(m.jumpstart);
    ap.push_back(m.asymptotic);
  }
  std::cout << config.label << " (" << gtl::protocol_name(config.protocol) << ", "
            << result.metrics.size() << " runs)\n"
            << "  transfer_ratio " << pm(tr) << "\n"
            << "  jumpstart      " << pm(js) << "\n"
            << "  asymptotic     " << pm(ap) << "\n";
  for (const auto& c : result.control)
    std::cout << "  vs control " << c.metric << ": p = " << c.p
              << (c.significant ? " (significant)" : "") << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& control, double alpha,
               const std::string& out, bool strict) {
  gtl::ReportOptions options;
  for (const auto& d : dirs) options.experiments.emplace_back(d);
  if (!control.empty()) options.control = fs::path(control);
  options.alpha = alpha;
  options.strict = strict;
  const gtl::Report report = gtl::build_report(options);
  gtl::write_report(report, out);
  std::cout << gtl::report_csv(report.rows) << "wrote " << (fs::path(out) / "report.csv").string()
            << " and " << (fs::path(out) / "curves.svg").string() << "\n";
  return 0;
}

int cmd_metrics(const std::string& dir) {
  nlohmann::json j = gtl::dataset_metrics(gtl::load_dataset(dir));
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNN transfer learning experiments"};
  app.require_subcommand(1);

  std::string config_file, out, control;
  std::optional<int> preset_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::vector<std::string> dirs;
  std::string dataset_dir;
  double alpha = 0.1;
  bool strict = false;

  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate->add_option("--config", config_file, "Generation config (JSON)");
  generate->add_option("--preset", preset_id, "Built-in preset id");
  generate->add_option("--out", out, "Output dataset directory");
  generate->add_option("--seed", seed, "Override the generator seed");

  auto* pretrain = app.add_subcommand("pretrain", "Train source models and save checkpoints");
  pretrain->add_option("--config", config_file, "Experiment config (JSON)")->required();
  pretrain->add_option("--threads", threads, "Concurrent runs");

  auto* transfer = app.add_subcommand("transfer", "Paired base/transfer runs on a target task");
  transfer->add_option("--config", config_file, "Experiment config (JSON)")->required();
  transfer->add_option("--threads", threads, "Concurrent runs");

  auto* report = app.add_subcommand("report", "Aggregate transfer runs into CSV and SVG");
  report->add_option("dirs", dirs, "Transfer output directories")->required();
  report->add_option("--control", control, "Control transfer directory");
  report->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  report->add_option("--out", out, "Report directory")->default_str(".");
  report->add_flag("--strict", strict, "Fail with exit code 3 on a degenerate test");

  auto* metrics = app.add_subcommand("metrics", "Community metrics of a dataset");
  metrics->add_option("dataset", dataset_dir, "Dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*generate) return cmd_generate(config_file, preset_id, out, seed);
    if (*pretrain) return cmd_pretrain(config_file, threads);
    if (*transfer) return cmd_transfer(config_file, threads);
    if (*report) return cmd_report(dirs, control, alpha, out.empty() ? "." : out, strict);
    if (*metrics) return cmd_metrics(dataset_dir);
  } catch (const gtl::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gtl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const gtl::StatsError& e) {
    std::cerr << "statistics error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
