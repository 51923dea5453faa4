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

#pragma once

// Aggregates transfer output directories into a metric table and a plot.
//
// report.csv has one row per (experiment, transfer metric):
//   model,source_task,metric,runs,mean,std,p_vs_control,significant,
//   p_best_greater,on_par_with_best
// p_vs_control tests "experiment > control". p_best_greater tests "best >
// experiment", where best is the experiment with the highest mean for the
// same model and metric; on_par_with_best is p_best_greater >= alpha.
// Degenerate tests give NaN (written as "nan").

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gtl/eval.hpp"

namespace gtl {

struct ReportOptions {
  std::vector<std::filesystem::path> experiments;  // transfer output dirs
  std::optional<std::filesystem::path> control;
  double alpha = 0.1;
  /// Throw StatsError instead of writing NaN for a degenerate test.
  bool strict = false;
};

struct ReportRow {
  std::string model;
  std::string source_task;
  std::string metric;
  std::size_t runs = 0;
  double mean = 0.0;
  double std = 0.0;
  double p_vs_control = 0.0;
  bool significant = false;
  double p_best_greater = 0.0;
  bool on_par_with_best = false;
};

/// Mean and sample standard deviation of a set of curves at every epoch.
struct CurveBand {
  std::string label;
  std::vector<double> epochs;
  std::vector<double> mean;
  std::vector<double> std;
  bool dashed = false;
};

/// Throws InputError if the curves do not share one epoch grid.
CurveBand mean_band(const std::vector<LearningCurve>& curves, const std::string& label);

struct Report {
  std::vector<ReportRow> rows;
  std::vector<CurveBand> bands;
};

Report build_report(const ReportOptions& options);

std::string report_csv(const std::vector<ReportRow>& rows);
/// Line chart of each band's mean with a shaded +-1 std region.
std::string render_svg(const std::vector<CurveBand>& bands, const std::string& title,
                       const std::string& y_label);

/// Writes report.csv and curves.svg into `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace gtl
