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

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gtl {

enum class MetricKind { kAccuracy, kRocAuc };

std::string_view metric_name(MetricKind metric);
MetricKind parse_metric(std::string_view name);

/// Fraction of positions where pred == truth. Throws InputError on empty or
/// mismatched input.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Uses mid-ranks, O(n log n). Throws
/// UndefinedMetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Scores of one run on one split, sampled at strictly increasing epochs.
struct LearningCurve {
  MetricKind metric = MetricKind::kAccuracy;
  std::vector<double> epochs;
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  void validate() const;
};

/// Trapezoidal area under score(epoch). Needs >= 2 points.
double auc_trapezoid(const LearningCurve& curve);

/// (AUC_transfer - AUC_base) / AUC_base on a shared epoch grid.
double transfer_ratio(const LearningCurve& transfer, const LearningCurve& base);
/// Score difference at epoch 0, before any update on the target task.
double jumpstart(const LearningCurve& transfer, const LearningCurve& base);
/// Difference of the means of the last `tail` scores.
double asymptotic_performance(const LearningCurve& transfer, const LearningCurve& base,
                              std::size_t tail = 10);

struct TransferMetrics {
  double transfer_ratio = 0.0;
  double jumpstart = 0.0;
  double asymptotic = 0.0;
};

TransferMetrics transfer_metrics(const LearningCurve& transfer, const LearningCurve& base,
                                 std::size_t tail = 10);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // one-sided, H1: mean(a) > mean(b)

  bool significant(double alpha) const { return p < alpha; }
};

/// Welch's unequal-variance t test with the alternative mean(a) > mean(b).
/// Throws StatsError if either sample has fewer than two values or both
/// have zero variance.
TTestResult welch_t_greater(std::span<const double> a, std::span<const double> b);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

Summary summarize(std::span<const double> values);

}  // namespace gtl
