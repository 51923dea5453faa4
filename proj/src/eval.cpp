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

#include "gtl/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "gtl/errors.hpp"

namespace gtl {

std::string_view metric_name(MetricKind metric) {
  return metric == MetricKind::kAccuracy ? "accuracy" : "roc_auc";
}

MetricKind parse_metric(std::string_view name) {
  if (name == "accuracy") return MetricKind::kAccuracy;
  if (name == "roc_auc") return MetricKind::kRocAuc;
  throw InputError("unknown metric '" + std::string(name) + "' (expected accuracy or roc_auc)");
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw InputError("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  if (pred.empty()) throw InputError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw InputError("roc_auc: " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of positive mid-ranks (1-based), minus the minimum.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const int y = labels[order[k]];
      if (y != 0 && y != 1) throw InputError("roc_auc: labels must be 0 or 1");
      if (y == 1) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw UndefinedMetricError("roc_auc: both classes must be present (" +
                               std::to_string(positives) + " positives, " +
                               std::to_string(negatives) + " negatives)");
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

void LearningCurve::validate() const {
  if (epochs.size() != scores.size())
    throw InputError("learning curve: " + std::to_string(epochs.size()) + " epochs for " +
                     std::to_string(scores.size()) + " scores");
  for (std::size_t i = 1; i < epochs.size(); ++i)
    if (!(epochs[i] > epochs[i - 1]))
      throw InputError("learning curve: epochs must be strictly increasing");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("learning curve: score outside [0, 1]");
}

double auc_trapezoid(const LearningCurve& curve) {
  curve.validate();
  if (curve.size() < 2) throw InputError("auc_trapezoid: need at least 2 points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += 0.5 * (curve.scores[i] + curve.scores[i - 1]) * (curve.epochs[i] - curve.epochs[i - 1]);
  return area;
}

namespace {

void check_same_grid(const LearningCurve& a, const LearningCurve& b) {
  if (a.epochs != b.epochs) throw InputError("transfer metrics: curves use different epoch grids");
}

}  // namespace

double transfer_ratio(const LearningCurve& transfer, const LearningCurve& base) {
  check_same_grid(transfer, base);
  const double base_area = auc_trapezoid(base);
  if (base_area == 0.0) throw UndefinedMetricError("transfer_ratio: base curve has zero area");
  return (auc_trapezoid(transfer) - base_area) / base_area;
}

double jumpstart(const LearningCurve& transfer, const LearningCurve& base) {
  check_same_grid(transfer, base);
  if (base.epochs.empty() || base.epochs.front() != 0.0)
    throw InputError("jumpstart: curves have no epoch-0 point");
  return transfer.scores.front() - base.scores.front();
}

double asymptotic_performance(const LearningCurve& transfer, const LearningCurve& base,
                              std::size_t tail) {
  check_same_grid(transfer, base);
  if (tail == 0 || base.size() < tail)
    throw InputError("asymptotic_performance: curves have " + std::to_string(base.size()) +
                     " points, tail needs " + std::to_string(tail));
  double diff = 0.0;
  for (std::size_t i = base.size() - tail; i < base.size(); ++i)
    diff += transfer.scores[i] - base.scores[i];
  return diff / static_cast<double>(tail);
}

TransferMetrics transfer_metrics(const LearningCurve& transfer, const LearningCurve& base,
                                 std::size_t tail) {
  return {transfer_ratio(transfer, base), jumpstart(transfer, base),
          asymptotic_performance(transfer, base, tail)};
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summarize: empty sample");
  Summary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

TTestResult welch_t_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw StatsError("welch_t_greater: each sample needs at least 2 values (got " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sa.std * sa.std / na;
  const double vb = sb.std * sb.std / nb;
  if (!(va + vb > 0.0)) throw StatsError("welch_t_greater: both samples have zero variance");
  TTestResult r;
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

}  // namespace gtl
