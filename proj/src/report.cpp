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

#include "gtl/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gtl/config.hpp"
#include "gtl/dataset_io.hpp"
#include "gtl/errors.hpp"
#include "gtl/experiment.hpp"

namespace gtl {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<const char*, 3> kMetricNames = {"transfer_ratio", "jumpstart", "asymptotic"};

struct Experiment {
  std::string model;
  std::string label;
  std::array<std::vector<double>, 3> values;  // indexed like kMetricNames
  std::vector<LearningCurve> transfer_curves;
  std::vector<LearningCurve> base_curves;
};

std::array<std::vector<double>, 3> metric_columns(const std::vector<TransferMetrics>& metrics) {
  std::array<std::vector<double>, 3> out;
  for (const auto& m : metrics) {
    out[0].push_back(m.transfer_ratio);
    out[1].push_back(m.jumpstart);
    out[2].push_back(m.asymptotic);
  }
  return out;
}

Experiment load_experiment(const fs::path& dir) {
  const nlohmann::json summary = read_json_file(dir / "summary.json");
  if (summary.value("kind", "") != "transfer")
    throw InputError(dir.string() + " is not a transfer output directory");
  Experiment e;
  e.model = summary.at("model").get<std::string>();
  e.label = summary.at("label").get<std::string>();
  e.values = metric_columns(read_metrics_csv(dir / "metrics.csv"));
  e.transfer_curves = read_curves_csv(dir / "transfer" / "curves.csv", Split::kTest);
  e.base_curves = read_curves_csv(dir / "base" / "curves.csv", Split::kTest);
  if (e.values[0].empty()) throw InputError(dir.string() + ": no runs in metrics.csv");
  return e;
}

// One-sided Welch p for mean(a) > mean(b); NaN when degenerate.
double welch_p(const std::vector<double>& a, const std::vector<double>& b, bool strict,
               const std::string& what) {
  try {
    return welch_t_greater(a, b).p;
  } catch (const StatsError& e) {
    if (strict) throw StatsError(what + ": " + e.what());
    return kNaN;
  }
}

std::string fmt(double v, const char* spec = "%.6g") {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

CurveBand mean_band(const std::vector<LearningCurve>& curves, const std::string& label) {
  if (curves.empty()) throw InputError(label + ": no curves");
  CurveBand band;
  band.label = label;
  band.epochs = curves.front().epochs;
  for (const auto& c : curves)
    if (c.epochs != band.epochs) throw InputError(label + ": inconsistent epoch grids");
  const std::size_t n = band.epochs.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> column;
    for (const auto& c : curves) column.push_back(c.scores[i]);
    const Summary s = summarize(column);
    band.mean.push_back(s.mean);
    band.std.push_back(s.std);
  }
  return band;
}

Report build_report(const ReportOptions& options) {
  if (options.experiments.empty()) throw InputError("report: no experiment directories");
  std::vector<Experiment> experiments;
  for (const auto& dir : options.experiments) experiments.push_back(load_experiment(dir));

  std::optional<std::array<std::vector<double>, 3>> control;
  if (options.control) control = metric_columns(read_metrics_csv(*options.control / "metrics.csv"));

  Report report;
  for (const auto& e : experiments) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      ReportRow row;
      row.model = e.model;
      row.source_task = e.label;
      row.metric = kMetricNames[k];
      row.runs = e.values[k].size();
      const Summary s = summarize(e.values[k]);
      row.mean = s.mean;
      row.std = s.std;

      row.p_vs_control = kNaN;
      if (control) {
        row.p_vs_control = welch_p(e.values[k], (*control)[k], options.strict,
                                   e.label + " vs control, " + row.metric);
        row.significant = !std::isnan(row.p_vs_control) && row.p_vs_control < options.alpha;
      }

      // Best = highest mean among experiments with the same model.
      const Experiment* best = &e;
      double best_mean = s.mean;
      for (const auto& other : experiments) {
        if (other.model != e.model) continue;
        const double m = summarize(other.values[k]).mean;
        if (m > best_mean) {
          best_mean = m;
          best = &other;
        }
      }
      if (best == &e) {
        row.p_best_greater = welch_p(e.values[k], e.values[k], false, "");
        row.on_par_with_best = true;
      } else {
        row.p_best_greater = welch_p(best->values[k], e.values[k], options.strict,
                                     best->label + " vs " + e.label + ", " + row.metric);
        row.on_par_with_best =
            std::isnan(row.p_best_greater) ? false : row.p_best_greater >= options.alpha;
      }
      report.rows.push_back(row);
    }
  }

  for (const auto& e : experiments) {
    report.bands.push_back(mean_band(e.transfer_curves, e.label));
    CurveBand base = mean_band(e.base_curves, e.label + " (base)");
    base.dashed = true;
    report.bands.push_back(std::move(base));
  }
  for (const auto& b : report.bands)
    if (b.epochs != report.bands.front().epochs)
      throw InputError("report: experiments use inconsistent epoch grids");
  return report;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "model,source_task,metric,runs,mean,std,p_vs_control,significant,p_best_greater,"
      "on_par_with_best\n";
  for (const auto& r : rows)
    out += csv_field(r.model) + "," + csv_field(r.source_task) + "," + r.metric + "," +
           std::to_string(r.runs) + "," + fmt(r.mean, "%.17g") + "," + fmt(r.std, "%.17g") + "," +
           fmt(r.p_vs_control, "%.17g") + "," + (r.significant ? "true" : "false") + "," +
           fmt(r.p_best_greater, "%.17g") + "," + (r.on_par_with_best ? "true" : "false") + "\n";
  return out;
}

std::string render_svg(const std::vector<CurveBand>& bands, const std::string& title,
                       const std::string& y_label) {
  constexpr double kWidth = 760, kHeight = 460;
  constexpr double kLeft = 64, kRight = 220, kTop = 40, kBottom = 56;
  constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                   "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& b : bands)
    for (std::size_t i = 0; i < b.epochs.size(); ++i) {
      const double lo = b.mean[i] - b.std[i], hi = b.mean[i] + b.std[i];
      if (first) {
        x_lo = x_hi = b.epochs[i];
        y_lo = lo;
        y_hi = hi;
        first = false;
      }
      x_lo = std::min(x_lo, b.epochs[i]);
      x_hi = std::max(x_hi, b.epochs[i]);
      y_lo = std::min(y_lo, lo);
      y_hi = std::max(y_hi, hi);
    }
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  y_lo = std::max(0.0, std::floor(y_lo * 10) / 10);
  y_hi = std::min(1.0, std::ceil(y_hi * 10) / 10);
  if (y_hi <= y_lo) y_hi = y_lo + 0.1;

  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) {
    return kTop + (1.0 - (std::clamp(y, y_lo, y_hi) - y_lo) / (y_hi - y_lo)) * plot_h;
  };
  auto pt = [&](double x, double y) { return fmt(px(x), "%.2f") + "," + fmt(py(y), "%.2f"); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(kWidth) +
       "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kLeft) + "\" y=\"24\" font-size=\"14\">" + xml_escape(title) +
       "</text>\n";

  // Axes, ticks and grid.
  s += "<g stroke=\"#888\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
       fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
  s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
       "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
  s += "</g>\n<g fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
    s += "<text x=\"" + fmt(px(xv), "%.2f") + "\" y=\"" + fmt(kTop + plot_h + 18) +
         "\" text-anchor=\"middle\">" + fmt(xv, "%.4g") + "</text>\n";
    s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(yv) + 4, "%.2f") +
         "\" text-anchor=\"end\">" + fmt(yv, "%.3g") + "</text>\n";
    s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(py(yv), "%.2f") + "\" x2=\"" +
         fmt(kLeft + plot_w) + "\" y2=\"" + fmt(py(yv), "%.2f") +
         "\" stroke=\"#eee\" stroke-width=\"1\"/>\n";
  }
  s += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 14) +
       "\" text-anchor=\"middle\">epoch</text>\n";
  s += "<text x=\"16\" y=\"" + fmt(kTop + plot_h / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + fmt(kTop + plot_h / 2) + ")\">" +
       xml_escape(y_label) + "</text>\n";
  s += "</g>\n";

  for (std::size_t k = 0; k < bands.size(); ++k) {
    const CurveBand& b = bands[k];
    const std::string colour = kPalette[k % kPalette.size()];
    if (b.epochs.empty()) continue;
    std::string band_pts, line_pts;
    for (std::size_t i = 0; i < b.epochs.size(); ++i) {
      band_pts += pt(b.epochs[i], b.mean[i] + b.std[i]) + " ";
      line_pts += pt(b.epochs[i], b.mean[i]) + " ";
    }
    for (std::size_t i = b.epochs.size(); i-- > 0;)
      band_pts += pt(b.epochs[i], b.mean[i] - b.std[i]) + " ";
    band_pts.pop_back();
    line_pts.pop_back();
    s += "<polygon points=\"" + band_pts + "\" fill=\"" + colour +
         "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    s += "<polyline points=\"" + line_pts + "\" fill=\"none\" stroke=\"" + colour +
         "\" stroke-width=\"1.5\"" + (b.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    const double ly = kTop + 12 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + plot_w + 16;
    s += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" +
         fmt(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"" +
         (b.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    s += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) + "\">" + xml_escape(b.label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_report(const Report& report, const fs::path& dir) {
  write_text_file(dir / "report.csv", report_csv(report.rows));
  write_text_file(dir / "curves.svg",
                  render_svg(report.bands, "Mean test curves (shaded: +-1 std)", "test score"));
}

}  // namespace gtl
