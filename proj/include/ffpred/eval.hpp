#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffpred/csv.hpp"
#include "ffpred/features.hpp"

namespace ffpred {

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  // Relative error uses the prediction in the denominator; predictions below
  // the floor are excluded and counted. Absent when every case is excluded.
  std::optional<double> mre;
  std::size_t mre_excluded = 0;
};

inline constexpr double kDefaultMreFloor = 0.5;

inline Metrics compute_metrics(const std::vector<double>& predictions,
                               const std::vector<double>& labels,
                               double mre_floor = kDefaultMreFloor) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("compute_metrics: " + std::to_string(predictions.size()) +
                                " predictions vs " + std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw std::invalid_argument("compute_metrics: empty input");

  double sq_sum = 0.0, abs_sum = 0.0, rel_sum = 0.0;
  std::size_t rel_n = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double err = predictions[i] - labels[i];
    sq_sum += err * err;
    abs_sum += std::abs(err);
    if (predictions[i] >= mre_floor) {
      rel_sum += std::abs(labels[i] - predictions[i]) / predictions[i];
      ++rel_n;
    }
  }
  Metrics m;
  double n = static_cast<double>(predictions.size());
  m.rmse = std::sqrt(sq_sum / n);
  m.mae = abs_sum / n;
  m.mre_excluded = predictions.size() - rel_n;
  if (rel_n > 0) m.mre = rel_sum / static_cast<double>(rel_n);
  return m;
}

struct EvalReport {
  Metrics all;
  std::optional<Metrics> top;  // absent when no test case involves a top player
  std::size_t n_all = 0;
  std::size_t n_top = 0;
  std::string model_desc;
  std::string mask_desc;
};

// Scores the same predictions twice: over every test case, and restricted to
// cases whose player is in `top_ids`. No refitting happens here.
inline EvalReport evaluate_model(const std::function<double(const FeatureCase&)>& predict,
                                 const std::vector<FeatureCase>& test,
                                 const std::set<std::string>& top_ids,
                                 double mre_floor = kDefaultMreFloor) {
  if (test.empty()) throw std::invalid_argument("evaluate_model: empty test set");
  std::vector<double> preds, labels, top_preds, top_labels;
  preds.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& c : test) {
    double p = predict(c);
    preds.push_back(p);
    labels.push_back(c.label);
    if (top_ids.count(c.player_id)) {
      top_preds.push_back(p);
      top_labels.push_back(c.label);
    }
  }
  EvalReport report;
  report.n_all = test.size();
  report.n_top = top_preds.size();
  report.all = compute_metrics(preds, labels, mre_floor);
  if (!top_preds.empty()) report.top = compute_metrics(top_preds, top_labels, mre_floor);
  return report;
}

struct Histogram {
  double bin_width = 1.0;
  std::vector<std::size_t> counts;  // bin k covers [k*width, (k+1)*width)

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

inline Histogram error_histogram(const std::vector<double>& abs_errors, double bin_width = 1.0) {
  if (bin_width <= 0.0) throw std::invalid_argument("error_histogram: bin_width must be > 0");
  Histogram h;
  h.bin_width = bin_width;
  for (double e : abs_errors) {
    if (e < 0.0) throw std::invalid_argument("error_histogram: negative absolute error");
    auto bin = static_cast<std::size_t>(e / bin_width);
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

inline std::string histogram_to_csv(const Histogram& h) {
  std::string out = "bin_lower,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out += csv::format_double(static_cast<double>(k) * h.bin_width);
    out += ',';
    out += std::to_string(h.counts[k]);
    out += '\n';
  }
  return out;
}

namespace detail {
inline std::string metric_cell(double v) { return csv::format_double(v); }
inline std::string metric_cell(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : "nan";
}
}  // namespace detail

inline std::string eval_report_csv_header() {
  return "model,mask,rmse_all,rmse_top,mae_all,mae_top,mre_all,mre_top,n_all,n_top,"
         "mre_excluded_all,mre_excluded_top\n";
}

// One row in the canonical column order: RMSE/MAE/MRE, whole set first,
// top-player subset second.
inline std::string eval_report_csv_row(const EvalReport& r) {
  auto top_cell = [&](auto&& get) {
    return r.top ? detail::metric_cell(get(*r.top)) : std::string("nan");
  };
  std::vector<std::string> cells{
      r.model_desc,
      r.mask_desc,
      detail::metric_cell(r.all.rmse),
      top_cell([](const Metrics& m) { return m.rmse; }),
      detail::metric_cell(r.all.mae),
      top_cell([](const Metrics& m) { return m.mae; }),
      detail::metric_cell(r.all.mre),
      top_cell([](const Metrics& m) { return m.mre; }),
      std::to_string(r.n_all),
      std::to_string(r.n_top),
      std::to_string(r.all.mre_excluded),
      r.top ? std::to_string(r.top->mre_excluded) : "0",
  };
  return csv::join_row(cells);
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["rmse"] = m.rmse;
  j["mae"] = m.mae;
  if (m.mre)
    j["mre"] = *m.mre;
  else
    j["mre"] = nullptr;
  j["mre_excluded"] = m.mre_excluded;
  return j;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["model"] = r.model_desc;
  j["mask"] = r.mask_desc;
  j["all"] = metrics_to_json(r.all);
  j["top"] = r.top ? metrics_to_json(*r.top) : nlohmann::json(nullptr);
  j["n_all"] = r.n_all;
  j["n_top"] = r.n_top;
  return j;
}

}  // namespace ffpred
