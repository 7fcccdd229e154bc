#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffpred/mlp.hpp"
#include "ffpred/rng.hpp"
#include "ffpred/svr.hpp"

namespace ffpred {

enum class MaskProvenance { kNone, kManual, kRfecv };

inline const char* mask_provenance_name(MaskProvenance p) {
  switch (p) {
    case MaskProvenance::kNone: return "none";
    case MaskProvenance::kManual: return "manual";
    case MaskProvenance::kRfecv: return "rfecv";
  }
  return "?";
}

struct FeatureMask {
  std::vector<bool> active;
  MaskProvenance provenance = MaskProvenance::kNone;

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  }
};

inline FeatureMask full_mask(std::size_t dims) {
  return {std::vector<bool>(dims, true), MaskProvenance::kNone};
}

// All features except the four two-point-conversion slots (previous game and
// trailing average, pass and rush).
inline FeatureMask manual_mask() {
  FeatureMask m = full_mask(kFeatureCount);
  m.provenance = MaskProvenance::kManual;
  m.active[kFeatPrevStart + kTwoPtPass] = false;
  m.active[kFeatPrevStart + kTwoPtRush] = false;
  m.active[kFeatAvgStart + kTwoPtPass] = false;
  m.active[kFeatAvgStart + kTwoPtRush] = false;
  return m;
}

inline std::vector<FeatureCase> apply_mask(const std::vector<FeatureCase>& cases,
                                           const FeatureMask& mask) {
  if (mask.count() == 0) throw std::invalid_argument("apply_mask: empty mask");
  std::vector<FeatureCase> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    if (c.features.size() != mask.active.size())
      throw std::invalid_argument("apply_mask: dimensionality mismatch");
    FeatureCase r = c;
    r.features.clear();
    for (std::size_t d = 0; d < mask.active.size(); ++d)
      if (mask.active[d]) r.features.push_back(c.features[d]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::string> masked_names(const std::vector<std::string>& names,
                                             const FeatureMask& mask) {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < names.size(); ++d)
    if (mask.active[d]) out.push_back(names[d]);
  return out;
}

struct SvrConfig {
  KernelSpec kernel;
  SvrHyper hyper;

  std::string describe() const {
    std::string s = std::string(kernel_kind_name(kernel.kind)) +
                    " C=" + csv::format_double(hyper.c) +
                    " eps=" + csv::format_double(hyper.epsilon);
    if (kernel.kind != KernelKind::kLinear) s += " gamma=" + csv::format_double(kernel.gamma);
    if (kernel.kind == KernelKind::kPolynomial) s += " degree=" + std::to_string(kernel.degree);
    return s;
  }
};

// The hyperparameter configuration the search settles on for this problem.
inline SvrConfig default_svr_config() {
  return {KernelSpec{KernelKind::kLinear, 0.0, 3, 0.0}, SvrHyper{0.25, 0.25}};
}

struct SvrGrid {
  std::vector<KernelKind> kernels;
  std::vector<double> c_values;
  std::vector<double> epsilon_values;
  std::vector<double> gamma_values;
  std::vector<int> degree_values;

  static SvrGrid defaults() {
    return {{KernelKind::kRbf, KernelKind::kSigmoid, KernelKind::kLinear,
             KernelKind::kPolynomial},
            {0.25, 0.5, 0.75, 1.0},
            {0.05, 0.1, 0.15, 0.2, 0.25},
            {0.0, 0.05, 0.1, 0.15},
            {2, 3}};
  }
};

struct MlpGrid {
  std::vector<int> epoch_values;
  std::vector<int> hidden_values;
  std::vector<Activation> activation_values;

  static MlpGrid defaults() {
    return {{10, 50, 100, 1000}, {10, 25, 50, 100}, {Activation::kSigmoid, Activation::kTanh}};
  }
};

// Cross product restricted to kernel-relevant parameters: linear ignores
// gamma and degree, rbf and sigmoid ignore degree, polynomial uses both.
inline std::vector<SvrConfig> enumerate_grid(const SvrGrid& grid) {
  if (grid.kernels.empty() || grid.c_values.empty() || grid.epsilon_values.empty() ||
      grid.gamma_values.empty() || grid.degree_values.empty())
    throw std::invalid_argument("enumerate_grid: every value set must be nonempty");
  std::vector<SvrConfig> out;
  for (auto kernel : grid.kernels) {
    bool uses_gamma = kernel != KernelKind::kLinear;
    bool uses_degree = kernel == KernelKind::kPolynomial;
    std::size_t n_gamma = uses_gamma ? grid.gamma_values.size() : 1;
    std::size_t n_degree = uses_degree ? grid.degree_values.size() : 1;
    for (double c : grid.c_values)
      for (double eps : grid.epsilon_values)
        for (std::size_t gi = 0; gi < n_gamma; ++gi)
          for (std::size_t di = 0; di < n_degree; ++di) {
            SvrConfig cfg;
            cfg.kernel.kind = kernel;
            cfg.kernel.gamma = uses_gamma ? grid.gamma_values[gi] : 0.0;
            cfg.kernel.degree = uses_degree ? grid.degree_values[di] : 3;
            cfg.kernel.coef0 = 0.0;
            cfg.hyper = {c, eps};
            out.push_back(cfg);
          }
  }
  return out;
}

inline std::vector<MlpConfig> enumerate_grid(const MlpGrid& grid) {
  if (grid.epoch_values.empty() || grid.hidden_values.empty() ||
      grid.activation_values.empty())
    throw std::invalid_argument("enumerate_grid: every value set must be nonempty");
  std::vector<MlpConfig> out;
  for (int epochs : grid.epoch_values)
    for (int hidden : grid.hidden_values)
      for (auto act : grid.activation_values) {
        MlpConfig cfg;
        cfg.n_epochs = epochs;
        cfg.n_hidden = hidden;
        cfg.activation = act;
        out.push_back(cfg);
      }
  return out;
}

enum class ValidationMetric { kRmse, kMae };

inline double validation_score(ValidationMetric metric, const std::vector<double>& preds,
                               const std::vector<double>& labels) {
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double e = preds[i] - labels[i];
    acc += metric == ValidationMetric::kRmse ? e * e : std::abs(e);
  }
  acc /= static_cast<double>(preds.size());
  return metric == ValidationMetric::kRmse ? std::sqrt(acc) : acc;
}

struct SearchOptions {
  int repeats = 5;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  ValidationMetric metric = ValidationMetric::kRmse;
};

template <typename Config>
struct SelectionResult {
  Config best;
  std::size_t best_index = 0;
  std::vector<double> mean_scores;               // per configuration
  std::vector<std::vector<double>> repeat_scores;  // [config][repeat]
  std::vector<bool> failed;                      // configuration failed to fit
  int repeats = 0;
  double val_fraction = 0.0;
};

// Repeated hold-out validation: each repeat draws one seeded random split of
// the training cases, every configuration is fitted on the larger part and
// scored on the held-out part, and scores are averaged per configuration.
// The argmin wins; ties break by configuration list order. A configuration
// that throws while fitting scores +inf for that repeat and is flagged.
template <typename Config, typename Fit>
SelectionResult<Config> grid_search(const std::vector<FeatureCase>& train,
                                    const std::vector<Config>& configs,
                                    const SearchOptions& options, Fit&& fit_predictor) {
  if (configs.empty()) throw std::invalid_argument("grid_search: no configurations");
  if (options.repeats < 1) throw std::invalid_argument("grid_search: repeats must be >= 1");
  if (!(options.val_fraction > 0.0 && options.val_fraction < 1.0))
    throw std::invalid_argument("grid_search: val_fraction must lie in (0,1)");
  if (train.size() < 2) throw std::invalid_argument("grid_search: need at least 2 cases");

  SelectionResult<Config> result;
  result.repeats = options.repeats;
  result.val_fraction = options.val_fraction;
  result.repeat_scores.assign(configs.size(), {});
  result.failed.assign(configs.size(), false);

  std::mt19937_64 rng(options.seed);
  for (int rep = 0; rep < options.repeats; ++rep) {
    auto order = shuffled_indices(train.size(), rng);
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(options.val_fraction * static_cast<double>(train.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, train.size() - 1);

    std::vector<FeatureCase> fit_part, val_part;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_val ? val_part : fit_part).push_back(train[order[i]]);
    std::vector<double> val_labels;
    val_labels.reserve(val_part.size());
    for (const auto& c : val_part) val_labels.push_back(c.label);

    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
      double score;
      try {
        auto predict = fit_predictor(fit_part, configs[ci]);
        std::vector<double> preds;
        preds.reserve(val_part.size());
        for (const auto& c : val_part) preds.push_back(predict(c));
        score = validation_score(options.metric, preds, val_labels);
        if (!std::isfinite(score)) throw std::runtime_error("non-finite validation score");
      } catch (const std::exception&) {
        score = std::numeric_limits<double>::infinity();
        result.failed[ci] = true;
      }
      result.repeat_scores[ci].push_back(score);
    }
  }

  result.mean_scores.resize(configs.size());
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    double sum = 0.0;
    for (double s : result.repeat_scores[ci]) sum += s;
    result.mean_scores[ci] = sum / static_cast<double>(options.repeats);
  }
  result.best_index = static_cast<std::size_t>(
      std::min_element(result.mean_scores.begin(), result.mean_scores.end()) -
      result.mean_scores.begin());
  result.best = configs[result.best_index];
  return result;
}

inline SelectionResult<SvrConfig> grid_search_svr(const std::vector<FeatureCase>& train,
                                                  const std::vector<SvrConfig>& configs,
                                                  const SearchOptions& options,
                                                  const SvrTrainOptions& train_options = {}) {
  return grid_search(train, configs, options,
                     [&](const std::vector<FeatureCase>& fit_part, const SvrConfig& cfg) {
                       auto model = svr_fit(fit_part, cfg.hyper, cfg.kernel, train_options);
                       return [model](const FeatureCase& c) {
                         return svr_predict(model, c.features);
                       };
                     });
}

inline SelectionResult<MlpConfig> grid_search_mlp(const std::vector<FeatureCase>& train,
                                                  const std::vector<MlpConfig>& configs,
                                                  const SearchOptions& options) {
  return grid_search(train, configs, options,
                     [&](const std::vector<FeatureCase>& fit_part, const MlpConfig& cfg) {
                       auto init = mlp_init(cfg, fit_part.front().features.size());
                       auto trained = mlp_train(std::move(init), fit_part, cfg);
                       auto model = std::move(trained.model);
                       return [model](const FeatureCase& c) {
                         return mlp_forward(model, c.features);
                       };
                     });
}

struct RfecvOptions {
  int folds = 5;
  int step = 1;
  std::uint64_t seed = 0;
  SvrTrainOptions train;
};

struct RfecvTraceEntry {
  std::vector<bool> mask;
  std::size_t n_features = 0;
  double cv_score = 0.0;
};

struct RfecvResult {
  FeatureMask mask;
  std::vector<RfecvTraceEntry> trace;  // from all features down to one
};

// Recursive feature elimination with k-fold cross validation. At each
// feature count the mean CV error of a linear SVR is recorded; the `step`
// features with the smallest |w_d| (fitted on all current features) are
// dropped, down to a single feature. The mask with the best recorded score
// wins; ties go to fewer features. Fold assignment is a seeded round-robin
// over shuffled cases.
inline RfecvResult rfecv_select(const std::vector<FeatureCase>& train, const SvrConfig& config,
                                const RfecvOptions& options = {}) {
  if (config.kernel.kind != KernelKind::kLinear)
    throw std::invalid_argument("rfecv_select: feature ranking requires the linear kernel");
  if (options.folds < 2) throw std::invalid_argument("rfecv_select: folds must be >= 2");
  if (options.step < 1) throw std::invalid_argument("rfecv_select: step must be >= 1");
  if (train.size() < static_cast<std::size_t>(options.folds))
    throw std::invalid_argument("rfecv_select: need at least `folds` cases");

  const std::size_t dims = train.front().features.size();
  std::mt19937_64 rng(options.seed);
  auto order = shuffled_indices(train.size(), rng);
  std::vector<int> fold_of(train.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_of[order[i]] = static_cast<int>(i % options.folds);

  RfecvResult result;
  FeatureMask current = full_mask(dims);
  current.provenance = MaskProvenance::kRfecv;

  while (true) {
    auto masked = apply_mask(train, current);

    double cv_sum = 0.0;
    for (int f = 0; f < options.folds; ++f) {
      std::vector<FeatureCase> fit_part, val_part;
      for (std::size_t i = 0; i < masked.size(); ++i)
        (fold_of[i] == f ? val_part : fit_part).push_back(masked[i]);
      auto model = svr_fit(fit_part, config.hyper, config.kernel, options.train);
      std::vector<double> preds, labels;
      for (const auto& c : val_part) {
        preds.push_back(svr_predict(model, c.features));
        labels.push_back(c.label);
      }
      cv_sum += validation_score(ValidationMetric::kRmse, preds, labels);
    }
    result.trace.push_back({current.active, current.count(), cv_sum / options.folds});

    if (current.count() <= 1) break;

    // rank by |w_d| on the full training data and drop the weakest
    auto model = svr_fit(masked, config.hyper, config.kernel, options.train);
    std::vector<std::size_t> active_indices;
    for (std::size_t d = 0; d < dims; ++d)
      if (current.active[d]) active_indices.push_back(d);
    std::vector<std::size_t> by_weight(active_indices.size());
    for (std::size_t i = 0; i < by_weight.size(); ++i) by_weight[i] = i;
    std::sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
      double wa = std::abs(model.weights[a]);
      double wb = std::abs(model.weights[b]);
      if (wa != wb) return wa < wb;
      return active_indices[a] < active_indices[b];
    });
    std::size_t to_drop = std::min<std::size_t>(options.step, current.count() - 1);
    for (std::size_t i = 0; i < to_drop; ++i)
      current.active[active_indices[by_weight[i]]] = false;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    if (result.trace[i].cv_score <= result.trace[best].cv_score) best = i;
  result.mask.active = result.trace[best].mask;
  result.mask.provenance = MaskProvenance::kRfecv;
  return result;
}

inline nlohmann::json feature_mask_to_json(const FeatureMask& mask,
                                           const std::vector<std::string>& names) {
  nlohmann::json j;
  j["provenance"] = mask_provenance_name(mask.provenance);
  j["active"] = mask.active;
  auto selected = nlohmann::json::array();
  for (std::size_t d = 0; d < mask.active.size(); ++d)
    if (mask.active[d] && d < names.size()) selected.push_back(names[d]);
  j["selected"] = selected;
  return j;
}

inline FeatureMask feature_mask_from_json(const nlohmann::json& j) {
  FeatureMask m;
  m.active = j.at("active").get<std::vector<bool>>();
  std::string p = j.value("provenance", "none");
  m.provenance = p == "manual"  ? MaskProvenance::kManual
                 : p == "rfecv" ? MaskProvenance::kRfecv
                                : MaskProvenance::kNone;
  return m;
}

}  // namespace ffpred
