#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffpred/eval.hpp"
#include "ffpred/features.hpp"
#include "ffpred/ingest.hpp"
#include "ffpred/mlp.hpp"
#include "ffpred/selection.hpp"
#include "ffpred/svr.hpp"

namespace ffpred {

enum class SelectionMode { kNone, kManual, kRfecv };
enum class ModelKind { kSvr, kMlp };

inline SelectionMode parse_selection_mode(const std::string& s) {
  if (s == "none") return SelectionMode::kNone;
  if (s == "manual") return SelectionMode::kManual;
  if (s == "rfecv") return SelectionMode::kRfecv;
  throw std::invalid_argument("unknown feature selection mode '" + s + "'");
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "svr") return ModelKind::kSvr;
  if (s == "nn" || s == "mlp") return ModelKind::kMlp;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

struct RunConfig {
  // inputs
  std::string qb_csv;
  std::string defense_csv;
  std::string rules_path;  // empty: standard scoring

  // featurization
  int min_attempts = 5;
  int window = 10;
  HistoryMode history_mode = HistoryMode::kPlainAverage;
  double ewma_alpha = 0.5;
  std::set<int> train_seasons;  // empty: all seasons except the first and last
  int test_season = 0;          // 0: the last season present

  // modeling
  ModelKind model = ModelKind::kSvr;
  SelectionMode selection = SelectionMode::kNone;
  SvrConfig svr = default_svr_config();
  MlpConfig mlp;
  SvrTrainOptions svr_train;
  bool run_grid_search = false;
  SearchOptions search;
  int rfecv_folds = 5;
  int rfecv_step = 1;

  // evaluation
  int top_n = 24;
  double mre_floor = kDefaultMreFloor;
  double hist_bin_width = 1.0;

  std::uint64_t seed = 0;
};

struct PipelineResult {
  std::set<int> train_seasons;
  int test_season = 0;
  DatasetSplit split;  // raw feature cases as built (unnormalized, unmasked)
  std::size_t dropped_missing_defense = 0;

  bool normalized = false;
  NormalizationParams normalization;
  FeatureMask mask;
  std::vector<std::string> active_names;
  std::optional<SelectionResult<SvrConfig>> svr_search;
  std::optional<SelectionResult<MlpConfig>> mlp_search;

  nlohmann::json model_json;
  std::string model_desc;

  std::vector<double> predictions;  // one per test case, in split.test order
  std::set<std::string> top_ids;
  EvalReport report;
  Histogram hist_all;
  Histogram hist_top;
  double baseline_mae = 0.0;  // test MAE of predicting the training-label mean
};

inline PipelineResult run_pipeline(const RunConfig& config) {
  PipelineResult result;
  GameLogCorpus corpus = parse_game_log(config.qb_csv, config.defense_csv);
  if (corpus.seasons_present.size() < 2)
    throw std::runtime_error("pipeline: need at least two seasons of data");

  int test_season = config.test_season != 0 ? config.test_season : *corpus.seasons_present.rbegin();
  std::set<int> train_seasons = config.train_seasons;
  if (train_seasons.empty()) {
    // first season is history only, last season is the test set
    for (int s : corpus.seasons_present)
      if (s != *corpus.seasons_present.begin() && s != test_season) train_seasons.insert(s);
    if (train_seasons.empty() && *corpus.seasons_present.begin() != test_season)
      train_seasons.insert(*corpus.seasons_present.begin());
  }
  result.train_seasons = train_seasons;
  result.test_season = test_season;

  ScoringRules rules =
      config.rules_path.empty() ? ScoringRules::standard() : load_scoring_rules(config.rules_path);
  auto cases = filter_qb_cases(corpus, config.min_attempts);

  BuildOptions build;
  build.window = config.window;
  build.history_mode = config.history_mode;
  try {
    build.rookie_baseline = rookie_baseline(corpus, train_seasons);
  } catch (const std::exception&) {
    // no first-year QBs in the training seasons; only needed if some case
    // has an empty history
  }
  try {
    build.defense_baseline = league_average_defense(corpus, train_seasons);
  } catch (const std::exception&) {
  }
  if (config.history_mode == HistoryMode::kEwma) {
    EwmaConfig ewma;
    ewma.alpha = config.ewma_alpha;
    if (build.rookie_baseline) ewma.initial = *build.rookie_baseline;
    build.ewma = ewma;
  }

  auto built = build_feature_cases(corpus, cases, rules, build);
  result.dropped_missing_defense = built.dropped_missing_defense;
  result.split = split_by_season(built.cases, train_seasons, test_season);

  const auto& names = feature_names();
  std::vector<FeatureCase> train = result.split.train;
  std::vector<FeatureCase> test = result.split.test;

  SearchOptions search = config.search;
  search.seed = config.seed;

  if (config.model == ModelKind::kSvr) {
    // normalization and feature selection apply to the SVR path only
    result.normalized = true;
    result.normalization = minmax_fit(train);
    train = minmax_apply(result.normalization, std::move(train));
    test = minmax_apply(result.normalization, std::move(test));

    switch (config.selection) {
      case SelectionMode::kNone:
        result.mask = full_mask(kFeatureCount);
        break;
      case SelectionMode::kManual:
        result.mask = manual_mask();
        break;
      case SelectionMode::kRfecv: {
        SvrConfig ranker = config.svr;
        ranker.kernel = KernelSpec{KernelKind::kLinear, 0.0, 3, 0.0};
        RfecvOptions opts;
        opts.folds = config.rfecv_folds;
        opts.step = config.rfecv_step;
        opts.seed = config.seed;
        opts.train = config.svr_train;
        result.mask = rfecv_select(train, ranker, opts).mask;
        break;
      }
    }
    result.active_names = masked_names(names, result.mask);
    train = apply_mask(train, result.mask);
    test = apply_mask(test, result.mask);

    SvrConfig chosen = config.svr;
    if (config.run_grid_search) {
      auto configs = enumerate_grid(SvrGrid::defaults());
      result.svr_search = grid_search_svr(train, configs, search, config.svr_train);
      chosen = result.svr_search->best;
    }
    auto model = svr_fit(train, chosen.hyper, chosen.kernel, config.svr_train);
    result.model_desc = "svr " + chosen.describe();
    result.model_json["type"] = "svr";
    result.model_json["model"] = svr_model_to_json(model);
    result.predictions = svr_predict_batch(model, test);
  } else {
    // the network takes the data in its original form
    result.mask = full_mask(kFeatureCount);
    result.active_names = names;

    MlpConfig chosen = config.mlp;
    chosen.seed = config.seed;
    if (config.run_grid_search) {
      auto configs = enumerate_grid(MlpGrid::defaults());
      for (auto& c : configs) {
        c.learning_rate = config.mlp.learning_rate;
        c.init_scale = config.mlp.init_scale;
        c.seed = config.seed;
      }
      result.mlp_search = grid_search_mlp(train, configs, search);
      chosen = result.mlp_search->best;
    }
    auto trained = mlp_train(mlp_init(chosen, kFeatureCount), train, chosen);
    result.model_desc = std::string("nn epochs=") + std::to_string(chosen.n_epochs) +
                        " hidden=" + std::to_string(chosen.n_hidden) + " act=" +
                        activation_name(chosen.activation);
    result.model_json["type"] = "mlp";
    result.model_json["model"] = mlp_model_to_json(trained.model);
    result.predictions.reserve(test.size());
    for (const auto& c : test) result.predictions.push_back(mlp_forward(trained.model, c.features));
  }

  result.model_json["mask"] = feature_mask_to_json(result.mask, names);
  if (result.normalized) {
    result.model_json["normalization"] = {{"min", result.normalization.min},
                                          {"max", result.normalization.max}};
  }

  // top players by actual test-season fantasy totals over the built cases
  std::vector<SeasonScore> season_scores;
  for (const auto& c : result.split.test)
    season_scores.push_back({c.player_id, c.season, c.label});
  std::set<std::string> distinct;
  for (const auto& s : season_scores) distinct.insert(s.player_id);
  int n_top = std::min<int>(config.top_n, static_cast<int>(distinct.size()));
  auto ranked = rank_top_players(season_scores, test_season, n_top);
  result.top_ids = std::set<std::string>(ranked.begin(), ranked.end());

  std::size_t next = 0;
  auto predict_by_order = [&](const FeatureCase&) { return result.predictions[next++]; };
  result.report = evaluate_model(predict_by_order, result.split.test, result.top_ids,
                                 config.mre_floor);
  result.report.model_desc = result.model_desc;
  result.report.mask_desc = mask_provenance_name(result.mask.provenance);

  std::vector<double> abs_all, abs_top;
  for (std::size_t i = 0; i < result.split.test.size(); ++i) {
    double err = std::abs(result.predictions[i] - result.split.test[i].label);
    abs_all.push_back(err);
    if (result.top_ids.count(result.split.test[i].player_id)) abs_top.push_back(err);
  }
  result.hist_all = error_histogram(abs_all, config.hist_bin_width);
  result.hist_top = error_histogram(abs_top, config.hist_bin_width);

  double train_mean = 0.0;
  for (const auto& c : result.split.train) train_mean += c.label;
  train_mean /= static_cast<double>(result.split.train.size());
  double abs_sum = 0.0;
  for (const auto& c : result.split.test) abs_sum += std::abs(train_mean - c.label);
  result.baseline_mae = abs_sum / static_cast<double>(result.split.test.size());

  return result;
}

inline std::string predictions_to_csv(const PipelineResult& r) {
  std::string out = "player_id,season,week,prediction,label\n";
  for (std::size_t i = 0; i < r.split.test.size(); ++i) {
    const auto& c = r.split.test[i];
    out += csv::join_row({c.player_id, std::to_string(c.season), std::to_string(c.week),
                          csv::format_double(r.predictions[i]), csv::format_double(c.label)});
  }
  return out;
}

template <typename Config>
nlohmann::json selection_result_to_json(const SelectionResult<Config>& s,
                                        const std::function<nlohmann::json(const Config&)>& conf) {
  nlohmann::json j;
  j["best_index"] = s.best_index;
  j["best"] = conf(s.best);
  j["mean_scores"] = s.mean_scores;
  j["repeat_scores"] = s.repeat_scores;
  j["failed"] = s.failed;
  j["repeats"] = s.repeats;
  j["val_fraction"] = s.val_fraction;
  return j;
}

inline nlohmann::json svr_config_to_json(const SvrConfig& c) {
  return {{"kernel", kernel_spec_to_json(c.kernel)}, {"c", c.hyper.c},
          {"epsilon", c.hyper.epsilon}};
}

inline nlohmann::json mlp_config_to_json(const MlpConfig& c) {
  return {{"n_epochs", c.n_epochs},
          {"n_hidden", c.n_hidden},
          {"activation", activation_name(c.activation)},
          {"learning_rate", c.learning_rate},
          {"init_scale", c.init_scale}};
}

// Deterministic artifact files: identical configuration and seed give
// byte-identical output.
inline void write_pipeline_artifacts(const PipelineResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  const auto& names = feature_names();
  write_file(path("train.csv"), cases_to_csv(r.split.train, names));
  write_file(path("test.csv"), cases_to_csv(r.split.test, names));
  write_file(path("model.json"), r.model_json.dump(2) + "\n");
  write_file(path("mask.json"), feature_mask_to_json(r.mask, names).dump(2) + "\n");
  if (r.svr_search)
    write_file(path("selection.json"),
               selection_result_to_json<SvrConfig>(*r.svr_search, svr_config_to_json).dump(2) +
                   "\n");
  if (r.mlp_search)
    write_file(path("selection.json"),
               selection_result_to_json<MlpConfig>(*r.mlp_search, mlp_config_to_json).dump(2) +
                   "\n");
  write_file(path("predictions.csv"), predictions_to_csv(r));

  nlohmann::json report = eval_report_to_json(r.report);
  report["baseline_mae"] = r.baseline_mae;
  report["train_seasons"] = r.train_seasons;
  report["test_season"] = r.test_season;
  report["top_ids"] = r.top_ids;
  report["dropped_missing_defense"] = r.dropped_missing_defense;
  write_file(path("report.json"), report.dump(2) + "\n");
  write_file(path("report_row.csv"), eval_report_csv_header() + eval_report_csv_row(r.report));
  write_file(path("hist_all.csv"), histogram_to_csv(r.hist_all));
  write_file(path("hist_top.csv"), histogram_to_csv(r.hist_top));
}

}  // namespace ffpred
