#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffpred/core.hpp"
#include "ffpred/csv.hpp"
#include "ffpred/ingest.hpp"

namespace ffpred {

// One labeled case: the feature vector for a game and the fantasy score the
// QB actually produced in it. The pipeline always builds kFeatureCount
// features; masked datasets carry fewer.
struct FeatureCase {
  std::string player_id;
  int season = 0;
  int week = 0;
  std::vector<double> features;
  double label = 0.0;

  bool operator==(const FeatureCase&) const = default;
};

// Per-game average stats of first-year QBs over their first season, one
// sample per player (mean of player means, not of games). Used to fill the
// history slots of a QB's first career game.
inline StatLine rookie_baseline(const GameLogCorpus& corpus, const std::set<int>& seasons) {
  std::array<double, kQbStatCount> total{};
  int n_rookies = 0;
  for (const auto& [player, games] : corpus.games_by_player) {
    int debut_season = corpus.qb_lines[games.front()].season;
    if (!seasons.count(debut_season)) continue;
    std::array<double, kQbStatCount> sum{};
    int n_games = 0;
    for (auto idx : games) {
      const auto& l = corpus.qb_lines[idx];
      if (l.season != debut_season) break;
      for (int s = 0; s < kQbStatCount; ++s) sum[s] += l.stats[s];
      ++n_games;
    }
    for (int s = 0; s < kQbStatCount; ++s) total[s] += sum[s] / n_games;
    ++n_rookies;
  }
  if (n_rookies == 0)
    throw std::runtime_error(
        "rookie_baseline: no first-year QB games in the given seasons; "
        "supply a baseline explicitly");
  StatLine baseline;
  for (int s = 0; s < kQbStatCount; ++s) baseline.stats[s] = total[s] / n_rookies;
  return baseline;
}

// Mean defense line over every defense game in the given seasons. Fallback
// for opponents with no prior games.
inline DefenseStatLine league_average_defense(const GameLogCorpus& corpus,
                                              const std::set<int>& seasons) {
  DefenseStatLine avg;
  int n = 0;
  for (const auto& l : corpus.defense_lines) {
    if (!seasons.count(l.season)) continue;
    avg.points_allowed += l.points_allowed;
    avg.pass_yards_allowed += l.pass_yards_allowed;
    avg.rush_yards_allowed += l.rush_yards_allowed;
    avg.turnovers_forced += l.turnovers_forced;
    ++n;
  }
  if (n == 0)
    throw std::runtime_error("league_average_defense: no defense games in the given seasons");
  avg.points_allowed /= n;
  avg.pass_yards_allowed /= n;
  avg.rush_yards_allowed /= n;
  avg.turnovers_forced /= n;
  return avg;
}

struct EwmaConfig {
  double alpha = 0.5;
  StatLine initial;  // S_0
};

// S_t = alpha * G_t + (1 - alpha) * S_{t-1}, applied category-wise over the
// history (oldest first). Returns S_T after the last game.
inline StatLine ewma_smooth(const std::vector<StatLine>& history, const EwmaConfig& config) {
  if (config.alpha < 0.0 || config.alpha > 1.0)
    throw std::invalid_argument("ewma alpha must lie in [0,1]");
  StatLine s = config.initial;
  for (const auto& g : history)
    for (int d = 0; d < kQbStatCount; ++d)
      s.stats[d] = config.alpha * g.stats[d] + (1.0 - config.alpha) * s.stats[d];
  return s;
}

enum class HistoryMode { kPlainAverage, kEwma };

struct BuildOptions {
  int window = 10;
  HistoryMode history_mode = HistoryMode::kPlainAverage;
  std::optional<EwmaConfig> ewma;  // required for HistoryMode::kEwma
  // Imputation sources; required only when some case actually needs them.
  std::optional<StatLine> rookie_baseline;
  std::optional<DefenseStatLine> defense_baseline;
};

struct BuildResult {
  std::vector<FeatureCase> cases;
  // cases dropped because the opponent has no defense line for the game week
  std::size_t dropped_missing_defense = 0;
};

namespace detail {

// indices of `sorted` (already time-ordered) strictly before (season, week)
inline std::size_t count_prior(const std::vector<std::size_t>& sorted, int season, int week,
                               auto&& time_of) {
  std::size_t n = 0;
  for (auto idx : sorted) {
    auto [s, w] = time_of(idx);
    if (s > season || (s == season && w >= week)) break;
    ++n;
  }
  return n;
}

}  // namespace detail

// Builds the labeled cases: context features from the case's own line,
// QB history slots from strictly earlier games of the player, defense slots
// from strictly earlier games of the opponent, label from the case's own
// game. Fewer than `window` prior games average over what is available. A
// first career game takes the rookie baseline for both history slots; an
// opponent with no prior games takes the league-average defense baseline.
inline BuildResult build_feature_cases(const GameLogCorpus& corpus,
                                       const std::vector<StatLine>& cases,
                                       const ScoringRules& rules,
                                       const BuildOptions& options = {}) {
  if (options.window < 1) throw std::invalid_argument("window must be >= 1");
  if (options.history_mode == HistoryMode::kEwma && !options.ewma)
    throw std::invalid_argument("ewma config required for HistoryMode::kEwma");

  static const std::vector<std::size_t> kNoGames;
  BuildResult result;
  result.cases.reserve(cases.size());

  for (const auto& line : cases) {
    if (!corpus.has_opponent_defense(line)) {
      ++result.dropped_missing_defense;
      continue;
    }

    FeatureCase fc;
    fc.player_id = line.player_id;
    fc.season = line.season;
    fc.week = line.week;
    fc.label = score_stat_line(line, rules);
    fc.features.assign(kFeatureCount, 0.0);
    fc.features[kFeatAge] = line.age;
    fc.features[kFeatExperience] = line.experience;

    auto it = corpus.games_by_player.find(line.player_id);
    const auto& games = it == corpus.games_by_player.end() ? kNoGames : it->second;
    std::size_t n_prior = detail::count_prior(games, line.season, line.week, [&](std::size_t i) {
      return std::pair{corpus.qb_lines[i].season, corpus.qb_lines[i].week};
    });

    if (n_prior == 0) {
      if (!options.rookie_baseline)
        throw std::runtime_error("build_feature_cases: " + line.player_id +
                                 " has no prior games; a rookie baseline is required");
      for (int s = 0; s < kQbStatCount; ++s) {
        fc.features[kFeatPrevStart + s] = options.rookie_baseline->stats[s];
        fc.features[kFeatAvgStart + s] = options.rookie_baseline->stats[s];
      }
    } else {
      if (options.history_mode == HistoryMode::kEwma) {
        std::vector<StatLine> history;
        history.reserve(n_prior);
        for (std::size_t i = 0; i < n_prior; ++i) history.push_back(corpus.qb_lines[games[i]]);
        StatLine smoothed = ewma_smooth(history, *options.ewma);
        for (int s = 0; s < kQbStatCount; ++s)
          fc.features[kFeatPrevStart + s] = smoothed.stats[s];
      } else {
        const auto& prev = corpus.qb_lines[games[n_prior - 1]];
        for (int s = 0; s < kQbStatCount; ++s)
          fc.features[kFeatPrevStart + s] = prev.stats[s];
      }
      std::size_t k = std::min<std::size_t>(n_prior, static_cast<std::size_t>(options.window));
      std::array<double, kQbStatCount> sum{};
      for (std::size_t i = n_prior - k; i < n_prior; ++i)
        for (int s = 0; s < kQbStatCount; ++s) sum[s] += corpus.qb_lines[games[i]].stats[s];
      for (int s = 0; s < kQbStatCount; ++s)
        fc.features[kFeatAvgStart + s] = sum[s] / static_cast<double>(k);
    }

    auto dit = corpus.defense_by_team.find(line.opponent);
    const auto& defs = dit == corpus.defense_by_team.end() ? kNoGames : dit->second;
    std::size_t n_def = detail::count_prior(defs, line.season, line.week, [&](std::size_t i) {
      return std::pair{corpus.defense_lines[i].season, corpus.defense_lines[i].week};
    });

    if (n_def == 0) {
      if (!options.defense_baseline)
        throw std::runtime_error("build_feature_cases: opponent " + line.opponent +
                                 " has no prior games; a defense baseline is required");
      auto vals = options.defense_baseline->values();
      for (int d = 0; d < kDefenseStatCount; ++d) {
        fc.features[kFeatDefPrevStart + d] = vals[d];
        fc.features[kFeatDefAvgStart + d] = vals[d];
      }
    } else {
      auto prev_vals = corpus.defense_lines[defs[n_def - 1]].values();
      for (int d = 0; d < kDefenseStatCount; ++d)
        fc.features[kFeatDefPrevStart + d] = prev_vals[d];
      std::size_t k = std::min<std::size_t>(n_def, static_cast<std::size_t>(options.window));
      std::array<double, kDefenseStatCount> sum{};
      for (std::size_t i = n_def - k; i < n_def; ++i) {
        auto vals = corpus.defense_lines[defs[i]].values();
        for (int d = 0; d < kDefenseStatCount; ++d) sum[d] += vals[d];
      }
      for (int d = 0; d < kDefenseStatCount; ++d)
        fc.features[kFeatDefAvgStart + d] = sum[d] / static_cast<double>(k);
    }

    result.cases.push_back(std::move(fc));
  }
  return result;
}

// Per-feature [min, max] fitted on training data only.
struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;
};

inline NormalizationParams minmax_fit(const std::vector<FeatureCase>& train) {
  if (train.empty()) throw std::invalid_argument("minmax_fit: empty training set");
  std::size_t dims = train.front().features.size();
  NormalizationParams p;
  p.min.assign(dims, std::numeric_limits<double>::infinity());
  p.max.assign(dims, -std::numeric_limits<double>::infinity());
  for (const auto& c : train) {
    if (c.features.size() != dims)
      throw std::invalid_argument("minmax_fit: inconsistent feature dimensionality");
    for (std::size_t d = 0; d < dims; ++d) {
      p.min[d] = std::min(p.min[d], c.features[d]);
      p.max[d] = std::max(p.max[d], c.features[d]);
    }
  }
  return p;
}

// x -> (x - min) / (max - min); a constant feature maps to 0. Values outside
// the fitted range are not clamped, so non-training cases may leave [0,1].
inline double minmax_transform_value(const NormalizationParams& p, std::size_t d, double x) {
  double range = p.max[d] - p.min[d];
  return range > 0.0 ? (x - p.min[d]) / range : 0.0;
}

inline std::vector<FeatureCase> minmax_apply(const NormalizationParams& p,
                                             std::vector<FeatureCase> cases) {
  for (auto& c : cases) {
    if (c.features.size() != p.min.size())
      throw std::invalid_argument("minmax_apply: dimensionality mismatch");
    for (std::size_t d = 0; d < c.features.size(); ++d)
      c.features[d] = minmax_transform_value(p, d, c.features[d]);
  }
  return cases;
}

struct DatasetSplit {
  std::vector<FeatureCase> train;
  std::vector<FeatureCase> test;
  std::set<int> train_seasons;
  std::set<int> test_seasons;
  std::size_t dropped = 0;  // cases in neither season set
};

inline DatasetSplit split_by_season(const std::vector<FeatureCase>& cases,
                                    const std::set<int>& train_seasons, int test_season) {
  if (train_seasons.count(test_season))
    throw std::invalid_argument("split_by_season: test season also listed as a train season");
  DatasetSplit split;
  split.train_seasons = train_seasons;
  split.test_seasons = {test_season};
  for (const auto& c : cases) {
    if (train_seasons.count(c.season))
      split.train.push_back(c);
    else if (c.season == test_season)
      split.test.push_back(c);
    else
      ++split.dropped;
  }
  if (split.train.empty()) throw std::runtime_error("split_by_season: empty training partition");
  if (split.test.empty()) throw std::runtime_error("split_by_season: empty test partition");
  return split;
}

// Featurized dataset CSV: one column per feature (canonical names), then
// label, player_id, season, week.
inline std::string cases_to_csv(const std::vector<FeatureCase>& cases,
                                const std::vector<std::string>& names) {
  std::vector<std::string> header = names;
  header.insert(header.end(), {"label", "player_id", "season", "week"});
  std::string out = csv::join_row(header);
  for (const auto& c : cases) {
    if (c.features.size() != names.size())
      throw std::invalid_argument("cases_to_csv: feature count does not match names");
    std::vector<std::string> cells;
    cells.reserve(header.size());
    for (double f : c.features) cells.push_back(csv::format_double(f));
    cells.push_back(csv::format_double(c.label));
    cells.push_back(c.player_id);
    cells.push_back(std::to_string(c.season));
    cells.push_back(std::to_string(c.week));
    out += csv::join_row(cells);
  }
  return out;
}

struct CaseDataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureCase> cases;
};

inline CaseDataset cases_from_csv_table(const csv::Table& table) {
  CaseDataset ds;
  std::size_t n_features = 0;
  while (n_features < table.header.size() && table.header[n_features] != "label") ++n_features;
  if (n_features + 4 != table.header.size())
    throw std::runtime_error(table.source + ": expected <features...>,label,player_id,season,week");
  ds.feature_names.assign(table.header.begin(), table.header.begin() + n_features);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    csv::Row row(table, r);
    FeatureCase c;
    c.features.reserve(n_features);
    for (std::size_t d = 0; d < n_features; ++d) c.features.push_back(row.num(table.header[d]));
    c.label = row.num("label");
    c.player_id = row.str("player_id");
    c.season = row.integer("season");
    c.week = row.integer("week");
    ds.cases.push_back(std::move(c));
  }
  return ds;
}

inline CaseDataset cases_from_csv(const std::string& path) {
  return cases_from_csv_table(csv::read_file(path));
}

}  // namespace ffpred
