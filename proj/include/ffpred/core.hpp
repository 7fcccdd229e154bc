#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ffpred {

// The 12 per-game QB stat categories: passing, rushing, turnovers and
// two-point conversions.
enum QbStat : int {
  kPassAttempts = 0,
  kPassCompletions,
  kPassYards,
  kPassTds,
  kInterceptions,
  kRushAttempts,
  kRushYards,
  kRushTds,
  kFumblesLost,
  kFumblesTotal,
  kTwoPtPass,
  kTwoPtRush,
};

inline constexpr int kQbStatCount = 12;

inline constexpr std::array<std::string_view, kQbStatCount> kQbStatNames = {
    "pass_attempts", "pass_completions", "pass_yards",  "pass_tds",
    "interceptions", "rush_attempts",    "rush_yards",  "rush_tds",
    "fumbles_lost",  "fumbles_total",    "two_pt_pass", "two_pt_rush",
};

// Yardage can legitimately go negative; everything else is a count.
inline constexpr bool qb_stat_is_count(int stat) {
  return stat != kPassYards && stat != kRushYards;
}

inline std::optional<int> qb_stat_index(std::string_view name) {
  for (int i = 0; i < kQbStatCount; ++i)
    if (kQbStatNames[i] == name) return i;
  return std::nullopt;
}

// One QB game log row.
struct StatLine {
  std::string player_id;
  std::string player_name;
  int season = 0;
  int week = 0;
  std::string team;
  std::string opponent;
  double age = 0.0;
  double experience = 0.0;
  std::array<double, kQbStatCount> stats{};

  double stat(QbStat s) const { return stats[s]; }
  bool operator==(const StatLine&) const = default;
};

// Field-level sanity checks; throws naming the offending field.
inline void validate_stat_line(const StatLine& line) {
  if (line.stats[kPassCompletions] > line.stats[kPassAttempts])
    throw std::invalid_argument("pass_completions > pass_attempts for " + line.player_id);
  for (int s = 0; s < kQbStatCount; ++s)
    if (qb_stat_is_count(s) && line.stats[s] < 0.0)
      throw std::invalid_argument(std::string(kQbStatNames[s]) + " < 0 for " + line.player_id);
  if (line.stats[kFumblesLost] > line.stats[kFumblesTotal])
    throw std::invalid_argument("fumbles_lost > fumbles_total for " + line.player_id);
  if (line.age < line.experience)
    throw std::invalid_argument("age < experience for " + line.player_id);
  if (line.week < 1 || line.week > 22)
    throw std::invalid_argument("week out of range [1,22] for " + line.player_id);
}

inline constexpr int kDefenseStatCount = 4;

inline constexpr std::array<std::string_view, kDefenseStatCount> kDefenseStatNames = {
    "points_allowed", "pass_yards_allowed", "rush_yards_allowed", "turnovers_forced",
};

// One team-defense game log row.
struct DefenseStatLine {
  std::string team;
  int season = 0;
  int week = 0;
  double points_allowed = 0.0;
  double pass_yards_allowed = 0.0;
  double rush_yards_allowed = 0.0;
  double turnovers_forced = 0.0;

  std::array<double, kDefenseStatCount> values() const {
    return {points_allowed, pass_yards_allowed, rush_yards_allowed, turnovers_forced};
  }
  bool operator==(const DefenseStatLine&) const = default;
};

inline void validate_defense_line(const DefenseStatLine& line) {
  if (line.points_allowed < 0.0)
    throw std::invalid_argument("points_allowed < 0 for " + line.team);
  if (line.turnovers_forced < 0.0)
    throw std::invalid_argument("turnovers_forced < 0 for " + line.team);
}

// One scoring entry: a category contributes value * points / per.
// "1 point per 25 passing yards" is {points: 1, per: 25}.
struct ScoringRule {
  double points = 0.0;
  double per = 1.0;
};

// Ruleset mapping every stat category to its point value. Categories left
// unset are distinct from explicit zero weights: scoring a line with a
// nonzero value in an unset category is a configuration error.
struct ScoringRules {
  std::array<std::optional<ScoringRule>, kQbStatCount> rules{};

  ScoringRules& set(QbStat stat, double points, double per = 1.0) {
    if (per <= 0.0) throw std::invalid_argument("scoring divisor must be > 0");
    rules[stat] = ScoringRule{points, per};
    return *this;
  }

  // NFL standard scoring: 1 pt / 25 pass yds, 4 / pass TD, -2 / INT,
  // 1 pt / 10 rush yds, 6 / rush TD, 2 / two-point conversion,
  // -2 / fumble lost; remaining categories explicitly zero-weighted.
  static ScoringRules standard() {
    ScoringRules r;
    r.set(kPassAttempts, 0.0);
    r.set(kPassCompletions, 0.0);
    r.set(kPassYards, 1.0, 25.0);
    r.set(kPassTds, 4.0);
    r.set(kInterceptions, -2.0);
    r.set(kRushAttempts, 0.0);
    r.set(kRushYards, 1.0, 10.0);
    r.set(kRushTds, 6.0);
    r.set(kFumblesLost, -2.0);
    r.set(kFumblesTotal, 0.0);
    r.set(kTwoPtPass, 2.0);
    r.set(kTwoPtRush, 2.0);
    return r;
  }
};

// Fantasy points for one game under the given ruleset. Full real precision,
// no rounding.
inline double score_stat_line(const StatLine& line, const ScoringRules& rules) {
  double total = 0.0;
  for (int s = 0; s < kQbStatCount; ++s) {
    const auto& rule = rules.rules[s];
    if (!rule) {
      if (line.stats[s] != 0.0)
        throw std::runtime_error("scoring rules missing entry for nonzero category '" +
                                 std::string(kQbStatNames[s]) + "'");
      continue;
    }
    total += line.stats[s] * rule->points / rule->per;
  }
  return total;
}

inline ScoringRules scoring_rules_from_json(const nlohmann::json& j) {
  ScoringRules out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto idx = qb_stat_index(it.key());
    if (!idx) throw std::runtime_error("unknown stat category '" + it.key() + "' in ruleset");
    double points = it.value().at("points").get<double>();
    double per = it.value().value("per", 1.0);
    out.set(static_cast<QbStat>(*idx), points, per);
  }
  return out;
}

inline nlohmann::json scoring_rules_to_json(const ScoringRules& rules) {
  nlohmann::json j = nlohmann::json::object();
  for (int s = 0; s < kQbStatCount; ++s) {
    if (!rules.rules[s]) continue;
    nlohmann::json entry;
    entry["points"] = rules.rules[s]->points;
    entry["per"] = rules.rules[s]->per;
    j[std::string(kQbStatNames[s])] = entry;
  }
  return j;
}

inline ScoringRules load_scoring_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ruleset " + path);
  nlohmann::json j;
  in >> j;
  return scoring_rules_from_json(j);
}

// Canonical 34-feature layout shared by the feature builder, the synthetic
// generator's ground truth and the selection masks:
//   [0] age, [1] experience,
//   [2..13]  previous-game QB stats (QbStat order),
//   [14..25] trailing-window (default 10 games) average QB stats,
//   [26..29] opponent defense, previous game,
//   [30..33] opponent defense, trailing-window average.
inline constexpr int kFeatureCount = 34;
inline constexpr int kFeatAge = 0;
inline constexpr int kFeatExperience = 1;
inline constexpr int kFeatPrevStart = 2;
inline constexpr int kFeatAvgStart = kFeatPrevStart + kQbStatCount;
inline constexpr int kFeatDefPrevStart = kFeatAvgStart + kQbStatCount;
inline constexpr int kFeatDefAvgStart = kFeatDefPrevStart + kDefenseStatCount;
static_assert(kFeatDefAvgStart + kDefenseStatCount == kFeatureCount);

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    v.reserve(kFeatureCount);
    v.emplace_back("age");
    v.emplace_back("experience");
    for (auto s : kQbStatNames) v.push_back("prev_" + std::string(s));
    for (auto s : kQbStatNames) v.push_back("avg10_" + std::string(s));
    for (auto s : kDefenseStatNames) v.push_back("def_prev_" + std::string(s));
    for (auto s : kDefenseStatNames) v.push_back("def_avg10_" + std::string(s));
    return v;
  }();
  return names;
}

// (player, season, fantasy points) triple for season-total ranking.
struct SeasonScore {
  std::string player_id;
  int season = 0;
  double points = 0.0;
};

// The n players with the highest total fantasy points in `season`, best
// first. Ties break by ascending player_id.
inline std::vector<std::string> rank_top_players(const std::vector<SeasonScore>& scores,
                                                 int season, int n) {
  if (n < 1) throw std::invalid_argument("rank_top_players: n must be >= 1");
  std::map<std::string, double> totals;
  for (const auto& s : scores)
    if (s.season == season) totals[s.player_id] += s.points;
  if (static_cast<int>(totals.size()) < n)
    throw std::runtime_error("rank_top_players: need " + std::to_string(n) + " players, have " +
                             std::to_string(totals.size()));
  std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

}  // namespace ffpred
