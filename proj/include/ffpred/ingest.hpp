#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ffpred/core.hpp"
#include "ffpred/csv.hpp"
#include "ffpred/rng.hpp"

namespace ffpred {

inline constexpr std::array<std::string_view, 8> kQbCsvIdentityColumns = {
    "player_id", "player_name", "season", "week", "team", "opponent", "age", "experience",
};

inline std::vector<std::string> qb_csv_header() {
  std::vector<std::string> h;
  for (auto c : kQbCsvIdentityColumns) h.emplace_back(c);
  for (auto c : kQbStatNames) h.emplace_back(c);
  return h;
}

inline std::vector<std::string> defense_csv_header() {
  std::vector<std::string> h{"team", "season", "week"};
  for (auto c : kDefenseStatNames) h.emplace_back(c);
  return h;
}

// Immutable bundle of QB and defense game logs with lookup indices.
// (player_id, season, week) is unique among qb_lines and (team, season, week)
// among defense_lines; line order is preserved so serialization round-trips.
struct GameLogCorpus {
  std::vector<StatLine> qb_lines;
  std::vector<DefenseStatLine> defense_lines;
  std::set<int> seasons_present;

  // indices into qb_lines per player, sorted by (season, week)
  std::map<std::string, std::vector<std::size_t>> games_by_player;
  // indices into defense_lines per team, sorted by (season, week)
  std::map<std::string, std::vector<std::size_t>> defense_by_team;
  std::map<std::tuple<std::string, int, int>, std::size_t> defense_by_key;

  // qb_lines whose opponent has no defense line for that (season, week)
  std::size_t incomplete_case_count = 0;

  const DefenseStatLine* defense_line(const std::string& team, int season, int week) const {
    auto it = defense_by_key.find({team, season, week});
    return it == defense_by_key.end() ? nullptr : &defense_lines[it->second];
  }

  bool has_opponent_defense(const StatLine& line) const {
    return defense_line(line.opponent, line.season, line.week) != nullptr;
  }
};

inline GameLogCorpus make_corpus(std::vector<StatLine> qb_lines,
                                 std::vector<DefenseStatLine> defense_lines) {
  GameLogCorpus corpus;
  corpus.qb_lines = std::move(qb_lines);
  corpus.defense_lines = std::move(defense_lines);

  std::map<std::tuple<std::string, int, int>, std::size_t> qb_keys;
  for (std::size_t i = 0; i < corpus.qb_lines.size(); ++i) {
    const auto& l = corpus.qb_lines[i];
    auto [it, inserted] = qb_keys.insert({{l.player_id, l.season, l.week}, i});
    if (!inserted)
      throw std::runtime_error("duplicate QB key (" + l.player_id + ", " +
                               std::to_string(l.season) + ", " + std::to_string(l.week) + ")");
    corpus.games_by_player[l.player_id].push_back(i);
    corpus.seasons_present.insert(l.season);
  }
  for (std::size_t i = 0; i < corpus.defense_lines.size(); ++i) {
    const auto& l = corpus.defense_lines[i];
    auto [it, inserted] = corpus.defense_by_key.insert({{l.team, l.season, l.week}, i});
    if (!inserted)
      throw std::runtime_error("duplicate defense key (" + l.team + ", " +
                               std::to_string(l.season) + ", " + std::to_string(l.week) + ")");
    corpus.defense_by_team[l.team].push_back(i);
    corpus.seasons_present.insert(l.season);
  }

  auto by_time_qb = [&](std::size_t a, std::size_t b) {
    const auto& x = corpus.qb_lines[a];
    const auto& y = corpus.qb_lines[b];
    return std::tie(x.season, x.week) < std::tie(y.season, y.week);
  };
  for (auto& [player, idx] : corpus.games_by_player)
    std::sort(idx.begin(), idx.end(), by_time_qb);
  auto by_time_def = [&](std::size_t a, std::size_t b) {
    const auto& x = corpus.defense_lines[a];
    const auto& y = corpus.defense_lines[b];
    return std::tie(x.season, x.week) < std::tie(y.season, y.week);
  };
  for (auto& [team, idx] : corpus.defense_by_team)
    std::sort(idx.begin(), idx.end(), by_time_def);

  for (const auto& l : corpus.qb_lines)
    if (!corpus.has_opponent_defense(l)) ++corpus.incomplete_case_count;
  return corpus;
}

inline std::vector<StatLine> parse_qb_csv_table(const csv::Table& table) {
  auto expected = qb_csv_header();
  if (table.header != expected)
    throw std::runtime_error(table.source + ": QB log header does not match the schema");
  std::vector<StatLine> lines;
  lines.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    csv::Row row(table, r);
    StatLine l;
    l.player_id = row.str("player_id");
    l.player_name = row.str("player_name");
    l.season = row.integer("season");
    l.week = row.integer("week");
    l.team = row.str("team");
    l.opponent = row.str("opponent");
    l.age = row.num("age");
    l.experience = row.num("experience");
    for (int s = 0; s < kQbStatCount; ++s) l.stats[s] = row.num(kQbStatNames[s]);
    try {
      validate_stat_line(l);
    } catch (const std::exception& e) {
      row.reject(e.what());
    }
    lines.push_back(std::move(l));
  }
  return lines;
}

inline std::vector<DefenseStatLine> parse_defense_csv_table(const csv::Table& table) {
  auto expected = defense_csv_header();
  if (table.header != expected)
    throw std::runtime_error(table.source + ": defense log header does not match the schema");
  std::vector<DefenseStatLine> lines;
  lines.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    csv::Row row(table, r);
    DefenseStatLine l;
    l.team = row.str("team");
    l.season = row.integer("season");
    l.week = row.integer("week");
    l.points_allowed = row.num("points_allowed");
    l.pass_yards_allowed = row.num("pass_yards_allowed");
    l.rush_yards_allowed = row.num("rush_yards_allowed");
    l.turnovers_forced = row.num("turnovers_forced");
    try {
      validate_defense_line(l);
    } catch (const std::exception& e) {
      row.reject(e.what());
    }
    lines.push_back(std::move(l));
  }
  return lines;
}

inline std::vector<StatLine> parse_qb_csv(const std::string& path) {
  return parse_qb_csv_table(csv::read_file(path));
}

inline std::vector<DefenseStatLine> parse_defense_csv(const std::string& path) {
  return parse_defense_csv_table(csv::read_file(path));
}

inline GameLogCorpus parse_game_log(const std::string& qb_path, const std::string& defense_path) {
  return make_corpus(parse_qb_csv(qb_path), parse_defense_csv(defense_path));
}

inline std::string serialize_qb_csv(const std::vector<StatLine>& lines) {
  std::string out = csv::join_row(qb_csv_header());
  for (const auto& l : lines) {
    std::vector<std::string> cells{l.player_id,
                                   l.player_name,
                                   std::to_string(l.season),
                                   std::to_string(l.week),
                                   l.team,
                                   l.opponent,
                                   csv::format_double(l.age),
                                   csv::format_double(l.experience)};
    for (int s = 0; s < kQbStatCount; ++s) cells.push_back(csv::format_double(l.stats[s]));
    out += csv::join_row(cells);
  }
  return out;
}

inline std::string serialize_defense_csv(const std::vector<DefenseStatLine>& lines) {
  std::string out = csv::join_row(defense_csv_header());
  for (const auto& l : lines) {
    out += csv::join_row({l.team, std::to_string(l.season), std::to_string(l.week),
                          csv::format_double(l.points_allowed),
                          csv::format_double(l.pass_yards_allowed),
                          csv::format_double(l.rush_yards_allowed),
                          csv::format_double(l.turnovers_forced)});
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Case filter: keep QB games with at least `min_attempts` in `stat`
// (pass attempts by default). History building is unaffected; this only
// decides which games become labeled cases.
inline std::vector<StatLine> filter_qb_cases(const GameLogCorpus& corpus, int min_attempts = 5,
                                             QbStat stat = kPassAttempts) {
  if (min_attempts < 0) throw std::invalid_argument("min_attempts must be >= 0");
  std::vector<StatLine> out;
  for (const auto& l : corpus.qb_lines)
    if (l.stats[stat] >= min_attempts) out.push_back(l);
  return out;
}

struct SyntheticOptions {
  int weeks_per_season = 16;
  int first_season = 2010;
  // When set, every third player debuts after the first season, so the
  // corpus contains rookie cases inside later seasons. Debut-game labels
  // cannot follow the planted linear model (their history slots are
  // imputed downstream), so they are listed in off_model_games.
  bool stagger_debuts = false;
};

// Ground truth behind a synthetic corpus. Labels satisfy
//   label = sum_d weights[d] * feature[d] + bias + u,   |u| <= noise
// for every case built with the default options (plain averages, window 10,
// standard scoring), except the games listed in off_model_games.
struct SyntheticTruth {
  std::vector<double> weights;  // kFeatureCount entries
  double bias = 0.0;
  std::vector<int> active_features;
  double noise = 0.0;
  int history_season = 0;  // first generated season
  std::set<std::tuple<std::string, int, int>> off_model_games;

  bool on_model(const std::string& player_id, int season, int week) const {
    return !off_model_games.count({player_id, season, week});
  }
};

struct SyntheticData {
  GameLogCorpus corpus;
  SyntheticTruth truth;
};

namespace detail {

template <std::size_t N>
std::array<double, N> tail_mean(const std::vector<std::array<double, N>>& hist, int window) {
  std::array<double, N> mean{};
  std::size_t k = std::min<std::size_t>(hist.size(), static_cast<std::size_t>(window));
  for (std::size_t i = hist.size() - k; i < hist.size(); ++i)
    for (std::size_t d = 0; d < N; ++d) mean[d] += hist[i][d];
  for (std::size_t d = 0; d < N; ++d) mean[d] /= static_cast<double>(k);
  return mean;
}

}  // namespace detail

// Deterministic corpus with a planted linear labeling. The generator tracks
// every player's and defense's running history and evaluates the same
// feature vector the feature builder will construct, so the planted relation
// holds exactly (up to `noise`) on the built cases.
inline SyntheticData generate_synthetic(std::uint64_t seed, int n_players, int n_seasons,
                                        double noise, SyntheticOptions options = {}) {
  if (n_players < 1) throw std::invalid_argument("n_players must be >= 1");
  if (n_seasons < 2) throw std::invalid_argument("n_seasons must be >= 2");
  if (noise < 0) throw std::invalid_argument("noise must be >= 0");

  std::mt19937_64 rng(seed);
  const int n_teams = std::max(2, n_players);
  const int weeks = options.weeks_per_season;
  const ScoringRules rules = ScoringRules::standard();

  auto team_code = [](int i) {
    std::string s = std::to_string(i + 1);
    return "T" + std::string(s.size() < 2 ? "0" : "") + s;
  };
  auto player_code = [](int i) {
    std::string s = std::to_string(i + 1);
    return "P" + std::string(s.size() < 2 ? "0" : "") + s;
  };

  SyntheticTruth truth;
  truth.noise = noise;
  truth.history_season = options.first_season;
  truth.weights.assign(kFeatureCount, 0.0);
  truth.weights[kFeatAge] = 0.25;
  truth.weights[kFeatExperience] = 0.8;
  truth.weights[kFeatPrevStart + kPassAttempts] = 0.35;
  truth.weights[kFeatAvgStart + kPassCompletions] = 0.6;
  truth.weights[kFeatDefAvgStart + 0] = 0.3;  // avg points allowed
  truth.bias = -4.0;
  for (int d = 0; d < kFeatureCount; ++d)
    if (truth.weights[d] != 0.0) truth.active_features.push_back(d);

  std::vector<int> debut(n_players, options.first_season);
  std::vector<double> base_age(n_players);
  for (int i = 0; i < n_players; ++i) {
    base_age[i] = static_cast<double>(uniform_int(rng, 22, 34));
    if (options.stagger_debuts && n_seasons > 1 && i % 3 == 2)
      debut[i] = options.first_season + 1 + static_cast<int>((i / 3) % (n_seasons - 1));
  }

  std::vector<std::vector<std::array<double, kQbStatCount>>> qb_hist(n_players);
  std::vector<std::vector<std::array<double, kDefenseStatCount>>> def_hist(n_teams);

  std::vector<StatLine> qb_lines;
  std::vector<DefenseStatLine> defense_lines;

  for (int s = 0; s < n_seasons; ++s) {
    const int season = options.first_season + s;
    for (int week = 1; week <= weeks; ++week) {
      // defense lines for every team this week; appended to history only
      // after the week's QB features are evaluated
      std::vector<DefenseStatLine> week_def(n_teams);
      for (int t = 0; t < n_teams; ++t) {
        DefenseStatLine d;
        d.team = team_code(t);
        d.season = season;
        d.week = week;
        d.points_allowed = static_cast<double>(uniform_int(rng, 10, 35));
        d.pass_yards_allowed = static_cast<double>(uniform_int(rng, 150, 380));
        d.rush_yards_allowed = static_cast<double>(uniform_int(rng, 60, 160));
        d.turnovers_forced = static_cast<double>(uniform_int(rng, 0, 4));
        week_def[t] = d;
      }

      for (int i = 0; i < n_players; ++i) {
        if (season < debut[i]) continue;
        StatLine l;
        l.player_id = player_code(i);
        l.player_name = "Player " + std::to_string(i + 1);
        l.season = season;
        l.week = week;
        l.team = team_code(i % n_teams);
        int opp = (i + week) % n_teams;
        if (opp == i % n_teams) opp = (opp + 1) % n_teams;
        l.opponent = team_code(opp);
        l.age = base_age[i] + (season - debut[i]) + (week - 1) / static_cast<double>(weeks);
        l.experience = static_cast<double>(season - debut[i]);

        double target;
        if (qb_hist[i].empty() || def_hist[opp].empty()) {
          target = uniform_real(rng, 8.0, 24.0);
          truth.off_model_games.insert({l.player_id, season, week});
        } else {
          const auto& prev = qb_hist[i].back();
          auto avg = detail::tail_mean(qb_hist[i], 10);
          auto davg = detail::tail_mean(def_hist[opp], 10);
          target = truth.bias + truth.weights[kFeatAge] * l.age +
                   truth.weights[kFeatExperience] * l.experience +
                   truth.weights[kFeatPrevStart + kPassAttempts] * prev[kPassAttempts] +
                   truth.weights[kFeatAvgStart + kPassCompletions] * avg[kPassCompletions] +
                   truth.weights[kFeatDefAvgStart + 0] * davg[0];
          target += noise * uniform_real(rng, -1.0, 1.0);
        }

        l.stats[kPassAttempts] = static_cast<double>(uniform_int(rng, 12, 42));
        l.stats[kPassCompletions] =
            std::floor(l.stats[kPassAttempts] * uniform_real(rng, 0.45, 0.75));
        l.stats[kPassTds] = static_cast<double>(uniform_int(rng, 0, 4));
        l.stats[kInterceptions] = static_cast<double>(uniform_int(rng, 0, 3));
        l.stats[kRushAttempts] = static_cast<double>(uniform_int(rng, 0, 8));
        l.stats[kRushYards] = static_cast<double>(uniform_int(rng, -2, 45));
        l.stats[kRushTds] = static_cast<double>(uniform_int(rng, 0, 1));
        l.stats[kFumblesTotal] = static_cast<double>(uniform_int(rng, 0, 2));
        l.stats[kFumblesLost] = std::min(l.stats[kFumblesTotal],
                                         static_cast<double>(uniform_int(rng, 0, 1)));
        l.stats[kTwoPtPass] = uniform_int(rng, 0, 19) == 0 ? 1.0 : 0.0;
        l.stats[kTwoPtRush] = uniform_int(rng, 0, 39) == 0 ? 1.0 : 0.0;

        // pass yards absorb whatever the other categories do not score,
        // so the game's fantasy score equals the target label
        l.stats[kPassYards] = 0.0;
        double other = score_stat_line(l, rules);
        l.stats[kPassYards] = 25.0 * (target - other);

        qb_hist[i].push_back(l.stats);
        qb_lines.push_back(std::move(l));
      }

      for (int t = 0; t < n_teams; ++t) {
        def_hist[t].push_back(week_def[t].values());
        defense_lines.push_back(std::move(week_def[t]));
      }
    }
  }

  SyntheticData data;
  data.corpus = make_corpus(std::move(qb_lines), std::move(defense_lines));
  data.truth = std::move(truth);
  return data;
}

inline nlohmann::json synthetic_truth_to_json(const SyntheticTruth& truth) {
  nlohmann::json j;
  j["weights"] = truth.weights;
  j["bias"] = truth.bias;
  j["active_features"] = truth.active_features;
  j["noise"] = truth.noise;
  j["history_season"] = truth.history_season;
  auto games = nlohmann::json::array();
  for (const auto& [player, season, week] : truth.off_model_games)
    games.push_back({{"player_id", player}, {"season", season}, {"week", week}});
  j["off_model_games"] = games;
  return j;
}

}  // namespace ffpred
