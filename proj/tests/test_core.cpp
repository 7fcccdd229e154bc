#include <catch2/catch_amalgamated.hpp>

#include "ffpred/core.hpp"
#include "ffpred/rng.hpp"

using namespace ffpred;

namespace {

StatLine line_with(std::initializer_list<std::pair<QbStat, double>> values) {
  StatLine l;
  l.player_id = "P01";
  l.season = 2012;
  l.week = 1;
  l.age = 28;
  l.experience = 5;
  for (auto [s, v] : values) l.stats[s] = v;
  return l;
}

StatLine random_line(std::mt19937_64& rng) {
  StatLine l;
  l.stats[kPassAttempts] = static_cast<double>(uniform_int(rng, 5, 45));
  l.stats[kPassCompletions] = std::floor(l.stats[kPassAttempts] * uniform_real(rng, 0.3, 0.9));
  l.stats[kPassYards] = uniform_real(rng, -10, 450);
  l.stats[kPassTds] = static_cast<double>(uniform_int(rng, 0, 5));
  l.stats[kInterceptions] = static_cast<double>(uniform_int(rng, 0, 4));
  l.stats[kRushAttempts] = static_cast<double>(uniform_int(rng, 0, 10));
  l.stats[kRushYards] = uniform_real(rng, -5, 80);
  l.stats[kRushTds] = static_cast<double>(uniform_int(rng, 0, 2));
  l.stats[kFumblesTotal] = static_cast<double>(uniform_int(rng, 0, 3));
  l.stats[kFumblesLost] = std::min(l.stats[kFumblesTotal], 1.0);
  l.stats[kTwoPtPass] = static_cast<double>(uniform_int(rng, 0, 1));
  l.stats[kTwoPtRush] = static_cast<double>(uniform_int(rng, 0, 1));
  return l;
}

}  // namespace

TEST_CASE("standard scoring covers the worked examples") {
  auto rules = ScoringRules::standard();

  SECTION("all-zero line scores zero") {
    CHECK(score_stat_line(StatLine{}, rules) == 0.0);
  }

  SECTION("300 pass yds, 2 pass TD, 1 INT, 20 rush yds") {
    auto l = line_with({{kPassYards, 300}, {kPassTds, 2}, {kInterceptions, 1}, {kRushYards, 20}});
    CHECK(score_stat_line(l, rules) == Catch::Approx(20.0).margin(1e-12));
  }

  SECTION("a lone lost fumble costs two points") {
    auto l = line_with({{kFumblesLost, 1}, {kFumblesTotal, 1}});
    CHECK(score_stat_line(l, rules) == Catch::Approx(-2.0).margin(1e-12));
  }
}

TEST_CASE("scoring a nonzero category without a rule is a configuration error") {
  ScoringRules partial;
  partial.set(kPassYards, 1.0, 25.0);
  auto l = line_with({{kPassYards, 100}, {kPassTds, 1}});
  CHECK_THROWS_WITH(score_stat_line(l, partial),
                    Catch::Matchers::ContainsSubstring("pass_tds"));
  auto ok = line_with({{kPassYards, 100}});
  CHECK(score_stat_line(ok, partial) == 4.0);
}

TEST_CASE("scoring is linear and additive per category") {
  auto rules = ScoringRules::standard();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    StatLine a = random_line(rng);
    StatLine b = random_line(rng);
    double scale = uniform_real(rng, 0.0, 3.0);

    StatLine scaled = a;
    for (int s = 0; s < kQbStatCount; ++s) scaled.stats[s] *= scale;
    CHECK(score_stat_line(scaled, rules) ==
          Catch::Approx(scale * score_stat_line(a, rules)).margin(1e-9));

    StatLine sum = a;
    for (int s = 0; s < kQbStatCount; ++s) sum.stats[s] += b.stats[s];
    CHECK(score_stat_line(sum, rules) ==
          Catch::Approx(score_stat_line(a, rules) + score_stat_line(b, rules)).margin(1e-9));
  }
}

TEST_CASE("scoring rules JSON round-trip") {
  auto rules = ScoringRules::standard();
  auto restored = scoring_rules_from_json(scoring_rules_to_json(rules));
  auto l = line_with({{kPassYards, 275}, {kRushTds, 1}, {kTwoPtPass, 1}});
  CHECK(score_stat_line(l, restored) == score_stat_line(l, rules));
}

TEST_CASE("stat line validation names the violated field") {
  StatLine l = line_with({{kPassAttempts, 3}, {kPassCompletions, 5}});
  CHECK_THROWS_WITH(validate_stat_line(l),
                    Catch::Matchers::ContainsSubstring("pass_completions"));
  StatLine neg = line_with({{kInterceptions, -1}});
  CHECK_THROWS_WITH(validate_stat_line(neg),
                    Catch::Matchers::ContainsSubstring("interceptions"));
  StatLine young = line_with({});
  young.age = 3;
  young.experience = 5;
  CHECK_THROWS_WITH(validate_stat_line(young), Catch::Matchers::ContainsSubstring("age"));
}

TEST_CASE("rank_top_players basic ordering") {
  SECTION("largest total wins") {
    std::vector<SeasonScore> scores{{"A", 2014, 100}, {"B", 2014, 200}};
    CHECK(rank_top_players(scores, 2014, 1) == std::vector<std::string>{"B"});
  }

  SECTION("ties break by ascending player id") {
    std::vector<SeasonScore> scores{{"B", 2014, 50}, {"A", 2014, 50}, {"C", 2014, 10}};
    CHECK(rank_top_players(scores, 2014, 2) == std::vector<std::string>{"A", "B"});
  }

  SECTION("totals aggregate per player and ignore other seasons") {
    std::vector<SeasonScore> scores{
        {"A", 2014, 30}, {"A", 2014, 30}, {"B", 2014, 50}, {"B", 2013, 1000}};
    CHECK(rank_top_players(scores, 2014, 2) == std::vector<std::string>{"A", "B"});
  }

  SECTION("shortfall is an error naming the counts") {
    std::vector<SeasonScore> scores{{"A", 2014, 1}};
    CHECK_THROWS_WITH(rank_top_players(scores, 2014, 3),
                      Catch::Matchers::ContainsSubstring("3"));
  }
}

TEST_CASE("rank_top_players matches a sort oracle on 30 synthetic players") {
  std::mt19937_64 rng(7);
  std::vector<SeasonScore> scores;
  std::vector<std::pair<double, std::string>> oracle;
  for (int i = 0; i < 30; ++i) {
    std::string id = "P" + std::to_string(100 + i);
    double total = 0;
    for (int g = 0; g < 16; ++g) {
      double pts = uniform_real(rng, 0, 35);
      scores.push_back({id, 2014, pts});
      total += pts;
    }
    oracle.push_back({total, id});
  }
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  auto top = rank_top_players(scores, 2014, 24);
  REQUIRE(top.size() == 24);
  for (int i = 0; i < 24; ++i) CHECK(top[i] == oracle[i].second);
}

TEST_CASE("rank_top_players is permutation invariant") {
  std::mt19937_64 rng(13);
  std::vector<SeasonScore> scores;
  for (int i = 0; i < 12; ++i)
    for (int g = 0; g < 4; ++g)
      scores.push_back({"Q" + std::to_string(i), 2014, uniform_real(rng, 0, 30)});
  auto baseline = rank_top_players(scores, 2014, 5);
  for (int trial = 0; trial < 5; ++trial) {
    shuffle_in_place(scores, rng);
    CHECK(rank_top_players(scores, 2014, 5) == baseline);
  }
}

TEST_CASE("feature layout is the canonical 34 slots") {
  const auto& names = feature_names();
  REQUIRE(names.size() == kFeatureCount);
  CHECK(names[kFeatAge] == "age");
  CHECK(names[kFeatExperience] == "experience");
  CHECK(names[kFeatPrevStart] == "prev_pass_attempts");
  CHECK(names[kFeatAvgStart] == "avg10_pass_attempts");
  CHECK(names[kFeatDefPrevStart] == "def_prev_points_allowed");
  CHECK(names[kFeatDefAvgStart + 3] == "def_avg10_turnovers_forced");
}
