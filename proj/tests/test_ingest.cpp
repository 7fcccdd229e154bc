#include <catch2/catch_amalgamated.hpp>

#include "ffpred/features.hpp"
#include "ffpred/ingest.hpp"

using namespace ffpred;

namespace {

const char* kTwoRowQb =
    "player_id,player_name,season,week,team,opponent,age,experience,"
    "pass_attempts,pass_completions,pass_yards,pass_tds,interceptions,"
    "rush_attempts,rush_yards,rush_tds,fumbles_lost,fumbles_total,"
    "two_pt_pass,two_pt_rush\n"
    "P01,Alan Able,2012,3,T01,T02,27.5,4,34,22,287,2,1,3,12,0,0,1,0,0\n"
    "P02,Bob Baker,2012,3,T02,T01,31,8,28,17,193.5,1,0,5,-3,1,1,1,1,0\n";

const char* kDefenseHeader =
    "team,season,week,points_allowed,pass_yards_allowed,rush_yards_allowed,turnovers_forced\n";

GameLogCorpus tiny_corpus() {
  auto qb = parse_qb_csv_table(csv::read_string(kTwoRowQb, "qb"));
  auto def = parse_defense_csv_table(csv::read_string(
      std::string(kDefenseHeader) + "T01,2012,3,24,250,100,2\nT02,2012,3,17,310,80,1\n", "def"));
  return make_corpus(std::move(qb), std::move(def));
}

}  // namespace

TEST_CASE("header-only file parses to an empty corpus") {
  auto qb = parse_qb_csv_table(csv::read_string(serialize_qb_csv({}), "qb"));
  auto def = parse_defense_csv_table(csv::read_string(kDefenseHeader, "def"));
  auto corpus = make_corpus(std::move(qb), std::move(def));
  CHECK(corpus.qb_lines.empty());
  CHECK(corpus.defense_lines.empty());
  CHECK(corpus.seasons_present.empty());
}

TEST_CASE("two-row fixture parses with field-exact values") {
  auto lines = parse_qb_csv_table(csv::read_string(kTwoRowQb, "qb"));
  REQUIRE(lines.size() == 2);

  const auto& a = lines[0];
  CHECK(a.player_id == "P01");
  CHECK(a.player_name == "Alan Able");
  CHECK(a.season == 2012);
  CHECK(a.week == 3);
  CHECK(a.team == "T01");
  CHECK(a.opponent == "T02");
  CHECK(a.age == 27.5);
  CHECK(a.experience == 4.0);
  CHECK(a.stats[kPassAttempts] == 34.0);
  CHECK(a.stats[kPassCompletions] == 22.0);
  CHECK(a.stats[kPassYards] == 287.0);
  CHECK(a.stats[kPassTds] == 2.0);
  CHECK(a.stats[kInterceptions] == 1.0);
  CHECK(a.stats[kRushAttempts] == 3.0);
  CHECK(a.stats[kRushYards] == 12.0);
  CHECK(a.stats[kRushTds] == 0.0);
  CHECK(a.stats[kFumblesLost] == 0.0);
  CHECK(a.stats[kFumblesTotal] == 1.0);
  CHECK(a.stats[kTwoPtPass] == 0.0);
  CHECK(a.stats[kTwoPtRush] == 0.0);

  const auto& b = lines[1];
  CHECK(b.player_name == "Bob Baker");
  CHECK(b.stats[kPassYards] == 193.5);
  CHECK(b.stats[kRushYards] == -3.0);
  CHECK(b.stats[kTwoPtPass] == 1.0);
}

TEST_CASE("invariant-violating rows fail with file, line and reason") {
  std::string bad = kTwoRowQb;
  // completions exceed attempts on line 4
  bad += "P03,Carl Crash,2012,3,T01,T02,25,2,10,15,100,0,0,0,0,0,0,0,0,0\n";
  CHECK_THROWS_WITH(parse_qb_csv_table(csv::read_string(bad, "qb.csv")),
                    Catch::Matchers::ContainsSubstring("qb.csv:4") &&
                        Catch::Matchers::ContainsSubstring("pass_completions"));
}

TEST_CASE("malformed cells fail with line and column") {
  std::string bad = kTwoRowQb;
  bad += "P03,Carl,2012,xx,T01,T02,25,2,10,5,100,0,0,0,0,0,0,0,0,0\n";
  CHECK_THROWS_WITH(parse_qb_csv_table(csv::read_string(bad, "qb.csv")),
                    Catch::Matchers::ContainsSubstring("week"));
}

TEST_CASE("wrong column count names the line") {
  std::string bad = std::string(kDefenseHeader) + "T01,2012,3,24,250,100\n";
  CHECK_THROWS_WITH(csv::read_string(bad, "def.csv"),
                    Catch::Matchers::ContainsSubstring("def.csv:2"));
}

TEST_CASE("duplicate keys are rejected by name") {
  auto lines = parse_qb_csv_table(csv::read_string(kTwoRowQb, "qb"));
  lines.push_back(lines[0]);
  CHECK_THROWS_WITH(make_corpus(std::move(lines), {}),
                    Catch::Matchers::ContainsSubstring("P01"));

  auto def = parse_defense_csv_table(csv::read_string(
      std::string(kDefenseHeader) + "T01,2012,3,24,250,100,2\nT01,2012,3,10,200,90,0\n", "def"));
  CHECK_THROWS_WITH(make_corpus({}, std::move(def)),
                    Catch::Matchers::ContainsSubstring("T01"));
}

TEST_CASE("header mismatch is rejected") {
  CHECK_THROWS_WITH(parse_qb_csv_table(csv::read_string("a,b,c\n1,2,3\n", "qb.csv")),
                    Catch::Matchers::ContainsSubstring("schema"));
}

TEST_CASE("corpus flags cases without an opposing defense line") {
  auto qb = parse_qb_csv_table(csv::read_string(kTwoRowQb, "qb"));
  auto def = parse_defense_csv_table(
      csv::read_string(std::string(kDefenseHeader) + "T02,2012,3,17,310,80,1\n", "def"));
  auto corpus = make_corpus(std::move(qb), std::move(def));
  CHECK(corpus.incomplete_case_count == 1);  // P02's opponent T01 has no line
  CHECK(corpus.has_opponent_defense(corpus.qb_lines[0]));
  CHECK_FALSE(corpus.has_opponent_defense(corpus.qb_lines[1]));
}

TEST_CASE("parse of serialize is the identity") {
  auto data = generate_synthetic(21, 6, 3, 1.5);
  auto qb_text = serialize_qb_csv(data.corpus.qb_lines);
  auto def_text = serialize_defense_csv(data.corpus.defense_lines);
  auto qb = parse_qb_csv_table(csv::read_string(qb_text, "qb"));
  auto def = parse_defense_csv_table(csv::read_string(def_text, "def"));
  CHECK(qb == data.corpus.qb_lines);
  CHECK(def == data.corpus.defense_lines);
}

TEST_CASE("filter keeps exactly the games at or above the threshold") {
  auto base = tiny_corpus();
  std::vector<StatLine> lines;
  for (double attempts : {4.0, 5.0, 6.0}) {
    StatLine l = base.qb_lines[0];
    l.week = static_cast<int>(attempts);
    l.stats[kPassAttempts] = attempts;
    l.stats[kPassCompletions] = 0;
    lines.push_back(l);
  }
  auto corpus = make_corpus(lines, {});

  auto kept = filter_qb_cases(corpus, 5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].stats[kPassAttempts] == 5.0);
  CHECK(kept[1].stats[kPassAttempts] == 6.0);

  CHECK(filter_qb_cases(corpus, 0).size() == corpus.qb_lines.size());
  CHECK(corpus.qb_lines.size() == 3);  // input untouched
}

TEST_CASE("filter count matches a direct scan on 100 synthetic lines") {
  std::mt19937_64 rng(5);
  std::vector<StatLine> lines;
  for (int i = 0; i < 100; ++i) {
    StatLine l;
    l.player_id = "P" + std::to_string(i);
    l.season = 2012;
    l.week = 1 + i % 17;
    l.team = "T01";
    l.opponent = "T02";
    l.age = 30;
    l.stats[kPassAttempts] = static_cast<double>(uniform_int(rng, 0, 40));
    lines.push_back(l);
  }
  auto corpus = make_corpus(lines, {});
  std::size_t expected = 0;
  for (const auto& l : lines)
    if (l.stats[kPassAttempts] >= 5) ++expected;
  CHECK(filter_qb_cases(corpus, 5).size() == expected);
}

TEST_CASE("filter is idempotent and monotone in the threshold") {
  auto data = generate_synthetic(3, 8, 2, 1.0);
  auto once = filter_qb_cases(data.corpus, 20);
  auto twice = filter_qb_cases(make_corpus(once, data.corpus.defense_lines), 20);
  CHECK(once == twice);

  auto lower = filter_qb_cases(data.corpus, 10);
  auto higher = filter_qb_cases(data.corpus, 30);
  CHECK(higher.size() <= lower.size());
  for (const auto& l : higher)
    CHECK(std::find(lower.begin(), lower.end(), l) != lower.end());
}

TEST_CASE("synthetic corpora are byte-identical for a fixed seed") {
  auto a = generate_synthetic(7, 5, 3, 2.0);
  auto b = generate_synthetic(7, 5, 3, 2.0);
  CHECK(serialize_qb_csv(a.corpus.qb_lines) == serialize_qb_csv(b.corpus.qb_lines));
  CHECK(serialize_defense_csv(a.corpus.defense_lines) ==
        serialize_defense_csv(b.corpus.defense_lines));
  CHECK(a.truth.weights == b.truth.weights);

  auto c = generate_synthetic(8, 5, 3, 2.0);
  CHECK(serialize_qb_csv(a.corpus.qb_lines) != serialize_qb_csv(c.corpus.qb_lines));
}

TEST_CASE("synthetic case counts match direct enumeration") {
  const int players = 30, seasons = 3;
  auto data = generate_synthetic(7, players, seasons, 1.0);
  SyntheticOptions defaults;
  std::size_t games = static_cast<std::size_t>(players) * seasons * defaults.weeks_per_season;
  CHECK(data.corpus.qb_lines.size() == games);
  // every generated game passes the 5-attempt filter by construction
  CHECK(filter_qb_cases(data.corpus, 5).size() == games);
  std::size_t enumerated = 0;
  for (const auto& [player, idx] : data.corpus.games_by_player) enumerated += idx.size();
  CHECK(enumerated == games);
}

TEST_CASE("synthetic labels follow the planted linear model") {
  // noise = 0: every on-model case label equals the hidden linear function
  // of its built features
  auto data = generate_synthetic(19, 6, 3, 0.0);
  auto cases = filter_qb_cases(data.corpus, 5);
  BuildOptions options;
  options.rookie_baseline = StatLine{};  // only debut games would need it
  options.defense_baseline = DefenseStatLine{};
  auto built = build_feature_cases(data.corpus, cases, ScoringRules::standard(), options);
  REQUIRE(built.cases.size() == cases.size());

  std::size_t checked = 0;
  for (const auto& c : built.cases) {
    if (!data.truth.on_model(c.player_id, c.season, c.week)) continue;
    double expected = data.truth.bias;
    for (int d = 0; d < kFeatureCount; ++d) expected += data.truth.weights[d] * c.features[d];
    CHECK(c.label == Catch::Approx(expected).margin(1e-9));
    ++checked;
  }
  // everything except the first week of the first season is on-model
  CHECK(checked == built.cases.size() - 6);
}

TEST_CASE("synthetic noise bounds the deviation from the planted model") {
  const double noise = 2.5;
  auto data = generate_synthetic(4, 5, 3, noise);
  BuildOptions options;
  options.rookie_baseline = StatLine{};
  options.defense_baseline = DefenseStatLine{};
  auto built = build_feature_cases(data.corpus, filter_qb_cases(data.corpus, 5),
                                   ScoringRules::standard(), options);
  for (const auto& c : built.cases) {
    if (!data.truth.on_model(c.player_id, c.season, c.week)) continue;
    double expected = data.truth.bias;
    for (int d = 0; d < kFeatureCount; ++d) expected += data.truth.weights[d] * c.features[d];
    CHECK(std::abs(c.label - expected) <= noise + 1e-9);
  }
}

TEST_CASE("staggered debuts place rookies inside later seasons") {
  auto data = generate_synthetic(9, 9, 3, 1.0, {.stagger_debuts = true});
  bool found_late_debut = false;
  for (const auto& [player, idx] : data.corpus.games_by_player) {
    int debut = data.corpus.qb_lines[idx.front()].season;
    if (debut > data.truth.history_season) found_late_debut = true;
  }
  CHECK(found_late_debut);
  // debut games are marked off-model
  for (const auto& [player, idx] : data.corpus.games_by_player) {
    const auto& first = data.corpus.qb_lines[idx.front()];
    CHECK_FALSE(data.truth.on_model(first.player_id, first.season, first.week));
  }
}

TEST_CASE("synthetic generator arguments are validated") {
  CHECK_THROWS(generate_synthetic(1, 0, 3, 0.0));
  CHECK_THROWS(generate_synthetic(1, 5, 1, 0.0));
  CHECK_THROWS(generate_synthetic(1, 5, 3, -0.5));
}
