#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "egame/game.hpp"

using namespace egame;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(EGAME_GOLDEN_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

GameState fresh(std::size_t n, const char* ring) {
  return new_game(GameConfig{n, RingSpec::parse(ring), "M", "L"});
}

Move type_i(const std::string& q) { return Move{MoveKind::kTypeI, {q}}; }
Move type_ii(const std::string& w) { return Move{MoveKind::kTypeIIInner, {w}}; }

bool contains_pattern(const PatternSubgroup& big, const PatternSubgroup& small) {
  return pattern_contains(big, small);
}

}  // namespace

struct StrategyCase {
  std::size_t n;
  const char* ring;
};

class Strategy : public ::testing::TestWithParam<StrategyCase> {};

TEST_P(Strategy, WinsInTwoMovesWithDisplayedTables) {
  const auto [n, ring] = GetParam();
  StrategyRun run = run_standard_strategy(n, RingSpec::parse(ring));
  ASSERT_TRUE(is_won(run.state));
  ASSERT_EQ(run.state.stage(), 2u);
  const auto s1 = run.state.stage_patterns(1);
  const auto s2 = run.state.stage_patterns(2);
  EXPECT_EQ(render_stage_table(1, s1.first, s1.second), golden("stage1_n" + std::to_string(n) + ".txt"));
  EXPECT_EQ(render_stage_table(2, s2.first, s2.second), golden("stage2_n" + std::to_string(n) + ".txt"));
  for (const auto& rec : run.state.history()) {
    ASSERT_EQ(rec.checks.size(), 2u);
    for (const auto& c : rec.checks) EXPECT_TRUE(c.certified) << c.claim;
  }
  EXPECT_EQ(run.state.history()[1].checks[0].claim, "w H2^(1) w^-1 >= M");
  EXPECT_EQ(run.state.history()[1].checks[1].claim, "w H1^(1) w^-1 >= L");
}

INSTANTIATE_TEST_SUITE_P(SizesAndRings, Strategy,
                         ::testing::Values(StrategyCase{3, "free:2"}, StrategyCase{4, "free:2"},
                                           StrategyCase{5, "free:2"}, StrategyCase{6, "free:2"},
                                           StrategyCase{3, "comm:2"}, StrategyCase{4, "comm:2"},
                                           StrategyCase{5, "comm:2"}, StrategyCase{6, "comm:2"},
                                           StrategyCase{3, "Z"}, StrategyCase{4, "Z"}, StrategyCase{5, "Z"},
                                           StrategyCase{6, "Z"}, StrategyCase{3, "Z/4"}, StrategyCase{4, "Z/4"},
                                           StrategyCase{5, "Z/4"}, StrategyCase{6, "Z/4"}));

TEST(Game, NewGameStartsAtMAndL) {
  GameState s = fresh(4, "Z");
  EXPECT_EQ(s.stage(), 0u);
  EXPECT_EQ(s.h1(), builtin_pattern("M", 4));
  EXPECT_EQ(s.h2(), builtin_pattern("L", 4));
  EXPECT_FALSE(is_won(s));
  EXPECT_THROW(new_game(GameConfig{3, RingSpec::parse("Z"), "M", "Q"}), Error);
}

TEST(Game, TypeIIAtStageZeroIsRejected) {
  GameState s = fresh(3, "free:2");
  try {
    apply_move(s, type_ii("w"));
    FAIL();
  } catch (const MoveRejected& e) {
    EXPECT_EQ(e.code(), Errc::kMoveRejected);
    EXPECT_EQ(e.reason(), "w L w^-1 >= M not certified");
    ASSERT_EQ(e.failures().size(), 2u);
    EXPECT_EQ(e.failures()[1], "w M w^-1 >= L not certified");
  }
  // Rejection leaves the input untouched.
  EXPECT_EQ(s, fresh(3, "free:2"));
}

TEST(Game, PayloadValidation) {
  GameState s = fresh(3, "Z");
  EXPECT_THROW(apply_move(s, type_i("w")), MoveRejected);
  EXPECT_THROW(apply_move(s, type_i("builtin:nope@3")), MoveRejected);
  EXPECT_THROW(apply_move(s, Move{MoveKind::kLimit, {"Q"}}), MoveRejected);
  try {
    apply_move(s, Move{MoveKind::kTypeIIOuter, {"w"}});
    FAIL();
  } catch (const MoveRejected& e) {
    EXPECT_NE(e.reason().find("outer automorphisms"), std::string::npos);
  }
}

TEST(Game, LimitStageKeepsSubgroups) {
  GameState s = apply_move(fresh(4, "Z"), type_i("Q"));
  GameState t = apply_move(s, Move{MoveKind::kLimit, {}});
  EXPECT_EQ(t.stage(), 2u);
  EXPECT_EQ(t.h1(), s.h1());
  EXPECT_EQ(t.h2(), s.h2());
  EXPECT_TRUE(is_won(apply_move(t, type_ii("w"))));
}

TEST(Game, MoveKindNames) {
  for (MoveKind k : {MoveKind::kTypeI, MoveKind::kTypeIIInner, MoveKind::kLimit, MoveKind::kTypeIIOuter}) {
    EXPECT_EQ(parse_move_kind(move_kind_name(k)), k);
  }
  EXPECT_EQ(parse_move_kind("II"), MoveKind::kTypeIIInner);
  EXPECT_THROW(parse_move_kind("III"), Error);
}

TEST(Game, ResolveConjugatorForms) {
  const RingSpec z = RingSpec::parse("Z");
  EXPECT_EQ(resolve_conjugator("Q", 4, z).literal, "builtin:Q@4");
  EXPECT_EQ(resolve_conjugator("w", 4, z).label, "w");
  EXPECT_EQ(resolve_conjugator("perm:3,-2,1", 3, z).literal.rfind("perm:", 0), 0u);
  EXPECT_THROW(resolve_conjugator("builtin:w@4", 3, z), Error);
}

TEST(Game, StagesAreMonotone) {
  // Random legal play: every accepted move only grows H1 and H2.
  std::mt19937_64 rng(7);
  const std::vector<Move> menu{type_i("Q"), type_ii("w"), Move{MoveKind::kLimit, {}}, type_ii("perm:3,2,1"),
                               type_i("builtin:G(1,2)@3")};
  for (int game = 0; game < 30; ++game) {
    GameState s = fresh(3, "Z");
    for (int step = 0; step < 6; ++step) {
      try {
        GameState t = apply_move(s, menu[rng() % menu.size()]);
        EXPECT_EQ(t.stage(), s.stage() + 1);
        EXPECT_TRUE(contains_pattern(t.h1(), s.h1()));
        EXPECT_TRUE(contains_pattern(t.h2(), s.h2()));
        s = t;
      } catch (const MoveRejected&) {
      }
    }
  }
}

TEST(Transcript, RoundTripsAndMatchesGolden) {
  StrategyRun run = run_standard_strategy(3, RingSpec::parse("free:2"));
  const std::string text = save_transcript(run.state);
  EXPECT_EQ(text, golden("strategy_n3_free2.transcript"));
  GameState back = load_transcript(text);
  EXPECT_EQ(back, run.state);
  EXPECT_EQ(save_transcript(back), text);
}

TEST(Transcript, DigestsAreStableHex) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  StrategyRun run = run_standard_strategy(4, RingSpec::parse("Z"));
  for (const auto& rec : run.state.history()) EXPECT_EQ(rec.digest.size(), 16u);
}

TEST(Transcript, TamperingIsDetected) {
  const std::string text = save_transcript(run_standard_strategy(3, RingSpec::parse("free:2")).state);
  auto expect_code = [](const std::string& t, Errc code) {
    try {
      load_transcript(t);
      ADD_FAILURE() << "accepted:\n" << t;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  expect_code(replaced("h1 EER/EER/001", "h1 EER/EER/RR1"), Errc::kTranscriptUnsound);
  expect_code(replaced("digest a841e059bd9dcd17", "digest a841e059bd9dcd18"), Errc::kTranscriptUnsound);
  expect_code(replaced("check ok Q M Q^-1 >= M", "check ok Q M Q^-1 >= L"), Errc::kTranscriptUnsound);
  expect_code(replaced("payload builtin:Q@3", "payload builtin:w@3"), Errc::kTranscriptUnsound);
  expect_code(replaced("egame-transcript 1", "egame-transcript 9"), Errc::kTranscriptMalformed);
  expect_code(replaced("move 2 TypeII_inn", "move two TypeII_inn"), Errc::kTranscriptMalformed);
  expect_code(text.substr(0, text.rfind("end")), Errc::kTranscriptMalformed);
}

TEST(Audit, StoredCertificatesSurviveSampling) {
  for (const char* ring : {"free:2", "Z/4"}) {
    StrategyRun run = run_standard_strategy(4, RingSpec::parse(ring));
    AuditReport report = audit_certificates(run.state, 30, 3);
    EXPECT_TRUE(report.ok()) << ring;
    EXPECT_EQ(report.findings.size(), 4u);
    for (const auto& f : report.findings) EXPECT_GT(f.samples, 0u);
  }
}
