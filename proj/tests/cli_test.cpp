#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args, const std::string& input = {}) {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  Outcome r;
  r.code = egame::cli::run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

std::filesystem::path temp_path(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("egame_cli_" + tag);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  Outcome bad = run({"run-strategy", "--n", "three"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(has(bad.err, "--n"));
  EXPECT_EQ(run({"transcript", "validate", "/nonexistent/file"}).code, 2);
  EXPECT_EQ(run({"transcript", "check", EGAME_GOLDEN_DIR "/strategy_n3_free2.transcript"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"play", "--help"}).code, 0);
}

TEST(Cli, VerifyIdentities) {
  Outcome r = run({"verify-identities", "--n", "4", "--trials", "50", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "50/50 PASS"));
  EXPECT_TRUE(has(r.out, "w-factorization n=4: PASS"));
  EXPECT_TRUE(has(r.out, "w^2 = 1: PASS"));
}

TEST(Cli, RunStrategyWritesSoundTranscript) {
  auto file = temp_path("strategy.transcript");
  Outcome r = run({"run-strategy", "--n", "3", "--ring", "free:2", "--transcript", file.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "won at stage 2 (H1 = G)"));
  EXPECT_TRUE(has(r.out, "w H2^(1) w^-1 >= M: certified"));
  Outcome v = run({"transcript", "validate", file.string()});
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_TRUE(has(v.out, "transcript sound: 2 moves, stage 2, won"));
  Outcome replay = run({"transcript", "replay", file.string()});
  EXPECT_EQ(replay.code, 0);
  EXPECT_TRUE(has(replay.out, "re-verified"));

  std::string text;
  {
    std::ifstream in(file);
    std::stringstream s;
    s << in.rdbuf();
    text = s.str();
  }
  text.replace(text.find("h1 EER/EER/001"), 14, "h1 EER/EER/RR1");
  {
    std::ofstream out(file, std::ios::trunc);
    out << text;
  }
  Outcome bad = run({"transcript", "validate", file.string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(has(bad.err, "unsound at move 1"));
  std::filesystem::remove(file);
}

TEST(Cli, PlayRepl) {
  Outcome r = run({"play", "--n", "3"}, "move II w\nwhatif w H2\nmove I Q\nwhatif w H2\nmove II w\nbogus\nquit\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "rejected: w L w^-1 >= M not certified"));
  EXPECT_TRUE(has(r.out, "also: w M w^-1 >= L not certified"));
  EXPECT_TRUE(has(r.out, "Q M Q^-1 >= M: certified"));
  EXPECT_TRUE(has(r.out, ">= M: yes"));
  EXPECT_TRUE(has(r.out, "won: H1 = G"));
  EXPECT_TRUE(has(r.out, "unknown command 'bogus'"));
}

TEST(Cli, PlaySaveAndLoad) {
  auto file = temp_path("play.transcript");
  Outcome r = run({"play", "--n", "4", "--ring", "Z/4"},
              "strategy\nsave " + file.string() + "\nnew 3\nload " + file.string() + "\nshow\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "saved "));
  EXPECT_EQ(run({"transcript", "validate", file.string()}).code, 0);
  std::filesystem::remove(file);
}

TEST(Cli, LabCommandsOnBundle) {
  auto dir = temp_path("bundle");
  Outcome build = run({"lab", "build-action", "--out", dir.string(), "--seed", "4", "--json"});
  ASSERT_EQ(build.code, 0) << build.err;
  json b = json::parse(build.out);
  EXPECT_EQ(b["order"], 168);
  EXPECT_TRUE(b["valid"].get<bool>());

  Outcome realizer = run({"lab", "realizer", "--bundle", dir.string(), "--json"});
  ASSERT_EQ(realizer.code, 0) << realizer.err;
  EXPECT_TRUE(json::parse(realizer.out)["pass"].get<bool>());

  Outcome trace = run({"lab", "trace", "--bundle", dir.string()});
  EXPECT_EQ(trace.code, 0) << trace.out << trace.err;

  Outcome angle = run({"lab", "angle", "--bundle", dir.string(), "--a", "M", "--b", "L", "--json"});
  ASSERT_EQ(angle.code, 0) << angle.err;
  const double c = json::parse(angle.out)["cos_angle"].get<double>();
  EXPECT_GE(c, 0.0);
  EXPECT_LE(c, 1.0);

  EXPECT_EQ(run({"lab", "chebyshev", "--bundle", dir.string()}).code, 0);
  EXPECT_EQ(run({"lab", "split", "--bundle", dir.string()}).code, 0);
  EXPECT_EQ(run({"lab", "trace", "--bundle", (dir / "missing").string()}).code, 2);
  std::filesystem::remove_all(dir);
}

TEST(Cli, LabRealizerFailsWithInvariantVectors) {
  auto dir = temp_path("bundle_trivial");
  ASSERT_EQ(run({"lab", "build-action", "--out", dir.string(), "--rep", "perm+trivial"}).code, 0);
  Outcome r = run({"lab", "realizer", "--bundle", dir.string(), "--json"});
  EXPECT_EQ(r.code, 1);
  json j = json::parse(r.out);
  EXPECT_FALSE(j["hypothesis_ok"].get<bool>());
  std::filesystem::remove_all(dir);
}
