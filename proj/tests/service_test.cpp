#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "egame/service.hpp"

using namespace egame;
using nlohmann::json;

namespace {

json body(const Response& r) { return json::parse(r.body); }

std::string create(Service& s, const json& req) {
  Response r = s.handle("POST", "/v1/games", req.dump());
  EXPECT_EQ(r.status, 201) << r.body;
  return body(r).at("id").get<std::string>();
}

Response move(Service& s, const std::string& id, const json& req) {
  return s.handle("POST", "/v1/games/" + id + "/moves", req.dump());
}

std::vector<std::vector<std::string>> grid(const char* name, std::size_t n) { return builtin_pattern(name, n).grid(); }

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("egame_service_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Service, CreateAndFetch) {
  Service s;
  const std::string id = create(s, {{"n", 4}, {"ring", "free:2"}});
  EXPECT_EQ(id, "g1");
  Response r = s.handle("GET", "/v1/games/" + id, "");
  ASSERT_EQ(r.status, 200);
  json j = body(r);
  EXPECT_EQ(j["n"], 4);
  EXPECT_EQ(j["ring"], "free:2");
  EXPECT_EQ(j["stage"], 0);
  EXPECT_EQ(j["H1"], grid("M", 4));
  EXPECT_EQ(j["H2"], grid("L", 4));
  EXPECT_FALSE(j["won"].get<bool>());
  EXPECT_EQ(create(s, json::object()), "g2");
  EXPECT_EQ(s.game_count(), 2u);
}

TEST(Service, StrategyWinsOverTheApi) {
  Service s;
  const std::string id = create(s, {{"n", 3}, {"ring", "Z"}});
  Response r1 = move(s, id, {{"kind", "TypeI"}, {"payload", {"Q"}}, {"expected_stage", 0}});
  ASSERT_EQ(r1.status, 200) << r1.body;
  EXPECT_EQ(body(r1)["H1"], grid("H1_1", 3));
  Response r2 = move(s, id, {{"kind", "TypeII_inn"}, {"payload", {"builtin:w@3"}}});
  ASSERT_EQ(r2.status, 200) << r2.body;
  json j = body(r2);
  EXPECT_TRUE(j["won"].get<bool>());
  EXPECT_EQ(j["history"].size(), 2u);
  EXPECT_EQ(j["history"][1]["checks"][0]["claim"], "w H2^(1) w^-1 >= M");
  EXPECT_EQ(j["history"][1]["checks"][0]["conjugated"], grid("wH2w_inv", 3));
  Response t = s.handle("GET", "/v1/games/" + id + "/transcript", "");
  EXPECT_EQ(t.status, 200);
  EXPECT_EQ(t.content_type.rfind("text/plain", 0), 0u);
  EXPECT_TRUE(is_won(load_transcript(t.body)));
}

TEST(Service, RejectedMoveIs422WithReason) {
  Service s;
  const std::string id = create(s, {{"n", 3}});
  Response r = move(s, id, {{"kind", "TypeII_inn"}, {"payload", {"w"}}});
  ASSERT_EQ(r.status, 422);
  json j = body(r);
  EXPECT_EQ(j["error"], "move_rejected");
  EXPECT_EQ(j["reason"], "w L w^-1 >= M not certified");
  EXPECT_EQ(j["failures"].size(), 2u);
  EXPECT_EQ(body(s.handle("GET", "/v1/games/" + id, ""))["stage"], 0);
  EXPECT_EQ(move(s, id, {{"kind", "TypeII_12"}, {"payload", {"w"}}}).status, 422);
}

TEST(Service, ErrorStatuses) {
  Service s;
  EXPECT_EQ(s.handle("GET", "/v1/games/g9", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/v2/games", "").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/v1/games/g1", "").status, 404);
  EXPECT_EQ(s.handle("POST", "/v1/games", "{not json").status, 400);
  EXPECT_EQ(s.handle("POST", "/v1/games", R"({"ring": "Q"})").status, 400);
  const std::string id = create(s, json::object());
  EXPECT_EQ(move(s, id, {{"payload", {"Q"}}}).status, 400);
  EXPECT_EQ(move(s, id, {{"kind", "Sideways"}}).status, 400);
  Response stale = move(s, id, {{"kind", "TypeI"}, {"payload", {"Q"}}, {"expected_stage", 3}});
  EXPECT_EQ(stale.status, 409);
  EXPECT_EQ(body(stale)["error"], "conflict");
  EXPECT_EQ(s.handle("GET", "/v1/builtins?n=2", "").status, 400);
  EXPECT_EQ(s.handle("GET", "/v1/builtins?n=x", "").status, 400);
}

TEST(Service, ConcurrentMovesApplyOnce) {
  Service s;
  const std::string id = create(s, {{"n", 5}, {"ring", "free:2"}});
  std::atomic<int> ok{0};
  std::atomic<int> conflict{0};
  std::atomic<int> other{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      Response r = move(s, id, {{"kind", "TypeI"}, {"payload", {"Q"}}, {"expected_stage", 0}});
      (r.status == 200 ? ok : r.status == 409 ? conflict : other)++;
      s.handle("GET", "/v1/games/" + id, "");
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 7);
  EXPECT_EQ(other.load(), 0);
  EXPECT_EQ(body(s.handle("GET", "/v1/games/" + id, ""))["stage"], 1);
}

TEST(Service, VerifyConjugationDoesNotMutate) {
  Service s;
  Response lit = s.handle("POST", "/v1/verify/conjugation",
                          json{{"n", 4}, {"pattern", "H2_1"}, {"conjugator", "w"}}.dump());
  ASSERT_EQ(lit.status, 200) << lit.body;
  json j = body(lit);
  EXPECT_EQ(j["conjugated"], grid("wH2w_inv", 4));
  EXPECT_TRUE(j["contains_M"].get<bool>());
  EXPECT_FALSE(j["contains_L"].get<bool>());
  EXPECT_EQ(j["expression"], "w H2_1 w^-1");

  const std::string id = create(s, {{"n", 3}});
  ASSERT_EQ(move(s, id, {{"kind", "TypeI"}, {"payload", {"Q"}}}).status, 200);
  const std::string before = s.handle("GET", "/v1/games/" + id, "").body;
  Response g = s.handle("POST", "/v1/verify/conjugation",
                        json{{"game", id}, {"which", "H1"}, {"conjugator", "w"}}.dump());
  ASSERT_EQ(g.status, 200);
  EXPECT_EQ(body(g)["conjugated"], grid("wH1w_inv", 3));
  EXPECT_TRUE(body(g)["contains_L"].get<bool>());
  Response at0 = s.handle("POST", "/v1/verify/conjugation",
                          json{{"game", id}, {"which", "H2"}, {"stage", 0}, {"conjugator", "w"}}.dump());
  EXPECT_FALSE(body(at0)["contains_M"].get<bool>());
  EXPECT_EQ(s.handle("GET", "/v1/games/" + id, "").body, before);

  Response bad = s.handle("POST", "/v1/verify/conjugation",
                          json{{"n", 3}, {"pattern", "M"}, {"conjugator", "word:E(3,1;1)"}}.dump());
  EXPECT_EQ(bad.status, 422);
  EXPECT_EQ(body(bad)["error"], "unsupported_conjugator");
}

TEST(Service, Builtins) {
  Service s;
  Response r = s.handle("GET", "/v1/builtins?n=5", "");
  ASSERT_EQ(r.status, 200);
  json j = body(r);
  EXPECT_EQ(j["n"], 5);
  EXPECT_EQ(j["alphabet"].size(), 5u);
  EXPECT_EQ(j["patterns"]["M"], grid("M", 5));
  EXPECT_EQ(j["conjugators"][0]["literal"], "builtin:w@5");
  EXPECT_EQ(j["move_kinds"].size(), 3u);
}

TEST(Service, StateDirectoryIsReplayed) {
  auto dir = temp_dir("replay");
  std::string id;
  {
    Service s(dir);
    id = create(s, {{"n", 4}, {"ring", "comm:2"}});
    ASSERT_EQ(move(s, id, {{"kind", "TypeI"}, {"payload", {"Q"}}}).status, 200);
  }
  {
    std::ofstream junk(dir / "g7.transcript");
    junk << "not a transcript\n";
  }
  Service again(dir);
  EXPECT_EQ(again.game_count(), 1u);
  ASSERT_EQ(again.load_errors().size(), 1u);
  json j = body(again.handle("GET", "/v1/games/" + id, ""));
  EXPECT_EQ(j["stage"], 1);
  EXPECT_EQ(j["ring"], "comm:2");
  // New ids continue after the replayed ones.
  EXPECT_EQ(create(again, json::object()), "g2");
  std::filesystem::remove_all(dir);
}

TEST(Http, RoundTrip) {
  Service s;
  HttpFrontend front(s);
  const int port = front.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread server([&] { front.run(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto created = client.Post("/v1/games", json{{"n", 3}}.dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body)["id"];
  auto moved = client.Post("/v1/games/" + id + "/moves", json{{"kind", "TypeI"}, {"payload", {"Q"}}}.dump(),
                           "application/json");
  ASSERT_TRUE(moved);
  EXPECT_EQ(moved->status, 200);
  auto rejected = client.Post("/v1/games/" + id + "/moves", json{{"kind", "Limit"}, {"payload", {"Q"}}}.dump(),
                              "application/json");
  ASSERT_TRUE(rejected);
  EXPECT_EQ(rejected->status, 422);
  auto b = client.Get("/v1/builtins?n=4");
  ASSERT_TRUE(b);
  EXPECT_EQ(json::parse(b->body)["n"], 4);
  auto missing = client.Get("/v1/games/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  front.stop();
  server.join();
}
