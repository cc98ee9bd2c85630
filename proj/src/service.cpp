#include "egame/service.hpp"

#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace egame {

namespace {

using nlohmann::json;

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error_response(int status, std::string_view code, const std::string& reason) {
  return json_response(status, json{{"error", code}, {"reason", reason}});
}

json grid_json(const PatternSubgroup& p) { return p.grid(); }

json state_json(const std::string& id, const GameState& s) {
  json history = json::array();
  for (const auto& r : s.history()) {
    json checks = json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"claim", c.claim},
                        {"certified", c.certified},
                        {"conjugator", c.conjugator},
                        {"conjugated", grid_json(c.conjugated)}});
    }
    history.push_back({{"stage", r.stage},
                       {"kind", move_kind_name(r.move.kind)},
                       {"payload", r.move.payload},
                       {"checks", checks},
                       {"H1", grid_json(r.h1)},
                       {"H2", grid_json(r.h2)},
                       {"digest", r.digest}});
  }
  return {{"id", id},
          {"n", s.config().n},
          {"ring", s.config().ring.to_string()},
          {"stage", s.stage()},
          {"M", grid_json(s.m())},
          {"L", grid_json(s.l())},
          {"H1", grid_json(s.h1())},
          {"H2", grid_json(s.h2())},
          {"won", is_won(s)},
          {"history", history}};
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t at = 0;
  while (at < path.size()) {
    auto next = path.find('/', at);
    if (next == std::string_view::npos) next = path.size();
    if (next > at) parts.emplace_back(path.substr(at, next - at));
    at = next + 1;
  }
  return parts;
}

std::optional<std::string> query_value(std::string_view query, std::string_view key) {
  std::size_t at = 0;
  while (at <= query.size()) {
    auto amp = query.find('&', at);
    if (amp == std::string_view::npos) amp = query.size();
    std::string_view item = query.substr(at, amp - at);
    auto eq = item.find('=');
    if (eq != std::string_view::npos && item.substr(0, eq) == key) return std::string(item.substr(eq + 1));
    at = amp + 1;
  }
  return std::nullopt;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  json j = json::parse(body);  // throws json::parse_error
  if (!j.is_object()) throw Error(Errc::kParse, "request body must be a JSON object");
  return j;
}

int status_for(Errc code) {
  switch (code) {
    case Errc::kMoveRejected:
    case Errc::kUnsupportedConjugator:
    case Errc::kCertificateFailed:
      return 422;
    default:
      return 400;
  }
}

}  // namespace

Service::Service(std::optional<std::filesystem::path> state_dir) : state_dir_(std::move(state_dir)) {
  if (!state_dir_) return;
  std::error_code ec;
  std::filesystem::create_directories(*state_dir_, ec);
  if (ec) throw Error(Errc::kIo, "cannot create state directory " + state_dir_->string() + ": " + ec.message());
  std::uint64_t max_id = 0;
  for (const auto& entry : std::filesystem::directory_iterator(*state_dir_)) {
    if (entry.path().extension() != ".transcript") continue;
    const std::string id = entry.path().stem().string();
    try {
      std::ifstream in(entry.path());
      std::stringstream text;
      text << in.rdbuf();
      auto game = std::make_shared<Game>();
      game->snapshot = std::make_shared<const GameState>(load_transcript(text.str()));
      games_.emplace(id, std::move(game));
      if (id.size() > 1 && id[0] == 'g') max_id = std::max<std::uint64_t>(max_id, std::stoull(id.substr(1)));
    } catch (const std::exception& e) {
      load_errors_.push_back(entry.path().filename().string() + ": " + e.what());
    }
  }
  next_id_ = max_id + 1;
}

std::size_t Service::game_count() const {
  std::shared_lock lock(registry_);
  return games_.size();
}

std::shared_ptr<Service::Game> Service::find(const std::string& id) const {
  std::shared_lock lock(registry_);
  auto it = games_.find(id);
  return it == games_.end() ? nullptr : it->second;
}

std::shared_ptr<const GameState> Service::snapshot(const Game& g) const { return std::atomic_load(&g.snapshot); }

void Service::persist(const std::string& id, const GameState& s) const {
  if (!state_dir_) return;
  const auto path = *state_dir_ / (id + ".transcript");
  const auto tmp = *state_dir_ / (id + ".transcript.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << save_transcript(s);
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Response Service::handle(std::string_view method, std::string_view target, std::string_view body) {
  auto qpos = target.find('?');
  std::string_view path = target.substr(0, qpos);
  std::string_view query = qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1);
  auto parts = split_path(path);
  if (parts.empty() || parts[0] != "v1") return error_response(404, "not_found", "unknown route");
  try {
    if (parts.size() == 2 && parts[1] == "games" && method == "POST") return create_game(body);
    if (parts.size() == 3 && parts[1] == "games" && method == "GET") return get_game(parts[2]);
    if (parts.size() == 4 && parts[1] == "games" && parts[3] == "moves" && method == "POST") {
      return post_move(parts[2], body);
    }
    if (parts.size() == 4 && parts[1] == "games" && parts[3] == "transcript" && method == "GET") {
      return get_transcript(parts[2]);
    }
    if (parts.size() == 3 && parts[1] == "verify" && parts[2] == "conjugation" && method == "POST") {
      return verify_conjugation(body);
    }
    if (parts.size() == 2 && parts[1] == "builtins" && method == "GET") return builtins(query);
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const Error& e) {
    return error_response(status_for(e.code()), errc_name(e.code()), e.what());
  }
  return error_response(404, "not_found", "unknown route");
}

Response Service::create_game(std::string_view body) {
  json req = parse_body(body);
  GameConfig cfg;
  cfg.n = req.value("n", std::size_t{3});
  cfg.ring = RingSpec::parse(req.value("ring", std::string("Z")));
  cfg.m_name = req.value("M", std::string("M"));
  cfg.l_name = req.value("L", std::string("L"));
  auto game = std::make_shared<Game>();
  game->snapshot = std::make_shared<const GameState>(new_game(cfg));
  const std::string id = "g" + std::to_string(next_id_++);
  persist(id, *game->snapshot);
  {
    std::unique_lock lock(registry_);
    games_.emplace(id, game);
  }
  return json_response(201, state_json(id, *game->snapshot));
}

Response Service::get_game(const std::string& id) {
  auto game = find(id);
  if (!game) return error_response(404, "not_found", "unknown game '" + id + "'");
  return json_response(200, state_json(id, *snapshot(*game)));
}

Response Service::post_move(const std::string& id, std::string_view body) {
  auto game = find(id);
  if (!game) return error_response(404, "not_found", "unknown game '" + id + "'");
  json req = parse_body(body);
  Move move;
  move.kind = parse_move_kind(req.at("kind").get<std::string>());
  if (req.contains("payload")) move.payload = req.at("payload").get<std::vector<std::string>>();

  std::unique_lock lock(game->write, std::try_to_lock);
  if (!lock.owns_lock()) return error_response(409, "conflict", "another move on this game is in progress");
  auto current = snapshot(*game);
  if (req.contains("expected_stage") && req.at("expected_stage").get<std::size_t>() != current->stage()) {
    return error_response(409, "conflict",
                          "game is at stage " + std::to_string(current->stage()) + ", not the expected stage");
  }
  try {
    auto next = std::make_shared<const GameState>(apply_move(*current, move));
    persist(id, *next);
    std::atomic_store(&game->snapshot, next);
    return json_response(200, state_json(id, *next));
  } catch (const MoveRejected& e) {
    return json_response(422, json{{"error", "move_rejected"}, {"reason", e.reason()}, {"failures", e.failures()}});
  }
}

Response Service::get_transcript(const std::string& id) {
  auto game = find(id);
  if (!game) return error_response(404, "not_found", "unknown game '" + id + "'");
  return {200, save_transcript(*snapshot(*game)), "text/plain; charset=utf-8"};
}

Response Service::verify_conjugation(std::string_view body) {
  json req = parse_body(body);
  GameConfig cfg;
  PatternSubgroup source = builtin_pattern("trivial", 3);
  std::string source_name;
  if (req.contains("game")) {
    const std::string id = req.at("game").get<std::string>();
    auto game = find(id);
    if (!game) return error_response(404, "not_found", "unknown game '" + id + "'");
    auto s = snapshot(*game);
    cfg = s->config();
    const std::string which = req.value("which", std::string("H1"));
    const std::size_t stage = req.value("stage", s->stage());
    auto [h1, h2] = s->stage_patterns(stage);
    if (which == "H1") {
      source = h1;
    } else if (which == "H2") {
      source = h2;
    } else {
      return error_response(400, "bad_request", "'which' must be H1 or H2");
    }
    source_name = which + "^(" + std::to_string(stage) + ")";
  } else {
    cfg.n = req.at("n").get<std::size_t>();
    cfg.ring = RingSpec::parse(req.value("ring", std::string("Z")));
    std::string ref = req.at("pattern").get<std::string>();
    const auto names = builtin_pattern_names();
    const bool named = std::find(names.begin(), names.end(), ref) != names.end();
    source = named ? builtin_pattern(ref, cfg.n) : parse_pattern_ref(ref);
    if (source.n() != cfg.n) return error_response(400, "dimension_mismatch", "pattern size differs from n");
    source_name = ref;
  }
  auto g = resolve_conjugator(req.at("conjugator").get<std::string>(), cfg.n, cfg.ring);
  const bool inverse = req.value("inverse", false);
  PatternSubgroup out = inverse ? pattern_conjugate_inverse(source, g.value) : pattern_conjugate(source, g.value);
  PatternSubgroup m = builtin_pattern(cfg.m_name, cfg.n);
  PatternSubgroup l = builtin_pattern(cfg.l_name, cfg.n);
  const std::string expr = inverse ? g.label + "^-1 " + source_name + " " + g.label
                                   : g.label + " " + source_name + " " + g.label + "^-1";
  return json_response(200, json{{"conjugator", g.literal},
                                 {"expression", expr},
                                 {"source", grid_json(source)},
                                 {"conjugated", grid_json(out)},
                                 {"contains_M", pattern_contains(out, m)},
                                 {"contains_L", pattern_contains(out, l)}});
}

Response Service::builtins(std::string_view query) {
  std::size_t n = 3;
  if (auto v = query_value(query, "n")) {
    try {
      n = std::stoul(*v);
    } catch (const std::exception&) {
      return error_response(400, "bad_request", "n must be an integer");
    }
  }
  if (n < 3) return error_response(400, "bad_request", "n must be at least 3");
  json patterns = json::object();
  for (const auto& name : builtin_pattern_names()) patterns[name] = grid_json(builtin_pattern(name, n));
  const RingSpec z;
  json conjugators = json::array();
  conjugators.push_back({{"literal", "builtin:w@" + std::to_string(n)},
                         {"label", "w"},
                         {"word", end_swap_word(n, z).to_string()},
                         {"matrix", end_swap_matrix(n, z).to_string()}});
  conjugators.push_back({{"literal", "builtin:Q@" + std::to_string(n)}, {"label", "Q"}, {"schema", patterns["Q"]}});
  return json_response(200, json{{"n", n},
                                 {"alphabet", {"0", "1", "R", "E", "*"}},
                                 {"patterns", patterns},
                                 {"conjugators", conjugators},
                                 {"move_kinds", {"TypeI", "TypeII_inn", "Limit"}}});
}

HttpFrontend::HttpFrontend(Service& service) : server_(std::make_unique<httplib::Server>()) {
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.path;
    char sep = '?';
    for (const auto& [k, v] : req.params) {
      target += sep + k + "=" + v;
      sep = '&';
    }
    Response r = service.handle(req.method, target, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get(R"(/v1/.*)", route);
  server_->Post(R"(/v1/.*)", route);
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::run() { return server_->listen_after_bind(); }

void HttpFrontend::stop() {
  if (server_) server_->stop();
}

}  // namespace egame
