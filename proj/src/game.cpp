#include "egame/game.hpp"

#include <charconv>
#include <sstream>

namespace egame {

namespace {

constexpr std::string_view kTranscriptMagic = "egame-transcript 1";

std::string h_label(const GameState& s, int which) {
  if (s.stage() == 0) return which == 1 ? s.config().m_name : s.config().l_name;
  return "H" + std::to_string(which) + "^(" + std::to_string(s.stage()) + ")";
}

std::string claim_text(const std::string& g, const std::string& h, const std::string& target) {
  return g + " " + h + " " + g + "^-1 >= " + target;
}

std::string record_digest(const MoveRecord& r) {
  std::string text = "stage " + std::to_string(r.stage) + "\n";
  text += "kind " + std::string(move_kind_name(r.move.kind)) + "\n";
  for (const auto& p : r.move.payload) text += "payload " + p + "\n";
  for (const auto& c : r.checks) {
    text += "check " + std::string(c.certified ? "ok" : "FAIL") + " " + c.claim + " :: " +
            c.conjugated.compact() + "\n";
  }
  text += "h1 " + r.h1.compact() + "\nh2 " + r.h2.compact() + "\n";
  return hex64(fnv1a64(text));
}

std::optional<std::size_t> to_size(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(Errc::kTranscriptMalformed,
              "malformed transcript (line " + std::to_string(line) + "): " + what);
}

[[noreturn]] void unsound(std::size_t stage, const std::string& what) {
  throw Error(Errc::kTranscriptUnsound, "transcript unsound at move " + std::to_string(stage) + ": " + what);
}

// Concrete representative of a conjugator: g and g^-1 as matrices.
std::pair<MatR, MatR> concrete_conjugator(const Conjugator& g, std::size_t n, const RingSpec& ring,
                                          std::mt19937_64& rng) {
  if (const auto* perm = std::get_if<SignedPermutation>(&g)) {
    return {perm->to_matrix(ring), perm->inverse().to_matrix(ring)};
  }
  if (const auto* word = std::get_if<ElemWord>(&g)) {
    return {word->eval(n, ring), word->inverse().eval(n, ring)};
  }
  const auto& schema = std::get<BlockElement>(g).schema;
  ElemWord gamma = sample_word(schema, ring, rng, 2, 4);
  return {gamma.eval(n, ring), gamma.inverse().eval(n, ring)};
}

}  // namespace

std::string_view move_kind_name(MoveKind kind) {
  switch (kind) {
    case MoveKind::kTypeI: return "TypeI";
    case MoveKind::kTypeIIInner: return "TypeII_inn";
    case MoveKind::kLimit: return "Limit";
    case MoveKind::kTypeIIOuter: return "TypeII_12";
  }
  return "?";
}

MoveKind parse_move_kind(std::string_view text) {
  if (text == "TypeI" || text == "I") return MoveKind::kTypeI;
  if (text == "TypeII_inn" || text == "II" || text == "TypeII") return MoveKind::kTypeIIInner;
  if (text == "Limit" || text == "limit") return MoveKind::kLimit;
  if (text == "TypeII_12") return MoveKind::kTypeIIOuter;
  throw Error(Errc::kParse, "unknown move kind '" + std::string(text) + "'");
}

ResolvedConjugator resolve_conjugator(std::string_view literal, std::size_t n, const RingSpec& ring) {
  auto colon = literal.find(':');
  if (colon == std::string_view::npos) {
    return resolve_conjugator("builtin:" + std::string(literal) + "@" + std::to_string(n), n, ring);
  }
  std::string_view kind = literal.substr(0, colon);
  std::string_view body = literal.substr(colon + 1);
  auto require_size = [&](std::size_t got) {
    if (got != n) {
      throw Error(Errc::kDimensionMismatch, "conjugator '" + std::string(literal) + "' has size " +
                                                std::to_string(got) + ", game has n=" + std::to_string(n));
    }
  };
  if (kind == "builtin") {
    auto at = body.rfind('@');
    auto size = at == std::string_view::npos ? std::nullopt : to_size(body.substr(at + 1));
    if (!size) throw Error(Errc::kParse, "built-in reference needs '@n': '" + std::string(literal) + "'");
    require_size(*size);
    std::string name(body.substr(0, at));
    std::string normalized = "builtin:" + name + "@" + std::to_string(n);
    if (name == "w") return {normalized, "w", end_swap_word(n, ring)};
    return {normalized, name, BlockElement{builtin_pattern(name, n)}};
  }
  if (kind == "pattern") {
    auto p = PatternSubgroup::parse(body);
    require_size(p.n());
    std::string compact = p.compact();
    return {"pattern:" + compact, "[" + compact + "]", BlockElement{p.named("[" + compact + "]")}};
  }
  if (kind == "word") {
    auto w = ElemWord::parse(ring, body);
    for (const auto& f : w.factors()) {
      if (f.i > n || f.j > n) throw Error(Errc::kInvalidIndex, "word index exceeds n in '" + std::string(literal) + "'");
    }
    std::string text = w.to_string();
    return {"word:" + text, "[" + text + "]", w};
  }
  if (kind == "perm") {
    auto p = SignedPermutation::parse(body);
    require_size(p.n());
    std::string text = p.to_string();
    return {"perm:" + text, "perm[" + text + "]", p};
  }
  throw Error(Errc::kParse, "unknown conjugator kind in '" + std::string(literal) + "'");
}

GameState::GameState(GameConfig config, PatternSubgroup m, PatternSubgroup l)
    : config_(std::move(config)), m_(m), l_(l), h1_(std::move(m)), h2_(std::move(l)) {}

std::pair<PatternSubgroup, PatternSubgroup> GameState::stage_patterns(std::size_t stage) const {
  if (stage > stage_) throw Error(Errc::kInvalidArgument, "stage " + std::to_string(stage) + " not reached");
  if (stage == 0) return {m_, l_};
  const auto& r = history_[stage - 1];
  return {r.h1, r.h2};
}

MoveRejected::MoveRejected(std::vector<std::string> failures)
    : Error(Errc::kMoveRejected, "move rejected: " + failures.front()), failures_(std::move(failures)) {}

GameState new_game(const GameConfig& config) {
  if (config.n < 3) throw Error(Errc::kInvalidArgument, "the game needs n >= 3");
  PatternSubgroup m = builtin_pattern(config.m_name, config.n);
  PatternSubgroup l = builtin_pattern(config.l_name, config.n);
  if (!closure_to_full(pattern_join(m, l)).is_full()) {
    throw Error(Errc::kCertificateFailed, config.m_name + "," + config.l_name + " do not generate G");
  }
  return GameState(config, std::move(m), std::move(l));
}

GameState apply_move(const GameState& s, const Move& m) {
  const GameConfig& cfg = s.config();
  std::vector<std::string> failures;
  MoveRecord rec{s.stage() + 1, Move{m.kind, {}}, {}, s.h1(), s.h2(), {}};

  const std::string h1_name = h_label(s, 1);
  const std::string h2_name = h_label(s, 2);

  auto check = [&](const ResolvedConjugator& g, const PatternSubgroup& source, const std::string& source_name,
                   const PatternSubgroup& target, const std::string& target_name) {
    ContainmentClaim c{claim_text(g.label, source_name, target_name), g.literal, source, source, target, false};
    try {
      c.conjugated = pattern_conjugate(source, g.value);
      c.certified = pattern_contains(c.conjugated, target);
    } catch (const Error& e) {
      if (e.code() != Errc::kUnsupportedConjugator) throw;
      failures.push_back(e.what());
      return false;
    }
    if (!c.certified) failures.push_back(c.claim + " not certified");
    rec.checks.push_back(std::move(c));
    return true;
  };

  std::vector<ResolvedConjugator> resolved;
  for (const auto& literal : m.payload) {
    try {
      resolved.push_back(resolve_conjugator(literal, cfg.n, cfg.ring));
      rec.move.payload.push_back(resolved.back().literal);
    } catch (const Error& e) {
      failures.push_back("bad payload '" + literal + "': " + e.what());
    }
  }
  if (!failures.empty()) throw MoveRejected(std::move(failures));

  switch (m.kind) {
    case MoveKind::kLimit:
      // Stages only grow, so the union over earlier stages is the current one.
      if (!resolved.empty()) throw MoveRejected({"a limit stage carries no payload"});
      break;
    case MoveKind::kTypeIIOuter:
      throw MoveRejected({"moves through outer automorphisms are not supported"});
    case MoveKind::kTypeI: {
      PatternSubgroup h1 = s.h1();
      PatternSubgroup h2 = s.h2();
      for (const auto& g : resolved) {
        const auto* block = std::get_if<BlockElement>(&g.value);
        if (block == nullptr) {
          failures.push_back("type I payload must be a block schema, got " + g.literal);
          continue;
        }
        check(g, s.h1(), h1_name, s.m(), cfg.m_name);
        check(g, s.h2(), h2_name, s.l(), cfg.l_name);
        h1 = pattern_join(h1, block->schema);
        h2 = pattern_join(h2, block->schema);
      }
      rec.h1 = h1;
      rec.h2 = h2;
      break;
    }
    case MoveKind::kTypeIIInner: {
      PatternSubgroup h1 = s.h1();
      PatternSubgroup h2 = s.h2();
      for (const auto& g : resolved) {
        bool ok_m = check(g, s.h2(), h2_name, s.m(), cfg.m_name);
        bool ok_l = check(g, s.h1(), h1_name, s.l(), cfg.l_name);
        if (!ok_m || !ok_l) continue;
        h1 = pattern_join(h1, pattern_conjugate_inverse(s.h2(), g.value));
        h2 = pattern_join(h2, pattern_conjugate_inverse(s.h1(), g.value));
      }
      rec.h1 = h1;
      rec.h2 = h2;
      break;
    }
  }
  if (!failures.empty()) throw MoveRejected(std::move(failures));

  rec.h1 = rec.h1.named("H1^(" + std::to_string(rec.stage) + ")");
  rec.h2 = rec.h2.named("H2^(" + std::to_string(rec.stage) + ")");
  rec.digest = record_digest(rec);

  GameState next = s;
  next.stage_ = rec.stage;
  next.h1_ = rec.h1;
  next.h2_ = rec.h2;
  next.history_.push_back(std::move(rec));
  return next;
}

bool is_won(const GameState& s) {
  return closure_to_full(s.h1()).is_full() || closure_to_full(s.h2()).is_full();
}

std::string render_stage_table(std::size_t stage, const PatternSubgroup& h1, const PatternSubgroup& h2) {
  const std::string k = std::to_string(stage);
  std::string out = "stage " + k + "\nH1^(" + k + ") | H2^(" + k + ")\n";
  std::istringstream left(h1.to_string());
  std::istringstream right(h2.to_string());
  std::string a;
  std::string b;
  while (std::getline(left, a) && std::getline(right, b)) out += a + " | " + b + "\n";
  return out;
}

StrategyRun run_standard_strategy(std::size_t n, const RingSpec& ring) {
  GameState s = new_game(GameConfig{n, ring, "M", "L"});
  std::string tables = render_stage_table(0, s.h1(), s.h2());
  try {
    s = apply_move(s, Move{MoveKind::kTypeI, {"builtin:Q@" + std::to_string(n)}});
    tables += render_stage_table(1, s.h1(), s.h2());
    s = apply_move(s, Move{MoveKind::kTypeIIInner, {"builtin:w@" + std::to_string(n)}});
    tables += render_stage_table(2, s.h1(), s.h2());
  } catch (const MoveRejected& e) {
    throw Error(Errc::kCertificateFailed, std::string("strategy self-test failed: ") + e.what());
  }
  if (!is_won(s) || s.stage() != 2) {
    throw Error(Errc::kCertificateFailed, "strategy self-test failed: not won after two moves");
  }
  return {std::move(s), std::move(tables)};
}

std::string save_transcript(const GameState& s) {
  const GameConfig& cfg = s.config();
  std::string out(kTranscriptMagic);
  out += "\nn " + std::to_string(cfg.n) + "\nring " + cfg.ring.to_string() + "\nM " + cfg.m_name +
         "\nL " + cfg.l_name + "\n";
  for (const auto& r : s.history()) {
    out += "move " + std::to_string(r.stage) + " " + std::string(move_kind_name(r.move.kind)) + "\n";
    for (const auto& p : r.move.payload) out += "payload " + p + "\n";
    for (const auto& c : r.checks) out += "check " + std::string(c.certified ? "ok" : "FAIL") + " " + c.claim + "\n";
    out += "h1 " + r.h1.compact() + "\nh2 " + r.h2.compact() + "\ndigest " + r.digest + "\nend\n";
  }
  return out;
}

GameState load_transcript(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  std::size_t at = 0;
  auto next_line = [&]() -> const std::string& {
    if (at >= lines.size()) malformed(at + 1, "unexpected end of file");
    return lines[at++];
  };
  auto field = [&](std::string_view key) {
    const std::string& line = next_line();
    if (line.size() <= key.size() + 1 || line.compare(0, key.size(), key) != 0 || line[key.size()] != ' ') {
      malformed(at, "expected '" + std::string(key) + " ...'");
    }
    return line.substr(key.size() + 1);
  };

  if (next_line() != kTranscriptMagic) malformed(1, "missing header '" + std::string(kTranscriptMagic) + "'");
  GameConfig cfg;
  auto n = to_size(field("n"));
  if (!n) malformed(at, "bad n");
  cfg.n = *n;
  try {
    cfg.ring = RingSpec::parse(field("ring"));
  } catch (const Error& e) {
    malformed(at, e.what());
  }
  cfg.m_name = field("M");
  cfg.l_name = field("L");

  GameState state = new_game(cfg);
  while (at < lines.size()) {
    if (lines[at].empty()) {
      ++at;
      continue;
    }
    std::string header = field("move");
    auto space = header.find(' ');
    if (space == std::string::npos) malformed(at, "move header needs stage and kind");
    auto stage = to_size(std::string_view(header).substr(0, space));
    if (!stage) malformed(at, "bad stage number");
    Move move;
    try {
      move.kind = parse_move_kind(std::string_view(header).substr(space + 1));
    } catch (const Error& e) {
      malformed(at, e.what());
    }
    std::vector<std::pair<bool, std::string>> checks;
    std::string h1;
    std::string h2;
    std::string digest;
    for (;;) {
      const std::string& line = next_line();
      if (line == "end") break;
      auto sp = line.find(' ');
      if (sp == std::string::npos) malformed(at, "unexpected line '" + line + "'");
      std::string key = line.substr(0, sp);
      std::string value = line.substr(sp + 1);
      if (key == "payload") {
        move.payload.push_back(value);
      } else if (key == "check") {
        auto vs = value.find(' ');
        if (vs == std::string::npos) malformed(at, "bad check line");
        std::string status = value.substr(0, vs);
        if (status != "ok" && status != "FAIL") malformed(at, "bad check status '" + status + "'");
        checks.emplace_back(status == "ok", value.substr(vs + 1));
      } else if (key == "h1") {
        h1 = value;
      } else if (key == "h2") {
        h2 = value;
      } else if (key == "digest") {
        digest = value;
      } else {
        malformed(at, "unknown key '" + key + "'");
      }
    }

    if (*stage != state.stage() + 1) unsound(*stage, "stage numbers out of sequence");
    try {
      state = apply_move(state, move);
    } catch (const MoveRejected& e) {
      unsound(*stage, std::string("move does not verify: ") + e.reason());
    } catch (const Error& e) {
      unsound(*stage, e.what());
    }
    const MoveRecord& r = state.history().back();
    if (r.checks.size() != checks.size()) unsound(*stage, "certificate count differs");
    for (std::size_t k = 0; k < checks.size(); ++k) {
      if (checks[k].first != r.checks[k].certified || checks[k].second != r.checks[k].claim) {
        unsound(*stage, "certificate mismatch: recorded '" + checks[k].second + "', recomputed '" +
                            r.checks[k].claim + "'");
      }
    }
    if (h1 != r.h1.compact()) unsound(*stage, "H1 differs from replay: " + h1 + " vs " + r.h1.compact());
    if (h2 != r.h2.compact()) unsound(*stage, "H2 differs from replay: " + h2 + " vs " + r.h2.compact());
    if (digest != r.digest) unsound(*stage, "digest mismatch");
  }
  return state;
}

bool AuditReport::ok() const {
  for (const auto& f : findings) {
    if (f.failures != 0) return false;
  }
  return true;
}

AuditReport audit_certificates(const GameState& s, std::size_t samples_per_claim, std::uint64_t seed) {
  const GameConfig& cfg = s.config();
  AuditReport report;
  std::mt19937_64 rng(seed);
  for (const auto& r : s.history()) {
    for (const auto& c : r.checks) {
      AuditFinding finding{r.stage, c.claim, samples_per_claim, 0};
      const Conjugator g = resolve_conjugator(c.conjugator, cfg.n, cfg.ring).value;
      for (std::size_t k = 0; k < samples_per_claim; ++k) {
        auto [gm, ginv] = concrete_conjugator(g, cfg.n, cfg.ring, rng);
        MatR x = sample_word(c.target, cfg.ring, rng, 2, 4).eval(cfg.n, cfg.ring);
        bool ok = c.source.matches(ginv * x * gm);
        MatR h = sample_word(c.source, cfg.ring, rng, 2, 4).eval(cfg.n, cfg.ring);
        ok = ok && c.conjugated.matches(gm * h * ginv);
        if (!ok) ++finding.failures;
      }
      report.findings.push_back(std::move(finding));
    }
  }
  return report;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace egame
