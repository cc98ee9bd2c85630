#pragma once

// The inner-conjugation upgrading game on (G, M, L) with G = E(n,R).
//
// A state holds the two upgraded subgroups H1, H2 as patterns. Moves are
// validated through pattern certificates and every applied move keeps its
// certificate, so a transcript can be replayed and re-verified from scratch.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "egame/error.hpp"
#include "egame/pattern.hpp"

namespace egame {

struct GameConfig {
  std::size_t n = 3;
  RingSpec ring;
  std::string m_name = "M";  // built-in pattern names
  std::string l_name = "L";

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

enum class MoveKind {
  kTypeI,
  kTypeIIInner,
  kLimit,
  // Reserved for moves twisted by outer automorphisms; always rejected.
  kTypeIIOuter,
};

std::string_view move_kind_name(MoveKind kind);
// Accepts the canonical names plus the short forms "I", "II", "limit".
MoveKind parse_move_kind(std::string_view text);

struct Move {
  MoveKind kind = MoveKind::kTypeI;
  // Conjugator literals: "builtin:Q@n", "builtin:w@n", "pattern:<grid>",
  // "word:<elementary word>", "perm:<signed permutation>". Bare built-in
  // names ("Q", "w") are accepted and normalized.
  std::vector<std::string> payload;

  friend bool operator==(const Move&, const Move&) = default;
};

struct ResolvedConjugator {
  std::string literal;  // normalized form
  std::string label;    // short name used in certificate claims
  Conjugator value;
};

ResolvedConjugator resolve_conjugator(std::string_view literal, std::size_t n, const RingSpec& ring);

// One checked containment g H g^-1 >= target.
struct ContainmentClaim {
  std::string claim;
  std::string conjugator;  // normalized literal
  PatternSubgroup source;
  PatternSubgroup conjugated;
  PatternSubgroup target;
  bool certified = false;

  friend bool operator==(const ContainmentClaim&, const ContainmentClaim&) = default;
};

struct MoveRecord {
  std::size_t stage = 0;  // stage reached by this move
  Move move;
  std::vector<ContainmentClaim> checks;
  PatternSubgroup h1;
  PatternSubgroup h2;
  std::string digest;

  friend bool operator==(const MoveRecord&, const MoveRecord&) = default;
};

class GameState {
 public:
  GameState(GameConfig config, PatternSubgroup m, PatternSubgroup l);

  const GameConfig& config() const { return config_; }
  std::size_t stage() const { return stage_; }
  const PatternSubgroup& m() const { return m_; }
  const PatternSubgroup& l() const { return l_; }
  const PatternSubgroup& h1() const { return h1_; }
  const PatternSubgroup& h2() const { return h2_; }
  const std::vector<MoveRecord>& history() const { return history_; }

  // (H1, H2) at the given stage, 0 <= stage <= stage().
  std::pair<PatternSubgroup, PatternSubgroup> stage_patterns(std::size_t stage) const;

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  friend GameState apply_move(const GameState& s, const Move& m);

  GameConfig config_;
  PatternSubgroup m_;
  PatternSubgroup l_;
  std::size_t stage_ = 0;
  PatternSubgroup h1_;
  PatternSubgroup h2_;
  std::vector<MoveRecord> history_;
};

class MoveRejected : public Error {
 public:
  explicit MoveRejected(std::vector<std::string> failures);
  // First failing containment (or the reason the payload was refused).
  const std::string& reason() const { return failures_.front(); }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

// Stage 0 with H1 = M, H2 = L; throws Errc::kCertificateFailed if the closure
// of <M, L> is not all of G.
GameState new_game(const GameConfig& config);
// Returns the next state or throws MoveRejected.
GameState apply_move(const GameState& s, const Move& m);
bool is_won(const GameState& s);

struct StrategyRun {
  GameState state;
  std::string tables;  // stage tables 0, 1, 2
};

// Type I with Q = E(n-1,R) (+) 1, then type II with W = {w}; throws
// Errc::kCertificateFailed if any step fails to certify or the game is not won.
StrategyRun run_standard_strategy(std::size_t n, const RingSpec& ring);

// "stage k" header, "H1^(k) | H2^(k)" and the two grids side by side.
std::string render_stage_table(std::size_t stage, const PatternSubgroup& h1, const PatternSubgroup& h2);

std::string save_transcript(const GameState& s);
// Parses and replays; throws Errc::kTranscriptMalformed on syntax errors and
// Errc::kTranscriptUnsound when re-verification disagrees with the file.
GameState load_transcript(std::string_view text);

struct AuditFinding {
  std::size_t stage = 0;
  std::string claim;
  std::size_t samples = 0;
  std::size_t failures = 0;
};

struct AuditReport {
  std::vector<AuditFinding> findings;
  bool ok() const;
};

// Concrete spot check of every stored certificate: x sampled from the target
// must satisfy g^-1 x g in H, and g h g^-1 must match the conjugated pattern.
AuditReport audit_certificates(const GameState& s, std::size_t samples_per_claim, std::uint64_t seed);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace egame
