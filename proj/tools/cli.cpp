#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "egame/game.hpp"
#include "egame/lab.hpp"
#include "egame/service.hpp"

namespace egame::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot read " + path);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

// --- verify-identities -----------------------------------------------------

struct IdentityOpts {
  std::size_t n = 3;
  std::size_t trials = 500;
  std::uint64_t seed = 0;
  std::string ring = "free:2";
  std::size_t degree = 3;
};

int verify_identities(const IdentityOpts& o, std::ostream& out) {
  if (o.n < 3) throw Error(Errc::kInvalidArgument, "--n must be at least 3");
  const RingSpec ring = RingSpec::parse(o.ring);
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<std::size_t> index(1, o.n);
  std::size_t passed = 0;
  for (std::size_t t = 0; t < o.trials; ++t) {
    std::size_t i = index(rng);
    std::size_t j = index(rng);
    std::size_t k = index(rng);
    while (j == i) j = index(rng);
    while (k == i || k == j) k = index(rng);
    NcPoly r1 = random_poly(ring, rng, o.degree, 4);
    NcPoly r2 = random_poly(ring, rng, o.degree, 4);
    if (verify_sharp(o.n, i, j, k, r1, r2)) {
      ++passed;
    } else {
      out << "  counterexample: i=" << i << " j=" << j << " k=" << k << " r1=" << r1.to_string()
          << " r2=" << r2.to_string() << "\n";
    }
  }
  const bool sharp_ok = passed == o.trials;
  out << "commutator identity [e_ij^a, e_jk^b] = e_ik^(ab): " << passed << "/" << o.trials << " "
      << verdict(sharp_ok) << " (n=" << o.n << ", ring " << ring.to_string() << ", degree<=" << o.degree
      << ", seed " << o.seed << ")\n";

  const MatR w = end_swap_word(o.n, ring).eval(o.n, ring);
  const bool w_ok = w == end_swap_matrix(o.n, ring);
  const bool involution = (w * w).is_identity();
  out << "end-swap word w = " << end_swap_word(o.n, ring).to_string() << "\n";
  out << w.to_string() << "\n";
  out << "w-factorization n=" << o.n << ": " << verdict(w_ok) << "\n";
  out << "w^2 = 1: " << verdict(involution) << "\n";
  return sharp_ok && w_ok && involution ? 0 : 1;
}

// --- run-strategy ----------------------------------------------------------

struct StrategyOpts {
  std::size_t n = 3;
  std::string ring = "free:2";
  std::string transcript;
};

int run_strategy(const StrategyOpts& o, std::ostream& out) {
  StrategyRun run = run_standard_strategy(o.n, RingSpec::parse(o.ring));
  for (std::size_t k = 1; k <= run.state.stage(); ++k) {
    auto [h1, h2] = run.state.stage_patterns(k);
    out << render_stage_table(k, h1, h2);
    for (const auto& c : run.state.history()[k - 1].checks) out << "  " << c.claim << ": certified\n";
    out << "\n";
  }
  out << "won at stage " << run.state.stage() << " (H1 = G)\n";
  if (!o.transcript.empty()) {
    write_file(o.transcript, save_transcript(run.state));
    out << "transcript written to " << o.transcript << "\n";
  }
  return 0;
}

// --- transcript --------------------------------------------------------------

int transcript_command(const std::string& mode, const std::string& file, std::ostream& out, std::ostream& err) {
  GameState s = [&] {
    try {
      return load_transcript(read_file(file));
    } catch (const Error& e) {
      err << e.what() << "\n";
      throw;
    }
  }();
  if (mode == "replay") {
    for (std::size_t k = 0; k <= s.stage(); ++k) {
      auto [h1, h2] = s.stage_patterns(k);
      out << render_stage_table(k, h1, h2);
      if (k > 0) {
        const auto& r = s.history()[k - 1];
        out << "  move " << move_kind_name(r.move.kind);
        for (const auto& p : r.move.payload) out << " " << p;
        out << "\n";
        for (const auto& c : r.checks) out << "  " << c.claim << ": re-verified\n";
      }
      out << "\n";
    }
  }
  out << "transcript sound: " << s.history().size() << " moves, stage " << s.stage() << ", "
      << (is_won(s) ? "won" : "not won") << "\n";
  return 0;
}

// --- play ----------------------------------------------------------------------

void show(const GameState& s, std::ostream& out) {
  out << render_stage_table(s.stage(), s.h1(), s.h2());
  if (is_won(s)) out << "won: " << (closure_to_full(s.h1()).is_full() ? "H1" : "H2") << " = G\n";
}

int play(std::size_t n, const std::string& ring_text, std::istream& in, std::ostream& out) {
  GameState s = new_game(GameConfig{n, RingSpec::parse(ring_text)});
  out << "new game n=" << n << " ring " << s.config().ring.to_string() << " (type 'help')\n";
  show(s, out);
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    std::istringstream words(line);
    std::string cmd;
    if (!(words >> cmd)) continue;
    std::vector<std::string> rest;
    for (std::string w; words >> w;) rest.push_back(w);
    try {
      if (cmd == "quit" || cmd == "exit") {
        break;
      } else if (cmd == "help") {
        out << "new [n] [ring] | show | move I|II <conjugator>... | limit | whatif <conjugator> H1|H2\n"
               "save <file> | load <file> | strategy | quit\n"
               "conjugators: Q, w, builtin:NAME@n, pattern:<rows>, word:<E(i,j;r) ...>, perm:<images>\n";
      } else if (cmd == "new") {
        GameConfig cfg = s.config();
        if (!rest.empty()) cfg.n = std::stoul(rest[0]);
        if (rest.size() > 1) cfg.ring = RingSpec::parse(rest[1]);
        s = new_game(cfg);
        show(s, out);
      } else if (cmd == "show") {
        show(s, out);
      } else if (cmd == "move" || cmd == "limit") {
        Move m;
        if (cmd == "limit") {
          m.kind = MoveKind::kLimit;
        } else {
          if (rest.empty()) throw Error(Errc::kParse, "move needs a kind");
          m.kind = parse_move_kind(rest[0]);
          m.payload.assign(rest.begin() + 1, rest.end());
        }
        s = apply_move(s, m);
        for (const auto& c : s.history().back().checks) out << "  " << c.claim << ": certified\n";
        show(s, out);
      } else if (cmd == "whatif") {
        if (rest.size() != 2) throw Error(Errc::kParse, "whatif <conjugator> H1|H2");
        auto g = resolve_conjugator(rest[0], s.config().n, s.config().ring);
        const PatternSubgroup& src = rest[1] == "H2" ? s.h2() : s.h1();
        PatternSubgroup c = pattern_conjugate(src, g.value);
        out << g.label << " " << rest[1] << " " << g.label << "^-1 =\n" << c.to_string();
        out << ">= " << s.config().m_name << ": " << (pattern_contains(c, s.m()) ? "yes" : "not certified") << "\n";
        out << ">= " << s.config().l_name << ": " << (pattern_contains(c, s.l()) ? "yes" : "not certified") << "\n";
      } else if (cmd == "save") {
        if (rest.empty()) throw Error(Errc::kParse, "save <file>");
        write_file(rest[0], save_transcript(s));
        out << "saved " << rest[0] << "\n";
      } else if (cmd == "load") {
        if (rest.empty()) throw Error(Errc::kParse, "load <file>");
        s = load_transcript(read_file(rest[0]));
        show(s, out);
      } else if (cmd == "strategy") {
        s = run_standard_strategy(s.config().n, s.config().ring).state;
        show(s, out);
      } else {
        out << "unknown command '" << cmd << "' (type 'help')\n";
      }
    } catch (const MoveRejected& e) {
      out << "rejected: " << e.reason() << "\n";
      for (std::size_t k = 1; k < e.failures().size(); ++k) out << "  also: " << e.failures()[k] << "\n";
    } catch (const std::exception& e) {
      out << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

// --- lab -------------------------------------------------------------------------

struct LabOpts {
  std::string bundle;
  std::string out_dir;
  std::size_t n = 3;
  std::int64_t modulus = 2;
  std::string rep = "perm";
  std::string a = "M";
  std::string b = "L";
  std::size_t starts = 6;
  std::uint64_t seed = 0;
  bool json = false;
};

PatternSubgroup lab_pattern(const std::string& ref, std::size_t n) {
  const auto names = builtin_pattern_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return builtin_pattern(ref, n);
  PatternSubgroup p = parse_pattern_ref(ref);
  if (p.n() != n) throw Error(Errc::kDimensionMismatch, "pattern '" + ref + "' does not match the model size");
  return p;
}

lab::AffineSubspace lab_fixed(const lab::AffineAction& a, const std::string& ref) {
  return lab::fixed_affine_set(a, lab::pattern_elements(*a.model, lab_pattern(ref, a.model->matrix_n())));
}

void emit(std::ostream& out, bool as_json, const json& j, const std::string& text) {
  if (as_json) {
    out << j.dump(2) << "\n";
  } else {
    out << text;
  }
}

int lab_build(const LabOpts& o, std::ostream& out) {
  auto model = std::make_shared<const lab::FiniteGroupModel>(lab::FiniteGroupModel::elementary(o.n, o.modulus));
  lab::AffineAction a;
  if (o.rep == "perm+trivial") {
    auto perm = lab::build_representation(*model, lab::RepKind::kPermutationMinusInvariants, o.seed);
    auto triv = lab::build_representation(*model, lab::RepKind::kTrivial, o.seed, 1);
    auto pi = lab::direct_sum(*perm, *triv);
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal;
    lab::Vec v(pi->front().rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    auto b = lab::coboundary(*pi, v);
    a = lab::make_action(model, pi, std::move(b), o.seed);
  } else {
    lab::RepKind kind = lab::RepKind::kPermutationMinusInvariants;
    if (o.rep == "random") {
      kind = lab::RepKind::kRandomOrthogonal;
    } else if (o.rep == "trivial") {
      kind = lab::RepKind::kTrivial;
    } else if (o.rep != "perm") {
      throw Error(Errc::kInvalidArgument, "unknown --rep '" + o.rep + "'");
    }
    a = lab::build_action(model, kind, o.seed);
  }
  lab::ValidationReport v = lab::validate_action(a, o.seed);
  lab::save_bundle(a, o.out_dir);
  json j{{"bundle", o.out_dir}, {"order", model->size()}, {"dim", a.dim},
         {"orthogonality", v.orthogonality}, {"homomorphism", v.homomorphism},
         {"cocycle", v.cocycle}, {"pairs", v.pairs}, {"valid", v.ok}};
  std::ostringstream text;
  text << "action bundle " << o.out_dir << ": |G| = " << model->size() << ", d = " << a.dim << "\n"
       << "  orthogonality residual " << v.orthogonality << "\n"
       << "  homomorphism residual  " << v.homomorphism << "\n"
       << "  cocycle residual       " << v.cocycle << " over " << v.pairs << " pairs\n"
       << "validation " << verdict(v.ok) << "\n";
  emit(out, o.json, j, text.str());
  return v.ok ? 0 : 1;
}

int lab_realizer(const LabOpts& o, std::ostream& out) {
  lab::AffineAction a = lab::load_bundle(o.bundle);
  lab::AffineSubspace A = lab_fixed(a, o.a);
  lab::AffineSubspace B = lab_fixed(a, o.b);
  if (A.empty || B.empty) throw Error(Errc::kEmptyInput, "a fixed set is empty");
  lab::ParallelogramReport r = lab::parallelogram_uniqueness_check(a, A, B, o.seed, o.starts);
  json j{{"A", o.a}, {"B", o.b}, {"dim_A", A.dimension()}, {"dim_B", B.dimension()},
         {"distance", r.distance}, {"hypothesis_ok", r.hypothesis_ok}, {"starts", r.starts},
         {"max_deviation", r.max_deviation}, {"midpoint_error", r.midpoint_error},
         {"pass", r.pass}, {"message", r.message}};
  std::ostringstream text;
  text << "fix(" << o.a << ") dim " << A.dimension() << ", fix(" << o.b << ") dim " << B.dimension() << "\n"
       << "  D = " << r.distance << "\n"
       << "  no invariant vectors: " << (r.hypothesis_ok ? "yes" : "no") << "\n"
       << "  starts " << r.starts << ", max deviation " << r.max_deviation << ", midpoint error "
       << r.midpoint_error << "\n";
  if (r.counterexample) text << "  distinct realizer pairs exhibited by translation along the shared direction\n";
  text << "uniqueness " << verdict(r.pass) << ": " << r.message << "\n";
  emit(out, o.json, j, text.str());
  return r.pass ? 0 : 1;
}

int lab_trace(const LabOpts& o, std::ostream& out) {
  lab::AffineAction a = lab::load_bundle(o.bundle);
  lab::TraceReport r = lab::trace_strategy(a);
  json stages = json::array();
  std::ostringstream text;
  text << "stage  disp_H1(xi)    disp_H2(eta)   result\n";
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage}, {"disp_h1_xi", s.disp_h1_xi}, {"disp_h2_eta", s.disp_h2_eta},
                      {"pass", s.pass}});
    text << std::setw(5) << s.stage << "  " << std::setw(13) << s.disp_h1_xi << "  " << std::setw(13)
         << s.disp_h2_eta << "  " << verdict(s.pass) << "\n";
  }
  for (double g : r.w_gaps) text << "|alpha(w) xi - eta| = " << g << "  " << verdict(g <= lab::kPassTol) << "\n";
  text << "trace " << verdict(r.pass) << " (D = " << r.distance << ")\n";
  emit(out, o.json, json{{"stages", stages}, {"w_gaps", r.w_gaps}, {"distance", r.distance}, {"pass", r.pass}},
       text.str());
  return r.pass ? 0 : 1;
}

int lab_angle(const LabOpts& o, std::ostream& out) {
  lab::AffineAction a = lab::load_bundle(o.bundle);
  lab::AffineSubspace A = lab_fixed(a, o.a);
  lab::AffineSubspace B = lab_fixed(a, o.b);
  const double c = lab::cos_angle(A, B);
  std::ostringstream text;
  text << std::setprecision(15) << "cos angle(fix(" << o.a << "), fix(" << o.b << ")) = " << c << "\n";
  emit(out, o.json, json{{"A", o.a}, {"B", o.b}, {"cos_angle", c}}, text.str());
  return 0;
}

int lab_chebyshev(const LabOpts& o, std::ostream& out) {
  lab::AffineAction a = lab::load_bundle(o.bundle);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal;
  lab::Vec zeta(static_cast<Eigen::Index>(a.dim));
  for (Eigen::Index i = 0; i < zeta.size(); ++i) zeta(i) = 5.0 * normal(rng);
  lab::Ball ball = lab::chebyshev_center(lab::orbit(a, zeta));
  std::vector<std::size_t> all(a.model->size());
  for (std::size_t g = 0; g < all.size(); ++g) all[g] = g;
  const double moved = lab::displacement(a, all, ball.center);
  const bool ok = moved <= 1e-5;
  std::ostringstream text;
  text << "orbit of " << all.size() << " points in dimension " << a.dim << "\n"
       << "  enclosing radius " << ball.radius << "\n"
       << "  max_g |alpha(g) c - c| = " << moved << "\n"
       << "center fixed " << verdict(ok) << "\n";
  emit(out, o.json, json{{"radius", ball.radius}, {"center_displacement", moved}, {"pass", ok}}, text.str());
  return ok ? 0 : 1;
}

int lab_split(const LabOpts& o, std::ostream& out) {
  lab::AffineAction a = lab::load_bundle(o.bundle);
  lab::SplitResult s = lab::split_trivial_part(a);
  std::ostringstream text;
  text << "invariant part dim " << s.trivial.dim << ", orthogonal part dim " << s.orthogonal.dim << "\n"
       << "  additivity residual of the trivial cocycle " << s.additivity_residual << "\n"
       << "split PASS\n";
  emit(out, o.json,
       json{{"trivial_dim", s.trivial.dim}, {"orthogonal_dim", s.orthogonal.dim},
            {"additivity_residual", s.additivity_residual}, {"pass", true}},
       text.str());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inner upgrading game for E(n,R) and its Hilbert-space lab", "egame"};
  app.require_subcommand(1);

  IdentityOpts id;
  auto* verify = app.add_subcommand("verify-identities", "Check the commutator identity and the end-swap word");
  verify->add_option("--n", id.n, "Matrix size")->capture_default_str();
  verify->add_option("--trials", id.trials, "Random instances")->capture_default_str();
  verify->add_option("--seed", id.seed, "Random seed")->capture_default_str();
  verify->add_option("--ring", id.ring, "Ring: Z, Z/m, free:k, comm:k")->capture_default_str();
  verify->add_option("--degree", id.degree, "Maximum parameter degree")->capture_default_str();

  StrategyOpts st;
  auto* strategy = app.add_subcommand("run-strategy", "Play the two-move strategy and print the stage tables");
  strategy->add_option("--n", st.n, "Matrix size")->capture_default_str();
  strategy->add_option("--ring", st.ring, "Ring")->capture_default_str();
  strategy->add_option("--transcript", st.transcript, "Write the transcript to this file");

  std::size_t play_n = 3;
  std::string play_ring = "Z";
  auto* play_cmd = app.add_subcommand("play", "Interactive game on stdin");
  play_cmd->add_option("--n", play_n, "Matrix size")->capture_default_str();
  play_cmd->add_option("--ring", play_ring, "Ring")->capture_default_str();

  LabOpts lo;
  auto* lab_cmd = app.add_subcommand("lab", "Numerical checks on affine isometric actions");
  lab_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* c, bool bundle) {
    if (bundle) c->add_option("--bundle", lo.bundle, "Action bundle directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--seed", lo.seed, "Random seed")->capture_default_str();
    c->add_flag("--json", lo.json, "Machine-readable output");
  };
  auto* build = lab_cmd->add_subcommand("build-action", "Build, validate and save a coboundary action of E(n,Z/m)");
  build->add_option("--out", lo.out_dir, "Bundle directory")->required();
  build->add_option("--n", lo.n, "Matrix size")->capture_default_str();
  build->add_option("--modulus", lo.modulus, "m in Z/m")->capture_default_str();
  build->add_option("--rep", lo.rep, "perm, random, trivial or perm+trivial")->capture_default_str();
  add_common(build, false);
  auto* realizer = lab_cmd->add_subcommand("realizer", "Distance realizer between two fixed sets and its uniqueness");
  realizer->add_option("--a", lo.a, "First subgroup pattern")->capture_default_str();
  realizer->add_option("--b", lo.b, "Second subgroup pattern")->capture_default_str();
  realizer->add_option("--starts", lo.starts, "Reparametrized starts")->capture_default_str();
  add_common(realizer, true);
  auto* trace = lab_cmd->add_subcommand("trace", "Fixed-point trace along the two-move strategy");
  add_common(trace, true);
  auto* angle = lab_cmd->add_subcommand("angle", "Cosine of the angle between two fixed sets");
  angle->add_option("--a", lo.a, "First subgroup pattern")->capture_default_str();
  angle->add_option("--b", lo.b, "Second subgroup pattern")->capture_default_str();
  add_common(angle, true);
  auto* cheb = lab_cmd->add_subcommand("chebyshev", "Enclosing ball of an orbit and its center");
  add_common(cheb, true);
  auto* split = lab_cmd->add_subcommand("split", "Split off the invariant part of an action");
  add_common(split, true);

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string state_dir = "egame-state";
  auto* serve = app.add_subcommand("serve", "HTTP/JSON service under /v1");
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--state-dir", state_dir, "Transcript directory")->capture_default_str();

  std::string tmode;
  std::string tfile;
  auto* transcript = app.add_subcommand("transcript", "Replay or validate a transcript file");
  transcript->add_option("mode", tmode, "replay or validate")->required()->check(CLI::IsMember({"replay", "validate"}));
  transcript->add_option("file", tfile, "Transcript file")->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    err << "usage error: " << e.what() << "\n" << target->help();
    return 2;
  }

  try {
    if (verify->parsed()) return verify_identities(id, out);
    if (strategy->parsed()) return run_strategy(st, out);
    if (play_cmd->parsed()) return play(play_n, play_ring, in, out);
    if (build->parsed()) return lab_build(lo, out);
    if (realizer->parsed()) return lab_realizer(lo, out);
    if (trace->parsed()) return lab_trace(lo, out);
    if (angle->parsed()) return lab_angle(lo, out);
    if (cheb->parsed()) return lab_chebyshev(lo, out);
    if (split->parsed()) return lab_split(lo, out);
    if (transcript->parsed()) return transcript_command(tmode, tfile, out, err);
    if (serve->parsed()) {
      Service service{std::filesystem::path(state_dir)};
      for (const auto& e : service.load_errors()) err << "skipped " << e << "\n";
      HttpFrontend http(service);
      const int bound = http.bind(host, port);
      if (bound < 0) {
        err << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      out << "serving " << service.game_count() << " games on http://" << host << ":" << bound << "/v1\n"
          << std::flush;
      return http.run() ? 0 : 1;
    }
  } catch (const MoveRejected& e) {
    err << "rejected: " << e.reason() << "\n";
    return 1;
  } catch (const Error& e) {
    if (!transcript->parsed()) err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace egame::cli
