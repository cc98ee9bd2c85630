#include "egame/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>

#include "egame/error.hpp"

namespace egame {

namespace {

struct Components {
  std::vector<std::size_t> parent;

  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Clique blocks of the mutual-availability relation; singletons are dropped.
std::vector<std::vector<std::size_t>> clique_blocks(const PositionSet& s) {
  const std::size_t n = s.n();
  Components comp(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s.contains(i, j) && s.contains(j, i)) comp.unite(i, j);
    }
  }
  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[comp.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> blocks;
  for (auto& g : groups) {
    if (g.size() < 2) continue;
    bool clique = true;
    for (auto a : g) {
      for (auto b : g) {
        if (a != b && !s.contains(a, b)) clique = false;
      }
    }
    if (clique) blocks.push_back(std::move(g));
  }
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

// True when the family {e_{a,b}^r} normalizes <S> for a closed position set S.
bool family_normalizes(const PositionSet& closed, std::size_t a, std::size_t b) {
  for (auto [i, j] : closed.list()) {
    if (b == i && a != j && !closed.contains(a, j)) return false;
    if (a == j && b != i && !closed.contains(i, b)) return false;
    if (a == j && b == i && !closed.contains(a, b)) return false;
  }
  return true;
}

PatternSubgroup conjugate_impl(const PatternSubgroup& p, const Conjugator& g, bool inverse) {
  const std::size_t n = p.n();
  if (const auto* perm = std::get_if<SignedPermutation>(&g)) {
    if (perm->n() != n) {
      throw Error(Errc::kDimensionMismatch, "conjugator size " + std::to_string(perm->n()) +
                                                " does not match pattern size " + std::to_string(n));
    }
    const SignedPermutation& move = inverse ? perm->inverse() : *perm;
    return PatternSubgroup::from_positions(p.generators().permuted(move.image));
  }

  const PositionSet closed = p.generators().closure();
  std::vector<std::pair<std::size_t, std::size_t>> families;
  if (const auto* block = std::get_if<BlockElement>(&g)) {
    if (block->schema.n() != n) {
      throw Error(Errc::kDimensionMismatch, "block schema size does not match pattern size");
    }
    if (!block->schema.is_block_diagonal()) {
      throw Error(Errc::kUnsupportedConjugator,
                  "unsupported conjugator: schema is not block-diagonal");
    }
    families = block->schema.generators().list();
  } else {
    const auto& word = std::get<ElemWord>(g);
    if (word.empty()) return PatternSubgroup::from_positions(p.generators());
    const RingSpec& ring = word.factors().front().r.ring();
    for (const auto& f : word.factors()) {
      if (f.i > n || f.j > n) {
        throw Error(Errc::kInvalidIndex, "conjugator word index exceeds pattern size");
      }
    }
    if (auto perm = SignedPermutation::recognize(word.eval(n, ring))) {
      return conjugate_impl(p, *perm, inverse);
    }
    for (const auto& f : word.factors()) families.emplace_back(f.i - 1, f.j - 1);
  }
  for (auto [a, b] : families) {
    if (!family_normalizes(closed, a, b)) {
      throw Error(Errc::kUnsupportedConjugator,
                  "unsupported conjugator: family (" + std::to_string(a + 1) + "," +
                      std::to_string(b + 1) + ") does not normalize the pattern");
    }
  }
  return PatternSubgroup::from_positions(closed);
}

std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

bool tag_leq(BlockTag a, BlockTag b) {
  if (a == b || b == BlockTag::kAnyMat) return true;
  if (a == BlockTag::kZero) return b == BlockTag::kAnyRing;
  if (a == BlockTag::kOne) return b == BlockTag::kEBlock;
  return false;
}

BlockTag tag_join(BlockTag a, BlockTag b) {
  if (tag_leq(a, b)) return b;
  if (tag_leq(b, a)) return a;
  return BlockTag::kAnyMat;
}

char tag_symbol(BlockTag t) {
  switch (t) {
    case BlockTag::kZero: return '0';
    case BlockTag::kOne: return '1';
    case BlockTag::kAnyRing: return 'R';
    case BlockTag::kEBlock: return 'E';
    case BlockTag::kAnyMat: return '*';
  }
  return '?';
}

BlockTag tag_from_symbol(char c) {
  switch (c) {
    case '0': return BlockTag::kZero;
    case '1': return BlockTag::kOne;
    case 'R': return BlockTag::kAnyRing;
    case 'E': return BlockTag::kEBlock;
    case '*': return BlockTag::kAnyMat;
    default: break;
  }
  throw Error(Errc::kParse, std::string("unknown pattern cell '") + c + "'");
}

PositionSet::PositionSet(std::size_t n) : n_(n), bits_(n * n, 0) {}

PositionSet PositionSet::all(std::size_t n) {
  PositionSet s(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s.insert(i, j);
    }
  }
  return s;
}

void PositionSet::insert(std::size_t row, std::size_t col) {
  if (row >= n_ || col >= n_ || row == col) {
    throw Error(Errc::kInvalidIndex, "position (" + std::to_string(row) + "," + std::to_string(col) +
                                         ") is not off-diagonal in size " + std::to_string(n_));
  }
  bits_[row * n_ + col] = 1;
}

std::size_t PositionSet::size() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool PositionSet::is_subset_of(const PositionSet& other) const {
  if (other.n_ != n_) return false;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k] && !other.bits_[k]) return false;
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> PositionSet::list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (contains(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

PositionSet PositionSet::united(const PositionSet& other) const {
  if (other.n_ != n_) throw Error(Errc::kDimensionMismatch, "position sets of different size");
  PositionSet out = *this;
  for (std::size_t k = 0; k < bits_.size(); ++k) out.bits_[k] |= other.bits_[k];
  return out;
}

PositionSet PositionSet::closure() const {
  PositionSet out = *this;
  // Warshall over intermediate index j; the diagonal is never added.
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!out.contains(i, j)) continue;
      for (std::size_t k = 0; k < n_; ++k) {
        if (k != i && out.contains(j, k)) out.bits_[i * n_ + k] = 1;
      }
    }
  }
  return out;
}

PositionSet PositionSet::permuted(const std::vector<std::size_t>& image) const {
  PositionSet out(n_);
  for (auto [i, j] : list()) out.insert(image[i], image[j]);
  return out;
}

PatternSubgroup PatternSubgroup::from_positions(const PositionSet& positions, std::string name) {
  const std::size_t n = positions.n();
  if (positions.is_complete()) {
    return PatternSubgroup(n, std::vector<BlockTag>(n * n, BlockTag::kAnyMat), std::move(name));
  }
  std::vector<BlockTag> cells(n * n, BlockTag::kZero);
  for (std::size_t i = 0; i < n; ++i) cells[i * n + i] = BlockTag::kOne;
  for (auto [i, j] : positions.list()) cells[i * n + j] = BlockTag::kAnyRing;
  for (const auto& block : clique_blocks(positions)) {
    for (auto a : block) {
      for (auto b : block) cells[a * n + b] = BlockTag::kEBlock;
    }
  }
  return PatternSubgroup(n, std::move(cells), std::move(name));
}

PatternSubgroup PatternSubgroup::parse(std::string_view text, std::string name) {
  std::vector<std::vector<BlockTag>> rows;
  std::vector<BlockTag> current;
  auto flush = [&] {
    if (!current.empty()) rows.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (c == '\n' || c == '/') {
      flush();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current.push_back(tag_from_symbol(c));
    }
  }
  flush();
  const std::size_t n = rows.size();
  if (n == 0) throw Error(Errc::kParse, "empty pattern literal");
  std::vector<BlockTag> cells;
  for (const auto& row : rows) {
    if (row.size() != n) throw Error(Errc::kParse, "pattern literal is not square");
    cells.insert(cells.end(), row.begin(), row.end());
  }
  auto diag = [&](std::size_t i) { return cells[i * n + i]; };
  for (std::size_t i = 0; i < n; ++i) {
    BlockTag d = diag(i);
    if (d == BlockTag::kZero || d == BlockTag::kAnyRing) {
      throw Error(Errc::kParse, "diagonal cell " + std::to_string(i + 1) +
                                    " must be 1 or lie in an E or * block");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || cells[i * n + j] != BlockTag::kEBlock) continue;
      auto in_block = [](BlockTag t) { return t == BlockTag::kEBlock || t == BlockTag::kAnyMat; };
      if (!in_block(diag(i)) || !in_block(diag(j))) {
        throw Error(Errc::kParse, "E cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                      ") outside an E block");
      }
    }
  }
  return PatternSubgroup(n, std::move(cells), std::move(name));
}

PatternSubgroup PatternSubgroup::named(std::string name) const {
  PatternSubgroup out = *this;
  out.name_ = std::move(name);
  return out;
}

PositionSet PatternSubgroup::generators() const {
  PositionSet s(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i != j && at(i, j) != BlockTag::kZero) s.insert(i, j);
    }
  }
  return s;
}

std::vector<std::vector<std::size_t>> PatternSubgroup::blocks() const {
  return clique_blocks(generators());
}

bool PatternSubgroup::is_full() const { return generators().closure().is_complete(); }

bool PatternSubgroup::is_trivial() const { return generators().empty(); }

bool PatternSubgroup::is_block_diagonal() const {
  const PositionSet s = generators();
  std::vector<int> block_of(n_, -1);
  auto bl = clique_blocks(s);
  for (std::size_t b = 0; b < bl.size(); ++b) {
    for (auto i : bl[b]) block_of[i] = static_cast<int>(b);
  }
  for (auto [i, j] : s.list()) {
    if (block_of[i] < 0 || block_of[i] != block_of[j]) return false;
  }
  return true;
}

std::string PatternSubgroup::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (j > 0) out += ' ';
      out += tag_symbol(at(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string PatternSubgroup::compact() const {
  std::string out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (i > 0) out += '/';
    for (std::size_t j = 0; j < n_; ++j) out += tag_symbol(at(i, j));
  }
  return out;
}

std::vector<std::vector<std::string>> PatternSubgroup::grid() const {
  std::vector<std::vector<std::string>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i].emplace_back(1, tag_symbol(at(i, j)));
  }
  return out;
}

bool PatternSubgroup::matches(const MatR& m) const {
  if (m.n() != n_) return false;
  const PatternSubgroup closed = from_positions(generators().closure());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const NcPoly& e = m(i, j);
      switch (closed.at(i, j)) {
        case BlockTag::kZero:
          if (!e.is_zero()) return false;
          break;
        case BlockTag::kOne:
          if (!e.is_one()) return false;
          break;
        default:
          break;
      }
    }
  }
  return true;
}

PatternSubgroup builtin_pattern(std::string_view name, std::size_t n) {
  if (n < 3) throw Error(Errc::kInvalidArgument, "built-in patterns need n >= 3");
  const std::size_t last = n - 1;
  PositionSet s(n);
  auto add_block = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i <= hi; ++i) {
      for (std::size_t j = lo; j <= hi; ++j) {
        if (i != j) s.insert(i, j);
      }
    }
  };
  auto add_last_column = [&] { for (std::size_t i = 0; i < last; ++i) s.insert(i, last); };
  auto add_last_row = [&] { for (std::size_t j = 0; j < last; ++j) s.insert(last, j); };

  if (name == "M") {
    add_last_column();
  } else if (name == "L") {
    add_last_row();
  } else if (name == "Q") {
    add_block(0, last - 1);
  } else if (name == "G") {
    s = PositionSet::all(n);
  } else if (name == "trivial") {
  } else if (name == "H1_1") {
    add_block(0, last - 1);
    add_last_column();
  } else if (name == "H2_1") {
    add_block(0, last - 1);
    add_last_row();
  } else if (name == "wH2w_inv") {
    add_block(1, last);
    for (std::size_t j = 1; j < n; ++j) s.insert(0, j);
  } else if (name == "wH1w_inv") {
    add_block(1, last);
    for (std::size_t i = 1; i < n; ++i) s.insert(i, 0);
  } else if (name.size() > 3 && name.substr(0, 2) == "G(" && name.back() == ')') {
    std::string_view body = name.substr(2, name.size() - 3);
    auto comma = body.find(',');
    auto i = comma == std::string_view::npos ? std::nullopt : parse_size(body.substr(0, comma));
    auto j = comma == std::string_view::npos ? std::nullopt : parse_size(body.substr(comma + 1));
    if (!i || !j || *i < 1 || *j < 1 || *i > n || *j > n || *i == *j) {
      throw Error(Errc::kUnknownPattern, "bad G(i,j) pattern '" + std::string(name) + "'");
    }
    s.insert(*i - 1, *j - 1);
  } else {
    throw Error(Errc::kUnknownPattern, "unknown built-in pattern '" + std::string(name) + "'");
  }
  return PatternSubgroup::from_positions(s, std::string(name));
}

std::vector<std::string> builtin_pattern_names() {
  return {"M", "L", "Q", "G", "trivial", "H1_1", "H2_1", "wH2w_inv", "wH1w_inv"};
}

PatternSubgroup parse_pattern_ref(std::string_view text) {
  constexpr std::string_view kPrefix = "builtin:";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    std::string_view rest = text.substr(kPrefix.size());
    auto at = rest.rfind('@');
    if (at == std::string_view::npos) {
      throw Error(Errc::kParse, "built-in reference needs '@n': '" + std::string(text) + "'");
    }
    auto n = parse_size(rest.substr(at + 1));
    if (!n) throw Error(Errc::kParse, "bad size in '" + std::string(text) + "'");
    return builtin_pattern(rest.substr(0, at), *n);
  }
  return PatternSubgroup::parse(text);
}

bool pattern_contains(const PatternSubgroup& big, const PatternSubgroup& small) {
  if (big.n() != small.n()) {
    throw Error(Errc::kDimensionMismatch, "pattern sizes differ: " + std::to_string(big.n()) +
                                              " vs " + std::to_string(small.n()));
  }
  bool dominated = true;
  for (std::size_t k = 0; k < big.cells().size() && dominated; ++k) {
    dominated = tag_leq(small.cells()[k], big.cells()[k]);
  }
  if (dominated) return true;
  return small.generators().is_subset_of(big.generators().closure());
}

std::string conjugator_label(const Conjugator& g) {
  if (const auto* perm = std::get_if<SignedPermutation>(&g)) return "perm[" + perm->to_string() + "]";
  if (const auto* block = std::get_if<BlockElement>(&g)) {
    return block->schema.name().empty() ? "[" + block->schema.compact() + "]" : block->schema.name();
  }
  return "[" + std::get<ElemWord>(g).to_string() + "]";
}

PatternSubgroup pattern_conjugate(const PatternSubgroup& p, const Conjugator& g) {
  return conjugate_impl(p, g, false);
}

PatternSubgroup pattern_conjugate_inverse(const PatternSubgroup& p, const Conjugator& g) {
  return conjugate_impl(p, g, true);
}

PatternSubgroup pattern_join(const PatternSubgroup& a, const PatternSubgroup& b) {
  if (a.n() != b.n()) {
    throw Error(Errc::kDimensionMismatch, "pattern sizes differ: " + std::to_string(a.n()) +
                                              " vs " + std::to_string(b.n()));
  }
  const std::size_t n = a.n();
  PositionSet joined(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && tag_join(a.at(i, j), b.at(i, j)) != BlockTag::kZero) joined.insert(i, j);
    }
  }
  return PatternSubgroup::from_positions(joined.closure());
}

PatternSubgroup closure_to_full(const PatternSubgroup& p) {
  PositionSet closed = p.generators().closure();
  return PatternSubgroup::from_positions(closed, closed.is_complete() ? "G" : p.name());
}

ElemWord sample_word(const PatternSubgroup& p, const RingSpec& ring, std::mt19937_64& rng,
                     std::size_t degree_bound, std::size_t length_bound) {
  const auto families = p.generators().list();
  if (families.empty() || length_bound == 0) return ElemWord{};
  std::uniform_int_distribution<std::size_t> length_dist(1, length_bound);
  std::uniform_int_distribution<std::size_t> pick(0, families.size() - 1);
  const std::size_t length = length_dist(rng);
  std::vector<ElemFactor> factors;
  for (std::size_t t = 0; t < length; ++t) {
    auto [i, j] = families[pick(rng)];
    NcPoly r = random_poly(ring, rng, degree_bound, 3);
    if (r.is_zero()) r = NcPoly::one(ring);
    factors.push_back(ElemFactor{i + 1, j + 1, std::move(r)});
  }
  return ElemWord(std::move(factors));
}

MatR sample_element(const PatternSubgroup& p, const RingSpec& ring, std::uint64_t seed,
                    std::size_t degree_bound, std::size_t length_bound) {
  std::mt19937_64 rng(seed);
  return sample_word(p, ring, rng, degree_bound, length_bound).eval(p.n(), ring);
}

bool abelianization_trivial_certificate(std::size_t n) {
  if (n < 3) throw Error(Errc::kInvalidArgument, "certificate requires n >= 3");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      bool spare = false;
      for (std::size_t j = 0; j < n && !spare; ++j) spare = j != i && j != k;
      if (!spare) return false;
    }
  }
  return true;
}

}  // namespace egame
