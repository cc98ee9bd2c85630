#pragma once

// Block-pattern subgroups of E(n,R).
//
// A pattern denotes the subgroup generated by the elementary families
// {e_{i,j}^r : r in R} over its available off-diagonal positions: cells tagged
// R, E or * are available, cells tagged 0 are not. An E block is the
// embedded E(k,R) on its index set, which is generated by exactly the
// off-diagonal positions inside the block. Every subgroup in the vocabulary is
// therefore determined by a set of positions, and the grid is its rendering.
//
// Certificates are conservative: a true answer is a proof, a false answer only
// means "not certified".

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "egame/matrix.hpp"

namespace egame {

enum class BlockTag : std::uint8_t { kZero, kOne, kAnyRing, kEBlock, kAnyMat };

// Partial order ZERO <= ANY_RING <= ANY_MAT, ONE <= E_BLOCK <= ANY_MAT.
bool tag_leq(BlockTag a, BlockTag b);
// Least upper bound; incomparable tags join to ANY_MAT.
BlockTag tag_join(BlockTag a, BlockTag b);
char tag_symbol(BlockTag t);
BlockTag tag_from_symbol(char c);

// Off-diagonal positions (row, col), 0-based.
class PositionSet {
 public:
  explicit PositionSet(std::size_t n);
  static PositionSet all(std::size_t n);

  std::size_t n() const { return n_; }
  bool contains(std::size_t row, std::size_t col) const { return bits_[row * n_ + col] != 0; }
  void insert(std::size_t row, std::size_t col);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool is_complete() const { return size() == n_ * (n_ - 1); }
  bool is_subset_of(const PositionSet& other) const;
  std::vector<std::pair<std::size_t, std::size_t>> list() const;

  PositionSet united(const PositionSet& other) const;
  // Saturation under (i,j), (j,k), i != k  =>  (i,k).
  PositionSet closure() const;
  // (i,j) -> (image[i], image[j]).
  PositionSet permuted(const std::vector<std::size_t>& image) const;

  friend bool operator==(const PositionSet&, const PositionSet&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

class PatternSubgroup {
 public:
  // Canonical rendering: cliques of mutually available indices become E
  // blocks, remaining positions become R, and the complete set renders as
  // the all-'*' pattern of G.
  static PatternSubgroup from_positions(const PositionSet& positions, std::string name = {});
  // Rows separated by newlines or '/', cells over {0,1,R,E,*} with optional
  // whitespace: "1 0 R / 0 1 R / 0 0 1" or "10R/01R/001".
  static PatternSubgroup parse(std::string_view text, std::string name = {});

  std::size_t n() const { return n_; }
  BlockTag at(std::size_t row, std::size_t col) const { return cells_[row * n_ + col]; }
  const std::vector<BlockTag>& cells() const { return cells_; }
  const std::string& name() const { return name_; }
  PatternSubgroup named(std::string name) const;

  PositionSet generators() const;
  // Index sets of the E blocks (diagonal E runs that are joined by E cells).
  std::vector<std::vector<std::size_t>> blocks() const;
  bool is_full() const;
  bool is_trivial() const;
  // True when every available position lies inside a single E block.
  bool is_block_diagonal() const;

  std::string to_string() const;  // one row per line, cells separated by spaces
  std::string compact() const;    // rows joined by '/', no spaces
  std::vector<std::vector<std::string>> grid() const;

  // Necessary condition for membership in the denoted subgroup: zero and one
  // cells of the closed pattern are matched exactly, E relaxed to any entry.
  bool matches(const MatR& m) const;

  // Equality compares cells; names are labels only.
  friend bool operator==(const PatternSubgroup& a, const PatternSubgroup& b) {
    return a.n_ == b.n_ && a.cells_ == b.cells_;
  }

 private:
  PatternSubgroup(std::size_t n, std::vector<BlockTag> cells, std::string name)
      : n_(n), cells_(std::move(cells)), name_(std::move(name)) {}

  std::size_t n_;
  std::vector<BlockTag> cells_;
  std::string name_;
};

// Built-in vocabulary: M, L, Q, G, trivial, H1_1, H2_1, wH2w_inv, wH1w_inv and
// G(i,j) with 1-based i != j. Requires n >= 3.
PatternSubgroup builtin_pattern(std::string_view name, std::size_t n);
std::vector<std::string> builtin_pattern_names();

// "builtin:NAME@n", or a pattern literal.
PatternSubgroup parse_pattern_ref(std::string_view text);

// Every generator family of `small` is available in the closure of `big`
// (after a cell-wise lattice check as the fast path).
bool pattern_contains(const PatternSubgroup& big, const PatternSubgroup& small);

// Generic element of a block-diagonal schema such as Q.
struct BlockElement {
  PatternSubgroup schema;
};

using Conjugator = std::variant<SignedPermutation, BlockElement, ElemWord>;

std::string conjugator_label(const Conjugator& g);

// g p g^-1 at the pattern level. Signed permutations move tags along the
// permutation. Block elements and elementary words are accepted when every
// family they draw from normalizes the subgroup, in which case the result is
// p itself; anything else throws Errc::kUnsupportedConjugator.
PatternSubgroup pattern_conjugate(const PatternSubgroup& p, const Conjugator& g);
// g^-1 p g.
PatternSubgroup pattern_conjugate_inverse(const PatternSubgroup& p, const Conjugator& g);

// Cell-wise lattice join followed by closure.
PatternSubgroup pattern_join(const PatternSubgroup& a, const PatternSubgroup& b);
PatternSubgroup closure_to_full(const PatternSubgroup& p);

// Random word in the generator families of p: up to length_bound factors with
// parameters of degree <= degree_bound. Deterministic in the rng state.
ElemWord sample_word(const PatternSubgroup& p, const RingSpec& ring, std::mt19937_64& rng,
                     std::size_t degree_bound, std::size_t length_bound);
MatR sample_element(const PatternSubgroup& p, const RingSpec& ring, std::uint64_t seed,
                    std::size_t degree_bound, std::size_t length_bound);

// Every e_{i,k}^r is a commutator by the (i,j,k) relation as soon as a spare
// index j exists.
bool abelianization_trivial_certificate(std::size_t n);

}  // namespace egame
