#pragma once

// n x n matrices over R, elementary matrices and words in them.
//
// Index conventions: MatR::operator() and SignedPermutation use 0-based
// indices; elementary factors (i, j) follow the mathematical 1-based notation,
// so E(1,3;x) is the identity plus x in the top-right corner.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egame/ring.hpp"

namespace egame {

class MatR {
 public:
  MatR(std::size_t n, RingSpec ring);

  static MatR identity(std::size_t n, const RingSpec& ring);
  // "[a, b; c, d]": rows separated by ';', entries by ','.
  static MatR parse(const RingSpec& ring, std::string_view text);

  std::size_t n() const { return n_; }
  const RingSpec& ring() const { return ring_; }

  const NcPoly& operator()(std::size_t row, std::size_t col) const { return entries_[row * n_ + col]; }
  NcPoly& operator()(std::size_t row, std::size_t col) { return entries_[row * n_ + col]; }

  bool is_identity() const;
  std::string to_string() const;

  friend MatR operator*(const MatR& a, const MatR& b);
  friend bool operator==(const MatR& a, const MatR& b) = default;

 private:
  std::size_t n_;
  RingSpec ring_;
  std::vector<NcPoly> entries_;
};

MatR mat_mul(const MatR& a, const MatR& b);

// e_{i,j}^r with 1-based i != j.
MatR elem_matrix(std::size_t n, std::size_t i, std::size_t j, const NcPoly& r);

struct ElemFactor {
  std::size_t i = 0;  // 1-based
  std::size_t j = 0;  // 1-based
  NcPoly r;

  friend bool operator==(const ElemFactor&, const ElemFactor&) = default;
};

class ElemWord {
 public:
  ElemWord() = default;
  explicit ElemWord(std::vector<ElemFactor> factors);

  // Whitespace-separated factors "E(i,j;expr)"; "I" is the empty word.
  static ElemWord parse(const RingSpec& ring, std::string_view text);

  const std::vector<ElemFactor>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }

  // Product of the factors left to right.
  MatR eval(std::size_t n, const RingSpec& ring) const;
  // Reversed sequence with negated parameters.
  ElemWord inverse() const;
  ElemWord operator*(const ElemWord& other) const;

  std::string to_string() const;
  friend bool operator==(const ElemWord&, const ElemWord&) = default;

 private:
  std::vector<ElemFactor> factors_;
};

MatR elem_word_eval(const ElemWord& w, std::size_t n, const RingSpec& ring);
ElemWord elem_word_inverse(const ElemWord& w);

// Matrix sending basis vector e_j to sign[j] * e_{image[j]}.
struct SignedPermutation {
  std::vector<std::size_t> image;
  std::vector<int> sign;

  std::size_t n() const { return image.size(); }
  static SignedPermutation identity(std::size_t n);
  // Recognizes a matrix with exactly one entry +-1 per row and column.
  static std::optional<SignedPermutation> recognize(const MatR& m);
  // "3,-2,1": column j goes to row |v_j| with the sign of v_j (1-based).
  static SignedPermutation parse(std::string_view text);

  MatR to_matrix(const RingSpec& ring) const;
  SignedPermutation inverse() const;
  std::string to_string() const;

  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
};

// A group element together with a witness of its inverse. General inversion
// over R is not available; witnesses come from elementary words or signed
// permutations.
class InvertibleMatrix {
 public:
  static InvertibleMatrix from_word(const ElemWord& w, std::size_t n, const RingSpec& ring);
  static InvertibleMatrix from_signed_permutation(const SignedPermutation& p, const RingSpec& ring);
  // Accepts signed permutation matrices and single elementary matrices;
  // anything else throws Errc::kNoInverseWitness.
  static InvertibleMatrix from_matrix(const MatR& m);

  const MatR& value() const { return value_; }
  const MatR& inverse() const { return inverse_; }

 private:
  InvertibleMatrix(MatR value, MatR inverse) : value_(std::move(value)), inverse_(std::move(inverse)) {}

  MatR value_;
  MatR inverse_;
};

// a b a^-1 b^-1
MatR commutator(const InvertibleMatrix& a, const InvertibleMatrix& b);
MatR commutator(const MatR& a, const MatR& b);

// g a g^-1, after checking that ginv is a two-sided inverse of g.
MatR conjugate(const MatR& g, const MatR& ginv, const MatR& a);

// True iff [e_{i,j}^{r1}, e_{j,k}^{r2}] = e_{i,k}^{r1 r2} exactly, for pairwise
// distinct 1-based i, j, k.
bool verify_sharp(std::size_t n, std::size_t i, std::size_t j, std::size_t k, const NcPoly& r1,
                  const NcPoly& r2);

// (e_{n-1,n}^1 e_{n,n-1}^-1 e_{n-1,n}^1)^2 (e_{1,n}^1 e_{n,1}^-1 e_{1,n}^1): swaps the first
// and last coordinates, negating coordinate n-1.
ElemWord end_swap_word(std::size_t n, const RingSpec& ring);

// The same element written directly as a block matrix
//   [0 0 1; 0 D 0; 1 0 0] with D = diag(1,...,1,-1) of size n-2.
MatR end_swap_matrix(std::size_t n, const RingSpec& ring);

}  // namespace egame
