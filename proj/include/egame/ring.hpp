#pragma once

// Exact arithmetic in R = Z<x_1..x_k>, optionally commutative and/or with
// coefficients reduced mod m.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egame/error.hpp"

namespace egame {

struct RingSpec {
  std::size_t generators = 0;
  bool commutative = false;
  std::optional<std::int64_t> modulus;

  // Accepted forms: "Z", "Z/4", "free:2", "comm:2" (alias "commutative:2"),
  // with an optional "/m" suffix on the last two, e.g. "free:2/5".
  static RingSpec parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const RingSpec&, const RingSpec&) = default;
};

// Monomial of the free monoid on the generators; letters are 1-based generator
// indices. The empty word is the unit monomial.
struct Word {
  std::vector<std::uint32_t> letters;

  std::size_t degree() const { return letters.size(); }
  friend bool operator==(const Word&, const Word&) = default;
};

// Degree first, then lexicographic on letters.
struct WordOrder {
  bool operator()(const Word& a, const Word& b) const;
};

class NcPoly {
 public:
  using Terms = std::map<Word, mpz_class, WordOrder>;

  explicit NcPoly(RingSpec ring);

  static NcPoly zero(const RingSpec& ring) { return NcPoly(ring); }
  static NcPoly constant(const RingSpec& ring, const mpz_class& value);
  static NcPoly one(const RingSpec& ring) { return constant(ring, 1); }
  static NcPoly generator(const RingSpec& ring, std::size_t index);
  static NcPoly monomial(const RingSpec& ring, Word word, const mpz_class& coeff);

  // Grammar: sums of products of integers, generators (x1..xk, or x,y,z when
  // k <= 3), parenthesised sub-expressions and non-negative powers '^'.
  static NcPoly parse(const RingSpec& ring, std::string_view text);

  const RingSpec& ring() const { return ring_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_one() const;
  // Constant term value if the polynomial has degree 0 (or is zero).
  std::optional<mpz_class> as_constant() const;
  std::size_t degree() const;

  std::string to_string() const;

  NcPoly& operator+=(const NcPoly& other);
  NcPoly& operator-=(const NcPoly& other);
  NcPoly operator-() const;

  friend NcPoly operator+(NcPoly a, const NcPoly& b) { return a += b; }
  friend NcPoly operator-(NcPoly a, const NcPoly& b) { return a -= b; }
  friend NcPoly operator*(const NcPoly& a, const NcPoly& b);
  friend bool operator==(const NcPoly& a, const NcPoly& b);

 private:
  void add_term(const Word& word, const mpz_class& coeff);
  void normalize_word(Word& word) const;

  RingSpec ring_;
  Terms terms_;
};

// Same as the operators; named for call sites that read better as functions.
NcPoly poly_add(const NcPoly& a, const NcPoly& b);
NcPoly poly_mul(const NcPoly& a, const NcPoly& b);

// Ring homomorphism Z<x> -> Z (or Z/m): generator i maps to assignment[i-1].
mpz_class poly_eval(const NcPoly& p, std::span<const mpz_class> assignment,
                    std::optional<mpz_class> modulus = std::nullopt);

// Random element with at most max_terms terms of degree <= max_degree and
// coefficients in [-coeff_bound, coeff_bound].
NcPoly random_poly(const RingSpec& ring, std::mt19937_64& rng, std::size_t max_degree,
                   std::size_t max_terms, int coeff_bound = 3);

// Name printed for generator i (1-based).
std::string generator_name(const RingSpec& ring, std::size_t index);

}  // namespace egame
