#include "egame/ring.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "egame/error.hpp"

namespace egame {

namespace {

void require_same_ring(const NcPoly& a, const NcPoly& b) {
  if (!(a.ring() == b.ring())) {
    throw Error(Errc::kRingMismatch,
                "incompatible rings: " + a.ring().to_string() + " vs " + b.ring().to_string());
  }
}

mpz_class reduce(const mpz_class& value, const mpz_class& modulus) {
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), value.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

std::optional<std::int64_t> parse_int64(std::string_view s) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Recursive-descent parser over the polynomial grammar.
class PolyParser {
 public:
  PolyParser(const RingSpec& ring, std::string_view text) : ring_(ring), text_(text) {}

  NcPoly parse() {
    NcPoly result = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return result;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::kParse, "polynomial parse error at offset " + std::to_string(pos_) +
                                  ": " + msg + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NcPoly expression() {
    NcPoly acc(ring_);
    bool negate = false;
    skip_space();
    if (accept('-')) {
      negate = true;
    } else {
      accept('+');
    }
    acc = term();
    if (negate) acc = -acc;
    for (;;) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        break;
      }
    }
    return acc;
  }

  NcPoly term() {
    NcPoly acc = power();
    while (accept('*')) acc = acc * power();
    return acc;
  }

  NcPoly power() {
    NcPoly base = primary();
    if (accept('^')) {
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      auto exponent = parse_int64(text_.substr(start, pos_ - start));
      if (!exponent) fail("bad exponent");
      NcPoly result = NcPoly::one(ring_);
      for (std::int64_t i = 0; i < *exponent; ++i) result = result * base;
      return result;
    }
    return base;
  }

  NcPoly primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NcPoly inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return -primary();
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      mpz_class value(std::string(text_.substr(start, pos_ - start)), 10);
      return NcPoly::constant(ring_, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return NcPoly::generator(ring_, generator_index(text_.substr(start, pos_ - start)));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::size_t generator_index(std::string_view name) {
    if (ring_.generators <= 3 && name.size() == 1) {
      static constexpr std::string_view kAliases = "xyz";
      auto at = kAliases.find(name[0]);
      if (at != std::string_view::npos && at < ring_.generators) return at + 1;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      auto index = parse_int64(name.substr(1));
      if (index && *index >= 1 && static_cast<std::size_t>(*index) <= ring_.generators) {
        return static_cast<std::size_t>(*index);
      }
    }
    fail("unknown generator '" + std::string(name) + "' for ring " + ring_.to_string());
  }

  const RingSpec& ring_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

RingSpec RingSpec::parse(std::string_view text) {
  auto bad = [&]() -> Error {
    return Error(Errc::kParse, "bad ring spec '" + std::string(text) + "'");
  };
  RingSpec spec;
  std::string_view rest = text;
  auto slash = rest.find('/');
  std::string_view head = rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    auto m = parse_int64(rest.substr(slash + 1));
    if (!m || *m < 2) throw bad();
    spec.modulus = *m;
  }
  if (head == "Z") return spec;
  auto colon = head.find(':');
  if (colon == std::string_view::npos) throw bad();
  std::string_view kind = head.substr(0, colon);
  auto k = parse_int64(head.substr(colon + 1));
  if (!k || *k < 0) throw bad();
  spec.generators = static_cast<std::size_t>(*k);
  if (kind == "free") {
    spec.commutative = false;
  } else if (kind == "comm" || kind == "commutative") {
    spec.commutative = true;
  } else {
    throw bad();
  }
  return spec;
}

std::string RingSpec::to_string() const {
  std::string out;
  if (generators == 0 && !commutative) {
    out = "Z";
  } else {
    out = (commutative ? "comm:" : "free:") + std::to_string(generators);
  }
  if (modulus) out += "/" + std::to_string(*modulus);
  return out;
}

bool WordOrder::operator()(const Word& a, const Word& b) const {
  if (a.letters.size() != b.letters.size()) return a.letters.size() < b.letters.size();
  return a.letters < b.letters;
}

std::string generator_name(const RingSpec& ring, std::size_t index) {
  if (ring.generators <= 3) return std::string(1, "xyz"[index - 1]);
  return "x" + std::to_string(index);
}

NcPoly::NcPoly(RingSpec ring) : ring_(std::move(ring)) {}

NcPoly NcPoly::constant(const RingSpec& ring, const mpz_class& value) {
  NcPoly p(ring);
  p.add_term(Word{}, value);
  return p;
}

NcPoly NcPoly::generator(const RingSpec& ring, std::size_t index) {
  if (index < 1 || index > ring.generators) {
    throw Error(Errc::kInvalidIndex, "generator index " + std::to_string(index) +
                                         " out of range for " + ring.to_string());
  }
  return monomial(ring, Word{{static_cast<std::uint32_t>(index)}}, 1);
}

NcPoly NcPoly::monomial(const RingSpec& ring, Word word, const mpz_class& coeff) {
  NcPoly p(ring);
  for (auto letter : word.letters) {
    if (letter < 1 || letter > ring.generators) {
      throw Error(Errc::kInvalidIndex, "letter out of range for " + ring.to_string());
    }
  }
  p.normalize_word(word);
  p.add_term(word, coeff);
  return p;
}

NcPoly NcPoly::parse(const RingSpec& ring, std::string_view text) {
  return PolyParser(ring, text).parse();
}

void NcPoly::normalize_word(Word& word) const {
  if (ring_.commutative) std::sort(word.letters.begin(), word.letters.end());
}

void NcPoly::add_term(const Word& word, const mpz_class& coeff) {
  auto [it, inserted] = terms_.try_emplace(word, 0);
  it->second += coeff;
  if (ring_.modulus) it->second = reduce(it->second, mpz_class(static_cast<long>(*ring_.modulus)));
  if (it->second == 0) terms_.erase(it);
}

bool NcPoly::is_one() const {
  return terms_.size() == 1 && terms_.begin()->first.letters.empty() &&
         terms_.begin()->second == 1;
}

std::optional<mpz_class> NcPoly::as_constant() const {
  if (terms_.empty()) return mpz_class(0);
  if (terms_.size() == 1 && terms_.begin()->first.letters.empty()) return terms_.begin()->second;
  return std::nullopt;
}

std::size_t NcPoly::degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

NcPoly& NcPoly::operator+=(const NcPoly& other) {
  require_same_ring(*this, other);
  for (const auto& [word, coeff] : other.terms_) add_term(word, coeff);
  return *this;
}

NcPoly& NcPoly::operator-=(const NcPoly& other) {
  require_same_ring(*this, other);
  for (const auto& [word, coeff] : other.terms_) add_term(word, -coeff);
  return *this;
}

NcPoly NcPoly::operator-() const {
  NcPoly out(ring_);
  for (const auto& [word, coeff] : terms_) out.add_term(word, -coeff);
  return out;
}

NcPoly operator*(const NcPoly& a, const NcPoly& b) {
  require_same_ring(a, b);
  NcPoly out(a.ring_);
  for (const auto& [wa, ca] : a.terms_) {
    for (const auto& [wb, cb] : b.terms_) {
      Word w;
      w.letters.reserve(wa.letters.size() + wb.letters.size());
      w.letters.insert(w.letters.end(), wa.letters.begin(), wa.letters.end());
      w.letters.insert(w.letters.end(), wb.letters.begin(), wb.letters.end());
      out.normalize_word(w);
      out.add_term(w, ca * cb);
    }
  }
  return out;
}

bool operator==(const NcPoly& a, const NcPoly& b) {
  return a.ring_ == b.ring_ && a.terms_ == b.terms_;
}

std::string NcPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::vector<std::pair<const Word*, const mpz_class*>> ordered;
  ordered.reserve(terms_.size());
  for (const auto& [word, coeff] : terms_) ordered.emplace_back(&word, &coeff);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    return x.first->degree() > y.first->degree();
  });

  std::ostringstream out;
  bool first = true;
  for (const auto& [word, coeff] : ordered) {
    mpz_class magnitude = abs(*coeff);
    bool negative = sgn(*coeff) < 0;
    if (first) {
      if (negative) out << "-";
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;

    std::string monomial;
    const auto& letters = word->letters;
    for (std::size_t i = 0; i < letters.size();) {
      std::size_t run = 1;
      while (i + run < letters.size() && letters[i + run] == letters[i]) ++run;
      if (!monomial.empty()) monomial += "*";
      monomial += generator_name(ring_, letters[i]);
      if (run > 1) monomial += "^" + std::to_string(run);
      i += run;
    }
    if (monomial.empty()) {
      out << magnitude.get_str();
    } else if (magnitude == 1) {
      out << monomial;
    } else {
      out << magnitude.get_str() << "*" << monomial;
    }
  }
  return out.str();
}

NcPoly poly_add(const NcPoly& a, const NcPoly& b) { return a + b; }
NcPoly poly_mul(const NcPoly& a, const NcPoly& b) { return a * b; }

mpz_class poly_eval(const NcPoly& p, std::span<const mpz_class> assignment,
                    std::optional<mpz_class> modulus) {
  if (assignment.size() < p.ring().generators) {
    throw Error(Errc::kInvalidArgument, "assignment must cover all " +
                                            std::to_string(p.ring().generators) + " generators");
  }
  if (!modulus && p.ring().modulus) modulus = mpz_class(static_cast<long>(*p.ring().modulus));
  mpz_class total = 0;
  for (const auto& [word, coeff] : p.terms()) {
    mpz_class value = coeff;
    for (auto letter : word.letters) {
      value *= assignment[letter - 1];
      if (modulus) value = reduce(value, *modulus);
    }
    total += value;
    if (modulus) total = reduce(total, *modulus);
  }
  return total;
}

NcPoly random_poly(const RingSpec& ring, std::mt19937_64& rng, std::size_t max_degree,
                   std::size_t max_terms, int coeff_bound) {
  NcPoly out(ring);
  std::uniform_int_distribution<std::size_t> term_count(0, max_terms);
  std::uniform_int_distribution<std::size_t> degree_dist(0, ring.generators == 0 ? 0 : max_degree);
  std::uniform_int_distribution<int> coeff_dist(-coeff_bound, coeff_bound);
  std::size_t terms = term_count(rng);
  for (std::size_t t = 0; t < terms; ++t) {
    Word w;
    std::size_t degree = degree_dist(rng);
    for (std::size_t i = 0; i < degree; ++i) {
      std::uniform_int_distribution<std::uint32_t> letter(1, static_cast<std::uint32_t>(ring.generators));
      w.letters.push_back(letter(rng));
    }
    out += NcPoly::monomial(ring, std::move(w), coeff_dist(rng));
  }
  return out;
}

}  // namespace egame
