#include "egame/matrix.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "egame/error.hpp"

namespace egame {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

std::size_t parse_index(std::string_view s) {
  s = trim(s);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::kParse, "bad index '" + std::string(s) + "'");
  }
  return value;
}

void require_compatible(const MatR& a, const MatR& b) {
  if (a.n() != b.n()) {
    throw Error(Errc::kDimensionMismatch, "matrix sizes differ: " + std::to_string(a.n()) +
                                              " vs " + std::to_string(b.n()));
  }
  if (!(a.ring() == b.ring())) {
    throw Error(Errc::kRingMismatch,
                "matrix rings differ: " + a.ring().to_string() + " vs " + b.ring().to_string());
  }
}

bool is_minus_one(const NcPoly& p) { return (-p).is_one(); }

void check_elementary_indices(std::size_t n, std::size_t i, std::size_t j) {
  if (i == j) {
    throw Error(Errc::kNotElementary, "elementary matrix needs i != j (got " + std::to_string(i) + ")");
  }
  if (i < 1 || j < 1 || i > n || j > n) {
    throw Error(Errc::kInvalidIndex, "elementary index (" + std::to_string(i) + "," +
                                         std::to_string(j) + ") out of range for n=" + std::to_string(n));
  }
}

}  // namespace

MatR::MatR(std::size_t n, RingSpec ring)
    : n_(n), ring_(std::move(ring)), entries_(n * n, NcPoly(ring_)) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "matrix size must be >= 1");
}

MatR MatR::identity(std::size_t n, const RingSpec& ring) {
  MatR m(n, ring);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = NcPoly::one(ring);
  return m;
}

MatR MatR::parse(const RingSpec& ring, std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw Error(Errc::kParse, "matrix literal must be enclosed in [ ]");
  }
  auto rows = split(text.substr(1, text.size() - 2), ';');
  const std::size_t n = rows.size();
  MatR m(n, ring);
  for (std::size_t r = 0; r < n; ++r) {
    auto cells = split(rows[r], ',');
    if (cells.size() != n) {
      throw Error(Errc::kParse, "matrix literal is not square: row " + std::to_string(r + 1) +
                                    " has " + std::to_string(cells.size()) + " entries");
    }
    for (std::size_t c = 0; c < n; ++c) m(r, c) = NcPoly::parse(ring, trim(cells[c]));
  }
  return m;
}

bool MatR::is_identity() const {
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) {
      const NcPoly& e = (*this)(r, c);
      if (r == c ? !e.is_one() : !e.is_zero()) return false;
    }
  }
  return true;
}

std::string MatR::to_string() const {
  std::string out = "[";
  for (std::size_t r = 0; r < n_; ++r) {
    if (r > 0) out += "; ";
    for (std::size_t c = 0; c < n_; ++c) {
      if (c > 0) out += ", ";
      out += (*this)(r, c).to_string();
    }
  }
  return out + "]";
}

MatR operator*(const MatR& a, const MatR& b) {
  require_compatible(a, b);
  const std::size_t n = a.n();
  MatR out(n, a.ring());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const NcPoly& left = a(i, j);
      if (left.is_zero()) continue;
      for (std::size_t k = 0; k < n; ++k) {
        const NcPoly& right = b(j, k);
        if (right.is_zero()) continue;
        out(i, k) += left * right;
      }
    }
  }
  return out;
}

MatR mat_mul(const MatR& a, const MatR& b) { return a * b; }

MatR elem_matrix(std::size_t n, std::size_t i, std::size_t j, const NcPoly& r) {
  check_elementary_indices(n, i, j);
  MatR m = MatR::identity(n, r.ring());
  m(i - 1, j - 1) = r;
  return m;
}

ElemWord::ElemWord(std::vector<ElemFactor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.i == f.j) throw Error(Errc::kNotElementary, "elementary factor with i == j");
  }
}

ElemWord ElemWord::parse(const RingSpec& ring, std::string_view text) {
  text = trim(text);
  std::vector<ElemFactor> factors;
  if (text.empty() || text == "I") return ElemWord{};
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    if (text.compare(pos, 2, "E(") != 0) {
      throw Error(Errc::kParse, "expected 'E(' at offset " + std::to_string(pos) + " in '" +
                                    std::string(text) + "'");
    }
    std::size_t open = pos + 1;
    int depth = 0;
    std::size_t close = open;
    for (; close < text.size(); ++close) {
      if (text[close] == '(') ++depth;
      if (text[close] == ')' && --depth == 0) break;
    }
    if (close >= text.size()) throw Error(Errc::kParse, "unbalanced parentheses in elementary word");
    std::string_view body = text.substr(open + 1, close - open - 1);
    auto semi = body.find(';');
    if (semi == std::string_view::npos) throw Error(Errc::kParse, "expected ';' in E(i,j;r)");
    auto indices = split(body.substr(0, semi), ',');
    if (indices.size() != 2) throw Error(Errc::kParse, "expected two indices in E(i,j;r)");
    ElemFactor f{parse_index(indices[0]), parse_index(indices[1]),
                 NcPoly::parse(ring, body.substr(semi + 1))};
    if (f.i == 0 || f.j == 0) throw Error(Errc::kInvalidIndex, "elementary indices are 1-based");
    if (f.i == f.j) throw Error(Errc::kNotElementary, "elementary factor with i == j");
    factors.push_back(std::move(f));
    pos = close + 1;
  }
  return ElemWord(std::move(factors));
}

MatR ElemWord::eval(std::size_t n, const RingSpec& ring) const {
  MatR out = MatR::identity(n, ring);
  for (const auto& f : factors_) {
    if (!(f.r.ring() == ring)) {
      throw Error(Errc::kRingMismatch, "elementary factor ring " + f.r.ring().to_string() +
                                           " differs from " + ring.to_string());
    }
    out = out * elem_matrix(n, f.i, f.j, f.r);
  }
  return out;
}

ElemWord ElemWord::inverse() const {
  std::vector<ElemFactor> inv;
  inv.reserve(factors_.size());
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    inv.push_back(ElemFactor{it->i, it->j, -it->r});
  }
  return ElemWord(std::move(inv));
}

ElemWord ElemWord::operator*(const ElemWord& other) const {
  std::vector<ElemFactor> joined = factors_;
  joined.insert(joined.end(), other.factors_.begin(), other.factors_.end());
  return ElemWord(std::move(joined));
}

std::string ElemWord::to_string() const {
  if (factors_.empty()) return "I";
  std::string out;
  for (const auto& f : factors_) {
    if (!out.empty()) out += " ";
    out += "E(" + std::to_string(f.i) + "," + std::to_string(f.j) + ";" + f.r.to_string() + ")";
  }
  return out;
}

MatR elem_word_eval(const ElemWord& w, std::size_t n, const RingSpec& ring) { return w.eval(n, ring); }
ElemWord elem_word_inverse(const ElemWord& w) { return w.inverse(); }

SignedPermutation SignedPermutation::identity(std::size_t n) {
  SignedPermutation p;
  p.image.resize(n);
  p.sign.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) p.image[i] = i;
  return p;
}

std::optional<SignedPermutation> SignedPermutation::recognize(const MatR& m) {
  const std::size_t n = m.n();
  SignedPermutation p;
  p.image.assign(n, n);
  p.sign.assign(n, 0);
  std::vector<bool> row_used(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const NcPoly& e = m(r, c);
      if (e.is_zero()) continue;
      int s = 0;
      if (e.is_one()) {
        s = 1;
      } else if (is_minus_one(e)) {
        s = -1;
      } else {
        return std::nullopt;
      }
      if (p.image[c] != n || row_used[r]) return std::nullopt;
      p.image[c] = r;
      p.sign[c] = s;
      row_used[r] = true;
    }
    if (p.image[c] == n) return std::nullopt;
  }
  return p;
}

SignedPermutation SignedPermutation::parse(std::string_view text) {
  auto parts = split(trim(text), ',');
  SignedPermutation p;
  const std::size_t n = parts.size();
  std::vector<bool> used(n, false);
  for (auto part : parts) {
    part = trim(part);
    int s = 1;
    if (!part.empty() && (part.front() == '-' || part.front() == '+')) {
      s = part.front() == '-' ? -1 : 1;
      part.remove_prefix(1);
    }
    std::size_t row = parse_index(part);
    if (row < 1 || row > n || used[row - 1]) {
      throw Error(Errc::kParse, "bad signed permutation '" + std::string(text) + "'");
    }
    used[row - 1] = true;
    p.image.push_back(row - 1);
    p.sign.push_back(s);
  }
  return p;
}

MatR SignedPermutation::to_matrix(const RingSpec& ring) const {
  MatR m(n(), ring);
  for (std::size_t c = 0; c < n(); ++c) m(image[c], c) = NcPoly::constant(ring, sign[c]);
  return m;
}

SignedPermutation SignedPermutation::inverse() const {
  SignedPermutation inv;
  inv.image.resize(n());
  inv.sign.resize(n());
  for (std::size_t c = 0; c < n(); ++c) {
    inv.image[image[c]] = c;
    inv.sign[image[c]] = sign[c];
  }
  return inv;
}

std::string SignedPermutation::to_string() const {
  std::string out;
  for (std::size_t c = 0; c < n(); ++c) {
    if (c > 0) out += ",";
    if (sign[c] < 0) out += "-";
    out += std::to_string(image[c] + 1);
  }
  return out;
}

InvertibleMatrix InvertibleMatrix::from_word(const ElemWord& w, std::size_t n, const RingSpec& ring) {
  return InvertibleMatrix(w.eval(n, ring), w.inverse().eval(n, ring));
}

InvertibleMatrix InvertibleMatrix::from_signed_permutation(const SignedPermutation& p,
                                                           const RingSpec& ring) {
  return InvertibleMatrix(p.to_matrix(ring), p.inverse().to_matrix(ring));
}

InvertibleMatrix InvertibleMatrix::from_matrix(const MatR& m) {
  if (auto p = SignedPermutation::recognize(m)) return from_signed_permutation(*p, m.ring());
  // identity plus at most one off-diagonal entry
  std::optional<std::pair<std::size_t, std::size_t>> spot;
  bool elementary = true;
  for (std::size_t r = 0; r < m.n() && elementary; ++r) {
    for (std::size_t c = 0; c < m.n(); ++c) {
      const NcPoly& e = m(r, c);
      if (r == c) {
        if (!e.is_one()) elementary = false;
      } else if (!e.is_zero()) {
        if (spot) elementary = false;
        spot = {r, c};
      }
    }
  }
  if (elementary && spot) {
    ElemWord w({ElemFactor{spot->first + 1, spot->second + 1, m(spot->first, spot->second)}});
    return from_word(w, m.n(), m.ring());
  }
  throw Error(Errc::kNoInverseWitness,
              "no inverse witness: supply an elementary word or a signed permutation");
}

MatR commutator(const InvertibleMatrix& a, const InvertibleMatrix& b) {
  return a.value() * b.value() * a.inverse() * b.inverse();
}

MatR commutator(const MatR& a, const MatR& b) {
  return commutator(InvertibleMatrix::from_matrix(a), InvertibleMatrix::from_matrix(b));
}

MatR conjugate(const MatR& g, const MatR& ginv, const MatR& a) {
  require_compatible(g, ginv);
  require_compatible(g, a);
  if (!(g * ginv).is_identity() || !(ginv * g).is_identity()) {
    throw Error(Errc::kNotInverse, "conjugate: supplied inverse is not a two-sided inverse");
  }
  return g * a * ginv;
}

bool verify_sharp(std::size_t n, std::size_t i, std::size_t j, std::size_t k, const NcPoly& r1,
                  const NcPoly& r2) {
  if (i == j || j == k || i == k) {
    throw Error(Errc::kInvalidIndex, "commutator relation needs pairwise distinct indices");
  }
  check_elementary_indices(n, i, j);
  check_elementary_indices(n, j, k);
  const RingSpec& ring = r1.ring();
  auto a = InvertibleMatrix::from_word(ElemWord({ElemFactor{i, j, r1}}), n, ring);
  auto b = InvertibleMatrix::from_word(ElemWord({ElemFactor{j, k, r2}}), n, ring);
  return commutator(a, b) == elem_matrix(n, i, k, r1 * r2);
}

ElemWord end_swap_word(std::size_t n, const RingSpec& ring) {
  if (n < 3) throw Error(Errc::kInvalidArgument, "the end-swap word needs n >= 3");
  const NcPoly one = NcPoly::one(ring);
  const NcPoly minus_one = -one;
  ElemWord rotate_tail({ElemFactor{n - 1, n, one}, ElemFactor{n, n - 1, minus_one},
                        ElemFactor{n - 1, n, one}});
  ElemWord rotate_ends({ElemFactor{1, n, one}, ElemFactor{n, 1, minus_one}, ElemFactor{1, n, one}});
  return rotate_tail * rotate_tail * rotate_ends;
}

MatR end_swap_matrix(std::size_t n, const RingSpec& ring) {
  if (n < 3) throw Error(Errc::kInvalidArgument, "the end-swap matrix needs n >= 3");
  MatR m(n, ring);
  m(0, n - 1) = NcPoly::one(ring);
  m(n - 1, 0) = NcPoly::one(ring);
  for (std::size_t d = 1; d + 1 < n; ++d) {
    m(d, d) = d + 2 == n ? -NcPoly::one(ring) : NcPoly::one(ring);
  }
  return m;
}

}  // namespace egame
