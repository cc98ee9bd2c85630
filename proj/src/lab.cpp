#include "egame/lab.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace egame::lab {

namespace {

std::int64_t reduce(std::int64_t v, std::int64_t m) {
  if (m <= 0) return v;
  v %= m;
  return v < 0 ? v + m : v;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::kInvalidAction, what); }

Mat random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = normal(rng);
  }
  return m;
}

Mat random_orthogonal(std::size_t k, std::mt19937_64& rng) {
  if (k == 0) return Mat(0, 0);
  Eigen::HouseholderQR<Mat> qr(random_gaussian(k, k, rng));
  return qr.householderQ() * Mat::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
}

// Orthonormal basis of the column span.
Mat orthonormal_columns(const Mat& a, double tol = 1e-9) {
  if (a.cols() == 0 || a.rows() == 0) return Mat(a.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  qr.setThreshold(tol);
  const Eigen::Index rank = qr.rank();
  Mat q = qr.householderQ() * Mat::Identity(a.rows(), rank);
  return q;
}

Mat stacked_generators(const AffineAction& a, const std::vector<std::size_t>& gens, Vec* rhs) {
  const auto d = static_cast<Eigen::Index>(a.dim);
  Mat stack(d * static_cast<Eigen::Index>(gens.size()), d);
  if (rhs != nullptr) rhs->resize(stack.rows());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k) * d;
    stack.block(row, 0, d, d) = (*a.pi)[gens[k]] - Mat::Identity(d, d);
    if (rhs != nullptr) rhs->segment(row, d) = -a.b[gens[k]];
  }
  return stack;
}

void write_doubles(std::ostream& out, const double* data, std::size_t count, std::uint64_t& hash) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(data[i]);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    out.write(bytes, 8);
    for (char c : bytes) {
      hash ^= static_cast<unsigned char>(c);
      hash *= 0x100000001b3ULL;
    }
  }
}

void read_doubles(std::istream& in, double* data, std::size_t count, std::uint64_t& hash) {
  for (std::size_t i = 0; i < count; ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw Error(Errc::kIo, "binary array is truncated");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[k])) << (8 * k);
      hash ^= static_cast<unsigned char>(bytes[k]);
      hash *= 0x100000001b3ULL;
    }
    data[i] = std::bit_cast<double>(bits);
  }
}

}  // namespace

IntMat int_identity(std::size_t n) {
  IntMat m{n, std::vector<std::int64_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) m.a[i * n + i] = 1;
  return m;
}

IntMat int_mul(const IntMat& x, const IntMat& y, std::int64_t modulus) {
  if (x.n != y.n) throw Error(Errc::kDimensionMismatch, "matrix sizes differ");
  const std::size_t n = x.n;
  IntMat out{n, std::vector<std::int64_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t xik = x.a[i * n + k];
      if (xik == 0) continue;
      for (std::size_t j = 0; j < n; ++j) out.a[i * n + j] += xik * y.a[k * n + j];
    }
  }
  for (auto& v : out.a) v = reduce(v, modulus);
  return out;
}

FiniteGroupModel FiniteGroupModel::elementary(std::size_t n, std::int64_t modulus) {
  if (n < 2 || modulus < 2) throw Error(Errc::kInvalidArgument, "E(n, Z/m) needs n >= 2 and m >= 2");
  std::vector<IntMat> gens;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::int64_t r : {std::int64_t{1}, modulus - 1}) {
        IntMat e = int_identity(n);
        e.a[i * n + j] = r;
        if (std::find(gens.begin(), gens.end(), e) == gens.end()) gens.push_back(e);
      }
    }
  }
  FiniteGroupModel model;
  model.n_ = n;
  model.modulus_ = modulus;
  std::map<IntMat, std::size_t> seen;
  std::deque<std::size_t> queue;
  model.elements_.push_back(int_identity(n));
  seen.emplace(model.elements_[0], 0);
  queue.push_back(0);
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      IntMat y = int_mul(model.elements_[x], g, modulus);
      if (seen.count(y) != 0) continue;
      seen.emplace(y, model.elements_.size());
      queue.push_back(model.elements_.size());
      model.elements_.push_back(std::move(y));
    }
  }
  for (const auto& g : gens) model.generators_.push_back(seen.at(g));
  model.index();
  return model;
}

FiniteGroupModel FiniteGroupModel::from_elements(std::vector<IntMat> elements, std::vector<std::size_t> generators,
                                                 std::int64_t modulus, bool window) {
  if (elements.empty()) throw Error(Errc::kEmptyInput, "group model has no elements");
  FiniteGroupModel model;
  model.n_ = elements.front().n;
  model.modulus_ = modulus;
  model.partial_ = window;
  for (auto& e : elements) {
    if (e.n != model.n_ || e.a.size() != e.n * e.n) invalid("element matrices have inconsistent sizes");
    for (auto& v : e.a) v = reduce(v, modulus);
  }
  model.elements_ = std::move(elements);
  for (std::size_t g : generators) {
    if (g >= model.elements_.size()) invalid("generator index out of range");
  }
  model.generators_ = std::move(generators);
  model.index();
  if (!window) {
    for (std::size_t x = 0; x < model.size(); ++x) {
      for (std::size_t y = 0; y < model.size(); ++y) {
        if (!model.mul(x, y)) invalid("element table is not closed under products");
      }
    }
  }
  if (model.generated(model.generators_).size() != model.size()) invalid("generators do not generate the model");
  return model;
}

FiniteGroupModel FiniteGroupModel::integer_window(std::int64_t radius) {
  if (radius < 1) throw Error(Errc::kInvalidArgument, "window radius must be positive");
  std::vector<IntMat> elements;
  for (std::int64_t k = -radius; k <= radius; ++k) {
    IntMat e = int_identity(2);
    e.a[1] = k;
    elements.push_back(e);
  }
  auto at = [&](std::int64_t k) { return static_cast<std::size_t>(k + radius); };
  return from_elements(std::move(elements), {at(1), at(-1)}, 0, true);
}

void FiniteGroupModel::index() {
  lookup_.clear();
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!lookup_.emplace(elements_[i], i).second) invalid("duplicate group element");
  }
  auto id = lookup_.find(int_identity(n_));
  if (id == lookup_.end()) invalid("identity is missing from the model");
  identity_ = id->second;

  table_.clear();
  const std::size_t size = elements_.size();
  if (size <= 512) {
    table_.assign(size * size, -1);
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t y = 0; y < size; ++y) {
        auto it = lookup_.find(int_mul(elements_[x], elements_[y], modulus_));
        if (it != lookup_.end()) table_[x * size + y] = static_cast<std::int32_t>(it->second);
      }
    }
  }

  inverse_.assign(size, size);
  for (std::size_t x = 0; x < size; ++x) {
    if (partial_) {
      for (std::size_t y = 0; y < size; ++y) {
        if (mul(x, y) == identity_) {
          inverse_[x] = y;
          break;
        }
      }
    } else {
      // x^-1 = x^(k-1) where k is the order of x.
      std::size_t prev = identity_;
      std::size_t cur = x;
      for (std::size_t steps = 0; steps <= size && cur != identity_; ++steps) {
        auto next = mul(cur, x);
        if (!next) break;
        prev = cur;
        cur = *next;
      }
      if (cur == identity_) inverse_[x] = x == identity_ ? identity_ : prev;
    }
    if (inverse_[x] == size) invalid("element without inverse in the model");
  }
}

std::optional<std::size_t> FiniteGroupModel::find(const IntMat& m) const {
  if (m.n != n_) return std::nullopt;
  IntMat r = m;
  for (auto& v : r.a) v = reduce(v, modulus_);
  auto it = lookup_.find(r);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FiniteGroupModel::mul(std::size_t x, std::size_t y) const {
  if (!table_.empty()) {
    const std::int32_t v = table_[x * elements_.size() + y];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
  }
  return find(int_mul(elements_[x], elements_[y], modulus_));
}

std::vector<std::size_t> FiniteGroupModel::generated(const std::vector<std::size_t>& gens) const {
  std::vector<char> seen(size(), 0);
  std::deque<std::size_t> queue{identity_};
  seen[identity_] = 1;
  std::vector<std::size_t> steps;
  for (std::size_t g : gens) {
    steps.push_back(g);
    steps.push_back(inverse_[g]);
  }
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (std::size_t g : steps) {
      auto y = mul(x, g);
      if (y && seen[*y] == 0) {
        seen[*y] = 1;
        queue.push_back(*y);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (seen[i] != 0) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FiniteGroupModel::generating_subset(const std::vector<std::size_t>& subset) const {
  std::vector<std::size_t> chosen;
  std::vector<char> covered(size(), 0);
  covered[identity_] = 1;
  for (std::size_t s : subset) {
    if (covered[s] != 0) continue;
    chosen.push_back(s);
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t x : generated(chosen)) covered[x] = 1;
  }
  return chosen;
}

ValidationReport validate_action(const AffineAction& a, std::uint64_t seed, std::size_t random_pairs) {
  ValidationReport r;
  const FiniteGroupModel& g = *a.model;
  const auto d = static_cast<Eigen::Index>(a.dim);
  const auto& pi = *a.pi;
  if (pi.size() != g.size() || a.b.size() != g.size()) {
    r.failing = "element count";
    return r;
  }
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (pi[x].rows() != d || pi[x].cols() != d || a.b[x].size() != d) {
      r.failing = "dimensions";
      return r;
    }
  }

  std::mt19937_64 rng(seed);
  const bool probe = a.dim > 32;
  Mat probes = probe ? random_gaussian(a.dim, 3, rng) : Mat::Identity(d, d);
  if (probe) probes.colwise().normalize();

  for (std::size_t x = 0; x < g.size(); ++x) {
    const double e = (pi[x].transpose() * (pi[x] * probes) - probes).norm();
    r.orthogonality = std::max(r.orthogonality, e);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s : g.generators()) {
    for (std::size_t x = 0; x < g.size(); ++x) pairs.emplace_back(s, x);
  }
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  for (std::size_t k = 0; k < random_pairs; ++k) pairs.emplace_back(pick(rng), pick(rng));

  for (auto [x, y] : pairs) {
    auto xy = g.mul(x, y);
    if (!xy) continue;
    ++r.pairs;
    const double hom = (pi[*xy] * probes - pi[x] * (pi[y] * probes)).norm();
    r.homomorphism = std::max(r.homomorphism, hom);
    const double coc = (a.b[*xy] - pi[x] * a.b[y] - a.b[x]).norm();
    r.cocycle = std::max(r.cocycle, coc);
  }
  if (r.orthogonality > kValidateTol) {
    r.failing = "orthogonality";
  } else if (r.homomorphism > kValidateTol) {
    r.failing = "homomorphism";
  } else if (r.cocycle > kValidateTol) {
    r.failing = "cocycle identity";
  }
  r.ok = r.failing.empty();
  return r;
}

AffineAction make_action(ModelPtr model, std::shared_ptr<const std::vector<Mat>> pi, std::vector<Vec> b,
                         std::uint64_t seed) {
  if (!model || !pi) invalid("action needs a model and a representation");
  AffineAction a;
  a.dim = pi->empty() ? 0 : static_cast<std::size_t>(pi->front().rows());
  a.model = std::move(model);
  a.pi = std::move(pi);
  a.b = std::move(b);
  ValidationReport r = validate_action(a, seed);
  if (!r.ok) {
    std::ostringstream msg;
    msg << "action rejected: " << r.failing << " fails (orthogonality " << r.orthogonality << ", homomorphism "
        << r.homomorphism << ", cocycle " << r.cocycle << ")";
    invalid(msg.str());
  }
  return a;
}

std::shared_ptr<const std::vector<Mat>> build_representation(const FiniteGroupModel& model, RepKind kind,
                                                            std::uint64_t seed, std::size_t trivial_dim) {
  auto pi = std::make_shared<std::vector<Mat>>();
  const std::size_t size = model.size();
  if (kind == RepKind::kTrivial) {
    const auto d = static_cast<Eigen::Index>(trivial_dim);
    pi->assign(size, Mat::Identity(d, d));
    return pi;
  }
  if (model.partial()) throw Error(Errc::kInvalidArgument, "permutation representations need a closed model");
  const auto n = static_cast<Eigen::Index>(size);
  // Columns 1..n-1 of a Householder completion of the constant vector.
  Eigen::HouseholderQR<Mat> qr(Mat::Ones(n, 1));
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat basis = q.rightCols(n - 1);
  Mat rotation;
  if (kind == RepKind::kRandomOrthogonal) {
    std::mt19937_64 rng(seed);
    rotation = random_orthogonal(static_cast<std::size_t>(n - 1), rng);
  }
  pi->reserve(size);
  Mat moved(n, n - 1);
  for (std::size_t x = 0; x < size; ++x) {
    for (std::size_t h = 0; h < size; ++h) {
      moved.row(static_cast<Eigen::Index>(*model.mul(x, h))) = basis.row(static_cast<Eigen::Index>(h));
    }
    Mat p = basis.transpose() * moved;
    if (kind == RepKind::kRandomOrthogonal) p = rotation * p * rotation.transpose();
    pi->push_back(std::move(p));
  }
  return pi;
}

std::shared_ptr<const std::vector<Mat>> direct_sum(const std::vector<Mat>& pi1, const std::vector<Mat>& pi2) {
  if (pi1.size() != pi2.size()) throw Error(Errc::kDimensionMismatch, "representations of different models");
  auto out = std::make_shared<std::vector<Mat>>();
  out->reserve(pi1.size());
  for (std::size_t g = 0; g < pi1.size(); ++g) {
    const Eigen::Index d1 = pi1[g].rows();
    const Eigen::Index d2 = pi2[g].rows();
    Mat m = Mat::Zero(d1 + d2, d1 + d2);
    m.topLeftCorner(d1, d1) = pi1[g];
    m.bottomRightCorner(d2, d2) = pi2[g];
    out->push_back(std::move(m));
  }
  return out;
}

std::vector<Vec> coboundary(const std::vector<Mat>& pi, const Vec& v) {
  std::vector<Vec> b;
  b.reserve(pi.size());
  for (const auto& p : pi) b.push_back(v - p * v);
  return b;
}

AffineAction build_action(ModelPtr model, RepKind kind, std::uint64_t seed, std::optional<Vec> v) {
  auto pi = build_representation(*model, kind, seed);
  const std::size_t d = pi->empty() ? 0 : static_cast<std::size_t>(pi->front().rows());
  if (!v) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    v = random_gaussian(d, 1, rng).col(0);
  }
  if (static_cast<std::size_t>(v->size()) != d) throw Error(Errc::kDimensionMismatch, "coboundary vector has wrong size");
  auto b = coboundary(*pi, *v);
  return make_action(std::move(model), std::move(pi), std::move(b), seed);
}

double AffineSubspace::distance(const Vec& z) const {
  Vec r = z - point;
  if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
  return r.norm();
}

AffineSubspace make_subspace(Vec point, const Mat& directions) {
  AffineSubspace s;
  s.basis = orthonormal_columns(directions);
  s.point = std::move(point);
  return s;
}

Mat null_space(const Mat& a, double tol) {
  if (a.cols() == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

AffineSubspace fixed_affine_set(const AffineAction& a, const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw Error(Errc::kEmptyInput, "fixed set of an empty subset");
  const auto d = static_cast<Eigen::Index>(a.dim);
  std::vector<std::size_t> gens = a.model->generating_subset(subset);
  AffineSubspace out;
  if (gens.empty()) {
    out.point = Vec::Zero(d);
    out.basis = Mat::Identity(d, d);
    return out;
  }
  Vec rhs;
  Mat stack = stacked_generators(a, gens, &rhs);
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-9 * std::max(1.0, s(0));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const Mat& v = svd.matrixV();
  Vec coeff = svd.matrixU().leftCols(rank).transpose() * rhs;
  coeff.array() /= s.head(rank).array();
  Vec x = v.leftCols(rank) * coeff;
  if ((stack * x - rhs).norm() > kSolveTol * (1.0 + rhs.norm())) {
    out.empty = true;
    out.point = Vec::Zero(d);
    out.basis = Mat(d, 0);
    return out;
  }
  out.point = x;
  out.basis = v.rightCols(d - rank);
  return out;
}

Realizer distance_realizer(const AffineSubspace& a, const AffineSubspace& b) {
  if (a.empty || b.empty) throw Error(Errc::kEmptyInput, "distance to an empty subspace");
  if (a.ambient() != b.ambient()) throw Error(Errc::kDimensionMismatch, "subspaces live in different spaces");
  const Eigen::Index ka = a.basis.cols();
  const Eigen::Index kb = b.basis.cols();
  Mat k(static_cast<Eigen::Index>(a.ambient()), ka + kb);
  k << a.basis, -b.basis;
  Vec rhs = b.point - a.point;
  Vec sol = Vec::Zero(ka + kb);
  if (ka + kb > 0) {
    Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    sol = svd.solve(rhs);
  }
  Realizer r;
  r.xi = a.point + a.basis * sol.head(ka);
  r.eta = b.point + b.basis * sol.tail(kb);
  r.distance = (r.xi - r.eta).norm();
  return r;
}

double displacement(const AffineAction& a, const std::vector<std::size_t>& subset, const Vec& zeta) {
  if (subset.empty()) throw Error(Errc::kEmptyInput, "displacement over an empty subset");
  if (static_cast<std::size_t>(zeta.size()) != a.dim) throw Error(Errc::kDimensionMismatch, "point has wrong size");
  double best = 0;
  for (std::size_t g : subset) best = std::max(best, (a.apply(g, zeta) - zeta).norm());
  return best;
}

Mat invariant_vectors(const AffineAction& a) {
  return null_space(stacked_generators(a, a.model->generators(), nullptr));
}

ParallelogramReport parallelogram_uniqueness_check(const AffineAction& a, const AffineSubspace& A,
                                                   const AffineSubspace& B, std::uint64_t seed,
                                                   std::size_t starts) {
  ParallelogramReport rep;
  starts = std::max<std::size_t>(starts, 5);
  rep.hypothesis_ok = invariant_vectors(a).cols() == 0;
  const Realizer base = distance_realizer(A, B);
  rep.distance = base.distance;
  rep.starts = starts;

  std::mt19937_64 rng(seed);
  auto reparametrize = [&](const AffineSubspace& s) {
    AffineSubspace t = s;
    const auto k = static_cast<std::size_t>(s.basis.cols());
    if (k > 0) {
      t.point = s.point + s.basis * (3.0 * random_gaussian(k, 1, rng).col(0));
      t.basis = s.basis * random_orthogonal(k, rng);
    }
    return t;
  };
  for (std::size_t k = 1; k < starts; ++k) {
    Realizer r;
    if (k % 2 == 0) {
      Realizer swapped = distance_realizer(reparametrize(B), reparametrize(A));
      r = Realizer{swapped.distance, swapped.eta, swapped.xi};
    } else {
      r = distance_realizer(reparametrize(A), reparametrize(B));
    }
    rep.max_deviation = std::max({rep.max_deviation, (r.xi - base.xi).norm(), (r.eta - base.eta).norm()});
    const Vec mx = 0.5 * (r.xi + base.xi);
    const Vec my = 0.5 * (r.eta + base.eta);
    const double err = std::max({std::abs((mx - my).norm() - base.distance), A.distance(mx), B.distance(my)});
    rep.midpoint_error = std::max(rep.midpoint_error, err);
  }

  if (!rep.hypothesis_ok) {
    rep.message = "hypothesis failed: invariant vectors exist";
    // A direction shared by both parallel parts translates one realizer pair into another.
    Mat common = A.basis.cols() + B.basis.cols() > 0
                     ? null_space((Mat(A.basis.rows(), A.basis.cols() + B.basis.cols()) << A.basis, -B.basis).finished())
                     : Mat(0, 0);
    if (common.cols() > 0) {
      Vec u = A.basis * common.col(0).head(A.basis.cols());
      u.normalize();
      Realizer moved{base.distance, base.xi + u, base.eta + u};
      rep.counterexample = std::make_pair(base, moved);
      rep.max_deviation = std::max(rep.max_deviation, 1.0);
    }
    rep.pass = false;
    return rep;
  }
  rep.pass = rep.max_deviation <= kPassTol && rep.midpoint_error <= kSolveTol;
  rep.message = rep.pass ? "realizer unique" : "realizers disagree";
  return rep;
}

TraceReport upgrade_trace(const AffineAction& a, const std::vector<StageSubsets>& stages,
                          const std::vector<std::size_t>& w_elements, const Vec& xi, const Vec& eta) {
  if (static_cast<std::size_t>(xi.size()) != a.dim || static_cast<std::size_t>(eta.size()) != a.dim) {
    throw Error(Errc::kDimensionMismatch, "realizer pair has wrong size");
  }
  TraceReport rep;
  rep.distance = (xi - eta).norm();
  rep.pass = true;
  for (const auto& s : stages) {
    TraceStage t{s.stage, s.h1.empty() ? 0.0 : displacement(a, s.h1, xi),
                 s.h2.empty() ? 0.0 : displacement(a, s.h2, eta), false};
    t.pass = t.disp_h1_xi <= kPassTol && t.disp_h2_eta <= kPassTol;
    rep.pass = rep.pass && t.pass;
    rep.stages.push_back(t);
  }
  for (std::size_t w : w_elements) {
    const double gap = (a.apply(w, xi) - eta).norm();
    rep.w_gaps.push_back(gap);
    rep.pass = rep.pass && gap <= kPassTol;
  }
  return rep;
}

std::vector<std::size_t> pattern_elements(const FiniteGroupModel& model, const PatternSubgroup& p) {
  if (model.matrix_n() != p.n()) throw Error(Errc::kDimensionMismatch, "pattern size differs from the model");
  std::vector<std::size_t> gens;
  for (auto [i, j] : p.generators().list()) {
    IntMat e = int_identity(p.n());
    e.a[i * p.n() + j] = 1;
    auto idx = model.find(e);
    if (!idx) throw Error(Errc::kInvalidArgument, "elementary matrix missing from the model");
    gens.push_back(*idx);
  }
  return model.generated(gens);
}

std::size_t word_element(const FiniteGroupModel& model, const ElemWord& w) {
  if (model.modulus() < 2) throw Error(Errc::kInvalidArgument, "words reduce only into models over Z/m");
  RingSpec ring;
  ring.modulus = model.modulus();
  MatR m = w.eval(model.matrix_n(), ring);
  IntMat x = int_identity(model.matrix_n());
  for (std::size_t r = 0; r < x.n; ++r) {
    for (std::size_t c = 0; c < x.n; ++c) {
      auto v = m(r, c).as_constant();
      if (!v) throw Error(Errc::kInvalidArgument, "word has non-constant entries");
      mpz_class red = *v % model.modulus();
      x.a[r * x.n + c] = reduce(red.get_si(), model.modulus());
    }
  }
  auto idx = model.find(x);
  if (!idx) throw Error(Errc::kInvalidArgument, "word is not an element of the model");
  return *idx;
}

TraceReport trace_strategy(const AffineAction& a) {
  const FiniteGroupModel& model = *a.model;
  RingSpec ring;
  ring.modulus = model.modulus();
  StrategyRun run = run_standard_strategy(model.matrix_n(), ring);
  std::vector<StageSubsets> stages;
  for (std::size_t k = 0; k <= run.state.stage(); ++k) {
    auto [h1, h2] = run.state.stage_patterns(k);
    stages.push_back({k, pattern_elements(model, h1), pattern_elements(model, h2)});
  }
  std::vector<std::size_t> w_elements;
  for (const auto& r : run.state.history()) {
    if (r.move.kind != MoveKind::kTypeIIInner) continue;
    for (const auto& literal : r.move.payload) {
      auto g = resolve_conjugator(literal, model.matrix_n(), ring);
      if (const auto* word = std::get_if<ElemWord>(&g.value)) w_elements.push_back(word_element(model, *word));
    }
  }
  AffineSubspace fix_m = fixed_affine_set(a, stages.front().h1);
  AffineSubspace fix_l = fixed_affine_set(a, stages.front().h2);
  Realizer r = distance_realizer(fix_m, fix_l);
  return upgrade_trace(a, stages, w_elements, r.xi, r.eta);
}

double cos_angle(const AffineSubspace& k1, const AffineSubspace& k2) {
  if (k1.empty || k2.empty) throw Error(Errc::kEmptyInput, "angle with an empty subspace");
  if (k1.ambient() != k2.ambient()) throw Error(Errc::kDimensionMismatch, "subspaces live in different spaces");
  const Mat& u1 = k1.basis;
  const Mat& u2 = k2.basis;
  if (u1.cols() == 0 || u2.cols() == 0) return 0.0;
  Mat joint(u1.rows(), u1.cols() + u2.cols());
  joint << u1, -u2;
  Mat kernel = null_space(joint);
  Mat j = orthonormal_columns(u1 * kernel.topRows(u1.cols()));
  auto project = [&](const Mat& u) {
    Mat p = u;
    if (j.cols() > 0) p -= j * (j.transpose() * u);
    return orthonormal_columns(p);
  };
  Mat p1 = project(u1);
  Mat p2 = project(u2);
  if (p1.cols() == 0 || p2.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(p1.transpose() * p2);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

Ball chebyshev_center(const std::vector<Vec>& points) {
  if (points.empty()) throw Error(Errc::kEmptyInput, "enclosing ball of an empty set");
  const Eigen::Index d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) throw Error(Errc::kDimensionMismatch, "points have different dimensions");
  }
  double scale = 0;
  for (const auto& p : points) scale = std::max(scale, (p - points.front()).norm());
  const double eps = 1e-13 * (1.0 + scale);

  Vec c = points.front();
  std::size_t far = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if ((points[i] - c).squaredNorm() > (points[far] - c).squaredNorm()) far = i;
  }
  std::vector<std::size_t> support{far};
  const std::size_t limit = 50 * (points.size() + static_cast<std::size_t>(d)) + 1000;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    // Circumcenter of the support within its affine hull.
    const Vec& t0 = points[support.front()];
    const auto k = static_cast<Eigen::Index>(support.size()) - 1;
    Mat diffs(d, k);
    Vec half(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      diffs.col(i) = points[support[static_cast<std::size_t>(i + 1)]] - t0;
      half(i) = 0.5 * diffs.col(i).squaredNorm();
    }
    Vec mu = k > 0 ? Vec((diffs.transpose() * diffs).colPivHouseholderQr().solve(half)) : Vec(0);
    Vec target = t0 + diffs * mu;
    Vec dir = target - c;

    if (dir.norm() <= eps) {
      // c is the circumcenter; optimal once it lies in the convex hull of the support.
      Eigen::Index worst = -1;
      double worst_value = -1e-12;
      const double lambda0 = 1.0 - mu.sum();
      if (lambda0 < worst_value) {
        worst = 0;
        worst_value = lambda0;
      }
      for (Eigen::Index i = 0; i < k; ++i) {
        if (mu(i) < worst_value) {
          worst = i + 1;
          worst_value = mu(i);
        }
      }
      if (worst < 0) break;
      support.erase(support.begin() + worst);
      continue;
    }

    const double r2 = (t0 - c).squaredNorm();
    double step = 1.0;
    std::optional<std::size_t> stopper;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (std::find(support.begin(), support.end(), p) != support.end()) continue;
      const double denom = 2.0 * (t0 - points[p]).dot(dir);
      if (denom <= 1e-300) continue;
      const double t = std::max(0.0, (r2 - (points[p] - c).squaredNorm()) / denom);
      if (t < step) {
        step = t;
        stopper = p;
      }
    }
    c += step * dir;
    if (stopper) support.push_back(*stopper);
  }
  double radius = 0;
  for (const auto& p : points) radius = std::max(radius, (p - c).norm());
  return {c, radius};
}

std::vector<Vec> orbit(const AffineAction& a, const Vec& zeta) {
  std::vector<Vec> out;
  out.reserve(a.model->size());
  for (std::size_t g = 0; g < a.model->size(); ++g) out.push_back(a.apply(g, zeta));
  return out;
}

SplitResult split_trivial_part(const AffineAction& a) {
  const auto d = static_cast<Eigen::Index>(a.dim);
  Mat v = invariant_vectors(a);
  if (v.rows() != d) v = Mat(d, 0);
  Mat w = v.cols() == 0 ? Mat(Mat::Identity(d, d)) : null_space(v.transpose());
  if (w.rows() != d) w = Mat(d, 0);

  auto project = [&](const Mat& basis) {
    auto pi = std::make_shared<std::vector<Mat>>();
    std::vector<Vec> b;
    for (std::size_t g = 0; g < a.model->size(); ++g) {
      pi->push_back(basis.transpose() * (*a.pi)[g] * basis);
      b.push_back(basis.transpose() * a.b[g]);
    }
    return make_action(a.model, std::move(pi), std::move(b));
  };
  SplitResult out{project(v), project(w), v, w, 0.0};
  const FiniteGroupModel& g = *a.model;
  for (std::size_t s : g.generators()) {
    for (std::size_t x = 0; x < g.size(); ++x) {
      auto sx = g.mul(s, x);
      if (!sx) continue;
      const double r = (out.trivial.b[*sx] - out.trivial.b[s] - out.trivial.b[x]).norm();
      out.additivity_residual = std::max(out.additivity_residual, r);
    }
  }
  if (out.additivity_residual > kValidateTol) invalid("trivial part of the cocycle is not additive");
  return out;
}

void save_bundle(const AffineAction& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const FiniteGroupModel& g = *a.model;
  auto open = [&](const char* name, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(dir / name, mode | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("elements.txt");
    out << g.matrix_n() << ' ' << g.modulus() << ' ' << (g.partial() ? 1 : 0) << ' ' << g.size() << '\n';
    for (const auto& e : g.elements()) {
      for (std::size_t i = 0; i < e.a.size(); ++i) out << (i == 0 ? "" : " ") << e.a[i];
      out << '\n';
    }
  }
  {
    auto out = open("generators.txt");
    for (std::size_t i = 0; i < g.generators().size(); ++i) out << (i == 0 ? "" : " ") << g.generators()[i];
    out << '\n';
  }
  std::uint64_t pi_hash = 0xcbf29ce484222325ULL;
  std::uint64_t b_hash = 0xcbf29ce484222325ULL;
  {
    auto out = open("pi.bin", std::ios::binary);
    for (const auto& p : *a.pi) write_doubles(out, p.data(), static_cast<std::size_t>(p.size()), pi_hash);
  }
  {
    auto out = open("b.bin", std::ios::binary);
    for (const auto& b : a.b) write_doubles(out, b.data(), static_cast<std::size_t>(b.size()), b_hash);
  }
  auto out = open("manifest.txt");
  out << "egame-action 1\nelements " << g.size() << "\ndim " << a.dim << "\nmatrix_n " << g.matrix_n()
      << "\nmodulus " << g.modulus() << "\nwindow " << (g.partial() ? 1 : 0) << "\npi_fnv " << hex64(pi_hash)
      << "\nb_fnv " << hex64(b_hash) << "\n";
}

AffineAction load_bundle(const std::filesystem::path& dir) {
  auto open = [&](const char* name, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(dir / name, mode);
    if (!in) throw Error(Errc::kIo, "cannot read " + (dir / name).string());
    return in;
  };
  std::map<std::string, std::string> manifest;
  {
    auto in = open("manifest.txt");
    std::string line;
    std::getline(in, line);
    if (line != "egame-action 1") throw Error(Errc::kParse, "not an action bundle manifest");
    while (std::getline(in, line)) {
      auto sp = line.find(' ');
      if (sp != std::string::npos) manifest[line.substr(0, sp)] = line.substr(sp + 1);
    }
  }
  auto number = [&](const std::string& key) {
    auto it = manifest.find(key);
    if (it == manifest.end()) throw Error(Errc::kParse, "manifest lacks '" + key + "'");
    return std::stoll(it->second);
  };
  const auto size = static_cast<std::size_t>(number("elements"));
  const auto dim = static_cast<std::size_t>(number("dim"));
  const auto n = static_cast<std::size_t>(number("matrix_n"));
  const std::int64_t modulus = number("modulus");
  const bool window = number("window") != 0;

  std::vector<IntMat> elements;
  {
    auto in = open("elements.txt");
    std::size_t hn = 0;
    std::size_t hsize = 0;
    std::int64_t hm = 0;
    int hw = 0;
    if (!(in >> hn >> hm >> hw >> hsize) || hn != n || hm != modulus || hsize != size) {
      throw Error(Errc::kParse, "elements.txt header disagrees with the manifest");
    }
    for (std::size_t e = 0; e < size; ++e) {
      IntMat m{n, std::vector<std::int64_t>(n * n)};
      for (auto& v : m.a) {
        if (!(in >> v)) throw Error(Errc::kParse, "elements.txt is truncated");
      }
      elements.push_back(std::move(m));
    }
  }
  std::vector<std::size_t> gens;
  {
    auto in = open("generators.txt");
    std::size_t g = 0;
    while (in >> g) gens.push_back(g);
  }
  auto model = std::make_shared<const FiniteGroupModel>(
      FiniteGroupModel::from_elements(std::move(elements), std::move(gens), modulus, window));

  const auto d = static_cast<Eigen::Index>(dim);
  auto pi = std::make_shared<std::vector<Mat>>(size, Mat(d, d));
  std::vector<Vec> b(size, Vec(d));
  std::uint64_t pi_hash = 0xcbf29ce484222325ULL;
  std::uint64_t b_hash = 0xcbf29ce484222325ULL;
  {
    auto in = open("pi.bin", std::ios::binary);
    for (auto& p : *pi) read_doubles(in, p.data(), dim * dim, pi_hash);
  }
  {
    auto in = open("b.bin", std::ios::binary);
    for (auto& v : b) read_doubles(in, v.data(), dim, b_hash);
  }
  if (hex64(pi_hash) != manifest["pi_fnv"] || hex64(b_hash) != manifest["b_fnv"]) {
    throw Error(Errc::kIo, "bundle digest mismatch");
  }
  return make_action(std::move(model), std::move(pi), std::move(b));
}

}  // namespace egame::lab
