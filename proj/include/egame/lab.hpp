#pragma once

// Finite-dimensional affine isometric actions of finite groups (and finite
// windows of Z) with the fixed-set, realizer, angle and enclosing-ball
// computations used to check the upgrade argument numerically.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "egame/game.hpp"

namespace egame::lab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kValidateTol = 1e-10;
inline constexpr double kSolveTol = 1e-8;
inline constexpr double kPassTol = 1e-7;

// Square integer matrix, entries reduced to [0, m) when m > 0.
struct IntMat {
  std::size_t n = 0;
  std::vector<std::int64_t> a;

  std::int64_t operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
  friend bool operator==(const IntMat&, const IntMat&) = default;
  friend auto operator<=>(const IntMat&, const IntMat&) = default;
};

IntMat int_identity(std::size_t n);
IntMat int_mul(const IntMat& x, const IntMat& y, std::int64_t modulus);

// Group elements as integer matrices mod m (m = 0: over Z). A "window" model
// is a finite symmetric piece of an infinite group: products leaving the
// window are undefined and skipped by every check.
class FiniteGroupModel {
 public:
  // E(n, Z/m) generated by the e_ij^{+-1}.
  static FiniteGroupModel elementary(std::size_t n, std::int64_t modulus);
  // Explicit table; throws Errc::kInvalidAction when the generators do not
  // generate, or (unless `window`) when not closed under products.
  static FiniteGroupModel from_elements(std::vector<IntMat> elements, std::vector<std::size_t> generators,
                                        std::int64_t modulus, bool window = false);
  // {[[1,k],[0,1]] : |k| <= radius} inside Z, generated by k = +-1.
  static FiniteGroupModel integer_window(std::int64_t radius);

  std::size_t size() const { return elements_.size(); }
  std::size_t matrix_n() const { return n_; }
  std::int64_t modulus() const { return modulus_; }
  bool partial() const { return partial_; }
  std::size_t identity() const { return identity_; }
  const IntMat& element(std::size_t i) const { return elements_[i]; }
  const std::vector<IntMat>& elements() const { return elements_; }
  const std::vector<std::size_t>& generators() const { return generators_; }

  std::optional<std::size_t> find(const IntMat& m) const;
  std::optional<std::size_t> mul(std::size_t x, std::size_t y) const;
  std::size_t inverse(std::size_t x) const { return inverse_[x]; }

  // Elements of the subgroup generated by `gens` (within the window).
  std::vector<std::size_t> generated(const std::vector<std::size_t>& gens) const;
  // A small subset generating the same subgroup as `subset`.
  std::vector<std::size_t> generating_subset(const std::vector<std::size_t>& subset) const;

 private:
  FiniteGroupModel() = default;
  void index();

  std::size_t n_ = 0;
  std::int64_t modulus_ = 0;
  bool partial_ = false;
  std::size_t identity_ = 0;
  std::vector<IntMat> elements_;
  std::vector<std::size_t> generators_;
  std::vector<std::size_t> inverse_;
  std::map<IntMat, std::size_t> lookup_;
  std::vector<std::int32_t> table_;  // dense product table for small models, -1 = undefined
};

using ModelPtr = std::shared_ptr<const FiniteGroupModel>;

// alpha(g) z = pi(g) z + b(g). The representation is shared between actions
// that only differ in the cocycle.
struct AffineAction {
  ModelPtr model;
  std::size_t dim = 0;
  std::shared_ptr<const std::vector<Mat>> pi;
  std::vector<Vec> b;

  Vec apply(std::size_t g, const Vec& z) const { return (*pi)[g] * z + b[g]; }
};

struct ValidationReport {
  double orthogonality = 0;
  double homomorphism = 0;
  double cocycle = 0;
  std::size_t pairs = 0;
  bool ok = false;
  std::string failing;  // name of the first identity above tolerance
};

// Orthogonality, homomorphism and cocycle identity over all (generator,
// element) pairs plus `random_pairs` seeded pairs. Above 32 dimensions the
// matrix identities are checked on seeded probe vectors.
ValidationReport validate_action(const AffineAction& a, std::uint64_t seed, std::size_t random_pairs = 500);

// Validates and throws Errc::kInvalidAction naming the failing identity.
AffineAction make_action(ModelPtr model, std::shared_ptr<const std::vector<Mat>> pi, std::vector<Vec> b,
                         std::uint64_t seed = 0);

enum class RepKind { kTrivial, kPermutationMinusInvariants, kRandomOrthogonal };

// Left-regular permutation representation with the constant vector removed
// (d = |G| - 1); kRandomOrthogonal is the same representation in a seeded
// random orthonormal basis. kTrivial acts by the identity on R^dim.
std::shared_ptr<const std::vector<Mat>> build_representation(const FiniteGroupModel& model, RepKind kind,
                                                            std::uint64_t seed, std::size_t trivial_dim = 1);

// Block-diagonal pi1 (+) pi2 over the same model.
std::shared_ptr<const std::vector<Mat>> direct_sum(const std::vector<Mat>& pi1, const std::vector<Mat>& pi2);

// b(g) = v - pi(g) v.
std::vector<Vec> coboundary(const std::vector<Mat>& pi, const Vec& v);

// Coboundary action; v is drawn from the seed when not supplied.
AffineAction build_action(ModelPtr model, RepKind kind, std::uint64_t seed, std::optional<Vec> v = std::nullopt);

struct AffineSubspace {
  Vec point;
  Mat basis;  // orthonormal columns
  bool empty = false;

  std::size_t ambient() const { return static_cast<std::size_t>(point.size()); }
  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
  // Distance from z to the subspace.
  double distance(const Vec& z) const;
};

AffineSubspace make_subspace(Vec point, const Mat& directions);

// Orthonormal basis of the kernel of `a` (singular values <= tol * max(1, s_max)).
Mat null_space(const Mat& a, double tol = 1e-9);

// Fixed points of the subgroup generated by `subset`.
AffineSubspace fixed_affine_set(const AffineAction& a, const std::vector<std::size_t>& subset);

struct Realizer {
  double distance = 0;
  Vec xi;
  Vec eta;
};

// Minimum-norm least-squares solution of min |(pA + UA s) - (pB + UB t)|.
Realizer distance_realizer(const AffineSubspace& a, const AffineSubspace& b);

// Largest max_g |alpha(g) z - z| over the subset.
double displacement(const AffineAction& a, const std::vector<std::size_t>& subset, const Vec& zeta);

// Kernel of the stacked pi(s) - I over the model's generators.
Mat invariant_vectors(const AffineAction& a);

struct ParallelogramReport {
  bool hypothesis_ok = false;
  double distance = 0;
  std::size_t starts = 0;
  double max_deviation = 0;
  double midpoint_error = 0;
  bool pass = false;
  std::string message;
  // Two distinct realizer pairs when the hypothesis fails.
  std::optional<std::pair<Realizer, Realizer>> counterexample;
};

ParallelogramReport parallelogram_uniqueness_check(const AffineAction& a, const AffineSubspace& A,
                                                   const AffineSubspace& B, std::uint64_t seed,
                                                   std::size_t starts = 6);

struct StageSubsets {
  std::size_t stage = 0;
  std::vector<std::size_t> h1;
  std::vector<std::size_t> h2;
};

struct TraceStage {
  std::size_t stage = 0;
  double disp_h1_xi = 0;
  double disp_h2_eta = 0;
  bool pass = false;
};

struct TraceReport {
  std::vector<TraceStage> stages;
  std::vector<double> w_gaps;  // |alpha(w) xi - eta| per type II conjugator
  double distance = 0;
  bool pass = false;
};

TraceReport upgrade_trace(const AffineAction& a, const std::vector<StageSubsets>& stages,
                          const std::vector<std::size_t>& w_elements, const Vec& xi, const Vec& eta);

// Quotient images: subgroup generated by e_ij^1 over the pattern's positions.
std::vector<std::size_t> pattern_elements(const FiniteGroupModel& model, const PatternSubgroup& p);
std::size_t word_element(const FiniteGroupModel& model, const ElemWord& w);

// Runs the two-move strategy over Z/m, realizes dist(fix M, fix L) and traces it.
TraceReport trace_strategy(const AffineAction& a);

// Largest cosine between the parallel parts after removing their intersection;
// 0 when either remaining part is trivial.
double cos_angle(const AffineSubspace& k1, const AffineSubspace& k2);

struct Ball {
  Vec center;
  double radius = 0;
};

// Smallest enclosing ball (pivoting on support sets).
Ball chebyshev_center(const std::vector<Vec>& points);

std::vector<Vec> orbit(const AffineAction& a, const Vec& zeta);

struct SplitResult {
  AffineAction trivial;
  AffineAction orthogonal;
  Mat v;  // basis of the invariant vectors
  Mat w;  // basis of their orthogonal complement
  double additivity_residual = 0;
};

SplitResult split_trivial_part(const AffineAction& a);

// Action bundle directory: elements.txt, generators.txt, pi.bin, b.bin, manifest.txt.
void save_bundle(const AffineAction& a, const std::filesystem::path& dir);
AffineAction load_bundle(const std::filesystem::path& dir);

}  // namespace egame::lab
