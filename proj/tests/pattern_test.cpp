#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "egame/pattern.hpp"
#include "oracles.hpp"

using namespace egame;

namespace {

RingSpec ring(const char* text) { return RingSpec::parse(text); }

std::string golden(const std::string& name) {
  std::ifstream in(std::string(EGAME_GOLDEN_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

PatternSubgroup random_pattern(std::size_t n, std::mt19937_64& rng, double density) {
  std::bernoulli_distribution keep(density);
  PositionSet s(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && keep(rng)) s.insert(i, j);
    }
  }
  return PatternSubgroup::from_positions(s.closure());
}

// Every sampled element of `small` must fit the cell pattern of `big`.
bool samples_fit(const PatternSubgroup& small, const PatternSubgroup& big, const RingSpec& r, std::uint64_t seed,
                 int count) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    if (!big.matches(sample_word(small, r, rng, 2, 5).eval(small.n(), r))) return false;
  }
  return true;
}

}  // namespace

TEST(BlockTag, LatticeOrder) {
  EXPECT_TRUE(tag_leq(BlockTag::kZero, BlockTag::kAnyRing));
  EXPECT_TRUE(tag_leq(BlockTag::kOne, BlockTag::kEBlock));
  EXPECT_TRUE(tag_leq(BlockTag::kEBlock, BlockTag::kAnyMat));
  EXPECT_FALSE(tag_leq(BlockTag::kAnyRing, BlockTag::kEBlock));
  EXPECT_EQ(tag_join(BlockTag::kAnyRing, BlockTag::kEBlock), BlockTag::kAnyMat);
  EXPECT_EQ(tag_join(BlockTag::kZero, BlockTag::kAnyRing), BlockTag::kAnyRing);
  for (char c : std::string("01RE*")) EXPECT_EQ(tag_symbol(tag_from_symbol(c)), c);
}

TEST(Pattern, ParseAndRender) {
  PatternSubgroup m = PatternSubgroup::parse("1 0 R / 0 1 R / 0 0 1");
  EXPECT_EQ(m, builtin_pattern("M", 3));
  EXPECT_EQ(m.compact(), "10R/01R/001");
  EXPECT_EQ(PatternSubgroup::parse(m.compact()), m);
  EXPECT_EQ(builtin_pattern("Q", 4).compact(), "EEE0/EEE0/EEE0/0001");
  EXPECT_EQ(builtin_pattern("G", 3).compact(), "***/***/***");
  EXPECT_THROW(PatternSubgroup::parse("10/0"), Error);
  EXPECT_THROW(PatternSubgroup::parse("0R/01"), Error);
  EXPECT_THROW(PatternSubgroup::parse("1E/01"), Error);
  EXPECT_THROW(builtin_pattern("nope", 3), Error);
  EXPECT_THROW(builtin_pattern("M", 2), Error);
}

TEST(Pattern, ParseRefForms) {
  EXPECT_EQ(parse_pattern_ref("builtin:L@4"), builtin_pattern("L", 4));
  EXPECT_EQ(parse_pattern_ref("100/010/RR1"), builtin_pattern("L", 3));
  EXPECT_EQ(builtin_pattern("G(1,3)", 3), PatternSubgroup::parse("10R/010/001"));
}

TEST(Pattern, ClosureCompletes) {
  for (std::size_t n = 3; n <= 6; ++n) {
    EXPECT_TRUE(closure_to_full(pattern_join(builtin_pattern("M", n), builtin_pattern("L", n))).is_full());
    EXPECT_FALSE(closure_to_full(builtin_pattern("H1_1", n)).is_full());
  }
}

TEST(Pattern, ContainmentCertificates) {
  for (std::size_t n = 3; n <= 6; ++n) {
    auto g = builtin_pattern("G", n);
    auto h1 = builtin_pattern("H1_1", n);
    EXPECT_TRUE(pattern_contains(h1, builtin_pattern("M", n)));
    EXPECT_TRUE(pattern_contains(h1, builtin_pattern("Q", n)));
    EXPECT_FALSE(pattern_contains(h1, builtin_pattern("L", n)));
    EXPECT_TRUE(pattern_contains(g, h1));
    EXPECT_FALSE(pattern_contains(builtin_pattern("M", n), builtin_pattern("L", n)));
    // E block against an R column: certified through the generator families.
    EXPECT_TRUE(pattern_contains(builtin_pattern("wH2w_inv", n), builtin_pattern("M", n)));
  }
}

TEST(Pattern, JoinUnionsPositions) {
  EXPECT_EQ(pattern_join(builtin_pattern("M", 4), builtin_pattern("Q", 4)), builtin_pattern("H1_1", 4));
  EXPECT_EQ(pattern_join(builtin_pattern("L", 4), builtin_pattern("Q", 4)), builtin_pattern("H2_1", 4));
}

TEST(Pattern, EndSwapConjugationMatchesDisplay) {
  for (std::size_t n = 3; n <= 6; ++n) {
    const RingSpec z = ring("Z");
    const Conjugator w = end_swap_word(n, z);
    PatternSubgroup a = pattern_conjugate(builtin_pattern("H2_1", n), w);
    PatternSubgroup b = pattern_conjugate(builtin_pattern("H1_1", n), w);
    EXPECT_EQ(a.to_string(), golden("wH2w_inv_n" + std::to_string(n) + ".txt")) << n;
    EXPECT_EQ(b.to_string(), golden("wH1w_inv_n" + std::to_string(n) + ".txt")) << n;
    EXPECT_TRUE(pattern_contains(a, builtin_pattern("M", n)));
    EXPECT_TRUE(pattern_contains(b, builtin_pattern("L", n)));
    // w is an involution, so conjugating back returns the original.
    EXPECT_EQ(pattern_conjugate_inverse(a, w), builtin_pattern("H2_1", n));
  }
}

TEST(Pattern, SignedPermutationConjugationMovesCells) {
  auto p = SignedPermutation::parse("2,3,1");
  PatternSubgroup m = builtin_pattern("M", 3);
  // M uses (1,3),(2,3); the permutation sends them to (2,1),(3,1).
  EXPECT_EQ(pattern_conjugate(m, p).compact(), "100/R10/R01");
  EXPECT_EQ(pattern_conjugate_inverse(pattern_conjugate(m, p), p), m);
}

TEST(Pattern, NormalizingConjugatorsFixPattern) {
  for (std::size_t n = 3; n <= 6; ++n) {
    Conjugator q = BlockElement{builtin_pattern("Q", n)};
    EXPECT_EQ(pattern_conjugate(builtin_pattern("M", n), q), builtin_pattern("M", n));
    EXPECT_EQ(pattern_conjugate(builtin_pattern("L", n), q), builtin_pattern("L", n));
    EXPECT_EQ(pattern_conjugate(builtin_pattern("H1_1", n), q), builtin_pattern("H1_1", n));
  }
}

TEST(Pattern, UnsupportedConjugatorRejected) {
  const RingSpec z = ring("Z");
  Conjugator word = ElemWord::parse(z, "E(3,1;1)");
  try {
    pattern_conjugate(builtin_pattern("M", 3), word);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnsupportedConjugator);
  }
  // A non-block-diagonal schema cannot be a generic block element.
  Conjugator schema = BlockElement{builtin_pattern("M", 3)};
  EXPECT_THROW(pattern_conjugate(builtin_pattern("L", 3), schema), Error);
}

// Soundness: a certified containment survives concrete sampling.
class PatternSoundness : public ::testing::TestWithParam<const char*> {};

TEST_P(PatternSoundness, CertifiedContainmentHoldsOnSamples) {
  const RingSpec r = ring(GetParam());
  std::mt19937_64 rng(17);
  int certified = 0;
  for (int t = 0; t < 150; ++t) {
    const std::size_t n = 3 + rng() % 3;
    PatternSubgroup big = random_pattern(n, rng, 0.45);
    PatternSubgroup small = random_pattern(n, rng, 0.2);
    if (!pattern_contains(big, small)) continue;
    ++certified;
    EXPECT_TRUE(samples_fit(small, big, r, rng(), 5)) << big.compact() << " >= " << small.compact();
  }
  EXPECT_GT(certified, 10);
}

TEST_P(PatternSoundness, SamplesFitTheirOwnPattern) {
  const RingSpec r = ring(GetParam());
  std::mt19937_64 rng(29);
  for (int t = 0; t < 60; ++t) {
    PatternSubgroup p = random_pattern(3 + rng() % 3, rng, 0.3);
    EXPECT_TRUE(samples_fit(p, p, r, rng(), 3)) << p.compact();
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, PatternSoundness, ::testing::Values("Z", "free:2", "comm:2", "Z/4"));

TEST(Pattern, LatticeProperties) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 4;
    PatternSubgroup a = random_pattern(n, rng, 0.3);
    PatternSubgroup b = random_pattern(n, rng, 0.3);
    PatternSubgroup j = pattern_join(a, b);
    EXPECT_EQ(j, pattern_join(b, a));
    EXPECT_EQ(pattern_join(a, a), a);
    EXPECT_TRUE(pattern_contains(j, a));
    EXPECT_TRUE(pattern_contains(j, b));
    EXPECT_EQ(PatternSubgroup::from_positions(a.generators()), a);
    EXPECT_EQ(PatternSubgroup::parse(a.compact()), a);
  }
}

TEST(Pattern, SignedPermutationAgreesWithConcreteConjugation) {
  const RingSpec z = ring("Z");
  std::mt19937_64 rng(53);
  for (std::size_t n = 3; n <= 5; ++n) {
    ElemWord w = end_swap_word(n, z);
    MatR wm = w.eval(n, z);
    auto perm = *SignedPermutation::recognize(wm);
    PatternSubgroup h = builtin_pattern("H2_1", n);
    PatternSubgroup conj = pattern_conjugate(h, Conjugator{w});
    oracle::Substitution sub;
    for (int k = 0; k < 20; ++k) {
      MatR x = sample_word(h, z, rng, 1, 5).eval(n, z);
      MatR y = wm * x * wm;
      EXPECT_EQ(sub.eval(y), oracle::conjugate_by_signed_permutation(sub.eval(x), perm.image, perm.sign));
      EXPECT_TRUE(conj.matches(y));
    }
  }
}

TEST(Abelianization, CertificateNeedsSpareIndex) {
  EXPECT_TRUE(abelianization_trivial_certificate(3));
  EXPECT_TRUE(abelianization_trivial_certificate(6));
  EXPECT_THROW(abelianization_trivial_certificate(2), Error);
}
