#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "sumprod/ring.hpp"

using namespace sumprod;

namespace {

const Modulus kQ27(3, 3);

RingElem e27(i64 v) { return {v, kQ27}; }

}  // namespace

TEST(Modulus, RejectsBadParameters) {
  EXPECT_THROW(Modulus(4, 1), Error);
  EXPECT_THROW(Modulus(2, 3), Error);
  EXPECT_THROW(Modulus(3, 0), Error);
  EXPECT_THROW(Modulus(1291, 3), Error);  // 1291^3 > 2^31
  EXPECT_NO_THROW(Modulus(1289, 3));
  try {
    Modulus(5, 3).require_3_mod_4();
    FAIL() << "p = 5 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadModulus);
  }
}

TEST(RingElem, CanonicalRepresentatives) {
  EXPECT_EQ(e27(-1).value(), 26);
  EXPECT_EQ(e27(54).value(), 0);
  EXPECT_EQ((e27(20) + e27(10)).value(), 3);
  EXPECT_EQ((e27(2) - e27(5)).value(), 24);
  EXPECT_EQ((e27(5) * e27(4)).value(), 20);
  EXPECT_EQ((-e27(1)).value(), 26);
}

TEST(RingElem, MixedModuliAreRejected) {
  const RingElem a(1, Modulus(3, 3));
  const RingElem b(1, Modulus(7, 3));
  try {
    (void)(a + b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UniverseMismatch);
  }
  EXPECT_THROW((void)(a == b), Error);
}

TEST(Units, SpecExamples) {
  EXPECT_TRUE(is_unit(e27(1)));
  EXPECT_FALSE(is_unit(e27(9)));
  EXPECT_TRUE(is_unit(e27(25)));
  EXPECT_EQ(inverse(e27(1)).value(), 1);
  EXPECT_EQ(inverse(e27(2)).value(), 14);
  try {
    (void)inverse(e27(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonUnit);
  }
}

TEST(Units, InverseRoundTrip) {
  for (i64 p : {3, 7, 11}) {
    const Modulus m(p, 3);
    for (i64 v = 0; v < m.q(); ++v) {
      const RingElem x(v, m);
      ASSERT_EQ(is_unit(x), inverse_mod(v, m.q()).has_value()) << v;
      if (!is_unit(x)) continue;
      const RingElem y = inverse(x);
      EXPECT_EQ((x * y).value(), 1);
      EXPECT_EQ(inverse(y), x);
    }
  }
}

TEST(Legendre, SpecExamples) {
  EXPECT_EQ(legendre(1, 3), 1);
  EXPECT_EQ(legendre(3, 3), 0);
  EXPECT_EQ(legendre(2, 3), -1);
  EXPECT_EQ(legendre(-1, 7), -1);
  EXPECT_EQ(legendre(2, 7), 1);
}

TEST(Legendre, MatchesResidueScanUpTo100) {
  for (i64 p = 3; p <= 100; ++p) {
    if (!is_prime(p)) continue;
    std::vector<bool> square(static_cast<std::size_t>(p), false);
    for (i64 x = 1; x < p; ++x) square[static_cast<std::size_t>(x * x % p)] = true;
    for (i64 d = 0; d < p; ++d) {
      const int expected = d == 0 ? 0 : (square[static_cast<std::size_t>(d)] ? 1 : -1);
      ASSERT_EQ(legendre(d, p), expected) << "d=" << d << " p=" << p;
    }
  }
}

TEST(SqrtCount, SpecExamples) {
  EXPECT_EQ(sqrt_count(e27(0)), 3U);
  EXPECT_EQ(sqrt_count(e27(1)), 2U);
  EXPECT_EQ(sqrt_count(e27(9)), 6U);
  EXPECT_EQ(sqrt_count(e27(3)), 0U);
  EXPECT_EQ(sqrt_count_oracle(e27(0)), 3U);
  EXPECT_EQ(sqrt_count_oracle(e27(4)), 2U);
  EXPECT_EQ(sqrt_count_oracle(RingElem(0, Modulus(3, 1))), 1U);
  EXPECT_THROW(sqrt_count(RingElem(1, Modulus(3, 2))), Error);
}

TEST(SqrtCount, ClosedFormMatchesOracleAndMassIsQ) {
  for (i64 p : {3, 7, 11, 19}) {
    const Modulus m(p, 3);
    u64 mass = 0;
    for (i64 d = 0; d < m.q(); ++d) {
      const RingElem x(d, m);
      ASSERT_EQ(sqrt_count(x), sqrt_count_oracle(x)) << "d=" << d << " p=" << p;
      mass += sqrt_count_oracle(x);
    }
    EXPECT_EQ(mass, static_cast<u64>(m.q()));
  }
}

TEST(SqrtCount, EveryClosedFormCaseOccurs) {
  // 2, 0 (non-residue unit), 0 (p || d), 2p, 0 (p^2 || d, non-residue), p
  const Modulus m(7, 3);
  std::set<std::pair<int, u64>> seen;
  for (i64 d = 0; d < m.q(); ++d) seen.insert({m.valuation(d), sqrt_count(RingElem(d, m))});
  const std::set<std::pair<int, u64>> expected{{0, 2}, {0, 0}, {1, 0}, {2, 14}, {2, 0}, {3, 7}};
  EXPECT_EQ(seen, expected);
}
