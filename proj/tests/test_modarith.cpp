// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fhecore/modarith.hpp"

using namespace fhecore;

namespace {

bool is_prime_naive(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint64_t order_of(std::uint64_t x, std::uint64_t q) {
  std::uint64_t v = x % q;
  for (std::uint64_t k = 1; k < q; ++k) {
    if (v == 1) return k;
    v = v * x % q;
  }
  return 0;
}

}  // namespace

TEST(Modulus, AcceptsPrimes) {
  const auto m = make_modulus(17);
  EXPECT_EQ(m.value(), 17u);
  EXPECT_EQ(m.bit_length(), 5);
  EXPECT_NO_THROW(make_modulus(2147483647));
  EXPECT_EQ(make_modulus(2147483647).bit_length(), 31);
}

TEST(Modulus, RejectsBadValues) {
  EXPECT_THROW(make_modulus(16), std::invalid_argument);
  EXPECT_THROW(make_modulus(15), std::invalid_argument);
  EXPECT_THROW(make_modulus(2), std::invalid_argument);
  EXPECT_THROW(make_modulus(0), std::invalid_argument);
  EXPECT_THROW(make_modulus(4294967291ull), std::invalid_argument);  // prime, too wide
}

TEST(Modulus, PrimalityMatchesTrialDivision) {
  for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(is_prime(n), is_prime_naive(n)) << n;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t n = (rng() >> 34) | 1;
    ASSERT_EQ(is_prime(n), is_prime_naive(n)) << n;
  }
}

TEST(Barrett, Examples) {
  const auto q = make_modulus(17);
  EXPECT_EQ(barrett_reduce(0, q), 0u);
  EXPECT_EQ(barrett_reduce(16 * 16, q), 1u);
  EXPECT_EQ(barrett_reduce(313, q), 7u);
}

TEST(Barrett, MatchesRemainderAtExtremes) {
  std::mt19937_64 rng(11);
  for (std::uint64_t qv : std::initializer_list<std::uint64_t>{3, 17, 97, 65537, 1073750017, 2147483647}) {
    const auto q = make_modulus(qv);
    for (std::uint64_t x : std::initializer_list<std::uint64_t>{0, 1, qv - 1, qv, qv + 1, (qv - 1) * (qv - 1), ~0ull, ~0ull - 1,
                            1ull << 63}) {
      ASSERT_EQ(barrett_reduce(x, q), x % qv) << qv << " " << x;
    }
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t x = rng();
      ASSERT_EQ(barrett_reduce(x, q), x % qv);
    }
  }
}

TEST(ModOps, Examples) {
  const auto q = make_modulus(17);
  EXPECT_EQ(mod_mul(0, 9, q), 0u);
  EXPECT_EQ(mod_add(16, 1, q), 0u);
  EXPECT_EQ(mod_sub(0, 1, q), 16u);
  EXPECT_EQ(mod_neg(0, q), 0u);
  EXPECT_EQ(mod_neg(5, q), 12u);
  EXPECT_EQ(mod_mul(13, 13, q), 16u);
  EXPECT_EQ(mod_mac(3, 13, 13, q), 2u);
}

TEST(ModOps, RandomAgainstBuiltin) {
  std::mt19937_64 rng(3);
  const std::uint64_t qv = 2147483647;
  const auto q = make_modulus(qv);
  for (int i = 0; i < 20000; ++i) {
    const Residue a = static_cast<Residue>(rng() % qv);
    const Residue b = static_cast<Residue>(rng() % qv);
    ASSERT_EQ(mod_add(a, b, q), (std::uint64_t{a} + b) % qv);
    ASSERT_EQ(mod_sub(a, b, q), (std::uint64_t{a} + qv - b) % qv);
    ASSERT_EQ(mod_mul(a, b, q), std::uint64_t{a} * b % qv);
  }
}

TEST(ModOps, PowAndInverse) {
  const auto q = make_modulus(17);
  EXPECT_EQ(mod_pow(9, 0, q), 1u);
  EXPECT_EQ(mod_pow(4, 4, q), 1u);
  EXPECT_EQ(mod_pow(4, 2, q), 16u);
  EXPECT_EQ(mod_inv(1, q), 1u);
  EXPECT_EQ(mod_inv(2, make_modulus(5)), 3u);
  EXPECT_EQ(mod_inv(5, make_modulus(7)), 3u);
  EXPECT_THROW(mod_inv(0, q), std::invalid_argument);
  for (Residue a = 1; a < 17; ++a) {
    Residue brute = 0;
    for (Residue x = 1; x < 17; ++x) {
      if (a * x % 17 == 1) brute = x;
    }
    EXPECT_EQ(mod_inv(a, q), brute);
  }
}

TEST(RootOfUnity, SmallExamples) {
  const auto q = make_modulus(17);
  EXPECT_EQ(find_root_of_unity(4, q), 4u);
  EXPECT_EQ(find_root_of_unity(2, q), 16u);
  const Residue w8 = find_root_of_unity(8, q);
  EXPECT_EQ(mod_pow(w8, 8, q), 1u);
  EXPECT_EQ(mod_pow(w8, 4, q), 16u);
  EXPECT_THROW(find_root_of_unity(32, q), std::invalid_argument);
  EXPECT_THROW(find_root_of_unity(8, make_modulus(23)), std::invalid_argument);
}

TEST(RootOfUnity, SmallestOfExactOrder) {
  for (std::uint64_t qv : {17ull, 97ull, 193ull, 257ull, 7681ull}) {
    const auto q = make_modulus(qv);
    for (std::uint64_t n = 2; (qv - 1) % n == 0; n *= 2) {
      std::uint64_t brute = 0;
      for (std::uint64_t x = 2; x < qv && brute == 0; ++x) {
        if (order_of(x, qv) == n) brute = x;
      }
      EXPECT_EQ(find_root_of_unity(n, q), brute) << qv << " " << n;
      EXPECT_TRUE(has_order(static_cast<Residue>(brute), n, q));
    }
  }
}

TEST(NttPrimes, SmallestAtWidth) {
  const auto ps = find_ntt_primes(31, 3, 1 << 17);
  ASSERT_EQ(ps.size(), 3u);
  std::uint64_t prev = 0;
  for (const auto& p : ps) {
    EXPECT_EQ(p.bit_length(), 31);
    EXPECT_EQ((p.value() - 1) % (1 << 17), 0u);
    EXPECT_GT(p.value(), prev);
    prev = p.value();
  }
  // No smaller candidate was skipped.
  for (std::uint64_t c = (1ull << 30) + 1; c < ps[0].value(); c += 1 << 17) {
    EXPECT_FALSE(is_prime(c));
  }
  EXPECT_EQ(find_ntt_primes(5, 1, 8).front().value(), 17u);
}
