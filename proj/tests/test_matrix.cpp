// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fhecore/matrix.hpp"

using namespace fhecore;

namespace {

ResidueMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, std::uint64_t bound) {
  ResidueMatrix m(r, c);
  for (auto& x : m.data()) x = static_cast<Residue>(rng() % bound);
  return m;
}

ResidueMatrix triple_loop(const ResidueMatrix& a, const ResidueMatrix& b,
                          const ModulusAssignment& mods) {
  ResidueMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      const std::uint64_t q = mods.at(i, j).value();
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc = (acc + std::uint64_t{a(i, k)} * b(k, j)) % q;
      c(i, j) = static_cast<Residue>(acc);
    }
  }
  return c;
}

}  // namespace

TEST(ResidueMatrix, TransposeAndBlock) {
  ResidueMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  const auto t = m.transpose();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t(2, 1), 6u);
  EXPECT_EQ(t.transpose(), m);
  const auto b = m.block(1, 1, 2, 3);
  EXPECT_EQ(b(0, 0), 5u);
  EXPECT_EQ(b(0, 1), 6u);
  EXPECT_EQ(b(0, 2), 0u);
  EXPECT_EQ(b(1, 0), 0u);
  EXPECT_THROW(ResidueMatrix(2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST(ModulusAssignment, ShapeChecks) {
  const auto q = make_modulus(17);
  EXPECT_NO_THROW(ModulusAssignment::shared(q).check_shape(5, 7));
  const auto rows = ModulusAssignment::per_row({make_modulus(11), make_modulus(13)});
  EXPECT_NO_THROW(rows.check_shape(2, 9));
  EXPECT_THROW(rows.check_shape(3, 9), std::invalid_argument);
  EXPECT_EQ(rows.at(1, 4).value(), 13u);
  const auto sub = rows.slice(1, 3, 0, 4);
  EXPECT_EQ(sub.at(0, 0).value(), 13u);
  EXPECT_EQ(sub.at(2, 0).value(), 13u);
  EXPECT_THROW(ModulusAssignment::per_column({}), std::invalid_argument);
}

TEST(DirectMatMul, MatchesTripleLoop) {
  std::mt19937_64 rng(5);
  const DirectMatMul mm;
  for (std::uint64_t qv : {17ull, 97ull, 2147483647ull}) {
    const auto q = make_modulus(qv);
    const auto a = random_matrix(rng, 9, 37, qv);
    const auto b = random_matrix(rng, 37, 5, qv);
    EXPECT_EQ(mm.multiply(a, b, ModulusAssignment::shared(q)),
              triple_loop(a, b, ModulusAssignment::shared(q)));
  }
}

TEST(DirectMatMul, MixedModuliAndWideOperands) {
  std::mt19937_64 rng(6);
  const DirectMatMul mm;
  // Operands may exceed the output modulus (up to 2^31).
  const auto a = random_matrix(rng, 3, 200, 1ull << 31);
  const auto b = random_matrix(rng, 200, 4, 1ull << 31);
  const auto rows = ModulusAssignment::per_row({make_modulus(11), make_modulus(13), make_modulus(2147483647)});
  EXPECT_EQ(mm.multiply(a, b, rows), triple_loop(a, b, rows));
  const auto cols = ModulusAssignment::per_column(
      {make_modulus(17), make_modulus(19), make_modulus(23), make_modulus(1073750017)});
  EXPECT_EQ(mm.multiply(a, b, cols), triple_loop(a, b, cols));
}

TEST(DirectMatMul, RejectsBadShapes) {
  const DirectMatMul mm;
  ResidueMatrix a(2, 3), b(4, 2);
  EXPECT_THROW(mm.multiply(a, b, ModulusAssignment::shared(make_modulus(17))), std::invalid_argument);
}

TEST(Hadamard, ScalarLoop) {
  std::mt19937_64 rng(8);
  const auto q = make_modulus(17);
  const auto a = random_matrix(rng, 1, 4, 17);
  const auto b = random_matrix(rng, 1, 4, 17);
  const auto c = hadamard(a, b, q);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(c(0, i), a(0, i) * b(0, i) % 17);
}
