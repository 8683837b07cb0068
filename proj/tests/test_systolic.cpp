// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fhecore/systolic.hpp"

using namespace fhecore;

namespace {

ResidueMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, std::uint64_t bound) {
  ResidueMatrix m(r, c);
  for (auto& x : m.data()) x = static_cast<Residue>(rng() % bound);
  return m;
}

ResidueMatrix oracle(const ResidueMatrix& a, const ResidueMatrix& b, const ModulusAssignment& mods) {
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

SystolicConfig config(std::size_t r, std::size_t c, std::size_t t, std::size_t k,
                      Dataflow d = Dataflow::output_stationary) {
  SystolicConfig cfg;
  cfg.rows = r;
  cfg.cols = c;
  cfg.pipeline_depth = t;
  cfg.k_dim = k;
  cfg.dataflow = d;
  return cfg;
}

}  // namespace

TEST(ClosedForm, Examples) {
  EXPECT_EQ(cycle_count_closed_form(config(16, 8, 6, 16)), 44u);
  EXPECT_EQ(cycle_count_closed_form(config(4, 4, 6, 4)), 16u);
  EXPECT_EQ(cycle_count_closed_form(config(1, 1, 1, 1)), 2u);
  EXPECT_THROW(cycle_count_closed_form(config(16, 8, 6, 16, Dataflow::operand_stationary)),
               std::invalid_argument);
  EXPECT_THROW(config(0, 8, 6, 16).validate(), std::invalid_argument);
}

TEST(SimulateTile, IdentityAndRandom) {
  std::mt19937_64 rng(1);
  const auto q = make_modulus(97);
  const auto mods = ModulusAssignment::shared(q);
  const auto cfg = config(16, 8, 6, 16);
  ResidueMatrix id(16, 16);
  for (std::size_t i = 0; i < 16; ++i) id(i, i) = 1;
  const auto b = random_matrix(rng, 16, 8, 1ull << 31);
  ResidueMatrix b_red = b;
  for (auto& x : b_red.data()) x %= 97;
  EXPECT_EQ(simulate_tile(id, b, mods, cfg).c, b_red);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_matrix(rng, 16, 16, 97);
    const auto bb = random_matrix(rng, 16, 8, 97);
    const auto res = simulate_tile(a, bb, mods, cfg);
    ASSERT_EQ(res.c, oracle(a, bb, mods));
    ASSERT_EQ(res.cycles, 44u);
  }
}

TEST(SimulateTile, MixedModuliPerLine) {
  std::mt19937_64 rng(2);
  const std::vector<std::uint64_t> small = {11, 13, 17, 19, 23, 29, 31, 37,
                                            41, 43, 47, 53, 59, 61, 67, 71};
  std::vector<Modulus> rows, cols;
  for (auto q : small) rows.push_back(make_modulus(q));
  for (std::size_t i = 0; i < 8; ++i) cols.push_back(make_modulus(small[i]));
  const auto cfg = config(16, 8, 6, 16);
  for (const auto& mods : {ModulusAssignment::per_row(rows), ModulusAssignment::per_column(cols)}) {
    for (auto d : {Dataflow::output_stationary, Dataflow::operand_stationary}) {
      auto c = cfg;
      c.dataflow = d;
      const auto a = random_matrix(rng, 16, 16, 1ull << 31);
      const auto b = random_matrix(rng, 16, 8, 1ull << 31);
      EXPECT_EQ(run_tile(a, b, mods, c).c, oracle(a, b, mods));
    }
  }
}

TEST(SimulateTile, ShapeErrors) {
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  EXPECT_THROW(simulate_tile(ResidueMatrix(16, 15), ResidueMatrix(15, 8), mods, config(16, 8, 6, 16)),
               std::invalid_argument);
}

TEST(OperandStationary, SameResultsMoreCycles) {
  std::mt19937_64 rng(3);
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  const auto os = config(16, 8, 6, 16);
  const auto ws = config(16, 8, 6, 16, Dataflow::operand_stationary);
  const auto a = random_matrix(rng, 16, 16, 97);
  const auto b = random_matrix(rng, 16, 8, 97);
  const auto r_os = simulate_tile(a, b, mods, os);
  const auto r_ws = simulate_tile_operand_stationary(a, b, mods, ws);
  EXPECT_EQ(r_ws.c, r_os.c);
  EXPECT_GT(r_ws.cycles, 44u);
}

TEST(OperandStationary, DegeneratePipelineConverges) {
  std::mt19937_64 rng(4);
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  for (std::size_t r : {1u, 4u, 16u}) {
    for (std::size_t c : {1u, 8u}) {
      const auto a = random_matrix(rng, r, r, 97);
      const auto b = random_matrix(rng, r, c, 97);
      const auto os = simulate_tile(a, b, mods, config(r, c, 1, r));
      const auto ws = simulate_tile_operand_stationary(a, b, mods,
                                                       config(r, c, 1, r, Dataflow::operand_stationary));
      EXPECT_EQ(ws.c, os.c);
      const auto diff = ws.cycles > os.cycles ? ws.cycles - os.cycles : os.cycles - ws.cycles;
      EXPECT_LE(diff, 1u) << r << "x" << c;
    }
  }
}

TEST(OperandStationary, FoldsLongReduction) {
  std::mt19937_64 rng(5);
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  const auto cfg = config(4, 3, 2, 10, Dataflow::operand_stationary);
  const auto a = random_matrix(rng, 4, 10, 97);
  const auto b = random_matrix(rng, 10, 3, 97);
  EXPECT_EQ(run_tile(a, b, mods, cfg).c, oracle(a, b, mods));
}

TEST(SimulateTile, InitialAccumulators) {
  std::mt19937_64 rng(6);
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  const auto a = random_matrix(rng, 4, 4, 97);
  const auto b = random_matrix(rng, 4, 2, 97);
  const auto init = random_matrix(rng, 4, 2, 97);
  for (auto d : {Dataflow::output_stationary, Dataflow::operand_stationary}) {
    const auto res = run_tile(a, b, mods, config(4, 2, 3, 4, d), &init);
    auto want = oracle(a, b, mods);
    for (std::size_t i = 0; i < want.data().size(); ++i) want.data()[i] = (want.data()[i] + init.data()[i]) % 97;
    EXPECT_EQ(res.c, want);
  }
}

TEST(TileSchedule, Counts) {
  const auto cfg = config(16, 8, 6, 16);
  EXPECT_EQ(tile_schedule(256, 256, 256, cfg).size(), 8192u);
  EXPECT_EQ(tile_schedule(16, 8, 16, cfg).size(), 1u);
  EXPECT_EQ(tile_schedule(256, 256, 256, config(16, 16, 6, 16)).size(), 4096u);
  const auto s = tile_schedule(32, 8, 48, cfg);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[1], (TileOp{0, 0, 1}));
  EXPECT_EQ(s[3], (TileOp{1, 0, 0}));
}

TEST(MmmLarge, MatchesOracle) {
  std::mt19937_64 rng(7);
  const auto mods = ModulusAssignment::shared(make_modulus(97));
  const auto cfg = config(16, 8, 6, 16);
  const auto a = random_matrix(rng, 32, 32, 97);
  const auto b = random_matrix(rng, 32, 32, 97);
  const auto run = mmm_large(a, b, mods, cfg);
  EXPECT_EQ(run.c, oracle(a, b, mods));
  EXPECT_EQ(run.tiles, 2u * 4u * 2u);
  EXPECT_EQ(run.cycles, 16u * 44u);
  ResidueMatrix id(32, 32);
  for (std::size_t i = 0; i < 32; ++i) id(i, i) = 1;
  EXPECT_EQ(mmm_large(id, b, mods, cfg).c, b);
  // Ragged shapes are zero padded.
  const auto a2 = random_matrix(rng, 5, 21, 97);
  const auto b2 = random_matrix(rng, 21, 11, 97);
  EXPECT_EQ(mmm_large(a2, b2, mods, cfg).c, oracle(a2, b2, mods));
}

TEST(MmmLarge, PerRowModuliAcrossTiles) {
  std::mt19937_64 rng(8);
  const auto primes = find_ntt_primes(31, 24, 2);
  const std::vector<Modulus> rows(primes.begin(), primes.begin() + 16);
  const auto mods = ModulusAssignment::per_row(rows);
  const auto a = random_matrix(rng, 16, 8, 1ull << 31);
  const auto b = random_matrix(rng, 8, 256, 1ull << 31);
  SystolicBackend sys;
  EXPECT_EQ(sys.multiply(a, b, mods), oracle(a, b, mods));
  EXPECT_EQ(sys.products(), 1u);
  EXPECT_EQ(sys.total_tiles(), 32u);
  sys.reset_counters();
  EXPECT_EQ(sys.total_cycles(), 0u);
}
