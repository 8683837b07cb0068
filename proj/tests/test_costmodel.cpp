// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fhecore/costmodel.hpp"

using namespace fhecore;

namespace {

ResidueMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, std::uint64_t bound) {
  ResidueMatrix m(r, c);
  for (auto& x : m.data()) x = static_cast<Residue>(rng() % bound);
  return m;
}

KernelDescriptor ntt_kernel(std::size_t limbs = 1) {
  KernelDescriptor k;
  k.kind = KernelKind::ntt;
  k.n = 1 << 16;
  k.limbs = limbs;
  k.strategy = NttStrategy::tensorfhe_tile;
  return k;
}

KernelDescriptor elementwise_kernel(std::size_t limbs = 1) {
  KernelDescriptor k;
  k.kind = KernelKind::elementwise;
  k.n = 1 << 16;
  k.limbs = limbs;
  return k;
}

}  // namespace

TEST(Chunks, SplitAndRecombine) {
  const std::vector<std::uint32_t> v = {0, 0x01020304u};
  const auto c = split_to_chunks(v, OperandWidth::w32);
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(c[i][0], 0);
  EXPECT_EQ(c[0][1], 0x04);
  EXPECT_EQ(c[1][1], 0x03);
  EXPECT_EQ(c[2][1], 0x02);
  EXPECT_EQ(c[3][1], 0x01);
  EXPECT_EQ(split_to_chunks(v, OperandWidth::w64).size(), 8u);

  std::mt19937_64 rng(1);
  std::vector<std::uint32_t> t(256);
  for (auto& x : t) x = static_cast<std::uint32_t>(rng());
  for (auto w : {OperandWidth::w32, OperandWidth::w64}) {
    const auto back = recombine_chunks(split_to_chunks(t, w));
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(back[i], t[i]);
  }
}

TEST(Chunks, Counts) {
  EXPECT_EQ(chunk_count(OperandWidth::w32), 4u);
  EXPECT_EQ(chunk_count(OperandWidth::w64), 8u);
  EXPECT_EQ(gemms_per_mmm(OperandWidth::w32), 16u);
  EXPECT_EQ(gemms_per_mmm(OperandWidth::w64), 64u);
  EXPECT_EQ(mmm_count(256, 256, 256), 4096u);
  EXPECT_EQ(mmm_count(16, 16, 16), 1u);
  EXPECT_EQ(mmm_count(17, 1, 1), 2u);
}

TEST(Paths, TensorCoreMatchesFhec) {
  std::mt19937_64 rng(2);
  const LatencyModel lat;
  for (std::uint64_t qv : {17ull, 97ull, 2147483647ull}) {
    const auto q = make_modulus(qv);
    for (int t = 0; t < 10; ++t) {
      const auto a = random_matrix(rng, 16, 16, qv);
      const auto b = random_matrix(rng, 16, 16, qv);
      const auto tc = tc_gemm_path(a, b, q, OperandWidth::w32, lat);
      const auto fh = fhec_path(a, b, ModulusAssignment::shared(q), lat);
      ASSERT_EQ(tc.c, fh.c);
      const auto tc64 = tc_gemm_path(a, b, q, OperandWidth::w64, lat);
      ASSERT_EQ(tc64.c, fh.c);
    }
  }
}

TEST(Paths, Counts) {
  const LatencyModel lat;
  const auto q = make_modulus(97);
  const ResidueMatrix a(16, 16), b(16, 16);
  const auto fh = fhec_path(a, b, ModulusAssignment::shared(q), lat);
  EXPECT_EQ(fh.c, ResidueMatrix(16, 16));
  EXPECT_EQ(fh.mix.fhec_ops, 1u);
  EXPECT_EQ(fh.cycles, 44u);
  const auto fh_enh = fhec_path(a, b, ModulusAssignment::shared(q), LatencyModel::enhanced_tensor_core());
  EXPECT_EQ(fh_enh.cycles, 64u);
  const auto tc32 = tc_gemm_path(a, b, q, OperandWidth::w32, lat);
  EXPECT_EQ(tc32.mix.gemm_ops, 16u);
  EXPECT_EQ(tc32.mix.scalar_ops, 3u * 256u);
  EXPECT_EQ(tc_gemm_path(a, b, q, OperandWidth::w64, lat).mix.gemm_ops, 64u);
}

TEST(LatencyModel, Validation) {
  LatencyModel lat;
  EXPECT_NO_THROW(lat.validate());
  lat.scalar_throughput = 0;
  EXPECT_THROW(lat.validate(), std::invalid_argument);
  EXPECT_EQ(serial_cycles({1, 2, 65, 33}, LatencyModel{}), 44u + 128u + 2u + 2u);
}

TEST(KernelCalls, Counts) {
  EXPECT_EQ(ntt_kernel_call_count(1 << 16, NttStrategy::tensorfhe_tile), 8192u);
  EXPECT_EQ(ntt_kernel_call_count(1 << 16, NttStrategy::warpdrive_radix16), 1024u);
  EXPECT_EQ(ntt_kernel_call_count(1 << 8, NttStrategy::warpdrive_radix16), 2u);
  EXPECT_EQ(ntt_kernel_call_count(1 << 8, NttStrategy::tensorfhe_tile), 2u);
  EXPECT_THROW(ntt_kernel_call_count(1 << 15, NttStrategy::tensorfhe_tile), std::invalid_argument);
  EXPECT_THROW(ntt_kernel_call_count(1 << 14, NttStrategy::warpdrive_radix16), std::invalid_argument);
  EXPECT_THROW(ntt_kernel_call_count(1000, NttStrategy::tensorfhe_tile), std::invalid_argument);
}

TEST(EstimateKernel, Ntt) {
  const LatencyModel lat;
  const auto fh = estimate_kernel(ntt_kernel(), lat, ExecPath::fhec);
  EXPECT_EQ(fh.mix.fhec_ops, 8192u);
  EXPECT_EQ(fh.mix.scalar_ops, 0u);
  EXPECT_EQ(fh.cycles, 8192u * 44u);
  const auto tc = estimate_kernel(ntt_kernel(), lat, ExecPath::tensor_core);
  EXPECT_EQ(tc.mix.gemm_ops, 131072u);
  EXPECT_EQ(tc.mix.scalar_ops, 3u * 65536u);
  EXPECT_EQ(tc.mmm_count, 8192u);

  CostOptions with_twiddle;
  with_twiddle.count_ntt_twiddle_scaling = true;
  EXPECT_EQ(estimate_kernel(ntt_kernel(), lat, ExecPath::fhec, with_twiddle).mix.scalar_ops, 65536u);
  EXPECT_EQ(estimate_kernel(ntt_kernel(), lat, ExecPath::tensor_core, with_twiddle).mix.scalar_ops,
            4u * 65536u);

  auto k = ntt_kernel(3);
  k.repeat = 2;
  EXPECT_EQ(estimate_kernel(k, lat, ExecPath::fhec).mix.fhec_ops, 6u * 8192u);
}

TEST(EstimateKernel, OtherKinds) {
  const LatencyModel lat;
  EXPECT_EQ(estimate_kernel(elementwise_kernel(2), lat, ExecPath::fhec).mix.scalar_ops, 131072u);
  KernelDescriptor aut;
  aut.kind = KernelKind::automorphism;
  aut.n = 1 << 16;
  aut.limbs = 3;
  const auto r = estimate_kernel(aut, lat, ExecPath::fhec);
  EXPECT_EQ(r.mix.ldst_ops, 3u * 65536u);
  EXPECT_EQ(r.mix.scalar_ops, 65536u);
  EXPECT_EQ(estimate_kernel(aut, lat, ExecPath::tensor_core).mix, r.mix);

  KernelDescriptor bc;
  bc.kind = KernelKind::baseconv;
  bc.n = 256;
  bc.alpha = 8;
  bc.target = 16;
  const auto bf = estimate_kernel(bc, lat, ExecPath::fhec);
  EXPECT_EQ(bf.mmm_count, 16u);
  EXPECT_EQ(bf.mix.fhec_ops, 16u);
  EXPECT_EQ(bf.mix.scalar_ops, 8u * 256u);

  KernelDescriptor bad = elementwise_kernel();
  bad.strategy = NttStrategy::tensorfhe_tile;
  EXPECT_THROW(estimate_kernel(bad, lat, ExecPath::fhec), std::invalid_argument);
  bad = elementwise_kernel();
  bad.repeat = 0;
  EXPECT_THROW(estimate_kernel(bad, lat, ExecPath::fhec), std::invalid_argument);
}

TEST(CompareWorkload, Ratios) {
  const LatencyModel lat;
  const auto pure = compare_workload({"ntt", {ntt_kernel()}, {}}, lat);
  EXPECT_DOUBLE_EQ(pure.instruction_ratio, 40.0);
  EXPECT_GE(pure.instruction_ratio, 16.0);
  const auto ew = compare_workload({"ew", {elementwise_kernel()}, {}}, lat);
  EXPECT_DOUBLE_EQ(ew.instruction_ratio, 1.0);
  EXPECT_DOUBLE_EQ(ew.cycle_ratio, 1.0);
  const auto mixed = compare_workload({"mix", {ntt_kernel(), elementwise_kernel()}, {}}, lat);
  EXPECT_GT(mixed.instruction_ratio, 1.0);
  EXPECT_LT(mixed.instruction_ratio, pure.instruction_ratio);
  EXPECT_THROW(compare_workload({"empty", {}, {}}, lat), std::invalid_argument);
}

TEST(CompareWorkload, EnhancedLatencyOnlyMovesFhecCycles) {
  const WorkloadDescriptor w{"ntt", {ntt_kernel(), elementwise_kernel()}, {}};
  const auto base = compare_workload(w, LatencyModel{});
  const auto enh = compare_workload(w, LatencyModel::enhanced_tensor_core());
  EXPECT_EQ(base.tensor_core.cycles, enh.tensor_core.cycles);
  EXPECT_EQ(base.fhec.mix, enh.fhec.mix);
  EXPECT_EQ(enh.fhec.cycles - base.fhec.cycles, 8192u * 20u);
}

TEST(Names, RoundTrip) {
  for (auto k : {KernelKind::ntt, KernelKind::intt, KernelKind::baseconv, KernelKind::elementwise,
                 KernelKind::automorphism}) {
    EXPECT_EQ(parse_kernel_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_ntt_strategy("warpdrive_radix16"), NttStrategy::warpdrive_radix16);
  EXPECT_THROW(parse_kernel_kind("fft"), std::invalid_argument);
}
