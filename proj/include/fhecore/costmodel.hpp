// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fhecore/matrix.hpp"
#include "fhecore/modarith.hpp"
#include "fhecore/systolic.hpp"

namespace fhecore {

/// Dynamic instruction counts by class. Scalar and load/store work is modeled
/// as one instruction per element per phase.
struct InstructionMix {
  std::uint64_t fhec_ops = 0;    // tile modulo-MMM instructions
  std::uint64_t gemm_ops = 0;    // INT8 tensor-core GEMMs
  std::uint64_t scalar_ops = 0;  // split/mid/merge/element-wise/address-gen
  std::uint64_t ldst_ops = 0;    // data movement

  std::uint64_t total() const { return fhec_ops + gemm_ops + scalar_ops + ldst_ops; }

  InstructionMix& operator+=(const InstructionMix& o);
  friend InstructionMix operator+(InstructionMix a, const InstructionMix& b) { return a += b; }
  InstructionMix scaled(std::uint64_t factor) const;
  friend bool operator==(const InstructionMix&, const InstructionMix&) = default;
};

struct LatencyModel {
  std::uint64_t fhec_latency = 44;        // cycles per FHECoreMMM
  std::uint64_t gemm_latency = 64;        // cycles per tensor-core GEMM
  std::uint64_t scalar_throughput = 64;   // element ops retired per cycle
  std::uint64_t ldst_throughput = 32;     // element moves per cycle

  /// Throws std::invalid_argument for a zero latency or throughput.
  void validate() const;

  /// The enhanced-tensor-core variant: FHEC ops take the GEMM latency.
  static LatencyModel enhanced_tensor_core() { return LatencyModel{64, 64, 64, 32}; }
};

/// Serial upper bound: every instruction class is issued back to back.
std::uint64_t serial_cycles(const InstructionMix& mix, const LatencyModel& lat);

enum class OperandWidth { w32 = 32, w64 = 64 };

/// Number of 8-bit chunks per operand: 4 for 32-bit, 8 for 64-bit.
std::size_t chunk_count(OperandWidth width);

/// Tensor-core GEMMs needed for one modulo-MMM: chunk_count^2.
std::uint64_t gemms_per_mmm(OperandWidth width);

/// Edge of the square FHECoreMMM / TensorCoreGEMM tile used for accounting.
inline constexpr std::size_t kMmmTile = 16;

/// Square 16x16x16 MMMs covering an M x N x K product (ceil-divided).
std::uint64_t mmm_count(std::size_t m, std::size_t n, std::size_t k);

/// Little-endian base-2^8 split of every entry into chunk_count(width)
/// matrices.
std::vector<std::vector<std::uint8_t>> split_to_chunks(std::span<const std::uint32_t> values,
                                                       OperandWidth width);
std::vector<std::uint64_t> recombine_chunks(const std::vector<std::vector<std::uint8_t>>& chunks);

struct PathResult {
  ResidueMatrix c;
  InstructionMix mix;
  std::uint64_t cycles = 0;
};

/// Functional tensor-core route: split both operands into 8-bit chunks, run
/// one INT8 x INT8 -> INT32 GEMM per chunk pair, then merge the partial
/// products with shifts and Barrett-reduce. Scalar work is one op per element
/// for the split of each operand and one per output element for the merge.
PathResult tc_gemm_path(const ResidueMatrix& a, const ResidueMatrix& b,
                        const Modulus& m, OperandWidth width, const LatencyModel& lat);

/// FHEC route: the product runs on the simulated systolic array; one fhec op
/// per 16x16x16 tile product.
PathResult fhec_path(const ResidueMatrix& a, const ResidueMatrix& b,
                     const ModulusAssignment& mods, const LatencyModel& lat,
                     const SystolicConfig& cfg = {});

enum class NttStrategy { tensorfhe_tile, warpdrive_radix16 };

/// FHECoreMMM calls for one N-point NTT on one limb.
///   tensorfhe_tile:    N1 = N2 = sqrt(N), two passes of (sqrt N)^3 / 16^3.
///   warpdrive_radix16: log16(N) levels of N / 256 MMMs.
/// Throws std::invalid_argument when N does not fit the strategy.
std::uint64_t ntt_kernel_call_count(std::size_t n, NttStrategy strategy);

enum class KernelKind { ntt, intt, baseconv, elementwise, automorphism };
enum class ExecPath { tensor_core, fhec };

struct KernelDescriptor {
  KernelKind kind = KernelKind::ntt;
  std::size_t n = 1 << 16;
  std::size_t limbs = 1;       // ntt/intt/elementwise/automorphism
  std::size_t alpha = 1;       // baseconv source limbs
  std::size_t target = 1;      // baseconv target limbs (L)
  std::optional<NttStrategy> strategy;  // ntt/intt only
  OperandWidth width = OperandWidth::w32;
  std::uint64_t repeat = 1;
  std::string label;

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

struct CostOptions {
  /// Count the element-wise twiddle scaling between NTT passes on both paths.
  /// Off by default, matching the tiled-NTT procedure where the FHEC route is
  /// MMMs only and the tensor-core route folds the scaling into its mid
  /// kernel.
  bool count_ntt_twiddle_scaling = false;
};

struct CostReport {
  std::string label;
  ExecPath path = ExecPath::fhec;
  InstructionMix mix;
  std::uint64_t mmm_count = 0;  // modulo-MMMs of the kernel before chunking
  std::uint64_t cycles = 0;
};

/// Per-kernel mix and serial cycle estimate, including the repeat count.
CostReport estimate_kernel(const KernelDescriptor& k, const LatencyModel& lat,
                           ExecPath path, const CostOptions& opts = {});

struct WorkloadDescriptor {
  std::string name;
  std::vector<KernelDescriptor> kernels;
  /// logN, L, L_eff, alpha, dnum, lambda, logQP... carried through verbatim.
  std::map<std::string, std::string> metadata;
};

struct PathTotals {
  std::vector<CostReport> kernels;
  InstructionMix mix;
  std::uint64_t cycles = 0;
};

struct ComparisonReport {
  std::string workload;
  PathTotals tensor_core;
  PathTotals fhec;
  double instruction_ratio = 1.0;  // tensor_core / fhec
  double cycle_ratio = 1.0;
};

/// Throws std::invalid_argument for an empty kernel list.
ComparisonReport compare_workload(const WorkloadDescriptor& w, const LatencyModel& lat,
                                  const CostOptions& opts = {});

std::string to_string(KernelKind kind);
std::string to_string(NttStrategy strategy);
std::string to_string(ExecPath path);
KernelKind parse_kernel_kind(const std::string& s);
NttStrategy parse_ntt_strategy(const std::string& s);

}  // namespace fhecore
