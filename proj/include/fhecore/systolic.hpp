// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "fhecore/matrix.hpp"
#include "fhecore/modarith.hpp"

namespace fhecore {

enum class Dataflow { output_stationary, operand_stationary };

/// Geometry and timing of the modulo-MAC systolic array.
struct SystolicConfig {
  std::size_t rows = 16;           // S_R
  std::size_t cols = 8;            // S_C
  std::size_t pipeline_depth = 6;  // T, cycles per modulo MAC inside a PE
  std::size_t k_dim = 16;          // reduction length of one tile
  Dataflow dataflow = Dataflow::output_stationary;

  /// Throws std::invalid_argument if any dimension is zero.
  void validate() const;
};

/// 2*S_R + S_C + T - 2. Throws std::invalid_argument for the
/// operand-stationary dataflow, which has no closed form here.
std::uint64_t cycle_count_closed_form(const SystolicConfig& cfg);

struct TileResult {
  ResidueMatrix c;
  std::uint64_t cycles = 0;
};

/// Cycle-stepped output-stationary simulation of one S_R x k_dim by
/// k_dim x S_C tile product.
///
/// Row r of A enters the left edge delayed by r cycles and column c of B
/// enters the top edge delayed by c cycles; both operands advance one PE per
/// cycle. A PE issues a MAC in every cycle in which both operands are present
/// and the T-stage pipeline retires it T - 1 cycles later into the local
/// accumulator, R <- (R + a*b) mod q. One final cycle writes the accumulators
/// back. The run takes S_R + S_C + k_dim + T - 2 cycles, which is the closed
/// form for the native k_dim == S_R tile.
///
/// `initial` (optional, S_R x S_C) preloads the accumulators so k-tiles can
/// chain. Operands need only be below 2^31.
TileResult simulate_tile(const ResidueMatrix& a, const ResidueMatrix& b,
                         const ModulusAssignment& mods, const SystolicConfig& cfg,
                         const ResidueMatrix* initial = nullptr);

/// Cycle-stepped operand-stationary simulation.
///
/// B is preloaded into the PEs (untimed), B(k, c) at PE(k, c), folding k_dim
/// onto the S_R physical rows when k_dim > S_R. Rows of A stream in from the
/// left, A(m, k) entering array row k; a partial sum must traverse the whole
/// T-stage pipeline of PE(k, c) before it is forwarded to PE(k + 1, c).
/// Results leave the bottom row and take one write-back cycle.
TileResult simulate_tile_operand_stationary(const ResidueMatrix& a,
                                            const ResidueMatrix& b,
                                            const ModulusAssignment& mods,
                                            const SystolicConfig& cfg,
                                            const ResidueMatrix* initial = nullptr);

/// Dispatches on cfg.dataflow.
TileResult run_tile(const ResidueMatrix& a, const ResidueMatrix& b,
                    const ModulusAssignment& mods, const SystolicConfig& cfg,
                    const ResidueMatrix* initial = nullptr);

/// One tile of a blocked M x N x K product: output block (i, j), k-block k.
struct TileOp {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  friend bool operator==(const TileOp&, const TileOp&) = default;
};

/// Row-major schedule over ceil(M/S_R) x ceil(N/S_C) x ceil(K/k_dim) tiles;
/// the k index varies fastest so partial sums of one output tile chain.
std::vector<TileOp> tile_schedule(std::size_t m, std::size_t n, std::size_t k,
                                  const SystolicConfig& cfg);

struct MatMulRun {
  ResidueMatrix c;
  std::uint64_t cycles = 0;  // serial issue: sum of per-tile cycles
  std::size_t tiles = 0;
};

/// Blocked product on the simulated array. Remainders are zero padded.
MatMulRun mmm_large(const ResidueMatrix& a, const ResidueMatrix& b,
                    const ModulusAssignment& mods, const SystolicConfig& cfg);

/// MatMulBackend that runs every product through mmm_large and keeps running
/// totals of tiles and cycles. The counters are not synchronized; use one
/// executor per thread.
class SystolicBackend final : public MatMulBackend {
 public:
  explicit SystolicBackend(SystolicConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  ResidueMatrix multiply(const ResidueMatrix& a, const ResidueMatrix& b,
                         const ModulusAssignment& mods) const override;

  const SystolicConfig& config() const { return cfg_; }
  std::uint64_t total_cycles() const { return cycles_; }
  std::size_t total_tiles() const { return tiles_; }
  std::size_t products() const { return products_; }
  void reset_counters() { cycles_ = 0; tiles_ = 0; products_ = 0; }

 private:
  SystolicConfig cfg_;
  mutable std::uint64_t cycles_ = 0;
  mutable std::size_t tiles_ = 0;
  mutable std::size_t products_ = 0;
};

}  // namespace fhecore
