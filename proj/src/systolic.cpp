// SPDX-License-Identifier: Apache-2.0

#include "fhecore/systolic.hpp"

#include <deque>
#include <optional>
#include <string>

namespace fhecore {

namespace {

struct Operand {
  bool valid = false;
  std::uint32_t value = 0;
  std::size_t tag = 0;  // reduction index (output-stationary) or A row
};

struct InFlight {
  bool valid = false;
  std::uint64_t value = 0;
  std::size_t tag = 0;
};

void check_tile_shapes(const ResidueMatrix& a, const ResidueMatrix& b,
                       const ModulusAssignment& mods, const SystolicConfig& cfg,
                       const ResidueMatrix* initial) {
  cfg.validate();
  if (a.rows() != cfg.rows || a.cols() != cfg.k_dim || b.rows() != cfg.k_dim ||
      b.cols() != cfg.cols) {
    throw std::invalid_argument(
        "tile shape mismatch: expected " + std::to_string(cfg.rows) + "x" +
        std::to_string(cfg.k_dim) + " by " + std::to_string(cfg.k_dim) + "x" +
        std::to_string(cfg.cols) + ", got " + std::to_string(a.rows()) + "x" +
        std::to_string(a.cols()) + " by " + std::to_string(b.rows()) + "x" +
        std::to_string(b.cols()));
  }
  mods.check_shape(cfg.rows, cfg.cols);
  if (initial && (initial->rows() != cfg.rows || initial->cols() != cfg.cols)) {
    throw std::invalid_argument("initial accumulator shape mismatch");
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void SystolicConfig::validate() const {
  if (rows == 0 || cols == 0 || pipeline_depth == 0 || k_dim == 0) {
    throw std::invalid_argument("systolic dimensions and pipeline depth must be >= 1");
  }
}

std::uint64_t cycle_count_closed_form(const SystolicConfig& cfg) {
  cfg.validate();
  if (cfg.dataflow != Dataflow::output_stationary) {
    throw std::invalid_argument(
        "no closed form for the operand-stationary dataflow; use simulate");
  }
  return 2 * cfg.rows + cfg.cols + cfg.pipeline_depth - 2;
}

TileResult simulate_tile(const ResidueMatrix& a, const ResidueMatrix& b,
                         const ModulusAssignment& mods, const SystolicConfig& cfg,
                         const ResidueMatrix* initial) {
  check_tile_shapes(a, b, mods, cfg, initial);
  const std::size_t rows = cfg.rows, cols = cfg.cols, depth = cfg.pipeline_depth;
  const std::size_t kd = cfg.k_dim;
  const std::size_t pes = rows * cols;

  std::vector<Operand> a_reg(pes), b_reg(pes), a_next(pes), b_next(pes);
  std::vector<InFlight> pipe(pes * depth);
  std::vector<Residue> acc(pes, 0);
  if (initial) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        acc[r * cols + c] = barrett_reduce((*initial)(r, c), mods.at(r, c));
      }
    }
  }

  const std::size_t total_macs = pes * kd;
  std::size_t retired = 0;
  std::uint64_t cycle = 0;
  while (retired < total_macs) {
    ++cycle;
    // Operands advance one PE; edges receive the skewed streams.
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t pe = r * cols + c;
        if (c == 0) {
          const std::int64_t k = static_cast<std::int64_t>(cycle) - 1 - static_cast<std::int64_t>(r);
          a_next[pe] = (k >= 0 && k < static_cast<std::int64_t>(kd))
                           ? Operand{true, a(r, static_cast<std::size_t>(k)), static_cast<std::size_t>(k)}
                           : Operand{};
        } else {
          a_next[pe] = a_reg[pe - 1];
        }
        if (r == 0) {
          const std::int64_t k = static_cast<std::int64_t>(cycle) - 1 - static_cast<std::int64_t>(c);
          b_next[pe] = (k >= 0 && k < static_cast<std::int64_t>(kd))
                           ? Operand{true, b(static_cast<std::size_t>(k), c), static_cast<std::size_t>(k)}
                           : Operand{};
        } else {
          b_next[pe] = b_reg[pe - cols];
        }
      }
    }
    std::swap(a_reg, a_next);
    std::swap(b_reg, b_next);

    const std::size_t issue_slot = cycle % depth;
    const std::size_t retire_slot = (cycle + 1) % depth;
    for (std::size_t pe = 0; pe < pes; ++pe) {
      InFlight* stages = &pipe[pe * depth];
      if (a_reg[pe].valid && b_reg[pe].valid) {
        FHECORE_CHECK(a_reg[pe].tag == b_reg[pe].tag, "operand skew misaligned");
        FHECORE_CHECK(!stages[issue_slot].valid, "PE pipeline slot busy");
        stages[issue_slot] = {true, static_cast<std::uint64_t>(a_reg[pe].value) * b_reg[pe].value,
                              a_reg[pe].tag};
      }
      // The op issued T - 1 cycles ago leaves the last stage this cycle.
      InFlight& done = stages[retire_slot];
      if (done.valid) {
        const std::size_t r = pe / cols, c = pe % cols;
        acc[pe] = barrett_reduce(acc[pe] + done.value, mods.at(r, c));
        done.valid = false;
        ++retired;
      }
    }
  }

  TileResult result{ResidueMatrix(rows, cols), cycle + 1};  // + write-back
  for (std::size_t pe = 0; pe < pes; ++pe) result.c(pe / cols, pe % cols) = acc[pe];
  return result;
}

TileResult simulate_tile_operand_stationary(const ResidueMatrix& a,
                                            const ResidueMatrix& b,
                                            const ModulusAssignment& mods,
                                            const SystolicConfig& cfg,
                                            const ResidueMatrix* initial) {
  check_tile_shapes(a, b, mods, cfg, initial);
  const std::size_t rows = cfg.rows, cols = cfg.cols, depth = cfg.pipeline_depth;
  const std::size_t kd = cfg.k_dim;
  const std::size_t pes = rows * cols;
  const std::size_t stream_rows = cfg.rows;  // rows of A

  // Partial sums entering the top of each column, one per A row.
  ResidueMatrix psum(stream_rows, cols);
  if (initial) {
    for (std::size_t m = 0; m < stream_rows; ++m) {
      for (std::size_t c = 0; c < cols; ++c) {
        psum(m, c) = barrett_reduce((*initial)(m, c), mods.at(m, c));
      }
    }
  }

  std::uint64_t total_cycles = 0;
  const std::size_t folds = ceil_div(kd, rows);
  for (std::size_t fold = 0; fold < folds; ++fold) {
    const std::size_t k0 = fold * rows;
    const std::size_t active = std::min(rows, kd - k0);

    std::vector<Operand> a_reg(pes), a_next(pes);
    std::vector<InFlight> pipe(pes * depth);
    std::vector<std::deque<InFlight>> inbox(pes);  // partial sums from above
    ResidueMatrix out(stream_rows, cols);
    std::size_t finished = 0;
    std::uint64_t cycle = 0;

    while (finished < stream_rows * cols) {
      ++cycle;
      for (std::size_t r = 0; r < active; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t pe = r * cols + c;
          if (c == 0) {
            // A(m, k0 + r) enters array row r at cycle 1 + m + r*T.
            const std::int64_t m = static_cast<std::int64_t>(cycle) - 1 -
                                   static_cast<std::int64_t>(r * depth);
            a_next[pe] = (m >= 0 && m < static_cast<std::int64_t>(stream_rows))
                             ? Operand{true, a(static_cast<std::size_t>(m), k0 + r),
                                       static_cast<std::size_t>(m)}
                             : Operand{};
          } else {
            a_next[pe] = a_reg[pe - 1];
          }
        }
      }
      std::swap(a_reg, a_next);

      const std::size_t issue_slot = cycle % depth;
      const std::size_t retire_slot = (cycle + 1) % depth;
      // Bottom-up so a partial sum forwarded this cycle is consumed next cycle.
      for (std::size_t r = active; r-- > 0;) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t pe = r * cols + c;
          InFlight* stages = &pipe[pe * depth];
          const Operand& op = a_reg[pe];
          if (op.valid) {
            std::uint64_t incoming;
            if (r == 0) {
              incoming = psum(op.tag, c);
            } else {
              FHECORE_CHECK(!inbox[pe].empty() && inbox[pe].front().tag == op.tag,
                            "partial sum not ready when operand arrived");
              incoming = inbox[pe].front().value;
              inbox[pe].pop_front();
            }
            FHECORE_CHECK(!stages[issue_slot].valid, "PE pipeline slot busy");
            const std::uint64_t v = barrett_reduce(
                incoming + static_cast<std::uint64_t>(op.value) * b(k0 + r, c),
                mods.at(op.tag, c));
            stages[issue_slot] = {true, v, op.tag};
          }
          InFlight& done = stages[retire_slot];
          if (done.valid) {
            if (r + 1 < active) {
              inbox[pe + cols].push_back(done);
            } else {
              out(done.tag, c) = static_cast<Residue>(done.value);
              ++finished;
            }
            done.valid = false;
          }
        }
      }
    }
    psum = std::move(out);
    total_cycles += cycle;
  }
  return TileResult{std::move(psum), total_cycles + 1};  // + write-back
}

TileResult run_tile(const ResidueMatrix& a, const ResidueMatrix& b,
                    const ModulusAssignment& mods, const SystolicConfig& cfg,
                    const ResidueMatrix* initial) {
  return cfg.dataflow == Dataflow::output_stationary
             ? simulate_tile(a, b, mods, cfg, initial)
             : simulate_tile_operand_stationary(a, b, mods, cfg, initial);
}

std::vector<TileOp> tile_schedule(std::size_t m, std::size_t n, std::size_t k,
                                  const SystolicConfig& cfg) {
  cfg.validate();
  const std::size_t ti = ceil_div(m, cfg.rows);
  const std::size_t tj = ceil_div(n, cfg.cols);
  const std::size_t tk = ceil_div(k, cfg.k_dim);
  std::vector<TileOp> ops;
  ops.reserve(ti * tj * tk);
  for (std::size_t i = 0; i < ti; ++i) {
    for (std::size_t j = 0; j < tj; ++j) {
      for (std::size_t kk = 0; kk < tk; ++kk) ops.push_back({i, j, kk});
    }
  }
  return ops;
}

MatMulRun mmm_large(const ResidueMatrix& a, const ResidueMatrix& b,
                    const ModulusAssignment& mods, const SystolicConfig& cfg) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul inner dimensions differ");
  mods.check_shape(a.rows(), b.cols());
  MatMulRun run{ResidueMatrix(a.rows(), b.cols()), 0, 0};
  std::optional<ResidueMatrix> partial;
  for (const TileOp& op : tile_schedule(a.rows(), b.cols(), a.cols(), cfg)) {
    const std::size_t r0 = op.i * cfg.rows, c0 = op.j * cfg.cols, k0 = op.k * cfg.k_dim;
    const ResidueMatrix at = a.block(r0, k0, cfg.rows, cfg.k_dim);
    const ResidueMatrix bt = b.block(k0, c0, cfg.k_dim, cfg.cols);
    const auto tile_mods = mods.slice(r0, cfg.rows, c0, cfg.cols);
    if (op.k == 0) partial.reset();
    TileResult tile = run_tile(at, bt, tile_mods, cfg, partial ? &*partial : nullptr);
    run.cycles += tile.cycles;
    ++run.tiles;
    partial = std::move(tile.c);
    if ((op.k + 1) * cfg.k_dim >= a.cols()) {
      for (std::size_t r = 0; r < cfg.rows && r0 + r < a.rows(); ++r) {
        for (std::size_t c = 0; c < cfg.cols && c0 + c < b.cols(); ++c) {
          run.c(r0 + r, c0 + c) = (*partial)(r, c);
        }
      }
    }
  }
  return run;
}

ResidueMatrix SystolicBackend::multiply(const ResidueMatrix& a,
                                        const ResidueMatrix& b,
                                        const ModulusAssignment& mods) const {
  MatMulRun run = mmm_large(a, b, mods, cfg_);
  cycles_ += run.cycles;
  tiles_ += run.tiles;
  ++products_;
  return std::move(run.c);
}

}  // namespace fhecore
