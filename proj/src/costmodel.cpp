// SPDX-License-Identifier: Apache-2.0

#include "fhecore/costmodel.hpp"

#include <bit>
#include <string>

namespace fhecore {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Phases of the pipelined NTT: two for the tiled four-step, one per radix-16
// level otherwise.
std::uint64_t ntt_passes(std::size_t n, NttStrategy strategy) {
  return strategy == NttStrategy::tensorfhe_tile
             ? 2
             : static_cast<std::uint64_t>(std::countr_zero(n)) / 4;
}

}  // namespace

InstructionMix& InstructionMix::operator+=(const InstructionMix& o) {
  fhec_ops += o.fhec_ops;
  gemm_ops += o.gemm_ops;
  scalar_ops += o.scalar_ops;
  ldst_ops += o.ldst_ops;
  return *this;
}

InstructionMix InstructionMix::scaled(std::uint64_t factor) const {
  return {fhec_ops * factor, gemm_ops * factor, scalar_ops * factor, ldst_ops * factor};
}

void LatencyModel::validate() const {
  if (fhec_latency == 0 || gemm_latency == 0 || scalar_throughput == 0 ||
      ldst_throughput == 0) {
    throw std::invalid_argument("latencies and throughputs must be positive");
  }
}

std::uint64_t serial_cycles(const InstructionMix& mix, const LatencyModel& lat) {
  lat.validate();
  return mix.fhec_ops * lat.fhec_latency + mix.gemm_ops * lat.gemm_latency +
         ceil_div(mix.scalar_ops, lat.scalar_throughput) +
         ceil_div(mix.ldst_ops, lat.ldst_throughput);
}

std::size_t chunk_count(OperandWidth width) {
  return static_cast<std::size_t>(width) / 8;
}

std::uint64_t gemms_per_mmm(OperandWidth width) {
  const std::uint64_t c = chunk_count(width);
  return c * c;
}

std::uint64_t mmm_count(std::size_t m, std::size_t n, std::size_t k) {
  return ceil_div(m, kMmmTile) * ceil_div(n, kMmmTile) * ceil_div(k, kMmmTile);
}

std::vector<std::vector<std::uint8_t>> split_to_chunks(std::span<const std::uint32_t> values,
                                                       OperandWidth width) {
  const std::size_t chunks = chunk_count(width);
  std::vector<std::vector<std::uint8_t>> out(chunks, std::vector<std::uint8_t>(values.size()));
  for (std::size_t e = 0; e < values.size(); ++e) {
    const std::uint64_t v = values[e];
    for (std::size_t i = 0; i < chunks; ++i) {
      out[i][e] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
    }
  }
  return out;
}

std::vector<std::uint64_t> recombine_chunks(const std::vector<std::vector<std::uint8_t>>& chunks) {
  if (chunks.empty()) return {};
  std::vector<std::uint64_t> out(chunks.front().size(), 0);
  for (std::size_t i = chunks.size(); i-- > 0;) {
    for (std::size_t e = 0; e < out.size(); ++e) out[e] = (out[e] << 8) | chunks[i][e];
  }
  return out;
}

PathResult tc_gemm_path(const ResidueMatrix& a, const ResidueMatrix& b,
                        const Modulus& m, OperandWidth width, const LatencyModel& lat) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul inner dimensions differ");
  const std::size_t rows = a.rows(), cols = b.cols(), inner = a.cols();
  // 8-bit chunk products summed over `inner` must stay inside INT32 accumulators.
  FHECORE_CHECK(static_cast<std::uint64_t>(inner) * 255 * 255 < (1ULL << 31),
                "reduction dimension too long for INT32 chunk accumulation");

  const auto ca = split_to_chunks(a.data(), width);
  const auto cb = split_to_chunks(b.data(), width);
  const std::size_t chunks = ca.size();

  // partial[s] collects every chunk-pair product with i + j == s.
  std::vector<std::vector<std::uint64_t>> partial(2 * chunks - 1,
                                                  std::vector<std::uint64_t>(rows * cols, 0));
  std::vector<std::int32_t> gemm(rows * cols);
  for (std::size_t i = 0; i < chunks; ++i) {
    for (std::size_t j = 0; j < chunks; ++j) {
      std::fill(gemm.begin(), gemm.end(), 0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < inner; ++k) {
          const std::int32_t lhs = ca[i][r * inner + k];
          for (std::size_t c = 0; c < cols; ++c) {
            gemm[r * cols + c] += lhs * static_cast<std::int32_t>(cb[j][k * cols + c]);
          }
        }
      }
      auto& dst = partial[i + j];
      for (std::size_t e = 0; e < gemm.size(); ++e) dst[e] += static_cast<std::uint64_t>(gemm[e]);
    }
  }

  PathResult res{ResidueMatrix(rows, cols), {}, 0};
  auto out = res.c.data();
  for (std::size_t e = 0; e < out.size(); ++e) {
    std::uint64_t r = 0;
    for (std::size_t s = partial.size(); s-- > 0;) r = barrett_reduce((r << 8) + partial[s][e], m);
    out[e] = static_cast<Residue>(r);
  }

  res.mix.gemm_ops = mmm_count(rows, cols, inner) * gemms_per_mmm(width);
  res.mix.scalar_ops = rows * inner + inner * cols  // split
                       + rows * cols;               // merge
  res.cycles = serial_cycles(res.mix, lat);
  return res;
}

PathResult fhec_path(const ResidueMatrix& a, const ResidueMatrix& b,
                     const ModulusAssignment& mods, const LatencyModel& lat,
                     const SystolicConfig& cfg) {
  MatMulRun run = mmm_large(a, b, mods, cfg);
  PathResult res{std::move(run.c), {}, 0};
  res.mix.fhec_ops = mmm_count(a.rows(), b.cols(), a.cols());
  res.cycles = serial_cycles(res.mix, lat);
  return res;
}

std::uint64_t ntt_kernel_call_count(std::size_t n, NttStrategy strategy) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("NTT size must be a power of two, got " + std::to_string(n));
  }
  const int log_n = std::countr_zero(n);
  if (strategy == NttStrategy::tensorfhe_tile) {
    if (log_n % 2 != 0 || n < kMmmTile * kMmmTile) {
      throw std::invalid_argument("tensorfhe_tile needs N = s^2 with s a multiple of 16, got N=" +
                                  std::to_string(n));
    }
    const std::uint64_t blocks = (std::uint64_t{1} << (log_n / 2)) / kMmmTile;
    return 2 * blocks * blocks * blocks;
  }
  if (log_n % 4 != 0 || n < kMmmTile * kMmmTile) {
    throw std::invalid_argument("warpdrive_radix16 needs N = 16^l with l >= 2, got N=" +
                                std::to_string(n));
  }
  return static_cast<std::uint64_t>(log_n / 4) * (n / (kMmmTile * kMmmTile));
}

void KernelDescriptor::validate() const {
  if (!is_power_of_two(n)) throw std::invalid_argument("kernel N must be a power of two");
  if (repeat == 0) throw std::invalid_argument("kernel repeat must be >= 1");
  const bool is_ntt = kind == KernelKind::ntt || kind == KernelKind::intt;
  if (strategy && !is_ntt) {
    throw std::invalid_argument("strategy is only valid on ntt/intt kernels");
  }
  if (kind == KernelKind::baseconv) {
    if (alpha == 0 || target == 0) throw std::invalid_argument("baseconv needs alpha, L >= 1");
  } else if (limbs == 0) {
    throw std::invalid_argument("kernel needs at least one limb");
  }
}

CostReport estimate_kernel(const KernelDescriptor& k, const LatencyModel& lat,
                           ExecPath path, const CostOptions& opts) {
  k.validate();
  CostReport rep;
  rep.label = k.label.empty() ? to_string(k.kind) : k.label;
  rep.path = path;
  InstructionMix mix;
  const std::uint64_t n = k.n;
  const bool tc = path == ExecPath::tensor_core;

  switch (k.kind) {
    case KernelKind::ntt:
    case KernelKind::intt: {
      const NttStrategy strategy = k.strategy.value_or(NttStrategy::tensorfhe_tile);
      rep.mmm_count = ntt_kernel_call_count(k.n, strategy) * k.limbs;
      const std::uint64_t boundaries = ntt_passes(k.n, strategy) - 1;
      const std::uint64_t elems = n * k.limbs;
      if (opts.count_ntt_twiddle_scaling) mix.scalar_ops += boundaries * elems;
      if (tc) {
        mix.gemm_ops = rep.mmm_count * gemms_per_mmm(k.width);
        mix.scalar_ops += (1 + boundaries + 1) * elems;  // split, mid(s), merge
      } else {
        mix.fhec_ops = rep.mmm_count;
      }
      break;
    }
    case KernelKind::baseconv: {
      rep.mmm_count = mmm_count(k.target, k.n, k.alpha);
      mix.scalar_ops = k.alpha * n;  // scale by Phat_j^-1
      if (tc) {
        mix.gemm_ops = rep.mmm_count * gemms_per_mmm(k.width);
        mix.scalar_ops += k.alpha * n + k.target * n;  // split, merge
      } else {
        mix.fhec_ops = rep.mmm_count;
      }
      break;
    }
    case KernelKind::elementwise:
      mix.scalar_ops = n * k.limbs;
      break;
    case KernelKind::automorphism:
      mix.scalar_ops = n;  // address generation
      mix.ldst_ops = n * k.limbs;
      break;
  }
  rep.mmm_count *= k.repeat;
  rep.mix = mix.scaled(k.repeat);
  rep.cycles = serial_cycles(rep.mix, lat);
  return rep;
}

ComparisonReport compare_workload(const WorkloadDescriptor& w, const LatencyModel& lat,
                                  const CostOptions& opts) {
  if (w.kernels.empty()) throw std::invalid_argument("workload has no kernels");
  ComparisonReport rep;
  rep.workload = w.name;
  for (const auto& k : w.kernels) {
    for (auto [path, totals] : {std::pair{ExecPath::tensor_core, &rep.tensor_core},
                                std::pair{ExecPath::fhec, &rep.fhec}}) {
      CostReport c = estimate_kernel(k, lat, path, opts);
      totals->mix += c.mix;
      totals->cycles += c.cycles;
      totals->kernels.push_back(std::move(c));
    }
  }
  const auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  rep.instruction_ratio = ratio(rep.tensor_core.mix.total(), rep.fhec.mix.total());
  rep.cycle_ratio = ratio(rep.tensor_core.cycles, rep.fhec.cycles);
  return rep;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::ntt: return "ntt";
    case KernelKind::intt: return "intt";
    case KernelKind::baseconv: return "baseconv";
    case KernelKind::elementwise: return "elementwise";
    case KernelKind::automorphism: return "automorphism";
  }
  return "?";
}

std::string to_string(NttStrategy strategy) {
  return strategy == NttStrategy::tensorfhe_tile ? "tensorfhe_tile" : "warpdrive_radix16";
}

std::string to_string(ExecPath path) {
  return path == ExecPath::fhec ? "fhec" : "tensor_core";
}

KernelKind parse_kernel_kind(const std::string& s) {
  for (auto k : {KernelKind::ntt, KernelKind::intt, KernelKind::baseconv,
                 KernelKind::elementwise, KernelKind::automorphism}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unsupported kernel kind: " + s);
}

NttStrategy parse_ntt_strategy(const std::string& s) {
  if (s == "tensorfhe_tile") return NttStrategy::tensorfhe_tile;
  if (s == "warpdrive_radix16") return NttStrategy::warpdrive_radix16;
  throw std::invalid_argument("unknown NTT strategy: " + s);
}

}  // namespace fhecore
