// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "fhecore/baseconv.hpp"
#include "fhecore/cli.hpp"
#include "fhecore/ntt.hpp"
#include "fhecore/polyring.hpp"
#include "fhecore/systolic.hpp"

namespace fhecore::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<Residue> random_vector(std::mt19937_64& rng, std::size_t n, const Modulus& m) {
  std::vector<Residue> v(n);
  for (auto& x : v) x = static_cast<Residue>(rng() % m.value());
  return v;
}

ordered_json modulus_list(const std::vector<Modulus>& ms) {
  ordered_json out = ordered_json::array();
  for (const auto& m : ms) out.push_back(m.value());
  return out;
}

std::vector<Modulus> moduli_from(const ordered_json& list) {
  std::vector<Modulus> out;
  for (const auto& q : list) out.push_back(make_modulus(q.get<std::uint64_t>()));
  return out;
}

const char* verdict(bool ok) { return ok ? "pass" : "fail"; }

void add_mix(Report& r, const std::string& prefix, const InstructionMix& mix, std::uint64_t cycles) {
  r.add(prefix + ".fhec_ops", mix.fhec_ops);
  r.add(prefix + ".gemm_ops", mix.gemm_ops);
  r.add(prefix + ".scalar_ops", mix.scalar_ops);
  r.add(prefix + ".ldst_ops", mix.ldst_ops);
  r.add(prefix + ".instructions", mix.total());
  r.add(prefix + ".cycles", cycles);
}

OperandWidth width_of(const ordered_json& p) {
  return p.at("width").get<int>() == 64 ? OperandWidth::w64 : OperandWidth::w32;
}

Report run_ntt(const RunConfig& cfg) {
  const auto& p = cfg.params;
  const int log_n = p.at("logN").get<int>();
  const std::size_t n = std::size_t{1} << log_n;
  const NttMode mode = p.at("mode").get<std::string>() == "cyclic" ? NttMode::cyclic
                                                                   : NttMode::negacyclic;
  const std::size_t order = mode == NttMode::cyclic ? n : 2 * n;
  std::vector<Modulus> moduli = moduli_from(p.at("moduli"));
  if (moduli.empty()) {
    moduli = find_ntt_primes(p.at("modulus_bits").get<int>(), p.at("modulus_count").get<std::size_t>(),
                             order);
  }
  for (const auto& m : moduli) {
    if ((m.value() - 1) % order != 0) {
      throw ConfigError("modulus " + std::to_string(m.value()) +
                        " is not NTT-friendly for this order (need q = 1 mod " +
                        std::to_string(order) + ")");
    }
  }
  std::size_t n1 = p.at("N1").get<std::size_t>();
  if (n1 == 0) n1 = std::size_t{1} << ((log_n + 1) / 2);
  const std::size_t n2 = n / n1;
  const auto strategy = parse_ntt_strategy(p.at("strategy").get<std::string>());
  const bool systolic = p.at("executor").get<std::string>() == "systolic";
  const std::size_t vectors = p.at("vectors").get<std::size_t>();

  Report r;
  r.add("N", n);
  r.add("N1", n1);
  r.add("N2", n2);
  r.add("mode", mode == NttMode::cyclic ? "cyclic" : "negacyclic");
  r.add("moduli", modulus_list(moduli));
  r.add("executor", systolic ? "systolic" : "direct");
  r.add("vectors", vectors);

  std::mt19937_64 rng(cfg.seed);
  SystolicBackend sys_backend;
  DirectMatMul direct_backend;
  const MatMulBackend& backend =
      systolic ? static_cast<const MatMulBackend&>(sys_backend) : direct_backend;
  const bool full_check = n <= 4096;
  bool direct_ok = true;
  bool roundtrip_ok = true;
  ordered_json roots = ordered_json::array();
  for (const auto& m : moduli) {
    const NttPlan plan = build_ntt_plan(n, n1, n2, m, mode);
    roots.push_back(mode == NttMode::cyclic ? plan.omega() : plan.psi());
    for (std::size_t v = 0; v < vectors; ++v) {
      const auto a = random_vector(rng, n, m);
      const auto fast = ntt_4step(a, plan, backend);
      if (full_check) {
        const auto ref = mode == NttMode::cyclic ? ntt_direct(a, m, plan.omega())
                                                 : negacyclic_ntt_direct(a, m, plan.psi());
        direct_ok = direct_ok && fast == ref;
      }
      roundtrip_ok = roundtrip_ok && intt_4step(fast, plan, backend) == a;
    }
  }
  r.add("roots", roots);
  r.add("direct_check", full_check ? verdict(direct_ok) : "skipped (N > 4096)");
  r.add("roundtrip_check", verdict(roundtrip_ok));
  r.ok = direct_ok && roundtrip_ok;
  if (systolic) {
    r.add("systolic.tiles", sys_backend.total_tiles());
    r.add("systolic.cycles", sys_backend.total_cycles());
  }

  // Cost of one forward transform per limb with the chosen tiling strategy.
  KernelDescriptor k;
  k.kind = KernelKind::ntt;
  k.n = n;
  k.limbs = moduli.size();
  k.strategy = strategy;
  k.width = width_of(p);
  const LatencyModel lat;
  r.add("strategy", to_string(strategy));
  r.add("width", p.at("width"));
  r.add("fhec_mmm_calls_per_limb", ntt_kernel_call_count(n, strategy));
  const auto tc = estimate_kernel(k, lat, ExecPath::tensor_core);
  const auto fh = estimate_kernel(k, lat, ExecPath::fhec);
  add_mix(r, "cost.tensor_core", tc.mix, tc.cycles);
  add_mix(r, "cost.fhec", fh.mix, fh.cycles);
  r.add("cost.instruction_ratio",
        static_cast<double>(tc.mix.total()) / static_cast<double>(fh.mix.total()));
  return r;
}

Report run_baseconv(const RunConfig& cfg) {
  const auto& p = cfg.params;
  const std::size_t n = std::size_t{1} << p.at("logN").get<int>();
  std::vector<Modulus> source = moduli_from(p.at("source_moduli"));
  std::vector<Modulus> target = moduli_from(p.at("target_moduli"));
  if (source.empty()) {
    const auto alpha = p.at("alpha").get<std::size_t>();
    auto all = find_ntt_primes(p.at("modulus_bits").get<int>(),
                               alpha + p.at("L").get<std::size_t>(), 2 * n);
    source.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(alpha));
    target.assign(all.begin() + static_cast<std::ptrdiff_t>(alpha), all.end());
  }
  BaseConvPlan plan = [&] {
    try {
      return build_baseconv_plan(source, target);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const bool systolic = p.at("executor").get<std::string>() == "systolic";

  std::mt19937_64 rng(cfg.seed);
  ResidueMatrix a(plan.alpha(), n);
  for (std::size_t j = 0; j < plan.alpha(); ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      a(j, c) = static_cast<Residue>(rng() % source[j].value());
    }
  }
  SystolicBackend sys_backend;
  DirectMatMul direct_backend;
  const MatMulBackend& backend =
      systolic ? static_cast<const MatMulBackend&>(sys_backend) : direct_backend;
  const auto ref = baseconv_direct(a, plan);
  const auto got = baseconv_matrix(a, plan, backend);

  Report r;
  r.add("N", n);
  r.add("alpha", plan.alpha());
  r.add("L", plan.target_count());
  r.add("source_moduli", modulus_list(source));
  r.add("target_moduli", modulus_list(target));
  r.add("executor", systolic ? "systolic" : "direct");
  r.add("matrix_equals_direct", verdict(got == ref));
  r.ok = got == ref;
  if (systolic) {
    r.add("systolic.tiles", sys_backend.total_tiles());
    r.add("systolic.cycles", sys_backend.total_cycles());
  }

  KernelDescriptor k;
  k.kind = KernelKind::baseconv;
  k.n = n;
  k.alpha = plan.alpha();
  k.target = plan.target_count();
  k.width = width_of(p);
  const LatencyModel lat;
  const auto tc = estimate_kernel(k, lat, ExecPath::tensor_core);
  const auto fh = estimate_kernel(k, lat, ExecPath::fhec);
  r.add("width", p.at("width"));
  r.add("mmm_count", fh.mmm_count);
  add_mix(r, "cost.tensor_core", tc.mix, tc.cycles);
  add_mix(r, "cost.fhec", fh.mix, fh.cycles);
  r.add("cost.instruction_ratio",
        static_cast<double>(tc.mix.total()) / static_cast<double>(fh.mix.total()));
  return r;
}

Report run_simulate(const RunConfig& cfg) {
  const auto& p = cfg.params;
  SystolicConfig sc;
  sc.rows = p.at("rows").get<std::size_t>();
  sc.cols = p.at("cols").get<std::size_t>();
  sc.pipeline_depth = p.at("pipeline_depth").get<std::size_t>();
  sc.k_dim = p.at("k_dim").get<std::size_t>();
  sc.dataflow = p.at("dataflow").get<std::string>() == "operand_stationary"
                    ? Dataflow::operand_stationary
                    : Dataflow::output_stationary;
  sc.validate();

  const std::string axis = p.at("modulus_axis").get<std::string>();
  std::vector<Modulus> moduli = moduli_from(p.at("moduli"));
  if (moduli.empty()) {
    const std::size_t count = axis == "per_row" ? sc.rows : axis == "per_column" ? sc.cols : 1;
    moduli = find_ntt_primes(p.at("modulus_bits").get<int>(), count, 2);
  }
  const ModulusAssignment mods = axis == "per_row"      ? ModulusAssignment::per_row(moduli)
                                 : axis == "per_column" ? ModulusAssignment::per_column(moduli)
                                                        : ModulusAssignment::shared(moduli.front());

  std::mt19937_64 rng(cfg.seed);
  const DirectMatMul oracle;
  const auto trials = p.at("trials").get<std::size_t>();
  bool ok = true;
  std::uint64_t cycles = 0;
  SystolicConfig os = sc;
  os.dataflow = Dataflow::output_stationary;
  SystolicConfig opst = sc;
  opst.dataflow = Dataflow::operand_stationary;
  std::uint64_t os_cycles = 0;
  std::uint64_t opst_cycles = 0;
  // Operand values below every modulus in play keep the oracle meaningful
  // for all three modulus axes.
  std::uint64_t qmin = moduli.front().value();
  for (const auto& m : moduli) qmin = std::min<std::uint64_t>(qmin, m.value());
  for (std::size_t t = 0; t < trials; ++t) {
    ResidueMatrix a(sc.rows, sc.k_dim);
    ResidueMatrix b(sc.k_dim, sc.cols);
    for (auto& x : a.data()) x = static_cast<Residue>(rng() % qmin);
    for (auto& x : b.data()) x = static_cast<Residue>(rng() % qmin);
    const auto want = oracle.multiply(a, b, mods);
    const auto got_os = run_tile(a, b, mods, os);
    const auto got_opst = run_tile(a, b, mods, opst);
    ok = ok && got_os.c == want && got_opst.c == want;
    os_cycles = got_os.cycles;
    opst_cycles = got_opst.cycles;
    cycles = sc.dataflow == Dataflow::output_stationary ? os_cycles : opst_cycles;
  }

  Report r;
  r.add("rows", sc.rows);
  r.add("cols", sc.cols);
  r.add("pipeline_depth", sc.pipeline_depth);
  r.add("k_dim", sc.k_dim);
  r.add("dataflow", p.at("dataflow"));
  r.add("modulus_axis", axis);
  r.add("moduli", modulus_list(moduli));
  r.add("tile_cycles", cycles);
  r.add("closed_form_cycles", cycle_count_closed_form(os));
  r.add("output_stationary_cycles", os_cycles);
  r.add("operand_stationary_cycles", opst_cycles);
  r.add("trials", trials);
  r.add("functional_check", verdict(ok));
  r.ok = ok;
  return r;
}

Report run_cost(const RunConfig& cfg) {
  const auto& p = cfg.params;
  const auto w = load_workload(cfg.base_dir / p.at("workload").get<std::string>());
  LatencyModel lat;
  lat.fhec_latency = p.at("fhec_latency").get<std::uint64_t>();
  lat.gemm_latency = p.at("gemm_latency").get<std::uint64_t>();
  lat.scalar_throughput = p.at("scalar_throughput").get<std::uint64_t>();
  lat.ldst_throughput = p.at("ldst_throughput").get<std::uint64_t>();
  CostOptions opts;
  opts.count_ntt_twiddle_scaling = p.at("count_ntt_twiddle_scaling").get<bool>();
  const auto cmp = compare_workload(w, lat, opts);

  Report r;
  r.add("workload", cmp.workload);
  for (const auto& [k, v] : w.metadata) r.add("metadata." + k, v);
  for (std::size_t i = 0; i < w.kernels.size(); ++i) {
    const std::string prefix = "kernel." + std::to_string(i);
    r.add(prefix + ".label", cmp.fhec.kernels[i].label);
    r.add(prefix + ".mmm_count", cmp.fhec.kernels[i].mmm_count);
    r.add(prefix + ".tensor_core.instructions", cmp.tensor_core.kernels[i].mix.total());
    r.add(prefix + ".tensor_core.cycles", cmp.tensor_core.kernels[i].cycles);
    r.add(prefix + ".fhec.instructions", cmp.fhec.kernels[i].mix.total());
    r.add(prefix + ".fhec.cycles", cmp.fhec.kernels[i].cycles);
  }
  add_mix(r, "tensor_core", cmp.tensor_core.mix, cmp.tensor_core.cycles);
  add_mix(r, "fhec", cmp.fhec.mix, cmp.fhec.cycles);
  r.add("instruction_ratio", cmp.instruction_ratio);
  r.add("cycle_ratio", cmp.cycle_ratio);
  return r;
}

Report run_selftest(const RunConfig& cfg) {
  Report r;
  bool all = true;
  auto check = [&](const std::string& name, bool ok) {
    r.add("check." + name, verdict(ok));
    all = all && ok;
  };
  const auto q17 = make_modulus(17);
  check("barrett", barrett_reduce(313, q17) == 7 && mod_mul(13, 13, q17) == 16);
  check("mod_pow_inv", mod_pow(4, 4, q17) == 1 && mod_inv(2, make_modulus(5)) == 3 &&
                           mod_inv(5, make_modulus(7)) == 3);
  check("root_of_unity", find_root_of_unity(4, q17) == 4);
  {
    const std::vector<Residue> a = {1, 2, 3, 4};
    check("ntt_direct", ntt_direct(a, q17, 4) == std::vector<Residue>{10, 7, 15, 6});
  }
  {
    std::mt19937_64 rng(cfg.seed);
    const auto q = find_ntt_primes(31, 1, 512).front();
    bool ok = true;
    for (auto mode : {NttMode::cyclic, NttMode::negacyclic}) {
      const auto plan = build_ntt_plan(256, 16, 16, q, mode);
      const auto a = random_vector(rng, 256, q);
      const auto ref = mode == NttMode::cyclic ? ntt_direct(a, q, plan.omega())
                                               : negacyclic_ntt_direct(a, q, plan.psi());
      const auto fast = ntt_4step(a, plan, SystolicBackend{});
      ok = ok && fast == ref && intt_4step(fast, plan) == a;
    }
    check("ntt_4step", ok);
  }
  {
    const auto plan = build_baseconv_plan({make_modulus(5), make_modulus(7)}, {make_modulus(11)});
    ResidueMatrix a(2, 1, {18 % 5, 18 % 7});
    const auto out = baseconv_direct(a, plan);
    check("baseconv", out(0, 0) == 9 && baseconv_matrix(a, plan, SystolicBackend{}) == out);
  }
  {
    const auto map = automorphism_map(1, 8);
    check("automorphism",
          map.slot_perm == std::vector<std::size_t>{2, 7, 4, 1, 6, 3, 0, 5});
  }
  {
    const SystolicConfig sc;
    ResidueMatrix a(16, 16), b(16, 8);
    check("tile_cycles", run_tile(a, b, ModulusAssignment::shared(q17), sc).cycles == 44 &&
                             cycle_count_closed_form(sc) == 44);
  }
  {
    KernelDescriptor k;
    k.strategy = NttStrategy::tensorfhe_tile;
    check("ntt_call_count", estimate_kernel(k, LatencyModel{}, ExecPath::fhec).mix.fhec_ops == 8192);
  }
  r.ok = all;
  return r;
}

std::string cell(const ordered_json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

const ordered_json* Report::find(const std::string& key) const {
  for (const auto& [k, v] : rows) {
    if (k == key) return &v;
  }
  return nullptr;
}

ordered_json Report::to_json(const RunConfig& cfg) const {
  ordered_json doc;
  doc["command"] = to_string(cfg.command);
  doc["seed"] = cfg.seed;
  doc["config"] = cfg.params;
  ordered_json results = ordered_json::object();
  for (const auto& [k, v] : rows) results[k] = v;
  doc["results"] = std::move(results);
  doc["status"] = ok ? "ok" : "check_failed";
  return doc;
}

std::string Report::to_text() const {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::ostringstream os;
  for (const auto& [k, v] : rows) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << k << cell(v) << '\n';
  }
  return os.str();
}

Report execute(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::ntt: return run_ntt(cfg);
    case Command::baseconv: return run_baseconv(cfg);
    case Command::simulate: return run_simulate(cfg);
    case Command::cost: return run_cost(cfg);
    case Command::selftest: return run_selftest(cfg);
  }
  throw InternalError("unhandled command");
}

int run(const RunConfig& cfg, std::ostream& text, std::ostream& err) {
  Report report;
  try {
    report = execute(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  text << "fhecore-sim " << to_string(cfg.command) << " (seed " << cfg.seed << ")\n";
  text << report.to_text();
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) {
      err << "error: cannot write report to " << cfg.out.string() << '\n';
      return 1;
    }
    out << report.to_json(cfg).dump(2) << '\n';
  }
  if (!report.ok) {
    err << "self-check failed\n";
    return 2;
  }
  return 0;
}

int main_entry(int argc, char** argv, std::ostream& text, std::ostream& err) {
  CLI::App app{"Systolic modular-MMM simulator and FHE kernel cost model"};
  Invocation inv;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("command", inv.command, "ntt | baseconv | simulate | cost | selftest")
      ->required();
  app.add_option("overrides", inv.overrides, "key=value settings applied over the config");
  auto* config_opt = app.add_option("--config,-c", config, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed for generated inputs");
  auto* out_opt = app.add_option("--out,-o", out, "path of the JSON report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      text << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (*config_opt) inv.config_path = config;
  if (*seed_opt) inv.seed = seed;
  if (*out_opt) inv.out = out;
  RunConfig cfg;
  try {
    cfg = parse_config(inv);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return run(cfg, text, err);
}

}  // namespace fhecore::cli
