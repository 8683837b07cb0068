// SPDX-License-Identifier: Apache-2.0

#include "fhecore/ntt.hpp"

#include <bit>
#include <functional>
#include <random>
#include <string>

namespace fhecore {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Residue> power_table(Residue root, std::size_t count,
                                 const Modulus& m) {
  std::vector<Residue> pw(count);
  Residue x = 1;
  for (std::size_t i = 0; i < count; ++i) {
    pw[i] = x;
    x = mod_mul(x, root, m);
  }
  return pw;
}

// sum_j a[j] * pw[exponent(j)], lazily reduced. exponent(j) must already be
// reduced into [0, pw.size()).
template <typename ExponentFn>
Residue dot_with_powers(std::span<const Residue> a,
                        const std::vector<Residue>& pw, const Modulus& m,
                        ExponentFn exponent) {
  const std::uint64_t budget = m.lazy_budget();
  std::uint64_t acc = 0;
  std::uint64_t pending = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    acc += static_cast<std::uint64_t>(a[j]) * pw[exponent(j)];
    if (++pending == budget) {
      acc = barrett_reduce(acc, m);
      pending = 0;
    }
  }
  return barrett_reduce(acc, m);
}

void check_length(std::size_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("transform length must be a power of two, got " +
                                std::to_string(n));
  }
}

void check_reduced(std::span<const Residue> a, const Modulus& m) {
  for (Residue x : a) {
    if (x >= m.value()) throw std::invalid_argument("input residue not below q");
  }
}

std::vector<Residue> cyclic_transform(std::span<const Residue> a,
                                      const Modulus& m, Residue omega) {
  const std::size_t n = a.size();
  const auto pw = power_table(omega, n, m);
  std::vector<Residue> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = dot_with_powers(a, pw, m, [&](std::size_t j) { return (j * k) & (n - 1); });
  }
  return out;
}

ResidueMatrix twiddle_matrix(std::size_t rows, std::size_t cols,
                             const std::vector<Residue>& pw,
                             const std::function<std::size_t(std::size_t, std::size_t)>& exponent,
                             Residue scale, const Modulus& m) {
  const std::size_t period = pw.size();
  ResidueMatrix w(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      w(i, j) = mod_mul(pw[exponent(i, j) % period], scale, m);
    }
  }
  return w;
}

std::vector<Residue> four_step(std::span<const Residue> a, const NttPlan& plan,
                               const ResidueMatrix& w1, const ResidueMatrix& w2,
                               const ResidueMatrix& w3,
                               const MatMulBackend& backend) {
  const std::size_t n1 = plan.n1(), n2 = plan.n2();
  if (a.size() != plan.n()) {
    throw std::invalid_argument("length mismatch: plan has N=" +
                                std::to_string(plan.n()) + ", input has " +
                                std::to_string(a.size()));
  }
  const auto shared = ModulusAssignment::shared(plan.modulus());
  ResidueMatrix x(n1, n2);
  for (std::size_t c = 0; c < n2; ++c) {
    for (std::size_t r = 0; r < n1; ++r) x(r, c) = a[r + n1 * c];
  }
  const ResidueMatrix y = backend.multiply(x, w1, shared);
  const ResidueMatrix t = hadamard(y.transpose(), w2, plan.modulus());
  const ResidueMatrix res = backend.multiply(t, w3, shared);
  std::vector<Residue> out(plan.n());
  for (std::size_t k1 = 0; k1 < n1; ++k1) {
    for (std::size_t k2 = 0; k2 < n2; ++k2) out[k2 + n2 * k1] = res(k2, k1);
  }
  return out;
}

}  // namespace

std::vector<Residue> ntt_direct(std::span<const Residue> a, const Modulus& m,
                                Residue omega) {
  check_length(a.size());
  if (!has_order(omega, a.size(), m)) {
    throw std::invalid_argument("invalid root: " + std::to_string(omega) +
                                " does not have order " + std::to_string(a.size()));
  }
  check_reduced(a, m);
  return cyclic_transform(a, m, omega);
}

std::vector<Residue> intt_direct(std::span<const Residue> a_hat,
                                 const Modulus& m, Residue omega) {
  check_length(a_hat.size());
  if (!has_order(omega, a_hat.size(), m)) {
    throw std::invalid_argument("invalid root: " + std::to_string(omega) +
                                " does not have order " +
                                std::to_string(a_hat.size()));
  }
  check_reduced(a_hat, m);
  auto out = cyclic_transform(a_hat, m, mod_inv(omega, m));
  const Residue n_inv = mod_inv(static_cast<Residue>(a_hat.size() % m.value()), m);
  for (auto& x : out) x = mod_mul(x, n_inv, m);
  return out;
}

std::vector<Residue> negacyclic_ntt_direct(std::span<const Residue> a,
                                           const Modulus& m, Residue psi) {
  const std::size_t n = a.size();
  check_length(n);
  if (!has_order(psi, 2 * n, m)) {
    throw std::invalid_argument("invalid root: " + std::to_string(psi) +
                                " does not have order " + std::to_string(2 * n));
  }
  check_reduced(a, m);
  const auto pw = power_table(psi, 2 * n, m);
  std::vector<Residue> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = dot_with_powers(a, pw, m, [&](std::size_t j) {
      return (j * (2 * k + 1)) & (2 * n - 1);
    });
  }
  return out;
}

std::vector<Residue> negacyclic_intt_direct(std::span<const Residue> a_hat,
                                            const Modulus& m, Residue psi) {
  const std::size_t n = a_hat.size();
  check_length(n);
  if (!has_order(psi, 2 * n, m)) {
    throw std::invalid_argument("invalid root: " + std::to_string(psi) +
                                " does not have order " + std::to_string(2 * n));
  }
  check_reduced(a_hat, m);
  const auto pw = power_table(mod_inv(psi, m), 2 * n, m);
  const Residue n_inv = mod_inv(static_cast<Residue>(n % m.value()), m);
  std::vector<Residue> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Residue s = dot_with_powers(a_hat, pw, m, [&](std::size_t k) {
      return (j * (2 * k + 1)) & (2 * n - 1);
    });
    out[j] = mod_mul(s, n_inv, m);
  }
  return out;
}

std::vector<Residue> negacyclic_convolve_ref(std::span<const Residue> a,
                                             std::span<const Residue> b,
                                             const Modulus& m) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  const std::size_t n = a.size();
  std::vector<Residue> c(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Residue p = mod_mul(a[i], b[j], m);
      const std::size_t k = i + j;
      if (k < n) {
        c[k] = mod_add(c[k], p, m);
      } else {
        c[k - n] = mod_sub(c[k - n], p, m);
      }
    }
  }
  return c;
}

std::vector<Residue> cyclic_convolve_ref(std::span<const Residue> a,
                                         std::span<const Residue> b,
                                         const Modulus& m) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  const std::size_t n = a.size();
  std::vector<Residue> c(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = (i + j) % n;
      c[k] = mod_add(c[k], mod_mul(a[i], b[j], m), m);
    }
  }
  return c;
}

NttPlan build_ntt_plan(std::size_t n, std::size_t n1, std::size_t n2,
                       const Modulus& m, NttMode mode) {
  if (!is_power_of_two(n) || n1 == 0 || n2 == 0 || n1 * n2 != n) {
    throw std::invalid_argument("invalid NTT dimensions: N=" + std::to_string(n) +
                                ", N1=" + std::to_string(n1) +
                                ", N2=" + std::to_string(n2));
  }
  NttPlan plan(m);
  plan.n_ = n;
  plan.n1_ = n1;
  plan.n2_ = n2;
  plan.mode_ = mode;

  const Residue n_inv = mod_inv(static_cast<Residue>(n % m.value()), m);
  if (mode == NttMode::cyclic) {
    plan.omega_ = find_root_of_unity(n, m);
    const auto pw = power_table(plan.omega_, n, m);
    const auto ipw = power_table(mod_inv(plan.omega_, m), n, m);
    plan.w1_ = twiddle_matrix(n2, n2, pw, [&](auto i, auto j) { return n1 * i * j; }, 1, m);
    plan.w2_ = twiddle_matrix(n2, n1, pw, [](auto i, auto j) { return i * j; }, 1, m);
    plan.w3_ = twiddle_matrix(n1, n1, pw, [&](auto i, auto j) { return n2 * i * j; }, 1, m);
    plan.inv_w1_ = twiddle_matrix(n2, n2, ipw, [&](auto i, auto j) { return n1 * i * j; }, 1, m);
    plan.inv_w2_ = twiddle_matrix(n2, n1, ipw, [](auto i, auto j) { return i * j; }, n_inv, m);
    plan.inv_w3_ = twiddle_matrix(n1, n1, ipw, [&](auto i, auto j) { return n2 * i * j; }, 1, m);
  } else {
    plan.psi_ = find_root_of_unity(2 * n, m);
    plan.omega_ = mod_mul(plan.psi_, plan.psi_, m);
    const auto pw = power_table(plan.psi_, 2 * n, m);
    const auto ipw = power_table(mod_inv(plan.psi_, m), 2 * n, m);
    plan.w1_ = twiddle_matrix(n2, n2, pw, [&](auto i, auto j) { return 2 * n1 * i * j + n1 * i; }, 1, m);
    plan.w2_ = twiddle_matrix(n2, n1, pw, [](auto i, auto j) { return 2 * i * j + j; }, 1, m);
    plan.w3_ = twiddle_matrix(n1, n1, pw, [&](auto i, auto j) { return 2 * n2 * i * j; }, 1, m);
    plan.inv_w1_ = twiddle_matrix(n2, n2, ipw, [&](auto i, auto j) { return 2 * n1 * i * j; }, 1, m);
    plan.inv_w2_ = twiddle_matrix(n2, n1, ipw, [](auto i, auto j) { return 2 * i * j + i; }, n_inv, m);
    plan.inv_w3_ = twiddle_matrix(n1, n1, ipw, [&](auto i, auto j) { return 2 * n2 * i * j + n2 * j; }, 1, m);
  }

  // Validate against the direct sum on one fixed pseudo-random vector. Past
  // 4096 points only a deterministic sample of outputs is checked, since the
  // full direct transform is quadratic.
  std::mt19937_64 rng(0x5eed'f4ec'02e5ULL ^ n);
  std::vector<Residue> probe(n);
  for (auto& x : probe) x = static_cast<Residue>(rng() % m.value());
  const auto fast = ntt_4step(probe, plan);
  const std::size_t stride = n <= 4096 ? 1 : n / 64;
  const auto pw_check = power_table(mode == NttMode::cyclic ? plan.omega_ : plan.psi_,
                                    mode == NttMode::cyclic ? n : 2 * n, m);
  for (std::size_t k = 0; k < n; k += stride) {
    const Residue expect =
        mode == NttMode::cyclic
            ? dot_with_powers(probe, pw_check, m, [&](std::size_t j) { return (j * k) & (n - 1); })
            : dot_with_powers(probe, pw_check, m, [&](std::size_t j) {
                return (j * (2 * k + 1)) & (2 * n - 1);
              });
    FHECORE_CHECK(fast[k] == expect, "four-step plan disagrees with direct NTT at index " +
                                         std::to_string(k));
  }
  return plan;
}

NttPlan build_ntt_plan(std::size_t n, const Modulus& m, NttMode mode) {
  check_length(n);
  const int log_n = std::countr_zero(n);
  const std::size_t n1 = std::size_t{1} << ((log_n + 1) / 2);
  return build_ntt_plan(n, n1, n / n1, m, mode);
}

std::vector<Residue> ntt_4step(std::span<const Residue> a, const NttPlan& plan,
                               const MatMulBackend& backend) {
  return four_step(a, plan, plan.w1(), plan.w2(), plan.w3(), backend);
}

std::vector<Residue> intt_4step(std::span<const Residue> a_hat,
                                const NttPlan& plan,
                                const MatMulBackend& backend) {
  return four_step(a_hat, plan, plan.inv_w1(), plan.inv_w2(), plan.inv_w3(), backend);
}

}  // namespace fhecore
