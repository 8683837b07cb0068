// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fhecore {

/// Canonical residue in [0, q). Moduli are below 2^31, so every residue fits.
using Residue = std::uint32_t;

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define FHECORE_CHECK(cond, msg)                                  \
  do {                                                            \
    if (!(cond)) throw ::fhecore::InternalError(std::string(msg)); \
  } while (0)

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(std::uint64_t n);

/// Word-sized prime modulus with a precomputed Barrett constant.
///
/// mu = floor(2^64 / q). With this choice the quotient estimate
/// floor(x * mu / 2^64) undershoots floor(x / q) by at most one for any
/// 64-bit x, so reduction needs a single conditional subtraction. That
/// covers the R + a*b accumulate form even when a is a residue of a larger
/// foreign modulus.
class Modulus {
 public:
  /// Throws std::invalid_argument("unsupported modulus ...") unless q is an
  /// odd prime below 2^31.
  explicit Modulus(std::uint64_t q);

  std::uint32_t value() const { return q_; }
  std::uint64_t barrett_mu() const { return mu_; }
  int bit_length() const { return bits_; }

  /// Number of products (q-1)^2 that can be added to a reduced value
  /// without overflowing 64 bits.
  std::uint64_t lazy_budget() const { return lazy_budget_; }

  friend bool operator==(const Modulus& a, const Modulus& b) {
    return a.q_ == b.q_;
  }

 private:
  std::uint32_t q_;
  std::uint64_t mu_;
  int bits_;
  std::uint64_t lazy_budget_;
};

Modulus make_modulus(std::uint64_t q);

inline Residue barrett_reduce(std::uint64_t x, const Modulus& m) {
  const std::uint64_t qhat = static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(x) * m.barrett_mu()) >> 64);
  std::uint64_t r = x - qhat * m.value();
  if (r >= m.value()) r -= m.value();
  return static_cast<Residue>(r);
}

inline Residue mod_add(Residue a, Residue b, const Modulus& m) {
  std::uint32_t s = a + b;
  return s >= m.value() ? s - m.value() : s;
}

inline Residue mod_sub(Residue a, Residue b, const Modulus& m) {
  return a >= b ? a - b : a + m.value() - b;
}

inline Residue mod_neg(Residue a, const Modulus& m) {
  return a == 0 ? 0 : m.value() - a;
}

inline Residue mod_mul(Residue a, Residue b, const Modulus& m) {
  return barrett_reduce(static_cast<std::uint64_t>(a) * b, m);
}

/// R <- (R + a*b) mod q, the processing-element accumulate step. a and b may
/// be residues of other moduli as long as both are below 2^31.
inline Residue mod_mac(Residue acc, std::uint32_t a, std::uint32_t b,
                       const Modulus& m) {
  return barrett_reduce(acc + static_cast<std::uint64_t>(a) * b, m);
}

Residue mod_pow(Residue a, std::uint64_t e, const Modulus& m);

/// Throws std::invalid_argument("no inverse") for a == 0 mod q.
Residue mod_inv(Residue a, const Modulus& m);

/// Smallest element of multiplicative order exactly n (n a power of two).
/// Throws std::invalid_argument when n does not divide q - 1.
Residue find_root_of_unity(std::uint64_t n, const Modulus& m);

/// True when omega has multiplicative order exactly n (n a power of two).
bool has_order(Residue omega, std::uint64_t n, const Modulus& m);

/// Smallest `count` primes with exactly `bits` bits and q = 1 mod `order`.
std::vector<Modulus> find_ntt_primes(int bits, std::size_t count,
                                     std::uint64_t order);

}  // namespace fhecore
