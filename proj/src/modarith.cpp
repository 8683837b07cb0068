// SPDX-License-Identifier: Apache-2.0

#include "fhecore/modarith.hpp"

#include <bit>
#include <limits>

namespace fhecore {

namespace {

std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
}

std::uint64_t powmod64(std::uint64_t a, std::uint64_t e, std::uint64_t n) {
  std::uint64_t r = 1 % n;
  a %= n;
  while (e) {
    if (e & 1) r = mulmod64(r, a, n);
    a = mulmod64(a, a, n);
    e >>= 1;
  }
  return r;
}

bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These twelve witnesses are sufficient for n < 3.3e24.
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

Modulus::Modulus(std::uint64_t q) {
  if (q <= 2 || q >= (1ULL << 31) || (q & 1) == 0 || !is_prime(q)) {
    throw std::invalid_argument("unsupported modulus: " + std::to_string(q) +
                                " (need an odd prime below 2^31)");
  }
  q_ = static_cast<std::uint32_t>(q);
  // q is odd, so floor((2^64 - 1) / q) == floor(2^64 / q).
  mu_ = std::numeric_limits<std::uint64_t>::max() / q;
  bits_ = std::bit_width(q);
  const std::uint64_t sq = (q - 1) * (q - 1);
  lazy_budget_ = (std::numeric_limits<std::uint64_t>::max() - (q - 1)) / sq;
}

Modulus make_modulus(std::uint64_t q) { return Modulus(q); }

Residue mod_pow(Residue a, std::uint64_t e, const Modulus& m) {
  Residue result = 1;
  Residue base = a;
  while (e) {
    if (e & 1) result = mod_mul(result, base, m);
    base = mod_mul(base, base, m);
    e >>= 1;
  }
  return result;
}

Residue mod_inv(Residue a, const Modulus& m) {
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = m.value(), new_r = a % m.value();
  if (new_r == 0) throw std::invalid_argument("no inverse: 0 mod " +
                                              std::to_string(m.value()));
  while (new_r != 0) {
    const std::int64_t quot = r / new_r;
    t -= quot * new_t;
    std::swap(t, new_t);
    r -= quot * new_r;
    std::swap(r, new_r);
  }
  FHECORE_CHECK(r == 1, "modulus is not prime");
  if (t < 0) t += m.value();
  return static_cast<Residue>(t);
}

bool has_order(Residue omega, std::uint64_t n, const Modulus& m) {
  if (!is_power_of_two(n)) return false;
  if (mod_pow(omega, n, m) != 1) return false;
  return n == 1 || mod_pow(omega, n / 2, m) != 1;
}

Residue find_root_of_unity(std::uint64_t n, const Modulus& m) {
  const std::uint64_t q = m.value();
  if (!is_power_of_two(n) || (q - 1) % n != 0) {
    throw std::invalid_argument(
        "modulus not NTT-friendly for this order: q=" + std::to_string(q) +
        ", n=" + std::to_string(n));
  }
  if (n == 1) return 1;
  // Any element of exact order n generates all of them as its odd powers.
  Residue base = 0;
  for (Residue g = 2; g < q; ++g) {
    const Residue w = mod_pow(g, (q - 1) / n, m);
    if (mod_pow(w, n / 2, m) != 1) {
      base = w;
      break;
    }
  }
  FHECORE_CHECK(base != 0, "no element of the requested order");
  const Residue base_sq = mod_mul(base, base, m);
  Residue best = base;
  Residue w = base;
  for (std::uint64_t k = 3; k < n; k += 2) {
    w = mod_mul(w, base_sq, m);
    if (w < best) best = w;
  }
  return best;
}

std::vector<Modulus> find_ntt_primes(int bits, std::size_t count,
                                     std::uint64_t order) {
  if (bits < 3 || bits > 31) {
    throw std::invalid_argument("modulus bit width must be in [3, 31]");
  }
  if (order == 0) throw std::invalid_argument("order must be positive");
  std::vector<Modulus> primes;
  const std::uint64_t lo = 1ULL << (bits - 1);
  const std::uint64_t hi = 1ULL << bits;
  std::uint64_t q = (lo / order) * order + 1;
  if (q < lo) q += order;
  for (; q < hi && primes.size() < count; q += order) {
    if (q > 2 && is_prime(q)) primes.emplace_back(q);
  }
  if (primes.size() < count) {
    throw std::invalid_argument("not enough " + std::to_string(bits) +
                                "-bit primes congruent to 1 mod " +
                                std::to_string(order));
  }
  return primes;
}

}  // namespace fhecore
