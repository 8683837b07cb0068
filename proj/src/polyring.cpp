// SPDX-License-Identifier: Apache-2.0

#include "fhecore/polyring.hpp"

#include <string>

namespace fhecore {

namespace {

void check_compatible(const RnsPoly& a, const RnsPoly& b) {
  if (a.n() != b.n()) throw std::invalid_argument("ring dimension mismatch");
  if (a.moduli() != b.moduli()) throw std::invalid_argument("limb mismatch");
  if (a.domain() != b.domain()) throw std::invalid_argument("domain mismatch");
}

template <typename Op>
RnsPoly slotwise(const RnsPoly& a, const RnsPoly& b, Op op) {
  check_compatible(a, b);
  ResidueMatrix out(a.limbs(), a.n());
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const Modulus& q = a.moduli()[i];
    auto x = a.limb(i);
    auto y = b.limb(i);
    auto z = out.row(i);
    for (std::size_t s = 0; s < z.size(); ++s) z[s] = op(x[s], y[s], q);
  }
  return RnsPoly(a.moduli(), std::move(out), a.domain());
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_ring_dimension(std::size_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("ring dimension must be a power of two, got " + std::to_string(n));
  }
}

std::uint64_t pow_mod_2n(std::uint64_t base, std::uint64_t e, std::uint64_t two_n) {
  std::uint64_t r = 1 % two_n;
  base %= two_n;
  while (e) {
    if (e & 1) r = r * base % two_n;
    base = base * base % two_n;
    e >>= 1;
  }
  return r;
}

}  // namespace

RnsPoly::RnsPoly(std::size_t n, std::vector<Modulus> moduli, PolyDomain domain)
    : moduli_(std::move(moduli)), residues_(moduli_.size(), n), domain_(domain) {
  if (moduli_.empty()) throw std::invalid_argument("polynomial needs at least one limb");
  check_ring_dimension(residues_.cols());
}

RnsPoly::RnsPoly(std::vector<Modulus> moduli, ResidueMatrix residues,
                 PolyDomain domain)
    : moduli_(std::move(moduli)), residues_(std::move(residues)), domain_(domain) {
  if (moduli_.empty()) throw std::invalid_argument("polynomial needs at least one limb");
  check_ring_dimension(residues_.cols());
  if (residues_.rows() != moduli_.size()) {
    throw std::invalid_argument("residue rows do not match limb count");
  }
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    for (Residue x : residues_.row(i)) {
      if (x >= moduli_[i].value()) throw std::invalid_argument("residue not below limb modulus");
    }
  }
}

void RnsPoly::set(std::size_t limb, std::size_t slot, Residue value) {
  if (value >= moduli_.at(limb).value()) {
    throw std::invalid_argument("residue not below limb modulus");
  }
  residues_(limb, slot) = value;
}

RnsPoly elementwise_mod_add(const RnsPoly& a, const RnsPoly& b) {
  return slotwise(a, b, [](Residue x, Residue y, const Modulus& q) { return mod_add(x, y, q); });
}

RnsPoly elementwise_mod_sub(const RnsPoly& a, const RnsPoly& b) {
  return slotwise(a, b, [](Residue x, Residue y, const Modulus& q) { return mod_sub(x, y, q); });
}

RnsPoly elementwise_mod_mul(const RnsPoly& a, const RnsPoly& b) {
  return slotwise(a, b, [](Residue x, Residue y, const Modulus& q) { return mod_mul(x, y, q); });
}

std::vector<std::size_t> AutomorphismMap::inverse_slot_perm() const {
  std::vector<std::size_t> inv(slot_perm.size());
  for (std::size_t x = 0; x < slot_perm.size(); ++x) inv[slot_perm[x]] = x;
  return inv;
}

AutomorphismMap automorphism_map(std::int64_t r, std::size_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("ring dimension must be a power of two, got " +
                                std::to_string(n));
  }
  const std::uint64_t two_n = 2 * n;
  // 5 generates a cyclic subgroup of order N/2 in Z_{2N}^* (order 1 for N <= 2).
  const std::int64_t order = n >= 4 ? static_cast<std::int64_t>(n / 2) : 1;
  const std::int64_t e = ((r % order) + order) % order;

  AutomorphismMap map;
  map.n = n;
  map.r = r;
  map.galois_element = pow_mod_2n(5, static_cast<std::uint64_t>(e), two_n);
  const std::uint64_t g = map.galois_element;
  map.slot_perm.resize(n);
  map.coeff_dest.resize(n);
  map.coeff_negate.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    map.slot_perm[x] = static_cast<std::size_t>((g * (2 * x + 1) % two_n - 1) / 2);
    const std::uint64_t target = g * x % two_n;
    map.coeff_dest[x] = static_cast<std::size_t>(target % n);
    map.coeff_negate[x] = target >= n;
  }
  return map;
}

RnsPoly apply_automorphism(const RnsPoly& p, const AutomorphismMap& map,
                           IndexDirection direction) {
  if (p.n() != map.n) {
    throw std::invalid_argument("automorphism built for N=" + std::to_string(map.n) +
                                ", polynomial has N=" + std::to_string(p.n()));
  }
  ResidueMatrix out(p.limbs(), p.n());
  for (std::size_t i = 0; i < p.limbs(); ++i) {
    const Modulus& q = p.moduli()[i];
    auto src = p.limb(i);
    auto dst = out.row(i);
    for (std::size_t x = 0; x < p.n(); ++x) {
      if (p.domain() == PolyDomain::evaluation) {
        if (direction == IndexDirection::gather) {
          dst[x] = src[map.slot_perm[x]];
        } else {
          dst[map.slot_perm[x]] = src[x];
        }
      } else {
        const bool neg = map.coeff_negate[x];
        if (direction == IndexDirection::gather) {
          dst[map.coeff_dest[x]] = neg ? mod_neg(src[x], q) : src[x];
        } else {
          dst[x] = neg ? mod_neg(src[map.coeff_dest[x]], q) : src[map.coeff_dest[x]];
        }
      }
    }
  }
  return RnsPoly(p.moduli(), std::move(out), p.domain());
}

}  // namespace fhecore
