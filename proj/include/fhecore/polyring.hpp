// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "fhecore/matrix.hpp"
#include "fhecore/modarith.hpp"

namespace fhecore {

enum class PolyDomain { coefficient, evaluation };

/// Polynomial in R_Q held as one residue row per limb.
class RnsPoly {
 public:
  RnsPoly(std::size_t n, std::vector<Modulus> moduli, PolyDomain domain);
  /// Takes ownership of `residues` (limbs x N); every entry must be below its
  /// limb modulus.
  RnsPoly(std::vector<Modulus> moduli, ResidueMatrix residues, PolyDomain domain);

  std::size_t n() const { return residues_.cols(); }
  std::size_t limbs() const { return moduli_.size(); }
  const std::vector<Modulus>& moduli() const { return moduli_; }
  PolyDomain domain() const { return domain_; }
  const ResidueMatrix& residues() const { return residues_; }

  std::span<const Residue> limb(std::size_t i) const { return residues_.row(i); }
  void set(std::size_t limb, std::size_t slot, Residue value);

  friend bool operator==(const RnsPoly&, const RnsPoly&) = default;

 private:
  std::vector<Modulus> moduli_;
  ResidueMatrix residues_;
  PolyDomain domain_;
};

RnsPoly elementwise_mod_add(const RnsPoly& a, const RnsPoly& b);
RnsPoly elementwise_mod_sub(const RnsPoly& a, const RnsPoly& b);
RnsPoly elementwise_mod_mul(const RnsPoly& a, const RnsPoly& b);

/// Index map of the rotation automorphism x -> x^(5^r) for ring dimension N.
///
/// slot_perm is the Frobenius index map pi_r(x) = ([5^r (2x+1)]_{2N} - 1) / 2
/// used on evaluation-domain data. coeff_dest / coeff_negate describe the
/// same automorphism on coefficients: a_i x^i lands on x^{i*g mod N}, negated
/// when i*g mod 2N >= N.
struct AutomorphismMap {
  std::size_t n = 0;
  std::int64_t r = 0;
  std::uint64_t galois_element = 1;  // 5^r mod 2N
  std::vector<std::size_t> slot_perm;
  std::vector<std::size_t> coeff_dest;
  std::vector<bool> coeff_negate;

  /// Inverse of slot_perm.
  std::vector<std::size_t> inverse_slot_perm() const;
};

/// r may be any integer; it is reduced modulo the order of 5 in Z_2N^*.
AutomorphismMap automorphism_map(std::int64_t r, std::size_t n);

/// gather: out[x] = in[pi(x)]; scatter: out[pi(x)] = in[x]. With the natural
/// order negacyclic NTT, gather in the evaluation domain realizes the same
/// ring automorphism as the coefficient-domain map.
enum class IndexDirection { gather, scatter };

/// Evaluation domain: pure permutation of slots along `direction`.
/// Coefficient domain: gather applies x^i -> +-x^{i*g}; scatter applies the
/// inverse automorphism, mirroring what scatter does to slots.
RnsPoly apply_automorphism(const RnsPoly& p, const AutomorphismMap& map,
                           IndexDirection direction = IndexDirection::gather);

}  // namespace fhecore
