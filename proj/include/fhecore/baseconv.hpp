// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fhecore/matrix.hpp"
#include "fhecore/modarith.hpp"

namespace fhecore {

/// Precomputed tables for fast (approximate) RNS base conversion from the
/// source basis P = {p_0..p_{alpha-1}} to the disjoint target basis
/// Q = {q_0..q_{L-1}}. With P* = prod p_j and Phat_j = P* / p_j:
///
///   out[i][n] = sum_j [a[j][n] * Phat_j^-1]_{p_j} * Phat_j  mod q_i
///
/// The result is congruent to v + e * P* for the CRT value v of the input
/// and some 0 <= e < alpha; no correction of e is attempted.
class BaseConvPlan {
 public:
  const std::vector<Modulus>& source() const { return source_; }
  const std::vector<Modulus>& target() const { return target_; }
  std::size_t alpha() const { return source_.size(); }
  std::size_t target_count() const { return target_.size(); }

  /// [P*]_{q_i}
  const std::vector<Residue>& pstar_mod_target() const { return pstar_mod_q_; }
  /// [Phat_j^-1]_{p_j}
  const std::vector<Residue>& inv_phat() const { return inv_phat_; }
  /// L x alpha, entry (i, j) = [Phat_j]_{q_i}
  const ResidueMatrix& phat_mod_target() const { return phat_mod_q_; }

 private:
  friend BaseConvPlan build_baseconv_plan(std::vector<Modulus>,
                                          std::vector<Modulus>);
  BaseConvPlan() = default;

  std::vector<Modulus> source_;
  std::vector<Modulus> target_;
  std::vector<Residue> pstar_mod_q_;
  std::vector<Residue> inv_phat_;
  ResidueMatrix phat_mod_q_;
};

/// Throws std::invalid_argument for empty bases or any repeated modulus
/// (within a basis or across the two).
BaseConvPlan build_baseconv_plan(std::vector<Modulus> source,
                                 std::vector<Modulus> target);

/// Literal per-coefficient evaluation. `a` is alpha x N (one row per source
/// limb); the result is L x N.
ResidueMatrix baseconv_direct(const ResidueMatrix& a, const BaseConvPlan& plan);

/// Scale step y[j][n] = [a[j][n] * Phat_j^-1]_{p_j}, the element-wise half of
/// the matrix form.
ResidueMatrix baseconv_scale(const ResidueMatrix& a, const BaseConvPlan& plan);

/// Matrix form: the scale step followed by the mixed-moduli product
/// phat_mod_target() x y, where output row i is reduced under q_i.
ResidueMatrix baseconv_matrix(const ResidueMatrix& a, const BaseConvPlan& plan,
                              const MatMulBackend& backend = DirectMatMul{});

}  // namespace fhecore
