// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fhecore/matrix.hpp"
#include "fhecore/modarith.hpp"

namespace fhecore {

enum class NttMode { cyclic, negacyclic };

/// O(N^2) evaluation of a_hat[k] = sum_j a[j] * omega^(j*k). Ground truth for
/// every faster path. Throws std::invalid_argument("invalid root") unless
/// omega has order exactly N.
std::vector<Residue> ntt_direct(std::span<const Residue> a, const Modulus& m,
                                Residue omega);

/// Inverse of ntt_direct: uses omega^-1 and scales by N^-1.
std::vector<Residue> intt_direct(std::span<const Residue> a_hat,
                                 const Modulus& m, Residue omega);

/// Negacyclic transform a_hat[k] = sum_j a[j] * psi^(j*(2k+1)), i.e. the
/// evaluation of a(x) at the odd powers of a primitive 2N-th root psi.
std::vector<Residue> negacyclic_ntt_direct(std::span<const Residue> a,
                                           const Modulus& m, Residue psi);
std::vector<Residue> negacyclic_intt_direct(std::span<const Residue> a_hat,
                                            const Modulus& m, Residue psi);

/// Schoolbook product in Z_q[x]/(x^N + 1).
std::vector<Residue> negacyclic_convolve_ref(std::span<const Residue> a,
                                             std::span<const Residue> b,
                                             const Modulus& m);

/// Schoolbook product in Z_q[x]/(x^N - 1).
std::vector<Residue> cyclic_convolve_ref(std::span<const Residue> a,
                                         std::span<const Residue> b,
                                         const Modulus& m);

/// Precomputed twiddle matrices of the four-step (matrix) NTT.
///
/// Index convention: the input is read column-major into an N1 x N2 matrix X,
/// X(n1, n2) = a[n1 + N1*n2], and the N2 x N1 result R is written back
/// column-major, a_hat[k2 + N2*k1] = R(k2, k1). Then
///
///   R = ((X * W1)^T o W2) * W3 mod q
///
/// with W1 (N2 x N2), W2 (N2 x N1, element-wise) and W3 (N1 x N1). Writing
/// r for the root (omega_N in cyclic mode, psi in negacyclic mode):
///
///   cyclic:      W1 = w^(N1*i*j),          W2 = w^(i*j),      W3 = w^(N2*i*j)
///   negacyclic:  W1 = psi^(2*N1*i*j + N1*i), W2 = psi^(2*i*j + j),
///                W3 = psi^(2*N2*i*j)
///
/// where (i, j) is the (row, column) index. The negacyclic twist psi^n is
/// merged into W1 and W2. The inverse matrices carry the twist on the output
/// side and fold N^-1 into W2.
class NttPlan {
 public:
  std::size_t n() const { return n_; }
  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  NttMode mode() const { return mode_; }
  const Modulus& modulus() const { return modulus_; }
  Residue omega() const { return omega_; }
  /// Primitive 2N-th root; 0 in cyclic mode.
  Residue psi() const { return psi_; }

  const ResidueMatrix& w1() const { return w1_; }
  const ResidueMatrix& w2() const { return w2_; }
  const ResidueMatrix& w3() const { return w3_; }
  const ResidueMatrix& inv_w1() const { return inv_w1_; }
  const ResidueMatrix& inv_w2() const { return inv_w2_; }
  const ResidueMatrix& inv_w3() const { return inv_w3_; }

  friend bool operator==(const NttPlan&, const NttPlan&) = default;

 private:
  friend NttPlan build_ntt_plan(std::size_t, std::size_t, std::size_t,
                                const Modulus&, NttMode);
  explicit NttPlan(const Modulus& m) : modulus_(m) {}

  std::size_t n_ = 0, n1_ = 0, n2_ = 0;
  NttMode mode_ = NttMode::cyclic;
  Modulus modulus_;
  Residue omega_ = 0;
  Residue psi_ = 0;
  ResidueMatrix w1_, w2_, w3_;
  ResidueMatrix inv_w1_, inv_w2_, inv_w3_;
};

/// Builds and validates a plan. N must be a power of two equal to N1*N2, and
/// q = 1 mod N (cyclic) or mod 2N (negacyclic).
NttPlan build_ntt_plan(std::size_t n, std::size_t n1, std::size_t n2,
                       const Modulus& m, NttMode mode);

/// Default split: N1 = 2^ceil(log N / 2), N2 = N / N1.
NttPlan build_ntt_plan(std::size_t n, const Modulus& m, NttMode mode);

/// Four-step forward transform. Matches ntt_direct (cyclic) or
/// negacyclic_ntt_direct (negacyclic) in natural order. The two matrix
/// products run on `backend`; the W2 scaling runs element-wise.
std::vector<Residue> ntt_4step(std::span<const Residue> a, const NttPlan& plan,
                               const MatMulBackend& backend = DirectMatMul{});

std::vector<Residue> intt_4step(std::span<const Residue> a_hat,
                                const NttPlan& plan,
                                const MatMulBackend& backend = DirectMatMul{});

}  // namespace fhecore
