// SPDX-License-Identifier: Apache-2.0

#include "fhecore/baseconv.hpp"

#include <functional>
#include <set>
#include <string>

namespace fhecore {

namespace {

void check_input(const ResidueMatrix& a, const BaseConvPlan& plan) {
  if (a.rows() != plan.alpha()) {
    throw std::invalid_argument("base conversion input has " +
                                std::to_string(a.rows()) + " limbs, plan expects " +
                                std::to_string(plan.alpha()));
  }
  for (std::size_t j = 0; j < a.rows(); ++j) {
    for (Residue x : a.row(j)) {
      if (x >= plan.source()[j].value()) {
        throw std::invalid_argument("input residue not below its source modulus");
      }
    }
  }
}

}  // namespace

BaseConvPlan build_baseconv_plan(std::vector<Modulus> source,
                                 std::vector<Modulus> target) {
  if (source.empty() || target.empty()) {
    throw std::invalid_argument("base conversion needs non-empty bases");
  }
  std::set<std::uint32_t> seen;
  for (const auto& basis : {std::cref(source), std::cref(target)}) {
    for (const Modulus& m : basis.get()) {
      if (!seen.insert(m.value()).second) {
        throw std::invalid_argument("duplicate modulus " + std::to_string(m.value()) +
                                    " in base conversion bases");
      }
    }
  }

  BaseConvPlan plan;
  plan.source_ = std::move(source);
  plan.target_ = std::move(target);
  const std::size_t alpha = plan.source_.size();
  const std::size_t l = plan.target_.size();

  // Products are accumulated modulo each word-sized modulus directly, which
  // is exact: [prod_k p_k]_m == prod_k [p_k]_m.
  const auto phat_mod = [&](std::size_t j, const Modulus& m) {
    Residue r = 1;
    for (std::size_t k = 0; k < alpha; ++k) {
      if (k != j) r = mod_mul(r, plan.source_[k].value() % m.value(), m);
    }
    return r;
  };

  plan.inv_phat_.resize(alpha);
  for (std::size_t j = 0; j < alpha; ++j) {
    plan.inv_phat_[j] = mod_inv(phat_mod(j, plan.source_[j]), plan.source_[j]);
  }
  plan.phat_mod_q_ = ResidueMatrix(l, alpha);
  plan.pstar_mod_q_.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    const Modulus& q = plan.target_[i];
    Residue pstar = 1;
    for (std::size_t j = 0; j < alpha; ++j) {
      plan.phat_mod_q_(i, j) = phat_mod(j, q);
      pstar = mod_mul(pstar, plan.source_[j].value() % q.value(), q);
    }
    plan.pstar_mod_q_[i] = pstar;
  }
  return plan;
}

ResidueMatrix baseconv_direct(const ResidueMatrix& a, const BaseConvPlan& plan) {
  check_input(a, plan);
  const std::size_t n = a.cols();
  ResidueMatrix out(plan.target_count(), n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < plan.target_count(); ++i) {
      const Modulus& q = plan.target()[i];
      Residue acc = 0;
      for (std::size_t j = 0; j < plan.alpha(); ++j) {
        const Residue scaled = mod_mul(a(j, c), plan.inv_phat()[j], plan.source()[j]);
        acc = mod_mac(acc, scaled, plan.phat_mod_target()(i, j), q);
      }
      out(i, c) = acc;
    }
  }
  return out;
}

ResidueMatrix baseconv_scale(const ResidueMatrix& a, const BaseConvPlan& plan) {
  check_input(a, plan);
  ResidueMatrix y(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.rows(); ++j) {
    const Modulus& p = plan.source()[j];
    const Residue s = plan.inv_phat()[j];
    auto src = a.row(j);
    auto dst = y.row(j);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = mod_mul(src[c], s, p);
  }
  return y;
}

ResidueMatrix baseconv_matrix(const ResidueMatrix& a, const BaseConvPlan& plan,
                              const MatMulBackend& backend) {
  const ResidueMatrix y = baseconv_scale(a, plan);
  return backend.multiply(plan.phat_mod_target(), y,
                          ModulusAssignment::per_row(plan.target()));
}

}  // namespace fhecore
