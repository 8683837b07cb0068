// SPDX-License-Identifier: Apache-2.0

#include "fhecore/matrix.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fhecore {

ResidueMatrix::ResidueMatrix(std::size_t rows, std::size_t cols,
                             std::vector<Residue> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix data size does not match shape");
  }
}

ResidueMatrix ResidueMatrix::transpose() const {
  ResidueMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

ResidueMatrix ResidueMatrix::block(std::size_t r0, std::size_t c0,
                                   std::size_t rows, std::size_t cols) const {
  ResidueMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows && r0 + r < rows_; ++r) {
    for (std::size_t c = 0; c < cols && c0 + c < cols_; ++c) {
      out(r, c) = (*this)(r0 + r, c0 + c);
    }
  }
  return out;
}

ModulusAssignment ModulusAssignment::shared(const Modulus& m) {
  return ModulusAssignment(Axis::shared, {m});
}

ModulusAssignment ModulusAssignment::per_row(std::vector<Modulus> moduli) {
  if (moduli.empty()) throw std::invalid_argument("empty modulus assignment");
  return ModulusAssignment(Axis::per_row, std::move(moduli));
}

ModulusAssignment ModulusAssignment::per_column(std::vector<Modulus> moduli) {
  if (moduli.empty()) throw std::invalid_argument("empty modulus assignment");
  return ModulusAssignment(Axis::per_column, std::move(moduli));
}

void ModulusAssignment::check_shape(std::size_t rows, std::size_t cols) const {
  const std::size_t want = axis_ == Axis::per_row      ? rows
                           : axis_ == Axis::per_column ? cols
                                                       : 1;
  if (moduli_.size() != want) {
    throw std::invalid_argument(
        "modulus assignment has " + std::to_string(moduli_.size()) +
        " lines, output needs " + std::to_string(want));
  }
}

ModulusAssignment ModulusAssignment::slice(std::size_t r0, std::size_t rows,
                                           std::size_t c0,
                                           std::size_t cols) const {
  if (axis_ == Axis::shared) return *this;
  const std::size_t start = axis_ == Axis::per_row ? r0 : c0;
  const std::size_t count = axis_ == Axis::per_row ? rows : cols;
  std::vector<Modulus> lines;
  lines.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    lines.push_back(moduli_[std::min(start + i, moduli_.size() - 1)]);
  }
  return ModulusAssignment(axis_, std::move(lines));
}

ResidueMatrix DirectMatMul::multiply(const ResidueMatrix& a,
                                     const ResidueMatrix& b,
                                     const ModulusAssignment& mods) const {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul inner dimensions differ");
  }
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  mods.check_shape(m, n);

  const auto max_of = [](std::span<const Residue> v) -> std::uint64_t {
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
  };
  std::uint64_t max_q = 0;
  for (const Modulus& q : mods.moduli()) max_q = std::max<std::uint64_t>(max_q, q.value());
  const std::uint64_t product_bound =
      std::max<std::uint64_t>(1, max_of(a.data()) * max_of(b.data()));
  const std::uint64_t budget = std::max<std::uint64_t>(
      1, (std::numeric_limits<std::uint64_t>::max() - max_q) / product_bound);

  ResidueMatrix c(m, n);
  std::vector<std::uint64_t> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    const auto reduce_row = [&] {
      for (std::size_t j = 0; j < n; ++j) acc[j] = barrett_reduce(acc[j], mods.at(i, j));
    };
    std::uint64_t pending = 0;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const std::uint64_t lhs = a(i, kk);
      const Residue* rhs = b.row(kk).data();
      for (std::size_t j = 0; j < n; ++j) acc[j] += lhs * rhs[j];
      if (++pending == budget) {
        reduce_row();
        pending = 0;
      }
    }
    reduce_row();
    for (std::size_t j = 0; j < n; ++j) c(i, j) = static_cast<Residue>(acc[j]);
  }
  return c;
}

ResidueMatrix hadamard(const ResidueMatrix& a, const ResidueMatrix& b,
                       const Modulus& m) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hadamard operands differ in shape");
  }
  ResidueMatrix out(a.rows(), a.cols());
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mod_mul(x[i], y[i], m);
  return out;
}

}  // namespace fhecore
