// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fhecore/modarith.hpp"

namespace fhecore {

/// Dense row-major matrix of residues.
class ResidueMatrix {
 public:
  ResidueMatrix() = default;
  ResidueMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  ResidueMatrix(std::size_t rows, std::size_t cols, std::vector<Residue> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Residue& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  Residue operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<Residue> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const Residue> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const Residue> data() const { return data_; }
  std::span<Residue> data() { return data_; }

  ResidueMatrix transpose() const;

  /// Sub-block starting at (r0, c0); cells outside this matrix read as 0.
  ResidueMatrix block(std::size_t r0, std::size_t c0, std::size_t rows,
                      std::size_t cols) const;

  friend bool operator==(const ResidueMatrix&, const ResidueMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Residue> data_;
};

/// Which modulus reduces each output element of a modular matmul.
class ModulusAssignment {
 public:
  enum class Axis { shared, per_row, per_column };

  static ModulusAssignment shared(const Modulus& m);
  static ModulusAssignment per_row(std::vector<Modulus> moduli);
  static ModulusAssignment per_column(std::vector<Modulus> moduli);

  Axis axis() const { return axis_; }
  std::span<const Modulus> moduli() const { return moduli_; }

  const Modulus& at(std::size_t r, std::size_t c) const {
    switch (axis_) {
      case Axis::per_row:
        return moduli_[r];
      case Axis::per_column:
        return moduli_[c];
      default:
        return moduli_.front();
    }
  }

  /// Throws std::invalid_argument unless the line count matches an output of
  /// shape rows x cols.
  void check_shape(std::size_t rows, std::size_t cols) const;

  /// Assignment for the output block at (r0, c0). Lines past the end of this
  /// assignment (zero padding) reuse the last modulus.
  ModulusAssignment slice(std::size_t r0, std::size_t rows, std::size_t c0,
                          std::size_t cols) const;

 private:
  ModulusAssignment(Axis axis, std::vector<Modulus> moduli)
      : axis_(axis), moduli_(std::move(moduli)) {}

  Axis axis_;
  std::vector<Modulus> moduli_;
};

/// Pluggable modular matmul executor: C = A x B with each C(r, c) reduced
/// under mods.at(r, c). Operands only need to be below 2^31, so the right
/// operand may hold residues of other moduli.
class MatMulBackend {
 public:
  virtual ~MatMulBackend() = default;
  virtual ResidueMatrix multiply(const ResidueMatrix& a, const ResidueMatrix& b,
                                 const ModulusAssignment& mods) const = 0;
};

/// Plain blocked multiplier with lazy reduction.
class DirectMatMul final : public MatMulBackend {
 public:
  ResidueMatrix multiply(const ResidueMatrix& a, const ResidueMatrix& b,
                         const ModulusAssignment& mods) const override;
};

/// Element-wise (Hadamard) product under a single modulus.
ResidueMatrix hadamard(const ResidueMatrix& a, const ResidueMatrix& b,
                       const Modulus& m);

}  // namespace fhecore
