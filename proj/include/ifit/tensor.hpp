#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ifit/error.hpp"

namespace ifit {

class ShapeError : public Error {
public:
  using Error::Error;
};

// Dense row-major matrix.
template <class T>
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0)) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const T> data() const { return data_; }

  template <class U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = static_cast<U>((*this)(i, j));
    return out;
  }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

// Dense n-way array, row-major (last axis fastest), matching the
// lexicographic block order of Grid.
template <class T>
class BasicTensor {
public:
  BasicTensor() = default;
  explicit BasicTensor(std::vector<std::size_t> shape, T fill = T(0)) : shape_(std::move(shape)) {
    data_.assign(count(shape_), fill);
  }
  BasicTensor(std::vector<std::size_t> shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) throw ShapeError("tensor data does not match its shape");
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t order() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  // 0-based multi-index access.
  std::size_t offset(std::span<const std::size_t> idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) off = off * shape_[k] + idx[k];
    return off;
  }
  T& at(std::span<const std::size_t> idx) { return data_[offset(idx)]; }
  const T& at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }
  T& at(std::initializer_list<std::size_t> idx) { return data_[offset({idx.begin(), idx.size()})]; }
  const T& at(std::initializer_list<std::size_t> idx) const { return data_[offset({idx.begin(), idx.size()})]; }

  // Stride of one step along `axis`.
  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t k = axis + 1; k < shape_.size(); ++k) s *= shape_[k];
    return s;
  }

  template <class U>
  BasicTensor<U> cast() const {
    std::vector<U> d(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) d[i] = static_cast<U>(data_[i]);
    return BasicTensor<U>(shape_, std::move(d));
  }

private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<double>;

// Which matrix index is summed against the tensor mode.
enum class Slot { First = 1, Second = 2 };

// Mode contraction A ._{s->k} C. Slot::First sums A(i, j) c[.. i ..] over i
// (requires rows == extent k, new extent cols); Slot::Second sums
// A(j, i) c[.. i ..] (requires cols == extent k, new extent rows).
// `axis` is 0-based.
template <class T>
BasicTensor<T> contract(const Matrix<T>& A, Slot slot, std::size_t axis, const BasicTensor<T>& C) {
  if (axis >= C.order()) throw ShapeError("contraction mode out of range");
  const std::size_t mk = C.extent(axis);
  const std::size_t summed = slot == Slot::First ? A.rows() : A.cols();
  const std::size_t free = slot == Slot::First ? A.cols() : A.rows();
  if (summed != mk)
    throw ShapeError("contraction dimension mismatch: matrix has " + std::to_string(summed) +
                     ", tensor mode " + std::to_string(axis) + " has " + std::to_string(mk));
  auto shape = C.shape();
  shape[axis] = free;
  BasicTensor<T> out(shape);
  const std::size_t inner = C.stride(axis);
  const std::size_t outer = C.size() / (mk * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < inner; ++s) {
      const std::size_t in_base = o * mk * inner + s;
      const std::size_t out_base = o * free * inner + s;
      for (std::size_t j = 0; j < free; ++j) {
        T acc = T(0);
        for (std::size_t i = 0; i < mk; ++i) {
          const T& a = slot == Slot::First ? A(i, j) : A(j, i);
          acc += a * C[in_base + i * inner];
        }
        out[out_base + j * inner] = acc;
      }
    }
  }
  return out;
}

// Elementwise (Hadamard) product.
template <class T>
BasicTensor<T> hadamard(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("Hadamard product needs equal shapes");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace ifit
