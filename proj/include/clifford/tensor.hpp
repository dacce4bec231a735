#pragma once

// Strided single-precision tensors.
//
// A multivector field is stored as a real tensor whose last axis holds the
// blade coefficients, channels first: linear inputs are (B, I, N), 1D conv
// inputs (B, C, L, N), 2D (B, C, H, W, N), 3D (B, C, D, H, W, N).
// Views (permute, contiguous reshape) share the buffer.

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace clifford {

using Shape = std::vector<std::size_t>;

std::size_t element_count(std::span<const std::size_t> shape);
std::string shape_string(std::span<const std::size_t> shape);

class Tensor {
 public:
  Tensor() = default;

  /// Fresh row-major contiguous tensor filled with zeros.
  static Tensor zeros(Shape shape);
  /// Contiguous tensor holding a copy of `values`; sizes must agree.
  static Tensor from_values(Shape shape, std::span<const float> values);
  static Tensor from_values(Shape shape, std::initializer_list<float> values);

  const Shape& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return element_count(shape_); }
  bool empty() const { return size() == 0; }

  /// True when the elements are laid out row-major without gaps.
  bool is_contiguous() const;

  /// Element at a multi-index (bounds-checked).
  float at(std::span<const std::size_t> index) const;
  float at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  /// Flat access to contiguous tensors; throws std::logic_error on views
  /// that are not contiguous.
  std::span<const float> values() const;
  std::span<float> values();
  const float* data() const { return values().data(); }
  float* data() { return values().data(); }

  /// View whose axis k is axis order[k] of this tensor. No data is copied.
  Tensor permute(std::span<const std::size_t> order) const;
  Tensor permute(std::initializer_list<std::size_t> order) const {
    return permute(std::span<const std::size_t>(order.begin(), order.size()));
  }

  /// Row-major reshape. A view when contiguous, otherwise a copy.
  Tensor reshape(Shape new_shape) const;
  /// reshape to one axis.
  Tensor flatten() const;
  /// Contiguous copy in logical row-major order.
  Tensor materialize() const;

 private:
  Tensor(std::shared_ptr<std::vector<float>> buffer, Shape shape,
         std::vector<std::size_t> strides, std::size_t offset);

  std::shared_ptr<std::vector<float>> buffer_;
  Shape shape_;
  std::vector<std::size_t> strides_;
  std::size_t offset_ = 0;
};

/// Row-major strides for a shape.
std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape);

}  // namespace clifford
