#include "clifford/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "clifford/memory.hpp"

namespace clifford {

namespace memory {
namespace {
std::atomic<std::size_t> g_buffers{0};
std::atomic<std::size_t> g_floats{0};
}  // namespace

Snapshot snapshot() {
  return {g_buffers.load(std::memory_order_relaxed), g_floats.load(std::memory_order_relaxed)};
}

void record(std::size_t floats) {
  g_buffers.fetch_add(1, std::memory_order_relaxed);
  g_floats.fetch_add(floats, std::memory_order_relaxed);
}
}  // namespace memory

std::size_t element_count(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(std::span<const std::size_t> shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

Tensor::Tensor(std::shared_ptr<std::vector<float>> buffer, Shape shape,
               std::vector<std::size_t> strides, std::size_t offset)
    : buffer_(std::move(buffer)),
      shape_(std::move(shape)),
      strides_(std::move(strides)),
      offset_(offset) {}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = element_count(shape);
  memory::record(n);
  auto buffer = std::make_shared<std::vector<float>>(n, 0.0f);
  auto strides = row_major_strides(shape);
  return Tensor(std::move(buffer), std::move(shape), std::move(strides), 0);
}

Tensor Tensor::from_values(Shape shape, std::span<const float> values) {
  if (values.size() != element_count(shape)) {
    throw std::invalid_argument("tensor of shape " + shape_string(shape) + " needs " +
                                std::to_string(element_count(shape)) + " values, got " +
                                std::to_string(values.size()));
  }
  Tensor t = zeros(std::move(shape));
  std::copy(values.begin(), values.end(), t.buffer_->begin());
  return t;
}

Tensor Tensor::from_values(Shape shape, std::initializer_list<float> values) {
  return from_values(std::move(shape), std::span<const float>(values.begin(), values.size()));
}

bool Tensor::is_contiguous() const {
  std::size_t expected = 1;
  for (std::size_t i = shape_.size(); i-- > 0;) {
    if (shape_[i] == 1) continue;
    if (strides_[i] != expected) return false;
    expected *= shape_[i];
  }
  return true;
}

float Tensor::at(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw std::out_of_range("index rank " + std::to_string(index.size()) +
                            " does not match tensor rank " + std::to_string(shape_.size()));
  }
  std::size_t pos = offset_;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) throw std::out_of_range("tensor index out of range");
    pos += index[i] * strides_[i];
  }
  return (*buffer_)[pos];
}

std::span<const float> Tensor::values() const {
  if (!buffer_) return {};
  if (!is_contiguous()) throw std::logic_error("flat access to a non-contiguous view");
  return {buffer_->data() + offset_, size()};
}

std::span<float> Tensor::values() {
  if (!buffer_) return {};
  if (!is_contiguous()) throw std::logic_error("flat access to a non-contiguous view");
  return {buffer_->data() + offset_, size()};
}

Tensor Tensor::permute(std::span<const std::size_t> order) const {
  if (order.size() != shape_.size()) {
    throw std::invalid_argument("permutation of length " + std::to_string(order.size()) +
                                " for a rank " + std::to_string(shape_.size()) + " tensor");
  }
  std::vector<bool> seen(order.size(), false);
  Shape shape(order.size());
  std::vector<std::size_t> strides(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] >= order.size() || seen[order[k]]) {
      throw std::invalid_argument("invalid axis permutation");
    }
    seen[order[k]] = true;
    shape[k] = shape_[order[k]];
    strides[k] = strides_[order[k]];
  }
  return Tensor(buffer_, std::move(shape), std::move(strides), offset_);
}

Tensor Tensor::reshape(Shape new_shape) const {
  if (element_count(new_shape) != size()) {
    throw std::invalid_argument("cannot reshape " + shape_string(shape_) + " to " +
                                shape_string(new_shape));
  }
  if (!is_contiguous()) return materialize().reshape(std::move(new_shape));
  auto strides = row_major_strides(new_shape);
  return Tensor(buffer_, std::move(new_shape), std::move(strides), offset_);
}

Tensor Tensor::flatten() const { return reshape(Shape{size()}); }

Tensor Tensor::materialize() const {
  Tensor out = zeros(shape_);
  const std::size_t n = size();
  if (n == 0) return out;
  float* dst = out.buffer_->data();
  const float* src = buffer_->data();
  // Odometer over the logical index; the innermost axis is walked directly.
  const std::size_t rank = shape_.size();
  if (rank == 0) {
    dst[0] = src[offset_];
    return out;
  }
  std::vector<std::size_t> index(rank, 0);
  const std::size_t inner = shape_[rank - 1];
  const std::size_t inner_stride = strides_[rank - 1];
  std::size_t base = offset_;
  for (std::size_t written = 0; written < n; written += inner) {
    for (std::size_t i = 0; i < inner; ++i) *dst++ = src[base + i * inner_stride];
    for (std::size_t axis = rank - 1; axis-- > 0;) {
      ++index[axis];
      base += strides_[axis];
      if (index[axis] < shape_[axis]) break;
      base -= index[axis] * strides_[axis];
      index[axis] = 0;
    }
  }
  return out;
}

}  // namespace clifford
