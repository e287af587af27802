#ifndef LCLAB_TENSOR_HPP
#define LCLAB_TENSOR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace lclab {

// Dense row-major tensor of doubles, rank 0..4. Rank 0 holds one value.
class Tensor {
 public:
  Tensor() : shape_(), stride_(), v_(1, 0.0) {}

  explicit Tensor(std::vector<int> shape, double fill = 0.0)
      : shape_(std::move(shape)) {
    std::int64_t n = 1;
    stride_.assign(shape_.size(), 1);
    for (int i = static_cast<int>(shape_.size()) - 1; i >= 0; --i) {
      require(shape_[i] >= 1, ErrorCode::InvalidArgument,
              "tensor axis length must be >= 1");
      stride_[i] = n;
      n *= shape_[i];
    }
    v_.assign(static_cast<std::size_t>(n), fill);
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<const double> values() const { return v_; }
  std::span<double> values() { return v_; }

  double& operator[](std::int64_t i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return v_[static_cast<std::size_t>(i)]; }

  std::int64_t offset(std::span<const int> idx) const {
    std::int64_t o = 0;
    for (std::size_t i = 0; i < shape_.size(); ++i) o += idx[i] * stride_[i];
    return o;
  }

  double& at(std::span<const int> idx) { return v_[static_cast<std::size_t>(offset(idx))]; }
  double at(std::span<const int> idx) const { return v_[static_cast<std::size_t>(offset(idx))]; }

  std::int64_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }

 private:
  std::vector<int> shape_;
  std::vector<std::int64_t> stride_;
  std::vector<double> v_;
};

// Row-major odometer over a shape; f receives the flat index and the
// multi-index. Shapes here are small (rank <= 4) so this stays cheap.
template <class F>
void for_each_index(std::span<const int> shape, F&& f) {
  const int rank = static_cast<int>(shape.size());
  if (rank == 0) {
    int none = 0;
    f(std::int64_t{0}, std::span<const int>(&none, 0));
    return;
  }
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t total = 1;
  for (int s : shape) total *= s;
  for (std::int64_t flat = 0; flat < total; ++flat) {
    f(flat, std::span<const int>(idx.data(), idx.size()));
    for (int a = rank - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < shape[static_cast<std::size_t>(a)]) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
}

}  // namespace lclab

#endif
