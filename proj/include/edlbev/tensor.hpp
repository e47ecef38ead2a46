#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "edlbev/error.hpp"

namespace edlbev {

struct Shape3 {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t cells() const noexcept { return rows * cols; }
  std::size_t size() const noexcept { return channels * rows * cols; }
  friend bool operator==(const Shape3&, const Shape3&) = default;

  std::string str() const {
    std::ostringstream os;
    os << '[' << channels << 'x' << rows << 'x' << cols << ']';
    return os.str();
  }
};

/// Dense channel-major tensor [channels x rows x cols], row-major within a
/// channel. Used for evidence, probability and uncertainty maps [C x H x D]
/// and for feature planes [F x H x D].
template <class T>
class Grid3 {
public:
  Grid3() = default;
  explicit Grid3(Shape3 shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
  Grid3(Shape3 shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("Grid3: " + std::to_string(data_.size()) + " values for shape " + shape_.str());
    }
  }

  const Shape3& shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(std::size_t c, std::size_t r, std::size_t k) const noexcept {
    return (c * shape_.rows + r) * shape_.cols + k;
  }
  T& operator()(std::size_t c, std::size_t r, std::size_t k) noexcept { return data_[index(c, r, k)]; }
  const T& operator()(std::size_t c, std::size_t r, std::size_t k) const noexcept { return data_[index(c, r, k)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& vector() const noexcept { return data_; }

  /// Contiguous [rows x cols] plane of one channel.
  std::span<const T> channel(std::size_t c) const noexcept {
    return std::span<const T>(data_).subspan(c * shape_.cells(), shape_.cells());
  }
  std::span<T> channel(std::size_t c) noexcept { return std::span<T>(data_).subspan(c * shape_.cells(), shape_.cells()); }

  friend bool operator==(const Grid3&, const Grid3&) = default;

private:
  Shape3 shape_{};
  std::vector<T> data_;
};

using Tensor3 = Grid3<double>;

inline void require_same_shape(const Shape3& a, const Shape3& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
  }
}

template <class T, class F>
Grid3<T> map(const Grid3<T>& g, F&& f) {
  Grid3<T> out(g.shape());
  std::transform(g.values().begin(), g.values().end(), out.values().begin(), f);
  return out;
}

} // namespace edlbev
