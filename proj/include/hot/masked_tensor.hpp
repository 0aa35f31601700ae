// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>

#include "hot/common.hpp"

namespace hot {

// Dense data tensor plus a boolean existence mask over the leading masked
// dimensions. Data at mask-false positions always holds 0; the constructor
// zeroes them and every operation in the library re-establishes the rule, so
// sum-style kernels can run over the raw buffer without consulting the mask.
template <typename T>
class MaskedTensor {
 public:
  MaskedTensor() = default;

  // data is row-major over masked_shape ++ dense_shape, mask row-major over
  // masked_shape. Mask-false slots of data are forced to 0.
  MaskedTensor(Shape masked_shape, Shape dense_shape, std::vector<T> data,
               std::vector<std::uint8_t> mask)
      : masked_shape_(std::move(masked_shape)),
        dense_shape_(std::move(dense_shape)),
        data_(std::move(data)),
        mask_(std::move(mask)) {
    validate();
    enforce_zero();
    token_.rebind(footprint_bytes());
  }

  static MaskedTensor zeros(Shape masked_shape, Shape dense_shape) {
    Index m = shape_product(masked_shape);
    Index w = shape_product(dense_shape);
    return MaskedTensor(std::move(masked_shape), std::move(dense_shape),
                        std::vector<T>(static_cast<std::size_t>(m * w), T(0)),
                        std::vector<std::uint8_t>(static_cast<std::size_t>(m), 0));
  }

  const Shape& masked_shape() const { return masked_shape_; }
  const Shape& dense_shape() const { return dense_shape_; }
  Index masked_rank() const { return static_cast<Index>(masked_shape_.size()); }
  Index positions() const { return static_cast<Index>(mask_.size()); }
  Index width() const { return positions() == 0 ? shape_product(dense_shape_)
                                                : static_cast<Index>(data_.size()) / positions(); }

  const std::vector<T>& data() const { return data_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  bool mask_at(Index flat) const { return mask_[static_cast<std::size_t>(flat)] != 0; }
  std::span<const T> row(Index flat) const {
    return {data_.data() + flat * width(), static_cast<std::size_t>(width())};
  }

  Index flat_index(std::span<const Index> pos) const {
    Index f = 0;
    for (Index d = 0; d < masked_rank(); ++d) {
      if (pos[d] < 0 || pos[d] >= masked_shape_[d]) throw BoundsError("masked position");
      f = f * masked_shape_[d] + pos[d];
    }
    return f;
  }

  Index valid_count() const {
    Index c = 0;
    for (auto m : mask_) c += m ? 1 : 0;
    return c;
  }

  bool operator==(const MaskedTensor& o) const {
    return masked_shape_ == o.masked_shape_ && dense_shape_ == o.dense_shape_ &&
           data_ == o.data_ && mask_ == o.mask_;
  }

  // Mutable access for kernel construction; all library code funnels results
  // through the constructor so invariants still hold for callers.
  struct Builder {
    Shape masked_shape;
    Shape dense_shape;
    std::vector<T> data;
    std::vector<std::uint8_t> mask;

    Builder(Shape ms, Shape ds)
        : masked_shape(std::move(ms)),
          dense_shape(std::move(ds)),
          data(static_cast<std::size_t>(shape_product(masked_shape) * shape_product(dense_shape)),
               T(0)),
          mask(static_cast<std::size_t>(shape_product(masked_shape)), 0) {}

    Index width() const { return shape_product(dense_shape); }
    std::span<T> row(Index flat) { return {data.data() + flat * width(),
                                           static_cast<std::size_t>(width())}; }

    MaskedTensor finish() {
      return MaskedTensor(std::move(masked_shape), std::move(dense_shape), std::move(data),
                          std::move(mask));
    }
  };

 private:
  std::int64_t footprint_bytes() const {
    return static_cast<std::int64_t>(data_.size() * sizeof(T) + mask_.size());
  }

  void validate() const {
    for (Index d : masked_shape_)
      if (d <= 0) throw ShapeError("masked_shape entries must be positive");
    for (Index d : dense_shape_)
      if (d < 0) throw ShapeError("dense_shape entries must be non-negative");
    Index m = shape_product(masked_shape_);
    Index w = shape_product(dense_shape_);
    if (static_cast<Index>(mask_.size()) != m) throw ShapeError("mask size != prod(masked_shape)");
    if (static_cast<Index>(data_.size()) != m * w)
      throw ShapeError("data size != prod(masked_shape ++ dense_shape)");
  }

  void enforce_zero() {
    const Index w = width();
    for (Index p = 0; p < positions(); ++p) {
      if (!mask_[static_cast<std::size_t>(p)]) {
        T* d = data_.data() + p * w;
        for (Index c = 0; c < w; ++c) d[c] = T(0);
      }
    }
  }

  Shape masked_shape_;
  Shape dense_shape_;
  std::vector<T> data_;
  std::vector<std::uint8_t> mask_;
  MemToken token_;
};

}  // namespace hot
