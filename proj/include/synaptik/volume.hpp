#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synaptik/errors.hpp"

namespace synaptik {

// Volume extent, slowest axis first. Data is stored x-fastest.
struct Shape {
  std::size_t z = 0, y = 0, x = 0;

  std::size_t voxels() const { return z * y * x; }
  std::size_t index(std::size_t zz, std::size_t yy, std::size_t xx) const {
    return (zz * y + yy) * x + xx;
  }
  bool operator==(const Shape&) const = default;
};

struct Coord {
  std::int64_t z = 0, y = 0, x = 0;
  bool operator==(const Coord&) const = default;
};

inline Coord coord_of(const Shape& s, std::size_t index) {
  const std::size_t plane = s.y * s.x;
  return {static_cast<std::int64_t>(index / plane),
          static_cast<std::int64_t>((index % plane) / s.x),
          static_cast<std::int64_t>(index % s.x)};
}

inline bool contains(const Shape& s, const Coord& c) {
  return c.z >= 0 && c.y >= 0 && c.x >= 0 && c.z < static_cast<std::int64_t>(s.z) &&
         c.y < static_cast<std::int64_t>(s.y) && c.x < static_cast<std::int64_t>(s.x);
}

// Physical voxel size in nanometers, stored in (x, y, z) order to match the
// on-disk header.
struct Spacing {
  double x = 1.0, y = 1.0, z = 1.0;
  bool operator==(const Spacing&) const = default;
};

inline void validate(const Spacing& s) {
  for (double v : {s.x, s.y, s.z}) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw ParameterError("voxel size components must be positive and finite");
    }
  }
}

// Squared physical distance between two voxel centers.
inline double distance_sq_nm(const Coord& a, const Coord& b, const Spacing& s) {
  const double dz = static_cast<double>(a.z - b.z) * s.z;
  const double dy = static_cast<double>(a.y - b.y) * s.y;
  const double dx = static_cast<double>(a.x - b.x) * s.x;
  return dz * dz + dy * dy + dx * dx;
}

enum class DType { u8, u32, f32 };

std::string to_string(DType t);
DType dtype_from_string(const std::string& s);

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<std::uint8_t>() { return DType::u8; }
template <>
constexpr DType dtype_of<std::uint32_t>() { return DType::u32; }
template <>
constexpr DType dtype_of<float>() { return DType::f32; }

// Dense 3D array with physical voxel spacing.
template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;
  Volume(Shape shape, Spacing spacing, T fill = T{})
      : shape_(shape), spacing_(spacing), data_(shape.voxels(), fill) {
    check_shape(shape);
    validate(spacing);
  }
  Volume(Shape shape, Spacing spacing, std::vector<T> data)
      : shape_(shape), spacing_(spacing), data_(std::move(data)) {
    check_shape(shape);
    validate(spacing);
    if (data_.size() != shape.voxels()) {
      throw ShapeError("volume data length " + std::to_string(data_.size()) +
                       " does not match dims product " + std::to_string(shape.voxels()));
    }
  }

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t z, std::size_t y, std::size_t x) { return data_[shape_.index(z, y, x)]; }
  const T& at(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[shape_.index(z, y, x)];
  }
  const T& at(const Coord& c) const {
    return data_[shape_.index(static_cast<std::size_t>(c.z), static_cast<std::size_t>(c.y),
                              static_cast<std::size_t>(c.x))];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Volume&) const = default;

 private:
  static void check_shape(const Shape& s) {
    if (s.z == 0 || s.y == 0 || s.x == 0) {
      throw ShapeError("volume dims must be positive");
    }
  }

  Shape shape_{};
  Spacing spacing_{};
  std::vector<T> data_;
};

using ImageVolume = Volume<std::uint8_t>;
using MaskVolume = Volume<std::uint8_t>;
using LabelVolume = Volume<std::uint32_t>;
using SegmentationVolume = Volume<std::uint32_t>;
using AnnotationVolume = Volume<std::uint32_t>;
using ProximityVolume = Volume<float>;

template <typename A, typename B>
void require_same_shape(const Volume<A>& a, const Volume<B>& b, const char* what) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string("dims mismatch: ") + what);
  }
}

// Proximity values must be finite and inside [-1, 1].
void validate_proximity(const ProximityVolume& prox);

}  // namespace synaptik
