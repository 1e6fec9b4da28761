#include "synaptik/volume.hpp"

#include <cmath>

namespace synaptik {

std::string to_string(DType t) {
  switch (t) {
    case DType::u8: return "u8";
    case DType::u32: return "u32";
    case DType::f32: return "f32";
  }
  return "?";
}

DType dtype_from_string(const std::string& s) {
  if (s == "u8") return DType::u8;
  if (s == "u32") return DType::u32;
  if (s == "f32") return DType::f32;
  throw FormatError("unknown dtype '" + s + "'");
}

void validate_proximity(const ProximityVolume& prox) {
  for (std::size_t i = 0; i < prox.size(); ++i) {
    const float v = prox[i];
    if (!std::isfinite(v) || v < -1.0f || v > 1.0f) {
      throw ParameterError("proximity value out of [-1, 1] at voxel " + std::to_string(i));
    }
  }
}

}  // namespace synaptik
