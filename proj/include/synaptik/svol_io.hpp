#pragma once

#include <filesystem>
#include <variant>

#include "synaptik/volume.hpp"

// The svol1 container: a JSON header plus a sibling raw file holding densely
// packed little-endian values, x fastest. The header path is the one passed
// around; the raw file sits next to it with the extension replaced by ".raw".
namespace synaptik::svol {

using AnyVolume = std::variant<Volume<std::uint8_t>, Volume<std::uint32_t>, Volume<float>>;

std::filesystem::path raw_path_for(const std::filesystem::path& header);

template <typename T>
void write(const std::filesystem::path& header, const Volume<T>& vol);

template <typename T>
Volume<T> read(const std::filesystem::path& header);

AnyVolume read_any(const std::filesystem::path& header);

}  // namespace synaptik::svol
