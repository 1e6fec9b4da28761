#include "synaptik/svol_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace synaptik::svol {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "svol1 I/O assumes a little-endian host");

fs::path raw_path_for(const fs::path& header) {
  fs::path raw = header;
  raw.replace_extension(".raw");
  return raw;
}

namespace {

struct Header {
  DType dtype;
  Shape shape;
  Spacing spacing;
};

Header read_header(const fs::path& header) {
  std::ifstream in(header);
  if (!in) throw FormatError("cannot open svol header " + header.string());
  ojson j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed svol header " + header.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "svol1") {
      throw FormatError("unsupported container format in " + header.string());
    }
    if (j.value("byte_order", std::string("little")) != "little") {
      throw FormatError("only little-endian svol1 data is supported");
    }
    Header h;
    h.dtype = dtype_from_string(j.at("dtype").get<std::string>());
    const auto dims = j.at("dims_zyx").get<std::vector<std::int64_t>>();
    const auto vs = j.at("voxel_size_nm_xyz").get<std::vector<double>>();
    if (dims.size() != 3 || vs.size() != 3) {
      throw FormatError("dims_zyx and voxel_size_nm_xyz must have three entries");
    }
    for (auto d : dims) {
      if (d <= 0) throw FormatError("dims_zyx entries must be positive");
    }
    h.shape = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
               static_cast<std::size_t>(dims[2])};
    h.spacing = {vs[0], vs[1], vs[2]};
    validate(h.spacing);
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed svol header " + header.string() + ": " + e.what());
  }
}

template <typename T>
Volume<T> read_payload(const fs::path& header, const Header& h) {
  const fs::path raw = raw_path_for(header);
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw FormatError("cannot open svol payload " + raw.string());
  std::vector<T> data(h.shape.voxels());
  const auto bytes = static_cast<std::streamsize>(data.size() * sizeof(T));
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  if (in.gcount() != bytes) {
    throw FormatError("svol payload " + raw.string() + " is shorter than its header declares");
  }
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0) {
    throw FormatError("svol payload " + raw.string() + " is longer than its header declares");
  }
  return Volume<T>(h.shape, h.spacing, std::move(data));
}

}  // namespace

template <typename T>
void write(const fs::path& header, const Volume<T>& vol) {
  ojson j;
  j["format"] = "svol1";
  j["dtype"] = to_string(dtype_of<T>());
  j["dims_zyx"] = {vol.shape().z, vol.shape().y, vol.shape().x};
  j["voxel_size_nm_xyz"] = {vol.spacing().x, vol.spacing().y, vol.spacing().z};
  j["byte_order"] = "little";
  if (header.has_parent_path()) fs::create_directories(header.parent_path());
  {
    std::ofstream out(header);
    if (!out) throw FormatError("cannot write svol header " + header.string());
    out << j.dump() << '\n';
  }
  const fs::path raw = raw_path_for(header);
  std::ofstream out(raw, std::ios::binary);
  if (!out) throw FormatError("cannot write svol payload " + raw.string());
  out.write(reinterpret_cast<const char*>(vol.data().data()),
            static_cast<std::streamsize>(vol.size() * sizeof(T)));
}

template <typename T>
Volume<T> read(const fs::path& header) {
  const Header h = read_header(header);
  if (h.dtype != dtype_of<T>()) {
    throw FormatError("svol " + header.string() + " has dtype " + to_string(h.dtype) +
                      ", expected " + to_string(dtype_of<T>()));
  }
  return read_payload<T>(header, h);
}

AnyVolume read_any(const fs::path& header) {
  const Header h = read_header(header);
  switch (h.dtype) {
    case DType::u8: return read_payload<std::uint8_t>(header, h);
    case DType::u32: return read_payload<std::uint32_t>(header, h);
    case DType::f32: return read_payload<float>(header, h);
  }
  throw FormatError("unreachable dtype");
}

template void write(const fs::path&, const Volume<std::uint8_t>&);
template void write(const fs::path&, const Volume<std::uint32_t>&);
template void write(const fs::path&, const Volume<float>&);
template Volume<std::uint8_t> read(const fs::path&);
template Volume<std::uint32_t> read(const fs::path&);
template Volume<float> read(const fs::path&);

}  // namespace synaptik::svol
