#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "planerecon/grid.hpp"

namespace planerecon {

// Volume files are a text header (<name>.pvh) naming a raw little-endian
// payload (<name>.raw), row-major with x fastest. Scalar volumes use dtype
// u8 or f32; vector fields use dtype f32 with components 3 (interleaved
// x,y,z per voxel). Slice files carry their plane pose in optional keys.

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_raw(const std::filesystem::path& path, const void* data, size_t bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(static_cast<const char*>(data), std::streamsize(bytes));
  if (!f) throw IoError("short write: " + path.string());
}

inline std::vector<char> read_raw(const std::filesystem::path& path, size_t expected_bytes) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  std::vector<char> buf(expected_bytes);
  f.read(buf.data(), std::streamsize(expected_bytes));
  if (size_t(f.gcount()) != expected_bytes)
    throw IoError("short read: " + path.string());
  return buf;
}

struct VolumeHeader {
  int nx{0}, ny{0}, nz{0};
  double spacing{1.0};
  Vec3d origin{};
  std::string dtype;
  int components{1};
  std::string data_file;
  std::map<std::string, std::string> extra;
};

inline VolumeHeader read_header(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open header: " + path.string());
  VolumeHeader h;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dims") {
      ls >> h.nx >> h.ny >> h.nz;
    } else if (key == "spacing") {
      ls >> h.spacing;
    } else if (key == "origin") {
      ls >> h.origin.x >> h.origin.y >> h.origin.z;
    } else if (key == "dtype") {
      ls >> h.dtype;
    } else if (key == "components") {
      ls >> h.components;
    } else if (key == "byteorder") {
      std::string bo;
      ls >> bo;
      if (bo != "little") throw IoError("unsupported byteorder in " + path.string());
    } else if (key == "data") {
      ls >> h.data_file;
    } else {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      h.extra[key] = rest;
    }
  }
  if (h.nx <= 0 || h.ny <= 0 || h.nz <= 0 || h.dtype.empty() || h.data_file.empty())
    throw IoError("incomplete volume header: " + path.string());
  return h;
}

inline void write_header(const std::filesystem::path& path, const VolumeHeader& h) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open header for writing: " + path.string());
  f << "dims " << h.nx << " " << h.ny << " " << h.nz << "\n";
  f << "spacing " << fmt_double(h.spacing) << "\n";
  f << "origin " << fmt_double(h.origin.x) << " " << fmt_double(h.origin.y) << " "
    << fmt_double(h.origin.z) << "\n";
  f << "dtype " << h.dtype << "\n";
  f << "byteorder little\n";
  if (h.components != 1) f << "components " << h.components << "\n";
  for (const auto& [k, v] : h.extra) f << k << " " << v << "\n";
  f << "data " << h.data_file << "\n";
}

template <typename T>
struct dtype_name;
template <>
struct dtype_name<std::uint8_t> {
  static constexpr const char* value = "u8";
};
template <>
struct dtype_name<float> {
  static constexpr const char* value = "f32";
};

}  // namespace detail

/// Writes <base>.pvh and <base>.raw.
template <typename T>
inline void write_volume(const std::filesystem::path& base, const Grid3<T>& g) {
  static_assert(std::is_same_v<T, std::uint8_t> || std::is_same_v<T, float>);
  detail::VolumeHeader h;
  h.nx = g.nx;
  h.ny = g.ny;
  h.nz = g.nz;
  h.spacing = g.spacing;
  h.origin = g.origin;
  h.dtype = detail::dtype_name<T>::value;
  h.data_file = base.filename().string() + ".raw";
  detail::write_header(base.string() + ".pvh", h);
  detail::write_raw(base.string() + ".raw", g.data.data(), g.data.size() * sizeof(T));
}

inline void write_volume(const std::filesystem::path& base, const VectorVolume& g) {
  detail::VolumeHeader h;
  h.nx = g.nx;
  h.ny = g.ny;
  h.nz = g.nz;
  h.spacing = g.spacing;
  h.origin = g.origin;
  h.dtype = "f32";
  h.components = 3;
  h.data_file = base.filename().string() + ".raw";
  detail::write_header(base.string() + ".pvh", h);
  detail::write_raw(base.string() + ".raw", g.data.data(), g.data.size() * sizeof(Vec3f));
}

template <typename T>
inline Grid3<T> read_volume(const std::filesystem::path& header_path) {
  static_assert(std::is_same_v<T, std::uint8_t> || std::is_same_v<T, float>);
  auto h = detail::read_header(header_path);
  if (h.dtype != detail::dtype_name<T>::value || h.components != 1)
    throw IoError("dtype mismatch reading " + header_path.string());
  Grid3<T> g(h.nx, h.ny, h.nz, h.spacing, h.origin);
  auto buf = detail::read_raw(header_path.parent_path() / h.data_file, g.size() * sizeof(T));
  std::memcpy(g.data.data(), buf.data(), buf.size());
  return g;
}

inline VectorVolume read_vector_volume(const std::filesystem::path& header_path) {
  auto h = detail::read_header(header_path);
  if (h.dtype != "f32" || h.components != 3)
    throw IoError("expected 3-component f32 volume: " + header_path.string());
  VectorVolume g(h.nx, h.ny, h.nz, h.spacing, h.origin);
  auto buf = detail::read_raw(header_path.parent_path() / h.data_file, g.size() * sizeof(Vec3f));
  std::memcpy(g.data.data(), buf.data(), buf.size());
  return g;
}

/// Slice masks are stored as u8 volumes of dims (nu, nv, 1) with the plane
/// pose in extra header keys so files are self-describing.
inline void write_slice_mask(const std::filesystem::path& base, const Mask2D& m,
                             const PlaneFrame& frame) {
  detail::VolumeHeader h;
  h.nx = m.nu;
  h.ny = m.nv;
  h.nz = 1;
  h.spacing = m.su;
  h.origin = frame.pose.translation;
  h.dtype = "u8";
  h.data_file = base.filename().string() + ".raw";
  using detail::fmt_double;
  auto u = frame.axis_u(), v = frame.axis_v();
  h.extra["axis_u"] = fmt_double(u.x) + " " + fmt_double(u.y) + " " + fmt_double(u.z);
  h.extra["axis_v"] = fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z);
  h.extra["pixel_v_mm"] = fmt_double(m.sv);
  h.extra["thickness"] = fmt_double(frame.thickness);
  detail::write_header(base.string() + ".pvh", h);
  detail::write_raw(base.string() + ".raw", m.data.data(), m.data.size());
}

inline void write_slice_image(const std::filesystem::path& base, const Image2D& img,
                              const PlaneFrame& frame) {
  detail::VolumeHeader h;
  h.nx = img.nu;
  h.ny = img.nv;
  h.nz = 1;
  h.spacing = img.su;
  h.origin = frame.pose.translation;
  h.dtype = "f32";
  h.data_file = base.filename().string() + ".raw";
  h.extra["thickness"] = detail::fmt_double(frame.thickness);
  detail::write_header(base.string() + ".pvh", h);
  detail::write_raw(base.string() + ".raw", img.data.data(), img.data.size() * sizeof(float));
}

inline Mask2D read_slice_mask(const std::filesystem::path& header_path) {
  auto h = detail::read_header(header_path);
  if (h.dtype != "u8" || h.nz != 1)
    throw IoError("not a slice mask: " + header_path.string());
  double sv = h.spacing;
  if (auto it = h.extra.find("pixel_v_mm"); it != h.extra.end()) sv = std::stod(it->second);
  Mask2D m(h.nx, h.ny, h.spacing, sv);
  auto buf = detail::read_raw(header_path.parent_path() / h.data_file, m.size());
  std::memcpy(m.data.data(), buf.data(), buf.size());
  return m;
}

/// Minimal CSV writer; fields are written verbatim, rows newline-terminated.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : f_(path) {
    if (!f_) throw IoError("cannot open csv for writing: " + path.string());
    f_ << std::setprecision(12);
  }
  template <typename... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((f_ << (first ? "" : ",") << fields, first = false), ...);
    f_ << "\n";
  }

 private:
  std::ofstream f_;
};

}  // namespace planerecon
