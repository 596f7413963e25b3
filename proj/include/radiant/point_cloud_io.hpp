#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/scene.hpp"

namespace radiant {

// Binary cloud file, all integers and floats little-endian:
//   "RTPC"  u8 version (1)  u8 flags (bit 0: region tags present)  u16 reserved
//   u64 count
//   count records of f64 x, f64 y, f64 z, f64 temperature_k
//   [when flagged] then u32 length + UTF-8 bytes per record
// Text cloud file: first line "RTPC-TEXT 1", then one "x y z temperature_k [region]" per line.
inline constexpr std::array<char, 4> kCloudMagic{'R', 'T', 'P', 'C'};
inline constexpr std::uint8_t kCloudVersion = 1;
inline constexpr std::string_view kCloudTextHeader = "RTPC-TEXT 1";

enum class CloudFormat { Binary, Text };

/// Text for ".txt" and ".xyz" extensions, binary otherwise.
inline CloudFormat cloud_format_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".txt" || ext == ".xyz") ? CloudFormat::Text : CloudFormat::Binary;
}

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    static_assert(sizeof(T) == 8);
    std::memcpy(&bits, &value, 8);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class LeReader {
 public:
  LeReader(const std::string& data, const std::string& name) : data_(data), name_(name) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_floating_point_v<T>) {
      T value;
      std::memcpy(&value, &bits, 8);
      return value;
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorKind::InvalidArgument, "'" + name_ + "': truncated cloud file");
  }

  const std::string& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline void append_number(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::string encode_cloud(const ThermalPointCloud& cloud, CloudFormat format) {
  cloud.validate();
  std::string out;
  if (format == CloudFormat::Binary) {
    out.append(kCloudMagic.begin(), kCloudMagic.end());
    out.push_back(static_cast<char>(kCloudVersion));
    out.push_back(static_cast<char>(cloud.has_regions() ? 1 : 0));
    detail::put_le<std::uint16_t>(out, 0);
    detail::put_le<std::uint64_t>(out, cloud.size());
    out.reserve(out.size() + cloud.size() * 32);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      detail::put_le(out, cloud.points[i].x());
      detail::put_le(out, cloud.points[i].y());
      detail::put_le(out, cloud.points[i].z());
      detail::put_le(out, cloud.temperatures[i]);
    }
    if (cloud.has_regions()) {
      for (const auto& r : cloud.regions) {
        detail::put_le<std::uint32_t>(out, r.size());
        out += r;
      }
    }
    return out;
  }
  out += kCloudTextHeader;
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      detail::append_number(out, cloud.points[i][k]);
      out += ' ';
    }
    detail::append_number(out, cloud.temperatures[i]);
    if (cloud.has_regions() && !cloud.regions[i].empty()) {
      if (cloud.regions[i].find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, "region tag '" + cloud.regions[i] + "' contains whitespace");
      }
      out += ' ';
      out += cloud.regions[i];
    }
    out += '\n';
  }
  return out;
}

inline ThermalPointCloud decode_cloud(const std::string& data, const std::string& name = "cloud") {
  ThermalPointCloud cloud;
  if (data.size() >= 4 && std::equal(kCloudMagic.begin(), kCloudMagic.end(), data.begin()) &&
      data.compare(0, kCloudTextHeader.size(), kCloudTextHeader) != 0) {
    detail::LeReader in(data, name);
    in.bytes(4);
    const auto version = in.get<std::uint8_t>();
    if (version != kCloudVersion) {
      throw Error(ErrorKind::InvalidArgument, "'" + name + "': unsupported cloud version " + std::to_string(version));
    }
    const auto flags = in.get<std::uint8_t>();
    in.get<std::uint16_t>();
    const auto count = in.get<std::uint64_t>();
    if (count > in.remaining() / 32) throw Error(ErrorKind::InvalidArgument, "'" + name + "': truncated cloud file");
    cloud.points.reserve(count);
    cloud.temperatures.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double x = in.get<double>(), y = in.get<double>(), z = in.get<double>();
      cloud.push_back({x, y, z}, in.get<double>());
    }
    if (flags & 1u) {
      cloud.regions.reserve(count);
      for (std::uint64_t i = 0; i < count; ++i) cloud.regions.push_back(in.bytes(in.get<std::uint32_t>()));
    }
  } else {
    std::istringstream in(data);
    std::string line;
    if (!std::getline(in, line) || line.rfind(kCloudTextHeader, 0) != 0) {
      throw Error(ErrorKind::InvalidArgument, "'" + name + "': not a cloud file (bad magic)");
    }
    bool any_region = false;
    std::vector<std::string> regions;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string tok[5];
      int n = 0;
      while (n < 5 && fields >> tok[n]) ++n;
      std::string extra;
      if (n < 4 || (fields >> extra)) {
        throw Error(ErrorKind::InvalidArgument, "'" + name + "' line " + std::to_string(lineno) + ": expected x y z T [region]");
      }
      double v[4];
      for (int k = 0; k < 4; ++k) {
        const auto r = std::from_chars(tok[k].data(), tok[k].data() + tok[k].size(), v[k]);
        if (r.ec != std::errc() || r.ptr != tok[k].data() + tok[k].size()) {
          throw Error(ErrorKind::InvalidArgument, "'" + name + "' line " + std::to_string(lineno) + ": bad number '" + tok[k] + "'");
        }
      }
      cloud.push_back({v[0], v[1], v[2]}, v[3]);
      regions.push_back(n == 5 ? tok[4] : std::string{});
      any_region = any_region || n == 5;
    }
    if (any_region) cloud.regions = std::move(regions);
  }
  cloud.validate();
  return cloud;
}

inline void write_cloud(const std::filesystem::path& path, const ThermalPointCloud& cloud) {
  const std::string data = encode_cloud(cloud, cloud_format_for(path));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

/// Reads either format; the header decides.
inline ThermalPointCloud read_cloud(const std::filesystem::path& path) {
  return decode_cloud(detail::slurp(path), path.string());
}

}  // namespace radiant
