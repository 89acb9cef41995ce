#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"

// Little-endian binary stream helpers. The host is assumed little-endian
// (asserted once at startup of readers/writers).

namespace piano::binio {

inline void check_host_le() {
  const std::uint32_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  if (b != 1) throw FormatError("binio: big-endian hosts are unsupported");
}

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path)
      : out(path, std::ios::binary | std::ios::trunc) {
    check_host_le();
    if (!out) throw FormatError("binio: cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void i64(std::int64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void magic(const char (&m)[9]) { bytes(m, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void f32_array(const std::vector<double>& v) {
    std::vector<float> tmp(v.begin(), v.end());
    bytes(tmp.data(), tmp.size() * 4);
  }
  bool good() const { return out.good(); }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    check_host_le();
    if (!in) throw MissingArtifactError("binio: cannot open: " + p);
  }
  std::size_t offset() { return static_cast<std::size_t>(in.tellg()); }
  void bytes(void* p, std::size_t n) {
    std::size_t at = offset();
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw FormatError(path + ": truncated at offset " + std::to_string(at));
  }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  std::int64_t i64() { std::int64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  float f32() { float v; bytes(&v, 4); return v; }
  void expect_magic(const char (&m)[9]) {
    std::size_t at = offset();
    char got[8];
    bytes(got, 8);
    if (std::memcmp(got, m, 8) != 0)
      throw FormatError(path + ": bad magic at offset " + std::to_string(at));
  }
  std::string str() {
    std::uint32_t n = u32();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void f32_array(std::vector<double>& v, std::size_t n) {
    std::vector<float> tmp(n);
    bytes(tmp.data(), n * 4);
    v.assign(tmp.begin(), tmp.end());
  }
};

// FNV-1a, used for config hashes and manifest checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(s.data(), s.size());
}

inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checksum: cannot open: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

}  // namespace piano::binio
