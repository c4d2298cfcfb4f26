// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Little-endian binary encoding helpers and atomic file replacement.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stdgat/errors.hpp"

namespace stdgat::io {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

class BinaryWriter {
 public:
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void u16(std::uint16_t v) { pod(v); }
  void u32(std::uint32_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void bytes(std::string_view s) { buf_.append(s.data(), s.size()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  void f64s(const std::vector<double>& v) {
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }

  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint16_t u16() { return pod<std::uint16_t>(); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(bytes(u32())); }
  std::vector<double> f64s(std::size_t n) {
    if (n > remaining() / sizeof(double)) throw FormatError("truncated payload");
    std::vector<double> v(n);
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw FormatError("truncated payload");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

// Writes to a sibling temp file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Magic plus (major, minor) version. Readers reject other majors.
inline void write_header(BinaryWriter& w, std::string_view magic, std::uint16_t major, std::uint16_t minor) {
  w.bytes(magic);
  w.u16(major);
  w.u16(minor);
}

inline void read_header(BinaryReader& r, std::string_view magic, std::uint16_t major) {
  if (r.remaining() < magic.size() || r.bytes(magic.size()) != magic) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
  const auto got_major = r.u16();
  r.u16();
  if (got_major != major) {
    throw FormatError("unsupported major version " + std::to_string(got_major) + " (reader supports " +
                      std::to_string(major) + ")");
  }
}

}  // namespace stdgat::io
