#pragma once

// Little-endian primitives shared by the model file formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tweetner/error.hpp"

namespace tweetner::binary {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return value;
  }
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

  template <class T>
  void put(T value) {
    value = to_little(value);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  template <class T>
  void array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size_bytes()));
    } else {
      for (T v : values) put(v);
    }
  }

  void finish() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::Io, "write failed");
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Magic mismatch means a different or newer format: VersionMismatch.
  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (in_.gcount() != static_cast<std::streamsize>(tag.size())) {
      throw Error(ErrorKind::CorruptFile, "file too short for magic");
    }
    if (got != tag) {
      throw Error(ErrorKind::VersionMismatch, "expected magic '" + std::string(tag) + "'");
    }
  }

  template <class T>
  T get() {
    T value;
    read_bytes(reinterpret_cast<char*>(&value), sizeof(T));
    return to_little(value);
  }

  std::string str() {
    const auto n = get<std::uint32_t>();
    check_remaining(n);
    std::string s(n, '\0');
    read_bytes(s.data(), n);
    return s;
  }

  template <class T>
  void array(std::span<T> out) {
    check_remaining(out.size_bytes());
    read_bytes(reinterpret_cast<char*>(out.data()), out.size_bytes());
    if constexpr (std::endian::native != std::endian::little) {
      for (T& v : out) v = to_little(v);
    }
  }

  /// Rejects trailing garbage after a complete record.
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorKind::CorruptFile, "trailing bytes after model data");
    }
  }

  void require(std::size_t n) { check_remaining(n); }

 private:
  void read_bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error(ErrorKind::CorruptFile, "unexpected end of file");
  }

  /// Fails with CorruptFile unless at least n more bytes are available.
  /// Guards allocations sized by a corrupt length field.
  void check_remaining(std::size_t n) {
    const auto here = in_.tellg();
    if (here < 0) return;
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(here);
    if (end - here < static_cast<std::streamoff>(n)) throw Error(ErrorKind::CorruptFile, "unexpected end of file");
  }

  std::istream& in_;
};

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace tweetner::binary
