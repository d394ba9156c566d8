// Copyright 2026 The Sangria Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SANGRIA_IO_HPP_
#define SANGRIA_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sangria/error.hpp"

namespace sangria {

// Fixed-width little-endian binary encoding. Doubles are written as raw
// IEEE-754 bits so every artifact round-trips bit-exactly.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { put(&v, 1); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    u64(s.size());
    put(s.data(), s.size());
  }

  void f64_vec(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }

  void magic(const char tag[5]) { put(tag, 4); }

 private:
  template <typename T>
  void put_le(T v) {
    std::array<char, sizeof(T)> buf;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    put(buf.data(), buf.size());
  }

  void put(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw SerializationError("write failed");
  }

  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8() {
    std::uint8_t v;
    get(&v, 1);
    return v;
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    const std::uint64_t n = u64();
    check_size(n);
    std::string s(static_cast<std::size_t>(n), '\0');
    get(s.data(), s.size());
    return s;
  }

  std::vector<double> f64_vec() {
    const std::uint64_t n = u64();
    check_size(n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = f64();
    return v;
  }

  // Consumes a 4-byte tag and fails loudly if it is not the expected one.
  void expect_magic(const char tag[5]) {
    char buf[4];
    get(buf, 4);
    if (buf[0] != tag[0] || buf[1] != tag[1] || buf[2] != tag[2] ||
        buf[3] != tag[3]) {
      throw SerializationError(std::string("bad magic, expected '") + tag +
                               "'");
    }
  }

  // Version gate: artifacts refuse to load under a different format version.
  void expect_version(std::uint32_t expected, const std::string& what) {
    const std::uint32_t got = u32();
    if (got != expected) {
      throw SerializationError(what + " format version " +
                               std::to_string(got) + ", this build reads " +
                               std::to_string(expected));
    }
  }

 private:
  template <typename T>
  T get_le() {
    unsigned char buf[sizeof(T)];
    get(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf[i]) << (8 * i);
    }
    return v;
  }

  void get(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw SerializationError("unexpected end of stream");
    }
  }

  void check_size(std::uint64_t n) {
    if (n > (1ULL << 40)) throw SerializationError("implausible field size");
  }

  std::istream& in_;
};

// FNV-1a, the content hash used for dataset fingerprints and artifact
// identity checks.
class Fnv1a {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void add_u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    add(buf, 8);
  }
  void add_f64(double v) { add_u64(std::bit_cast<std::uint64_t>(v)); }
  void add_str(const std::string& s) {
    add_u64(s.size());
    add(s.data(), s.size());
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file_bytes(const std::string& path);

}  // namespace sangria

#endif  // SANGRIA_IO_HPP_
