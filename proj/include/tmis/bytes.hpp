#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmis {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_hex(ByteView data);
// Throws Error(MalformedMessage) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

void append(Bytes& out, ByteView data);
void append_u32be(Bytes& out, std::uint32_t v);
void append_u64be(Bytes& out, std::uint64_t v);
std::uint64_t read_u64be(ByteView data);

template <std::size_t N>
ByteView view(const std::array<std::uint8_t, N>& a) {
  return ByteView(a.data(), a.size());
}

// Length-prefixed field list:
//   u32be(count) || for each field: u32be(len) || bytes
// Used for hash pre-images, ciphertext plaintexts and wire payloads.
class FieldWriter {
 public:
  FieldWriter& add(ByteView field);
  FieldWriter& add(std::string_view field) { return add(ByteView(reinterpret_cast<const std::uint8_t*>(field.data()), field.size())); }
  FieldWriter& add_u8(std::uint8_t v);
  FieldWriter& add_u64(std::uint64_t v);
  template <std::size_t N>
  FieldWriter& add(const std::array<std::uint8_t, N>& a) { return add(view(a)); }

  std::size_t size() const { return fields_.size(); }
  Bytes finish() const;

 private:
  std::vector<Bytes> fields_;
};

// Parses a FieldWriter encoding. All failures raise Error(MalformedMessage).
class FieldReader {
 public:
  explicit FieldReader(ByteView data);

  std::size_t count() const { return fields_.size(); }
  void expect_count(std::size_t n) const;

  ByteView next();
  std::uint8_t next_u8();
  std::uint64_t next_u64();
  template <std::size_t N>
  std::array<std::uint8_t, N> next_fixed() {
    auto f = next();
    expect_size(f, N);
    std::array<std::uint8_t, N> out{};
    std::copy(f.begin(), f.end(), out.begin());
    return out;
  }
  Bytes next_bytes() {
    auto f = next();
    return Bytes(f.begin(), f.end());
  }
  bool done() const { return pos_ == fields_.size(); }
  void expect_done() const;

 private:
  static void expect_size(ByteView f, std::size_t n);

  std::vector<ByteView> fields_;
  std::size_t pos_ = 0;
};

}  // namespace tmis
