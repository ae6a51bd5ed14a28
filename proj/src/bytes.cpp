#include "tmis/bytes.hpp"

#include <limits>

#include "tmis/error.hpp"

namespace tmis {

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::MalformedMessage, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::MalformedMessage, "invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

void append_u32be(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void append_u64be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t read_u64be(ByteView data) {
  std::uint64_t v = 0;
  for (auto b : data.first(8)) v = (v << 8) | b;
  return v;
}

FieldWriter& FieldWriter::add(ByteView field) {
  fields_.emplace_back(field.begin(), field.end());
  return *this;
}

FieldWriter& FieldWriter::add_u8(std::uint8_t v) {
  fields_.push_back(Bytes{v});
  return *this;
}

FieldWriter& FieldWriter::add_u64(std::uint64_t v) {
  Bytes b;
  append_u64be(b, v);
  fields_.push_back(std::move(b));
  return *this;
}

Bytes FieldWriter::finish() const {
  Bytes out;
  append_u32be(out, static_cast<std::uint32_t>(fields_.size()));
  for (const auto& f : fields_) {
    append_u32be(out, static_cast<std::uint32_t>(f.size()));
    append(out, f);
  }
  return out;
}

namespace {
std::uint32_t take_u32(ByteView data, std::size_t& pos) {
  if (data.size() - pos < 4) throw Error(ErrorCode::MalformedMessage, "truncated length prefix");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data[pos++];
  return v;
}
}  // namespace

FieldReader::FieldReader(ByteView data) {
  std::size_t pos = 0;
  auto n = take_u32(data, pos);
  // Every field needs at least its 4-byte prefix.
  if (n > (data.size() - pos) / 4) throw Error(ErrorCode::MalformedMessage, "field count exceeds input");
  fields_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto len = take_u32(data, pos);
    if (len > data.size() - pos) throw Error(ErrorCode::MalformedMessage, "truncated field");
    fields_.push_back(data.subspan(pos, len));
    pos += len;
  }
  if (pos != data.size()) throw Error(ErrorCode::MalformedMessage, "trailing bytes after field list");
}

void FieldReader::expect_count(std::size_t n) const {
  if (fields_.size() != n) {
    throw Error(ErrorCode::MalformedMessage,
                "expected " + std::to_string(n) + " fields, got " + std::to_string(fields_.size()));
  }
}

ByteView FieldReader::next() {
  if (pos_ >= fields_.size()) throw Error(ErrorCode::MalformedMessage, "missing field");
  return fields_[pos_++];
}

std::uint8_t FieldReader::next_u8() {
  auto f = next();
  expect_size(f, 1);
  return f[0];
}

std::uint64_t FieldReader::next_u64() {
  auto f = next();
  expect_size(f, 8);
  return read_u64be(f);
}

void FieldReader::expect_done() const {
  if (!done()) throw Error(ErrorCode::MalformedMessage, "unconsumed fields");
}

void FieldReader::expect_size(ByteView f, std::size_t n) {
  if (f.size() != n) {
    throw Error(ErrorCode::MalformedMessage,
                "field size " + std::to_string(f.size()) + " != " + std::to_string(n));
  }
}

}  // namespace tmis
