#pragma once

// Cryptographic building blocks over NIST P-256 / SHA-256 / AES-256-GCM.
//
// Canonical encodings (stable, used for hashing and serialization):
//   Scalar     32-byte big-endian, value in [0, q)
//   GroupPoint 33-byte SEC1 compressed point
//   Digest     32 raw bytes
//   SymKey     32 raw bytes
//   Signature  64 bytes r || s, each 32-byte big-endian
//   Ciphertext nonce(12) || body || tag(16)

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "tmis/bytes.hpp"

namespace tmis {

inline constexpr std::size_t kScalarSize = 32;
inline constexpr std::size_t kPointSize = 33;
inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kSymKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

// Deterministic randomness. One engine per (seed, stream); streams keep the
// draws of different actors independent of each other's call order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint32_t stream);

  std::uint64_t next_u64() { return engine_(); }
  void fill(std::span<std::uint8_t> out);

 private:
  std::mt19937_64 engine_;
};

class Scalar {
 public:
  Scalar() = default;  // zero

  // Throws Error(MalformedMessage) unless bytes is 32 bytes encoding a value < q.
  static Scalar from_bytes(ByteView bytes);
  // Interprets bytes as a big-endian integer and reduces mod q.
  static Scalar reduce(ByteView bytes);
  static Scalar from_u64(std::uint64_t v);

  const std::array<std::uint8_t, kScalarSize>& bytes() const { return bytes_; }
  bool is_zero() const;

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  std::array<std::uint8_t, kScalarSize> bytes_{};
};

// Group order q of P-256, big-endian.
const std::array<std::uint8_t, kScalarSize>& group_order();

class GroupPoint {
 public:
  // The base point.
  GroupPoint();

  // Validates the encoding and curve membership; throws Error(InvalidPoint).
  static GroupPoint from_bytes(ByteView bytes);
  static const GroupPoint& generator();

  const std::array<std::uint8_t, kPointSize>& bytes() const { return bytes_; }

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;

 private:
  struct Raw {};
  explicit GroupPoint(Raw) {}
  std::array<std::uint8_t, kPointSize> bytes_{};
};

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};
  friend bool operator==(const Digest&, const Digest&) = default;
};

struct SymKey {
  std::array<std::uint8_t, kSymKeySize> bytes{};
  friend bool operator==(const SymKey&, const SymKey&) = default;
};

struct Signature {
  std::array<std::uint8_t, kSignatureSize> bytes{};
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct Ciphertext {
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes body;
  std::array<std::uint8_t, kTagSize> tag{};

  Bytes to_bytes() const;
  // Throws Error(MalformedMessage) if shorter than nonce + tag.
  static Ciphertext from_bytes(ByteView bytes);

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

struct KeyPair {
  Scalar private_key;
  GroupPoint public_key;

  static KeyPair from_private(const Scalar& private_key);
  static KeyPair generate(Rng& rng);
};

// Domain tags for hash_fields.
namespace domain {
inline constexpr std::string_view kVerifier = "tmis/verifier";
inline constexpr std::string_view kKey = "tmis/key";
inline constexpr std::string_view kMask = "tmis/mask";
inline constexpr std::string_view kReport = "tmis/report";
inline constexpr std::string_view kDiagnosis = "tmis/diagnosis";
inline constexpr std::string_view kSymKey = "tmis/symkey";
}  // namespace domain

// SHA-256 over FieldWriter framing of [tag, parts...].
Digest hash_fields(std::string_view domain_tag, const FieldWriter& parts);
Digest sha256(ByteView data);

SymKey derive_key(const Digest& source);
SymKey derive_key(const Scalar& source);

Ciphertext sym_encrypt(const SymKey& key, ByteView plaintext, Rng& rng);
// Throws Error(AuthFailure) on wrong key or any modification.
Bytes sym_decrypt(const SymKey& key, const Ciphertext& ct);

// Throws Error(InvalidPoint) if k is zero.
GroupPoint ec_mul(const Scalar& k, const GroupPoint& p);
GroupPoint shared_point(const Scalar& my_ephemeral, const GroupPoint& their_public);

// ECDSA over the digest value with RFC 6979 deterministic nonces.
Signature sign(const Scalar& private_key, const Digest& digest);
bool verify(const GroupPoint& public_key, const Digest& digest, const Signature& sig);

Scalar mask_serial(const Scalar& sn, const Digest& d);
Scalar unmask_serial(const Scalar& masked, const Digest& d);

// Uniform in [1, q) by rejection sampling over 256-bit draws.
Scalar random_scalar(Rng& rng);

}  // namespace tmis
