#include "tmis/primitives.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>

#include <algorithm>
#include <memory>

#include "tmis/error.hpp"

namespace tmis {
namespace {

template <auto Fn>
struct Deleter {
  template <typename T>
  void operator()(T* p) const { Fn(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, Deleter<BN_free>>;
using BnCtxPtr = std::unique_ptr<BN_CTX, Deleter<BN_CTX_free>>;
using PointPtr = std::unique_ptr<EC_POINT, Deleter<EC_POINT_free>>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, Deleter<EVP_MD_CTX_free>>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, Deleter<EVP_CIPHER_CTX_free>>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, Deleter<EVP_PKEY_free>>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, Deleter<EVP_PKEY_CTX_free>>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, Deleter<OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, Deleter<OSSL_PARAM_free>>;
using EcdsaSigPtr = std::unique_ptr<ECDSA_SIG, Deleter<ECDSA_SIG_free>>;

[[noreturn]] void openssl_failure(const char* what) {
  throw std::runtime_error(std::string("openssl: ") + what);
}

template <typename P>
P checked(P p, const char* what) {
  if (!p) openssl_failure(what);
  return p;
}

const EC_GROUP* curve() {
  static const std::unique_ptr<EC_GROUP, Deleter<EC_GROUP_free>> group(
      checked(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1), "EC_GROUP_new_by_curve_name"));
  return group.get();
}

const BIGNUM* order() { return EC_GROUP_get0_order(curve()); }

BnPtr bn_from(ByteView bytes) {
  return BnPtr(checked(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr), "BN_bin2bn"));
}

BnPtr bn_new() { return BnPtr(checked(BN_new(), "BN_new")); }

std::array<std::uint8_t, 32> bn_to32(const BIGNUM* bn) {
  std::array<std::uint8_t, 32> out{};
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(out.size())) != 32) openssl_failure("BN_bn2binpad");
  return out;
}

PointPtr decode_point(const GroupPoint& p, BN_CTX* ctx) {
  PointPtr pt(checked(EC_POINT_new(curve()), "EC_POINT_new"));
  if (EC_POINT_oct2point(curve(), pt.get(), p.bytes().data(), p.bytes().size(), ctx) != 1) {
    throw Error(ErrorCode::InvalidPoint, "point decoding failed");
  }
  return pt;
}

std::array<std::uint8_t, kPointSize> encode_point(const EC_POINT* pt, BN_CTX* ctx) {
  std::array<std::uint8_t, kPointSize> out{};
  if (EC_POINT_is_at_infinity(curve(), pt) == 1) throw Error(ErrorCode::InvalidPoint, "point at infinity");
  auto n = EC_POINT_point2oct(curve(), pt, POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx);
  if (n != out.size()) openssl_failure("EC_POINT_point2oct");
  return out;
}

std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ||
      len != out.size()) {
    openssl_failure("HMAC");
  }
  return out;
}

bool less_than_order(ByteView be32) {
  const auto& q = group_order();
  return std::lexicographical_compare(be32.begin(), be32.end(), q.begin(), q.end());
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  engine_.seed(seq);
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    auto word = next_u64();
    for (int shift = 56; shift >= 0 && i < out.size(); shift -= 8) out[i++] = static_cast<std::uint8_t>(word >> shift);
  }
}

const std::array<std::uint8_t, kScalarSize>& group_order() {
  static const auto q = bn_to32(order());
  return q;
}

Scalar Scalar::from_bytes(ByteView bytes) {
  if (bytes.size() != kScalarSize) throw Error(ErrorCode::MalformedMessage, "scalar must be 32 bytes");
  if (!less_than_order(bytes)) throw Error(ErrorCode::MalformedMessage, "scalar not reduced mod q");
  Scalar s;
  std::copy(bytes.begin(), bytes.end(), s.bytes_.begin());
  return s;
}

Scalar Scalar::reduce(ByteView bytes) {
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  auto v = bn_from(bytes);
  auto r = bn_new();
  if (BN_nnmod(r.get(), v.get(), order(), ctx.get()) != 1) openssl_failure("BN_nnmod");
  Scalar s;
  s.bytes_ = bn_to32(r.get());
  return s;
}

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.bytes_[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

bool Scalar::is_zero() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
}

GroupPoint GroupPoint::from_bytes(ByteView bytes) {
  if (bytes.size() != kPointSize || (bytes[0] != 0x02 && bytes[0] != 0x03)) {
    throw Error(ErrorCode::InvalidPoint, "expected 33-byte compressed point");
  }
  GroupPoint p{Raw{}};
  std::copy(bytes.begin(), bytes.end(), p.bytes_.begin());
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  auto pt = decode_point(p, ctx.get());
  // Rejects x >= p encodings that OpenSSL would silently reduce.
  if (encode_point(pt.get(), ctx.get()) != p.bytes_) throw Error(ErrorCode::InvalidPoint, "non-canonical encoding");
  return p;
}

GroupPoint::GroupPoint() : bytes_(generator().bytes_) {}

const GroupPoint& GroupPoint::generator() {
  static const GroupPoint g = [] {
    BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
    GroupPoint p{Raw{}};
    p.bytes_ = encode_point(EC_GROUP_get0_generator(curve()), ctx.get());
    return p;
  }();
  return g;
}

Bytes Ciphertext::to_bytes() const {
  Bytes out;
  out.reserve(nonce.size() + body.size() + tag.size());
  append(out, view(nonce));
  append(out, body);
  append(out, view(tag));
  return out;
}

Ciphertext Ciphertext::from_bytes(ByteView bytes) {
  if (bytes.size() < kNonceSize + kTagSize) throw Error(ErrorCode::MalformedMessage, "ciphertext too short");
  Ciphertext ct;
  std::copy_n(bytes.begin(), kNonceSize, ct.nonce.begin());
  ct.body.assign(bytes.begin() + kNonceSize, bytes.end() - kTagSize);
  std::copy(bytes.end() - kTagSize, bytes.end(), ct.tag.begin());
  return ct;
}

KeyPair KeyPair::from_private(const Scalar& private_key) {
  return KeyPair{private_key, ec_mul(private_key, GroupPoint::generator())};
}

KeyPair KeyPair::generate(Rng& rng) { return from_private(random_scalar(rng)); }

Digest sha256(ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1) {
    openssl_failure("EVP_Digest");
  }
  return d;
}

Digest hash_fields(std::string_view domain_tag, const FieldWriter& parts) {
  // frame([tag] ++ parts): bump the count and splice the tag in front.
  Bytes body = parts.finish();
  Bytes framed;
  framed.reserve(body.size() + domain_tag.size() + 8);
  append_u32be(framed, static_cast<std::uint32_t>(parts.size() + 1));
  append_u32be(framed, static_cast<std::uint32_t>(domain_tag.size()));
  append(framed, ByteView(reinterpret_cast<const std::uint8_t*>(domain_tag.data()), domain_tag.size()));
  framed.insert(framed.end(), body.begin() + 4, body.end());
  return sha256(framed);
}

namespace {
constexpr std::uint8_t kSourceDigest = 0x01;
constexpr std::uint8_t kSourceScalar = 0x02;

SymKey key_from(std::uint8_t kind, ByteView material) {
  FieldWriter w;
  w.add_u8(kind).add(material);
  return SymKey{hash_fields(domain::kSymKey, w).bytes};
}
}  // namespace

SymKey derive_key(const Digest& source) { return key_from(kSourceDigest, view(source.bytes)); }
SymKey derive_key(const Scalar& source) { return key_from(kSourceScalar, view(source.bytes())); }

Ciphertext sym_encrypt(const SymKey& key, ByteView plaintext, Rng& rng) {
  Ciphertext ct;
  rng.fill(ct.nonce);
  ct.body.resize(plaintext.size());
  CipherCtxPtr ctx(checked(EVP_CIPHER_CTX_new(), "EVP_CIPHER_CTX_new"));
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(), ct.nonce.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), ct.body.data(), &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, ct.tag.data()) != 1) {
    openssl_failure("AES-256-GCM encrypt");
  }
  return ct;
}

Bytes sym_decrypt(const SymKey& key, const Ciphertext& ct) {
  Bytes out(ct.body.size());
  CipherCtxPtr ctx(checked(EVP_CIPHER_CTX_new(), "EVP_CIPHER_CTX_new"));
  int len = 0;
  auto tag = ct.tag;
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(), ct.nonce.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct.body.data(), static_cast<int>(ct.body.size())) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) != 1) {
    openssl_failure("AES-256-GCM decrypt");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) <= 0) {
    throw Error(ErrorCode::AuthFailure, "authentication tag mismatch");
  }
  return out;
}

GroupPoint ec_mul(const Scalar& k, const GroupPoint& p) {
  if (k.is_zero()) throw Error(ErrorCode::InvalidPoint, "zero scalar");
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  auto pt = decode_point(p, ctx.get());
  auto kb = bn_from(view(k.bytes()));
  PointPtr r(checked(EC_POINT_new(curve()), "EC_POINT_new"));
  if (EC_POINT_mul(curve(), r.get(), nullptr, pt.get(), kb.get(), ctx.get()) != 1) openssl_failure("EC_POINT_mul");
  return GroupPoint::from_bytes(encode_point(r.get(), ctx.get()));
}

GroupPoint shared_point(const Scalar& my_ephemeral, const GroupPoint& their_public) {
  return ec_mul(my_ephemeral, their_public);
}

Signature sign(const Scalar& private_key, const Digest& digest) {
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  const auto& x = private_key.bytes();
  // bits2octets(h1): the digest reduced mod q.
  const auto h1 = Scalar::reduce(view(digest.bytes)).bytes();

  std::array<std::uint8_t, 32> v{};
  std::array<std::uint8_t, 32> k{};
  v.fill(0x01);
  auto seed = [&](std::uint8_t sep) {
    Bytes m;
    append(m, view(v));
    m.push_back(sep);
    append(m, view(x));
    append(m, view(h1));
    k = hmac_sha256(view(k), m);
    v = hmac_sha256(view(k), view(v));
  };
  seed(0x00);
  seed(0x01);

  auto e = bn_from(view(digest.bytes));
  auto d = bn_from(view(x));
  PointPtr big_r(checked(EC_POINT_new(curve()), "EC_POINT_new"));
  auto rx = bn_new();
  auto r = bn_new();
  auto s = bn_new();
  auto tmp = bn_new();
  for (;;) {
    v = hmac_sha256(view(k), view(v));
    if (!std::all_of(v.begin(), v.end(), [](auto b) { return b == 0; }) && less_than_order(view(v))) {
      auto kn = bn_from(view(v));
      if (EC_POINT_mul(curve(), big_r.get(), kn.get(), nullptr, nullptr, ctx.get()) != 1 ||
          EC_POINT_get_affine_coordinates(curve(), big_r.get(), rx.get(), nullptr, ctx.get()) != 1 ||
          BN_nnmod(r.get(), rx.get(), order(), ctx.get()) != 1) {
        openssl_failure("ECDSA nonce point");
      }
      // s = k^-1 (e + r d) mod q
      if (BN_mod_mul(tmp.get(), r.get(), d.get(), order(), ctx.get()) != 1 ||
          BN_mod_add(tmp.get(), tmp.get(), e.get(), order(), ctx.get()) != 1 ||
          !BN_mod_inverse(s.get(), kn.get(), order(), ctx.get()) ||
          BN_mod_mul(s.get(), s.get(), tmp.get(), order(), ctx.get()) != 1) {
        openssl_failure("ECDSA s");
      }
      if (!BN_is_zero(r.get()) && !BN_is_zero(s.get())) break;
    }
    Bytes m;
    append(m, view(v));
    m.push_back(0x00);
    k = hmac_sha256(view(k), m);
    v = hmac_sha256(view(k), view(v));
  }

  Signature sig;
  auto rb = bn_to32(r.get());
  auto sb = bn_to32(s.get());
  std::copy(rb.begin(), rb.end(), sig.bytes.begin());
  std::copy(sb.begin(), sb.end(), sig.bytes.begin() + 32);
  return sig;
}

bool verify(const GroupPoint& public_key, const Digest& digest, const Signature& sig) {
  ByteView rs = view(sig.bytes);
  auto r_part = rs.first(32);
  auto s_part = rs.last(32);
  auto nonzero = [](ByteView b) { return std::any_of(b.begin(), b.end(), [](auto c) { return c != 0; }); };
  if (!nonzero(r_part) || !nonzero(s_part) || !less_than_order(r_part) || !less_than_order(s_part)) return false;

  ParamBldPtr bld(checked(OSSL_PARAM_BLD_new(), "OSSL_PARAM_BLD_new"));
  if (OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0) != 1 ||
      OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, public_key.bytes().data(),
                                       public_key.bytes().size()) != 1) {
    openssl_failure("OSSL_PARAM_BLD push");
  }
  ParamPtr params(checked(OSSL_PARAM_BLD_to_param(bld.get()), "OSSL_PARAM_BLD_to_param"));
  PkeyCtxPtr from_ctx(checked(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr), "EVP_PKEY_CTX_new_from_name"));
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_fromdata_init(from_ctx.get()) != 1 ||
      EVP_PKEY_fromdata(from_ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) != 1) {
    return false;
  }
  PkeyPtr pkey(raw);

  EcdsaSigPtr esig(checked(ECDSA_SIG_new(), "ECDSA_SIG_new"));
  auto r = bn_from(r_part);
  auto s = bn_from(s_part);
  if (ECDSA_SIG_set0(esig.get(), r.get(), s.get()) != 1) openssl_failure("ECDSA_SIG_set0");
  r.release();
  s.release();
  unsigned char* der = nullptr;
  int der_len = i2d_ECDSA_SIG(esig.get(), &der);
  if (der_len <= 0) openssl_failure("i2d_ECDSA_SIG");
  std::unique_ptr<unsigned char, void (*)(unsigned char*)> der_owner(der, [](unsigned char* p) { OPENSSL_free(p); });

  PkeyCtxPtr vctx(checked(EVP_PKEY_CTX_new(pkey.get(), nullptr), "EVP_PKEY_CTX_new"));
  if (EVP_PKEY_verify_init(vctx.get()) != 1) return false;
  return EVP_PKEY_verify(vctx.get(), der, static_cast<std::size_t>(der_len), digest.bytes.data(),
                         digest.bytes.size()) == 1;
}

Scalar mask_serial(const Scalar& sn, const Digest& d) {
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  auto a = bn_from(view(sn.bytes()));
  auto b = bn_from(view(Scalar::reduce(view(d.bytes)).bytes()));
  auto r = bn_new();
  if (BN_mod_add(r.get(), a.get(), b.get(), order(), ctx.get()) != 1) openssl_failure("BN_mod_add");
  return Scalar::from_bytes(view(bn_to32(r.get())));
}

Scalar unmask_serial(const Scalar& masked, const Digest& d) {
  BnCtxPtr ctx(checked(BN_CTX_new(), "BN_CTX_new"));
  auto a = bn_from(view(masked.bytes()));
  auto b = bn_from(view(Scalar::reduce(view(d.bytes)).bytes()));
  auto r = bn_new();
  if (BN_mod_sub(r.get(), a.get(), b.get(), order(), ctx.get()) != 1) openssl_failure("BN_mod_sub");
  return Scalar::from_bytes(view(bn_to32(r.get())));
}

Scalar random_scalar(Rng& rng) {
  std::array<std::uint8_t, kScalarSize> buf{};
  for (;;) {
    rng.fill(buf);
    if (less_than_order(view(buf)) && std::any_of(buf.begin(), buf.end(), [](auto b) { return b != 0; })) {
      return Scalar::from_bytes(view(buf));
    }
  }
}

}  // namespace tmis
