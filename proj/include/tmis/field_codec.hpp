#pragma once

// Member codecs for FieldWriter/FieldReader, shared by wire messages and
// ciphertext plaintexts.

#include <tuple>

#include "tmis/bytes.hpp"
#include "tmis/messages.hpp"
#include "tmis/primitives.hpp"

namespace tmis::codec {

inline void put(FieldWriter& w, const Identity& v) { w.add(v.bytes()); }
inline void put(FieldWriter& w, const Nid& v) { w.add(v.bytes()); }
inline void put(FieldWriter& w, const Scalar& v) { w.add(v.bytes()); }
inline void put(FieldWriter& w, const GroupPoint& v) { w.add(v.bytes()); }
inline void put(FieldWriter& w, const Digest& v) { w.add(v.bytes); }
inline void put(FieldWriter& w, const Signature& v) { w.add(v.bytes); }
inline void put(FieldWriter& w, const Ciphertext& v) { w.add(v.to_bytes()); }
inline void put(FieldWriter& w, const Timestamp& v) { w.add_u64(v.millis); }
inline void put(FieldWriter& w, const MedicalReport& v) { w.add(v.encode()); }

inline void get(FieldReader& r, Identity& v) { v = Identity::from_bytes(r.next()); }
inline void get(FieldReader& r, Nid& v) { v = Nid::from_bytes(r.next()); }
inline void get(FieldReader& r, Scalar& v) { v = Scalar::from_bytes(r.next()); }
inline void get(FieldReader& r, GroupPoint& v) { v = GroupPoint::from_bytes(r.next()); }
inline void get(FieldReader& r, Digest& v) { v.bytes = r.next_fixed<kDigestSize>(); }
inline void get(FieldReader& r, Signature& v) { v.bytes = r.next_fixed<kSignatureSize>(); }
inline void get(FieldReader& r, Ciphertext& v) { v = Ciphertext::from_bytes(r.next()); }
inline void get(FieldReader& r, Timestamp& v) { v.millis = r.next_u64(); }
inline void get(FieldReader& r, MedicalReport& v) { v = MedicalReport::decode(r.next()); }

template <typename... Ts>
void put_all(FieldWriter& w, const Ts&... vs) {
  (put(w, vs), ...);
}

// Encodes a struct exposing members() as a field list.
template <typename T>
Bytes encode_members(const T& value) {
  FieldWriter w;
  std::apply([&](const auto&... f) { (put(w, f), ...); }, value.members());
  return w.finish();
}

template <typename T>
T decode_members(ByteView bytes) {
  FieldReader r(bytes);
  T value;
  r.expect_count(std::tuple_size_v<decltype(value.members())>);
  std::apply([&](auto&... f) { (get(r, f), ...); }, value.members());
  return value;
}

}  // namespace tmis::codec
