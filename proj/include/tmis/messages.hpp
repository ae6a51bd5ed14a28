#pragma once

// Wire-level types for the twelve protocol messages.
//
// Binary layout (serialize/deserialize):
//   u8 version (=1) | u8 type (1..12) | u8 from | u8 to | u8 channel |
//   FieldWriter list of the payload members in declaration order.
// Member encodings: Identity/Nid raw bytes, Scalar 32-byte big-endian,
// Ciphertext nonce||body||tag, Timestamp u64 big-endian milliseconds.
//
// Text records (to_record/from_record) are one JSON object per message:
//   {"index", "from", "to", "channel", "sent_at", "type", "fields": {...}}
// with byte strings hex-encoded and timestamps as integers.

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tmis/bytes.hpp"
#include "tmis/primitives.hpp"

namespace tmis {

using Duration = std::chrono::milliseconds;

struct Timestamp {
  std::uint64_t millis = 0;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// Throws Error(StaleTimestamp) unless 0 <= now - sent <= delta.
void check_freshness(Timestamp now, Timestamp sent, Duration delta);
bool is_fresh(Timestamp now, Timestamp sent, Duration delta);

template <typename Tag>
class OpaqueId {
 public:
  OpaqueId() = default;
  // Throws Error(MalformedMessage) on empty input.
  static OpaqueId from_bytes(ByteView bytes);
  static OpaqueId from_string(std::string_view s) { return from_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())); }

  const Bytes& bytes() const { return bytes_; }
  bool empty() const { return bytes_.empty(); }

  friend bool operator==(const OpaqueId&, const OpaqueId&) = default;
  friend auto operator<=>(const OpaqueId&, const OpaqueId&) = default;

 private:
  Bytes bytes_;
};

using Identity = OpaqueId<struct IdentityTag>;
using Nid = OpaqueId<struct NidTag>;
extern template class OpaqueId<IdentityTag>;
extern template class OpaqueId<NidTag>;

enum class ReportKind : std::uint8_t { Inspection = 1, Sensor = 2, Treatment = 3 };

struct MedicalReport {
  ReportKind kind = ReportKind::Inspection;
  Identity patient;
  Bytes payload;

  Bytes encode() const;
  static MedicalReport decode(ByteView bytes);

  friend bool operator==(const MedicalReport&, const MedicalReport&) = default;
};

enum class Role : std::uint8_t { Hospital = 1, Cloud = 2, Patient = 3, Doctor = 4 };
enum class Channel : std::uint8_t { Secure = 0, Public = 1 };

enum class MessageType : std::uint8_t {
  HupMsg1 = 1,
  HupMsg2,
  HupMsg3,
  PupMsg1,
  PupMsg2,
  PupMsg3,
  TpMsg1,
  TpMsg2,
  TpMsg3,
  CpMsg1,
  CpMsg2,
  CpMsg3,
};

struct Route {
  Role from;
  Role to;
  Channel channel;
};

Route route_of(MessageType type);
std::string_view to_string(MessageType type);
std::string_view to_string(Role role);
std::string_view to_string(Channel channel);

#define TMIS_MESSAGE(Name, ...)                                               \
  static constexpr MessageType kType = MessageType::Name;                    \
  auto members() { return std::tie(__VA_ARGS__); }                           \
  auto members() const { return std::tie(__VA_ARGS__); }                     \
  friend bool operator==(const Name&, const Name&) = default

// Field lists follow the protocol tuples; the trailing member is always the
// sender's timestamp.
struct HupMsg1 {
  Identity id_h;
  Scalar a;
  Timestamp t_h1;
  static constexpr std::array<std::string_view, 3> kFieldNames{"id_h", "a", "t_h1"};
  TMIS_MESSAGE(HupMsg1, id_h, a, t_h1);
};

struct HupMsg2 {
  Ciphertext e1;
  Timestamp t_c2;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e1", "t_c2"};
  TMIS_MESSAGE(HupMsg2, e1, t_c2);
};

struct HupMsg3 {
  Ciphertext e2;
  Timestamp t_h3;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e2", "t_h3"};
  TMIS_MESSAGE(HupMsg3, e2, t_h3);
};

struct PupMsg1 {
  Identity id_p;
  Nid nid;
  Timestamp t_p1;
  static constexpr std::array<std::string_view, 3> kFieldNames{"id_p", "nid", "t_p1"};
  TMIS_MESSAGE(PupMsg1, id_p, nid, t_p1);
};

struct PupMsg2 {
  Ciphertext e3;
  Scalar i;
  Timestamp t_c5;
  static constexpr std::array<std::string_view, 3> kFieldNames{"e3", "i", "t_c5"};
  TMIS_MESSAGE(PupMsg2, e3, i, t_c5);
};

struct PupMsg3 {
  Ciphertext e4;
  Timestamp t_p3;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e4", "t_p3"};
  TMIS_MESSAGE(PupMsg3, e4, t_p3);
};

struct TpMsg1 {
  Identity id_d;
  Scalar r;
  Timestamp t_d1;
  static constexpr std::array<std::string_view, 3> kFieldNames{"id_d", "r", "t_d1"};
  TMIS_MESSAGE(TpMsg1, id_d, r, t_d1);
};

struct TpMsg2 {
  Ciphertext e5;
  Scalar j;
  Timestamp t_c8;
  static constexpr std::array<std::string_view, 3> kFieldNames{"e5", "j", "t_c8"};
  TMIS_MESSAGE(TpMsg2, e5, j, t_c8);
};

struct TpMsg3 {
  Ciphertext e6;
  Timestamp t_d3;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e6", "t_d3"};
  TMIS_MESSAGE(TpMsg3, e6, t_d3);
};

struct CpMsg1 {
  Identity id_p;
  Nid nid;
  Scalar x;
  Scalar sn_x;
  Timestamp t_p4;
  static constexpr std::array<std::string_view, 5> kFieldNames{"id_p", "nid", "x", "sn_x", "t_p4"};
  TMIS_MESSAGE(CpMsg1, id_p, nid, x, sn_x, t_p4);
};

struct CpMsg2 {
  Ciphertext e7;
  Timestamp t_c11;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e7", "t_c11"};
  TMIS_MESSAGE(CpMsg2, e7, t_c11);
};

struct CpMsg3 {
  Ciphertext e8;
  Timestamp t_p6;
  static constexpr std::array<std::string_view, 2> kFieldNames{"e8", "t_p6"};
  TMIS_MESSAGE(CpMsg3, e8, t_p6);
};

#undef TMIS_MESSAGE

// Alternative index + 1 == MessageType value.
using Payload = std::variant<HupMsg1, HupMsg2, HupMsg3, PupMsg1, PupMsg2, PupMsg3, TpMsg1, TpMsg2, TpMsg3, CpMsg1,
                             CpMsg2, CpMsg3>;

struct ChannelMessage {
  Role from = Role::Hospital;
  Role to = Role::Cloud;
  Channel channel = Channel::Secure;
  Payload payload;

  // Fills from/to/channel from the payload type's fixed route.
  static ChannelMessage make(Payload payload);

  MessageType type() const;
  Timestamp sent_at() const;

  template <typename T>
  const T& as() const { return std::get<T>(payload); }

  friend bool operator==(const ChannelMessage&, const ChannelMessage&) = default;
};

using Transcript = std::vector<ChannelMessage>;

Bytes serialize(const ChannelMessage& msg);
// Throws Error(MalformedMessage) on truncated, garbled or mis-routed input.
ChannelMessage deserialize(ByteView bytes);

nlohmann::json to_record(const ChannelMessage& msg, std::size_t index);
// Throws Error(MalformedMessage).
ChannelMessage from_record(const nlohmann::json& record);

}  // namespace tmis
