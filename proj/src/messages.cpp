#include "tmis/messages.hpp"

#include "tmis/error.hpp"
#include "tmis/field_codec.hpp"

namespace tmis {

template <typename Tag>
OpaqueId<Tag> OpaqueId<Tag>::from_bytes(ByteView bytes) {
  if (bytes.empty()) throw Error(ErrorCode::MalformedMessage, "empty identifier");
  OpaqueId id;
  id.bytes_.assign(bytes.begin(), bytes.end());
  return id;
}

template class OpaqueId<IdentityTag>;
template class OpaqueId<NidTag>;

bool is_fresh(Timestamp now, Timestamp sent, Duration delta) {
  if (now < sent) return false;
  return now.millis - sent.millis <= static_cast<std::uint64_t>(delta.count());
}

void check_freshness(Timestamp now, Timestamp sent, Duration delta) {
  if (!is_fresh(now, sent, delta)) {
    throw Error(ErrorCode::StaleTimestamp, "sent at " + std::to_string(sent.millis) + ", received at " +
                                               std::to_string(now.millis) + ", window " +
                                               std::to_string(delta.count()) + "ms");
  }
}

Bytes MedicalReport::encode() const {
  FieldWriter w;
  w.add_u8(static_cast<std::uint8_t>(kind)).add(patient.bytes()).add(payload);
  return w.finish();
}

MedicalReport MedicalReport::decode(ByteView bytes) {
  FieldReader r(bytes);
  r.expect_count(3);
  MedicalReport m;
  auto kind = r.next_u8();
  if (kind < 1 || kind > 3) throw Error(ErrorCode::MalformedMessage, "unknown report kind");
  m.kind = static_cast<ReportKind>(kind);
  m.patient = Identity::from_bytes(r.next());
  m.payload = r.next_bytes();
  return m;
}

Route route_of(MessageType type) {
  using enum Role;
  switch (type) {
    case MessageType::HupMsg1: return {Hospital, Cloud, Channel::Secure};
    case MessageType::HupMsg2: return {Cloud, Hospital, Channel::Public};
    case MessageType::HupMsg3: return {Hospital, Cloud, Channel::Public};
    case MessageType::PupMsg1: return {Patient, Cloud, Channel::Secure};
    case MessageType::PupMsg2: return {Cloud, Patient, Channel::Public};
    case MessageType::PupMsg3: return {Patient, Cloud, Channel::Public};
    case MessageType::TpMsg1: return {Doctor, Cloud, Channel::Secure};
    case MessageType::TpMsg2: return {Cloud, Doctor, Channel::Public};
    case MessageType::TpMsg3: return {Doctor, Cloud, Channel::Public};
    case MessageType::CpMsg1: return {Patient, Cloud, Channel::Secure};
    case MessageType::CpMsg2: return {Cloud, Patient, Channel::Public};
    case MessageType::CpMsg3: return {Patient, Cloud, Channel::Public};
  }
  throw Error(ErrorCode::MalformedMessage, "unknown message type");
}

std::string_view to_string(MessageType type) {
  static constexpr std::array<std::string_view, 12> kNames{"HupMsg1", "HupMsg2", "HupMsg3", "PupMsg1",
                                                           "PupMsg2", "PupMsg3", "TpMsg1",  "TpMsg2",
                                                           "TpMsg3",  "CpMsg1",  "CpMsg2",  "CpMsg3"};
  return kNames.at(static_cast<std::size_t>(type) - 1);
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Hospital: return "hospital";
    case Role::Cloud: return "cloud";
    case Role::Patient: return "patient";
    case Role::Doctor: return "doctor";
  }
  return "?";
}

std::string_view to_string(Channel channel) { return channel == Channel::Secure ? "secure" : "public"; }

namespace {

nlohmann::json to_json_value(const Identity& v) { return to_hex(v.bytes()); }
nlohmann::json to_json_value(const Nid& v) { return to_hex(v.bytes()); }
nlohmann::json to_json_value(const Scalar& v) { return to_hex(view(v.bytes())); }
nlohmann::json to_json_value(const Ciphertext& v) { return to_hex(v.to_bytes()); }
nlohmann::json to_json_value(const Timestamp& v) { return v.millis; }

Bytes hex_field(const nlohmann::json& j) {
  if (!j.is_string()) throw Error(ErrorCode::MalformedMessage, "expected hex string");
  return from_hex(j.get<std::string>());
}

void from_json_value(const nlohmann::json& j, Identity& v) { v = Identity::from_bytes(hex_field(j)); }
void from_json_value(const nlohmann::json& j, Nid& v) { v = Nid::from_bytes(hex_field(j)); }
void from_json_value(const nlohmann::json& j, Scalar& v) { v = Scalar::from_bytes(hex_field(j)); }
void from_json_value(const nlohmann::json& j, Ciphertext& v) { v = Ciphertext::from_bytes(hex_field(j)); }
void from_json_value(const nlohmann::json& j, Timestamp& v) {
  if (!j.is_number_unsigned()) throw Error(ErrorCode::MalformedMessage, "expected unsigned timestamp");
  v.millis = j.get<std::uint64_t>();
}

template <std::size_t I = 0>
Payload decode_by_index(std::size_t index, ByteView bytes) {
  if constexpr (I < std::variant_size_v<Payload>) {
    if (index == I) return codec::decode_members<std::variant_alternative_t<I, Payload>>(bytes);
    return decode_by_index<I + 1>(index, bytes);
  } else {
    throw Error(ErrorCode::MalformedMessage, "unknown message type");
  }
}

template <std::size_t I = 0>
Payload record_by_name(std::string_view name, const nlohmann::json& fields) {
  if constexpr (I < std::variant_size_v<Payload>) {
    using Msg = std::variant_alternative_t<I, Payload>;
    if (name != to_string(Msg::kType)) return record_by_name<I + 1>(name, fields);
    if (!fields.is_object() || fields.size() != Msg::kFieldNames.size()) {
      throw Error(ErrorCode::MalformedMessage, "field set mismatch for " + std::string(name));
    }
    Msg m;
    std::size_t k = 0;
    std::apply(
        [&](auto&... f) {
          auto one = [&](auto& member) {
            auto it = fields.find(std::string(Msg::kFieldNames[k++]));
            if (it == fields.end()) throw Error(ErrorCode::MalformedMessage, "missing field");
            from_json_value(*it, member);
          };
          (one(f), ...);
        },
        m.members());
    return m;
  } else {
    throw Error(ErrorCode::MalformedMessage, "unknown message type '" + std::string(name) + "'");
  }
}

constexpr std::uint8_t kWireVersion = 1;

Role role_from(std::uint8_t v) {
  if (v < 1 || v > 4) throw Error(ErrorCode::MalformedMessage, "unknown role");
  return static_cast<Role>(v);
}

Role role_from(std::string_view s) {
  for (auto r : {Role::Hospital, Role::Cloud, Role::Patient, Role::Doctor}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::MalformedMessage, "unknown role '" + std::string(s) + "'");
}

void check_route(const ChannelMessage& m) {
  auto r = route_of(m.type());
  if (r.from != m.from || r.to != m.to || r.channel != m.channel) {
    throw Error(ErrorCode::MalformedMessage, "route does not match " + std::string(to_string(m.type())));
  }
}

std::string json_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw Error(ErrorCode::MalformedMessage, std::string("missing '") + key + "'");
  return it->get<std::string>();
}

}  // namespace

ChannelMessage ChannelMessage::make(Payload payload) {
  ChannelMessage m;
  m.payload = std::move(payload);
  auto r = route_of(m.type());
  m.from = r.from;
  m.to = r.to;
  m.channel = r.channel;
  return m;
}

MessageType ChannelMessage::type() const { return static_cast<MessageType>(payload.index() + 1); }

Timestamp ChannelMessage::sent_at() const {
  return std::visit([](const auto& m) { return std::get<std::tuple_size_v<decltype(m.members())> - 1>(m.members()); },
                    payload);
}

Bytes serialize(const ChannelMessage& msg) {
  Bytes out{kWireVersion, static_cast<std::uint8_t>(msg.type()), static_cast<std::uint8_t>(msg.from),
            static_cast<std::uint8_t>(msg.to), static_cast<std::uint8_t>(msg.channel)};
  append(out, std::visit([](const auto& m) { return codec::encode_members(m); }, msg.payload));
  return out;
}

ChannelMessage deserialize(ByteView bytes) {
  if (bytes.size() < 5) throw Error(ErrorCode::MalformedMessage, "truncated header");
  if (bytes[0] != kWireVersion) throw Error(ErrorCode::MalformedMessage, "unsupported wire version");
  ChannelMessage m;
  if (bytes[1] < 1 || bytes[1] > 12) throw Error(ErrorCode::MalformedMessage, "unknown message type");
  m.from = role_from(bytes[2]);
  m.to = role_from(bytes[3]);
  if (bytes[4] > 1) throw Error(ErrorCode::MalformedMessage, "unknown channel");
  m.channel = static_cast<Channel>(bytes[4]);
  m.payload = decode_by_index(bytes[1] - 1u, bytes.subspan(5));
  check_route(m);
  return m;
}

nlohmann::json to_record(const ChannelMessage& msg, std::size_t index) {
  nlohmann::json fields = nlohmann::json::object();
  std::visit(
      [&](const auto& m) {
        std::size_t k = 0;
        std::apply([&](const auto&... f) { ((fields[std::string(m.kFieldNames[k++])] = to_json_value(f)), ...); },
                   m.members());
      },
      msg.payload);
  return nlohmann::json{{"kind", "message"},
                        {"index", index},
                        {"from", to_string(msg.from)},
                        {"to", to_string(msg.to)},
                        {"channel", to_string(msg.channel)},
                        {"sent_at", msg.sent_at().millis},
                        {"type", to_string(msg.type())},
                        {"fields", std::move(fields)}};
}

ChannelMessage from_record(const nlohmann::json& record) {
  if (!record.is_object()) throw Error(ErrorCode::MalformedMessage, "record is not an object");
  auto fields = record.find("fields");
  if (fields == record.end()) throw Error(ErrorCode::MalformedMessage, "missing 'fields'");
  ChannelMessage m;
  m.payload = record_by_name(json_string(record, "type"), *fields);
  m.from = role_from(json_string(record, "from"));
  m.to = role_from(json_string(record, "to"));
  auto channel = json_string(record, "channel");
  if (channel != "secure" && channel != "public") throw Error(ErrorCode::MalformedMessage, "unknown channel");
  m.channel = channel == "secure" ? Channel::Secure : Channel::Public;
  check_route(m);
  auto sent = record.find("sent_at");
  if (sent == record.end() || !sent->is_number_unsigned() || sent->get<std::uint64_t>() != m.sent_at().millis) {
    throw Error(ErrorCode::MalformedMessage, "sent_at disagrees with payload timestamp");
  }
  return m;
}

}  // namespace tmis
