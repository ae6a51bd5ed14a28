#include "tmis/actors.hpp"

#include <array>

#include "tmis/error.hpp"

namespace tmis {

namespace {

void require_signature(const GroupPoint& pk, const MedicalReport& m, const Signature& sig, std::string_view who) {
  if (!verify(pk, report_digest(m), sig)) throw Error(ErrorCode::BadSignature, std::string(who));
}

void append_checks(std::vector<std::string>& log, std::initializer_list<const char*> names) {
  for (auto n : names) log.emplace_back(n);
}

SymKey key_of(const Digest& d) { return derive_key(d); }
SymKey key_of(const Scalar& s) { return derive_key(s); }

}  // namespace

// ---------------------------------------------------------------- hospital

Hospital::Hospital(Identity id, KeyPair keys, ActorConfig cfg, Rng rng)
    : id_(std::move(id)), keys_(std::move(keys)), cfg_(cfg), rng_(std::move(rng)) {}

Nid Hospital::register_patient(const Identity& id_p, MedicalReport m_h, std::optional<Nid> nid) {
  if (!nid) {
    Bytes raw(16);
    rng_.fill(raw);
    nid = Nid::from_bytes(raw);
  }
  m_h_ = std::move(m_h);
  session_ = {};
  session_.id_p = id_p;
  session_.nid = *nid;
  return *nid;
}

HupMsg1 Hospital::hup_init(Timestamp now) {
  if (!m_h_) throw Error(ErrorCode::UnexpectedMessage, "no registered patient");
  auto id_p = session_.id_p;
  auto nid = session_.nid;
  session_ = {};
  session_.id_p = id_p;
  session_.nid = nid;
  session_.a = random_scalar(rng_);
  session_.t_h1 = now;
  awaiting_ = true;
  return HupMsg1{id_, session_.a, now};
}

HupMsg3 Hospital::hup_upload(const HupMsg2& msg, Timestamp now) {
  if (!awaiting_) throw Error(ErrorCode::UnexpectedMessage, "hospital is not waiting for HupMsg2");
  check_freshness(now, msg.t_c2, cfg_.delta_t);
  const auto& s = session_;

  auto k1 = keys::hup_transport(id_, s.a, s.t_h1);
  auto e1 = open<HupChallengeBody>(key_of(k1), msg.e1);
  check_inner_timestamp(e1.t_c2, msg.t_c2);
  auto s1 = verifier::s1(id_, s.a, e1.b, s.t_h1);
  check_digest(s1, e1.s1, "S1");

  auto sk_hc = keys::hup_session(id_, s1, dh_point(s.a, e1.b), msg.t_c2);
  auto k2 = keys::inspection(s.id_p, id_, s.nid);
  auto c_h = seal_reports(key_of(k2), std::array{*m_h_}, rng_);
  auto sig_h = sign(keys_.private_key, report_digest(*m_h_));
  auto s2 = verifier::s2(sk_hc, c_h, sig_h, now);
  auto e2 = seal(key_of(sk_hc), HupUploadBody{s.id_p, s2, c_h, s.nid, sig_h, now}, rng_);

  session_.b = e1.b;
  session_.t_c2 = msg.t_c2;
  session_.t_h3 = now;
  session_.s1 = s1;
  session_.sk_hc = sk_hc;
  session_.c_h = c_h;
  session_.sig_h = sig_h;
  awaiting_ = false;
  append_checks(checks_, {"S1"});
  return HupMsg3{e2, now};
}

void Hospital::discard() {
  auto id_p = session_.id_p;
  auto nid = session_.nid;
  session_ = {};
  session_.id_p = id_p;
  session_.nid = nid;
  awaiting_ = false;
}

// ------------------------------------------------------------------- cloud

Cloud::Cloud(ActorConfig cfg, Rng rng) : cfg_(cfg), rng_(std::move(rng)) {}

void Cloud::appoint(const Identity& id_p, const Identity& id_d) { appointments_[id_p] = id_d; }

const Cloud::Pending& Cloud::expect(Stage stage) const {
  if (pending_.stage != stage) throw Error(ErrorCode::UnexpectedMessage, "cloud has no matching open step");
  return pending_;
}

const CloudRecord& Cloud::record_for(const Identity& id_p, const Nid& nid) const {
  auto it = records_.find(id_p);
  if (it == records_.end() || it->second.nid != nid) throw Error(ErrorCode::UnknownPatient, "no record for patient");
  return it->second;
}

HupMsg2 Cloud::hup_challenge(const HupMsg1& msg, Timestamp now) {
  check_freshness(now, msg.t_h1, cfg_.delta_t);
  CloudSession s;
  s.id_h = msg.id_h;
  s.a = msg.a;
  s.t_h1 = msg.t_h1;
  s.b = random_scalar(rng_);
  s.t_c2 = now;
  s.s1 = verifier::s1(s.id_h, s.a, s.b, s.t_h1);
  auto k1 = keys::hup_transport(s.id_h, s.a, s.t_h1);
  auto e1 = seal(key_of(k1), HupChallengeBody{s.b, s.s1, now}, rng_);
  pending_ = Pending{Stage::HupStore, Identity{}, std::move(s)};
  return HupMsg2{e1, now};
}

const CloudRecord& Cloud::hup_store(const HupMsg3& msg, Timestamp now) {
  const auto& p = expect(Stage::HupStore);
  check_freshness(now, msg.t_h3, cfg_.delta_t);
  auto s = p.session;
  auto sk_ch = keys::hup_session(s.id_h, s.s1, dh_point(s.b, s.a), s.t_c2);
  auto e2 = open<HupUploadBody>(key_of(sk_ch), msg.e2);
  check_inner_timestamp(e2.t_h3, msg.t_h3);
  check_digest(verifier::s2(sk_ch, e2.c_h, e2.sig_h, msg.t_h3), e2.s2, "S2");

  s.sk_ch = sk_ch;
  CloudRecord rec{e2.nid, e2.id_p, random_scalar(rng_), e2.sig_h, e2.c_h, {}, {}, {}, {}, {}};
  sessions_[e2.id_p] = std::move(s);
  records_[e2.id_p] = std::move(rec);
  pending_ = {};
  append_checks(checks_, {"S2"});
  return records_.at(e2.id_p);
}

PupMsg2 Cloud::pup_respond(const PupMsg1& msg, Timestamp now) {
  check_freshness(now, msg.t_p1, cfg_.delta_t);
  const auto& rec = record_for(msg.id_p, msg.nid);
  auto s = sessions_.at(msg.id_p);
  s.c = random_scalar(rng_);
  s.t_c5 = now;
  s.s3 = verifier::s3(rec.nid, rec.id_p, rec.c_h, rec.sig_h, s.c, now);
  auto i = mask_serial(rec.sn_x, patient_mask(rec.nid, rec.id_p));
  auto e3 = seal(key_of(rec.sn_x), PupChallengeBody{rec.sig_h, rec.c_h, s.s3, s.id_h, s.c, now}, rng_);
  pending_ = Pending{Stage::PupStore, msg.id_p, std::move(s)};
  return PupMsg2{e3, i, now};
}

const CloudRecord& Cloud::pup_store(const PupMsg3& msg, Timestamp now) {
  const auto& p = expect(Stage::PupStore);
  check_freshness(now, msg.t_p3, cfg_.delta_t);
  const auto& rec = records_.at(p.id_p);
  auto s = p.session;
  auto e4 = open<PupUploadBody>(key_of(rec.sn_x), msg.e4);
  check_inner_timestamp(e4.t_p3, msg.t_p3);
  auto cdg = dh_point(s.c, e4.d);
  auto sk_cp = keys::pup_session(rec.id_p, s.id_h, rec.c_h, s.s3, cdg, s.t_c5);
  check_digest(verifier::s4(sk_cp, e4.c_p, e4.sig_p, s.s3, cdg, msg.t_p3), e4.s4, "S4");

  s.sk_cp = sk_cp;
  auto id_p = p.id_p;
  auto& stored = records_.at(id_p);
  stored.sig_p = e4.sig_p;
  stored.c_p = e4.c_p;
  sessions_[id_p] = std::move(s);
  pending_ = {};
  append_checks(checks_, {"S4"});
  return stored;
}

TpMsg2 Cloud::tp_respond(const TpMsg1& msg, Timestamp now) {
  check_freshness(now, msg.t_d1, cfg_.delta_t);
  const Identity* id_p = nullptr;
  for (const auto& [patient, doctor] : appointments_) {
    if (doctor == msg.id_d) {
      id_p = &patient;
      break;
    }
  }
  if (!id_p) throw Error(ErrorCode::UnknownDoctor, "doctor has no appointed patient");
  auto it = records_.find(*id_p);
  if (it == records_.end() || !it->second.c_p) throw Error(ErrorCode::RecordIncomplete, "patient upload missing");
  const auto& rec = it->second;

  auto s = sessions_.at(*id_p);
  s.id_d = msg.id_d;
  s.r = msg.r;
  s.s = random_scalar(rng_);
  s.t_c8 = now;
  auto s5 = verifier::s5(rec.id_p, msg.id_d, rec.sig_h, *rec.sig_p, *rec.c_p, now);
  auto e5 = seal(key_of(rec.sn_x), TpChallengeBody{*rec.sig_p, rec.sig_h, rec.id_p, rec.nid, *rec.c_p, s.s, s5, now},
                 rng_);
  auto j = mask_serial(rec.sn_x, doctor_mask(msg.id_d, msg.r));
  pending_ = Pending{Stage::TpStore, *id_p, std::move(s)};
  return TpMsg2{e5, j, now};
}

const CloudRecord& Cloud::tp_store(const TpMsg3& msg, Timestamp now) {
  const auto& p = expect(Stage::TpStore);
  check_freshness(now, msg.t_d3, cfg_.delta_t);
  const auto& rec = records_.at(p.id_p);
  auto s = p.session;
  auto e6 = open<TpPrescriptionBody>(key_of(rec.sn_x), msg.e6);
  check_inner_timestamp(e6.t_d3, msg.t_d3);
  auto s6 = verifier::s6(rec.id_p, s.id_d, e6.c_d, e6.sig_d, *rec.sig_p, msg.t_d3);
  check_digest(s6, e6.s6, "S6");

  s.s6 = s6;
  s.sk_cd = keys::tp_session(s6, rec.id_p, s.id_d, e6.sig_d, *rec.sig_p, dh_point(s.s, s.r), msg.t_d3);
  auto id_p = p.id_p;
  auto& stored = records_.at(id_p);
  stored.sig_d = e6.sig_d;
  stored.c_d = e6.c_d;
  sessions_[id_p] = std::move(s);
  pending_ = {};
  append_checks(checks_, {"S6"});
  return stored;
}

CpMsg2 Cloud::cp_respond(const CpMsg1& msg, Timestamp now) {
  check_freshness(now, msg.t_p4, cfg_.delta_t);
  const auto& rec = record_for(msg.id_p, msg.nid);
  if (!rec.c_d || !rec.sig_d) throw Error(ErrorCode::RecordIncomplete, "no prescription stored");
  if (rec.sn_x != msg.sn_x) throw Error(ErrorCode::SerialMismatch, "presented sn_x does not match");
  auto s = sessions_.at(msg.id_p);
  s.x = msg.x;
  s.y = random_scalar(rng_);
  s.t_c11 = now;
  s.s7 = verifier::s7(*s.sk_cp, rec.id_p, s.id_d, *rec.c_d, dh_point(s.y, s.x), *rec.sig_p, now);
  auto e7 = seal(key_of(*s.sk_cp), CpChallengeBody{s.id_d, *rec.sig_d, *rec.c_d, s.s7, s.y, now}, rng_);
  pending_ = Pending{Stage::CpStore, msg.id_p, std::move(s)};
  return CpMsg2{e7, now};
}

const CloudRecord& Cloud::cp_store(const CpMsg3& msg, Timestamp now) {
  const auto& p = expect(Stage::CpStore);
  check_freshness(now, msg.t_p6, cfg_.delta_t);
  const auto& rec = records_.at(p.id_p);
  const auto& s = p.session;
  auto e8 = open<CpArchiveBody>(key_of(*s.sk_cp), msg.e8);
  check_inner_timestamp(e8.t_p6, msg.t_p6);
  auto xyg = dh_point(s.y, s.x);
  check_digest(verifier::s8(*s.sk_cp, s.s7, e8.c_e, *rec.sig_p, *rec.sig_d, xyg, msg.t_p6), e8.s8, "S8");

  auto id_p = p.id_p;
  records_.at(id_p).c_e = e8.c_e;
  sessions_[id_p] = s;
  pending_ = {};
  append_checks(checks_, {"S8"});
  return records_.at(id_p);
}

void Cloud::discard() { pending_ = {}; }

// ----------------------------------------------------------------- patient

Patient::Patient(Identity id, Nid nid, KeyPair keys, Registry registry, ActorConfig cfg, Rng rng)
    : id_(std::move(id)),
      nid_(std::move(nid)),
      keys_(std::move(keys)),
      registry_(std::move(registry)),
      cfg_(cfg),
      rng_(std::move(rng)) {}

PupMsg1 Patient::pup_request(MedicalReport m_b, Timestamp now) {
  session_ = {};
  session_.m_b = std::move(m_b);
  session_.t_p1 = now;
  stage_ = Stage::PupUpload;
  return PupMsg1{id_, nid_, now};
}

PupMsg3 Patient::pup_upload(const PupMsg2& msg, Timestamp now) {
  if (stage_ != Stage::PupUpload) throw Error(ErrorCode::UnexpectedMessage, "patient is not waiting for PupMsg2");
  check_freshness(now, msg.t_c5, cfg_.delta_t);

  auto y = unmask_serial(msg.i, patient_mask(nid_, id_));
  auto e3 = open<PupChallengeBody>(key_of(y), msg.e3);
  check_inner_timestamp(e3.t_c5, msg.t_c5);
  auto s3 = verifier::s3(nid_, id_, e3.c_h, e3.sig_h, e3.c, msg.t_c5);
  check_digest(s3, e3.s3, "S3");
  auto k3 = keys::inspection(id_, e3.id_h, nid_);
  auto m_h = open_reports(key_of(k3), e3.c_h, 1).front();
  require_signature(registry_.pk_h, m_h, e3.sig_h, "Sig_H");

  auto d = random_scalar(rng_);
  auto cdg = dh_point(d, e3.c);
  auto sk_pc = keys::pup_session(id_, e3.id_h, e3.c_h, s3, cdg, msg.t_c5);
  auto k_pd = keys::report(cfg_.variant, id_, e3.id_h, nid_, registry_.id_d, y);
  auto c_p = seal_reports(key_of(k_pd), std::array{m_h, session_.m_b}, rng_);
  auto sig_p = sign(keys_.private_key, report_digest(session_.m_b));
  auto s4 = verifier::s4(sk_pc, c_p, sig_p, s3, cdg, now);
  auto e4 = seal(key_of(y), PupUploadBody{d, s4, sig_p, c_p, now}, rng_);

  auto& s = session_;
  s.sn = y;
  s.c = e3.c;
  s.d = d;
  s.t_c5 = msg.t_c5;
  s.t_p3 = now;
  s.s3 = s3;
  s.id_h = e3.id_h;
  s.sk_pc = sk_pc;
  s.sig_h = e3.sig_h;
  s.sig_p = sig_p;
  s.c_h = e3.c_h;
  s.c_p = c_p;
  s.m_h = std::move(m_h);
  stage_ = Stage::PupDone;
  append_checks(checks_, {"S3", "Sig_H"});
  return PupMsg3{e4, now};
}

CpMsg1 Patient::cp_request(Timestamp now) {
  if (stage_ != Stage::PupDone && stage_ != Stage::CpCollect) {
    throw Error(ErrorCode::UnexpectedMessage, "patient has no completed upload");
  }
  session_.x = random_scalar(rng_);
  session_.t_p4 = now;
  stage_ = Stage::CpCollect;
  return CpMsg1{id_, nid_, session_.x, session_.sn, now};
}

Collected Patient::cp_collect(const CpMsg2& msg, Timestamp now) {
  if (stage_ != Stage::CpCollect) throw Error(ErrorCode::UnexpectedMessage, "patient is not waiting for CpMsg2");
  check_freshness(now, msg.t_c11, cfg_.delta_t);
  const auto& s = session_;

  auto e7 = open<CpChallengeBody>(key_of(*s.sk_pc), msg.e7);
  check_inner_timestamp(e7.t_c11, msg.t_c11);
  auto xyg = dh_point(s.x, e7.y);
  auto s7 = verifier::s7(*s.sk_pc, id_, e7.id_d, e7.c_d, xyg, s.sig_p, msg.t_c11);
  check_digest(s7, e7.s7, "S7");
  auto k_pd = keys::report(cfg_.variant, id_, s.id_h, nid_, e7.id_d, s.sn);
  auto reports = open_reports(key_of(k_pd), e7.c_d, 3);
  require_signature(registry_.pk_d, reports[2], e7.sig_d, "Sig_D");

  auto c_e = seal_reports(key_of(k_pd), reports, rng_);
  auto s8 = verifier::s8(*s.sk_pc, s7, c_e, s.sig_p, e7.sig_d, xyg, now);
  auto e8 = seal(key_of(*s.sk_pc), CpArchiveBody{c_e, s8, now}, rng_);

  session_.y = e7.y;
  session_.t_c11 = msg.t_c11;
  session_.t_p6 = now;
  session_.id_d = e7.id_d;
  session_.s7 = s7;
  session_.sig_d = e7.sig_d;
  session_.c_e = c_e;
  stage_ = Stage::PupDone;
  append_checks(checks_, {"S7", "Sig_D"});
  return Collected{CpMsg3{e8, now}, std::move(reports)};
}

void Patient::discard() {
  session_ = {};
  stage_ = Stage::None;
}

// ------------------------------------------------------------------ doctor

Doctor::Doctor(Identity id, KeyPair keys, Registry registry, ActorConfig cfg, Rng rng)
    : id_(std::move(id)), keys_(std::move(keys)), registry_(std::move(registry)), cfg_(cfg), rng_(std::move(rng)) {}

TpMsg1 Doctor::tp_request(Timestamp now) {
  session_ = {};
  session_.r = random_scalar(rng_);
  session_.t_d1 = now;
  awaiting_ = true;
  return TpMsg1{id_, session_.r, now};
}

TpMsg3 Doctor::tp_prescribe(const TpMsg2& msg, Timestamp now) {
  if (!awaiting_) throw Error(ErrorCode::UnexpectedMessage, "doctor is not waiting for TpMsg2");
  check_freshness(now, msg.t_c8, cfg_.delta_t);
  const auto& s = session_;

  auto z = unmask_serial(msg.j, doctor_mask(id_, s.r));
  auto e5 = open<TpChallengeBody>(key_of(z), msg.e5);
  check_inner_timestamp(e5.t_c8, msg.t_c8);
  check_digest(verifier::s5(e5.id_p, id_, e5.sig_h, e5.sig_p, e5.c_p, msg.t_c8), e5.s5, "S5");
  auto k_pd = keys::report(cfg_.variant, e5.id_p, registry_.id_h, e5.nid, id_, z);
  auto reports = open_reports(key_of(k_pd), e5.c_p, 2);
  require_signature(registry_.pk_h, reports[0], e5.sig_h, "Sig_H");
  require_signature(registry_.pk_p, reports[1], e5.sig_p, "Sig_P");

  auto m_d = diagnose(reports[0], reports[1]);
  auto c_d = seal_reports(key_of(k_pd), std::array{reports[0], reports[1], m_d}, rng_);
  auto sig_d = sign(keys_.private_key, report_digest(m_d));
  auto s6 = verifier::s6(e5.id_p, id_, c_d, sig_d, e5.sig_p, now);
  auto sk_dc = keys::tp_session(s6, e5.id_p, id_, sig_d, e5.sig_p, dh_point(s.r, e5.s), now);
  auto e6 = seal(key_of(z), TpPrescriptionBody{sig_d, c_d, s6, now}, rng_);

  session_.s = e5.s;
  session_.sn = z;
  session_.t_c8 = msg.t_c8;
  session_.t_d3 = now;
  session_.id_p = e5.id_p;
  session_.nid = e5.nid;
  session_.s6 = s6;
  session_.sk_dc = sk_dc;
  session_.sig_d = sig_d;
  session_.c_d = c_d;
  session_.m_d = std::move(m_d);
  awaiting_ = false;
  append_checks(checks_, {"S5", "Sig_H", "Sig_P"});
  return TpMsg3{e6, now};
}

void Doctor::discard() {
  session_ = {};
  awaiting_ = false;
}

// ------------------------------------------------------------ db export

namespace {

std::string hex(const Scalar& v) { return to_hex(view(v.bytes())); }
std::string hex(const Digest& v) { return to_hex(view(v.bytes)); }
std::string hex(const Signature& v) { return to_hex(view(v.bytes)); }
std::string hex(const Ciphertext& v) { return to_hex(v.to_bytes()); }

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(hex(*v)) : nlohmann::json(nullptr);
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::MalformedMessage, std::string("missing '") + key + "'");
  return *it;
}

Bytes hex_at(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorCode::MalformedMessage, std::string("'") + key + "' is not a hex string");
  return from_hex(v.get<std::string>());
}

Scalar scalar_at(const nlohmann::json& j, const char* key) { return Scalar::from_bytes(hex_at(j, key)); }

template <typename Fixed>
Fixed fixed_at(const nlohmann::json& j, const char* key) {
  auto b = hex_at(j, key);
  Fixed out;
  if (b.size() != out.bytes.size()) throw Error(ErrorCode::MalformedMessage, std::string("bad length for ") + key);
  std::copy(b.begin(), b.end(), out.bytes.begin());
  return out;
}

Timestamp time_at(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_unsigned()) throw Error(ErrorCode::MalformedMessage, std::string("'") + key + "' is not a time");
  return Timestamp{v.get<std::uint64_t>()};
}

template <typename Fixed>
std::optional<Fixed> opt_fixed(const nlohmann::json& j, const char* key) {
  if (field(j, key).is_null()) return std::nullopt;
  return fixed_at<Fixed>(j, key);
}

std::optional<Ciphertext> opt_ct(const nlohmann::json& j, const char* key) {
  if (field(j, key).is_null()) return std::nullopt;
  return Ciphertext::from_bytes(hex_at(j, key));
}

}  // namespace

nlohmann::json to_json(const CloudRecord& r) {
  return nlohmann::json{{"nid", to_hex(r.nid.bytes())}, {"id_p", to_hex(r.id_p.bytes())},
                        {"sn_x", hex(r.sn_x)},          {"sig_h", hex(r.sig_h)},
                        {"c_h", hex(r.c_h)},            {"sig_p", opt(r.sig_p)},
                        {"c_p", opt(r.c_p)},            {"sig_d", opt(r.sig_d)},
                        {"c_d", opt(r.c_d)},            {"c_e", opt(r.c_e)}};
}

CloudRecord record_from_json(const nlohmann::json& j) {
  CloudRecord r;
  r.nid = Nid::from_bytes(hex_at(j, "nid"));
  r.id_p = Identity::from_bytes(hex_at(j, "id_p"));
  r.sn_x = scalar_at(j, "sn_x");
  r.sig_h = fixed_at<Signature>(j, "sig_h");
  r.c_h = Ciphertext::from_bytes(hex_at(j, "c_h"));
  r.sig_p = opt_fixed<Signature>(j, "sig_p");
  r.c_p = opt_ct(j, "c_p");
  r.sig_d = opt_fixed<Signature>(j, "sig_d");
  r.c_d = opt_ct(j, "c_d");
  r.c_e = opt_ct(j, "c_e");
  return r;
}

nlohmann::json to_json(const CloudSession& s) {
  auto id = [](const Identity& v) { return v.empty() ? nlohmann::json(nullptr) : nlohmann::json(to_hex(v.bytes())); };
  return nlohmann::json{{"id_h", id(s.id_h)},  {"a", hex(s.a)},           {"b", hex(s.b)},
                        {"t_h1", s.t_h1.millis}, {"t_c2", s.t_c2.millis},  {"s1", hex(s.s1)},
                        {"sk_ch", opt(s.sk_ch)}, {"c", hex(s.c)},          {"t_c5", s.t_c5.millis},
                        {"s3", hex(s.s3)},       {"sk_cp", opt(s.sk_cp)},  {"id_d", id(s.id_d)},
                        {"r", hex(s.r)},         {"s", hex(s.s)},          {"t_c8", s.t_c8.millis},
                        {"s6", hex(s.s6)},       {"sk_cd", opt(s.sk_cd)},  {"x", hex(s.x)},
                        {"y", hex(s.y)},         {"t_c11", s.t_c11.millis}, {"s7", hex(s.s7)}};
}

CloudSession session_from_json(const nlohmann::json& j) {
  auto id = [&](const char* key) {
    return field(j, key).is_null() ? Identity{} : Identity::from_bytes(hex_at(j, key));
  };
  CloudSession s;
  s.id_h = id("id_h");
  s.a = scalar_at(j, "a");
  s.b = scalar_at(j, "b");
  s.t_h1 = time_at(j, "t_h1");
  s.t_c2 = time_at(j, "t_c2");
  s.s1 = fixed_at<Digest>(j, "s1");
  s.sk_ch = opt_fixed<Digest>(j, "sk_ch");
  s.c = scalar_at(j, "c");
  s.t_c5 = time_at(j, "t_c5");
  s.s3 = fixed_at<Digest>(j, "s3");
  s.sk_cp = opt_fixed<Digest>(j, "sk_cp");
  s.id_d = id("id_d");
  s.r = scalar_at(j, "r");
  s.s = scalar_at(j, "s");
  s.t_c8 = time_at(j, "t_c8");
  s.s6 = fixed_at<Digest>(j, "s6");
  s.sk_cd = opt_fixed<Digest>(j, "sk_cd");
  s.x = scalar_at(j, "x");
  s.y = scalar_at(j, "y");
  s.t_c11 = time_at(j, "t_c11");
  s.s7 = fixed_at<Digest>(j, "s7");
  return s;
}

}  // namespace tmis
