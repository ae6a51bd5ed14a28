#include "tmis/actors.hpp"

#include <gtest/gtest.h>

#include "tmis/error.hpp"

namespace tmis {
namespace {

constexpr Duration kDelta{2000};

MedicalReport report(ReportKind kind, const Identity& p, std::string_view body) {
  return MedicalReport{kind, p, to_bytes(body)};
}

// Four actors wired by hand; each test drives the steps it needs.
struct World {
  explicit World(std::uint64_t seed, ReportKeyVariant variant = ReportKeyVariant::A) {
    Rng keys(seed, 0);
    auto kh = KeyPair::generate(keys), kp = KeyPair::generate(keys), kd = KeyPair::generate(keys);
    reg = Registry{Identity::from_string("hospital-1"), Identity::from_string("patient-7"),
                   Identity::from_string("doctor-3"), kh.public_key, kp.public_key, kd.public_key};
    cfg = ActorConfig{kDelta, variant};
    hospital.emplace(reg.id_h, kh, cfg, Rng(seed, 1));
    cloud.emplace(cfg, Rng(seed, 2));
    m_h = report(ReportKind::Inspection, reg.id_p, "blood panel");
    m_b = report(ReportKind::Sensor, reg.id_p, "hr=71");
    nid = hospital->register_patient(reg.id_p, m_h);
    patient.emplace(reg.id_p, nid, kp, reg, cfg, Rng(seed, 3));
    doctor.emplace(reg.id_d, kd, reg, cfg, Rng(seed, 4));
    cloud->appoint(reg.id_p, reg.id_d);
  }

  Timestamp tick() { return now = Timestamp{now.millis + 10}; }

  void hup() {
    auto m1 = hospital->hup_init(tick());
    auto m2 = cloud->hup_challenge(m1, tick());
    auto m3 = hospital->hup_upload(m2, tick());
    cloud->hup_store(m3, tick());
  }
  void pup() {
    auto m1 = patient->pup_request(m_b, tick());
    auto m2 = cloud->pup_respond(m1, tick());
    auto m3 = patient->pup_upload(m2, tick());
    cloud->pup_store(m3, tick());
  }
  void tp() {
    auto m1 = doctor->tp_request(tick());
    auto m2 = cloud->tp_respond(m1, tick());
    auto m3 = doctor->tp_prescribe(m2, tick());
    cloud->tp_store(m3, tick());
  }
  Collected cp() {
    auto m1 = patient->cp_request(tick());
    auto m2 = cloud->cp_respond(m1, tick());
    auto out = patient->cp_collect(m2, tick());
    cloud->cp_store(out.msg, tick());
    return out;
  }

  PupMsg2 pup_challenge() {
    auto m1 = patient->pup_request(m_b, tick());
    return cloud->pup_respond(m1, tick());
  }
  TpMsg2 tp_challenge() {
    auto m1 = doctor->tp_request(tick());
    return cloud->tp_respond(m1, tick());
  }
  CpMsg2 cp_challenge() {
    auto m1 = patient->cp_request(tick());
    return cloud->cp_respond(m1, tick());
  }

  const CloudRecord& record() const { return cloud->records().at(reg.id_p); }
  const CloudSession& csession() const { return cloud->sessions().at(reg.id_p); }

  Registry reg;
  ActorConfig cfg;
  Nid nid;
  MedicalReport m_h, m_b;
  std::optional<Hospital> hospital;
  std::optional<Cloud> cloud;
  std::optional<Patient> patient;
  std::optional<Doctor> doctor;
  Timestamp now{1'000'000};
};

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::MalformedMessage;
}

void flip_body(Ciphertext& ct, std::size_t i = 0) { ct.body.at(i) ^= 0x01; }

TEST(Hup, InitStampsClockAndDrawsFreshEphemeral) {
  World w1(1), w2(2);
  auto t = w1.tick();
  auto m = w1.hospital->hup_init(t);
  EXPECT_EQ(m.t_h1, t);
  EXPECT_EQ(m.id_h, w1.reg.id_h);
  EXPECT_NE(m.a, w2.hospital->hup_init(t).a);
}

TEST(Hup, SessionKeysAgreeAndRecordMatchesUpload) {
  World w(11);
  w.hup();
  ASSERT_TRUE(w.hospital->session().sk_hc);
  EXPECT_EQ(*w.hospital->session().sk_hc, *w.csession().sk_ch);
  const auto& rec = w.record();
  EXPECT_EQ(rec.nid, w.nid);
  EXPECT_EQ(rec.id_p, w.reg.id_p);
  EXPECT_EQ(rec.c_h, w.hospital->session().c_h);
  EXPECT_EQ(rec.sig_h, w.hospital->session().sig_h);
  EXPECT_FALSE(rec.sn_x.is_zero());
  EXPECT_FALSE(rec.c_p);
  EXPECT_EQ(w.csession().id_h, w.reg.id_h);
  EXPECT_EQ(w.hospital->checks(), std::vector<std::string>{"S1"});
}

TEST(Hup, K1FromSameInputsOpensE1) {
  World w(3);
  auto m1 = w.hospital->hup_init(w.tick());
  auto m2 = w.cloud->hup_challenge(m1, w.tick());
  auto body = open<HupChallengeBody>(derive_key(keys::hup_transport(m1.id_h, m1.a, m1.t_h1)), m2.e1);
  EXPECT_EQ(body.t_c2, m2.t_c2);
  EXPECT_EQ(body.s1, verifier::s1(m1.id_h, m1.a, body.b, m1.t_h1));
}

TEST(Hup, StaleInitIsRejected) {
  World w(4);
  auto m1 = w.hospital->hup_init(w.now);
  Timestamp late{w.now.millis + kDelta.count() + 1};
  EXPECT_EQ(code_of([&] { w.cloud->hup_challenge(m1, late); }), ErrorCode::StaleTimestamp);
  Timestamp edge{w.now.millis + kDelta.count()};
  EXPECT_NO_THROW(w.cloud->hup_challenge(m1, edge));
}

TEST(Hup, TamperedE1AbortsWithoutKeys) {
  World w(5);
  auto m1 = w.hospital->hup_init(w.tick());
  auto m2 = w.cloud->hup_challenge(m1, w.tick());
  flip_body(m2.e1);
  EXPECT_EQ(code_of([&] { w.hospital->hup_upload(m2, w.tick()); }), ErrorCode::AuthFailure);
  EXPECT_FALSE(w.hospital->session().sk_hc);
  EXPECT_TRUE(w.hospital->checks().empty());
}

TEST(Hup, WrongS2StoresNothing) {
  World w(6);
  auto m1 = w.hospital->hup_init(w.tick());
  auto m2 = w.cloud->hup_challenge(m1, w.tick());
  auto m3 = w.hospital->hup_upload(m2, w.tick());
  auto sk = derive_key(*w.hospital->session().sk_hc);
  auto body = open<HupUploadBody>(sk, m3.e2);
  body.s2.bytes[0] ^= 0x80;
  Rng rng(99, 0);
  m3.e2 = seal(sk, body, rng);
  EXPECT_EQ(code_of([&] { w.cloud->hup_store(m3, w.tick()); }), ErrorCode::DigestMismatch);
  EXPECT_TRUE(w.cloud->records().empty());
  EXPECT_TRUE(w.cloud->sessions().empty());
}

TEST(Hup, SealedTimestampMustMatchClearOne) {
  World w(7);
  auto m1 = w.hospital->hup_init(w.tick());
  auto m2 = w.cloud->hup_challenge(m1, w.tick());
  auto m3 = w.hospital->hup_upload(m2, w.tick());
  m3.t_h3.millis += 1;
  EXPECT_EQ(code_of([&] { w.cloud->hup_store(m3, w.tick()); }), ErrorCode::TimestampMismatch);
  EXPECT_TRUE(w.cloud->records().empty());
}

TEST(Hup, StoreWithoutChallengeIsUnexpected) {
  World w(8);
  EXPECT_EQ(code_of([&] { w.cloud->hup_store(HupMsg3{}, w.tick()); }), ErrorCode::UnexpectedMessage);
}

TEST(Pup, UnknownPatientOrNid) {
  World w(12);
  w.hup();
  auto m1 = w.patient->pup_request(w.m_b, w.tick());
  auto bad = m1;
  bad.nid = Nid::from_string("not-the-nid");
  EXPECT_EQ(code_of([&] { w.cloud->pup_respond(bad, w.tick()); }), ErrorCode::UnknownPatient);
  World fresh(12);
  EXPECT_EQ(code_of([&] { fresh.cloud->pup_respond(m1, w.now); }), ErrorCode::UnknownPatient);
}

TEST(Pup, MaskedSerialUnmasksToRecordSerial) {
  World w(13);
  w.hup();
  auto m2 = w.pup_challenge();
  EXPECT_EQ(unmask_serial(m2.i, patient_mask(w.nid, w.reg.id_p)), w.record().sn_x);
  EXPECT_NE(m2.i, w.record().sn_x);
}

TEST(Pup, SessionKeysAgreeAndRecordGainsUpload) {
  World w(14);
  w.hup();
  w.pup();
  const auto& ps = w.patient->session();
  ASSERT_TRUE(ps.sk_pc);
  EXPECT_EQ(*ps.sk_pc, *w.csession().sk_cp);
  EXPECT_EQ(ps.sn, w.record().sn_x);
  EXPECT_EQ(ps.m_h, w.m_h);
  EXPECT_EQ(*w.record().c_p, ps.c_p);
  EXPECT_EQ(*w.record().sig_p, ps.sig_p);
  EXPECT_EQ(w.patient->checks(), (std::vector<std::string>{"S3", "Sig_H"}));
  EXPECT_EQ(w.cloud->checks(), (std::vector<std::string>{"S2", "S4"}));
}

TEST(Pup, WrongHospitalKeyIsBadSignature) {
  World w(15);
  Rng other(777, 0);
  auto reg = w.reg;
  reg.pk_h = KeyPair::generate(other).public_key;
  w.patient.emplace(w.reg.id_p, w.nid, KeyPair::generate(other), reg, w.cfg, Rng(15, 3));
  w.hup();
  auto m2 = w.pup_challenge();
  EXPECT_EQ(code_of([&] { w.patient->pup_upload(m2, w.tick()); }), ErrorCode::BadSignature);
  EXPECT_FALSE(w.patient->session().sk_pc);
}

TEST(Pup, CorruptedS4LeavesRecordUnchanged) {
  World w(16);
  w.hup();
  auto before = w.record();
  auto m2 = w.pup_challenge();
  auto m3 = w.patient->pup_upload(m2, w.tick());
  auto key = derive_key(w.record().sn_x);
  auto body = open<PupUploadBody>(key, m3.e4);
  body.s4.bytes[31] ^= 1;
  Rng rng(5, 5);
  m3.e4 = seal(key, body, rng);
  EXPECT_EQ(code_of([&] { w.cloud->pup_store(m3, w.tick()); }), ErrorCode::DigestMismatch);
  EXPECT_EQ(w.record(), before);
  EXPECT_FALSE(w.csession().sk_cp);
}

TEST(Pup, TamperedE3Aborts) {
  World w(17);
  w.hup();
  auto m2 = w.pup_challenge();
  flip_body(m2.e3, 5);
  EXPECT_EQ(code_of([&] { w.patient->pup_upload(m2, w.tick()); }), ErrorCode::AuthFailure);
}

TEST(Tp, RequiresCompletedUpload) {
  World w(21);
  w.hup();
  auto m1 = w.doctor->tp_request(w.tick());
  EXPECT_EQ(code_of([&] { w.cloud->tp_respond(m1, w.tick()); }), ErrorCode::RecordIncomplete);
  World none(21);
  EXPECT_EQ(code_of([&] { none.cloud->tp_respond(m1, w.now); }), ErrorCode::RecordIncomplete);
}

TEST(Tp, UnappointedDoctorIsUnknown) {
  World w(22);
  w.hup();
  w.pup();
  auto m1 = w.doctor->tp_request(w.tick());
  m1.id_d = Identity::from_string("doctor-9");
  EXPECT_EQ(code_of([&] { w.cloud->tp_respond(m1, w.tick()); }), ErrorCode::UnknownDoctor);
}

TEST(Tp, SerialRecoveredKeysAgreeAndSignaturesChecked) {
  World w(23);
  w.hup();
  w.pup();
  auto m1 = w.doctor->tp_request(w.tick());
  auto m2 = w.cloud->tp_respond(m1, w.tick());
  EXPECT_EQ(unmask_serial(m2.j, doctor_mask(m1.id_d, m1.r)), w.record().sn_x);
  auto m3 = w.doctor->tp_prescribe(m2, w.tick());
  w.cloud->tp_store(m3, w.tick());
  const auto& ds = w.doctor->session();
  EXPECT_EQ(ds.sn, w.record().sn_x);
  EXPECT_EQ(*ds.sk_dc, *w.csession().sk_cd);
  EXPECT_EQ(w.doctor->checks(), (std::vector<std::string>{"S5", "Sig_H", "Sig_P"}));
  EXPECT_EQ(*w.record().c_d, ds.c_d);
  EXPECT_EQ(*w.record().sig_d, ds.sig_d);
  EXPECT_EQ(ds.m_d, diagnose(w.m_h, w.m_b));
}

TEST(Tp, WrongPatientKeyIsBadSignature) {
  World w(24);
  Rng other(778, 0);
  auto reg = w.reg;
  reg.pk_p = KeyPair::generate(other).public_key;
  w.doctor.emplace(w.reg.id_d, KeyPair::generate(other), reg, w.cfg, Rng(24, 4));
  w.hup();
  w.pup();
  auto m2 = w.tp_challenge();
  EXPECT_EQ(code_of([&] { w.doctor->tp_prescribe(m2, w.tick()); }), ErrorCode::BadSignature);
}

TEST(Tp, TamperedE6LeavesRecordUnchanged) {
  World w(25);
  w.hup();
  w.pup();
  auto m2 = w.tp_challenge();
  auto m3 = w.doctor->tp_prescribe(m2, w.tick());
  auto before = w.record();
  flip_body(m3.e6, 40);
  EXPECT_EQ(code_of([&] { w.cloud->tp_store(m3, w.tick()); }), ErrorCode::AuthFailure);
  EXPECT_EQ(w.record(), before);
  EXPECT_FALSE(w.csession().sk_cd);
}

TEST(Cp, RequiresPrescription) {
  World w(31);
  w.hup();
  w.pup();
  auto m1 = w.patient->cp_request(w.tick());
  EXPECT_EQ(code_of([&] { w.cloud->cp_respond(m1, w.tick()); }), ErrorCode::RecordIncomplete);
}

TEST(Cp, WrongSerialIsRejected) {
  World w(32);
  w.hup();
  w.pup();
  w.tp();
  auto m1 = w.patient->cp_request(w.tick());
  EXPECT_EQ(m1.sn_x, w.record().sn_x);
  m1.sn_x = Scalar::from_u64(12345);
  EXPECT_EQ(code_of([&] { w.cloud->cp_respond(m1, w.tick()); }), ErrorCode::SerialMismatch);
}

TEST(Cp, ReportsRoundTripEndToEnd) {
  for (auto variant : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    World w(33, variant);
    w.hup();
    w.pup();
    w.tp();
    auto out = w.cp();
    ASSERT_EQ(out.reports.size(), 3u);
    EXPECT_EQ(out.reports[0], w.m_h);
    EXPECT_EQ(out.reports[1], w.m_b);
    EXPECT_EQ(out.reports[2], diagnose(w.m_h, w.m_b));
    EXPECT_EQ(*w.record().c_e, w.patient->session().c_e);
    EXPECT_EQ(w.patient->checks(), (std::vector<std::string>{"S3", "Sig_H", "S7", "Sig_D"}));
    EXPECT_EQ(w.cloud->checks(), (std::vector<std::string>{"S2", "S4", "S6", "S8"}));
  }
}

TEST(Cp, VariantsUseDifferentReportKeys) {
  World a(34, ReportKeyVariant::A), b(34, ReportKeyVariant::B);
  for (auto* w : {&a, &b}) {
    w->hup();
    w->pup();
  }
  const auto& rec = b.record();
  auto key_a = keys::inspection(rec.id_p, b.reg.id_h, rec.nid);
  auto key_b = keys::doctor_bound(rec.id_p, b.reg.id_d, rec.sn_x);
  EXPECT_NO_THROW(open_reports(derive_key(key_b), *rec.c_p, 2));
  EXPECT_THROW(open_reports(derive_key(key_a), *rec.c_p, 2), Error);
  EXPECT_NO_THROW(open_reports(derive_key(keys::inspection(rec.id_p, a.reg.id_h, rec.nid)), *a.record().c_p, 2));
}

TEST(Cp, WrongDoctorKeyIsBadSignature) {
  World w(35);
  Rng other(779, 0);
  auto reg = w.reg;
  reg.pk_d = KeyPair::generate(other).public_key;
  w.patient.emplace(w.reg.id_p, w.nid, KeyPair::generate(other), reg, w.cfg, Rng(35, 3));
  // the patient key changed too, so re-register its public key with the doctor
  auto dreg = w.reg;
  dreg.pk_p = reg.pk_p = w.patient->public_key();
  w.doctor.emplace(w.reg.id_d, KeyPair::generate(other), dreg, w.cfg, Rng(35, 4));
  w.hup();
  w.pup();
  w.tp();
  auto m2 = w.cp_challenge();
  EXPECT_EQ(code_of([&] { w.patient->cp_collect(m2, w.tick()); }), ErrorCode::BadSignature);
}

TEST(Cp, TamperedE8LeavesRecordUnchanged) {
  World w(36);
  w.hup();
  w.pup();
  w.tp();
  auto m2 = w.cp_challenge();
  auto out = w.patient->cp_collect(m2, w.tick());
  auto before = w.record();
  flip_body(out.msg.e8, out.msg.e8.body.size() - 1);
  EXPECT_EQ(code_of([&] { w.cloud->cp_store(out.msg, w.tick()); }), ErrorCode::AuthFailure);
  EXPECT_EQ(w.record(), before);
}

TEST(Actors, AgreementOverSeeds) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    World w(seed, seed % 2 ? ReportKeyVariant::B : ReportKeyVariant::A);
    w.hup();
    w.pup();
    w.tp();
    auto out = w.cp();
    EXPECT_EQ(*w.hospital->session().sk_hc, *w.csession().sk_ch);
    EXPECT_EQ(*w.patient->session().sk_pc, *w.csession().sk_cp);
    EXPECT_EQ(*w.doctor->session().sk_dc, *w.csession().sk_cd);
    EXPECT_EQ(out.reports[1], w.m_b);
  }
}

TEST(Actors, DiscardDropsDerivedKeys) {
  World w(41);
  w.hup();
  w.pup();
  w.patient->discard();
  EXPECT_FALSE(w.patient->session().sk_pc);
  EXPECT_EQ(code_of([&] { w.patient->cp_request(w.tick()); }), ErrorCode::UnexpectedMessage);
  w.hospital->discard();
  EXPECT_FALSE(w.hospital->session().sk_hc);
}

TEST(CloudDb, RowsRoundTripThroughJson) {
  World w(51);
  w.hup();
  w.pup();
  auto rec = w.record();
  EXPECT_EQ(record_from_json(to_json(rec)), rec);
  EXPECT_TRUE(to_json(rec)["c_d"].is_null());
  auto s = w.csession();
  EXPECT_EQ(session_from_json(to_json(s)), s);
  auto j = to_json(rec);
  j["sig_h"] = "abcd";
  EXPECT_THROW(record_from_json(j), Error);
}

}  // namespace
}  // namespace tmis
