#include "tmis/audit.hpp"

namespace tmis {
namespace {

struct Stop {};

class Auditor {
 public:
  explicit Auditor(AuditReport& r) : r_(r) {}

  void need(const std::string& name, bool cond, const std::string& detail = "") {
    r_.checks.push_back({name, cond, cond ? "" : detail});
    if (!cond) throw Stop{};
  }

  template <typename Body>
  Body open_body(const std::string& name, const SymKey& key, const Ciphertext& ct, Timestamp outer) {
    Body b;
    try {
      b = open<Body>(key, ct);
    } catch (const Error& e) {
      need(name, false, e.what());
    }
    need(name, true);
    need(name + " timestamp", std::get<std::tuple_size_v<decltype(b.members())> - 1>(b.members()) == outer,
         "inner and outer timestamps differ");
    return b;
  }

  std::vector<MedicalReport> open_bundle(const std::string& name, const Digest& key, const Ciphertext& ct,
                                         std::size_t n) {
    try {
      auto out = open_reports(derive_key(key), ct, n);
      need(name, true);
      return out;
    } catch (const Error& e) {
      need(name, false, e.what());
    }
    return {};
  }

  void digest(const std::string& name, const Digest& computed, const Digest& received) {
    need(name, computed == received, "recomputed digest differs");
  }

  void sig(const std::string& name, const GroupPoint& pk, const MedicalReport& m, const Signature& s) {
    need(name, verify(pk, report_digest(m), s), "signature does not verify");
  }

 private:
  AuditReport& r_;
};

void run(const TranscriptFile& f, Auditor& a) {
  const auto& t = f.messages;
  const auto& reg = f.registry;

  a.need("message count", t.size() == 12, std::to_string(t.size()) + " of 12 messages");
  for (std::size_t i = 0; i < t.size(); ++i) {
    a.need("message order", static_cast<std::size_t>(t[i].type()) == i + 1,
           "message " + std::to_string(i) + " is " + std::string(to_string(t[i].type())));
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto route = route_of(t[i].type());
    bool ok = t[i].from == route.from && t[i].to == route.to && t[i].channel == route.channel;
    a.need("channel label", ok, "message " + std::to_string(i) + " has the wrong route or channel");
  }

  // The receiver answers at the instant it reads, so within a phase the
  // next send time is the arrival time. Last hop: arrival = send + tick.
  Duration tick{f.header.value("tick_ms", std::uint64_t{10})};
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto sent = t[i].sent_at();
    Timestamp arrival = (i % 3 != 2) ? t[i + 1].sent_at() : Timestamp{sent.millis + static_cast<std::uint64_t>(tick.count())};
    a.need("freshness", arrival.millis >= sent.millis && is_fresh(arrival, sent, f.delta_t),
           "message " + std::to_string(i) + " arrives " + std::to_string(arrival.millis - sent.millis) + " ms late");
  }

  const auto& h1 = t[0].as<HupMsg1>();
  const auto& h2 = t[1].as<HupMsg2>();
  const auto& h3 = t[2].as<HupMsg3>();
  const auto& p1 = t[3].as<PupMsg1>();
  const auto& p2 = t[4].as<PupMsg2>();
  const auto& p3 = t[5].as<PupMsg3>();
  const auto& d1 = t[6].as<TpMsg1>();
  const auto& d2 = t[7].as<TpMsg2>();
  const auto& d3 = t[8].as<TpMsg3>();
  const auto& c1 = t[9].as<CpMsg1>();
  const auto& c2 = t[10].as<CpMsg2>();
  const auto& c3 = t[11].as<CpMsg3>();

  a.need("identities", h1.id_h == reg.id_h && p1.id_p == reg.id_p && d1.id_d == reg.id_d && c1.id_p == reg.id_p &&
                           c1.nid == p1.nid,
         "identities differ from the header");

  // HUP
  auto e1 = a.open_body<HupChallengeBody>("E1", derive_key(keys::hup_transport(h1.id_h, h1.a, h1.t_h1)), h2.e1,
                                          h2.t_c2);
  a.digest("S1", verifier::s1(h1.id_h, h1.a, e1.b, h1.t_h1), e1.s1);
  auto sk_hc = keys::hup_session(h1.id_h, e1.s1, dh_point(h1.a, e1.b), h2.t_c2);
  auto e2 = a.open_body<HupUploadBody>("E2", derive_key(sk_hc), h3.e2, h3.t_h3);
  a.digest("S2", verifier::s2(sk_hc, e2.c_h, e2.sig_h, h3.t_h3), e2.s2);
  a.need("E2 patient", e2.id_p == p1.id_p && e2.nid == p1.nid, "E2 names another patient");
  auto k_insp = keys::inspection(reg.id_p, reg.id_h, e2.nid);
  auto m_h = a.open_bundle("C_H", k_insp, e2.c_h, 1);
  a.sig("Sig_H", reg.pk_h, m_h[0], e2.sig_h);

  // PUP
  auto sn = c1.sn_x;
  auto sn_key = derive_key(sn);
  a.need("I", p2.i == mask_serial(sn, patient_mask(p1.nid, p1.id_p)), "I does not unmask to sn_x");
  auto e3 = a.open_body<PupChallengeBody>("E3", sn_key, p2.e3, p2.t_c5);
  a.need("E3 contents", e3.c_h == e2.c_h && e3.sig_h == e2.sig_h && e3.id_h == h1.id_h, "E3 differs from HUP");
  a.digest("S3", verifier::s3(p1.nid, p1.id_p, e3.c_h, e3.sig_h, e3.c, p2.t_c5), e3.s3);
  auto e4 = a.open_body<PupUploadBody>("E4", sn_key, p3.e4, p3.t_p3);
  auto cdg = dh_point(e4.d, e3.c);
  auto sk_pc = keys::pup_session(p1.id_p, e3.id_h, e3.c_h, e3.s3, cdg, p2.t_c5);
  a.digest("S4", verifier::s4(sk_pc, e4.c_p, e4.sig_p, e3.s3, cdg, p3.t_p3), e4.s4);
  auto k_pd = keys::report(f.variant, reg.id_p, reg.id_h, p1.nid, reg.id_d, sn);
  auto mp = a.open_bundle("C_P", k_pd, e4.c_p, 2);
  a.need("C_P contents", mp[0] == m_h[0], "C_P carries a different m_H");
  a.sig("Sig_P", reg.pk_p, mp[1], e4.sig_p);

  // TP
  a.need("J", d2.j == mask_serial(sn, doctor_mask(d1.id_d, d1.r)), "J does not unmask to sn_x");
  auto e5 = a.open_body<TpChallengeBody>("E5", sn_key, d2.e5, d2.t_c8);
  a.need("E5 contents",
         e5.sig_p == e4.sig_p && e5.sig_h == e2.sig_h && e5.id_p == reg.id_p && e5.nid == p1.nid && e5.c_p == e4.c_p,
         "E5 differs from PUP");
  a.digest("S5", verifier::s5(e5.id_p, d1.id_d, e5.sig_h, e5.sig_p, e5.c_p, d2.t_c8), e5.s5);
  auto e6 = a.open_body<TpPrescriptionBody>("E6", sn_key, d3.e6, d3.t_d3);
  a.digest("S6", verifier::s6(e5.id_p, d1.id_d, e6.c_d, e6.sig_d, e5.sig_p, d3.t_d3), e6.s6);
  auto md = a.open_bundle("C_D", k_pd, e6.c_d, 3);
  a.need("C_D contents", md[0] == mp[0] && md[1] == mp[1], "C_D carries different m_H/m_B");
  a.sig("Sig_D", reg.pk_d, md[2], e6.sig_d);

  // CP
  auto e7 = a.open_body<CpChallengeBody>("E7", derive_key(sk_pc), c2.e7, c2.t_c11);
  a.need("E7 contents", e7.id_d == d1.id_d && e7.sig_d == e6.sig_d && e7.c_d == e6.c_d, "E7 differs from TP");
  auto xyg = dh_point(c1.x, e7.y);
  a.digest("S7", verifier::s7(sk_pc, c1.id_p, e7.id_d, e7.c_d, xyg, e5.sig_p, c2.t_c11), e7.s7);
  auto e8 = a.open_body<CpArchiveBody>("E8", derive_key(sk_pc), c3.e8, c3.t_p6);
  a.digest("S8", verifier::s8(sk_pc, e7.s7, e8.c_e, e5.sig_p, e7.sig_d, xyg, c3.t_p6), e8.s8);
  auto me = a.open_bundle("C_E", k_pd, e8.c_e, 3);
  a.need("C_E contents", me == md, "C_E differs from C_D");

  a.need("outcome", f.outcome.is_object() && f.outcome.value("status", "") == "completed",
         "outcome line does not report a completed session");
}

}  // namespace

AuditReport audit_transcript(const TranscriptFile& file) {
  AuditReport r;
  Auditor a(r);
  try {
    run(file, a);
  } catch (const Stop&) {
  }
  return r;
}

}  // namespace tmis
