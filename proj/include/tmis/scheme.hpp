#pragma once

// Formulas of the four-phase scheme (HUP, PUP, TP, CP): verifier digests
// S1..S8, the report/transport keys, session keys, serial masks and the
// plaintext layouts of ciphertexts E1..E8. Actors, the offline auditor and
// the adversary all compute through these functions so that each party
// hashes identical inputs.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tmis/field_codec.hpp"
#include "tmis/messages.hpp"
#include "tmis/primitives.hpp"

namespace tmis {

// Which formula keys C_P, C_D and C_E.
//   A: h(ID_P || ID_H || NID), the same key that protects C_H.
//   B: h(ID_P || ID_D || sn_x).
enum class ReportKeyVariant { A, B };

std::string_view to_string(ReportKeyVariant v);
// Accepts "A"/"B" (case-insensitive); throws Error(MalformedMessage).
ReportKeyVariant parse_variant(std::string_view s);

namespace keys {

// K1 = h(ID_H || a || T_H1)
Digest hup_transport(const Identity& id_h, const Scalar& a, Timestamp t_h1);
// SK_HC = SK_CH = h(ID_H || S1 || abg || T_C2)
Digest hup_session(const Identity& id_h, const Digest& s1, const GroupPoint& abg, Timestamp t_c2);
// K2 = K3 = K5 = h(ID_P || ID_H || NID)
Digest inspection(const Identity& id_p, const Identity& id_h, const Nid& nid);
// K4 = h(ID_P || ID_D || sn_x)
Digest doctor_bound(const Identity& id_p, const Identity& id_d, const Scalar& sn);
Digest report(ReportKeyVariant variant, const Identity& id_p, const Identity& id_h, const Nid& nid,
              const Identity& id_d, const Scalar& sn);
// SK_PC = SK_CP = h(ID_P || ID_H || C_H || S3 || cdg || T_C5)
Digest pup_session(const Identity& id_p, const Identity& id_h, const Ciphertext& c_h, const Digest& s3,
                   const GroupPoint& cdg, Timestamp t_c5);
// SK_DC = SK_CD = h(S6 || ID_P || ID_D || Sig_D || Sig_P || rsg || T_D3)
Digest tp_session(const Digest& s6, const Identity& id_p, const Identity& id_d, const Signature& sig_d,
                  const Signature& sig_p, const GroupPoint& rsg, Timestamp t_d3);

}  // namespace keys

namespace verifier {

Digest s1(const Identity& id_h, const Scalar& a, const Scalar& b, Timestamp t_h1);
Digest s2(const Digest& sk_hc, const Ciphertext& c_h, const Signature& sig_h, Timestamp t_h3);
Digest s3(const Nid& nid, const Identity& id_p, const Ciphertext& c_h, const Signature& sig_h, const Scalar& c,
          Timestamp t_c5);
Digest s4(const Digest& sk_pc, const Ciphertext& c_p, const Signature& sig_p, const Digest& s3,
          const GroupPoint& cdg, Timestamp t_p3);
Digest s5(const Identity& id_p, const Identity& id_d, const Signature& sig_h, const Signature& sig_p,
          const Ciphertext& c_p, Timestamp t_c8);
Digest s6(const Identity& id_p, const Identity& id_d, const Ciphertext& c_d, const Signature& sig_d,
          const Signature& sig_p, Timestamp t_d3);
Digest s7(const Digest& sk_cp, const Identity& id_p, const Identity& id_d, const Ciphertext& c_d,
          const GroupPoint& xyg, const Signature& sig_p, Timestamp t_c11);
Digest s8(const Digest& sk_pc, const Digest& s7, const Ciphertext& c_e, const Signature& sig_p,
          const Signature& sig_d, const GroupPoint& xyg, Timestamp t_p6);

}  // namespace verifier

// h(NID || ID_P), the digest that masks sn_x towards the patient.
Digest patient_mask(const Nid& nid, const Identity& id_p);
// h(ID_D || r), the digest that masks sn_x towards the doctor.
Digest doctor_mask(const Identity& id_d, const Scalar& r);

// h(m), the digest every report signature covers.
Digest report_digest(const MedicalReport& m);

// Deterministic stand-in for the doctor's diagnosis.
MedicalReport diagnose(const MedicalReport& m_h, const MedicalReport& m_b);

// (a*b)*g from the two raw ephemerals, as both ends of each phase compute it.
GroupPoint dh_point(const Scalar& mine, const Scalar& theirs);

// Plaintexts of E1..E8.
#define TMIS_BODY(...)                                      \
  auto members() { return std::tie(__VA_ARGS__); }          \
  auto members() const { return std::tie(__VA_ARGS__); }

struct HupChallengeBody {  // E1
  Scalar b;
  Digest s1;
  Timestamp t_c2;
  TMIS_BODY(b, s1, t_c2)
};

struct HupUploadBody {  // E2
  Identity id_p;
  Digest s2;
  Ciphertext c_h;
  Nid nid;
  Signature sig_h;
  Timestamp t_h3;
  TMIS_BODY(id_p, s2, c_h, nid, sig_h, t_h3)
};

struct PupChallengeBody {  // E3
  Signature sig_h;
  Ciphertext c_h;
  Digest s3;
  Identity id_h;
  Scalar c;
  Timestamp t_c5;
  TMIS_BODY(sig_h, c_h, s3, id_h, c, t_c5)
};

struct PupUploadBody {  // E4
  Scalar d;
  Digest s4;
  Signature sig_p;
  Ciphertext c_p;
  Timestamp t_p3;
  TMIS_BODY(d, s4, sig_p, c_p, t_p3)
};

struct TpChallengeBody {  // E5
  Signature sig_p;
  Signature sig_h;
  Identity id_p;
  Nid nid;
  Ciphertext c_p;
  Scalar s;
  Digest s5;
  Timestamp t_c8;
  TMIS_BODY(sig_p, sig_h, id_p, nid, c_p, s, s5, t_c8)
};

struct TpPrescriptionBody {  // E6
  Signature sig_d;
  Ciphertext c_d;
  Digest s6;
  Timestamp t_d3;
  TMIS_BODY(sig_d, c_d, s6, t_d3)
};

struct CpChallengeBody {  // E7
  Identity id_d;
  Signature sig_d;
  Ciphertext c_d;
  Digest s7;
  Scalar y;
  Timestamp t_c11;
  TMIS_BODY(id_d, sig_d, c_d, s7, y, t_c11)
};

struct CpArchiveBody {  // E8
  Ciphertext c_e;
  Digest s8;
  Timestamp t_p6;
  TMIS_BODY(c_e, s8, t_p6)
};

#undef TMIS_BODY

template <typename Body>
Ciphertext seal(const SymKey& key, const Body& body, Rng& rng) {
  return sym_encrypt(key, codec::encode_members(body), rng);
}

// Throws Error(AuthFailure) if the key is wrong or the ciphertext was
// modified, Error(MalformedMessage) if an authentic plaintext does not parse.
template <typename Body>
Body open(const SymKey& key, const Ciphertext& ct) {
  return codec::decode_members<Body>(sym_decrypt(key, ct));
}

Ciphertext seal_reports(const SymKey& key, std::span<const MedicalReport> reports, Rng& rng);
std::vector<MedicalReport> open_reports(const SymKey& key, const Ciphertext& ct, std::size_t expected_count);

// Throws Error(TimestampMismatch) when the timestamp inside a ciphertext
// differs from the one carried in clear next to it.
void check_inner_timestamp(Timestamp inner, Timestamp outer);
// Throws Error(DigestMismatch) naming the verifier.
void check_digest(const Digest& computed, const Digest& received, std::string_view name);

}  // namespace tmis
