#include "tmis/scheme.hpp"

#include "tmis/error.hpp"

namespace tmis {

using codec::put_all;

std::string_view to_string(ReportKeyVariant v) { return v == ReportKeyVariant::A ? "A" : "B"; }

ReportKeyVariant parse_variant(std::string_view s) {
  if (s == "A" || s == "a") return ReportKeyVariant::A;
  if (s == "B" || s == "b") return ReportKeyVariant::B;
  throw Error(ErrorCode::MalformedMessage, "variant must be A or B, got '" + std::string(s) + "'");
}

namespace {
template <typename... Ts>
Digest hash_of(std::string_view tag, const Ts&... parts) {
  FieldWriter w;
  put_all(w, parts...);
  return hash_fields(tag, w);
}
}  // namespace

namespace keys {

Digest hup_transport(const Identity& id_h, const Scalar& a, Timestamp t_h1) {
  return hash_of(domain::kKey, id_h, a, t_h1);
}

Digest hup_session(const Identity& id_h, const Digest& s1, const GroupPoint& abg, Timestamp t_c2) {
  return hash_of(domain::kKey, id_h, s1, abg, t_c2);
}

Digest inspection(const Identity& id_p, const Identity& id_h, const Nid& nid) {
  return hash_of(domain::kKey, id_p, id_h, nid);
}

Digest doctor_bound(const Identity& id_p, const Identity& id_d, const Scalar& sn) {
  return hash_of(domain::kKey, id_p, id_d, sn);
}

Digest report(ReportKeyVariant variant, const Identity& id_p, const Identity& id_h, const Nid& nid,
              const Identity& id_d, const Scalar& sn) {
  return variant == ReportKeyVariant::A ? inspection(id_p, id_h, nid) : doctor_bound(id_p, id_d, sn);
}

Digest pup_session(const Identity& id_p, const Identity& id_h, const Ciphertext& c_h, const Digest& s3,
                   const GroupPoint& cdg, Timestamp t_c5) {
  return hash_of(domain::kKey, id_p, id_h, c_h, s3, cdg, t_c5);
}

Digest tp_session(const Digest& s6, const Identity& id_p, const Identity& id_d, const Signature& sig_d,
                  const Signature& sig_p, const GroupPoint& rsg, Timestamp t_d3) {
  return hash_of(domain::kKey, s6, id_p, id_d, sig_d, sig_p, rsg, t_d3);
}

}  // namespace keys

namespace verifier {

Digest s1(const Identity& id_h, const Scalar& a, const Scalar& b, Timestamp t_h1) {
  return hash_of(domain::kVerifier, id_h, a, b, t_h1);
}

Digest s2(const Digest& sk_hc, const Ciphertext& c_h, const Signature& sig_h, Timestamp t_h3) {
  return hash_of(domain::kVerifier, sk_hc, c_h, sig_h, t_h3);
}

Digest s3(const Nid& nid, const Identity& id_p, const Ciphertext& c_h, const Signature& sig_h, const Scalar& c,
          Timestamp t_c5) {
  return hash_of(domain::kVerifier, nid, id_p, c_h, sig_h, c, t_c5);
}

Digest s4(const Digest& sk_pc, const Ciphertext& c_p, const Signature& sig_p, const Digest& s3,
          const GroupPoint& cdg, Timestamp t_p3) {
  return hash_of(domain::kVerifier, sk_pc, c_p, sig_p, s3, cdg, t_p3);
}

Digest s5(const Identity& id_p, const Identity& id_d, const Signature& sig_h, const Signature& sig_p,
          const Ciphertext& c_p, Timestamp t_c8) {
  return hash_of(domain::kVerifier, id_p, id_d, sig_h, sig_p, c_p, t_c8);
}

Digest s6(const Identity& id_p, const Identity& id_d, const Ciphertext& c_d, const Signature& sig_d,
          const Signature& sig_p, Timestamp t_d3) {
  return hash_of(domain::kVerifier, id_p, id_d, c_d, sig_d, sig_p, t_d3);
}

Digest s7(const Digest& sk_cp, const Identity& id_p, const Identity& id_d, const Ciphertext& c_d,
          const GroupPoint& xyg, const Signature& sig_p, Timestamp t_c11) {
  return hash_of(domain::kVerifier, sk_cp, id_p, id_d, c_d, xyg, sig_p, t_c11);
}

Digest s8(const Digest& sk_pc, const Digest& s7, const Ciphertext& c_e, const Signature& sig_p,
          const Signature& sig_d, const GroupPoint& xyg, Timestamp t_p6) {
  return hash_of(domain::kVerifier, sk_pc, s7, c_e, sig_p, sig_d, xyg, t_p6);
}

}  // namespace verifier

Digest patient_mask(const Nid& nid, const Identity& id_p) { return hash_of(domain::kMask, nid, id_p); }

Digest doctor_mask(const Identity& id_d, const Scalar& r) { return hash_of(domain::kMask, id_d, r); }

Digest report_digest(const MedicalReport& m) { return hash_of(domain::kReport, m); }

MedicalReport diagnose(const MedicalReport& m_h, const MedicalReport& m_b) {
  FieldWriter w;
  w.add(m_h.payload).add(m_b.payload);
  auto d = hash_fields(domain::kDiagnosis, w);
  return MedicalReport{ReportKind::Treatment, m_h.patient, Bytes(d.bytes.begin(), d.bytes.end())};
}

GroupPoint dh_point(const Scalar& mine, const Scalar& theirs) {
  return shared_point(mine, ec_mul(theirs, GroupPoint::generator()));
}

Ciphertext seal_reports(const SymKey& key, std::span<const MedicalReport> reports, Rng& rng) {
  FieldWriter w;
  for (const auto& m : reports) codec::put(w, m);
  return sym_encrypt(key, w.finish(), rng);
}

std::vector<MedicalReport> open_reports(const SymKey& key, const Ciphertext& ct, std::size_t expected_count) {
  auto plain = sym_decrypt(key, ct);
  FieldReader r(plain);
  r.expect_count(expected_count);
  std::vector<MedicalReport> out(expected_count);
  for (auto& m : out) codec::get(r, m);
  return out;
}

void check_inner_timestamp(Timestamp inner, Timestamp outer) {
  if (inner != outer) {
    throw Error(ErrorCode::TimestampMismatch,
                "sealed " + std::to_string(inner.millis) + " vs clear " + std::to_string(outer.millis));
  }
}

void check_digest(const Digest& computed, const Digest& received, std::string_view name) {
  if (computed != received) throw Error(ErrorCode::DigestMismatch, std::string(name) + "' != " + std::string(name));
}

}  // namespace tmis
