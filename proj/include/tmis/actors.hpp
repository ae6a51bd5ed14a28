#pragma once

// Role state machines: hospital (H), cloud (C), patient (P), doctor (D).
//
// Every step either returns the next message or throws tmis::Error. Steps
// compute on locals and commit only at the very end, so a throwing step
// leaves the actor exactly as it was. discard() drops the in-flight
// session context; the simulator calls it on every actor after an abort.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmis/messages.hpp"
#include "tmis/primitives.hpp"
#include "tmis/scheme.hpp"

namespace tmis {

// Out-of-band directory: identities and long-term public keys.
struct Registry {
  Identity id_h;
  Identity id_p;
  Identity id_d;
  GroupPoint pk_h;
  GroupPoint pk_p;
  GroupPoint pk_d;
};

struct ActorConfig {
  Duration delta_t{2000};
  ReportKeyVariant variant = ReportKeyVariant::A;
};

struct CloudRecord {
  Nid nid;
  Identity id_p;
  Scalar sn_x;
  Signature sig_h;
  Ciphertext c_h;
  std::optional<Signature> sig_p;
  std::optional<Ciphertext> c_p;
  std::optional<Signature> sig_d;
  std::optional<Ciphertext> c_d;
  std::optional<Ciphertext> c_e;

  friend bool operator==(const CloudRecord&, const CloudRecord&) = default;
};

// Everything the cloud learns or derives while serving one patient.
struct CloudSession {
  Identity id_h;
  Scalar a, b;
  Timestamp t_h1, t_c2;
  Digest s1;
  std::optional<Digest> sk_ch;

  Scalar c;
  Timestamp t_c5;
  Digest s3;
  std::optional<Digest> sk_cp;

  Identity id_d;
  Scalar r, s;
  Timestamp t_c8;
  Digest s6;
  std::optional<Digest> sk_cd;

  Scalar x, y;
  Timestamp t_c11;
  Digest s7;

  friend bool operator==(const CloudSession&, const CloudSession&) = default;
};

nlohmann::json to_json(const CloudRecord& r);
CloudRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CloudSession& s);
CloudSession session_from_json(const nlohmann::json& j);

struct HospitalSession {
  Identity id_p;
  Nid nid;
  Scalar a, b;
  Timestamp t_h1, t_c2, t_h3;
  Digest s1;
  std::optional<Digest> sk_hc;
  Ciphertext c_h;
  Signature sig_h;
};

class Hospital {
 public:
  Hospital(Identity id, KeyPair keys, ActorConfig cfg, Rng rng);

  // Assigns NID (drawn when not given) and takes custody of m_H.
  Nid register_patient(const Identity& id_p, MedicalReport m_h, std::optional<Nid> nid = std::nullopt);

  HupMsg1 hup_init(Timestamp now);
  HupMsg3 hup_upload(const HupMsg2& msg, Timestamp now);

  void discard();

  const Identity& id() const { return id_; }
  const GroupPoint& public_key() const { return keys_.public_key; }
  const HospitalSession& session() const { return session_; }
  const std::vector<std::string>& checks() const { return checks_; }

 private:
  Identity id_;
  KeyPair keys_;
  ActorConfig cfg_;
  Rng rng_;
  std::optional<MedicalReport> m_h_;
  HospitalSession session_;
  bool awaiting_ = false;
  std::vector<std::string> checks_;
};

class Cloud {
 public:
  Cloud(ActorConfig cfg, Rng rng);

  // Pre-assigned doctor for a patient (scenario configuration).
  void appoint(const Identity& id_p, const Identity& id_d);

  HupMsg2 hup_challenge(const HupMsg1& msg, Timestamp now);
  const CloudRecord& hup_store(const HupMsg3& msg, Timestamp now);
  PupMsg2 pup_respond(const PupMsg1& msg, Timestamp now);
  const CloudRecord& pup_store(const PupMsg3& msg, Timestamp now);
  TpMsg2 tp_respond(const TpMsg1& msg, Timestamp now);
  const CloudRecord& tp_store(const TpMsg3& msg, Timestamp now);
  CpMsg2 cp_respond(const CpMsg1& msg, Timestamp now);
  const CloudRecord& cp_store(const CpMsg3& msg, Timestamp now);

  void discard();

  const std::map<Identity, CloudRecord>& records() const { return records_; }
  const std::map<Identity, CloudSession>& sessions() const { return sessions_; }
  const std::map<Identity, Identity>& appointments() const { return appointments_; }
  const std::vector<std::string>& checks() const { return checks_; }

  // Test hook: direct database write, as an operator with disk access could.
  CloudRecord& mutable_record(const Identity& id_p) { return records_.at(id_p); }

 private:
  enum class Stage { None, HupStore, PupStore, TpStore, CpStore };
  struct Pending {
    Stage stage = Stage::None;
    Identity id_p;
    CloudSession session;
  };

  const Pending& expect(Stage stage) const;
  const CloudRecord& record_for(const Identity& id_p, const Nid& nid) const;

  ActorConfig cfg_;
  Rng rng_;
  std::map<Identity, CloudRecord> records_;
  std::map<Identity, CloudSession> sessions_;
  std::map<Identity, Identity> appointments_;
  Pending pending_;
  std::vector<std::string> checks_;
};

struct PatientSession {
  Timestamp t_p1;
  Scalar sn;  // Y, recovered from I
  Scalar c, d;
  Timestamp t_c5, t_p3;
  Digest s3;
  Identity id_h;
  std::optional<Digest> sk_pc;
  Signature sig_h, sig_p;
  Ciphertext c_h, c_p;
  MedicalReport m_h, m_b;

  Scalar x, y;
  Timestamp t_p4, t_c11, t_p6;
  Identity id_d;
  Digest s7;
  Signature sig_d;
  Ciphertext c_e;
};

struct Collected {
  CpMsg3 msg;
  std::vector<MedicalReport> reports;  // m_H, m_B, m_D
};

class Patient {
 public:
  Patient(Identity id, Nid nid, KeyPair keys, Registry registry, ActorConfig cfg, Rng rng);

  PupMsg1 pup_request(MedicalReport m_b, Timestamp now);
  PupMsg3 pup_upload(const PupMsg2& msg, Timestamp now);
  CpMsg1 cp_request(Timestamp now);
  Collected cp_collect(const CpMsg2& msg, Timestamp now);

  void discard();

  const Identity& id() const { return id_; }
  const Nid& nid() const { return nid_; }
  const GroupPoint& public_key() const { return keys_.public_key; }
  const PatientSession& session() const { return session_; }
  const std::vector<std::string>& checks() const { return checks_; }

 private:
  enum class Stage { None, PupUpload, PupDone, CpCollect };

  Identity id_;
  Nid nid_;
  KeyPair keys_;
  Registry registry_;
  ActorConfig cfg_;
  Rng rng_;
  Stage stage_ = Stage::None;
  PatientSession session_;
  std::vector<std::string> checks_;
};

struct DoctorSession {
  Scalar r, s;
  Scalar sn;  // Z, recovered from J
  Timestamp t_d1, t_c8, t_d3;
  Identity id_p;
  Nid nid;
  Digest s6;
  std::optional<Digest> sk_dc;
  Signature sig_d;
  Ciphertext c_d;
  MedicalReport m_d;
};

class Doctor {
 public:
  Doctor(Identity id, KeyPair keys, Registry registry, ActorConfig cfg, Rng rng);

  TpMsg1 tp_request(Timestamp now);
  TpMsg3 tp_prescribe(const TpMsg2& msg, Timestamp now);

  void discard();

  const Identity& id() const { return id_; }
  const GroupPoint& public_key() const { return keys_.public_key; }
  const DoctorSession& session() const { return session_; }
  const std::vector<std::string>& checks() const { return checks_; }

 private:
  Identity id_;
  KeyPair keys_;
  Registry registry_;
  ActorConfig cfg_;
  Rng rng_;
  bool awaiting_ = false;
  DoctorSession session_;
  std::vector<std::string> checks_;
};

}  // namespace tmis
