#pragma once

// Cloud insider and passive eavesdropper.
//
// The insider reads the cloud database (records, per-patient session values,
// appointments) and the public channel. It never sees a private key of H, P
// or D. The passive eavesdropper sees only public-channel messages.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmis/sim.hpp"

namespace tmis {

enum class Verdict { Holds, Violated };
std::string_view to_string(Verdict v);

struct InsiderView {
  ReportKeyVariant variant = ReportKeyVariant::A;
  std::map<Identity, CloudRecord> records;
  std::map<Identity, CloudSession> sessions;
  std::map<Identity, Identity> appointments;
  Transcript public_messages;
};

struct PassiveView {
  Transcript public_messages;
};

InsiderView insider_view(const CloudDb& db, const Transcript& transcript);
PassiveView passive_view(const Transcript& transcript);

// One successful opening: which key, which ciphertext, what came out.
struct Reveal {
  std::string key_name;
  SymKey key;
  std::string ciphertext;
  std::vector<MedicalReport> reports;
};

// Each throws Error(AttackFailed); the detail starts with "precondition"
// when the record has not reached the needed stage.
Reveal insider_reveal_inspection(const InsiderView& view, const Identity& id_p);
Reveal insider_reveal_patient_bundle(const InsiderView& view, const Identity& id_p);
Reveal insider_reveal_treatment_bundle(const InsiderView& view, const Identity& id_p);

struct AttackAttempt {
  std::string name;  // inspection, patient_bundle, treatment_bundle
  std::string patient;
  bool applicable = false;
  bool success = false;
  std::string detail;
};

struct Opening {
  std::string ciphertext;
  std::string key_name;
  Bytes plaintext;
};

struct AttackReport {
  std::string mode;  // insider | passive
  std::vector<std::pair<std::string, SymKey>> derived_keys;
  std::vector<Opening> opened;
  std::vector<AttackAttempt> attacks;
  Verdict confidentiality = Verdict::Holds;
  std::size_t decrypt_attempts = 0;

  std::size_t applicable() const;
  std::size_t succeeded() const;
};

// All three reveals against every record in the view.
AttackReport insider_attack(const InsiderView& view);
// Constructive: VIOLATED iff some insider reveal succeeds.
Verdict check_report_confidentiality(const SessionOutcome& out);

// Tries every key it can build from public traffic, and from whatever the
// openings yield, until nothing new opens. leaked_sn is the control input.
AttackReport passive_eavesdrop_attempt(const PassiveView& view, const std::optional<Scalar>& leaked_sn = {});

// Indices of public-channel messages whose wire bytes contain id_p.
std::vector<std::size_t> scan_anonymity(const Transcript& transcript, const Identity& id_p);

nlohmann::json to_json(const AttackReport& r);
std::string summary(const AttackReport& r);

}  // namespace tmis
