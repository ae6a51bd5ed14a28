#pragma once

// Session orchestration: builds the four actors from a ScenarioConfig,
// carries every message through serialize -> faults -> deserialize, owns the
// simulated clock and records what happened.
//
// Clock: a message is stamped with the current time, then the clock moves
// forward by tick (plus any injected delay) before the receiver reads it.
// The receiver answers at that same instant. Between phases the clock jumps
// by phase_gap, which is far larger than delta_t by default.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmis/actors.hpp"
#include "tmis/error.hpp"
#include "tmis/messages.hpp"

namespace tmis {

struct FaultInjection {
  enum class Action { Tamper, Delay, Replay };

  std::size_t target = 0;  // transmission index, 0..11
  Action action = Action::Tamper;
  std::size_t offset = 0;       // tamper: byte offset in the serialized message
  std::uint8_t mask = 0x01;     // tamper: xor mask, nonzero
  Duration delay{0};            // delay
  std::size_t original = 0;     // replay: index of the earlier transmission resent in this slot

  friend bool operator==(const FaultInjection&, const FaultInjection&) = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Duration delta_t{2000};
  Duration tick{10};
  Duration phase_gap{60000};
  std::uint64_t start_ms = 1'000'000;
  ReportKeyVariant variant = ReportKeyVariant::A;
  std::string id_patient = "patient-0001";
  std::string id_hospital = "hospital-01";
  std::string id_doctor = "doctor-07";
  std::optional<Bytes> nid;  // drawn by the hospital when absent
  Bytes m_h_payload = to_bytes("inspection: hb 13.5 g/dL, glucose 92 mg/dL");
  Bytes m_b_payload = to_bytes("sensor: hr 72 bpm, spo2 98%");
  std::vector<FaultInjection> faults;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Unknown keys and ill-typed values throw Error(MalformedMessage).
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
// Throws std::runtime_error if the file cannot be opened.
ScenarioConfig load_config(const std::filesystem::path& path);

struct AbortInfo {
  std::string phase;  // HUP, PUP, TP, CP
  std::string step;   // e.g. hup_c_store
  std::size_t index = 0;
  ErrorCode error = ErrorCode::MalformedMessage;
  std::string detail;
};

// Cloud database as the insider sees it.
struct CloudDb {
  ReportKeyVariant variant = ReportKeyVariant::A;
  std::map<Identity, CloudRecord> records;
  std::map<Identity, CloudSession> sessions;
  std::map<Identity, Identity> appointments;

  friend bool operator==(const CloudDb&, const CloudDb&) = default;
};

CloudDb snapshot(const Cloud& cloud, ReportKeyVariant variant);

struct SessionOutcome {
  ScenarioConfig config;
  Registry registry;
  Nid nid;
  Transcript transcript;         // as sent by the honest parties
  std::vector<Bytes> delivered;  // wire bytes after faults
  CloudDb cloud_db;
  std::vector<CloudDb> db_before;  // cloud state before each delivery
  HospitalSession hospital;
  PatientSession patient;
  DoctorSession doctor;
  std::map<std::string, std::vector<std::string>> checks;  // role -> passed checks
  std::vector<MedicalReport> originals;  // m_H, m_B and the expected m_D
  std::vector<MedicalReport> recovered;  // what the patient collected in CP
  std::optional<AbortInfo> abort;

  bool completed() const { return !abort; }
  // All session-key pairs that were established agree.
  bool keys_agree() const;
};

SessionOutcome run_full_session(const ScenarioConfig& cfg);

// Step that receives transmission i on the happy path, and its phase.
std::string_view receiving_step(std::size_t index);
std::string_view phase_of(std::size_t index);

struct CampaignStats {
  std::size_t sessions = 0;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  std::map<std::string, std::size_t> aborts_by_error;
  std::map<std::string, std::size_t> aborts_by_step;
  std::size_t keys_agreed = 0;
  std::size_t reports_recovered = 0;
  std::string transcript_digest;  // over every session's transcript file, in seed order

  friend bool operator==(const CampaignStats&, const CampaignStats&) = default;
};

nlohmann::json to_json(const CampaignStats& s);

// Seeds base.seed .. base.seed + n - 1. Sessions run on up to `threads`
// workers (0 = hardware concurrency); results fold in seed order.
CampaignStats run_campaign(const ScenarioConfig& base, std::size_t n, unsigned threads = 0);
// Same, also handing every outcome to `visit` in seed order.
CampaignStats run_campaign(const ScenarioConfig& base, std::size_t n, unsigned threads,
                           const std::function<void(const SessionOutcome&)>& visit);

// Transcript file: header line, one line per transmitted message, outcome line.
std::string transcript_text(const SessionOutcome& out);
// Cloud database file: header line, then record, session and appointment rows.
std::string db_text(const CloudDb& db);

struct TranscriptFile {
  nlohmann::json header;
  Registry registry;
  ReportKeyVariant variant = ReportKeyVariant::A;
  Duration delta_t{2000};
  Transcript messages;
  nlohmann::json outcome;  // null if the file has no outcome line
};

// Throw Error(MalformedMessage) on any structural problem.
TranscriptFile parse_transcript(std::string_view text);
CloudDb parse_db(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace tmis
