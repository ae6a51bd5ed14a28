#include "tmis/sim.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace tmis {

namespace {

using nlohmann::json;

std::uint64_t ms(Duration d) { return static_cast<std::uint64_t>(d.count()); }

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::MalformedMessage, "config: " + what); }

void only_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!j.is_object()) bad_config(std::string(where) + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      bad_config("unknown key '" + k + "' in " + where);
    }
  }
}

std::uint64_t get_uint(const json& j, const char* key, std::uint64_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_unsigned()) bad_config(std::string(key) + " must be a non-negative integer");
  return it->get<std::uint64_t>();
}

std::string get_string(const json& j, const char* key, std::string fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string() || it->get<std::string>().empty()) bad_config(std::string(key) + " must be a non-empty string");
  return it->get<std::string>();
}

Bytes get_hex(const json& j, const char* key, Bytes fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) bad_config(std::string(key) + " must be a hex string");
  return from_hex(it->get<std::string>());
}

std::string_view action_name(FaultInjection::Action a) {
  switch (a) {
    case FaultInjection::Action::Tamper: return "tamper";
    case FaultInjection::Action::Delay: return "delay";
    case FaultInjection::Action::Replay: return "replay";
  }
  return "?";
}

json fault_json(const FaultInjection& f) {
  json j{{"target", f.target}, {"action", action_name(f.action)}};
  switch (f.action) {
    case FaultInjection::Action::Tamper:
      j["offset"] = f.offset;
      j["mask"] = f.mask;
      break;
    case FaultInjection::Action::Delay: j["ms"] = ms(f.delay); break;
    case FaultInjection::Action::Replay: j["original"] = f.original; break;
  }
  return j;
}

FaultInjection fault_from_json(const json& j) {
  only_keys(j, {"target", "action", "offset", "mask", "ms", "original"}, "fault");
  FaultInjection f;
  f.target = get_uint(j, "target", 99);
  if (f.target >= 12) bad_config("fault target must be a transmission index 0..11");
  auto action = get_string(j, "action", "");
  if (action == "tamper") {
    f.action = FaultInjection::Action::Tamper;
    f.offset = get_uint(j, "offset", 0);
    auto mask = get_uint(j, "mask", 1);
    if (mask == 0 || mask > 0xff) bad_config("tamper mask must be 1..255");
    f.mask = static_cast<std::uint8_t>(mask);
  } else if (action == "delay") {
    f.action = FaultInjection::Action::Delay;
    f.delay = Duration(get_uint(j, "ms", 0));
  } else if (action == "replay") {
    f.action = FaultInjection::Action::Replay;
    f.original = get_uint(j, "original", 99);
    if (f.original >= f.target) bad_config("replay original must precede its target");
  } else {
    bad_config("fault action must be tamper, delay or replay");
  }
  return f;
}

constexpr std::array<std::string_view, 12> kReceivingSteps{
    "hup_c_challenge", "hup_h_upload",   "hup_c_store", "pup_c_respond", "pup_p_upload", "pup_c_store",
    "tp_c_respond",    "tp_d_prescribe", "tp_c_store",  "cp_c_respond",  "cp_p_collect", "cp_c_store"};

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  only_keys(j, {"seed", "delta_t_ms", "tick_ms", "phase_gap_ms", "start_ms", "variant", "ids", "nid", "payloads", "faults"},
            "config");
  ScenarioConfig c;
  c.seed = get_uint(j, "seed", c.seed);
  c.delta_t = Duration(get_uint(j, "delta_t_ms", c.delta_t.count()));
  c.tick = Duration(get_uint(j, "tick_ms", c.tick.count()));
  c.phase_gap = Duration(get_uint(j, "phase_gap_ms", c.phase_gap.count()));
  c.start_ms = get_uint(j, "start_ms", c.start_ms);
  if (j.contains("variant")) c.variant = parse_variant(get_string(j, "variant", "A"));
  if (auto it = j.find("ids"); it != j.end()) {
    only_keys(*it, {"patient", "hospital", "doctor"}, "ids");
    c.id_patient = get_string(*it, "patient", c.id_patient);
    c.id_hospital = get_string(*it, "hospital", c.id_hospital);
    c.id_doctor = get_string(*it, "doctor", c.id_doctor);
  }
  if (c.id_patient == c.id_hospital || c.id_patient == c.id_doctor || c.id_hospital == c.id_doctor) {
    bad_config("identities must be distinct");
  }
  if (auto it = j.find("nid"); it != j.end() && !it->is_null()) {
    c.nid = get_hex(j, "nid", {});
    if (c.nid->empty()) bad_config("nid must not be empty");
  }
  if (auto it = j.find("payloads"); it != j.end()) {
    only_keys(*it, {"m_h", "m_b"}, "payloads");
    c.m_h_payload = get_hex(*it, "m_h", c.m_h_payload);
    c.m_b_payload = get_hex(*it, "m_b", c.m_b_payload);
  }
  if (auto it = j.find("faults"); it != j.end()) {
    if (!it->is_array()) bad_config("faults must be a list");
    for (const auto& f : *it) c.faults.push_back(fault_from_json(f));
  }
  return c;
}

json to_json(const ScenarioConfig& c) {
  json faults = json::array();
  for (const auto& f : c.faults) faults.push_back(fault_json(f));
  return json{{"seed", c.seed},
              {"delta_t_ms", ms(c.delta_t)},
              {"tick_ms", ms(c.tick)},
              {"phase_gap_ms", ms(c.phase_gap)},
              {"start_ms", c.start_ms},
              {"variant", to_string(c.variant)},
              {"ids", {{"patient", c.id_patient}, {"hospital", c.id_hospital}, {"doctor", c.id_doctor}}},
              {"nid", c.nid ? json(to_hex(*c.nid)) : json(nullptr)},
              {"payloads", {{"m_h", to_hex(c.m_h_payload)}, {"m_b", to_hex(c.m_b_payload)}}},
              {"faults", faults}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  auto text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad_config(path.string() + " is not valid JSON");
  return config_from_json(j);
}

std::string_view receiving_step(std::size_t index) { return kReceivingSteps.at(index); }

std::string_view phase_of(std::size_t index) {
  static constexpr std::array<std::string_view, 4> kPhases{"HUP", "PUP", "TP", "CP"};
  return kPhases.at(std::min<std::size_t>(index / 3, 3));
}

CloudDb snapshot(const Cloud& cloud, ReportKeyVariant variant) {
  return CloudDb{variant, cloud.records(), cloud.sessions(), cloud.appointments()};
}

bool SessionOutcome::keys_agree() const {
  auto it = cloud_db.sessions.find(registry.id_p);
  if (it == cloud_db.sessions.end()) return false;
  const auto& c = it->second;
  return hospital.sk_hc && c.sk_ch && *hospital.sk_hc == *c.sk_ch && patient.sk_pc && c.sk_cp &&
         *patient.sk_pc == *c.sk_cp && doctor.sk_dc && c.sk_cd && *doctor.sk_dc == *c.sk_cd;
}

SessionOutcome run_full_session(const ScenarioConfig& cfg) {
  SessionOutcome out;
  out.config = cfg;

  Rng key_rng(cfg.seed, 0);
  auto kh = KeyPair::generate(key_rng);
  auto kp = KeyPair::generate(key_rng);
  auto kd = KeyPair::generate(key_rng);
  out.registry = Registry{Identity::from_string(cfg.id_hospital), Identity::from_string(cfg.id_patient),
                          Identity::from_string(cfg.id_doctor), kh.public_key, kp.public_key, kd.public_key};
  const auto& reg = out.registry;
  ActorConfig acfg{cfg.delta_t, cfg.variant};

  MedicalReport m_h{ReportKind::Inspection, reg.id_p, cfg.m_h_payload};
  MedicalReport m_b{ReportKind::Sensor, reg.id_p, cfg.m_b_payload};
  out.originals = {m_h, m_b, diagnose(m_h, m_b)};

  Hospital hospital(reg.id_h, kh, acfg, Rng(cfg.seed, 1));
  Cloud cloud(acfg, Rng(cfg.seed, 2));
  std::optional<Nid> fixed_nid;
  if (cfg.nid) fixed_nid = Nid::from_bytes(*cfg.nid);
  out.nid = hospital.register_patient(reg.id_p, m_h, fixed_nid);
  Patient patient(reg.id_p, out.nid, kp, reg, acfg, Rng(cfg.seed, 3));
  Doctor doctor(reg.id_d, kd, reg, acfg, Rng(cfg.seed, 4));
  cloud.appoint(reg.id_p, reg.id_d);

  Timestamp now{cfg.start_ms};

  auto fail = [&](std::size_t index, std::string_view step, const Error& e) {
    out.abort = AbortInfo{std::string(phase_of(index)), std::string(step), index, e.code(), e.detail()};
    hospital.discard();
    cloud.discard();
    patient.discard();
    doctor.discard();
  };

  using Handler = std::function<void(const ChannelMessage&, Payload&)>;

  // One transmission: stamp, fault, advance the clock, parse, check, hand over.
  auto deliver = [&](Payload& next, const Handler& handler) {
    auto i = out.transcript.size();
    auto sent = ChannelMessage::make(next);
    out.transcript.push_back(sent);
    auto bytes = serialize(sent);
    Duration extra{0};
    for (const auto& f : cfg.faults) {
      if (f.target != i) continue;
      switch (f.action) {
        case FaultInjection::Action::Tamper:
          if (f.offset < bytes.size()) bytes[f.offset] ^= f.mask;
          break;
        case FaultInjection::Action::Delay: extra += f.delay; break;
        case FaultInjection::Action::Replay: bytes = serialize(out.transcript.at(f.original)); break;
      }
    }
    out.delivered.push_back(bytes);
    out.db_before.push_back(snapshot(cloud, cfg.variant));
    now.millis += static_cast<std::uint64_t>((cfg.tick + extra).count());
    try {
      auto received = deserialize(bytes);
      check_freshness(now, received.sent_at(), cfg.delta_t);
      if (received.type() != sent.type()) {
        throw Error(ErrorCode::UnexpectedMessage, "expected " + std::string(to_string(sent.type())) + ", got " +
                                                      std::string(to_string(received.type())));
      }
      handler(received, next);
    } catch (const Error& e) {
      fail(i, receiving_step(i), e);
      return false;
    }
    return true;
  };

  auto phase = [&](std::string_view init_step, const std::function<Payload()>& init,
                   std::array<Handler, 3> hops) {
    Payload next;
    try {
      next = init();
    } catch (const Error& e) {
      fail(out.transcript.size(), init_step, e);
      return false;
    }
    for (const auto& h : hops) {
      if (!deliver(next, h)) return false;
    }
    return true;
  };

  auto gap = [&] { now.millis += static_cast<std::uint64_t>(cfg.phase_gap.count()); };

  bool ok = phase("hup_h_init", [&] { return Payload{hospital.hup_init(now)}; },
                  {[&](const ChannelMessage& m, Payload& n) { n = cloud.hup_challenge(m.as<HupMsg1>(), now); },
                   [&](const ChannelMessage& m, Payload& n) { n = hospital.hup_upload(m.as<HupMsg2>(), now); },
                   [&](const ChannelMessage& m, Payload&) { cloud.hup_store(m.as<HupMsg3>(), now); }});
  if (ok) {
    gap();
    ok = phase("pup_p_request", [&] { return Payload{patient.pup_request(m_b, now)}; },
               {[&](const ChannelMessage& m, Payload& n) { n = cloud.pup_respond(m.as<PupMsg1>(), now); },
                [&](const ChannelMessage& m, Payload& n) { n = patient.pup_upload(m.as<PupMsg2>(), now); },
                [&](const ChannelMessage& m, Payload&) { cloud.pup_store(m.as<PupMsg3>(), now); }});
  }
  if (ok) {
    gap();
    ok = phase("tp_d_request", [&] { return Payload{doctor.tp_request(now)}; },
               {[&](const ChannelMessage& m, Payload& n) { n = cloud.tp_respond(m.as<TpMsg1>(), now); },
                [&](const ChannelMessage& m, Payload& n) { n = doctor.tp_prescribe(m.as<TpMsg2>(), now); },
                [&](const ChannelMessage& m, Payload&) { cloud.tp_store(m.as<TpMsg3>(), now); }});
  }
  if (ok) {
    gap();
    ok = phase("cp_p_request", [&] { return Payload{patient.cp_request(now)}; },
               {[&](const ChannelMessage& m, Payload& n) { n = cloud.cp_respond(m.as<CpMsg1>(), now); },
                [&](const ChannelMessage& m, Payload& n) {
                  auto got = patient.cp_collect(m.as<CpMsg2>(), now);
                  out.recovered = std::move(got.reports);
                  n = std::move(got.msg);
                },
                [&](const ChannelMessage& m, Payload&) { cloud.cp_store(m.as<CpMsg3>(), now); }});
  }
  if (!ok) out.recovered.clear();

  out.cloud_db = snapshot(cloud, cfg.variant);
  out.hospital = hospital.session();
  out.patient = patient.session();
  out.doctor = doctor.session();
  out.checks = {{"hospital", hospital.checks()},
                {"cloud", cloud.checks()},
                {"patient", patient.checks()},
                {"doctor", doctor.checks()}};
  return out;
}

// ------------------------------------------------------------- campaign

json to_json(const CampaignStats& s) {
  return json{{"sessions", s.sessions},
              {"completed", s.completed},
              {"aborted", s.aborted},
              {"aborts_by_error", s.aborts_by_error},
              {"aborts_by_step", s.aborts_by_step},
              {"keys_agreed", s.keys_agreed},
              {"reports_recovered", s.reports_recovered},
              {"transcript_digest", s.transcript_digest}};
}

CampaignStats run_campaign(const ScenarioConfig& base, std::size_t n, unsigned threads) {
  return run_campaign(base, n, threads, [](const SessionOutcome&) {});
}

CampaignStats run_campaign(const ScenarioConfig& base, std::size_t n, unsigned threads,
                           const std::function<void(const SessionOutcome&)>& visit) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  CampaignStats stats;
  Bytes digests;
  constexpr std::size_t kChunk = 64;

  for (std::size_t lo = 0; lo < n; lo += kChunk) {
    std::size_t hi = std::min(n, lo + kChunk);
    std::vector<SessionOutcome> batch(hi - lo);
    std::atomic<std::size_t> cursor{lo};
    auto work = [&] {
      for (std::size_t i; (i = cursor++) < hi;) {
        auto cfg = base;
        cfg.seed = base.seed + i;
        batch[i - lo] = run_full_session(cfg);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, hi - lo); ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (const auto& out : batch) {
      ++stats.sessions;
      if (out.completed()) {
        ++stats.completed;
      } else {
        ++stats.aborted;
        ++stats.aborts_by_error[std::string(to_string(out.abort->error))];
        ++stats.aborts_by_step[out.abort->step];
      }
      if (out.keys_agree()) ++stats.keys_agreed;
      if (out.completed() && out.recovered == out.originals) ++stats.reports_recovered;
      auto d = sha256(to_bytes(transcript_text(out)));
      append(digests, view(d.bytes));
      visit(out);
    }
  }
  stats.transcript_digest = to_hex(view(sha256(digests).bytes));
  return stats;
}

// ------------------------------------------------------------ file formats

namespace {

std::string hex_id(const Identity& id) { return to_hex(id.bytes()); }
std::string hex_point(const GroupPoint& p) { return to_hex(view(p.bytes())); }

const json& member(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::MalformedMessage, std::string("missing '") + key + "'");
  return *it;
}

std::string str_member(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_string()) throw Error(ErrorCode::MalformedMessage, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t uint_member(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_number_unsigned()) throw Error(ErrorCode::MalformedMessage, std::string("'") + key + "' must be an integer");
  return v.get<std::uint64_t>();
}

Identity id_member(const json& j, const char* key) { return Identity::from_bytes(from_hex(str_member(j, key))); }
GroupPoint point_member(const json& j, const char* key) { return GroupPoint::from_bytes(from_hex(str_member(j, key))); }

std::vector<json> json_lines(std::string_view text) {
  std::vector<json> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::MalformedMessage, "line " + std::to_string(line_no) + " is not a JSON object");
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

std::string transcript_text(const SessionOutcome& out) {
  const auto& r = out.registry;
  const auto& c = out.config;
  std::string text;
  auto line = [&](const json& j) {
    text += j.dump();
    text += '\n';
  };
  line(json{{"kind", "header"},
            {"format", "tmis-transcript"},
            {"version", 1},
            {"seed", c.seed},
            {"variant", to_string(c.variant)},
            {"delta_t_ms", ms(c.delta_t)},
            {"tick_ms", ms(c.tick)},
            {"phase_gap_ms", ms(c.phase_gap)},
            {"ids", {{"patient", hex_id(r.id_p)}, {"hospital", hex_id(r.id_h)}, {"doctor", hex_id(r.id_d)}}},
            {"public_keys",
             {{"patient", hex_point(r.pk_p)}, {"hospital", hex_point(r.pk_h)}, {"doctor", hex_point(r.pk_d)}}}});
  for (std::size_t i = 0; i < out.transcript.size(); ++i) {
    line(to_record(out.transcript[i], i));
    for (const auto& f : c.faults) {
      if (f.target != i) continue;
      auto j = fault_json(f);
      j["kind"] = "fault";
      j["delivered"] = to_hex(out.delivered.at(i));
      line(j);
    }
  }
  json abort = nullptr;
  if (out.abort) {
    abort = json{{"phase", out.abort->phase},
                 {"step", out.abort->step},
                 {"index", out.abort->index},
                 {"error", to_string(out.abort->error)},
                 {"detail", out.abort->detail}};
  }
  line(json{{"kind", "outcome"},
            {"status", out.completed() ? "completed" : "aborted"},
            {"abort", abort},
            {"checks", out.checks}});
  return text;
}

TranscriptFile parse_transcript(std::string_view text) {
  auto lines = json_lines(text);
  if (lines.empty()) throw Error(ErrorCode::MalformedMessage, "empty transcript");
  TranscriptFile t;
  t.header = lines.front();
  if (str_member(t.header, "kind") != "header" || str_member(t.header, "format") != "tmis-transcript") {
    throw Error(ErrorCode::MalformedMessage, "first line is not a transcript header");
  }
  t.variant = parse_variant(str_member(t.header, "variant"));
  t.delta_t = Duration(uint_member(t.header, "delta_t_ms"));
  const auto& ids = member(t.header, "ids");
  const auto& pks = member(t.header, "public_keys");
  t.registry = Registry{id_member(ids, "hospital"),    id_member(ids, "patient"),     id_member(ids, "doctor"),
                        point_member(pks, "hospital"), point_member(pks, "patient"), point_member(pks, "doctor")};
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& j = lines[k];
    auto kind = str_member(j, "kind");
    if (kind == "message") {
      if (!t.outcome.is_null()) throw Error(ErrorCode::MalformedMessage, "message after outcome");
      if (uint_member(j, "index") != t.messages.size()) throw Error(ErrorCode::MalformedMessage, "message index gap");
      t.messages.push_back(from_record(j));
    } else if (kind == "outcome") {
      if (!t.outcome.is_null()) throw Error(ErrorCode::MalformedMessage, "second outcome line");
      t.outcome = j;
    } else if (kind != "fault") {
      throw Error(ErrorCode::MalformedMessage, "unknown record kind '" + kind + "'");
    }
  }
  return t;
}

std::string db_text(const CloudDb& db) {
  std::string text;
  auto line = [&](const json& j) {
    text += j.dump();
    text += '\n';
  };
  line(json{{"kind", "header"}, {"format", "tmis-cloud-db"}, {"version", 1}, {"variant", to_string(db.variant)}});
  for (const auto& [_, rec] : db.records) {
    auto j = to_json(rec);
    j["kind"] = "record";
    line(j);
  }
  for (const auto& [id_p, s] : db.sessions) {
    auto j = to_json(s);
    j["kind"] = "session";
    j["id_p"] = hex_id(id_p);
    line(j);
  }
  for (const auto& [id_p, id_d] : db.appointments) {
    line(json{{"kind", "appointment"}, {"id_p", hex_id(id_p)}, {"id_d", hex_id(id_d)}});
  }
  return text;
}

CloudDb parse_db(std::string_view text) {
  auto lines = json_lines(text);
  if (lines.empty()) throw Error(ErrorCode::MalformedMessage, "empty database file");
  const auto& h = lines.front();
  if (str_member(h, "kind") != "header" || str_member(h, "format") != "tmis-cloud-db") {
    throw Error(ErrorCode::MalformedMessage, "first line is not a database header");
  }
  CloudDb db;
  db.variant = parse_variant(str_member(h, "variant"));
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto j = lines[k];
    auto kind = str_member(j, "kind");
    j.erase("kind");
    if (kind == "record") {
      auto rec = record_from_json(j);
      auto id = rec.id_p;
      db.records[id] = std::move(rec);
    } else if (kind == "session") {
      auto id = id_member(j, "id_p");
      j.erase("id_p");
      db.sessions[id] = session_from_json(j);
    } else if (kind == "appointment") {
      db.appointments[id_member(j, "id_p")] = id_member(j, "id_d");
    } else {
      throw Error(ErrorCode::MalformedMessage, "unknown row kind '" + kind + "'");
    }
  }
  return db;
}

}  // namespace tmis
