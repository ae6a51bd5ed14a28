#include "tmis/adversary.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tmis {

std::string_view to_string(Verdict v) { return v == Verdict::Violated ? "VIOLATED" : "HOLDS"; }

InsiderView insider_view(const CloudDb& db, const Transcript& transcript) {
  InsiderView v;
  v.variant = db.variant;
  v.records = db.records;
  v.sessions = db.sessions;
  v.appointments = db.appointments;
  v.public_messages = passive_view(transcript).public_messages;
  return v;
}

PassiveView passive_view(const Transcript& transcript) {
  PassiveView v;
  for (const auto& m : transcript) {
    if (m.channel == Channel::Public) v.public_messages.push_back(m);
  }
  return v;
}

namespace {

[[noreturn]] void precondition(const std::string& what) { throw Error(ErrorCode::AttackFailed, "precondition: " + what); }

std::string label(const Identity& id) {
  return std::string(id.bytes().begin(), id.bytes().end());
}

const CloudRecord& record_of(const InsiderView& view, const Identity& id_p) {
  auto it = view.records.find(id_p);
  if (it == view.records.end()) precondition("no record for " + label(id_p));
  return it->second;
}

// ID_H is what C received in HupMsg1 for this patient's upload.
const Identity& hospital_of(const InsiderView& view, const Identity& id_p) {
  auto it = view.sessions.find(id_p);
  if (it == view.sessions.end() || it->second.id_h.empty()) precondition("no hospital identity on file");
  return it->second.id_h;
}

const Identity& doctor_of(const InsiderView& view, const Identity& id_p) {
  auto it = view.appointments.find(id_p);
  if (it == view.appointments.end()) precondition("no appointed doctor on file");
  return it->second;
}

Reveal open_with(const std::string& key_name, const SymKey& key, const std::string& ct_name, const Ciphertext& ct,
                 std::size_t count) {
  try {
    return Reveal{key_name, key, ct_name, open_reports(key, ct, count)};
  } catch (const Error& e) {
    throw Error(ErrorCode::AttackFailed, "opening " + ct_name + " failed: " + e.what());
  }
}

Reveal open_bundle(const InsiderView& view, const Identity& id_p, const std::string& ct_name, const Ciphertext& ct,
                   std::size_t count) {
  const auto& rec = record_of(view, id_p);
  if (view.variant == ReportKeyVariant::A) {
    auto k = keys::inspection(rec.id_p, hospital_of(view, id_p), rec.nid);
    return open_with("h(ID_P|ID_H|NID)", derive_key(k), ct_name, ct, count);
  }
  auto k = keys::doctor_bound(rec.id_p, doctor_of(view, id_p), rec.sn_x);
  return open_with("h(ID_P|ID_D|sn_x)", derive_key(k), ct_name, ct, count);
}

}  // namespace

Reveal insider_reveal_inspection(const InsiderView& view, const Identity& id_p) {
  const auto& rec = record_of(view, id_p);
  auto k = keys::inspection(rec.id_p, hospital_of(view, id_p), rec.nid);
  return open_with("h(ID_P|ID_H|NID)", derive_key(k), "C_H", rec.c_h, 1);
}

Reveal insider_reveal_patient_bundle(const InsiderView& view, const Identity& id_p) {
  const auto& rec = record_of(view, id_p);
  if (!rec.c_p) precondition("record has no C_P");
  return open_bundle(view, id_p, "C_P", *rec.c_p, 2);
}

Reveal insider_reveal_treatment_bundle(const InsiderView& view, const Identity& id_p) {
  const auto& rec = record_of(view, id_p);
  if (!rec.c_d) precondition("record has no C_D");
  return open_bundle(view, id_p, "C_D", *rec.c_d, 3);
}

std::size_t AttackReport::applicable() const {
  return std::count_if(attacks.begin(), attacks.end(), [](const auto& a) { return a.applicable; });
}

std::size_t AttackReport::succeeded() const {
  return std::count_if(attacks.begin(), attacks.end(), [](const auto& a) { return a.success; });
}

namespace {

Bytes bundle_bytes(const std::vector<MedicalReport>& reports) {
  FieldWriter w;
  for (const auto& m : reports) w.add(m.encode());
  return w.finish();
}

void add_key(AttackReport& r, const std::string& name, const SymKey& key) {
  for (const auto& [n, k] : r.derived_keys) {
    if (k == key) return;
  }
  r.derived_keys.emplace_back(name, key);
}

}  // namespace

AttackReport insider_attack(const InsiderView& view) {
  using Fn = Reveal (*)(const InsiderView&, const Identity&);
  const std::pair<const char*, Fn> steps[] = {{"inspection", insider_reveal_inspection},
                                              {"patient_bundle", insider_reveal_patient_bundle},
                                              {"treatment_bundle", insider_reveal_treatment_bundle}};
  AttackReport r;
  r.mode = "insider";
  // every patient the cloud has heard of, stored record or not
  std::set<Identity> patients;
  for (const auto& [id_p, rec] : view.records) patients.insert(id_p);
  for (const auto& [id_p, s] : view.sessions) patients.insert(id_p);
  for (const auto& [id_p, d] : view.appointments) patients.insert(id_p);
  for (const auto& id_p : patients) {
    for (const auto& [name, fn] : steps) {
      AttackAttempt a;
      a.name = name;
      a.patient = label(id_p);
      try {
        auto rv = fn(view, id_p);
        ++r.decrypt_attempts;
        a.applicable = a.success = true;
        a.detail = "opened " + rv.ciphertext + " with " + rv.key_name;
        add_key(r, rv.key_name, rv.key);
        r.opened.push_back({rv.ciphertext, rv.key_name, bundle_bytes(rv.reports)});
      } catch (const Error& e) {
        a.applicable = !e.detail().starts_with("precondition");
        if (a.applicable) ++r.decrypt_attempts;
        a.detail = e.detail();
      }
      r.attacks.push_back(a);
    }
  }
  r.confidentiality = r.succeeded() > 0 ? Verdict::Violated : Verdict::Holds;
  return r;
}

Verdict check_report_confidentiality(const SessionOutcome& out) {
  return insider_attack(insider_view(out.cloud_db, out.transcript)).confidentiality;
}

namespace {

// What the eavesdropper has collected so far.
class Knowledge {
 public:
  template <typename T>
  struct Item {
    T value;
    std::string label;
  };

  explicit Knowledge(AttackReport& r) : report_(r) {}

  void scalar(const Scalar& s, const std::string& l) { add(scalars_, s, l); }
  void id(const Identity& v, const std::string& l) { add(ids_, v, l); }
  void nid(const Nid& v, const std::string& l) { add(nids_, v, l); }
  void ciphertext(const Ciphertext& c, const std::string& l) { add(cts_, c, l); }
  // Also tried as-is, in case the mask is a no-op.
  void masked(const Scalar& s, const std::string& l) {
    add(masked_, s, l);
    scalar(s, l);
  }

  // Runs to a fixpoint. Returns when a full pass opens nothing new.
  void saturate() {
    for (bool progress = true; progress;) {
      progress = false;
      derive();
      for (std::size_t c = 0; c < cts_.size(); ++c) {
        if (opened_.count(c)) continue;
        for (std::size_t k = 0; k < keys_.size(); ++k) {
          if (!tried_.insert({c, k}).second) continue;
          ++report_.decrypt_attempts;
          Bytes plain;
          try {
            plain = sym_decrypt(keys_[k].value, cts_[c].value);
          } catch (const Error&) {
            continue;
          }
          opened_.insert(c);
          add_key(report_, keys_[k].label, keys_[k].value);
          report_.opened.push_back({cts_[c].label, keys_[k].label, plain});
          harvest(cts_[c].label, plain);
          progress = true;
          break;
        }
      }
    }
  }

  void t_c5(Timestamp t) { t_c5_ = t; }

 private:
  template <typename T>
  static bool add(std::vector<Item<T>>& v, const T& x, const std::string& l) {
    for (const auto& it : v) {
      if (it.value == x) return false;
    }
    v.push_back({x, l});
    return true;
  }

  void key(const SymKey& k, const std::string& l) { add(keys_, k, l); }

  void derive() {
    for (const auto& m : masked_) {
      for (const auto& n : nids_) {
        for (const auto& p : ids_) {
          scalar(unmask_serial(m.value, patient_mask(n.value, p.value)), "unmask(" + m.label + ")");
        }
      }
    }
    for (const auto& s : scalars_) key(derive_key(s.value), "key(" + s.label + ")");
    for (const auto& p : ids_) {
      for (const auto& h : ids_) {
        if (p.value == h.value) continue;
        for (const auto& n : nids_) {
          key(derive_key(keys::inspection(p.value, h.value, n.value)), "h(" + p.label + "|" + h.label + "|" + n.label + ")");
        }
        for (const auto& s : scalars_) {
          key(derive_key(keys::doctor_bound(p.value, h.value, s.value)), "h(" + p.label + "|" + h.label + "|" + s.label + ")");
        }
      }
    }
    // SK_PC needs d from E4 and c, ID_H, C_H, S3 from E3
    if (pup_ && t_c5_) {
      for (const auto& d : d_) {
        for (const auto& p : ids_) {
          auto cdg = dh_point(d.value, pup_->c);
          auto sk = keys::pup_session(p.value, pup_->id_h, pup_->c_h, pup_->s3, cdg, *t_c5_);
          key(derive_key(sk), "SK_PC(" + p.label + ")");
        }
      }
    }
  }

  void reports(const std::string& from, ByteView plain) {
    FieldReader rd(plain);
    while (!rd.done()) id(MedicalReport::decode(rd.next()).patient, "patient(" + from + ")");
  }

  void harvest(const std::string& name, ByteView plain) {
    try {
      if (name == "E1") {
        auto b = codec::decode_members<HupChallengeBody>(plain);
        scalar(b.b, "b");
      } else if (name == "E2") {
        auto b = codec::decode_members<HupUploadBody>(plain);
        id(b.id_p, "ID_P");
        nid(b.nid, "NID");
        ciphertext(b.c_h, "C_H");
      } else if (name == "E3") {
        auto b = codec::decode_members<PupChallengeBody>(plain);
        id(b.id_h, "ID_H");
        scalar(b.c, "c");
        ciphertext(b.c_h, "C_H");
        pup_ = Pup{b.id_h, b.c_h, b.s3, b.c};
      } else if (name == "E4") {
        auto b = codec::decode_members<PupUploadBody>(plain);
        add(d_, b.d, "d");
        ciphertext(b.c_p, "C_P");
      } else if (name == "E5") {
        auto b = codec::decode_members<TpChallengeBody>(plain);
        id(b.id_p, "ID_P");
        nid(b.nid, "NID");
        scalar(b.s, "s");
        ciphertext(b.c_p, "C_P");
      } else if (name == "E6") {
        ciphertext(codec::decode_members<TpPrescriptionBody>(plain).c_d, "C_D");
      } else if (name == "E7") {
        auto b = codec::decode_members<CpChallengeBody>(plain);
        id(b.id_d, "ID_D");
        scalar(b.y, "y");
        ciphertext(b.c_d, "C_D");
      } else if (name == "E8") {
        ciphertext(codec::decode_members<CpArchiveBody>(plain).c_e, "C_E");
      } else {
        reports(name, plain);
      }
    } catch (const Error&) {
      // opened but not in the expected shape; nothing to learn
    }
  }

  struct Pup {
    Identity id_h;
    Ciphertext c_h;
    Digest s3;
    Scalar c;
  };

  AttackReport& report_;
  std::vector<Item<Scalar>> scalars_, masked_, d_;
  std::vector<Item<Identity>> ids_;
  std::vector<Item<Nid>> nids_;
  std::vector<Item<Ciphertext>> cts_;
  std::vector<Item<SymKey>> keys_;
  std::set<std::size_t> opened_;
  std::set<std::pair<std::size_t, std::size_t>> tried_;
  std::optional<Pup> pup_;
  std::optional<Timestamp> t_c5_;
};

}  // namespace

AttackReport passive_eavesdrop_attempt(const PassiveView& view, const std::optional<Scalar>& leaked_sn) {
  AttackReport r;
  r.mode = "passive";
  Knowledge k(r);
  if (leaked_sn) k.scalar(*leaked_sn, "leaked sn_x");
  for (const auto& m : view.public_messages) {
    std::visit(
        [&](const auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, HupMsg2>) {
            k.ciphertext(msg.e1, "E1");
          } else if constexpr (std::is_same_v<T, HupMsg3>) {
            k.ciphertext(msg.e2, "E2");
          } else if constexpr (std::is_same_v<T, PupMsg2>) {
            k.ciphertext(msg.e3, "E3");
            k.masked(msg.i, "I");
            k.t_c5(msg.t_c5);
          } else if constexpr (std::is_same_v<T, PupMsg3>) {
            k.ciphertext(msg.e4, "E4");
          } else if constexpr (std::is_same_v<T, TpMsg2>) {
            k.ciphertext(msg.e5, "E5");
            k.masked(msg.j, "J");
          } else if constexpr (std::is_same_v<T, TpMsg3>) {
            k.ciphertext(msg.e6, "E6");
          } else if constexpr (std::is_same_v<T, CpMsg2>) {
            k.ciphertext(msg.e7, "E7");
          } else if constexpr (std::is_same_v<T, CpMsg3>) {
            k.ciphertext(msg.e8, "E8");
          }
        },
        m.payload);
  }
  k.saturate();
  r.confidentiality = r.opened.empty() ? Verdict::Holds : Verdict::Violated;
  return r;
}

std::vector<std::size_t> scan_anonymity(const Transcript& transcript, const Identity& id_p) {
  std::vector<std::size_t> hits;
  const auto& needle = id_p.bytes();
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (transcript[i].channel != Channel::Public) continue;
    auto wire = serialize(transcript[i]);
    if (std::search(wire.begin(), wire.end(), needle.begin(), needle.end()) != wire.end()) hits.push_back(i);
  }
  return hits;
}

nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json keys = nlohmann::json::array(), opened = nlohmann::json::array(), attacks = nlohmann::json::array();
  for (const auto& [name, k] : r.derived_keys) keys.push_back({{"name", name}, {"key", to_hex(k.bytes)}});
  for (const auto& o : r.opened) {
    opened.push_back({{"ciphertext", o.ciphertext}, {"key", o.key_name}, {"plaintext", to_hex(o.plaintext)}});
  }
  for (const auto& a : r.attacks) {
    attacks.push_back({{"name", a.name},
                       {"patient", to_hex(to_bytes(a.patient))},
                       {"applicable", a.applicable},
                       {"success", a.success},
                       {"detail", a.detail}});
  }
  return {{"kind", "attack-report"},     {"format", "tmis-attack"}, {"version", 1},
          {"mode", r.mode},              {"verdict", to_string(r.confidentiality)},
          {"decrypt_attempts", r.decrypt_attempts}, {"derived_keys", keys},
          {"opened", opened},            {"attacks", attacks}};
}

namespace {

std::string printable(const Bytes& b) {
  bool text = std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c >= 0x20 && c < 0x7f; });
  return text ? std::string(b.begin(), b.end()) : to_hex(b);
}

std::string_view report_name(ReportKind k) {
  switch (k) {
    case ReportKind::Inspection: return "m_H";
    case ReportKind::Sensor: return "m_B";
    case ReportKind::Treatment: return "m_D";
  }
  return "?";
}

}  // namespace

std::string summary(const AttackReport& r) {
  std::ostringstream os;
  os << r.mode << " attack: " << r.opened.size() << " opening(s) in " << r.decrypt_attempts
     << " decryption attempt(s); report confidentiality " << to_string(r.confidentiality) << "\n";
  for (const auto& a : r.attacks) {
    os << "  " << a.name << " [" << a.patient << "]: "
       << (!a.applicable ? "not applicable" : a.success ? "success" : "FAILED") << " - " << a.detail << "\n";
  }
  for (const auto& o : r.opened) {
    os << "  opened " << o.ciphertext << " with " << o.key_name << "\n";
    if (!o.ciphertext.starts_with("C_")) continue;
    try {
      FieldReader rd(o.plaintext);
      while (!rd.done()) {
        auto m = MedicalReport::decode(rd.next());
        os << "    " << report_name(m.kind) << ": " << printable(m.payload) << "\n";
      }
    } catch (const Error&) {
      // not a report bundle
    }
  }
  return os.str();
}

}  // namespace tmis
