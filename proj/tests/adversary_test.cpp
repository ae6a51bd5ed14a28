#include "tmis/adversary.hpp"

#include <gtest/gtest.h>

namespace tmis {
namespace {

ScenarioConfig cfg(std::uint64_t seed, ReportKeyVariant v = ReportKeyVariant::A) {
  ScenarioConfig c;
  c.seed = seed;
  c.variant = v;
  return c;
}

ScenarioConfig with_tamper(std::size_t target) {
  auto c = cfg(3);
  FaultInjection f;
  f.target = target;
  f.offset = 60;
  c.faults = {f};
  return c;
}

InsiderView view_of(const SessionOutcome& out) { return insider_view(out.cloud_db, out.transcript); }

void expect_attack_failed(auto&& fn, bool precondition) {
  try {
    fn();
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AttackFailed);
    EXPECT_EQ(e.detail().starts_with("precondition"), precondition) << e.detail();
  }
}

TEST(Insider, ViewKeepsOnlyPublicTraffic) {
  auto out = run_full_session(cfg(1));
  auto v = view_of(out);
  EXPECT_EQ(v.public_messages.size(), 8u);
  for (const auto& m : v.public_messages) EXPECT_EQ(m.channel, Channel::Public);
  EXPECT_EQ(v.records.size(), 1u);
}

TEST(Insider, RevealsInspectionReport) {
  auto out = run_full_session(cfg(1));
  auto r = insider_reveal_inspection(view_of(out), out.registry.id_p);
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0], out.originals[0]);
  EXPECT_EQ(r.ciphertext, "C_H");
}

TEST(Insider, RevealsPatientBundleBothVariants) {
  for (auto v : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    auto out = run_full_session(cfg(4, v));
    auto r = insider_reveal_patient_bundle(view_of(out), out.registry.id_p);
    ASSERT_EQ(r.reports.size(), 2u);
    EXPECT_EQ(r.reports[0], out.originals[0]);
    EXPECT_EQ(r.reports[1], out.originals[1]);
    EXPECT_EQ(r.key_name, v == ReportKeyVariant::A ? "h(ID_P|ID_H|NID)" : "h(ID_P|ID_D|sn_x)");
  }
}

TEST(Insider, RevealsTreatmentBundleBothVariants) {
  for (auto v : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    auto out = run_full_session(cfg(5, v));
    auto r = insider_reveal_treatment_bundle(view_of(out), out.registry.id_p);
    EXPECT_EQ(r.reports, out.originals);
  }
}

TEST(Insider, PreconditionsAreReported) {
  InsiderView empty;
  auto p = Identity::from_string("patient-0001");
  expect_attack_failed([&] { insider_reveal_inspection(empty, p); }, true);

  // stops at pup_c_store: the record only has what HUP stored
  auto out = run_full_session(with_tamper(5));
  ASSERT_TRUE(out.abort);
  auto v = view_of(out);
  EXPECT_EQ(insider_reveal_inspection(v, out.registry.id_p).reports[0], out.originals[0]);
  expect_attack_failed([&] { insider_reveal_patient_bundle(v, out.registry.id_p); }, true);
  expect_attack_failed([&] { insider_reveal_treatment_bundle(v, out.registry.id_p); }, true);
}

TEST(Insider, CorruptedCiphertextIsAttackFailed) {
  auto out = run_full_session(cfg(1));
  auto v = view_of(out);
  v.records.begin()->second.c_h.body[0] ^= 1;
  expect_attack_failed([&] { insider_reveal_inspection(v, out.registry.id_p); }, false);
}

TEST(Insider, CampaignAlwaysSucceeds) {
  for (auto v : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    std::size_t ok = 0;
    run_campaign(cfg(100, v), 100, 0, [&](const SessionOutcome& out) {
      auto view = view_of(out);
      auto r = insider_reveal_treatment_bundle(view, out.registry.id_p);
      if (r.reports == out.originals &&
          insider_reveal_inspection(view, out.registry.id_p).reports[0] == out.originals[0]) {
        ++ok;
      }
    });
    EXPECT_EQ(ok, 100u) << to_string(v);
  }
}

TEST(Insider, AttackReportListsAllThree) {
  auto out = run_full_session(cfg(1, ReportKeyVariant::B));
  auto r = insider_attack(view_of(out));
  EXPECT_EQ(r.confidentiality, Verdict::Violated);
  EXPECT_EQ(r.applicable(), 3u);
  EXPECT_EQ(r.succeeded(), 3u);
  ASSERT_EQ(r.opened.size(), 3u);
  EXPECT_EQ(r.opened[2].ciphertext, "C_D");
  EXPECT_EQ(to_json(r)["verdict"], "VIOLATED");
  EXPECT_NE(summary(r).find("m_D"), std::string::npos);
}

TEST(Confidentiality, ViolatedOnCompletedSession) {
  EXPECT_EQ(check_report_confidentiality(run_full_session(cfg(1))), Verdict::Violated);
  EXPECT_EQ(check_report_confidentiality(run_full_session(cfg(1, ReportKeyVariant::B))), Verdict::Violated);
}

TEST(Confidentiality, VacuouslyHoldsWhenNothingStored) {
  auto out = run_full_session(with_tamper(2));
  ASSERT_TRUE(out.abort);
  ASSERT_TRUE(out.cloud_db.records.empty());
  EXPECT_EQ(check_report_confidentiality(out), Verdict::Holds);
  auto r = insider_attack(view_of(out));
  EXPECT_EQ(r.attacks.size(), 3u);
  EXPECT_EQ(r.applicable(), 0u);
  EXPECT_NE(summary(r).find("not applicable"), std::string::npos);
}

TEST(Passive, OpensNothing) {
  for (auto v : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    auto out = run_full_session(cfg(1, v));
    auto r = passive_eavesdrop_attempt(passive_view(out.transcript));
    EXPECT_TRUE(r.opened.empty());
    EXPECT_EQ(r.confidentiality, Verdict::Holds);
    // I and J tried raw as serial keys against the eight E_i
    EXPECT_EQ(r.decrypt_attempts, 16u);
  }
}

TEST(Passive, EmptyTranscript) {
  auto r = passive_eavesdrop_attempt(PassiveView{});
  EXPECT_TRUE(r.opened.empty());
  EXPECT_EQ(r.decrypt_attempts, 0u);
}

TEST(Passive, LeakedSerialOpensEverything) {
  for (auto v : {ReportKeyVariant::A, ReportKeyVariant::B}) {
    auto out = run_full_session(cfg(1, v));
    auto sn = out.cloud_db.records.at(out.registry.id_p).sn_x;
    auto r = passive_eavesdrop_attempt(passive_view(out.transcript), sn);
    std::set<std::string> names;
    for (const auto& o : r.opened) names.insert(o.ciphertext);
    // E1/E2 stay closed: their keys need a, which only crossed the secure channel
    EXPECT_EQ(names, (std::set<std::string>{"E3", "E4", "E5", "E6", "E7", "E8", "C_H", "C_P", "C_D", "C_E"}))
        << to_string(v);
    EXPECT_EQ(r.confidentiality, Verdict::Violated);
  }
}

TEST(Anonymity, PublicMessagesCarryNoIdentity) {
  auto out = run_full_session(cfg(1));
  EXPECT_TRUE(scan_anonymity(out.transcript, out.registry.id_p).empty());
  // the secure-channel PupMsg1 does carry it, and is out of scope
  auto wire = serialize(out.transcript[3]);
  const auto& id = out.registry.id_p.bytes();
  EXPECT_NE(std::search(wire.begin(), wire.end(), id.begin(), id.end()), wire.end());
}

TEST(Anonymity, InjectedIdentityIsFound) {
  auto out = run_full_session(cfg(1));
  auto t = out.transcript;
  auto& e2 = std::get<HupMsg3>(t[2].payload).e2;
  e2.body = out.registry.id_p.bytes();
  EXPECT_EQ(scan_anonymity(t, out.registry.id_p), (std::vector<std::size_t>{2}));
  EXPECT_TRUE(scan_anonymity({}, out.registry.id_p).empty());
}

}  // namespace
}  // namespace tmis
