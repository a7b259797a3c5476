#include "pimsec/scenario.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include "pimsec/adversary.hpp"
#include "pimsec/errors.hpp"
#include "pimsec/report.hpp"

namespace pimsec {
namespace {

Scenario quick(WorkloadKind w, Scheme s, bool verify = true) {
  Scenario sc;
  sc.workload = w;
  sc.config.scheme = s;
  sc.config.verify = verify;
  sc.params.mlp_depth = 2;
  sc.params.linreg_iterations = 3;
  sc.params.logreg_iterations = 3;
  return sc;
}

TEST(Scenario, ParsesKeyValueText) {
  const Scenario s = parse_scenario(
      "# comment\n"
      "workload = logreg\n"
      "scheme=pim_runtime\n"
      "variant = A2Y   # trailing\n"
      "verify = on\n"
      "seed = 99\n"
      "logreg_iterations = 7\n"
      "tamper = gc_table:3:bit_flip\n");
  EXPECT_EQ(s.workload, WorkloadKind::logreg);
  EXPECT_EQ(s.config.variant, Variant::A2Y);
  EXPECT_TRUE(s.config.verify);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.params.logreg_iterations, 7u);
  ASSERT_TRUE(s.tamper);
  EXPECT_EQ(s.tamper->target, TamperTarget::gc_table);
  EXPECT_EQ(s.tamper->position, 3u);
}

TEST(Scenario, RejectsBadInput) {
  EXPECT_THROW(parse_scenario("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_scenario("seed = -1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("verify = maybe\n"), ConfigError);
  EXPECT_THROW(parse_scenario("just words\n"), ConfigError);
  EXPECT_THROW(parse_scenario("scheme = sgx\n"), ConfigError);
}

TEST(Scenario, KeysRoundTrip) {
  Scenario s = quick(WorkloadKind::dlrm, Scheme::pim_enc_dec);
  s.tamper = TamperSpec{TamperTarget::channel_h2d, 5, Mutation::bit_flip};
  s.seed = 1234;
  std::string text;
  for (const auto& [k, v] : scenario_keys(s)) text += k + " = " + v + "\n";
  const Scenario back = parse_scenario(text);
  EXPECT_EQ(render_report(back, RunResult{}), render_report(s, RunResult{}));
}

TEST(Scenario, StatusMapping) {
  EXPECT_EQ(run_scenario(quick(WorkloadKind::mlp, Scheme::pim_runtime)).status, RunStatus::ok);
  EXPECT_EQ(run_scenario(quick(WorkloadKind::logreg, Scheme::pim_precompute)).status, RunStatus::config_error);

  Scenario t = quick(WorkloadKind::mlp, Scheme::pim_runtime);
  t.tamper = TamperSpec{TamperTarget::device_result, std::nullopt, Mutation::word_randomize};
  const RunResult r = run_scenario(t);
  EXPECT_EQ(r.status, RunStatus::verification_failure);
  EXPECT_TRUE(r.digest.empty());
  EXPECT_EQ(r.tampers.size(), 1u);

  Scenario g = quick(WorkloadKind::logreg, Scheme::pim_runtime);
  g.config.variant = Variant::A2Y;
  g.tamper = TamperSpec{TamperTarget::gc_table, 0, Mutation::bit_flip};
  EXPECT_EQ(run_scenario(g).status, RunStatus::gc_fault);
}

TEST(Scenario, DigestIsSha256OfLittleEndianWords) {
  // sha256 of 4 zero bytes
  EXPECT_EQ(digest_words(RingVector(RingVector::Zero(1))),
            "df3f619804a92fdb4057192dc43dd748ea778adc52bc498ce80524c014b81119");
}

TEST(Report, RerunIsByteIdentical) {
  for (auto w : kAllWorkloads) {
    Scenario s = quick(w, Scheme::pim_runtime);
    s.tamper = TamperSpec{TamperTarget::channel_d2h, std::nullopt, Mutation::word_randomize};
    EXPECT_EQ(render_report(s, run_scenario(s)), render_report(s, run_scenario(s))) << to_string(w);
  }
}

TEST(Report, EveryCounterAppearsOnce) {
  const Scenario s = quick(WorkloadKind::mlp, Scheme::pim_runtime);
  const auto j = nlohmann::json::parse(render_report(s, run_scenario(s)));
  for (const char* phase : {"offline", "online"}) {
    ASSERT_TRUE(j.contains(phase));
    EXPECT_EQ(j[phase].size(), 8u);
    for (const char* k : {"bytes_h2d", "bytes_d2h", "device_mac_ops", "device_prf_calls", "host_mac_ops",
                          "host_prf_calls", "gc_bytes", "verify_ops"}) {
      EXPECT_TRUE(j[phase].contains(k)) << phase << "." << k;
    }
  }
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["verification"]["count"], 2);
}

TEST(Report, CompareAcrossSchemes) {
  Scenario rt = quick(WorkloadKind::mlp, Scheme::pim_runtime);
  Scenario pc = quick(WorkloadKind::mlp, Scheme::pim_precompute);
  Scenario ci = quick(WorkloadKind::mlp, Scheme::cpu_insecure);
  const std::string a = render_report(rt, run_scenario(rt));
  const std::string b = render_report(pc, run_scenario(pc));
  const std::string c = render_report(ci, run_scenario(ci));

  const Comparison x = compare_reports(a, b);
  EXPECT_TRUE(x.digests_equal);
  EXPECT_EQ(x.online_ratios.at("host_mac_ops"), 0.0);
  EXPECT_TRUE(compare_reports(c, a).digests_equal);

  const Comparison same = compare_reports(a, a);
  EXPECT_TRUE(same.digests_equal);
  EXPECT_TRUE(same.differences.empty());
}

TEST(Report, CompareRejectsDifferentInputs) {
  Scenario a = quick(WorkloadKind::mlp, Scheme::pim_runtime);
  Scenario b = a;
  b.seed = 2;
  EXPECT_THROW(compare_reports(render_report(a, run_scenario(a)), render_report(b, run_scenario(b))), ConfigError);
  EXPECT_THROW(compare_reports("{", "{}"), ConfigError);
}

TEST(Report, FailedRunHasNoDigestMatch) {
  Scenario a = quick(WorkloadKind::mlp, Scheme::pim_runtime);
  Scenario b = a;
  b.tamper = TamperSpec{TamperTarget::channel_d2h, 0, Mutation::bit_flip};
  EXPECT_FALSE(compare_reports(render_report(a, run_scenario(a)), render_report(b, run_scenario(b))).digests_equal);
}

TEST(Adversary, EveryTargetIsDetected) {
  for (TamperTarget t : {TamperTarget::resident_share, TamperTarget::channel_h2d, TamperTarget::channel_d2h,
                         TamperTarget::device_result, TamperTarget::precompute_store, TamperTarget::gc_table}) {
    const CampaignReport rep = run_campaign(Campaign{t, Mutation::word_randomize, 25, 100});
    EXPECT_EQ(rep.detected, 25u) << to_string(t);
    EXPECT_EQ(rep.detection_rate(), 1.0);
  }
}

TEST(Adversary, BitFlipsAreDetectedToo) {
  const CampaignReport rep = run_campaign(Campaign{TamperTarget::channel_d2h, Mutation::bit_flip, 50, 7});
  EXPECT_EQ(rep.detected, 50u);
}

TEST(Adversary, WithoutVerificationTampersGoThrough) {
  Scenario s = campaign_scenario(TamperTarget::channel_d2h);
  s.config.verify = false;
  const CampaignReport rep = run_campaign(s, Campaign{TamperTarget::channel_d2h, Mutation::word_randomize, 20, 1});
  EXPECT_EQ(rep.detected, 0u);
  EXPECT_EQ(rep.undetected_corrupt + rep.undetected_harmless, 20u);
  EXPECT_GT(rep.undetected_corrupt, 0u);
}

TEST(Adversary, UnusedTargetNeverFires) {
  // no garbled tables in a linear-only run
  const CampaignReport rep =
      run_campaign(campaign_scenario(TamperTarget::channel_d2h), Campaign{TamperTarget::gc_table, Mutation::bit_flip, 5, 1});
  EXPECT_EQ(rep.not_fired, 5u);
}

TEST(Adversary, CleanRunsHaveNoFalsePositives) {
  for (auto w : kAllWorkloads) {
    Scheme s = is_training(w) ? Scheme::pim_runtime : Scheme::pim_precompute;
    EXPECT_EQ(count_false_positives(quick(w, s), 10, 1), 0u) << to_string(w);
  }
}

TEST(Adversary, CampaignReportIsDeterministic) {
  const Campaign c{TamperTarget::resident_share, Mutation::word_randomize, 5, 3};
  EXPECT_EQ(render_campaign(run_campaign(c)), render_campaign(run_campaign(c)));
}

}  // namespace
}  // namespace pimsec
