#include "pimsec/adversary.hpp"

namespace pimsec {

std::string_view to_string(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::detected: return "detected";
    case TrialOutcome::undetected_harmless: return "undetected_harmless";
    case TrialOutcome::undetected_corrupt: return "undetected_corrupt";
    case TrialOutcome::not_fired: return "not_fired";
  }
  return "?";
}

double CampaignReport::detection_rate() const {
  const std::size_t fired = trials.size() - not_fired;
  return fired == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(fired);
}

Scenario campaign_scenario(TamperTarget target) {
  Scenario s;
  s.config.verify = true;
  s.workload = WorkloadKind::mlp;
  s.params.mlp_depth = 1;
  s.params.mlp_width = 16;
  s.config.scheme = Scheme::pim_runtime;
  if (target == TamperTarget::precompute_store) s.config.scheme = Scheme::pim_precompute;
  if (target == TamperTarget::gc_table) {
    s.workload = WorkloadKind::logreg;
    s.config.variant = Variant::A2Y;
    s.params.logreg_samples = 16;
    s.params.logreg_iterations = 1;
  }
  return s;
}

CampaignReport run_campaign(const Scenario& base, const Campaign& c) {
  CampaignReport rep;
  rep.base = base;
  rep.campaign = c;
  for (std::size_t i = 0; i < c.trials; ++i) {
    Scenario s = base;
    s.seed = c.seed + i;
    s.tamper.reset();
    const RunResult clean = run_scenario(s);
    s.tamper = TamperSpec{c.target, std::nullopt, c.mutation};
    const RunResult hit = run_scenario(s);

    TrialRecord t;
    t.seed = s.seed;
    t.status = hit.status;
    t.tampers = hit.tampers;
    if (hit.status == RunStatus::verification_failure || hit.status == RunStatus::gc_fault) {
      t.outcome = TrialOutcome::detected;
      ++rep.detected;
    } else if (!hit.tamper_fired) {
      t.outcome = TrialOutcome::not_fired;
      ++rep.not_fired;
    } else if (hit.status == clean.status && hit.digest == clean.digest) {
      t.outcome = TrialOutcome::undetected_harmless;
      ++rep.undetected_harmless;
    } else {
      t.outcome = TrialOutcome::undetected_corrupt;
      ++rep.undetected_corrupt;
    }
    rep.trials.push_back(std::move(t));
  }
  return rep;
}

std::size_t count_false_positives(const Scenario& base, std::size_t runs, std::uint64_t seed) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    Scenario s = base;
    s.seed = seed + i;
    s.tamper.reset();
    const RunResult r = run_scenario(s);
    if (r.status == RunStatus::verification_failure || r.status == RunStatus::gc_fault) ++n;
  }
  return n;
}

}  // namespace pimsec
