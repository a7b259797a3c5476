#pragma once

// Fault-injection campaigns: one tamper per trial, each trial on a fresh
// simulator, outcome compared against an untampered run of the same scenario.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pimsec/pimsim.hpp"
#include "pimsec/scenario.hpp"

namespace pimsec {

enum class TrialOutcome { detected, undetected_harmless, undetected_corrupt, not_fired };

std::string_view to_string(TrialOutcome o);

struct TrialRecord {
  std::uint64_t seed = 0;
  TrialOutcome outcome = TrialOutcome::not_fired;
  RunStatus status = RunStatus::ok;
  std::vector<TamperRecord> tampers;
};

struct Campaign {
  TamperTarget target = TamperTarget::channel_d2h;
  Mutation mutation = Mutation::word_randomize;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
};

struct CampaignReport {
  Scenario base;
  Campaign campaign;
  std::vector<TrialRecord> trials;
  std::size_t detected = 0;
  std::size_t undetected_harmless = 0;
  std::size_t undetected_corrupt = 0;
  std::size_t not_fired = 0;

  /// Detected over fired trials.
  double detection_rate() const;
};

/// The default victim for each target: a verified 16x16 GEMV layer on
/// pim_runtime, pim_precompute for the sealed store, and a one-iteration
/// A2Y logistic regression for garbled tables.
Scenario campaign_scenario(TamperTarget target);

/// Trial i runs `base` with seed campaign.seed + i and a tamper at a random
/// position.
CampaignReport run_campaign(const Scenario& base, const Campaign& c);
inline CampaignReport run_campaign(const Campaign& c) { return run_campaign(campaign_scenario(c.target), c); }

/// Untampered runs with seeds seed..seed+runs-1 that nonetheless failed.
std::size_t count_false_positives(const Scenario& base, std::size_t runs, std::uint64_t seed);

}  // namespace pimsec
