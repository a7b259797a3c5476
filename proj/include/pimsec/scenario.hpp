#pragma once

// One fully specified run: workload, scheme, verification, optional tamper and
// seed. Running the same scenario twice gives the same RunResult.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pimsec/host.hpp"
#include "pimsec/pimsim.hpp"
#include "pimsec/workloads.hpp"

namespace pimsec {

struct Scenario {
  WorkloadKind workload = WorkloadKind::mlp;
  SchemeConfig config;
  std::optional<TamperSpec> tamper;
  std::uint64_t seed = 1;
  WorkloadParams params;
  DeviceTopology topology;
};

enum class RunStatus { ok, verification_failure, gc_fault, config_error };

std::string_view to_string(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::ok;
  std::string message;
  RingVector output;
  std::string digest;  // hex SHA-256 of the output words, empty unless ok
  CostReport costs;
  RunLog log;
  std::vector<TamperRecord> tampers;
  bool tamper_fired = false;
};

/// Hex SHA-256 over the little-endian bytes of `words`.
std::string digest_words(const RingVector& words);

/// Never throws for run-time outcomes; the status carries them.
RunResult run_scenario(const Scenario& s);

/// Parses "key = value" lines ('#' comments). Keys: workload, scheme, variant,
/// verify, tamper, seed, dpus, and the WorkloadParams names (mlp_depth, ...).
/// Unknown keys throw ConfigError.
Scenario parse_scenario(std::string_view text, Scenario base = {});
/// Applies one key/value pair.
void set_scenario_key(Scenario& s, std::string_view key, std::string_view value);
/// Every key with its current value, in a fixed order; parse_scenario of
/// these lines reproduces `s`.
std::vector<std::pair<std::string, std::string>> scenario_keys(const Scenario& s);

}  // namespace pimsec
