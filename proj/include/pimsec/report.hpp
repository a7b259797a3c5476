#pragma once

// Machine-readable run reports and report comparison.

#include <map>
#include <string>
#include <vector>

#include "pimsec/adversary.hpp"
#include "pimsec/scenario.hpp"

namespace pimsec {

inline constexpr int kReportSchemaVersion = 1;

/// Deterministic JSON text (fixed key order, trailing newline).
std::string render_report(const Scenario& s, const RunResult& r);
std::string render_campaign(const CampaignReport& c);

struct Comparison {
  bool digests_equal = false;
  std::vector<std::string> differences;         // "path: a -> b"
  std::map<std::string, double> online_ratios;  // counter -> b / a (a nonzero)
};

/// Throws ConfigError when the reports are not comparable (different
/// workload, seed or parameters) or not parseable.
Comparison compare_reports(const std::string& a, const std::string& b);
std::string render_comparison(const Comparison& c);

}  // namespace pimsec
