#include "pimsec/report.hpp"

#include <json.hpp>

#include <cstdio>

#include "pimsec/errors.hpp"

namespace pimsec {

using Json = nlohmann::ordered_json;

namespace {

Json ledger(const CostLedger& c) {
  return Json{{"bytes_h2d", c.bytes_h2d},         {"bytes_d2h", c.bytes_d2h},
              {"device_mac_ops", c.device_mac_ops}, {"device_prf_calls", c.device_prf_calls},
              {"host_mac_ops", c.host_mac_ops},     {"host_prf_calls", c.host_prf_calls},
              {"gc_bytes", c.gc_bytes},             {"verify_ops", c.verify_ops}};
}

Json scenario_json(const Scenario& s) {
  Json j = Json::object();
  for (const auto& [k, v] : scenario_keys(s)) j[k] = v;
  return j;
}

Json tamper_json(const TamperRecord& t) {
  return Json{{"spec", t.spec.str()}, {"site", t.site}, {"index", t.index}, {"before", t.before}, {"after", t.after}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string render_report(const Scenario& s, const RunResult& r) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = scenario_json(s);
  j["status"] = std::string(to_string(r.status));
  j["message"] = r.message;
  j["digest"] = r.digest;
  j["output_words"] = r.output.size();
  j["offline"] = ledger(r.costs.offline);
  j["online"] = ledger(r.costs.online);

  Json events = Json::array();
  std::size_t passed = 0;
  for (const auto& e : r.log.verifications) {
    passed += e.verdict == Verdict::pass;
    events.push_back({{"step", e.step}, {"verdict", e.verdict == Verdict::pass ? "pass" : "fail"}});
  }
  j["verification"] = {{"count", r.log.verifications.size()},
                       {"passed", passed},
                       {"failed", r.log.verifications.size() - passed},
                       {"events", events}};

  Json leaks = Json::array();
  for (const auto& [kind, words] : r.log.leaks) leaks.push_back({{"kind", kind}, {"words", words}});
  j["leaks"] = leaks;

  const auto& a = r.log.a2y;
  j["a2y"] = {{"switches", r.log.a2y_switches},
              {"host_stored_labels", a.host_stored_labels},
              {"evaluator_labels_transferred", a.evaluator_labels_transferred},
              {"garbler_labels_sent", a.garbler_labels_sent},
              {"and_gates", a.and_gates},
              {"table_bytes", a.table_bytes},
              {"garbler_hash_calls", a.garbler_hash_calls},
              {"evaluator_hash_calls", a.evaluator_hash_calls},
              {"ot_released_labels", r.log.ot_released_labels},
              {"one_label_per_wire", r.log.ot_one_label_per_wire}};

  Json tampers = Json::array();
  for (const auto& t : r.tampers) tampers.push_back(tamper_json(t));
  j["tampers"] = tampers;
  return dump(j);
}

std::string render_campaign(const CampaignReport& c) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = scenario_json(c.base);
  j["campaign"] = {{"target", std::string(to_string(c.campaign.target))},
                   {"mutation", std::string(to_string(c.campaign.mutation))},
                   {"trials", c.campaign.trials},
                   {"seed", c.campaign.seed}};
  j["summary"] = {{"detected", c.detected},
                  {"undetected_harmless", c.undetected_harmless},
                  {"undetected_corrupt", c.undetected_corrupt},
                  {"not_fired", c.not_fired}};
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.6f", c.detection_rate());
  j["detection_rate"] = std::string(rate);
  Json trials = Json::array();
  for (const auto& t : c.trials) {
    Json tt = {{"seed", t.seed}, {"outcome", std::string(to_string(t.outcome))}, {"status", std::string(to_string(t.status))}};
    Json recs = Json::array();
    for (const auto& r : t.tampers) recs.push_back(tamper_json(r));
    tt["tampers"] = recs;
    trials.push_back(tt);
  }
  j["trials"] = trials;
  return dump(j);
}

namespace {

void diff(const Json& a, const Json& b, const std::string& path, std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (b.contains(k)) {
        diff(v, b[k], path + "." + k, out);
      } else {
        out.push_back(path + "." + k + ": only in first");
      }
    }
    for (const auto& [k, v] : b.items()) {
      if (!a.contains(k)) out.push_back(path + "." + k + ": only in second");
    }
    return;
  }
  if (a != b) out.push_back(path + ": " + a.dump() + " -> " + b.dump());
}

}  // namespace

Comparison compare_reports(const std::string& a_text, const std::string& b_text) {
  Json a, b;
  try {
    a = Json::parse(a_text);
    b = Json::parse(b_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("unreadable report: ") + e.what());
  }
  if (!a.contains("scenario") || !b.contains("scenario")) throw ConfigError("not a run report");
  // everything but the execution venue must match
  Json sa = a["scenario"], sb = b["scenario"];
  for (const char* k : {"scheme", "variant", "verify", "tamper", "dpus"}) {
    sa.erase(k);
    sb.erase(k);
  }
  if (sa != sb) throw ConfigError("reports describe different workloads or inputs");

  Comparison c;
  c.digests_equal = a.value("digest", "") == b.value("digest", "") && !a.value("digest", "").empty();
  diff(a, b, "", c.differences);
  for (const auto& [k, v] : a["online"].items()) {
    const auto av = v.get<std::uint64_t>();
    if (av != 0) c.online_ratios[k] = static_cast<double>(b["online"][k].get<std::uint64_t>()) / static_cast<double>(av);
  }
  return c;
}

std::string render_comparison(const Comparison& c) {
  Json j;
  j["digests_equal"] = c.digests_equal;
  Json ratios = Json::object();
  for (const auto& [k, v] : c.online_ratios) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    ratios[k] = std::string(buf);
  }
  j["online_ratios"] = ratios;
  j["differences"] = c.differences;
  return dump(j);
}

}  // namespace pimsec
