#include "pimsec/scenario.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "pimsec/errors.hpp"

namespace pimsec {

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::verification_failure: return "verification_failure";
    case RunStatus::gc_fault: return "gc_fault";
    case RunStatus::config_error: return "config_error";
  }
  return "?";
}

std::string digest_words(const RingVector& words) {
  std::vector<unsigned char> bytes;
  bytes.reserve(4 * static_cast<std::size_t>(words.size()));
  for (Word w : words) {
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<unsigned char>(w >> (8 * b)));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

RunResult run_scenario(const Scenario& s) {
  RunResult r;
  std::optional<Host> host;
  try {
    s.topology.validate();
    host.emplace(s.config, s.seed, s.topology);
    const OnlineHook hook = [&s](Host& h) {
      if (s.tamper) h.tamper().arm(*s.tamper);
    };
    r.output = run_workload(*host, s.workload, s.params, s.seed, hook);
    r.digest = digest_words(r.output);
  } catch (const VerificationFailure& e) {
    r.status = RunStatus::verification_failure;
    r.message = e.what();
  } catch (const GcEvaluationFault& e) {
    r.status = RunStatus::gc_fault;
    r.message = e.what();
  } catch (const ConfigError& e) {
    r.status = RunStatus::config_error;
    r.message = e.what();
  } catch (const DimensionError& e) {
    r.status = RunStatus::config_error;
    r.message = e.what();
  } catch (const IndexError& e) {
    r.status = RunStatus::config_error;
    r.message = e.what();
  } catch (const CapacityError& e) {
    r.status = RunStatus::config_error;
    r.message = e.what();
  }
  if (host) {
    r.costs = host->costs();
    r.log = host->log();
    r.tampers = host->tamper().log();
    r.tamper_fired = host->tamper().fired();
  }
  return r;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an unsigned integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

constexpr std::pair<const char*, std::size_t WorkloadParams::*> kParamFields[] = {
    {"mlp_depth", &WorkloadParams::mlp_depth},
    {"mlp_width", &WorkloadParams::mlp_width},
    {"dlrm_tables", &WorkloadParams::dlrm_tables},
    {"dlrm_rows", &WorkloadParams::dlrm_rows},
    {"dlrm_cols", &WorkloadParams::dlrm_cols},
    {"dlrm_batch", &WorkloadParams::dlrm_batch},
    {"dlrm_pf", &WorkloadParams::dlrm_pf},
    {"linreg_samples", &WorkloadParams::linreg_samples},
    {"linreg_features", &WorkloadParams::linreg_features},
    {"linreg_iterations", &WorkloadParams::linreg_iterations},
    {"logreg_samples", &WorkloadParams::logreg_samples},
    {"logreg_features", &WorkloadParams::logreg_features},
    {"logreg_iterations", &WorkloadParams::logreg_iterations},
    {"gemm_n", &WorkloadParams::gemm_n},
    {"conv_input", &WorkloadParams::conv_input},
    {"conv_kernel", &WorkloadParams::conv_kernel},
    {"conv_stride", &WorkloadParams::conv_stride},
};

using Setter = std::function<void(Scenario&, std::string_view, std::string_view)>;

Setter size_field(std::size_t WorkloadParams::*field) {
  return [field](Scenario& s, std::string_view k, std::string_view v) {
    s.params.*field = static_cast<std::size_t>(parse_u64(k, v));
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> m = [] {
    std::map<std::string, Setter, std::less<>> out = {
      {"workload", [](Scenario& s, auto, auto v) { s.workload = parse_workload(v); }},
      {"scheme", [](Scenario& s, auto, auto v) { s.config.scheme = parse_scheme(v); }},
      {"variant", [](Scenario& s, auto, auto v) { s.config.variant = parse_variant(v); }},
      {"verify", [](Scenario& s, auto k, auto v) { s.config.verify = parse_bool(k, v); }},
      {"tamper",
       [](Scenario& s, auto, auto v) {
         if (v.empty() || v == "none") {
           s.tamper.reset();
         } else {
           s.tamper = TamperSpec::parse(v);
         }
       }},
      {"seed", [](Scenario& s, auto k, auto v) { s.seed = parse_u64(k, v); }},
      {"dpus", [](Scenario& s, auto k, auto v) { s.topology.dpu_count = static_cast<std::size_t>(parse_u64(k, v)); }},
    };
    for (const auto& [name, field] : kParamFields) out.emplace(name, size_field(field));
    return out;
  }();
  return m;
}

}  // namespace

void set_scenario_key(Scenario& s, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(s, key, value);
}

std::vector<std::pair<std::string, std::string>> scenario_keys(const Scenario& s) {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"workload", std::string(to_string(s.workload))},
      {"scheme", std::string(to_string(s.config.scheme))},
      {"variant", std::string(to_string(s.config.variant))},
      {"verify", s.config.verify ? "true" : "false"},
      {"tamper", s.tamper ? s.tamper->str() : "none"},
      {"seed", std::to_string(s.seed)},
      {"dpus", std::to_string(s.topology.dpu_count)},
  };
  for (const auto& [name, field] : kParamFields) kv.emplace_back(name, std::to_string(s.params.*field));
  return kv;
}

Scenario parse_scenario(std::string_view text, Scenario base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    set_scenario_key(base, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
  }
  return base;
}

}  // namespace pimsec
