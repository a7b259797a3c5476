// pimsec: scenario runner, report comparison and tamper campaigns.
//
// exit codes: 0 ok, 1 compare mismatch or undetected tamper, 2 verification
// abort or garbled-circuit fault, 3 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pimsec/adversary.hpp"
#include "pimsec/errors.hpp"
#include "pimsec/report.hpp"
#include "pimsec/scenario.hpp"

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitAbort = 2;
constexpr int kExitConfig = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pimsec::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw pimsec::ConfigError("cannot write " + out);
  f << text;
}

struct RunFlags {
  std::string workload, scheme, variant, tamper, config, out;
  bool verify = false;
  std::uint64_t seed = 1;
  std::size_t dpus = 0;
};

pimsec::Scenario build_scenario(const RunFlags& f, CLI::App& cmd) {
  pimsec::Scenario s;
  if (!f.config.empty()) s = pimsec::parse_scenario(slurp(f.config), s);
  auto given = [&cmd](const char* name) { return cmd.count(name) > 0; };
  if (given("--workload")) pimsec::set_scenario_key(s, "workload", f.workload);
  if (given("--scheme")) pimsec::set_scenario_key(s, "scheme", f.scheme);
  if (given("--variant")) pimsec::set_scenario_key(s, "variant", f.variant);
  if (given("--tamper")) pimsec::set_scenario_key(s, "tamper", f.tamper);
  if (given("--verify")) s.config.verify = true;
  if (given("--seed")) s.seed = f.seed;
  if (given("--dpus")) s.topology.dpu_count = f.dpus;
  return s;
}

int exit_code(pimsec::RunStatus s) {
  switch (s) {
    case pimsec::RunStatus::ok: return 0;
    case pimsec::RunStatus::verification_failure:
    case pimsec::RunStatus::gc_fault: return kExitAbort;
    case pimsec::RunStatus::config_error: return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure PIM offloading simulator"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run one scenario and write its report");
  run->add_option("--workload", rf.workload, "mlp, dlrm, linreg, logreg, gemm, conv");
  run->add_option("--scheme", rf.scheme,
                  "cpu_insecure, cpu_secure, pim_insecure, pim_enc_dec, pim_runtime, pim_precompute");
  run->add_option("--variant", rf.variant, "A or A2Y (logreg)");
  run->add_flag("--verify", rf.verify, "check every linear kernel");
  run->add_option("--tamper", rf.tamper, "target[:position|random[:bit_flip|word_randomize]]");
  run->add_option("--seed", rf.seed);
  run->add_option("--dpus", rf.dpus);
  run->add_option("--config", rf.config, "key = value scenario file");
  run->add_option("--out", rf.out, "report path (default stdout)");

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp = app.add_subcommand("compare", "compare two run reports");
  cmp->add_option("first", cmp_a)->required();
  cmp->add_option("second", cmp_b)->required();
  cmp->add_option("--out", cmp_out);

  RunFlags cf;
  std::string target = "channel_d2h", mutation = "word_randomize";
  std::size_t trials = 100;
  bool default_victim = true;
  auto* camp = app.add_subcommand("campaign", "tamper campaign, one fault per trial");
  camp->add_option("--target", target);
  camp->add_option("--mutation", mutation, "bit_flip or word_randomize");
  camp->add_option("--trials", trials);
  camp->add_option("--seed", cf.seed);
  camp->add_option("--config", cf.config, "victim scenario (default: per-target victim)");
  camp->add_option("--out", cf.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const pimsec::Scenario s = build_scenario(rf, *run);
      const pimsec::RunResult r = pimsec::run_scenario(s);
      emit(pimsec::render_report(s, r), rf.out);
      if (r.status != pimsec::RunStatus::ok) std::cerr << "pimsec: " << r.message << "\n";
      return exit_code(r.status);
    }
    if (*cmp) {
      const pimsec::Comparison c = pimsec::compare_reports(slurp(cmp_a), slurp(cmp_b));
      emit(pimsec::render_comparison(c), cmp_out);
      return c.digests_equal ? 0 : kExitMismatch;
    }
    if (*camp) {
      pimsec::Campaign c;
      c.target = pimsec::parse_tamper_target(target);
      c.mutation = pimsec::TamperSpec::parse(target + ":random:" + mutation).mutation;
      c.trials = trials;
      c.seed = cf.seed;
      default_victim = cf.config.empty();
      const pimsec::Scenario base =
          default_victim ? pimsec::campaign_scenario(c.target) : pimsec::parse_scenario(slurp(cf.config));
      const pimsec::CampaignReport rep = pimsec::run_campaign(base, c);
      emit(pimsec::render_campaign(rep), cf.out);
      return rep.undetected_corrupt == 0 ? 0 : kExitMismatch;
    }
  } catch (const pimsec::ConfigError& e) {
    std::cerr << "pimsec: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
