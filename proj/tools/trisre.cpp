#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "trisre/experiments.hpp"
#include "trisre/parallel.hpp"

namespace {

constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;

void print_verdicts(const trisre::ScenarioReport& r) {
  for (const auto& v : r.verdicts) {
    std::printf("  %-4s %-22s predicted=%-12.6g estimated=%-12.6g se=%-10.3g band=%s%s\n",
                v.pass ? "PASS" : "FAIL", v.check_id.c_str(), v.predicted, v.estimated, v.se,
                v.band.c_str(), v.gating ? "" : " (informational)");
  }
  for (const auto& e : r.errors) {
    std::printf("  ERROR %s: %s\n", e.section.c_str(), e.message.c_str());
  }
}

double total_runtime(const trisre::ScenarioReport& r) {
  for (const auto& [name, s] : r.runtime_seconds) {
    if (name == "total") return s;
  }
  return 0.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail asymptotics of triangular stochastic recurrence equations"};
  app.require_subcommand(1);

  std::string config_path;
  auto* classify_cmd = app.add_subcommand("classify", "Print the regime report of a config");
  classify_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Print the predicted tail asymptote");
  predict_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();

  std::uint64_t samples = 0, seed = 0;
  unsigned workers = 0;
  std::string out_dir, format;
  bool no_verdict_exit = false;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its report");
  run_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();
  run_cmd->add_option("--samples", samples, "Stationary samples")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Seed");
  run_cmd->add_option("--workers", workers, "Worker threads (default: TRISRE_WORKERS or all cores)");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  run_cmd->add_flag("--no-verdict-exit", no_verdict_exit, "Exit 0 even when a verdict fails");

  bool quick = false;
  std::string suite_out = "out";
  auto* suite_cmd = app.add_subcommand("suite", "Run the built-in scenarios");
  suite_cmd->add_flag("--quick", quick, "Small sample counts");
  suite_cmd->add_option("--out", suite_out, "Output directory");
  suite_cmd->add_option("--workers", workers, "Worker threads (default: TRISRE_WORKERS or all cores)");
  suite_cmd->add_flag("--no-verdict-exit", no_verdict_exit, "Exit 0 even when a verdict fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*classify_cmd) {
      const auto config = trisre::load_config(config_path);
      trisre::ClassifyOptions co;
      co.seed = config.seed;
      co.mc_samples = config.mc_samples;
      co.workers = config.workers;
      std::cout << trisre::to_json(trisre::classify(config.model, co)).dump(2) << "\n";
      return 0;
    }
    if (*predict_cmd) {
      const auto config = trisre::load_config(config_path);
      trisre::PredictOptions po;
      po.mc_samples = config.mc_samples;
      po.horizon = config.horizon;
      po.perpetuity_horizon = config.perpetuity_horizon;
      po.tol = config.tol;
      po.seed = config.seed;
      po.workers = config.workers;
      std::cout << trisre::to_json(trisre::predict(config.model, po)).dump(2) << "\n";
      return 0;
    }
    if (*run_cmd) {
      auto config = trisre::load_config(config_path);
      if (samples > 0) config.samples = samples;
      if (run_cmd->count("--seed") > 0) config.seed = seed;
      if (workers > 0) config.workers = workers;
      if (!out_dir.empty()) config.out_dir = out_dir;
      if (!format.empty()) config.format = trisre::report_format_from_string(format);
      const auto report = trisre::run_scenario(config);
      const auto path = trisre::emit_report(report, config.format, config.out_dir);
      std::printf("%s [%s] %s (%.1f s) -> %s\n", report.name.c_str(),
                  std::string(trisre::to_string(report.regime.theorem_case)).c_str(),
                  report.passed() ? "PASS" : "FAIL", total_runtime(report), path.c_str());
      print_verdicts(report);
      return report.passed() || no_verdict_exit ? 0 : kExitVerdict;
    }
    if (*suite_cmd) {
      bool all = true;
      double elapsed = 0.0;
      for (auto config : trisre::builtin_suite(quick)) {
        if (workers > 0) config.workers = workers;
        const auto report = trisre::run_scenario(config);
        trisre::emit_report(report, trisre::ReportFormat::Json, suite_out);
        trisre::emit_report(report, trisre::ReportFormat::Csv, suite_out);
        all = all && report.passed();
        elapsed += total_runtime(report);
        std::printf("%s [%s] %s (%.1f s)\n", report.name.c_str(),
                    std::string(trisre::to_string(report.regime.theorem_case)).c_str(),
                    report.passed() ? "PASS" : "FAIL", total_runtime(report));
        print_verdicts(report);
        std::fflush(stdout);
      }
      std::printf("suite %s in %.1f s, reports in %s\n", all ? "PASS" : "FAIL", elapsed,
                  suite_out.c_str());
      return all || no_verdict_exit ? 0 : kExitVerdict;
    }
  } catch (const trisre::Error& e) {
    std::fprintf(stderr, "trisre: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
