// hpinn: run, sweep, baseline and reference experiments from a JSON config.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 config error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "hpinn/experiment.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

hpinn::ExperimentConfig resolve(const Options& opt) {
  hpinn::ExperimentConfig c = hpinn::ExperimentConfig::load(opt.config);
  if (!opt.out.empty()) c.outputs.dir = opt.out;
  if (opt.seed) c.network.seed = *opt.seed;
  return c;
}

void print_errors(const char* label, const std::vector<hpinn::ErrorSample>& errors) {
  for (const auto& e : errors) {
    std::cout << label << " t=" << hpinn::format_number(e.t)
              << " rel_error=" << hpinn::format_number(e.relative_error) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid discrete-time PINN for 1-D convection-diffusion"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", opt.config, "JSON experiment config")->required();
    sub->add_option("--out,-o", opt.out, "Output directory (overrides outputs.dir)");
    sub->add_option("--seed", opt.seed, "Network seed (overrides network.seed)");
    sub->add_flag("--quiet,-q", opt.quiet, "No per-step progress on stderr");
  };
  CLI::App* run = app.add_subcommand("run", "Hybrid march, profiles and errors against the reference");
  CLI::App* sweep = app.add_subcommand("sweep", "Accuracy table over q, dt and nu");
  CLI::App* baseline = app.add_subcommand("baseline", "Original discrete-time PINN (indicator off)");
  CLI::App* reference = app.add_subcommand("reference", "Reference WENO-Z/TVD-RK3 solution only");
  for (CLI::App* sub : {run, sweep, baseline, reference}) add_common(sub);
  sweep->add_option("--jobs,-j", opt.jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  const hpinn::LogSink log = [&](const std::string& line) {
    if (!opt.quiet) std::cerr << line << std::endl;
  };

  try {
    const hpinn::ExperimentConfig config = resolve(opt);
    hpinn::RunSummary summary;
    if (run->parsed()) {
      summary = hpinn::run_experiment(config, log);
      print_errors("hpinn", summary.errors);
      print_errors("baseline", summary.baseline_errors);
    } else if (baseline->parsed()) {
      summary = hpinn::run_baseline(config, log);
      print_errors("baseline", summary.baseline_errors);
    } else if (reference->parsed()) {
      summary = hpinn::run_reference(config, log);
    } else {
      const auto rows = hpinn::run_sweep(config, opt.jobs, log);
      int failed = 0;
      for (const auto& r : rows) {
        std::cout << "q=" << r.q << " dt=" << hpinn::format_number(r.dt)
                  << " nu=" << hpinn::format_number(r.nu)
                  << " rel_error=" << hpinn::format_number(r.rel_error)
                  << (r.error.empty() ? "" : " error=" + r.error) << '\n';
        failed += r.error.empty() ? 0 : 1;
      }
      summary.files.push_back(config.outputs.dir / "sweep.csv");
      if (failed == static_cast<int>(rows.size()) && failed > 0) {
        std::cerr << "hpinn: every sweep cell failed\n";
        return kNumerical;
      }
    }
    for (const auto& f : summary.files) std::cout << "wrote " << f.string() << '\n';
    return kOk;
  } catch (const hpinn::ConfigError& e) {
    std::cerr << "hpinn: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const hpinn::TrainingError& e) {
    std::cerr << "hpinn: training failed at step " << e.step() << ", iteration " << e.iteration()
              << " (|theta| = " << e.parameter_norm() << "): " << e.what() << '\n';
    return kNumerical;
  } catch (const hpinn::ad::EvaluationError& e) {
    std::cerr << "hpinn: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "hpinn: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "hpinn: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
