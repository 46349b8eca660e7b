// Command-line front end: run experiments across seeds, run ablations, and
// recompute summaries from curve files.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "estd3/config.hpp"
#include "estd3/experiment.hpp"

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_summary(const estd3::ExperimentSummary& summary) {
  for (const estd3::SeedResult& s : summary.seeds) {
    if (s.ok) {
      std::cout << "seed " << s.seed << ": final best score "
                << fmt17(s.final_score) << "\n";
    } else {
      std::cout << "seed " << s.seed << ": FAILED (" << s.error << ")\n";
    }
  }
  std::cout << "mean " << fmt17(summary.mean) << "  std "
            << fmt17(summary.stddev) << "  median " << fmt17(summary.median)
            << "\n";
}

int run_seeds(const estd3::RunConfig& config,
              std::vector<std::uint64_t> seeds, const std::string& outdir,
              const estd3::ExperimentOptions& options) {
  if (seeds.empty()) seeds.push_back(config.seed);
  const estd3::ExperimentSummary summary =
      estd3::run_experiment(config, seeds, outdir, options);
  print_summary(summary);
  if (!summary.all_ok) {
    std::cerr << "error: not every seed completed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ES+TD3 multibuffer training engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir = "out";
  std::string mode = "full";
  std::string report_dir;
  std::vector<std::uint64_t> seeds;
  estd3::ExperimentOptions options;

  CLI::App* run = app.add_subcommand("run", "train across seeds");
  run->add_option("--config", config_path, "JSON configuration file");
  run->add_option("--seeds", seeds, "seeds, e.g. --seeds 1 2 3")->delimiter(',');
  run->add_option("--out", outdir, "output directory");
  run->add_flag("--smooth", options.smooth, "append window-10 smoothed columns");
  run->add_flag("--trace", options.trace, "write per-generation/frame traces");
  run->add_option("--jobs", options.jobs, "seeds to run in parallel");
  bool serial_es = false;
  run->add_flag("--serial-es", serial_es, "evaluate offspring serially");

  CLI::App* ablate = app.add_subcommand("ablate", "run an ablation mode");
  ablate->add_option("--mode", mode,
                     "full | td3_only | es_only | single_buffer")
      ->required();
  ablate->add_option("--config", config_path, "JSON configuration file");
  ablate->add_option("--seeds", seeds, "seeds")->delimiter(',');
  ablate->add_option("--out", outdir, "output directory");
  ablate->add_flag("--smooth", options.smooth, "append smoothed columns");
  ablate->add_flag("--trace", options.trace, "write traces");
  ablate->add_option("--jobs", options.jobs, "seeds to run in parallel");

  CLI::App* report = app.add_subcommand(
      "report", "recompute the summary from curve files");
  report->add_option("--dir", report_dir, "directory with curve_seed*.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(report)) {
      const estd3::ExperimentSummary summary =
          estd3::recompute_summary_from_dir(report_dir);
      print_summary(summary);
      return 0;
    }

    estd3::RunConfig config = config_path.empty()
                                  ? estd3::RunConfig{}
                                  : estd3::parse_config(config_path);
    if (app.got_subcommand(ablate)) {
      config = estd3::apply_ablation(config, mode);
    }
    if (serial_es) config.es_parallel_eval = false;
    return run_seeds(config, seeds, outdir, options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
