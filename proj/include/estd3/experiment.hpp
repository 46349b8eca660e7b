#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "estd3/orchestrator.hpp"

namespace estd3 {

struct ExperimentOptions {
  bool smooth = false;   // append trailing moving-average columns (window 10)
  bool trace = false;    // per-generation / per-1000-frame trace files
  int jobs = 1;          // seeds run in parallel when > 1
  int smooth_window = 10;
};

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_score = 0.0;  // max of the last iteration's td3/es evaluations
  std::vector<IterationReport> reports;
};

struct ExperimentSummary {
  std::vector<SeedResult> seeds;
  std::vector<double> final_scores;  // successful seeds only, in input order
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double median = 0.0;
  bool all_ok = false;
};

/// Trailing moving average: out[i] = mean(x[max(0, i-window+1) .. i]).
std::vector<double> trailing_moving_average(std::span<const double> x, int window);

/// Runs the configuration once per seed, writing per-seed curve files,
/// checkpoints, and summary.json under outdir. Curve rows are flushed as
/// they are produced, so a failing seed leaves its partial curve behind.
/// All emitted files are byte-deterministic given (config, seeds, platform).
ExperimentSummary run_experiment(const RunConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& outdir,
                                 const ExperimentOptions& options = {});

/// Independent recomputation of the summary from the curve files in a
/// directory (the `report` subcommand).
ExperimentSummary recompute_summary_from_dir(const std::string& dir);

void write_summary_json(const ExperimentSummary& summary, std::ostream& out);

/// Maps an ablation mode onto config surgery:
///  full          - unchanged
///  td3_only      - g = 0, ratio (0,0,1)
///  es_only       - M = 0, overwrite disabled
///  single_buffer - everything routed to the noisy compartment, ratio (0,0,1)
RunConfig apply_ablation(RunConfig config, const std::string& mode);

std::string curve_file_name(std::uint64_t seed);

}  // namespace estd3
