#include "estd3/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "estd3/es.hpp"

namespace estd3 {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kCurveHeader =
    "iteration,cumulative_frames,cumulative_es_evals,es_eval,td3_eval,"
    "threshold,good_size,bad_size,noisy_size,overwrite_applied";

std::string curve_row(const IterationReport& r) {
  std::ostringstream row;
  row << r.iteration << ',' << r.cumulative_frames << ','
      << r.cumulative_es_evals << ',' << fmt17(r.es_eval) << ','
      << fmt17(r.td3_eval) << ',' << fmt17(r.threshold) << ',' << r.good_size
      << ',' << r.bad_size << ',' << r.noisy_size << ','
      << (r.overwrite_applied ? 1 : 0);
  return row.str();
}

class TraceWriter final : public TraceSink {
 public:
  explicit TraceWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open trace file: " + path);
    out_ << "kind,iteration,index,value,threshold\n";
  }

  void on_es_generation(int iteration, int generation, double mean_eval,
                        double threshold) override {
    out_ << "es_gen," << iteration << ',' << generation << ','
         << fmt17(mean_eval) << ',' << fmt17(threshold) << '\n';
  }

  void on_td3_frames(int iteration, long frames_into_phase,
                     double last_episode_return, double threshold) override {
    out_ << "td3_frames," << iteration << ',' << frames_into_phase << ','
         << fmt17(last_episode_return) << ',' << fmt17(threshold) << '\n';
  }

 private:
  std::ofstream out_;
};

double eval_policy_once(const Mlp& net, Env& env) {
  return evaluate([&net](std::span<const double> obs) { return net.forward(obs); },
                  env, 0)
      .fitness;
}

SeedResult run_one_seed(RunConfig cfg, std::uint64_t seed,
                        const std::string& outdir,
                        const ExperimentOptions& opts) {
  SeedResult result;
  result.seed = seed;
  cfg.seed = seed;

  const std::string curve_path =
      (fs::path(outdir) / curve_file_name(seed)).string();
  std::ofstream curve(curve_path);
  if (!curve) {
    result.error = "cannot open curve file: " + curve_path;
    return result;
  }
  curve << kCurveHeader;
  if (opts.smooth) curve << ",es_eval_smooth,td3_eval_smooth";
  curve << '\n';

  try {
    Trainer trainer(cfg);
    std::unique_ptr<TraceWriter> tracer;
    if (opts.trace) {
      tracer = std::make_unique<TraceWriter>(
          (fs::path(outdir) / ("trace_seed" + std::to_string(seed) + ".csv"))
              .string());
      trainer.trace = tracer.get();
    }

    std::vector<double> es_hist, td3_hist;
    for (int it = 0; it < cfg.iterations; ++it) {
      IterationReport rep = trainer.run_iteration();
      result.reports.push_back(rep);
      curve << curve_row(rep);
      if (opts.smooth) {
        es_hist.push_back(rep.es_eval);
        td3_hist.push_back(rep.td3_eval);
        const auto es_s = trailing_moving_average(es_hist, opts.smooth_window);
        const auto td3_s = trailing_moving_average(td3_hist, opts.smooth_window);
        curve << ',' << fmt17(es_s.back()) << ',' << fmt17(td3_s.back());
      }
      curve << '\n';
      curve.flush();  // keep partial curves on failure
    }

    const Mlp final_actor = trainer.agent().actor;
    const Mlp final_mean = trainer.mean_as_network();
    save_checkpoint(final_actor,
                    (fs::path(outdir) / ("actor_seed" + std::to_string(seed) + ".ckpt")).string());
    save_checkpoint(final_mean,
                    (fs::path(outdir) / ("es_mean_seed" + std::to_string(seed) + ".ckpt")).string());

    if (!result.reports.empty()) {
      const IterationReport& last = result.reports.back();
      result.final_score = std::max(last.td3_eval, last.es_eval);
    } else {
      auto env = make_env(cfg.env_name);
      result.final_score = std::max(eval_policy_once(final_actor, *env),
                                    eval_policy_once(final_mean, *env));
    }
    result.ok = true;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

void finalize_stats(ExperimentSummary& summary) {
  for (const SeedResult& s : summary.seeds) {
    if (s.ok) summary.final_scores.push_back(s.final_score);
  }
  summary.all_ok = summary.final_scores.size() == summary.seeds.size() &&
                   !summary.seeds.empty();
  const std::size_t n = summary.final_scores.size();
  if (n == 0) return;
  double sum = 0.0;
  for (double v : summary.final_scores) sum += v;
  summary.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : summary.final_scores) {
    sq += (v - summary.mean) * (v - summary.mean);
  }
  summary.stddev = std::sqrt(sq / static_cast<double>(n));
  std::vector<double> sorted = summary.final_scores;
  std::sort(sorted.begin(), sorted.end());
  summary.median = (n % 2 == 1)
                       ? sorted[n / 2]
                       : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

std::string curve_file_name(std::uint64_t seed) {
  return "curve_seed" + std::to_string(seed) + ".csv";
}

std::vector<double> trailing_moving_average(std::span<const double> x,
                                            int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t beg = (i + 1 >= static_cast<std::size_t>(window))
                                ? i + 1 - static_cast<std::size_t>(window)
                                : 0;
    double sum = 0.0;
    for (std::size_t k = beg; k <= i; ++k) sum += x[k];
    out[i] = sum / static_cast<double>(i - beg + 1);
  }
  return out;
}

ExperimentSummary run_experiment(const RunConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& outdir,
                                 const ExperimentOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  config.validate();
  fs::create_directories(outdir);

  ExperimentSummary summary;
  summary.seeds.resize(seeds.size());

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      summary.seeds[i] = run_one_seed(config, seeds[i], outdir, options);
    }
  } else {
    // Seeds are fully independent runs; fan them out in waves.
    for (std::size_t base = 0; base < seeds.size();
         base += static_cast<std::size_t>(jobs)) {
      const std::size_t end =
          std::min(seeds.size(), base + static_cast<std::size_t>(jobs));
      std::vector<std::future<SeedResult>> wave;
      for (std::size_t i = base; i < end; ++i) {
        wave.push_back(std::async(std::launch::async, run_one_seed, config,
                                  seeds[i], outdir, options));
      }
      for (std::size_t i = base; i < end; ++i) {
        summary.seeds[i] = wave[i - base].get();
      }
    }
  }

  finalize_stats(summary);

  std::ofstream out((fs::path(outdir) / "summary.json").string());
  write_summary_json(summary, out);
  return summary;
}

void write_summary_json(const ExperimentSummary& summary, std::ostream& out) {
  out << "{\n  \"seeds\": [";
  for (std::size_t i = 0; i < summary.seeds.size(); ++i) {
    out << (i ? ", " : "") << summary.seeds[i].seed;
  }
  out << "],\n  \"failed_seeds\": [";
  bool first = true;
  for (const SeedResult& s : summary.seeds) {
    if (!s.ok) {
      out << (first ? "" : ", ") << s.seed;
      first = false;
    }
  }
  out << "],\n  \"final_scores\": [";
  for (std::size_t i = 0; i < summary.final_scores.size(); ++i) {
    out << (i ? ", " : "") << fmt17(summary.final_scores[i]);
  }
  out << "],\n";
  out << "  \"mean\": " << fmt17(summary.mean) << ",\n";
  out << "  \"std\": " << fmt17(summary.stddev) << ",\n";
  out << "  \"median\": " << fmt17(summary.median) << "\n}\n";
}

ExperimentSummary recompute_summary_from_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("curve_seed") && name.ends_with(".csv")) {
      files.push_back(entry.path().string());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("no curve_seed*.csv files in " + dir);
  }
  std::sort(files.begin(), files.end());

  ExperimentSummary summary;
  for (const std::string& path : files) {
    SeedResult sr;
    const std::string stem = fs::path(path).filename().string();
    sr.seed = std::stoull(stem.substr(10, stem.size() - 14));

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    {
      std::istringstream hs(header);
      std::string c;
      while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    const auto col_of = [&](const std::string& name) {
      const auto it = std::find(cols.begin(), cols.end(), name);
      if (it == cols.end()) {
        throw std::runtime_error(path + ": missing column " + name);
      }
      return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t es_col = col_of("es_eval");
    const std::size_t td3_col = col_of("td3_eval");

    std::string line, last;
    while (std::getline(in, line)) {
      if (!line.empty()) last = line;
    }
    if (!last.empty()) {
      std::vector<std::string> fields;
      std::istringstream ls(last);
      std::string f;
      while (std::getline(ls, f, ',')) fields.push_back(f);
      sr.final_score = std::max(std::stod(fields.at(td3_col)),
                                std::stod(fields.at(es_col)));
      sr.ok = true;
    }
    summary.seeds.push_back(std::move(sr));
  }
  finalize_stats(summary);
  return summary;
}

RunConfig apply_ablation(RunConfig config, const std::string& mode) {
  if (mode == "full") return config;
  if (mode == "td3_only") {
    config.es_generations_per_iter = 0;
    config.ratio = SampleRatio{0.0, 0.0, 1.0};
    return config;
  }
  if (mode == "es_only") {
    config.td3_frames_per_iter = 0;
    config.overwrite_enabled = false;
    return config;
  }
  if (mode == "single_buffer") {
    config.route_all_to_noisy = true;
    config.ratio = SampleRatio{0.0, 0.0, 1.0};
    return config;
  }
  throw std::invalid_argument(
      "unknown ablation mode '" + mode +
      "' (expected full, td3_only, es_only or single_buffer)");
}

}  // namespace estd3
