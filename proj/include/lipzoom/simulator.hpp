#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lipzoom/algorithm.hpp"

namespace lipzoom {

struct RunOptions {
  std::uint64_t horizon = 4096;
  std::uint64_t seed = 0;
  // Extra checkpoints per doubling of t, on top of the powers of two.
  int checkpoints_per_octave = 1;
  bool phase_checkpoints = true;
  // Recompute the regret from the logged actions after the run.
  bool audit_accounting = false;
  json config = json::object();
};

struct Checkpoint {
  std::uint64_t t = 0;
  double regret = 0.0;  // t mu* - sum of mu(x_s)
  double reward = 0.0;  // realized reward of the played arms
  int phase = 0;
};

struct RegretTrace {
  std::string algorithm;
  std::string environment;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double mu_star = 0.0;
  std::vector<Checkpoint> points;
  // Rounds where mu(x) exceeded mu* by more than 1e-12.
  std::uint64_t excess_rounds = 0;
  bool accounting_checked = false;
  bool accounting_ok = true;
  json audit = json::object();
  json sidecar = json::object();
  std::string digest;

  double final_regret() const { return points.empty() ? 0.0 : points.back().regret; }
  // Regret at checkpoint t; throws if t is not a checkpoint.
  double regret_at(std::uint64_t t) const;
};

// Plays the algorithm against the environment for the horizon. Regret is
// pseudo-regret computed from mu; all randomness derives from the seed.
RegretTrace run(Algorithm& alg, const Environment& env, const RunOptions& opts);

struct RunSetup {
  std::unique_ptr<Algorithm> algorithm;
  EnvPtr environment;
};
using SetupFactory = std::function<RunSetup(std::uint64_t seed)>;

struct Aggregate {
  std::vector<std::uint64_t> t;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<double> reward;
  std::vector<RegretTrace> traces;
  std::size_t runs = 0;
};

// Runs one setup per seed on a thread pool and averages the traces over the
// checkpoints they share.
Aggregate replicate(const SetupFactory& factory, const RunOptions& opts,
                    const std::vector<std::uint64_t>& seeds, bool keep_traces = false,
                    unsigned threads = 0);

// Runs `jobs` independent tasks on a pool; tasks must not share mutable state.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& task,
                  unsigned threads = 0);

struct SlopeFit {
  bool defined = false;
  double gamma = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
  std::size_t points = 0;
  std::string note;
};

// Least-squares slope of log R against log t over checkpoints in [lo, hi].
SlopeFit slope_fit(const std::vector<std::uint64_t>& t, const std::vector<double>& regret,
                   std::uint64_t lo, std::uint64_t hi);
SlopeFit slope_fit(const RegretTrace& trace, std::uint64_t lo, std::uint64_t hi);
SlopeFit slope_fit(const Aggregate& agg, std::uint64_t lo, std::uint64_t hi);

std::string config_digest(const json& config);

void write_trace_csv(const std::string& path, const RegretTrace& trace);
void write_aggregate_csv(const std::string& path, const Aggregate& agg);
void write_json(const std::string& path, const json& j);
json trace_sidecar(const RegretTrace& trace);

}  // namespace lipzoom
