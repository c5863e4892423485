#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lipzoom/environment.hpp"
#include "lipzoom/zooming.hpp"

namespace lipzoom {

struct DimensionReport {
  std::vector<double> scales;
  std::vector<double> counts;
  std::vector<double> multipliers;  // N_r r^d at the fitted d
  double dimension = 0.0;
  double residual = 0.0;
  bool log_covering = false;
  bool approximate = false;
  std::string note;

  json to_json() const;
};

// Dyadic scales 2^-lo .. 2^-hi.
std::vector<double> dyadic_scales(int lo, int hi);

// Slope of log N_r against log 1/r (log log N_r for the log-covering form),
// with N_r the greedy r-net size. Scales below the grid resolution are dropped.
DimensionReport covering_dimension_fit(const MetricSpace& space, const std::vector<double>& scales,
                                       bool log_covering = false, std::size_t cap = 1u << 22);

// Smallest d >= 0 with N(r) <= c r^-d at every scale, where N(r) covers the
// slab {x : r/2 < mu* - mu(x) <= r} of the mesh by sets of diameter < r/8.
// Exact by interval sweep on the unit interval, greedy elsewhere.
DimensionReport zooming_dimension_estimate(const Environment& env, double c,
                                           const std::vector<double>& scales,
                                           std::size_t mesh_target = 0);

// Per-phase audit of a zooming run against the true payoffs.
struct PhaseAudit {
  int phase = 0;
  bool clean = true;  // every update kept |estimate - mu| <= radius
  std::uint64_t lemma_violations = 0;    // badness > 3 * radius at play time
  std::uint64_t packing_violations = 0;  // D(x,y) <= min(badness)/3 at activation
  std::uint64_t pull_violations = 0;     // n > 72 i / badness^2 at phase end
  std::uint64_t arms = 0;
  bool complete = false;  // the phase ran its full length

  bool bounds_held() const {
    return lemma_violations == 0 && packing_violations == 0 && pull_violations == 0;
  }
};

class CleanRunAuditor : public ZoomingObserver {
 public:
  explicit CleanRunAuditor(const Environment& env) : env_(&env) {}

  void phase_started(const Zooming& z, std::uint64_t round) override;
  void after_activation(const Zooming& z, std::uint64_t round, std::size_t arm) override;
  void after_play(const Zooming& z, std::uint64_t round, std::size_t arm,
                  const Estimate& before) override;
  void phase_ended(const Zooming& z, std::uint64_t round) override;

  const std::vector<PhaseAudit>& phases() const { return phases_; }
  // Cross-tabulation of clean against bounds-held, over complete phases.
  json cross_tab() const;

 private:
  const Environment* env_;
  std::vector<double> badness_;
  std::vector<PhaseAudit> phases_;
};

// Checks that random probes lie in some active ball after the activation
// step, on every stride-th round.
class CoveringProbeAuditor : public ZoomingObserver {
 public:
  CoveringProbeAuditor(std::uint64_t seed, std::size_t probes = 200, std::uint64_t stride = 1)
      : rng_(derive_seed(seed, Purpose::probe)), probes_(probes), stride_(stride) {}

  void before_play(const Zooming& z, std::uint64_t round) override;

  std::uint64_t audited_rounds() const { return rounds_; }
  std::uint64_t violations() const { return violations_; }
  std::uint64_t probes() const { return probed_; }

 private:
  Rng rng_;
  std::size_t probes_;
  std::uint64_t stride_;
  std::uint64_t rounds_ = 0;
  std::uint64_t violations_ = 0;
  std::uint64_t probed_ = 0;
};

}  // namespace lipzoom
