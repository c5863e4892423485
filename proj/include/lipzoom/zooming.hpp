#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipzoom/algorithm.hpp"
#include "lipzoom/decomposition.hpp"
#include "lipzoom/radius.hpp"

namespace lipzoom {

// One active arm of the current phase.
struct ArmRecord {
  Point arm;
  ArmStats stats;
  std::uint64_t activated = 0;
  int layer = 0;
  double estimate = 0.0;
  double radius = 0.0;
  double index = 0.0;
  bool counted = false;  // radius >= rho, so the arm uses up quota
};

enum class ZoomingVariant { plain, quota, pmo };

const char* variant_name(ZoomingVariant v);
ZoomingVariant parse_variant(const std::string& s);

struct ZoomingOptions {
  ZoomingVariant variant = ZoomingVariant::plain;
  RadiusPolicy radius;
  // Index = estimate + multiplier * radius; 0 picks 2 (3 for pmo).
  double multiplier = 0.0;
  // Required by the quota and pmo variants.
  DecompositionPtr decomposition;
  // Quota exponent d; negative takes the decomposition's dimension.
  double quota_dim = -1.0;
  std::size_t net_cap = 1u << 20;
};

class Zooming;

// Hooks for audits; all default to no-ops.
class ZoomingObserver {
 public:
  virtual ~ZoomingObserver() = default;
  virtual void phase_started(const Zooming&, std::uint64_t /*round*/) {}
  virtual void after_activation(const Zooming&, std::uint64_t /*round*/, std::size_t /*arm*/) {}
  // After the activation step, before the selected arm is played.
  virtual void before_play(const Zooming&, std::uint64_t /*round*/) {}
  // `before` is the estimate and radius the selection used.
  virtual void after_play(const Zooming&, std::uint64_t /*round*/, std::size_t /*arm*/,
                          const Estimate& /*before*/) {}
  virtual void phase_ended(const Zooming&, std::uint64_t /*round*/) {}
};

// Phased zooming: phase i lasts 2^i rounds and starts with no active arms.
// Each round activates one uncovered eligible arm if there is one, then
// plays the active arm of largest index (earliest activation on ties).
//
// quota: an arm is eligible when its layer has fewer than floor(rho^-d)
// active arms of radius >= rho, rho = T^(-1/(d+2)).
// pmo: eligible arms are a coarse net plus the target set S_lambda (while its
// quota allows), with lambda chosen from the previous phase's sharp arms.
class Zooming : public Algorithm {
 public:
  Zooming(SpacePtr space, ZoomingOptions options = {});

  std::string name() const override;
  Feedback feedback() const override { return Feedback::bandit; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  void finish() override;
  int phase() const override { return phase_; }
  json describe() const override;

  void add_observer(ZoomingObserver* observer) { observers_.push_back(observer); }

  const MetricSpace& space() const { return *space_; }
  const ZoomingOptions& options() const { return opts_; }
  const Decomposition& decomposition() const { return *decomp_; }
  double multiplier() const { return multiplier_; }
  const std::vector<ArmRecord>& arms() const { return arms_; }
  std::span<const Ball> balls() const { return balls_; }
  std::uint64_t phase_length() const { return length_; }
  std::uint64_t round_in_phase() const { return length_ - left_; }
  // Index of the arm played in the current round.
  std::size_t current() const { return current_; }

  double rho() const { return rho_; }
  std::uint64_t quota() const { return quota_; }
  const std::vector<std::uint64_t>& layer_counts() const { return counts_; }
  int target() const { return target_; }
  double eps0() const { return eps0_; }
  const std::vector<Point>& net() const { return net_; }
  double quota_dim() const { return dim_; }

 private:
  void begin_phase(std::uint64_t t);
  void end_phase(std::uint64_t t);
  void choose_target(std::uint64_t t);
  void build_net();
  std::vector<bool> eligible_layers() const;
  std::optional<Point> find_candidate();
  void activate(const Point& x, std::uint64_t t);
  void refresh(std::size_t i, std::uint64_t t);

  SpacePtr space_;
  ZoomingOptions opts_;
  DecompositionPtr decomp_;
  double multiplier_;
  double dim_ = 0.0;
  std::vector<ZoomingObserver*> observers_;

  int phase_ = 0;
  std::uint64_t length_ = 0;
  std::uint64_t left_ = 0;
  std::vector<ArmRecord> arms_;
  std::vector<Ball> balls_;
  std::size_t current_ = 0;

  // Coverage bookkeeping: a verified layer was fully covered at the last
  // check; since then at most the hint ball has shrunk.
  std::vector<bool> verified_;
  std::optional<Ball> hint_;

  double rho_ = 0.0;
  std::uint64_t quota_ = 0;
  std::vector<std::uint64_t> counts_;
  int target_ = 0;
  double eps0_ = 0.0;
  std::vector<Point> net_;
};

}  // namespace lipzoom
