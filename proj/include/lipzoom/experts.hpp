#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipzoom/algorithm.hpp"

namespace lipzoom {

// Full-feedback algorithm on a uniform mesh. Phase i lasts T = 2^i rounds and
// queries every point of a greedy delta-net each round, delta = T^(-1/(b+2))
// (T^(-1/b) in uniform mode). Each round bets on the previous phase's
// empirical best point.
class NaiveExp : public Algorithm {
 public:
  NaiveExp(SpacePtr space, double b, bool uniform = false, std::size_t cap = 100000);

  std::string name() const override { return uniform_ ? "naive_exp_uniform" : "naive_exp"; }
  Feedback feedback() const override { return Feedback::full; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  std::span<const Point> queries() const override { return net_; }
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  int phase() const override { return phase_; }
  json describe() const override;

  double delta() const { return delta_; }
  static double phase_delta(double b, bool uniform, double T);

 private:
  void begin_phase(std::uint64_t t);

  SpacePtr space_;
  double b_;
  bool uniform_;
  std::size_t cap_;
  int phase_ = 0;
  std::uint64_t left_ = 0;
  double delta_ = 1.0;
  std::vector<Point> net_;
  std::vector<double> sums_;
  Point bet_;
  bool have_bet_ = false;
};

// Result of one exploration subroutine call.
struct ExplOutcome {
  Point chosen;
  double delta = 0.0;
  std::vector<Point> points;
  std::vector<double> means;
  // Losers for EXPL, winners for EXPL'.
  std::vector<bool> flags;
  std::vector<int> ranks;  // EXPL' only
  bool fallback = false;   // EXPL' found no winner
};

// The exploration subroutine as a state machine: samples each point of its
// sample set n times in order, then decides.
//
// expl: S is a delta-covering set of at most k points; x is a loser when some
// y has mean(y) - mean(x) > 2r + delta; returns the order-maximal point in
// the closed delta-balls around non-losers.
// expl_prime: S is the union of per-rank covering sets; x dominates y when
// mean(x) - mean(y) > 2r; returns an undominated point of largest rank.
class ExplRun {
 public:
  enum class Mode { expl, expl_prime };

  ExplRun(const MetricSpace& space, Mode mode, std::size_t k, std::uint64_t n, double r);

  bool done() const { return done_; }
  const Point& next() const { return outcome_.points[cursor_]; }
  void record(double reward);
  std::uint64_t budget() const { return outcome_.points.size() * n_; }
  const ExplOutcome& outcome() const { return outcome_; }

 private:
  void decide();

  const MetricSpace* space_;
  Mode mode_;
  std::uint64_t n_;
  double r_;
  std::vector<double> sums_;
  std::size_t cursor_ = 0;
  std::uint64_t pulls_ = 0;
  bool done_ = false;
  ExplOutcome outcome_;
};

ExplRun::Mode parse_expl_mode(const std::string& s);
const char* expl_mode_name(ExplRun::Mode m);

// Runs the subroutine to completion against an environment's reward draws.
ExplOutcome run_expl(const Environment& env, ExplRun::Mode mode, std::size_t k, std::uint64_t n,
                     double r, std::uint64_t seed);

// Bandit algorithm for well-ordered spaces. Phase i lasts T = 2^(2^i) rounds:
// exploration with k = floor(sqrt(g(T)/ln T)), n = floor(k ln T),
// r = 4 sqrt(ln T / n), then the result is played to the end of the phase.
// g(t) = (ln t)^p. Phases beyond the cap keep playing the last result.
class WellOrderedBanditWrapper : public Algorithm {
 public:
  WellOrderedBanditWrapper(SpacePtr space, double growth_power = 2.0, int max_phase = 5,
                           ExplRun::Mode mode = ExplRun::Mode::expl);

  std::string name() const override { return "well_ordered_bandit"; }
  Feedback feedback() const override { return Feedback::bandit; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  int phase() const override { return phase_; }
  json describe() const override;

  struct Schedule {
    double T;
    std::size_t k;
    std::uint64_t n;
    double r;
  };
  Schedule schedule(int phase) const;
  double growth(double t) const;

 private:
  void begin_phase(std::uint64_t t);

  SpacePtr space_;
  double power_;
  int max_phase_;
  ExplRun::Mode mode_;
  int phase_ = 0;
  std::uint64_t left_ = 0;
  std::optional<ExplRun> expl_;
  Point result_;
};

// Double-feedback algorithm for well-ordered spaces. Phase i lasts T = 2^i
// rounds; the peeks run exploration with k = n = floor(sqrt T) and
// r = 4 sqrt(T^(1/4) / n) (or 4 sqrt(ln T / n) with log_radius); every bet of
// a phase is the previous phase's result.
class FreePeekWrapper : public Algorithm {
 public:
  explicit FreePeekWrapper(SpacePtr space, bool log_radius = false,
                           ExplRun::Mode mode = ExplRun::Mode::expl);

  std::string name() const override { return "free_peek"; }
  Feedback feedback() const override { return Feedback::double_feedback; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  std::span<const Point> queries() const override { return {&peek_, 1}; }
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  int phase() const override { return phase_; }
  json describe() const override;

  double radius(double T, std::uint64_t n) const;
  const Point& bet() const { return bet_; }

 private:
  void begin_phase(std::uint64_t t);
  void end_phase(std::uint64_t t);

  SpacePtr space_;
  bool log_radius_;
  ExplRun::Mode mode_;
  int phase_ = 0;
  std::uint64_t left_ = 0;
  std::optional<ExplRun> expl_;
  Point bet_;
  Point peek_;
};

}  // namespace lipzoom
