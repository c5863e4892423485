#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lipzoom/algorithm.hpp"

namespace lipzoom {

// UCB1 over K arms: each arm once, then argmax mean + sqrt(2 ln t / n).
// Ties go to the lowest arm index.
class Ucb1 {
 public:
  void reset(std::size_t arms);
  std::size_t select() const;
  void update(std::size_t arm, double reward);
  std::size_t arms() const { return counts_.size(); }
  std::uint64_t plays() const { return plays_; }
  std::uint64_t count(std::size_t arm) const { return counts_[arm]; }
  double mean(std::size_t arm) const { return means_[arm]; }

 private:
  std::vector<double> means_;
  std::vector<double> inv_sqrt_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t plays_ = 0;
  std::size_t unplayed_ = 0;
};

// UCB1 on a fixed finite arm list.
class Ucb1Policy : public Algorithm {
 public:
  explicit Ucb1Policy(std::vector<Point> arms);

  std::string name() const override { return "ucb1"; }
  Feedback feedback() const override { return Feedback::bandit; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  json describe() const override;

 private:
  std::vector<Point> arms_;
  Ucb1 ucb_;
  std::size_t current_ = 0;
};

// Mesh scale of the uniform-mesh algorithm in a phase of length t:
// (c t ln t)^(-1/(d+2)).
double naive_delta(double d, double c, double t);

// Phases of length 2^i; each runs a fresh UCB1 on a greedy delta-net.
class NaiveAlg : public Algorithm {
 public:
  NaiveAlg(SpacePtr space, double d, double c = 1.0, std::size_t net_cap = 1u << 22);

  std::string name() const override { return "naive"; }
  Feedback feedback() const override { return Feedback::bandit; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  int phase() const override { return phase_; }
  json describe() const override;

  double delta() const { return delta_; }
  const std::vector<Point>& net() const { return net_; }

 private:
  void begin_phase(std::uint64_t t);

  SpacePtr space_;
  double d_, c_;
  std::size_t net_cap_;
  int phase_ = 0;
  std::uint64_t left_ = 0;
  double delta_ = 1.0;
  std::vector<Point> net_;
  Ucb1 ucb_;
  std::size_t current_ = 0;
};

// Phase durations t_i = min(t*_i, t*_{i+1}, 2 sum_{j<i} t_j) with
// t*_k = 2 (N_k / e_k^2) ln(N_k / e_k^2), e_k = 2^-k; the sum clause starts at
// i = 2. counts[k-1] = N_k; the t*_{K+1} term is dropped when N_{K+1} is absent.
std::vector<double> boundary_schedule(const std::vector<double>& counts, int phases);

// Phase i runs UCB1 on the centers of a greedy 2^-i net for the scheduled duration.
class BoundaryAlg : public Algorithm {
 public:
  explicit BoundaryAlg(SpacePtr space, int max_phases = 24, std::size_t net_cap = 1u << 22);

  std::string name() const override { return "boundary"; }
  Feedback feedback() const override { return Feedback::bandit; }
  void start(std::uint64_t seed) override;
  const Point& act(std::uint64_t t) override;
  void observe(std::uint64_t t, double arm_reward, std::span<const double> values) override;
  int phase() const override { return phase_; }
  json describe() const override;

  const std::vector<double>& durations() const { return durations_; }

 private:
  double net_count(int k);
  void begin_phase(std::uint64_t t);

  SpacePtr space_;
  int max_phases_;
  std::size_t net_cap_;
  std::vector<double> counts_;
  std::vector<double> durations_;
  int phase_ = 0;
  std::uint64_t left_ = 0;
  std::vector<Point> net_;
  Ucb1 ucb_;
  std::size_t current_ = 0;
};

}  // namespace lipzoom
