#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipzoom/space.hpp"

namespace lipzoom {

enum class Feedback { bandit, full, double_feedback };

const char* feedback_name(Feedback f);
Feedback parse_feedback(const std::string& s);

// Reward distribution around the expected payoff. Bernoulli rewards lie in
// {0,1}; the additive models return mu + z for mean-zero noise z and may
// leave [0,1].
struct NoiseModel {
  enum class Kind { bernoulli, deterministic, normal, point_mass, sharp_peak };

  Kind kind = Kind::bernoulli;
  double sigma = 0.1;           // normal
  std::vector<double> values;   // point_mass atoms
  std::vector<double> probs;    // point_mass masses
  double alpha = 0.5;           // sharp_peak density exponent, in (0,1)
  double spread = 0.5;          // sharp_peak support half-width

  static NoiseModel bernoulli() { return {}; }
  static NoiseModel deterministic();
  static NoiseModel normal(double sigma);
  static NoiseModel point_mass(std::vector<double> values, std::vector<double> probs);
  static NoiseModel sharp_peak(double alpha, double spread = 0.5);

  void validate() const;
  double sample(double mu, Rng& rng) const;
  json describe() const;
};

class Environment {
 public:
  Environment(SpacePtr space, NoiseModel noise, Feedback feedback);
  virtual ~Environment() = default;

  const MetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const NoiseModel& noise() const { return noise_; }
  Feedback feedback() const { return feedback_; }

  virtual std::string name() const = 0;
  virtual double mu(const Point& x) const = 0;
  virtual double mu_star() const = 0;
  // False when mu_star is estimated on the grid rather than known in closed form.
  virtual bool mu_star_exact() const { return true; }
  // Some arm attaining mu_star, when known.
  virtual std::optional<Point> optimum() const { return std::nullopt; }
  // Lipschitz constant the instance promises; relaxed instances promise none.
  virtual double lipschitz() const { return 1.0; }
  virtual bool relaxed() const { return false; }
  virtual double truncation_error() const { return 0.0; }

  // Realized payoffs of one round at the queried points. `round` keys any
  // per-round shared randomness; `rng` is the round's environment stream.
  virtual void sample(std::uint64_t round, std::span<const Point> queries, std::span<double> out,
                      Rng& rng) const;

  virtual json describe() const;

 protected:
  virtual json parameters() const { return json::object(); }

 private:
  SpacePtr space_;
  NoiseModel noise_;
  Feedback feedback_;
};

using EnvPtr = std::shared_ptr<const Environment>;

// Environment given by a payoff closure.
class FunctionEnvironment : public Environment {
 public:
  using Payoff = std::function<double(const Point&)>;

  FunctionEnvironment(SpacePtr space, std::string name, Payoff mu, std::optional<double> mu_star,
                      std::optional<Point> optimum, json params, NoiseModel noise = {},
                      Feedback feedback = Feedback::bandit, double lipschitz = 1.0);

  std::string name() const override { return name_; }
  double mu(const Point& x) const override { return mu_(x); }
  double mu_star() const override { return mu_star_; }
  bool mu_star_exact() const override { return exact_; }
  std::optional<Point> optimum() const override { return optimum_; }
  double lipschitz() const override { return lipschitz_; }

 protected:
  json parameters() const override { return params_; }

 private:
  std::string name_;
  Payoff mu_;
  double mu_star_ = 0.0;
  bool exact_ = true;
  std::optional<Point> optimum_;
  json params_;
  double lipschitz_;
};

// max(floor, peak - slope * D(x, center)).
EnvPtr make_cone(SpacePtr space, Point center, double peak = 0.9, double slope = 1.0,
                 double floor = 0.0, NoiseModel noise = {}, Feedback feedback = Feedback::bandit);

// Upper envelope of a few random cones; Lipschitz for any metric.
EnvPtr make_random_lipschitz(SpacePtr space, std::uint64_t seed, int cones = 3,
                             NoiseModel noise = {}, Feedback feedback = Feedback::bandit);

// Non-increasing shape f(z) = max(low, high - z^(1/alpha)) on [0,1].
struct Shape {
  double high = 1.0;
  double low = 0.0;
  double alpha = 1.0;

  double operator()(double z) const;
  void validate() const;
  json describe() const;
};

// mu(x) = f(D(x, S)) for a finite target set S.
EnvPtr make_target_instance(SpacePtr space, std::vector<Point> targets, Shape shape,
                            NoiseModel noise = {}, Feedback feedback = Feedback::bandit);

// D_f(x, y) = f(0) - f(D(x, y)) over a base space, for a non-increasing f.
// Flagged quasimetric: the triangle inequality is not promised.
class QuasiSpace : public MetricSpace {
 public:
  using ShapeFn = std::function<double(double)>;

  QuasiSpace(SpacePtr base, ShapeFn f, json shape_description = json::object());

  PointKind point_kind() const override { return base_->point_kind(); }
  std::string name() const override { return "quasi(" + base_->name() + ")"; }
  double distance(const Point& x, const Point& y) const override;
  bool quasimetric() const override { return true; }
  double resolution() const override { return base_->resolution(); }
  bool contains(const Point& p) const override { return base_->contains(p); }
  std::optional<Point> find_uncovered(std::span<const Ball> balls) const override;
  std::vector<Point> mesh(std::size_t target) const override { return base_->mesh(target); }
  Point sample(Rng& rng) const override { return base_->sample(rng); }
  json describe() const override;

  // The base-space ball equal to the quasi ball.
  Ball base_ball(const Ball& b) const;

 private:
  SpacePtr base_;
  ShapeFn f_;
  double f0_;
  json shape_;
};

std::shared_ptr<QuasiSpace> quasi_distance_transform(SpacePtr base, QuasiSpace::ShapeFn f,
                                                     json shape_description = json::object());

// The (log t) family around a limit point: baseline mu_0(x) = 1/2 - D(x, x*)/8
// and member i adds (3/4) max(0, r_i/3 - D(x, c_i)) where r_i = D(x_i, x*)
// and c_i is x_i (default) or x*.
class LogTFamily : public Environment {
 public:
  enum class Center { approach_point, limit_point };

  LogTFamily(SpacePtr space, Point limit, std::vector<Point> approach, std::size_t member,
             Center center = Center::approach_point, NoiseModel noise = {},
             Feedback feedback = Feedback::bandit);

  std::string name() const override { return "logt"; }
  double mu(const Point& x) const override;
  double mu_star() const override;
  std::optional<Point> optimum() const override;
  double lipschitz() const override { return 7.0 / 8.0; }
  double radius(std::size_t i) const { return radii_.at(i - 1); }
  double baseline(const Point& x) const;

 protected:
  json parameters() const override;

 private:
  Point limit_;
  std::vector<Point> approach_;
  std::vector<double> radii_;
  std::size_t member_;
  Center center_;
};

// Largest |mu(x) - mu(y)| / D(x, y) - lipschitz over sampled pairs, together
// with the worst pair; non-positive means the audit passed.
struct LipschitzAudit {
  double worst_excess = -1.0;
  double worst_ratio = 0.0;
  std::size_t pairs = 0;
};
LipschitzAudit lipschitz_audit(const MetricSpace& space,
                               const std::function<double(const Point&)>& f, double lipschitz,
                               std::size_t pairs, std::uint64_t seed);

}  // namespace lipzoom
