#include "lipzoom/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lipzoom {

const char* feedback_name(Feedback f) {
  switch (f) {
    case Feedback::bandit: return "bandit";
    case Feedback::full: return "full";
    case Feedback::double_feedback: return "double";
  }
  return "bandit";
}

Feedback parse_feedback(const std::string& s) {
  if (s == "bandit") return Feedback::bandit;
  if (s == "full") return Feedback::full;
  if (s == "double") return Feedback::double_feedback;
  throw ValidationError("unknown feedback mode '" + s + "'");
}

// ------------------------------------------------------------------- noise

NoiseModel NoiseModel::deterministic() {
  NoiseModel n;
  n.kind = Kind::deterministic;
  return n;
}

NoiseModel NoiseModel::normal(double sigma) {
  NoiseModel n;
  n.kind = Kind::normal;
  n.sigma = sigma;
  n.validate();
  return n;
}

NoiseModel NoiseModel::point_mass(std::vector<double> values, std::vector<double> probs) {
  NoiseModel n;
  n.kind = Kind::point_mass;
  n.values = std::move(values);
  n.probs = std::move(probs);
  n.validate();
  return n;
}

NoiseModel NoiseModel::sharp_peak(double alpha, double spread) {
  NoiseModel n;
  n.kind = Kind::sharp_peak;
  n.alpha = alpha;
  n.spread = spread;
  n.validate();
  return n;
}

void NoiseModel::validate() const {
  switch (kind) {
    case Kind::bernoulli:
    case Kind::deterministic: return;
    case Kind::normal:
      if (!(sigma > 0)) throw ValidationError("normal noise needs sigma > 0");
      return;
    case Kind::point_mass: {
      if (values.empty() || values.size() != probs.size())
        throw ValidationError("point-mass noise needs matching values and probabilities");
      double total = 0, mean = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] > 0)) throw ValidationError("point-mass probabilities must be positive");
        total += probs[i];
        mean += probs[i] * values[i];
      }
      if (std::abs(total - 1.0) > 1e-9) throw ValidationError("point-mass probabilities must sum to 1");
      if (std::abs(mean) > 1e-9) throw ValidationError("point-mass noise must have mean zero");
      return;
    }
    case Kind::sharp_peak:
      if (!(alpha > 0 && alpha < 1)) throw ValidationError("sharp-peak alpha must lie in (0,1)");
      if (!(spread > 0)) throw ValidationError("sharp-peak spread must be positive");
      return;
  }
}

double NoiseModel::sample(double mu, Rng& rng) const {
  switch (kind) {
    case Kind::bernoulli: return rng.uniform() < mu ? 1.0 : 0.0;
    case Kind::deterministic: return mu;
    case Kind::normal: {
      std::normal_distribution<double> z(0.0, sigma);
      return mu + z(rng);
    }
    case Kind::point_mass: {
      double u = rng.uniform();
      for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (u < probs[i]) return mu + values[i];
        u -= probs[i];
      }
      return mu + values.back();
    }
    case Kind::sharp_peak: {
      // Density proportional to |z|^-alpha on [-spread, spread].
      const double mag = spread * std::pow(rng.uniform(), 1.0 / (1.0 - alpha));
      return rng.uniform() < 0.5 ? mu - mag : mu + mag;
    }
  }
  return mu;
}

json NoiseModel::describe() const {
  switch (kind) {
    case Kind::bernoulli: return {{"kind", "bernoulli"}};
    case Kind::deterministic: return {{"kind", "deterministic"}};
    case Kind::normal: return {{"kind", "normal"}, {"sigma", sigma}};
    case Kind::point_mass: return {{"kind", "point_mass"}, {"values", values}, {"probs", probs}};
    case Kind::sharp_peak: return {{"kind", "sharp_peak"}, {"alpha", alpha}, {"spread", spread}};
  }
  return {};
}

// ------------------------------------------------------------- environment

Environment::Environment(SpacePtr space, NoiseModel noise, Feedback feedback)
    : space_(std::move(space)), noise_(std::move(noise)), feedback_(feedback) {
  if (!space_) throw ValidationError("environment needs a space");
  noise_.validate();
}

void Environment::sample(std::uint64_t, std::span<const Point> queries, std::span<double> out,
                         Rng& rng) const {
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = noise_.sample(mu(queries[i]), rng);
}

json Environment::describe() const {
  json j{{"kind", name()},
         {"mu_star", mu_star()},
         {"mu_star_exact", mu_star_exact()},
         {"lipschitz", lipschitz()},
         {"relaxed", relaxed()},
         {"truncation_error", truncation_error()},
         {"feedback", feedback_name(feedback_)},
         {"noise", noise_.describe()},
         {"space", space_->describe()}};
  j["parameters"] = parameters();
  if (auto opt = optimum()) j["optimum"] = to_string(*opt);
  return j;
}

FunctionEnvironment::FunctionEnvironment(SpacePtr space, std::string name, Payoff mu,
                                         std::optional<double> mu_star,
                                         std::optional<Point> optimum, json params,
                                         NoiseModel noise, Feedback feedback, double lipschitz)
    : Environment(std::move(space), std::move(noise), feedback),
      name_(std::move(name)),
      mu_(std::move(mu)),
      optimum_(std::move(optimum)),
      params_(std::move(params)),
      lipschitz_(lipschitz) {
  if (mu_star) {
    mu_star_ = *mu_star;
  } else {
    exact_ = false;
    mu_star_ = 0.0;
    for (const auto& p : this->space().mesh(1 << 16)) {
      const double v = mu_(p);
      if (v > mu_star_) {
        mu_star_ = v;
        optimum_ = p;
      }
    }
  }
}

EnvPtr make_cone(SpacePtr space, Point center, double peak, double slope, double floor,
                 NoiseModel noise, Feedback feedback) {
  if (!space->contains(center)) throw ValidationError("cone center lies outside the space");
  if (!(peak >= floor && peak <= 1.0 && floor >= 0.0)) throw ValidationError("cone needs 0 <= floor <= peak <= 1");
  if (!(slope >= 0.0)) throw ValidationError("cone slope must be non-negative");
  const MetricSpace* s = space.get();
  json params{{"center", to_string(center)}, {"peak", peak}, {"slope", slope}, {"floor", floor}};
  auto mu = [s, center, peak, slope, floor](const Point& x) {
    return std::max(floor, peak - slope * s->distance(x, center));
  };
  return std::make_shared<FunctionEnvironment>(std::move(space), "cone", mu, peak, center, params,
                                               std::move(noise), feedback, slope);
}

EnvPtr make_random_lipschitz(SpacePtr space, std::uint64_t seed, int cones, NoiseModel noise,
                             Feedback feedback) {
  if (cones < 1) throw ValidationError("random Lipschitz instance needs at least one cone");
  Rng rng(derive_seed(seed, Purpose::instance, 0x11f));
  std::vector<Point> centers;
  std::vector<double> heights;
  for (int i = 0; i < cones; ++i) {
    centers.push_back(space->sample(rng));
    heights.push_back(0.6 + 0.3 * rng.uniform());
  }
  const auto top = static_cast<std::size_t>(
      std::max_element(heights.begin(), heights.end()) - heights.begin());
  const MetricSpace* s = space.get();
  auto mu = [s, centers, heights](const Point& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
      v = std::max(v, heights[i] - s->distance(x, centers[i]));
    return v;
  };
  json params{{"seed", seed}, {"cones", cones}};
  params["centers"] = json::array();
  for (const auto& c : centers) params["centers"].push_back(to_string(c));
  params["heights"] = heights;
  return std::make_shared<FunctionEnvironment>(std::move(space), "random_lipschitz", mu,
                                               heights[top], centers[top], params,
                                               std::move(noise), feedback);
}

double Shape::operator()(double z) const {
  z = std::max(0.0, z);
  return std::max(low, high - (alpha == 1.0 ? z : std::pow(z, 1.0 / alpha)));
}

void Shape::validate() const {
  if (!(low >= 0.0 && low < high && high <= 1.0))
    throw ValidationError("shape needs 0 <= low < high <= 1");
  if (!(alpha > 0.0)) throw ValidationError("shape exponent must be positive");
}

json Shape::describe() const { return {{"high", high}, {"low", low}, {"alpha", alpha}}; }

EnvPtr make_target_instance(SpacePtr space, std::vector<Point> targets, Shape shape,
                            NoiseModel noise, Feedback feedback) {
  shape.validate();
  if (targets.empty()) throw ValidationError("target set must be non-empty");
  for (const auto& t : targets)
    if (!space->contains(t)) throw ValidationError("target point lies outside the space");
  const MetricSpace* s = space.get();
  auto mu = [s, targets, shape](const Point& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& t : targets) d = std::min(d, s->distance(x, t));
    return shape(d);
  };
  json params{{"shape", shape.describe()}};
  params["targets"] = json::array();
  for (const auto& t : targets) params["targets"].push_back(to_string(t));
  // Lipschitz only when the shape is; alpha < 1 makes it relaxed.
  const double lip = shape.alpha == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::make_shared<FunctionEnvironment>(std::move(space), "target", mu, shape(0.0),
                                               targets.front(), params, std::move(noise),
                                               feedback, lip);
}

// ------------------------------------------------------------- quasi space

QuasiSpace::QuasiSpace(SpacePtr base, ShapeFn f, json shape_description)
    : base_(std::move(base)), f_(std::move(f)), shape_(std::move(shape_description)) {
  f0_ = f_(0.0);
  double prev = f0_;
  for (int i = 1; i <= 4096; ++i) {
    const double v = f_(static_cast<double>(i) / 4096.0);
    if (v > prev + 1e-12) throw ValidationError("shape function must be non-increasing");
    if (v < -1e-12 || v > 1.0 + 1e-12) throw ValidationError("shape function must map into [0,1]");
    prev = v;
  }
}

double QuasiSpace::distance(const Point& x, const Point& y) const {
  return f0_ - f_(base_->distance(x, y));
}

Ball QuasiSpace::base_ball(const Ball& b) const {
  auto inside = [&](double z) {
    const double d = f0_ - f_(z);
    return b.closed ? d <= b.radius : d < b.radius;
  };
  const double top = base_->diameter();
  if (inside(top)) return Ball{b.center, 2.0, true};
  if (!inside(0.0)) return Ball{b.center, 0.0, false};
  double lo = 0.0, hi = top;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? lo : hi) = mid;
  }
  return Ball{b.center, lo, true};
}

std::optional<Point> QuasiSpace::find_uncovered(std::span<const Ball> balls) const {
  std::vector<Ball> base;
  base.reserve(balls.size());
  for (const auto& b : balls) base.push_back(base_ball(b));
  return base_->find_uncovered(base);
}

json QuasiSpace::describe() const {
  return {{"kind", "quasi"}, {"base", base_->describe()}, {"shape", shape_}, {"quasimetric", true}};
}

std::shared_ptr<QuasiSpace> quasi_distance_transform(SpacePtr base, QuasiSpace::ShapeFn f,
                                                     json shape_description) {
  return std::make_shared<QuasiSpace>(std::move(base), std::move(f), std::move(shape_description));
}

// ------------------------------------------------------------- log t family

LogTFamily::LogTFamily(SpacePtr space, Point limit, std::vector<Point> approach,
                       std::size_t member, Center center, NoiseModel noise, Feedback feedback)
    : Environment(std::move(space), std::move(noise), feedback),
      limit_(std::move(limit)),
      approach_(std::move(approach)),
      member_(member),
      center_(center) {
  if (member_ > approach_.size()) throw ValidationError("log t member index beyond the sequence");
  for (const auto& x : approach_) radii_.push_back(this->space().distance(x, limit_));
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0)) throw ValidationError("approach point coincides with the limit");
    if (i > 0 && !(radii_[i] < radii_[i - 1] / 2.0))
      throw ValidationError("approach radii must more than halve at every step");
  }
}

double LogTFamily::baseline(const Point& x) const {
  return 0.5 - space().distance(x, limit_) / 8.0;
}

double LogTFamily::mu(const Point& x) const {
  double v = baseline(x);
  if (member_ == 0) return v;
  const Point& c = center_ == Center::approach_point ? approach_[member_ - 1] : limit_;
  return v + 0.75 * std::max(0.0, radius(member_) / 3.0 - space().distance(x, c));
}

double LogTFamily::mu_star() const {
  if (member_ == 0) return 0.5;
  return std::max(0.5, mu(*optimum()));
}

std::optional<Point> LogTFamily::optimum() const {
  if (member_ == 0) return limit_;
  const Point& c = center_ == Center::approach_point ? approach_[member_ - 1] : limit_;
  return mu(c) >= 0.5 ? c : limit_;
}

json LogTFamily::parameters() const {
  json j{{"member", member_},
         {"limit", to_string(limit_)},
         {"center", center_ == Center::approach_point ? "approach_point" : "limit_point"},
         {"radii", radii_}};
  return j;
}

// ----------------------------------------------------------------- audits

LipschitzAudit lipschitz_audit(const MetricSpace& space,
                               const std::function<double(const Point&)>& f, double lipschitz,
                               std::size_t pairs, std::uint64_t seed) {
  LipschitzAudit out;
  Rng rng(derive_seed(seed, Purpose::probe, 0x11b));
  for (std::size_t i = 0; i < pairs; ++i) {
    Point x = space.sample(rng);
    std::optional<Point> y;
    if (i % 2 == 1) {
      // Close pairs probe the local slope.
      const double rho = std::ldexp(1.0, -static_cast<int>(1 + rng() % 20));
      y = space.sample_near(x, rho);
    }
    if (!y) y = space.sample(rng);
    const double d = space.distance(x, *y);
    if (!(d > 0.0)) continue;
    ++out.pairs;
    const double gap = std::abs(f(x) - f(*y));
    const double excess = gap - lipschitz * d;
    out.worst_ratio = std::max(out.worst_ratio, gap / d);
    out.worst_excess = std::max(out.worst_excess, excess);
  }
  return out;
}

}  // namespace lipzoom
