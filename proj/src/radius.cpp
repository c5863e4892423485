#include "lipzoom/radius.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace lipzoom {

double confidence_radius(std::uint64_t n, int phase) {
  return std::sqrt(8.0 * phase / (1.0 + static_cast<double>(n)));
}

double sharp_radius_alpha(std::uint64_t n, double mean, double alpha) {
  const double m = 1.0 + static_cast<double>(n);
  return alpha / m + std::sqrt(alpha * std::max(0.0, 1.0 - mean) / m);
}

double sharp_radius(std::uint64_t n, double mean, int phase, double c_alpha) {
  return sharp_radius_alpha(n, mean, c_alpha * phase);
}

RadiusPolicy RadiusPolicy::sharp(double c_alpha) {
  RadiusPolicy p;
  p.kind = Kind::sharp;
  p.c_alpha = c_alpha;
  return p;
}

RadiusPolicy RadiusPolicy::deterministic() {
  RadiusPolicy p;
  p.kind = Kind::deterministic;
  return p;
}

RadiusPolicy RadiusPolicy::normal(double sigma) {
  RadiusPolicy p;
  p.kind = Kind::normal;
  p.sigma = sigma;
  return p;
}

RadiusPolicy RadiusPolicy::point_mass(std::vector<double> values, std::vector<double> probs) {
  RadiusPolicy p;
  p.kind = Kind::point_mass;
  p.masses = std::move(values);
  p.probs = std::move(probs);
  return p;
}

RadiusPolicy RadiusPolicy::sharp_peak(double alpha, double constant) {
  RadiusPolicy p;
  p.kind = Kind::sharp_peak;
  p.peak_alpha = alpha;
  p.peak_constant = constant;
  return p;
}

RadiusPolicy RadiusPolicy::for_noise(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseModel::Kind::bernoulli: return standard();
    case NoiseModel::Kind::deterministic: return deterministic();
    case NoiseModel::Kind::normal: return normal(noise.sigma);
    case NoiseModel::Kind::point_mass: return point_mass(noise.values, noise.probs);
    case NoiseModel::Kind::sharp_peak: return sharp_peak(noise.alpha);
  }
  return standard();
}

void RadiusPolicy::validate() const {
  switch (kind) {
    case Kind::sharp:
      if (!(c_alpha > 0)) throw ValidationError("sharp radius multiplier must be positive");
      break;
    case Kind::normal:
      if (!(sigma > 0)) throw ValidationError("normal radius needs sigma > 0");
      break;
    case Kind::sharp_peak:
      if (!(peak_alpha > 0 && peak_alpha < 1)) throw ValidationError("sharp peak alpha must lie in (0,1)");
      if (!(peak_constant > 0)) throw ValidationError("sharp peak constant must be positive");
      break;
    case Kind::point_mass: {
      if (masses.empty() || masses.size() != probs.size())
        throw ValidationError("point-mass descriptor needs matching values and masses");
      double total = 0;
      for (double p : probs) {
        if (!(p > 0)) throw ValidationError("point masses must be positive");
        total += p;
      }
      if (total > 1.0 + 1e-9) throw ValidationError("point masses exceed 1");
      if (!(mass_constant > 0)) throw ValidationError("point-mass constant must be positive");
      break;
    }
    default: break;
  }
}

void RadiusPolicy::record(ArmStats& stats, double reward) const {
  ++stats.n;
  stats.sum += reward;
  stats.last = reward;
  if (keeps_counts()) ++stats.counts[reward];
  if (keeps_samples()) stats.samples.push_back(reward);
}

namespace {

struct MassShape {
  double p = 0, q = 0, top_max = 0;
  std::size_t top = 0;
};

MassShape mass_shape(const std::vector<double>& values, const std::vector<double>& probs) {
  MassShape s;
  s.p = *std::max_element(probs.begin(), probs.end());
  s.top_max = -INFINITY;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == s.p) {
      ++s.top;
      s.top_max = std::max(s.top_max, values[i]);
    } else {
      s.q = std::max(s.q, probs[i]);
    }
  }
  return s;
}

}  // namespace

double RadiusPolicy::point_mass_threshold(int phase) const {
  const auto s = mass_shape(masses, probs);
  const double k = static_cast<double>(s.top) + (s.q > 0 ? 1.0 / s.q : 0.0);
  const double c = mass_constant * std::log(static_cast<double>(s.top) + k) / (s.p - s.q);
  return c * phase * std::numbers::ln2;
}

Estimate RadiusPolicy::estimate(const ArmStats& stats, int phase) const {
  const double mean = stats.mean();
  switch (kind) {
    case Kind::standard: return {mean, confidence_radius(stats.n, phase)};
    case Kind::sharp:
      return {mean, sharp_radius(stats.n, std::min(mean, 1.0), phase, c_alpha)};
    case Kind::normal: return {mean, sigma * confidence_radius(stats.n, phase)};
    case Kind::deterministic:
      if (stats.n == 0) return {0.0, confidence_radius(0, phase)};
      return {stats.last, 0.0};
    case Kind::point_mass: {
      const double fallback_radius = confidence_radius(stats.n, phase);
      if (static_cast<double>(stats.n) < point_mass_threshold(phase)) return {mean, fallback_radius};
      const auto s = mass_shape(masses, probs);
      const double need = static_cast<double>(stats.n) * (s.p + s.q) / 2.0;
      double top = -INFINITY;
      for (const auto& [v, c] : stats.counts)
        if (static_cast<double>(c) >= need) top = std::max(top, v);
      if (!std::isfinite(top)) return {mean, fallback_radius};
      return {top - s.top_max, 0.0};
    }
    case Kind::sharp_peak: {
      // A fresh arm takes the one-sample radius, so the radius never grows.
      const double n = static_cast<double>(std::max<std::uint64_t>(stats.n, 1));
      const double r_hat = peak_constant * std::pow(phase / n, 1.0 / (1.0 - peak_alpha));
      if (stats.n == 0) return {0.0, r_hat};
      const double width = r_hat / 2.0;
      std::unordered_map<std::int64_t, std::uint64_t> bins;
      std::int64_t best = 0;
      std::uint64_t best_count = 0;
      for (double v : stats.samples) {
        const auto j = static_cast<std::int64_t>(std::floor(v / width));
        const auto c = ++bins[j];
        if (c > best_count || (c == best_count && j < best)) {
          best = j;
          best_count = c;
        }
      }
      return {(static_cast<double>(best) + 0.5) * width, r_hat};
    }
  }
  return {mean, confidence_radius(stats.n, phase)};
}

std::string RadiusPolicy::name() const {
  switch (kind) {
    case Kind::standard: return "standard";
    case Kind::sharp: return "sharp";
    case Kind::deterministic: return "deterministic";
    case Kind::point_mass: return "point_mass";
    case Kind::sharp_peak: return "sharp_peak";
    case Kind::normal: return "normal";
  }
  return "standard";
}

RadiusPolicy::Kind parse_radius_kind(const std::string& s) {
  if (s == "standard") return RadiusPolicy::Kind::standard;
  if (s == "sharp") return RadiusPolicy::Kind::sharp;
  if (s == "deterministic") return RadiusPolicy::Kind::deterministic;
  if (s == "point_mass") return RadiusPolicy::Kind::point_mass;
  if (s == "sharp_peak") return RadiusPolicy::Kind::sharp_peak;
  if (s == "normal") return RadiusPolicy::Kind::normal;
  throw ValidationError("unknown radius policy: " + s);
}

json RadiusPolicy::describe() const {
  json j{{"kind", name()}};
  switch (kind) {
    case Kind::sharp: j["c_alpha"] = c_alpha; break;
    case Kind::normal: j["sigma"] = sigma; break;
    case Kind::sharp_peak:
      j["alpha"] = peak_alpha;
      j["constant"] = peak_constant;
      break;
    case Kind::point_mass:
      j["values"] = masses;
      j["masses"] = probs;
      j["constant"] = mass_constant;
      break;
    default: break;
  }
  return j;
}

}  // namespace lipzoom
