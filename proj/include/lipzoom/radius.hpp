#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lipzoom/environment.hpp"

namespace lipzoom {

// sqrt(8 i / (1 + n)).
double confidence_radius(std::uint64_t n, int phase);

// alpha / (1 + n) + sqrt(alpha (1 - mean) / (1 + n)).
double sharp_radius_alpha(std::uint64_t n, double mean, double alpha);
// As above with alpha = c_alpha * phase.
double sharp_radius(std::uint64_t n, double mean, int phase, double c_alpha);

// Observed rewards of one arm within a phase.
struct ArmStats {
  std::uint64_t n = 0;
  double sum = 0.0;
  double last = 0.0;
  std::map<double, std::uint64_t> counts;  // point-mass policy only
  std::vector<double> samples;             // sharp-peak policy only

  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

struct Estimate {
  double value = 0.0;
  double radius = 0.0;
};

// Estimator and confidence radius pair driving the zooming index.
struct RadiusPolicy {
  enum class Kind { standard, sharp, deterministic, point_mass, sharp_peak, normal };

  Kind kind = Kind::standard;
  double c_alpha = 16.0;        // sharp: alpha = c_alpha * phase
  double sigma = 0.1;           // normal
  double peak_alpha = 0.5;      // sharp_peak density exponent
  double peak_constant = 64.0;  // sharp_peak C
  std::vector<double> masses;   // point_mass noise atoms
  std::vector<double> probs;    // point_mass noise masses
  double mass_constant = 8.0;   // point_mass: c_P = constant * ln(|S| + k) / (p - q)

  static RadiusPolicy standard() { return {}; }
  static RadiusPolicy sharp(double c_alpha = 16.0);
  static RadiusPolicy deterministic();
  static RadiusPolicy normal(double sigma);
  static RadiusPolicy point_mass(std::vector<double> values, std::vector<double> probs);
  static RadiusPolicy sharp_peak(double alpha, double constant = 64.0);
  // The policy matching a noise model; Bernoulli noise maps to standard.
  static RadiusPolicy for_noise(const NoiseModel& noise);

  void validate() const;
  bool keeps_counts() const { return kind == Kind::point_mass; }
  bool keeps_samples() const { return kind == Kind::sharp_peak; }
  void record(ArmStats& stats, double reward) const;
  // Estimate and radius after the recorded rewards, in a phase of the given index.
  Estimate estimate(const ArmStats& stats, int phase) const;
  // Number of samples after which the point-mass estimator takes over.
  double point_mass_threshold(int phase) const;
  std::string name() const;
  json describe() const;
};

RadiusPolicy::Kind parse_radius_kind(const std::string& s);

}  // namespace lipzoom
