#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lipzoom/algorithm.hpp"
#include "lipzoom/radius.hpp"
#include "lipzoom/simulator.hpp"

namespace lipzoom {

// JSON descriptors for spaces, instances and algorithms. Every factory
// throws ValidationError on unknown kinds or bad parameters.
SpacePtr make_space(const json& j);
// `seed` keys randomized instances that do not fix their own seed.
EnvPtr make_environment(const json& j, SpacePtr space, std::uint64_t seed);
std::unique_ptr<Algorithm> make_algorithm(const json& j, SpacePtr space, const Environment& env);

NoiseModel parse_noise(const json& j);
RadiusPolicy parse_radius(const json& j, const Environment& env);
Point parse_point(const MetricSpace& space, const json& j);
json point_json(const Point& p);

struct RunConfig {
  json space;
  json environment;
  json algorithm;
  std::uint64_t horizon = 4096;
  std::vector<std::uint64_t> seeds{0};
  int checkpoints_per_octave = 1;
  std::string out = "out";
  std::string label = "run";

  json to_json() const;
  // Builds one run setup per seed and checks feedback and point kinds.
  RunSetup build(std::uint64_t seed) const;
  void validate() const;
};

RunConfig parse_run_config(const json& j);
json load_json(const std::string& path);

}  // namespace lipzoom
