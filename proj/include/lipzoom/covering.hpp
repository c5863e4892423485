#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lipzoom/space.hpp"

namespace lipzoom {

enum class CountMode { exact, greedy };

using DistanceMatrix = std::vector<std::vector<double>>;

DistanceMatrix distance_matrix(const MetricSpace& space, std::span<const Point> points);

// Minimal number of sets of diameter < r covering the points. Exact mode is a
// minimum clique cover (at most 20 points); greedy mode is an upper bound.
std::size_t covering_number(const DistanceMatrix& d, double r, CountMode mode);
std::size_t covering_number(const MetricSpace& space, std::span<const Point> points, double r,
                            CountMode mode);

// Largest subset with pairwise distances >= r. Exact mode is a maximum clique
// search (at most 20 points); greedy mode is an index-order lower bound.
std::size_t packing_number(const DistanceMatrix& d, double r, CountMode mode);
std::size_t packing_number(const MetricSpace& space, std::span<const Point> points, double r,
                           CountMode mode);

inline constexpr std::size_t kExactCountLimit = 20;

}  // namespace lipzoom
