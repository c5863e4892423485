#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lipzoom {

// A finite prefix of an end of a rooted tree; the end continues with child 0
// forever. Trailing zeros are stripped so equal ends compare equal.
struct TreePath {
  std::vector<std::uint32_t> idx;

  TreePath() = default;
  explicit TreePath(std::vector<std::uint32_t> v);

  std::uint32_t at(std::size_t level) const { return level < idx.size() ? idx[level] : 0u; }
  auto operator<=>(const TreePath&) const = default;
};

using Point = std::variant<double, std::vector<double>, TreePath, std::size_t>;

enum class PointKind { real1d = 0, realvec = 1, tree_path = 2, index = 3 };

inline PointKind kind_of(const Point& p) { return static_cast<PointKind>(p.index()); }
const char* kind_name(PointKind k);
std::string to_string(const Point& p);

struct Ball {
  Point center;
  double radius = 0.0;
  bool closed = false;
};

struct Net {
  double resolution = 0.0;
  std::vector<Point> points;
};

class LipzoomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KindMismatch : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

class ValidationError : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

class SizeError : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

class ResolutionError : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

class PerfectnessViolated : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

class StrengthUnreachable : public LipzoomError {
 public:
  StrengthUnreachable(int level, const std::string& msg) : LipzoomError(msg), level(level) {}
  int level;
};

class CapExceeded : public LipzoomError {
 public:
  using LipzoomError::LipzoomError;
};

}  // namespace lipzoom
