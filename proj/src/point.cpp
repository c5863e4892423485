#include "lipzoom/point.hpp"

#include <sstream>

namespace lipzoom {

TreePath::TreePath(std::vector<std::uint32_t> v) : idx(std::move(v)) {
  while (!idx.empty() && idx.back() == 0) idx.pop_back();
}

const char* kind_name(PointKind k) {
  switch (k) {
    case PointKind::real1d: return "real1d";
    case PointKind::realvec: return "realvec";
    case PointKind::tree_path: return "tree_path";
    case PointKind::index: return "index";
  }
  return "unknown";
}

std::string to_string(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  switch (kind_of(p)) {
    case PointKind::real1d: os << std::get<double>(p); break;
    case PointKind::realvec: {
      os << '(';
      const auto& v = std::get<std::vector<double>>(p);
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      os << ')';
      break;
    }
    case PointKind::tree_path: {
      os << '[';
      const auto& v = std::get<TreePath>(p).idx;
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "." : "") << v[i];
      os << ']';
      break;
    }
    case PointKind::index: os << '#' << std::get<std::size_t>(p); break;
  }
  return os.str();
}

}  // namespace lipzoom
