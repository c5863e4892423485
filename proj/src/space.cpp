#include "lipzoom/space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace lipzoom {

bool MetricSpace::covered(std::span<const Ball> balls, const Point& p) const {
  for (const auto& b : balls)
    if (in_ball(b, p)) return true;
  return false;
}

void MetricSpace::check_kind(const Point& p) const {
  if (kind_of(p) != point_kind())
    throw KindMismatch(std::string("point of kind ") + kind_name(kind_of(p)) + " used in " +
                       name() + " (expects " + kind_name(point_kind()) + ")");
}

std::optional<Net> MetricSpace::greedy_net(double delta, std::size_t cap) const {
  Net net{delta, {}};
  std::vector<Ball> balls;
  while (auto p = find_uncovered(balls)) {
    if (net.points.size() >= cap) return std::nullopt;
    net.points.push_back(*p);
    balls.push_back({*p, delta, false});
  }
  return net;
}

std::optional<Point> MetricSpace::sample_near(const Point&, double) const { return std::nullopt; }

std::vector<Point> MetricSpace::packing_in_ball(const Ball& ball, double separation,
                                                std::size_t cap) const {
  std::vector<Point> out;
  for (const auto& p : mesh(4096)) {
    if (!in_ball(ball, p)) continue;
    bool ok = true;
    for (const auto& q : out)
      if (distance(p, q) <= separation) {
        ok = false;
        break;
      }
    if (ok) {
      out.push_back(p);
      if (out.size() >= cap) break;
    }
  }
  return out;
}

CoverResult covering_oracle(const MetricSpace& space, std::span<const Ball> balls) {
  for (const auto& b : balls) space.check_kind(b.center);
  auto p = space.find_uncovered(balls);
  if (!p) return {true, std::nullopt};
  if (space.covered(balls, *p))
    throw LipzoomError("covering oracle witness " + to_string(*p) + " lies in an input ball");
  return {false, p};
}

CoverSet dyadic_covering_set(const MetricSpace& space, std::size_t k) {
  if (k == 0) throw ValidationError("covering oracle needs k >= 1");
  const double floor_delta = std::max(space.resolution(), 1e-12);
  // Distances are at most 1, so delta = 2 always gives a single point.
  CoverSet best;
  bool found = false;
  for (int j = -1; j < 200; ++j) {
    const double delta = std::ldexp(1.0, -j);
    auto net = space.greedy_net(delta, k);
    if (!net) break;
    best = {delta, std::move(net->points)};
    found = true;
    if (delta < floor_delta) break;
  }
  if (!found) throw ResolutionError("no dyadic net with at most " + std::to_string(k) + " points");
  return best;
}

// ---------------------------------------------------------------- interval

IntervalSpace::IntervalSpace(double exponent, double eta) : exponent_(exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw ValidationError("interval metric exponent must lie in (0,1]");
  if (!(eta > 0.0 && eta <= 0.5)) throw ValidationError("grid resolution must lie in (0,1/2]");
  cells_ = static_cast<std::int64_t>(std::llround(1.0 / eta));
  eta_ = 1.0 / static_cast<double>(cells_);
}

std::string IntervalSpace::name() const {
  return exponent_ == 1.0 ? "interval" : "interval^" + std::to_string(exponent_);
}

double IntervalSpace::metric(double gap) const {
  gap = std::abs(gap);
  return exponent_ == 1.0 ? gap : std::pow(gap, exponent_);
}

double IntervalSpace::reach(double r) const {
  if (r <= 0) return 0;
  return exponent_ == 1.0 ? r : std::pow(r, 1.0 / exponent_);
}

double IntervalSpace::distance(const Point& x, const Point& y) const {
  check_kind(x);
  check_kind(y);
  return metric(std::get<double>(x) - std::get<double>(y));
}

bool IntervalSpace::contains(const Point& p) const {
  if (kind_of(p) != PointKind::real1d) return false;
  const double v = std::get<double>(p);
  return v >= 0.0 && v <= 1.0;
}

std::pair<std::int64_t, std::int64_t> IntervalSpace::grid_range(const Ball& b) const {
  const double c = std::get<double>(b.center);
  const double w = reach(b.radius);
  auto inside = [&](std::int64_t k) { return in_ball(b, Point{grid_point(k)}); };
  if (w >= 2.0) return {0, cells_};
  auto lo = static_cast<std::int64_t>(std::ceil((c - w) / eta_));
  auto hi = static_cast<std::int64_t>(std::floor((c + w) / eta_));
  lo = std::clamp<std::int64_t>(lo, 0, cells_);
  hi = std::clamp<std::int64_t>(hi, 0, cells_);
  while (lo <= hi && !inside(lo)) ++lo;
  while (lo > 0 && inside(lo - 1)) --lo;
  while (hi >= lo && !inside(hi)) --hi;
  while (hi < cells_ && inside(hi + 1)) ++hi;
  return {lo, hi};
}

std::optional<std::int64_t> IntervalSpace::uncovered_in_ranges(
    std::span<const Ball> balls,
    std::span<const std::pair<std::int64_t, std::int64_t>> ranges) const {
  std::vector<std::pair<std::int64_t, std::int64_t>> cover;
  cover.reserve(balls.size());
  for (const auto& b : balls) {
    check_kind(b.center);
    auto r = grid_range(b);
    if (r.first <= r.second) cover.push_back(r);
  }
  std::sort(cover.begin(), cover.end());
  std::optional<std::int64_t> best;
  for (const auto& [a, b] : ranges) {
    std::int64_t cur = std::max<std::int64_t>(a, 0);
    const std::int64_t end = std::min(b, cells_);
    for (const auto& [lo, hi] : cover) {
      if (cur > end) break;
      if (hi < cur) continue;
      if (lo > cur) break;
      cur = hi + 1;
    }
    if (cur <= end && (!best || cur < *best)) best = cur;
  }
  return best;
}

std::optional<Point> IntervalSpace::find_uncovered(std::span<const Ball> balls) const {
  const std::pair<std::int64_t, std::int64_t> all{0, cells_};
  auto k = uncovered_in_ranges(balls, std::span(&all, 1));
  if (!k) return std::nullopt;
  return Point{grid_point(*k)};
}

std::optional<Point> IntervalSpace::find_uncovered_near(std::span<const Ball> balls,
                                                       const Ball& hint) const {
  check_kind(hint.center);
  const auto range = grid_range(hint);
  if (range.first > range.second) return std::nullopt;
  const double lo = grid_point(range.first), hi = grid_point(range.second);
  std::vector<Ball> near;
  for (const auto& b : balls) {
    check_kind(b.center);
    const double c = std::get<double>(b.center), w = reach(b.radius) + eta_;
    if (c + w >= lo && c - w <= hi) near.push_back(b);
  }
  auto k = uncovered_in_ranges(near, std::span(&range, 1));
  if (!k) return std::nullopt;
  return Point{grid_point(*k)};
}

std::optional<Net> IntervalSpace::greedy_net(double delta, std::size_t cap) const {
  if (!(delta > 0)) throw ValidationError("net resolution must be positive");
  std::int64_t step = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(reach(delta) / eta_)));
  while (step > 1 && metric(grid_point(step - 1)) >= delta) --step;
  while (step <= cells_ && metric(grid_point(step)) < delta) ++step;
  const std::int64_t count = cells_ / step + 1;
  if (static_cast<std::uint64_t>(count) > cap) return std::nullopt;
  Net net{delta, {}};
  net.points.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k <= cells_; k += step) net.points.emplace_back(grid_point(k));
  return net;
}

std::vector<Point> IntervalSpace::mesh(std::size_t target) const {
  const std::int64_t n = std::clamp<std::int64_t>(static_cast<std::int64_t>(target), 1, cells_);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (std::int64_t j = 0; j <= n; ++j) {
    const std::int64_t k = (j * cells_) / n;
    out.emplace_back(grid_point(k));
  }
  return out;
}

Point IntervalSpace::sample(Rng& rng) const {
  std::uniform_int_distribution<std::int64_t> pick(0, cells_);
  return Point{grid_point(pick(rng))};
}

std::optional<Point> IntervalSpace::sample_near(const Point& y, double rho) const {
  check_kind(y);
  const double c = std::get<double>(y);
  const double w = std::min(reach(0.9 * rho), 0.5);
  const double cand = c + w <= 1.0 ? c + w : c - w;
  if (cand == c || cand < 0.0 || cand > 1.0) return std::nullopt;
  Point p{cand};
  if (!(distance(y, p) < rho)) return std::nullopt;
  return p;
}

std::vector<Point> IntervalSpace::packing_in_ball(const Ball& ball, double separation,
                                                  std::size_t cap) const {
  check_kind(ball.center);
  std::vector<Point> out;
  const double c = std::get<double>(ball.center);
  const double w = reach(ball.radius);
  double s = reach(separation);
  while (metric(s) <= separation) s = s * (1.0 + 1e-12) + 1e-300;
  const double lo = std::max(0.0, c - w);
  const double hi = std::min(1.0, c + w);
  if (!(s > 0)) return out;
  for (double x = lo + 0.5 * s; x <= hi && out.size() < cap; x += s) {
    Point p{x};
    if (!in_ball(ball, p)) continue;
    if (!out.empty() && !(distance(out.back(), p) > separation)) continue;
    out.push_back(p);
  }
  return out;
}

json IntervalSpace::describe() const {
  return {{"kind", "interval"}, {"exponent", exponent_}, {"eta", eta_},
          {"covering_dimension", 1.0 / exponent_}};
}

// -------------------------------------------------------------------- cube

CubeSpace::CubeSpace(int dim, double eta) : dim_(dim) {
  if (dim < 1 || dim > 8) throw ValidationError("cube dimension must lie in [1,8]");
  if (!(eta > 0.0 && eta <= 0.5)) throw ValidationError("grid resolution must lie in (0,1/2]");
  cells_ = static_cast<std::int64_t>(std::llround(1.0 / eta));
  eta_ = 1.0 / static_cast<double>(cells_);
}

std::string CubeSpace::name() const { return "cube" + std::to_string(dim_); }

double CubeSpace::distance(const Point& x, const Point& y) const {
  check_kind(x);
  check_kind(y);
  const auto& a = std::get<std::vector<double>>(x);
  const auto& b = std::get<std::vector<double>>(y);
  if (a.size() != b.size() || static_cast<int>(a.size()) != dim_)
    throw KindMismatch("cube point has the wrong dimension");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool CubeSpace::contains(const Point& p) const {
  if (kind_of(p) != PointKind::realvec) return false;
  const auto& a = std::get<std::vector<double>>(p);
  if (static_cast<int>(a.size()) != dim_) return false;
  return std::all_of(a.begin(), a.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

namespace {

struct Box {
  std::vector<std::int64_t> lo, hi;
};

bool box_inside(const Box& inner, const Box& outer) {
  for (std::size_t j = 0; j < inner.lo.size(); ++j)
    if (inner.lo[j] < outer.lo[j] || inner.hi[j] > outer.hi[j]) return false;
  return true;
}

bool box_meets(const Box& a, const Box& b) {
  for (std::size_t j = 0; j < a.lo.size(); ++j)
    if (a.hi[j] < b.lo[j] || b.hi[j] < a.lo[j]) return false;
  return true;
}

std::optional<std::vector<std::int64_t>> first_gap(const Box& region, const std::vector<Box>& cover) {
  std::vector<Box> here;
  for (const auto& c : cover) {
    if (box_inside(region, c)) return std::nullopt;
    if (box_meets(region, c)) here.push_back(c);
  }
  if (here.empty()) return region.lo;
  std::size_t axis = 0;
  std::int64_t width = -1;
  for (std::size_t j = 0; j < region.lo.size(); ++j)
    if (region.hi[j] - region.lo[j] > width) {
      width = region.hi[j] - region.lo[j];
      axis = j;
    }
  if (width == 0) return std::nullopt;  // single cell met by some box is covered
  const std::int64_t mid = region.lo[axis] + width / 2;
  Box left = region, right = region;
  left.hi[axis] = mid;
  right.lo[axis] = mid + 1;
  if (auto g = first_gap(left, here)) return g;
  return first_gap(right, here);
}

}  // namespace

std::optional<Point> CubeSpace::find_uncovered(std::span<const Ball> balls) const {
  std::vector<Box> cover;
  for (const auto& b : balls) {
    check_kind(b.center);
    const auto& c = std::get<std::vector<double>>(b.center);
    Box box{std::vector<std::int64_t>(dim_), std::vector<std::int64_t>(dim_)};
    bool empty = false;
    for (int j = 0; j < dim_; ++j) {
      auto inside = [&](std::int64_t k) {
        const double d = std::abs(static_cast<double>(k) * eta_ - c[j]);
        return b.closed ? d <= b.radius : d < b.radius;
      };
      auto lo = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::ceil((c[j] - b.radius) / eta_)), 0, cells_);
      auto hi = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((c[j] + b.radius) / eta_)), 0, cells_);
      while (lo <= hi && !inside(lo)) ++lo;
      while (lo > 0 && inside(lo - 1)) --lo;
      while (hi >= lo && !inside(hi)) --hi;
      while (hi < cells_ && inside(hi + 1)) ++hi;
      if (lo > hi) empty = true;
      box.lo[j] = lo;
      box.hi[j] = hi;
    }
    if (!empty) cover.push_back(std::move(box));
  }
  Box all{std::vector<std::int64_t>(dim_, 0), std::vector<std::int64_t>(dim_, cells_)};
  auto g = first_gap(all, cover);
  if (!g) return std::nullopt;
  std::vector<double> p(dim_);
  for (int j = 0; j < dim_; ++j) p[j] = static_cast<double>((*g)[j]) * eta_;
  return Point{std::move(p)};
}

std::optional<Net> CubeSpace::greedy_net(double delta, std::size_t cap) const {
  if (!(delta > 0)) throw ValidationError("net resolution must be positive");
  std::int64_t step =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(delta / eta_)));
  while (step > 1 && static_cast<double>(step - 1) * eta_ >= delta) --step;
  while (step <= cells_ && static_cast<double>(step) * eta_ < delta) ++step;
  const std::int64_t per_axis = cells_ / step + 1;
  double total = std::pow(static_cast<double>(per_axis), dim_);
  if (total > static_cast<double>(cap)) return std::nullopt;
  Net net{delta, {}};
  std::vector<std::int64_t> idx(dim_, 0);
  while (true) {
    std::vector<double> p(dim_);
    for (int j = 0; j < dim_; ++j) p[j] = static_cast<double>(idx[j] * step) * eta_;
    net.points.emplace_back(std::move(p));
    int j = dim_ - 1;
    while (j >= 0 && ++idx[j] == per_axis) idx[j--] = 0;
    if (j < 0) break;
  }
  return net;
}

std::vector<Point> CubeSpace::mesh(std::size_t target) const {
  auto per_axis = static_cast<std::int64_t>(
      std::max(2.0, std::floor(std::pow(static_cast<double>(target), 1.0 / dim_))));
  per_axis = std::min<std::int64_t>(per_axis, cells_ + 1);
  std::vector<Point> out;
  std::vector<std::int64_t> idx(dim_, 0);
  while (true) {
    std::vector<double> p(dim_);
    for (int j = 0; j < dim_; ++j)
      p[j] = static_cast<double>((idx[j] * cells_) / (per_axis - 1)) * eta_;
    out.emplace_back(std::move(p));
    int j = dim_ - 1;
    while (j >= 0 && ++idx[j] == per_axis) idx[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

Point CubeSpace::sample(Rng& rng) const {
  std::uniform_int_distribution<std::int64_t> pick(0, cells_);
  std::vector<double> p(dim_);
  for (auto& v : p) v = static_cast<double>(pick(rng)) * eta_;
  return Point{std::move(p)};
}

std::optional<Point> CubeSpace::sample_near(const Point& y, double rho) const {
  check_kind(y);
  auto p = std::get<std::vector<double>>(y);
  const double w = std::min(0.9 * rho, 0.5);
  p[0] = p[0] + w <= 1.0 ? p[0] + w : p[0] - w;
  Point q{p};
  if (q == y || !(distance(y, q) < rho)) return std::nullopt;
  return q;
}

json CubeSpace::describe() const {
  return {{"kind", "cube"}, {"dim", dim_}, {"eta", eta_}, {"covering_dimension", dim_}};
}

// ------------------------------------------------------------------ finite

FiniteSpace::FiniteSpace(std::vector<std::vector<double>> distances, std::string label,
                         bool quasimetric)
    : d_(std::move(distances)), label_(std::move(label)), quasimetric_(quasimetric) {
  const std::size_t n = d_.size();
  if (n == 0) throw ValidationError("finite space needs at least one point");
  for (std::size_t i = 0; i < n; ++i) {
    if (d_[i].size() != n) throw ValidationError("distance matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d_[i][j];
      if (!(v >= 0.0) || v > 1.0 + 1e-12) throw ValidationError("distances must lie in [0,1]");
      if (i == j && v != 0.0) throw ValidationError("distance(x,x) must be 0");
      if (std::abs(v - d_[j][i]) > 1e-12) throw ValidationError("distance matrix is not symmetric");
      diameter_ = std::max(diameter_, v);
    }
  }
  // Cubic check; large matrices are trusted.
  if (quasimetric_ || n > 512) return;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d_[i][k] > d_[i][j] + d_[j][k] + 1e-12)
          throw ValidationError("distance matrix violates the triangle inequality at (" +
                                std::to_string(i) + ", " + std::to_string(j) + ", " +
                                std::to_string(k) + ")");
}

std::shared_ptr<FiniteSpace> FiniteSpace::uniform(std::size_t n, double d) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, d));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 0.0;
  return std::make_shared<FiniteSpace>(std::move(m), "uniform" + std::to_string(n));
}

double FiniteSpace::distance(const Point& x, const Point& y) const {
  check_kind(x);
  check_kind(y);
  const auto i = std::get<std::size_t>(x), j = std::get<std::size_t>(y);
  if (i >= d_.size() || j >= d_.size()) throw KindMismatch("index beyond finite space");
  return d_[i][j];
}

bool FiniteSpace::contains(const Point& p) const {
  return kind_of(p) == PointKind::index && std::get<std::size_t>(p) < d_.size();
}

std::optional<Point> FiniteSpace::find_uncovered(std::span<const Ball> balls) const {
  for (const auto& b : balls) check_kind(b.center);
  for (std::size_t i = 0; i < d_.size(); ++i) {
    Point p{i};
    if (!covered(balls, p)) return p;
  }
  return std::nullopt;
}

std::optional<Net> FiniteSpace::greedy_net(double delta, std::size_t cap) const {
  Net net{delta, {}};
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < d_.size(); ++i) {
    bool far = true;
    for (auto j : chosen)
      if (d_[j][i] < delta) {
        far = false;
        break;
      }
    if (!far) continue;
    if (chosen.size() >= cap) return std::nullopt;
    chosen.push_back(i);
    net.points.emplace_back(i);
  }
  return net;
}

std::vector<Point> FiniteSpace::mesh(std::size_t target) const {
  std::vector<Point> out;
  const std::size_t n = d_.size();
  const std::size_t step = std::max<std::size_t>(1, n / std::max<std::size_t>(target, 1));
  for (std::size_t i = 0; i < n; i += step) out.emplace_back(i);
  if (std::get<std::size_t>(out.back()) != n - 1) out.emplace_back(n - 1);
  return out;
}

Point FiniteSpace::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, d_.size() - 1);
  return Point{pick(rng)};
}

std::optional<Point> FiniteSpace::sample_near(const Point& y, double rho) const {
  check_kind(y);
  const auto i = std::get<std::size_t>(y);
  for (std::size_t j = 0; j < d_.size(); ++j)
    if (j != i && d_[i][j] < rho) return Point{j};
  return std::nullopt;
}

json FiniteSpace::describe() const {
  return {{"kind", "finite"}, {"name", label_}, {"size", d_.size()}, {"quasimetric", quasimetric_}};
}

bool FiniteSpace::precedes(const Point& a, const Point& b) const {
  return std::get<std::size_t>(a) < std::get<std::size_t>(b);
}

std::optional<Point> FiniteSpace::ordering_oracle(std::span<const Ball> balls) const {
  std::vector<Ball> closed(balls.begin(), balls.end());
  for (auto& b : closed) {
    check_kind(b.center);
    b.closed = true;
  }
  for (std::size_t i = d_.size(); i-- > 0;) {
    Point p{i};
    if (covered(closed, p)) return p;
  }
  return std::nullopt;
}

void FiniteSpace::set_ranks(std::vector<int> ranks) {
  if (!ranks.empty() && ranks.size() != d_.size())
    throw ValidationError("one rank per point is required");
  ranks_ = std::move(ranks);
}

int FiniteSpace::max_rank() const {
  return ranks_.empty() ? 0 : *std::max_element(ranks_.begin(), ranks_.end());
}

int FiniteSpace::rank_of(const Point& p) const {
  check_kind(p);
  return ranks_.empty() ? 0 : ranks_.at(std::get<std::size_t>(p));
}

CoverSet FiniteSpace::rank_covering_set(int rank, std::size_t k) const {
  if (k == 0) throw ValidationError("covering oracle needs k >= 1");
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < d_.size(); ++i)
    if (ranks_.empty() ? rank == 0 : ranks_[i] == rank) members.push_back(i);
  if (members.empty()) return {1.0, {}};
  // Smallest dyadic delta whose greedy net of the rank fits in k points.
  CoverSet best;
  bool found = false;
  for (int j = -1; j < 200; ++j) {
    const double delta = std::ldexp(1.0, -j);
    std::vector<std::size_t> chosen;
    bool fits = true;
    for (auto i : members) {
      bool far = true;
      for (auto c : chosen)
        if (d_[c][i] < delta) {
          far = false;
          break;
        }
      if (!far) continue;
      if (chosen.size() >= k) {
        fits = false;
        break;
      }
      chosen.push_back(i);
    }
    if (!fits) break;
    best = {delta, {}};
    for (auto c : chosen) best.points.emplace_back(c);
    found = true;
    if (chosen.size() == members.size()) break;
  }
  if (!found) throw ResolutionError("rank covering set does not fit in k points");
  return best;
}

// ---------------------------------------------------------------- sequence

namespace {

std::vector<std::vector<double>> sequence_matrix(std::size_t m) {
  std::vector<double> v(m + 1);
  for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  v[m] = 0.0;
  std::vector<std::vector<double>> d(m + 1, std::vector<double>(m + 1));
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = 0; j <= m; ++j) d[i][j] = std::abs(v[i] - v[j]);
  return d;
}

}  // namespace

SequenceSpace::SequenceSpace(std::size_t m)
    : FiniteSpace(sequence_matrix(m), "sequence" + std::to_string(m)), m_(m) {
  if (m == 0) throw ValidationError("sequence space needs at least one term");
  std::vector<int> r(m + 1, 0);
  r[m] = 1;
  set_ranks(std::move(r));
}

double SequenceSpace::value(const Point& p) const {
  check_kind(p);
  return value(std::get<std::size_t>(p));
}

json SequenceSpace::describe() const {
  return {{"kind", "sequence"}, {"terms", m_}, {"limit_point", "0"}, {"rank", 1}};
}

}  // namespace lipzoom
