#include "lipzoom/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipzoom {

// ---------------------------------------------------------------- audit log

void AuditLog::add(std::uint64_t round, const std::string& kind, json data) {
  ++counts_[kind];
  if (events_.size() < cap_) events_.push_back({round, kind, std::move(data)});
}

void AuditLog::clear() {
  events_.clear();
  counts_.clear();
}

std::uint64_t AuditLog::count(const std::string& kind) const {
  auto it = counts_.find(kind);
  return it == counts_.end() ? 0 : it->second;
}

json AuditLog::summary() const {
  json j = json::object();
  for (const auto& [k, v] : counts_) j[k] = v;
  return j;
}

// --------------------------------------------------------------------- UCB1

void Ucb1::reset(std::size_t arms) {
  if (arms == 0) throw ValidationError("UCB1 needs at least one arm");
  means_.assign(arms, 0.0);
  inv_sqrt_.assign(arms, 0.0);
  counts_.assign(arms, 0);
  plays_ = 0;
  unplayed_ = 0;
}

std::size_t Ucb1::select() const {
  if (unplayed_ < counts_.size()) return unplayed_;
  const double scale = std::sqrt(2.0 * std::log(static_cast<double>(plays_ + 1)));
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < means_.size(); ++i) {
    const double idx = means_[i] + scale * inv_sqrt_[i];
    if (idx > best_index) {
      best_index = idx;
      best = i;
    }
  }
  return best;
}

void Ucb1::update(std::size_t arm, double reward) {
  ++plays_;
  const auto n = ++counts_[arm];
  means_[arm] += (reward - means_[arm]) / static_cast<double>(n);
  inv_sqrt_[arm] = 1.0 / std::sqrt(static_cast<double>(n));
  while (unplayed_ < counts_.size() && counts_[unplayed_] > 0) ++unplayed_;
}

Ucb1Policy::Ucb1Policy(std::vector<Point> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) throw ValidationError("UCB1 needs at least one arm");
}

void Ucb1Policy::start(std::uint64_t) {
  audit_.clear();
  ucb_.reset(arms_.size());
}

const Point& Ucb1Policy::act(std::uint64_t) {
  current_ = ucb_.select();
  return arms_[current_];
}

void Ucb1Policy::observe(std::uint64_t, double arm_reward, std::span<const double>) {
  ucb_.update(current_, arm_reward);
}

json Ucb1Policy::describe() const { return {{"kind", "ucb1"}, {"arms", arms_.size()}}; }

// ---------------------------------------------------------------- NaiveAlg

double naive_delta(double d, double c, double t) {
  if (!(d >= 0)) throw ValidationError("NaiveAlg dimension must be non-negative");
  if (!(c > 0)) throw ValidationError("NaiveAlg constant must be positive");
  if (!(t >= 2)) throw ValidationError("NaiveAlg phase length must be at least 2");
  return std::pow(c * t * std::log(t), -1.0 / (d + 2.0));
}

NaiveAlg::NaiveAlg(SpacePtr space, double d, double c, std::size_t net_cap)
    : space_(std::move(space)), d_(d), c_(c), net_cap_(net_cap) {
  naive_delta(d_, c_, 2.0);
}

void NaiveAlg::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  left_ = 0;
}

void NaiveAlg::begin_phase(std::uint64_t t) {
  ++phase_;
  const double length = std::exp2(phase_);
  left_ = static_cast<std::uint64_t>(length);
  delta_ = std::min(1.0, naive_delta(d_, c_, length));
  if (space_->resolution() > 0 && delta_ < space_->resolution())
    throw ResolutionError("mesh scale " + std::to_string(delta_) + " is below the grid resolution");
  auto net = space_->greedy_net(delta_, net_cap_);
  if (!net) throw CapExceeded("NaiveAlg net exceeds the cap at phase " + std::to_string(phase_));
  net_ = std::move(net->points);
  ucb_.reset(net_.size());
  audit_.add(t, "phase", {{"phase", phase_}, {"delta", delta_}, {"arms", net_.size()}});
}

const Point& NaiveAlg::act(std::uint64_t t) {
  if (left_ == 0) begin_phase(t);
  current_ = ucb_.select();
  return net_[current_];
}

void NaiveAlg::observe(std::uint64_t, double arm_reward, std::span<const double>) {
  ucb_.update(current_, arm_reward);
  --left_;
}

json NaiveAlg::describe() const { return {{"kind", "naive"}, {"d", d_}, {"c", c_}}; }

// ---------------------------------------------------------------- boundary

std::vector<double> boundary_schedule(const std::vector<double>& counts, int phases) {
  if (phases < 1 || counts.size() < static_cast<std::size_t>(phases))
    throw ValidationError("boundary schedule needs a covering count per phase");
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(counts[k] >= 1)) throw ValidationError("covering counts must be at least 1");
    if (k > 0 && counts[k] < counts[k - 1])
      throw ValidationError("covering counts must be non-decreasing");
  }
  auto tstar = [&](int k) {
    const double eps = std::exp2(-k);
    const double m = counts[static_cast<std::size_t>(k - 1)] / (eps * eps);
    return 2.0 * m * std::log(m);
  };
  std::vector<double> t;
  double sum = 0.0;
  for (int i = 1; i <= phases; ++i) {
    double v = tstar(i);
    if (static_cast<std::size_t>(i) < counts.size()) v = std::min(v, tstar(i + 1));
    if (i >= 2) v = std::min(v, 2.0 * sum);
    t.push_back(v);
    sum += v;
  }
  return t;
}

BoundaryAlg::BoundaryAlg(SpacePtr space, int max_phases, std::size_t net_cap)
    : space_(std::move(space)), max_phases_(max_phases), net_cap_(net_cap) {
  if (max_phases_ < 1) throw ValidationError("boundary algorithm needs at least one phase");
}

void BoundaryAlg::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  left_ = 0;
  durations_.clear();
}

double BoundaryAlg::net_count(int k) {
  while (counts_.size() < static_cast<std::size_t>(k)) {
    const int j = static_cast<int>(counts_.size()) + 1;
    auto net = space_->greedy_net(std::exp2(-j), net_cap_);
    if (!net) return -1.0;
    double n = static_cast<double>(net->points.size());
    if (!counts_.empty()) n = std::max(n, counts_.back());
    counts_.push_back(n);
  }
  return counts_[static_cast<std::size_t>(k - 1)];
}

void BoundaryAlg::begin_phase(std::uint64_t t) {
  const int next = phase_ + 1;
  if (next > max_phases_ || net_count(next) < 0) {
    left_ = std::numeric_limits<std::uint64_t>::max();
    audit_.add(t, "schedule_exhausted", {{"phase", phase_}});
    return;
  }
  phase_ = next;
  const bool have_next = net_count(phase_ + 1) > 0;
  std::vector<double> counts(counts_.begin(), counts_.begin() + phase_ + (have_next ? 1 : 0));
  durations_ = boundary_schedule(counts, phase_);
  left_ = static_cast<std::uint64_t>(std::max(1.0, std::ceil(durations_.back())));
  net_ = space_->greedy_net(std::exp2(-phase_), net_cap_)->points;
  ucb_.reset(net_.size());
  audit_.add(t, "phase", {{"phase", phase_}, {"duration", left_}, {"arms", net_.size()}});
}

const Point& BoundaryAlg::act(std::uint64_t t) {
  if (left_ == 0) begin_phase(t);
  current_ = ucb_.select();
  return net_[current_];
}

void BoundaryAlg::observe(std::uint64_t, double arm_reward, std::span<const double>) {
  ucb_.update(current_, arm_reward);
  --left_;
}

json BoundaryAlg::describe() const {
  return {{"kind", "boundary"}, {"max_phases", max_phases_}, {"durations", durations_}};
}

}  // namespace lipzoom
