#include "lipzoom/experts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipzoom {

// ---------------------------------------------------------------- NaiveExp

NaiveExp::NaiveExp(SpacePtr space, double b, bool uniform, std::size_t cap)
    : space_(std::move(space)), b_(b), uniform_(uniform), cap_(cap) {
  if (!(b_ > 0)) throw ValidationError("NaiveExp needs b > 0");
  if (uniform_ && !(b_ >= 2)) throw ValidationError("uniform NaiveExp needs b >= 2");
  if (cap_ == 0) throw ValidationError("NaiveExp cap must be positive");
}

double NaiveExp::phase_delta(double b, bool uniform, double T) {
  return std::pow(T, -1.0 / (uniform ? b : b + 2.0));
}

void NaiveExp::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  left_ = 0;
  have_bet_ = false;
}

void NaiveExp::begin_phase(std::uint64_t t) {
  ++phase_;
  const double T = std::exp2(phase_);
  left_ = static_cast<std::uint64_t>(T);
  delta_ = std::min(1.0, phase_delta(b_, uniform_, T));
  if (space_->resolution() > 0 && delta_ < space_->resolution())
    throw ResolutionError("hitting-set scale is below the grid resolution");
  auto net = space_->greedy_net(delta_, cap_);
  if (!net) throw CapExceeded("NaiveExp hitting set exceeds the cap at phase " + std::to_string(phase_));
  net_ = std::move(net->points);
  sums_.assign(net_.size(), 0.0);
  if (!have_bet_) {
    bet_ = net_.front();
    have_bet_ = true;
  }
  audit_.add(t, "phase", {{"phase", phase_}, {"delta", delta_}, {"queries", net_.size()},
                          {"bet", to_string(bet_)}});
}

const Point& NaiveExp::act(std::uint64_t t) {
  if (left_ == 0) begin_phase(t);
  return bet_;
}

void NaiveExp::observe(std::uint64_t, double, std::span<const double> values) {
  for (std::size_t j = 0; j < sums_.size(); ++j) sums_[j] += values[j];
  if (--left_ == 0) {
    // Sums share a denominator, so the argmax of sums is the argmax of means.
    std::size_t best = 0;
    for (std::size_t j = 1; j < sums_.size(); ++j)
      if (sums_[j] > sums_[best]) best = j;
    bet_ = net_[best];
  }
}

json NaiveExp::describe() const {
  return {{"kind", "naive_exp"}, {"b", b_}, {"uniform", uniform_}, {"cap", cap_}};
}

// ------------------------------------------------------------------- EXPL

ExplRun::Mode parse_expl_mode(const std::string& s) {
  if (s == "expl") return ExplRun::Mode::expl;
  if (s == "expl_prime") return ExplRun::Mode::expl_prime;
  throw ValidationError("unknown exploration mode: " + s);
}

const char* expl_mode_name(ExplRun::Mode m) {
  return m == ExplRun::Mode::expl ? "expl" : "expl_prime";
}

ExplRun::ExplRun(const MetricSpace& space, Mode mode, std::size_t k, std::uint64_t n, double r)
    : space_(&space), mode_(mode), n_(n), r_(r) {
  if (k == 0 || n == 0) throw ValidationError("exploration needs k, n >= 1");
  if (!(r > 0)) throw ValidationError("exploration needs r > 0");
  if (mode_ == Mode::expl) {
    if (!space.well_order()) throw ValidationError("exploration needs a well-ordered space");
    auto cover = dyadic_covering_set(space, k);
    outcome_.delta = cover.delta;
    outcome_.points = std::move(cover.points);
  } else {
    const auto* ranks = space.ranks();
    if (!ranks) throw ValidationError("rank exploration needs rank covering oracles");
    for (int rank = 0; rank <= ranks->max_rank(); ++rank) {
      auto cover = ranks->rank_covering_set(rank, k);
      for (auto& p : cover.points) {
        outcome_.points.push_back(std::move(p));
        outcome_.ranks.push_back(rank);
      }
    }
  }
  if (outcome_.points.empty()) throw ValidationError("exploration sample set is empty");
  sums_.assign(outcome_.points.size(), 0.0);
}

void ExplRun::record(double reward) {
  if (done_) throw LipzoomError("exploration already finished");
  sums_[cursor_] += reward;
  if (++pulls_ == n_) {
    pulls_ = 0;
    if (++cursor_ == outcome_.points.size()) {
      cursor_ = 0;
      decide();
    }
  }
}

void ExplRun::decide() {
  const std::size_t m = outcome_.points.size();
  outcome_.means.resize(m);
  for (std::size_t i = 0; i < m; ++i) outcome_.means[i] = sums_[i] / static_cast<double>(n_);
  const double top = *std::max_element(outcome_.means.begin(), outcome_.means.end());
  outcome_.flags.assign(m, false);
  if (mode_ == Mode::expl) {
    std::vector<Ball> kept;
    for (std::size_t i = 0; i < m; ++i) {
      outcome_.flags[i] = top - outcome_.means[i] > 2.0 * r_ + outcome_.delta;
      if (!outcome_.flags[i]) kept.push_back({outcome_.points[i], outcome_.delta, true});
    }
    auto chosen = space_->well_order()->ordering_oracle(kept);
    if (!chosen) throw LipzoomError("ordering oracle found no covered point");
    outcome_.chosen = *chosen;
  } else {
    // Undominated: nobody beats it by more than 2r, i.e. top - mean <= 2r.
    int best_rank = -1;
    std::size_t best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (top - outcome_.means[i] > 2.0 * r_) continue;
      if (outcome_.ranks[i] > best_rank) {
        best_rank = outcome_.ranks[i];
        best = i;
      }
    }
    if (best_rank < 0) {
      outcome_.fallback = true;
      best = 0;
    } else {
      for (std::size_t i = 0; i < m; ++i)
        outcome_.flags[i] =
            top - outcome_.means[i] <= 2.0 * r_ && outcome_.ranks[i] == best_rank;
    }
    outcome_.chosen = outcome_.points[best];
  }
  done_ = true;
}

ExplOutcome run_expl(const Environment& env, ExplRun::Mode mode, std::size_t k, std::uint64_t n,
                     double r, std::uint64_t seed) {
  ExplRun run(env.space(), mode, k, n, r);
  Rng rng(derive_seed(seed, Purpose::environment));
  double reward = 0.0;
  for (std::uint64_t round = 1; !run.done(); ++round) {
    env.sample(round, {&run.next(), 1}, {&reward, 1}, rng);
    run.record(reward);
  }
  return run.outcome();
}

// --------------------------------------------------- well-ordered bandit

WellOrderedBanditWrapper::WellOrderedBanditWrapper(SpacePtr space, double growth_power,
                                                   int max_phase, ExplRun::Mode mode)
    : space_(std::move(space)), power_(growth_power), max_phase_(max_phase), mode_(mode) {
  if (!(power_ > 1)) throw ValidationError("growth (ln t)^p needs p > 1");
  if (max_phase_ < 1 || max_phase_ > 6) throw ValidationError("phase cap must lie in 1..6");
  if (mode_ == ExplRun::Mode::expl && !space_->well_order())
    throw ValidationError("well-ordered wrapper needs a well-ordered space");
}

double WellOrderedBanditWrapper::growth(double t) const { return std::pow(std::log(t), power_); }

WellOrderedBanditWrapper::Schedule WellOrderedBanditWrapper::schedule(int phase) const {
  Schedule s;
  s.T = std::exp2(std::exp2(phase));
  const double lt = std::log(s.T);
  s.k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(growth(s.T) / lt))));
  s.n = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::floor(static_cast<double>(s.k) * lt)));
  s.r = 4.0 * std::sqrt(lt / static_cast<double>(s.n));
  return s;
}

void WellOrderedBanditWrapper::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  left_ = 0;
  expl_.reset();
  result_ = space_->mesh(1).front();
}

void WellOrderedBanditWrapper::begin_phase(std::uint64_t t) {
  if (phase_ >= max_phase_) {
    left_ = std::numeric_limits<std::uint64_t>::max();
    expl_.reset();
    audit_.add(t, "phase_cap", {{"phase", phase_}});
    return;
  }
  ++phase_;
  const auto s = schedule(phase_);
  left_ = static_cast<std::uint64_t>(s.T);
  expl_.emplace(*space_, mode_, s.k, s.n, s.r);
  audit_.add(t, "phase", {{"phase", phase_}, {"T", s.T}, {"k", s.k}, {"n", s.n}, {"r", s.r},
                          {"budget", expl_->budget()}, {"growth", growth(s.T)}});
}

const Point& WellOrderedBanditWrapper::act(std::uint64_t t) {
  if (left_ == 0) begin_phase(t);
  if (expl_ && !expl_->done()) return expl_->next();
  return result_;
}

void WellOrderedBanditWrapper::observe(std::uint64_t t, double arm_reward, std::span<const double>) {
  if (expl_ && !expl_->done()) {
    expl_->record(arm_reward);
    if (expl_->done()) {
      result_ = expl_->outcome().chosen;
      audit_.add(t, "expl", {{"phase", phase_}, {"chosen", to_string(result_)}});
    }
  }
  --left_;
  if (left_ == 0 && expl_ && !expl_->done()) audit_.add(t, "expl_truncated", {{"phase", phase_}});
}

json WellOrderedBanditWrapper::describe() const {
  return {{"kind", "well_ordered_bandit"}, {"growth_power", power_}, {"max_phase", max_phase_},
          {"mode", expl_mode_name(mode_)}};
}

// -------------------------------------------------------------- free peek

FreePeekWrapper::FreePeekWrapper(SpacePtr space, bool log_radius, ExplRun::Mode mode)
    : space_(std::move(space)), log_radius_(log_radius), mode_(mode) {
  if (mode_ == ExplRun::Mode::expl && !space_->well_order())
    throw ValidationError("free-peek wrapper needs a well-ordered space");
}

double FreePeekWrapper::radius(double T, std::uint64_t n) const {
  const double numer = log_radius_ ? std::log(T) : std::pow(T, 0.25);
  return 4.0 * std::sqrt(numer / static_cast<double>(n));
}

void FreePeekWrapper::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  left_ = 0;
  expl_.reset();
  bet_ = space_->mesh(1).front();
  peek_ = bet_;
}

void FreePeekWrapper::begin_phase(std::uint64_t t) {
  ++phase_;
  const double T = std::exp2(phase_);
  left_ = static_cast<std::uint64_t>(T);
  const auto kn = static_cast<std::uint64_t>(std::floor(std::sqrt(T)));
  const double r = radius(T, kn);
  expl_.emplace(*space_, mode_, static_cast<std::size_t>(kn), kn, r);
  audit_.add(t, "phase", {{"phase", phase_}, {"k", kn}, {"n", kn}, {"r", r},
                          {"radius_rule", log_radius_ ? "log" : "verbatim"},
                          {"bet", to_string(bet_)}});
}

void FreePeekWrapper::end_phase(std::uint64_t t) {
  if (expl_ && expl_->done()) {
    bet_ = expl_->outcome().chosen;
    audit_.add(t, "expl", {{"phase", phase_}, {"chosen", to_string(bet_)}});
  } else {
    audit_.add(t, "expl_truncated", {{"phase", phase_}});
  }
}

const Point& FreePeekWrapper::act(std::uint64_t t) {
  if (left_ == 0) begin_phase(t);
  peek_ = expl_->done() ? bet_ : expl_->next();
  return bet_;
}

void FreePeekWrapper::observe(std::uint64_t t, double, std::span<const double> values) {
  if (!expl_->done()) expl_->record(values[0]);
  if (--left_ == 0) end_phase(t);
}

json FreePeekWrapper::describe() const {
  return {{"kind", "free_peek"}, {"radius_rule", log_radius_ ? "log" : "verbatim"},
          {"mode", expl_mode_name(mode_)}};
}

}  // namespace lipzoom
