#include "lipzoom/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "lipzoom/covering.hpp"

namespace lipzoom {

json DimensionReport::to_json() const {
  return {{"scales", scales},           {"counts", counts},
          {"multipliers", multipliers}, {"dimension", dimension},
          {"residual", residual},       {"log_covering", log_covering},
          {"approximate", approximate}, {"note", note}};
}

std::vector<double> dyadic_scales(int lo, int hi) {
  if (lo > hi) throw ValidationError("scale window is empty");
  std::vector<double> out;
  for (int j = lo; j <= hi; ++j) out.push_back(std::exp2(-j));
  return out;
}

namespace {

// Least-squares slope and RMS residual.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    ss += e * e;
  }
  return {slope, std::sqrt(ss / n)};
}

}  // namespace

DimensionReport covering_dimension_fit(const MetricSpace& space, const std::vector<double>& scales,
                                       bool log_covering, std::size_t cap) {
  DimensionReport rep;
  rep.log_covering = log_covering;
  std::vector<double> xs, ys;
  for (double r : scales) {
    if (!(r > 0)) throw ValidationError("scales must be positive");
    if (space.resolution() > 0 && r < space.resolution()) continue;
    auto net = space.greedy_net(r, cap);
    if (!net) {
      rep.note = "net exceeded the cap at r = " + std::to_string(r);
      continue;
    }
    const double n = static_cast<double>(net->points.size());
    rep.scales.push_back(r);
    rep.counts.push_back(n);
    if (log_covering) {
      if (n < 2) continue;
      xs.push_back(std::log(1.0 / r));
      ys.push_back(std::log(std::log(n)));
    } else {
      xs.push_back(std::log(1.0 / r));
      ys.push_back(std::log(n));
    }
  }
  if (xs.size() < 3) {
    rep.note = "fewer than 3 usable scales";
    return rep;
  }
  const auto [slope, residual] = fit_line(xs, ys);
  rep.dimension = std::max(0.0, slope);
  rep.residual = residual;
  for (std::size_t i = 0; i < rep.scales.size(); ++i)
    rep.multipliers.push_back(log_covering ? std::log(rep.counts[i]) * std::pow(rep.scales[i], rep.dimension)
                                           : rep.counts[i] * std::pow(rep.scales[i], rep.dimension));
  return rep;
}

DimensionReport zooming_dimension_estimate(const Environment& env, double c,
                                           const std::vector<double>& scales,
                                           std::size_t mesh_target) {
  if (!(c > 0)) throw ValidationError("multiplier c must be positive");
  if (scales.empty()) throw ValidationError("no scales given");
  const MetricSpace& space = env.space();
  const auto* interval = dynamic_cast<const IntervalSpace*>(&space);
  const double smallest = *std::min_element(scales.begin(), scales.end());

  if (mesh_target == 0) {
    // On the interval, resolve the smallest slab's r/8 pieces with room to spare.
    mesh_target = interval ? static_cast<std::size_t>(std::ceil(64.0 / interval->reach(smallest)))
                           : 2000;
  }
  const auto mesh = space.mesh(mesh_target);
  const double mu_star = env.mu_star();
  std::vector<double> badness(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) badness[i] = mu_star - env.mu(mesh[i]);

  DimensionReport rep;
  rep.approximate = !interval || !env.mu_star_exact();
  if (!env.mu_star_exact()) rep.note = "mu* estimated on the grid";
  double d = 0.0;
  for (double r : scales) {
    std::vector<Point> slab;
    for (std::size_t i = 0; i < mesh.size(); ++i)
      if (badness[i] > r / 2 && badness[i] <= r) slab.push_back(mesh[i]);
    std::size_t count = 0;
    if (interval) {
      // Mesh points are sorted, so the sweep from the left is optimal.
      std::size_t i = 0;
      while (i < slab.size()) {
        ++count;
        std::size_t j = i + 1;
        while (j < slab.size() && space.distance(slab[i], slab[j]) < r / 8) ++j;
        i = j;
      }
    } else if (!slab.empty()) {
      count = covering_number(space, slab, r / 8, CountMode::greedy);
    }
    rep.scales.push_back(r);
    rep.counts.push_back(static_cast<double>(count));
    if (count > 0 && r < 1.0)
      d = std::max(d, std::log(static_cast<double>(count) / c) / std::log(1.0 / r));
    else if (count > c)
      rep.note = "count exceeds c at r = 1";
  }
  rep.dimension = std::max(0.0, d);
  for (std::size_t i = 0; i < rep.scales.size(); ++i)
    rep.multipliers.push_back(rep.counts[i] * std::pow(rep.scales[i], rep.dimension));
  return rep;
}

// ------------------------------------------------------------ clean audit

void CleanRunAuditor::phase_started(const Zooming& z, std::uint64_t) {
  badness_.clear();
  PhaseAudit p;
  p.phase = z.phase();
  phases_.push_back(p);
}

void CleanRunAuditor::after_activation(const Zooming& z, std::uint64_t, std::size_t arm) {
  auto& p = phases_.back();
  const auto& arms = z.arms();
  const double mu_star = env_->mu_star();
  const double dx = mu_star - env_->mu(arms[arm].arm);
  for (std::size_t j = 0; j < arm; ++j) {
    if (!(z.space().distance(arms[arm].arm, arms[j].arm) > std::min(dx, badness_[j]) / 3.0))
      ++p.packing_violations;
  }
  badness_.push_back(dx);
  ++p.arms;
}

void CleanRunAuditor::after_play(const Zooming& z, std::uint64_t, std::size_t arm,
                                 const Estimate& before) {
  auto& p = phases_.back();
  const auto& rec = z.arms()[arm];
  if (badness_[arm] > 3.0 * before.radius) ++p.lemma_violations;
  const double mu = env_->mu_star() - badness_[arm];
  if (std::abs(rec.estimate - mu) > rec.radius) p.clean = false;
}

void CleanRunAuditor::phase_ended(const Zooming& z, std::uint64_t) {
  auto& p = phases_.back();
  p.complete = z.round_in_phase() == z.phase_length();
  const auto& arms = z.arms();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double d = badness_[i];
    if (d > 0 && static_cast<double>(arms[i].stats.n) > 72.0 * z.phase() / (d * d))
      ++p.pull_violations;
  }
}

json CleanRunAuditor::cross_tab() const {
  std::uint64_t cc = 0, cv = 0, dc = 0, dv = 0;
  for (const auto& p : phases_) {
    if (!p.complete) continue;
    if (p.clean) (p.bounds_held() ? cc : cv)++;
    else (p.bounds_held() ? dc : dv)++;
  }
  return {{"clean_held", cc}, {"clean_violated", cv}, {"dirty_held", dc}, {"dirty_violated", dv}};
}

// --------------------------------------------------------- covering probes

void CoveringProbeAuditor::before_play(const Zooming& z, std::uint64_t round) {
  if (stride_ > 1 && round % stride_ != 0) return;
  ++rounds_;
  const auto& space = z.space();
  const auto balls = z.balls();
  for (std::size_t k = 0; k < probes_; ++k) {
    const Point p = space.sample(rng_);
    ++probed_;
    if (!space.covered(balls, p)) ++violations_;
  }
}

}  // namespace lipzoom
