#include "lipzoom/zooming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipzoom {

const char* variant_name(ZoomingVariant v) {
  switch (v) {
    case ZoomingVariant::plain: return "plain";
    case ZoomingVariant::quota: return "quota";
    case ZoomingVariant::pmo: return "pmo";
  }
  return "plain";
}

ZoomingVariant parse_variant(const std::string& s) {
  if (s == "plain") return ZoomingVariant::plain;
  if (s == "quota") return ZoomingVariant::quota;
  if (s == "pmo") return ZoomingVariant::pmo;
  throw ValidationError("unknown zooming variant: " + s);
}

Zooming::Zooming(SpacePtr space, ZoomingOptions options)
    : space_(std::move(space)), opts_(std::move(options)) {
  opts_.radius.validate();
  if (opts_.variant == ZoomingVariant::plain) {
    decomp_ = opts_.decomposition ? opts_.decomposition
                                  : std::make_shared<TrivialDecomposition>(space_, 0.0);
  } else {
    if (!opts_.decomposition) throw ValidationError("quota and pmo variants need a decomposition");
    decomp_ = opts_.decomposition;
  }
  if (&decomp_->space() != space_.get())
    throw ValidationError("decomposition is over a different space");
  multiplier_ = opts_.multiplier > 0 ? opts_.multiplier
                                     : (opts_.variant == ZoomingVariant::pmo ? 3.0 : 2.0);
  dim_ = opts_.quota_dim >= 0 ? opts_.quota_dim : decomp_->dimension();
  if (!(dim_ >= 0)) throw ValidationError("quota exponent must be non-negative");
}

std::string Zooming::name() const {
  switch (opts_.variant) {
    case ZoomingVariant::plain: return "zooming";
    case ZoomingVariant::quota: return "zooming_quota";
    case ZoomingVariant::pmo: return "zooming_pmo";
  }
  return "zooming";
}

void Zooming::start(std::uint64_t) {
  audit_.clear();
  phase_ = 0;
  length_ = left_ = 0;
  arms_.clear();
  balls_.clear();
  target_ = 0;
  eps0_ = 0.0;
  net_.clear();
}

void Zooming::begin_phase(std::uint64_t t) {
  ++phase_;
  length_ = std::uint64_t{1} << phase_;
  left_ = length_;
  arms_.clear();
  balls_.clear();
  const auto layers = static_cast<std::size_t>(decomp_->length() + 1);
  verified_.assign(layers, false);
  hint_.reset();
  counts_.assign(layers, 0);
  json info{{"phase", phase_}};
  if (opts_.variant != ZoomingVariant::plain) {
    const double T = static_cast<double>(length_);
    rho_ = std::pow(T, -1.0 / (dim_ + 2.0));
    quota_ = static_cast<std::uint64_t>(std::floor(std::pow(T, dim_ / (dim_ + 2.0)) + 1e-9));
    info["rho"] = rho_;
    info["quota"] = quota_;
  }
  if (opts_.variant == ZoomingVariant::pmo) {
    build_net();
    info["eps0"] = eps0_;
    info["net"] = net_.size();
    info["target"] = target_;
  }
  audit_.add(t, "phase", std::move(info));
  for (auto* o : observers_) o->phase_started(*this, t);
}

void Zooming::end_phase(std::uint64_t t) {
  for (auto* o : observers_) o->phase_ended(*this, t);
  if (opts_.variant == ZoomingVariant::pmo) choose_target(t);
}

void Zooming::finish() {
  if (phase_ > 0)
    for (auto* o : observers_) o->phase_ended(*this, 0);
}

void Zooming::build_net() {
  const double T = static_cast<double>(length_);
  const double bound = std::pow(T, dim_ / (dim_ + 2.0));
  // |N| < bound.
  const auto limit = static_cast<std::size_t>(std::ceil(bound - 1e-12));
  const std::size_t cap = std::min(limit == 0 ? 0 : limit - 1, opts_.net_cap);
  net_.clear();
  eps0_ = space_->diameter();
  if (cap == 0) return;
  for (int j = 0; j < 60; ++j) {
    const double eps = std::exp2(-j);
    if (space_->resolution() > 0 && eps < space_->resolution()) break;
    auto net = space_->greedy_net(eps, cap);
    if (!net) break;
    net_ = std::move(net->points);
    eps0_ = eps;
  }
}

void Zooming::choose_target(std::uint64_t t) {
  const double T = static_cast<double>(length_);
  const double eps_star =
      6.0 * std::max(eps0_, 4.0 * std::pow(T, -1.0 / (dim_ + 2.0)) * std::sqrt(std::log(T)));
  std::vector<Ball> sharp;
  for (const auto& a : arms_)
    if (a.radius < eps_star) sharp.push_back({a.arm, eps_star, true});
  if (sharp.empty()) {
    target_ = 0;
    audit_.add(t, "empty_sharp_set", {{"phase", phase_}, {"eps_star", eps_star}});
    return;
  }
  int lambda = 0;
  for (int l = decomp_->length(); l > 0; --l) {
    if (decomp_->set_meets_balls(l, sharp)) {
      lambda = l;
      break;
    }
  }
  target_ = lambda;
  audit_.add(t, "target", {{"phase", phase_}, {"eps_star", eps_star}, {"lambda", lambda},
                           {"sharp_arms", sharp.size()}});
}

std::vector<bool> Zooming::eligible_layers() const {
  const auto layers = counts_.size();
  std::vector<bool> mask(layers, false);
  switch (opts_.variant) {
    case ZoomingVariant::plain: mask.assign(layers, true); break;
    case ZoomingVariant::quota:
      for (std::size_t l = 0; l < layers; ++l) mask[l] = counts_[l] + 1 <= quota_;
      break;
    case ZoomingVariant::pmo: {
      std::uint64_t in_set = 0;
      for (std::size_t l = static_cast<std::size_t>(target_); l < layers; ++l) in_set += counts_[l];
      if (in_set + 1 <= quota_)
        for (std::size_t l = static_cast<std::size_t>(target_); l < layers; ++l) mask[l] = true;
      break;
    }
  }
  return mask;
}

std::optional<Point> Zooming::find_candidate() {
  if (opts_.variant == ZoomingVariant::pmo)
    for (const auto& p : net_)
      if (!space_->covered(balls_, p)) return p;

  const auto mask = eligible_layers();
  std::vector<bool> full(mask.size(), false), hinted(mask.size(), false);
  bool any_full = false, any_hinted = false;
  for (std::size_t l = 0; l < mask.size(); ++l) {
    if (!mask[l]) {
      verified_[l] = false;
    } else if (!verified_[l]) {
      full[l] = any_full = true;
    } else if (hint_) {
      hinted[l] = any_hinted = true;
    }
  }
  if (any_full) {
    if (auto w = decomp_->find_uncovered_in_layers(balls_, full)) return w;
    for (std::size_t l = 0; l < mask.size(); ++l)
      if (full[l]) verified_[l] = true;
  }
  if (any_hinted) {
    if (auto w = decomp_->find_uncovered_in_layers(balls_, hinted, &*hint_)) return w;
  }
  hint_.reset();
  return std::nullopt;
}

void Zooming::activate(const Point& x, std::uint64_t t) {
  ArmRecord rec;
  rec.arm = x;
  rec.activated = t;
  rec.layer = decomp_->layer_of(x);
  arms_.push_back(std::move(rec));
  balls_.push_back({x, 0.0, false});
  refresh(arms_.size() - 1, t);
  // A fresh ball wider than the space covers everything; otherwise recheck all.
  const bool covers_all = arms_.back().radius > space_->diameter();
  verified_.assign(verified_.size(), covers_all);
  hint_.reset();
  audit_.add(t, "activation", {{"arm", to_string(x)}, {"layer", arms_.back().layer}});
  for (auto* o : observers_) o->after_activation(*this, t, arms_.size() - 1);
}

void Zooming::refresh(std::size_t i, std::uint64_t t) {
  auto& rec = arms_[i];
  const auto est = opts_.radius.estimate(rec.stats, phase_);
  rec.estimate = est.value;
  rec.radius = est.radius;
  rec.index = est.value + multiplier_ * est.radius;
  balls_[i].radius = est.radius;
  if (opts_.variant == ZoomingVariant::plain) return;
  const bool counted = est.radius >= rho_;
  auto& c = counts_[static_cast<std::size_t>(rec.layer)];
  if (rec.counted && !counted) {
    --c;
  } else if (!rec.counted && counted) {
    ++c;
    if (opts_.variant == ZoomingVariant::quota && c > quota_)
      audit_.add(t, "quota_exceeded", {{"layer", rec.layer}, {"count", c}, {"quota", quota_}});
  }
  rec.counted = counted;
}

const Point& Zooming::act(std::uint64_t t) {
  if (left_ == 0) {
    if (phase_ > 0) end_phase(t - 1);
    begin_phase(t);
  }
  if (auto x = find_candidate()) activate(*x, t);
  if (arms_.empty()) throw LipzoomError("zooming has no eligible arm to play");
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (arms_[i].index > best_index) {
      best_index = arms_[i].index;
      best = i;
    }
  }
  current_ = best;
  for (auto* o : observers_) o->before_play(*this, t);
  return arms_[best].arm;
}

void Zooming::observe(std::uint64_t t, double arm_reward, std::span<const double>) {
  auto& rec = arms_[current_];
  const Estimate before{rec.estimate, rec.radius};
  const Ball old = balls_[current_];
  opts_.radius.record(rec.stats, arm_reward);
  refresh(current_, t);
  if (rec.radius < old.radius) hint_ = old;
  --left_;
  for (auto* o : observers_) o->after_play(*this, t, current_, before);
}

json Zooming::describe() const {
  json j{{"kind", "zooming"},
         {"variant", variant_name(opts_.variant)},
         {"radius", opts_.radius.describe()},
         {"multiplier", multiplier_}};
  if (opts_.variant != ZoomingVariant::plain) {
    j["decomposition"] = decomp_->describe();
    j["quota_dim"] = dim_;
  }
  return j;
}

}  // namespace lipzoom
