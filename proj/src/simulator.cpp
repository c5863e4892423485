#include "lipzoom/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace lipzoom {

double RegretTrace::regret_at(std::uint64_t t) const {
  for (const auto& c : points)
    if (c.t == t) return c.regret;
  throw ValidationError("no checkpoint at t = " + std::to_string(t));
}

namespace {

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon, int per_octave) {
  std::set<std::uint64_t> grid;
  const int k = std::max(1, per_octave);
  for (int j = 0; j < 64; ++j) {
    for (int m = 0; m < k; ++m) {
      const double v = std::exp2(j + static_cast<double>(m) / k);
      if (v > static_cast<double>(horizon)) break;
      grid.insert(static_cast<std::uint64_t>(std::llround(v)));
    }
    if (std::exp2(j) > static_cast<double>(horizon)) break;
  }
  grid.insert(horizon);
  return {grid.begin(), grid.end()};
}

}  // namespace

RegretTrace run(Algorithm& alg, const Environment& env, const RunOptions& opts) {
  if (opts.horizon == 0) throw ValidationError("horizon must be positive");
  if (alg.feedback() != env.feedback())
    throw ValidationError(std::string("feedback mismatch: algorithm expects ") +
                          feedback_name(alg.feedback()) + ", environment provides " +
                          feedback_name(env.feedback()));

  RegretTrace trace;
  trace.algorithm = alg.name();
  trace.environment = env.name();
  trace.seed = opts.seed;
  trace.horizon = opts.horizon;
  trace.mu_star = env.mu_star();

  const auto grid = checkpoint_grid(opts.horizon, opts.checkpoints_per_octave);
  std::size_t next = 0;
  trace.points.push_back({0, 0.0, 0.0, 0});

  alg.start(derive_seed(opts.seed, Purpose::algorithm));
  Rng rng(derive_seed(opts.seed, Purpose::environment));
  std::vector<double> values;
  std::vector<Point> actions;
  if (opts.audit_accounting) actions.reserve(opts.horizon);

  double regret = 0.0, reward = 0.0;
  int last_phase = 0;
  for (std::uint64_t t = 1; t <= opts.horizon; ++t) {
    const Point& x = alg.act(t);
    const int phase = alg.phase();
    if (opts.phase_checkpoints && t > 1 && phase != last_phase && trace.points.back().t != t - 1)
      trace.points.push_back({t - 1, regret, reward, last_phase});
    last_phase = phase;

    double r = 0.0;
    env.sample(t, {&x, 1}, {&r, 1}, rng);
    const auto q = alg.queries();
    values.resize(q.size());
    if (!q.empty()) env.sample(t, q, values, rng);

    const double gap = trace.mu_star - env.mu(x);
    if (gap < -1e-12) ++trace.excess_rounds;
    regret += gap;
    reward += r;
    if (opts.audit_accounting) actions.push_back(x);

    alg.observe(t, r, values);

    if (next < grid.size() && grid[next] == t) {
      if (trace.points.back().t != t) trace.points.push_back({t, regret, reward, phase});
      ++next;
    }
  }
  alg.finish();

  if (opts.audit_accounting) {
    trace.accounting_checked = true;
    double check = 0.0;
    std::size_t c = 1;
    for (std::uint64_t t = 1; t <= opts.horizon; ++t) {
      check += trace.mu_star - env.mu(actions[t - 1]);
      while (c < trace.points.size() && trace.points[c].t == t) {
        if (trace.points[c].regret != check) trace.accounting_ok = false;
        ++c;
      }
    }
  }

  trace.audit = alg.audit().summary();
  json config = opts.config;
  if (config.empty()) config = {{"algorithm", alg.describe()}, {"environment", env.describe()}};
  trace.digest = config_digest(config);
  trace.sidecar = {{"config", config},
                   {"digest", trace.digest},
                   {"seed", opts.seed},
                   {"horizon", opts.horizon},
                   {"eta", env.space().resolution()},
                   {"mu_star", trace.mu_star},
                   {"mu_star_exact", env.mu_star_exact()},
                   {"truncation_error", env.truncation_error()},
                   {"excess_rounds", trace.excess_rounds},
                   {"audit", trace.audit}};
  if (trace.accounting_checked) trace.sidecar["accounting_ok"] = trace.accounting_ok;
  return trace;
}

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& task,
                  unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = cursor.fetch_add(1)) < jobs;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Aggregate replicate(const SetupFactory& factory, const RunOptions& opts,
                    const std::vector<std::uint64_t>& seeds, bool keep_traces, unsigned threads) {
  if (seeds.size() < 2) throw ValidationError("replication needs at least two seeds");
  std::vector<RegretTrace> traces(seeds.size());
  parallel_for(
      seeds.size(),
      [&](std::size_t i) {
        auto setup = factory(seeds[i]);
        RunOptions o = opts;
        o.seed = seeds[i];
        traces[i] = run(*setup.algorithm, *setup.environment, o);
      },
      threads);

  // Checkpoints shared by every trace.
  std::set<std::uint64_t> shared;
  for (const auto& c : traces.front().points) shared.insert(c.t);
  for (std::size_t i = 1; i < traces.size(); ++i) {
    std::set<std::uint64_t> mine;
    for (const auto& c : traces[i].points)
      if (shared.count(c.t)) mine.insert(c.t);
    shared = std::move(mine);
  }

  Aggregate agg;
  agg.runs = traces.size();
  const double m = static_cast<double>(traces.size());
  for (auto t : shared) {
    std::vector<double> r;
    double rew = 0;
    for (const auto& tr : traces) {
      for (const auto& c : tr.points) {
        if (c.t != t) continue;
        r.push_back(c.regret);
        rew += c.reward;
        break;
      }
    }
    double mean = 0, var = 0;
    for (double v : r) mean += v;
    mean /= m;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= m - 1.0;
    agg.t.push_back(t);
    agg.mean.push_back(mean);
    agg.stderr_.push_back(std::sqrt(var / m));
    agg.reward.push_back(rew / m);
  }
  if (keep_traces) agg.traces = std::move(traces);
  return agg;
}

SlopeFit slope_fit(const std::vector<std::uint64_t>& t, const std::vector<double>& regret,
                   std::uint64_t lo, std::uint64_t hi) {
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size() && i < regret.size(); ++i) {
    if (t[i] < lo || t[i] > hi) continue;
    if (!(regret[i] > 0)) {
      fit.note = "undefined (zero regret)";
      return fit;
    }
    xs.push_back(std::log(static_cast<double>(t[i])));
    ys.push_back(std::log(regret[i]));
  }
  fit.points = xs.size();
  if (xs.size() < 4) {
    fit.note = "fewer than 4 checkpoints in window";
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.gamma = sxy / sxx;
  fit.intercept = my - fit.gamma * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.gamma * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.defined = true;
  return fit;
}

SlopeFit slope_fit(const RegretTrace& trace, std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> t;
  std::vector<double> r;
  for (const auto& c : trace.points) {
    t.push_back(c.t);
    r.push_back(c.regret);
  }
  return slope_fit(t, r, lo, hi);
}

SlopeFit slope_fit(const Aggregate& agg, std::uint64_t lo, std::uint64_t hi) {
  return slope_fit(agg.t, agg.mean, lo, hi);
}

std::string config_digest(const json& config) {
  // FNV-1a over the canonical dump (object keys are sorted).
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LipzoomError("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const RegretTrace& trace) {
  auto out = open_out(path);
  out << "t,regret,reward,phase\n";
  for (const auto& c : trace.points)
    out << c.t << ',' << c.regret << ',' << c.reward << ',' << c.phase << '\n';
}

void write_aggregate_csv(const std::string& path, const Aggregate& agg) {
  auto out = open_out(path);
  out << "t,regret,reward,stderr\n";
  for (std::size_t i = 0; i < agg.t.size(); ++i)
    out << agg.t[i] << ',' << agg.mean[i] << ',' << agg.reward[i] << ',' << agg.stderr_[i] << '\n';
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json trace_sidecar(const RegretTrace& trace) { return trace.sidecar; }

}  // namespace lipzoom
