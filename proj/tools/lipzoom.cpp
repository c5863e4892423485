// Command-line front end: run, sweep, audit, dims, describe.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lipzoom/analysis.hpp"
#include "lipzoom/config.hpp"
#include "lipzoom/simulator.hpp"
#include "lipzoom/zooming.hpp"

namespace fs = std::filesystem;
using namespace lipzoom;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<std::string> out;
};

std::string output_root(const RunConfig& cfg, const Overrides& ov) {
  if (ov.out) return *ov.out;
  if (const char* env = std::getenv("LIPZOOM_OUT"); env && *env) return env;
  return cfg.out;
}

RunConfig load_config(const std::string& path, const Overrides& ov) {
  auto cfg = parse_run_config(load_json(path));
  if (ov.seed) cfg.seeds = {*ov.seed};
  if (ov.horizon) cfg.horizon = *ov.horizon;
  cfg.out = output_root(cfg, ov);
  cfg.validate();
  return cfg;
}

// Configuration minus the output location, so digests do not depend on it.
json digest_config(const RunConfig& cfg, std::uint64_t seed) {
  json j = cfg.to_json();
  j.erase("out");
  j.erase("seeds");
  j["seed"] = seed;
  return j;
}

json run_config_set(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  RunOptions opts;
  opts.horizon = cfg.horizon;
  opts.checkpoints_per_octave = cfg.checkpoints_per_octave;
  opts.audit_accounting = true;

  std::vector<RegretTrace> traces(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    auto setup = cfg.build(cfg.seeds[i]);
    RunOptions o = opts;
    o.seed = cfg.seeds[i];
    o.config = digest_config(cfg, o.seed);
    traces[i] = run(*setup.algorithm, *setup.environment, o);
  });

  json manifest{{"label", cfg.label}, {"traces", json::array()}};
  for (const auto& tr : traces) {
    const std::string stem = "seed_" + std::to_string(tr.seed);
    write_trace_csv((dir / (stem + ".csv")).string(), tr);
    write_json((dir / (stem + ".json")).string(), tr.sidecar);
    manifest["traces"].push_back({{"seed", tr.seed},
                                  {"digest", tr.digest},
                                  {"csv", (dir / (stem + ".csv")).string()},
                                  {"final_regret", tr.final_regret()}});
  }
  if (traces.size() >= 2) {
    // Re-aggregate the finished traces over their shared checkpoints.
    Aggregate agg;
    agg.runs = traces.size();
    for (const auto& c : traces.front().points) {
      double sum = 0, rew = 0;
      std::vector<double> vals;
      bool shared = true;
      for (const auto& tr : traces) {
        bool found = false;
        for (const auto& d : tr.points)
          if (d.t == c.t) {
            vals.push_back(d.regret);
            sum += d.regret;
            rew += d.reward;
            found = true;
            break;
          }
        shared = shared && found;
      }
      if (!shared) continue;
      const double m = static_cast<double>(vals.size());
      const double mean = sum / m;
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= m - 1;
      agg.t.push_back(c.t);
      agg.mean.push_back(mean);
      agg.stderr_.push_back(std::sqrt(var / m));
      agg.reward.push_back(rew / m);
    }
    write_aggregate_csv((dir / "aggregate.csv").string(), agg);
    manifest["aggregate"] = (dir / "aggregate.csv").string();
  }
  manifest["config_digest"] = config_digest(digest_config(cfg, 0));
  write_json((dir / "manifest.json").string(), manifest);
  return manifest;
}

int cmd_run(const std::string& path, const Overrides& ov) {
  const auto cfg = load_config(path, ov);
  const auto manifest = run_config_set(cfg, fs::path(cfg.out) / cfg.label);
  std::cout << "wrote " << manifest["traces"].size() << " trace(s) to "
            << (fs::path(cfg.out) / cfg.label).string() << "\n";
  return kOk;
}

std::string dotted_to_pointer(const std::string& key) {
  std::string p = "/";
  for (char c : key) p += c == '.' ? '/' : c;
  return p;
}

int cmd_sweep(const std::string& path, const Overrides& ov) {
  json base = load_json(path);
  if (!base.contains("grid") || !base["grid"].is_object() || base["grid"].empty())
    throw ValidationError("sweep needs a non-empty \"grid\" object");
  const json grid = base["grid"];
  base.erase("grid");
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& [k, v] : grid.items()) {
    if (!v.is_array() || v.empty()) throw ValidationError("grid axis \"" + k + "\" is empty");
    axes.emplace_back(k, v);
  }

  const std::string label = base.value("label", std::string("sweep"));
  json manifest{{"label", label}, {"points", json::array()}};
  std::vector<std::size_t> idx(axes.size(), 0);
  std::string root;
  for (std::size_t point = 0;; ++point) {
    json cfg_json = base;
    json values = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      cfg_json[json::json_pointer(dotted_to_pointer(axes[a].first))] = axes[a].second[idx[a]];
      values[axes[a].first] = axes[a].second[idx[a]];
    }
    cfg_json["label"] = label + "/point_" + std::to_string(point);
    auto cfg = parse_run_config(cfg_json);
    if (ov.seed) cfg.seeds = {*ov.seed};
    if (ov.horizon) cfg.horizon = *ov.horizon;
    cfg.out = output_root(cfg, ov);
    cfg.validate();
    root = cfg.out;
    auto m = run_config_set(cfg, fs::path(cfg.out) / cfg.label);
    manifest["points"].push_back({{"values", values}, {"manifest", m}});

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  fs::create_directories(fs::path(root) / label);
  write_json((fs::path(root) / label / "manifest.json").string(), manifest);
  std::cout << "wrote " << manifest["points"].size() << " grid point(s) to "
            << (fs::path(root) / label).string() << "\n";
  return kOk;
}

int cmd_audit(std::string path, std::uint64_t stride, const Overrides& ov) {
  // A trace CSV is audited through its sidecar.
  if (fs::path(path).extension() == ".csv") path = fs::path(path).replace_extension(".json").string();
  if (!fs::exists(path)) throw ValidationError("no such trace: " + path);
  const json sidecar = load_json(path);
  if (!sidecar.contains("config") || !sidecar.contains("seed"))
    throw ValidationError(path + " is not a trace sidecar");
  json cfg_json = sidecar["config"];
  const auto seed = sidecar["seed"].get<std::uint64_t>();
  cfg_json["seeds"] = json::array({seed});
  const auto cfg = parse_run_config(cfg_json);
  auto setup = cfg.build(seed);

  CleanRunAuditor clean(*setup.environment);
  CoveringProbeAuditor probes(seed, 200, stride);
  auto* zooming = dynamic_cast<Zooming*>(setup.algorithm.get());
  if (zooming) {
    zooming->add_observer(&clean);
    if (zooming->options().variant == ZoomingVariant::plain) zooming->add_observer(&probes);
  }
  RunOptions opts;
  opts.horizon = cfg.horizon;
  opts.seed = seed;
  opts.checkpoints_per_octave = cfg.checkpoints_per_octave;
  opts.audit_accounting = true;
  opts.config = sidecar["config"];
  const auto trace = run(*setup.algorithm, *setup.environment, opts);

  json report{{"trace", path},
              {"digest", trace.digest},
              {"reproduced", trace.digest == sidecar.value("digest", std::string())},
              {"accounting_ok", trace.accounting_ok},
              {"excess_rounds", trace.excess_rounds},
              {"audit_log", trace.audit}};
  if (zooming) {
    json phases = json::array();
    std::size_t clean_count = 0, complete = 0;
    for (const auto& p : clean.phases()) {
      phases.push_back({{"phase", p.phase},
                        {"clean", p.clean},
                        {"complete", p.complete},
                        {"arms", p.arms},
                        {"lemma_violations", p.lemma_violations},
                        {"packing_violations", p.packing_violations},
                        {"pull_violations", p.pull_violations}});
      if (p.complete) {
        ++complete;
        clean_count += p.clean;
      }
    }
    report["phases"] = phases;
    report["cross_tab"] = clean.cross_tab();
    report["clean_fraction"] = complete ? static_cast<double>(clean_count) / complete : 1.0;
    report["probe_rounds"] = probes.audited_rounds();
    report["probe_violations"] = probes.violations();
  }
  const fs::path out = ov.out ? fs::path(*ov.out) : fs::path(path).parent_path();
  fs::create_directories(out);
  const auto dest = out / (fs::path(path).stem().string() + ".audit.json");
  write_json(dest.string(), report);
  std::cout << "wrote " << dest.string() << "\n";
  if (report.contains("clean_fraction"))
    std::cout << "clean phases: " << report["clean_fraction"].get<double>() * 100 << "%\n";
  return kOk;
}

json inline_or_file(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("bad inline JSON: ") + e.what());
    }
  }
  return load_json(arg);
}

int cmd_dims(const std::string& space_arg, const std::string& env_arg, int lo, int hi, double c,
             bool log_covering, const Overrides& ov) {
  json spec = inline_or_file(space_arg);
  // A run configuration can stand in for a bare space descriptor.
  json env_json;
  if (spec.contains("space")) {
    if (spec.contains("environment")) env_json = spec["environment"];
    spec = spec["space"];
  }
  if (!env_arg.empty()) env_json = inline_or_file(env_arg);
  auto space = make_space(spec);
  const auto scales = dyadic_scales(lo, hi);
  json report{{"space", space->describe()}};
  report["covering"] = covering_dimension_fit(*space, scales, log_covering).to_json();
  if (!env_json.is_null()) {
    auto env = make_environment(env_json, space, ov.seed.value_or(0));
    report["zooming"] = zooming_dimension_estimate(*env, c, dyadic_scales(1, std::max(hi, 2) - 2)).to_json();
    report["zooming"]["c"] = c;
  }
  const fs::path out = ov.out ? fs::path(*ov.out)
                              : fs::path(std::getenv("LIPZOOM_OUT") ? std::getenv("LIPZOOM_OUT") : "out");
  fs::create_directories(out);
  const auto dest = out / "dims.json";
  write_json(dest.string(), report);
  std::cout << "covering dimension " << report["covering"]["dimension"].get<double>();
  if (report.contains("zooming"))
    std::cout << ", zooming dimension " << report["zooming"]["dimension"].get<double>();
  std::cout << "\nwrote " << dest.string() << "\n";
  return kOk;
}

int cmd_describe(const std::string& path, const Overrides& ov) {
  const auto cfg = load_config(path, ov);
  auto setup = cfg.build(cfg.seeds.front());
  json j{{"config", cfg.to_json()},
         {"digest", config_digest(digest_config(cfg, cfg.seeds.front()))},
         {"environment", setup.environment->describe()},
         {"algorithm", setup.algorithm->describe()}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz bandit and experts simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::uint64_t seed = 0, horizon = 0;
  std::string out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Run a single seed");
    sub->add_option("--horizon", horizon, "Override the horizon");
    sub->add_option("--out", out, "Output directory");
  };

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a configuration");
  run_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();
  add_common(run_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  sweep_cmd->add_option("config", config_path, "Configuration with a \"grid\" object")->required();
  add_common(sweep_cmd);

  std::string trace_path;
  std::uint64_t stride = 16;
  auto* audit_cmd = app.add_subcommand("audit", "Re-run a trace with invariant audits");
  audit_cmd->add_option("trace", trace_path, "Trace CSV or its JSON sidecar")->required();
  audit_cmd->add_option("--stride", stride, "Probe every stride-th round")->check(CLI::PositiveNumber);
  add_common(audit_cmd);

  std::string space_arg, env_arg;
  int lo = 3, hi = 10;
  double c = 16.0;
  bool log_covering = false;
  auto* dims_cmd = app.add_subcommand("dims", "Dimension report for a space");
  dims_cmd->add_option("space", space_arg, "Space descriptor, run configuration, or inline JSON")
      ->required();
  dims_cmd->add_option("--env", env_arg, "Instance descriptor for the zooming dimension");
  dims_cmd->add_option("--lo", lo, "Largest scale 2^-lo");
  dims_cmd->add_option("--hi", hi, "Smallest scale 2^-hi");
  dims_cmd->add_option("-c", c, "Zooming multiplier");
  dims_cmd->add_flag("--log-covering", log_covering, "Fit the log-covering dimension");
  add_common(dims_cmd);

  auto* describe_cmd = app.add_subcommand("describe", "Print resolved descriptors");
  describe_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();
  add_common(describe_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--horizon")) ov.horizon = horizon;
  if (sub->count("--out")) ov.out = out;

  try {
    if (sub == run_cmd) return cmd_run(config_path, ov);
    if (sub == sweep_cmd) return cmd_sweep(config_path, ov);
    if (sub == audit_cmd) return cmd_audit(trace_path, stride, ov);
    if (sub == dims_cmd) return cmd_dims(space_arg, env_arg, lo, hi, c, log_covering, ov);
    if (sub == describe_cmd) return cmd_describe(config_path, ov);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const KindMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
  return kValidation;
}
