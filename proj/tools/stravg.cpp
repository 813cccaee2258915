// Experiment CLI: run configured experiments, evaluate hypothesis checks,
// replay traces, and run the built-in demos.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "stravg/demos.hpp"
#include "stravg/experiment.hpp"

namespace {

struct Overrides {
  std::optional<long> max_iters;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string watch;  // comma-separated indices
};

void apply_overrides(stravg::ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.max_iters) cfg.stop.max_iters = *ov.max_iters;
  if (ov.seed) cfg.seed = *ov.seed;
  if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
  if (!ov.watch.empty()) {
    cfg.watch.clear();
    std::stringstream ss(ov.watch);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const int i = std::stoi(tok);
      if (i < 1) throw std::invalid_argument("--watch indices must be >= 1");
      cfg.watch.push_back(i);
    }
  }
}

int load_config(const std::string& path, stravg::ExperimentConfig& out) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error: cannot open " << path << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << f.rdbuf();
  stravg::ParseResult parsed = stravg::parse_config(buf.str());
  if (!parsed.ok()) {
    std::cerr << "configuration errors:\n";
    for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
    return 1;
  }
  out = *parsed.config;
  return 0;
}

int do_run(stravg::ExperimentConfig cfg, const Overrides& ov) {
  apply_overrides(cfg, ov);
  try {
    stravg::ExperimentResult res = stravg::run_experiment(cfg);
    std::cout << res.summary;
    std::cout << "artifacts: " << res.trace_path.string() << ", " << res.csv_path.string()
              << ", " << res.plot_path.string() << "\n";
    if (res.exit_code != 0) std::cerr << "engine abort: " << res.trace.diagnostic << "\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "engine abort: " << e.what() << "\n";
    return 2;
  }
}

int do_check(stravg::ExperimentConfig cfg, const Overrides& ov) {
  apply_overrides(cfg, ov);
  try {
    stravg::ExperimentSetup setup = stravg::build_experiment(cfg);
    std::map<int, stravg::DivergenceInfo> div;
    std::string text;
    auto reports = stravg::run_checks(cfg, setup, div, text);
    std::cout << text << stravg::theorem_applicability(cfg, reports, div);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"string-averaging convex feasibility experiments"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, trace_path, demo_name;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--max-iters", ov.max_iters, "override the max-iterations stop rule");
    cmd->add_option("--seed", ov.seed, "override the top-level seed");
    cmd->add_option("--out-dir", ov.out_dir, "override the artifact directory");
    cmd->add_option("--watch", ov.watch, "override watch indices, e.g. 1,2,5");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  add_overrides(run_cmd);

  CLI::App* check_cmd =
      app.add_subcommand("check", "evaluate hypothesis checks only, no iteration");
  check_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  add_overrides(check_cmd);

  CLI::App* replay_cmd = app.add_subcommand("replay", "re-run a trace and verify step norms");
  replay_cmd->add_option("trace", trace_path, "trace file (.ndjson)")->required();

  CLI::App* demo_cmd = app.add_subcommand("demo", "run a built-in demo configuration");
  std::string names;
  for (const auto& n : stravg::demo_names()) names += n + " ";
  demo_cmd->add_option("name", demo_name, "one of: " + names)->required();
  add_overrides(demo_cmd);

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed() || check_cmd->parsed()) {
    stravg::ExperimentConfig cfg;
    if (int rc = load_config(config_path, cfg); rc != 0) return rc;
    return run_cmd->parsed() ? do_run(std::move(cfg), ov) : do_check(std::move(cfg), ov);
  }
  if (replay_cmd->parsed()) {
    stravg::ReplayResult r = stravg::replay(trace_path);
    std::cout << r.message << "\n";
    if (r.first_divergence_k) std::cout << "first divergence at k = " << *r.first_divergence_k << "\n";
    return r.exit_code;
  }
  if (demo_cmd->parsed()) {
    try {
      return do_run(stravg::demo_config(demo_name), ov);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
