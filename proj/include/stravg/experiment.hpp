#pragma once

#include <filesystem>
#include <fstream>

#include "stravg/config.hpp"

namespace stravg {

// Artifact formats. The trace streams as NDJSON (one object per line with
// a "type" tag: meta, step, stage, end) and summarizes as a CSV table with
// columns k, step_norm, then d_<i> per watch index. Doubles are written
// with shortest round-trip formatting, so replay can compare them
// bit-for-bit after parsing.

inline json step_to_json(const StepRecord& r) {
  json j;
  j["type"] = "step";
  j["k"] = r.k;
  j["step_norm"] = r.step_norm;
  if (!r.watch_dist.empty()) j["d"] = r.watch_dist;
  if (r.iterate) j["x"] = *r.iterate;
  return j;
}

inline json stage_to_json(const StageMark& m) {
  json j;
  j["type"] = "stage";
  j["stage"] = m.stage;
  j["m"] = m.params.m;
  j["N"] = m.params.N;
  j["eps"] = m.eps;
  j["first_k"] = m.first_k;
  j["steps"] = m.steps;
  j["reached"] = m.reached;
  return j;
}

inline void write_trace_ndjson(const Trace& trace, const ExperimentConfig& config,
                               std::ostream& os) {
  json meta;
  meta["type"] = "meta";
  meta["schema_version"] = 1;
  meta["config"] = serialize_config(config);
  meta["mode"] = to_string(trace.mode);
  if (trace.eps > 0.0) meta["eps"] = trace.eps;
  if (!trace.watch.empty()) meta["watch"] = trace.watch;
  meta["x0"] = trace.x0;
  os << meta.dump() << '\n';

  std::size_t next_stage = 0;
  for (const auto& r : trace.records) {
    while (next_stage < trace.stages.size() && trace.stages[next_stage].first_k <= r.k)
      os << stage_to_json(trace.stages[next_stage++]).dump() << '\n';
    os << step_to_json(r).dump() << '\n';
  }
  while (next_stage < trace.stages.size())
    os << stage_to_json(trace.stages[next_stage++]).dump() << '\n';

  json end;
  end["type"] = "end";
  end["stop_reason"] = to_string(trace.stop_reason);
  end["steps"] = trace.steps;
  end["x_final"] = trace.x_final;
  if (!trace.final_watch_dist.empty()) end["final_watch_dist"] = trace.final_watch_dist;
  if (!trace.tracked.empty()) {
    end["tracked"] = trace.tracked;
    end["cum_index_weight"] = trace.cum_index_weight;
  }
  end["perturbation_norm_sum"] = trace.perturbation_norm_sum;
  if (!trace.diagnostic.empty()) end["diagnostic"] = trace.diagnostic;
  os << end.dump() << '\n';
}

inline void write_summary_csv(const Trace& trace, std::ostream& os, long max_rows = -1) {
  os << "k,step_norm";
  for (int i : trace.watch) os << ",d_" << i;
  os << '\n';
  long stride = 1;
  if (max_rows > 0 && static_cast<long>(trace.records.size()) > max_rows)
    stride = (static_cast<long>(trace.records.size()) + max_rows - 1) / max_rows;
  json num;  // reuse nlohmann's shortest round-trip double formatting
  for (std::size_t idx = 0; idx < trace.records.size(); idx += static_cast<std::size_t>(stride)) {
    const auto& r = trace.records[idx];
    num = r.step_norm;
    os << r.k << ',' << num.dump();
    for (std::size_t j = 0; j < trace.watch.size(); ++j) {
      os << ',';
      if (j < r.watch_dist.size()) {
        num = r.watch_dist[j];
        os << num.dump();
      }
    }
    os << '\n';
  }
}

struct ExperimentResult {
  int exit_code = 0;  // 0 ok, 1 validation, 2 engine abort
  Trace trace;
  std::vector<HypothesisReport> reports;
  std::string report_text;
  std::string summary;  // one-screen human summary
  std::filesystem::path trace_path, csv_path, plot_path, report_path;
};

/// Which convergence guarantees' hypotheses are supported by the
/// configured checks on their horizons. Informational only.
inline std::string theorem_applicability(const ExperimentConfig& c,
                                         const std::vector<HypothesisReport>& reports,
                                         const std::map<int, DivergenceInfo>& div) {
  std::ostringstream os;
  bool c1 = false, c2 = false, uasc = false;
  for (const auto& r : reports) {
    if (r.id == "C1" && r.verdict == Verdict::holds_on_horizon) c1 = true;
    if (r.id == "C2" && r.verdict == Verdict::holds_on_horizon) c2 = true;
    if (r.id == "UASC_FINITE" && r.verdict == Verdict::holds_on_horizon) uasc = true;
  }
  bool all_div = !div.empty();
  for (const auto& [i, info] : div)
    all_div &= info.classification == DivergenceClass::apparently_divergent;

  if (c1 && c2)
    os << "second-theorem conditions C1+C2 hold on the horizon; convergence to the "
          "intersection is expected\n";
  if (uasc && all_div && !div.empty())
    os << "finite collection (UASC) with apparently divergent weight sums: third-theorem "
          "hypotheses supported on the horizon\n";
  else if (uasc)
    os << "finite collection: UASC holds\n";
  if (all_div && !div.empty() && !uasc && !(c1 && c2))
    os << "weight sums apparently divergent on the horizon (first/third-theorem weight "
          "condition)\n";
  if (c.mode == "perturbed" || c.mode == "superiorized")
    os << "perturbations with a finite declared bound: fourth-theorem resilience applies when "
          "the underlying conditions hold\n";
  if (c.mode == "eps")
    os << "eps-thresholded run: fifth-theorem guarantee targets distance <= eps per divergent "
          "index\n";
  if (c.mode == "staged_eps")
    os << "staged eps reduction per the fifth theorem's repeated application\n";
  std::string s = os.str();
  return s.empty() ? std::string("no hypothesis checks configured\n") : s;
}

inline std::vector<HypothesisReport> run_checks(const ExperimentConfig& c,
                                                const ExperimentSetup& setup,
                                                std::map<int, DivergenceInfo>& div_out,
                                                std::string& text_out) {
  std::vector<HypothesisReport> reports;
  std::ostringstream os;
  const Schedule* sched = setup.schedule ? &*setup.schedule : nullptr;
  const std::vector<int>& tracked = c.checks.tracked.empty() ? c.watch : c.checks.tracked;

  if (c.checks.c1 && sched) {
    reports.push_back(check_C1(*sched, c.checks.fk.f(), c.checks.fk.kappa(), c.checks.r_max));
    os << reports.back().to_text() << '\n';
  }
  if (c.checks.c2 && sched) {
    auto window = c.checks.c2_window ? *c.checks.c2_window : default_c2_window(c.checks.r_max);
    reports.push_back(check_C2(*sched, setup.family, c.checks.fk.f(), c.checks.fk.kappa(),
                               window.first, window.second, tracked));
    os << reports.back().to_text() << '\n';
  }
  if (c.checks.h123_k_max && sched) {
    const int K = c.checks.h123_K > 0 ? c.checks.h123_K : setup.family.stored_count();
    H123Report h = check_H123(*sched, setup.family, K, *c.checks.h123_k_max);
    reports.push_back(h.h1);
    reports.push_back(h.h2);
    reports.push_back(h.h3);
    os << h.h1.to_text() << '\n' << h.h2.to_text() << '\n' << h.h3.to_text() << '\n';
  }
  if (c.checks.uasc) {
    reports.push_back(check_UASC_finite(setup.family));
    os << reports.back().to_text() << '\n';
  }
  if (c.checks.divergent_k_max && sched) {
    const std::vector<int>& idx =
        c.checks.divergent_indices.empty() ? tracked : c.checks.divergent_indices;
    if (!idx.empty()) {
      div_out = check_divergent_sums(*sched, idx, *c.checks.divergent_k_max,
                                     c.checks.divergent_thresholds);
      os << "DIVERGENT_SUM over k <= " << *c.checks.divergent_k_max << ":\n";
      for (const auto& [i, info] : div_out)
        os << "  index " << i << ": partial sum " << info.partial_sum << ", last-decade increment "
           << info.last_decade_increment << " -> " << to_string(info.classification) << '\n';
    }
  }
  text_out = os.str();
  return reports;
}

/// Runs the configured experiment and writes trace/summary/plot/report
/// artifacts under out_dir. Engine aborts surface as exit code 2.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const std::string& out_dir_override = "") {
  ExperimentResult res;
  ExperimentSetup setup = build_experiment(config);

  if (config.mode == "staged_eps") {
    res.trace = run_staged_eps(setup.family, setup.stage_factory,
                               setup.plan ? &*setup.plan : nullptr, setup.x0, setup.stages,
                               setup.options, config.stage_cap);
  } else {
    res.trace = run(setup.family, *setup.schedule, setup.mode,
                    setup.plan ? &*setup.plan : nullptr, setup.x0, setup.stop, setup.options,
                    setup.eps);
  }

  std::map<int, DivergenceInfo> div;
  res.reports = run_checks(config, setup, div, res.report_text);

  std::ostringstream sum;
  sum << config.name << ": mode " << config.mode << ", " << res.trace.steps
      << " iterations, stop reason " << to_string(res.trace.stop_reason) << '\n';
  if (!res.trace.final_watch_dist.empty()) {
    double mx = 0.0;
    for (double d : res.trace.final_watch_dist) mx = std::max(mx, d);
    sum << "  max watched distance at the final iterate: " << mx << '\n';
  }
  if (!res.trace.stages.empty()) {
    for (const auto& m : res.trace.stages)
      sum << "  stage " << m.stage << " (m=" << m.params.m << ", N=" << m.params.N
          << ", eps=" << m.eps << "): " << m.steps << " steps, "
          << (m.reached ? "reached 1/N" : "NOT reached") << '\n';
  }
  if (setup.rays) {
    // direction oscillation of the control sequence over the final 10%
    const auto& dirs = setup.rays->theta.dir;
    const std::size_t n = static_cast<std::size_t>(res.trace.steps);
    const std::size_t lo = n - n / 10;
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (std::size_t k = lo; k <= n && k < dirs.size(); ++k) {
      mn = std::min(mn, dirs[k]);
      mx = std::max(mx, dirs[k]);
    }
    sum << "  direction oscillation over the final 10% of steps: " << (mx - mn) << " rad\n";
    sum << "  final iterate norm: " << norm(res.trace.x_final) << '\n';
  }
  if (!res.trace.diagnostic.empty()) sum << "  diagnostic: " << res.trace.diagnostic << '\n';
  if (!res.report_text.empty()) sum << res.report_text;
  sum << theorem_applicability(config, res.reports, div);
  res.summary = sum.str();

  const std::filesystem::path dir(out_dir_override.empty() ? config.out_dir : out_dir_override);
  std::filesystem::create_directories(dir);
  res.trace_path = dir / (config.name + ".trace.ndjson");
  res.csv_path = dir / (config.name + ".summary.csv");
  res.plot_path = dir / (config.name + ".plot.csv");
  res.report_path = dir / (config.name + ".reports.txt");
  {
    std::ofstream f(res.trace_path);
    write_trace_ndjson(res.trace, config, f);
  }
  {
    std::ofstream f(res.csv_path);
    write_summary_csv(res.trace, f);
  }
  {
    std::ofstream f(res.plot_path);
    write_summary_csv(res.trace, f, 2048);
  }
  {
    std::ofstream f(res.report_path);
    f << res.report_text << theorem_applicability(config, res.reports, div);
  }

  if (res.trace.stop_reason == StopReason::aborted_nonfinite ||
      res.trace.stop_reason == StopReason::stage_cap_exceeded)
    res.exit_code = 2;
  return res;
}

struct ReplayResult {
  bool ok = false;
  int exit_code = 1;
  std::optional<long> first_divergence_k;
  std::string message;
};

/// Re-runs the experiment recorded in a trace's metadata and verifies the
/// recorded step norms bit-for-bit (thinned traces compare the recorded
/// steps only).
inline ReplayResult replay(const std::string& trace_path) {
  ReplayResult out;
  std::ifstream f(trace_path);
  if (!f) {
    out.message = "cannot open " + trace_path;
    return out;
  }
  std::string line;
  if (!std::getline(f, line)) {
    out.message = "empty trace file";
    return out;
  }
  json meta;
  try {
    meta = json::parse(line);
  } catch (const std::exception& e) {
    out.message = std::string("metadata line is not valid JSON: ") + e.what();
    return out;
  }
  if (!meta.contains("type") || meta["type"] != "meta" || !meta.contains("config")) {
    out.message = "trace is missing its metadata record";
    return out;
  }
  ParseResult parsed = parse_config_json(meta["config"]);
  if (!parsed.ok()) {
    out.message = "embedded config failed validation: " + parsed.errors.front();
    return out;
  }

  struct Recorded {
    long k;
    double step_norm;
  };
  std::vector<Recorded> recorded;
  long stage_marks = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "step") recorded.push_back({j["k"].get<long>(), j["step_norm"].get<double>()});
    if (type == "stage") ++stage_marks;
  }

  ExperimentConfig cfg = *parsed.config;
  ExperimentSetup setup = build_experiment(cfg);
  Trace trace;
  if (cfg.mode == "staged_eps")
    trace = run_staged_eps(setup.family, setup.stage_factory, setup.plan ? &*setup.plan : nullptr,
                           setup.x0, setup.stages, setup.options, cfg.stage_cap);
  else
    trace = run(setup.family, *setup.schedule, setup.mode, setup.plan ? &*setup.plan : nullptr,
                setup.x0, setup.stop, setup.options, setup.eps);

  if (trace.records.size() != recorded.size()) {
    out.message = "replay produced " + std::to_string(trace.records.size()) +
                  " records, trace has " + std::to_string(recorded.size());
    out.exit_code = 3;
    if (!trace.records.empty() && !recorded.empty()) {
      const std::size_t upto = std::min(trace.records.size(), recorded.size());
      for (std::size_t i = 0; i < upto; ++i)
        if (trace.records[i].step_norm != recorded[i].step_norm) {
          out.first_divergence_k = recorded[i].k;
          break;
        }
    }
    return out;
  }
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (trace.records[i].k != recorded[i].k ||
        trace.records[i].step_norm != recorded[i].step_norm) {
      out.first_divergence_k = recorded[i].k;
      out.exit_code = 3;
      out.message = "step norms diverge at k = " + std::to_string(recorded[i].k);
      return out;
    }
  }
  if (stage_marks != static_cast<long>(trace.stages.size())) {
    out.exit_code = 3;
    out.message = "stage marker count differs";
    return out;
  }
  out.ok = true;
  out.exit_code = 0;
  out.message = "replay verified " + std::to_string(recorded.size()) + " recorded steps";
  return out;
}

}  // namespace stravg
