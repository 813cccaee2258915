#pragma once

#include "stravg/config.hpp"

namespace stravg {

// Built-in demo configurations for the CLI. example1/2/3 follow the three
// worked growing schedules, counterexample reproduces the rays family, and
// staged exercises the eps-reduction driver on a mixed finite/infinite
// problem.

inline ExperimentConfig demo_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.seed = 20240817;
  if (name == "example1" || name == "example2") {
    // consistent 3x3 system with solution (1, -2, 0.5)
    c.family.kind = "linear_system";
    c.family.A = {{2.0, 1.0, 0.0}, {1.0, 3.0, 1.0}, {0.0, 1.0, 2.0}};
    c.family.b = {0.0, -4.5, -1.0};
    c.schedule.kind = name == "example1" ? "cimmino_growing" : "kaczmarz_growing";
    c.mode = "plain";
    c.x0 = Vector{4.0, 4.0, 4.0};
    c.stop.max_iters = 10000;
    c.watch = {1, 2, 3};
    c.trace.thin = 10;
    c.checks.any = true;
    c.checks.uasc = true;
    c.checks.divergent_k_max = 10000;
    c.checks.fk.a = 1.0;  // f_r = 1/r, kappa_r = r
    c.checks.c2 = true;
    c.checks.r_max = 200;
  } else if (name == "example3") {
    c.family.kind = "sets";
    c.family.sets = json::array({
        json{{"type", "halfspace"}, {"a", {1.0, 1.0}}, {"b", 2.0}},
        json{{"type", "hyperplane"}, {"a", {1.0, -1.0}}, {"b", 0.0}},
        json{{"type", "halfspace"}, {"a", {-1.0, 0.0}}, {"b", 0.0}},
        json{{"type", "halfspace"}, {"a", {0.0, -1.0}}, {"b", 0.0}},
    });
    c.schedule.kind = "odd_even";
    c.mode = "plain";
    c.x0 = Vector{3.0, -2.0};
    c.stop.max_iters = 20000;
    c.watch = {1, 2, 3, 4};
    c.trace.thin = 20;
    c.checks.any = true;
    c.checks.c1 = true;
    c.checks.c2 = true;
    c.checks.fk.a = 0.5;  // f_r = 1/(2(r+1))
    c.checks.fk.b = 1.0;
    c.checks.fk.mul = 2;  // kappa_r = 2r
    c.checks.r_max = 1000;
    c.checks.uasc = true;
  } else if (name == "counterexample") {
    c.family.kind = "rays_counterexample";
    c.family.prefix_len = 20000;
    c.schedule.kind = "rays_natural";
    c.mode = "plain";
    c.stop.max_iters = 19999;
    c.stop.displacement_tol = 1e-12;  // never fires: the iterates keep circling
    c.stop.displacement_window = 10;
    c.trace.thin = 20;
  } else if (name == "staged") {
    c.family.kind = "descending_chain";
    c.family.center = {0.0, 0.0};
    c.family.radius_rule = "one_plus_inv";
    c.family.radius_base = 1.0;
    c.schedule.kind = "per_stage_cimmino";
    c.mode = "staged_eps";
    c.stages = {{2, 10}, {4, 100}, {8, 1000}};
    c.x0 = Vector{4.0, -3.0};
    c.watch = {1, 2, 3, 4};
    c.trace.thin = 1;
  } else {
    throw std::invalid_argument("unknown demo \"" + name +
                                "\" (choose example1, example2, example3, counterexample, "
                                "staged)");
  }
  return c;
}

inline std::vector<std::string> demo_names() {
  return {"example1", "example2", "example3", "counterexample", "staged"};
}

}  // namespace stravg
