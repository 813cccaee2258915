#pragma once

#include <json.hpp>

#include "stravg/analysis.hpp"
#include "stravg/families.hpp"

namespace stravg {

using json = nlohmann::json;

// Experiment configuration: a JSON document with nested sections (the
// exact grammar is documented in the README). parse_config validates the
// whole document and reports every violation with its path rather than
// stopping at the first.

struct FamilySpec {
  std::string kind;  // linear_system | sets | descending_chain | triangles | rays_counterexample
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  json sets;  // explicit set descriptions (validated against the catalog)
  Vector center;
  std::string radius_rule = "one_plus_inv";  // one_plus_inv | constant | inv
  double radius_base = 1.0;
  long prefix_len = 0;
};

struct ScheduleSpec {
  std::string kind;  // cimmino_growing | kaczmarz_growing | odd_even | cyclic_single |
                     // cyclic_cimmino | cyclic_kaczmarz | custom | rays_natural |
                     // per_stage_cimmino | per_stage_kaczmarz | per_stage_single
  std::string perm = "seeded";  // identity | seeded
  int K = 0;                    // cyclic kinds
  json table;                   // custom: array of arrays of {string, weight}
  std::string tail = "repeat_last";  // repeat_last | cycle
};

struct PlanSpec {
  std::string kind = "zero";  // zero | decay | superiorized
  double coeff = 0.0;
  double ratio = 0.5;
  std::string direction = "random_unit";  // random_unit | fixed
  Vector vector;                          // fixed direction / u
};

struct StopSpec {
  std::optional<long> max_iters;
  std::optional<double> displacement_tol;
  int displacement_window = 1;
  std::optional<double> feasibility_tol;
};

struct FKappaSpec {
  // f_r = a / (r + b), or a constant when is_const
  bool is_const = false;
  double const_value = 0.0;
  double a = 1.0;
  double b = 0.0;
  // kappa_r = mul * r + add
  long mul = 1;
  long add = 0;

  SequenceFn f() const {
    if (is_const) return [v = const_value](long) { return v; };
    return [a = a, b = b](long r) { return a / (static_cast<double>(r) + b); };
  }
  KappaFn kappa() const {
    return [m = mul, c = add](long r) { return m * r + c; };
  }
};

struct ChecksSpec {
  bool any = false;
  bool c1 = false;
  bool c2 = false;
  FKappaSpec fk;
  long r_max = 100;
  std::optional<std::pair<long, long>> c2_window;
  std::vector<int> tracked;  // defaults to watch list
  std::optional<long> h123_k_max;
  int h123_K = 0;  // defaults to family size when 0
  bool uasc = false;
  std::optional<long> divergent_k_max;
  std::vector<int> divergent_indices;  // defaults to tracked
  DivergenceThresholds divergent_thresholds;
};

struct TraceSpec {
  long thin = 1;
  bool store_iterates = false;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  FamilySpec family;
  ScheduleSpec schedule;
  std::string mode = "plain";  // plain | perturbed | superiorized | eps | staged_eps
  PlanSpec plan;
  double epsilon = 0.0;
  std::vector<Stage> stages;
  long stage_cap = 1000000;
  std::optional<Vector> x0;  // absent: family default (rays) -- else required
  StopSpec stop;
  std::vector<int> watch;
  ChecksSpec checks;
  TraceSpec trace;
  std::string out_dir = ".";
};

namespace cfg_detail {

class Errors {
 public:
  void add(const std::string& path, const std::string& msg) {
    list_.push_back(path + ": " + msg);
  }
  bool ok() const { return list_.empty(); }
  const std::vector<std::string>& list() const { return list_; }

 private:
  std::vector<std::string> list_;
};

inline bool expect_keys(const json& j, const std::string& path,
                        std::initializer_list<const char*> allowed, Errors& err) {
  bool ok = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        found = true;
        break;
      }
    if (!found) {
      err.add(path + "." + it.key(), "unknown key");
      ok = false;
    }
  }
  return ok;
}

inline bool get_number(const json& j, const char* key, const std::string& path, Errors& err,
                       double& out, bool required = false) {
  if (!j.contains(key)) {
    if (required) err.add(path + "." + key, "missing required field");
    return false;
  }
  if (!j[key].is_number()) {
    err.add(path + "." + key, "must be a number");
    return false;
  }
  out = j[key].get<double>();
  return true;
}

inline bool get_vector(const json& j, const char* key, const std::string& path, Errors& err,
                       Vector& out, bool required = false) {
  if (!j.contains(key)) {
    if (required) err.add(path + "." + key, "missing required field");
    return false;
  }
  const json& v = j[key];
  if (!v.is_array() || v.empty()) {
    err.add(path + "." + key, "must be a nonempty array of numbers");
    return false;
  }
  out.clear();
  for (const auto& c : v) {
    if (!c.is_number()) {
      err.add(path + "." + key, "must contain only numbers");
      return false;
    }
    out.push_back(c.get<double>());
  }
  return true;
}

inline bool get_index_list(const json& j, const char* key, const std::string& path, Errors& err,
                           std::vector<int>& out) {
  if (!j.contains(key)) return false;
  const json& v = j[key];
  if (!v.is_array()) {
    err.add(path + "." + key, "must be an array of indices");
    return false;
  }
  out.clear();
  for (const auto& c : v) {
    if (!c.is_number_integer() || c.get<long>() < 1) {
      err.add(path + "." + key, "indices must be integers >= 1");
      return false;
    }
    out.push_back(static_cast<int>(c.get<long>()));
  }
  return true;
}

}  // namespace cfg_detail

/// Parses one set description of the explicit catalog.
inline ConvexSet parse_set(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw std::invalid_argument("set description needs a \"type\" string");
  const std::string type = j["type"].get<std::string>();
  auto vec = [&](const char* key) -> Vector {
    if (!j.contains(key) || !j[key].is_array())
      throw std::invalid_argument("set field \"" + std::string(key) + "\" must be an array");
    Vector v;
    for (const auto& c : j[key]) v.push_back(c.get<double>());
    return v;
  };
  auto num = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number())
      throw std::invalid_argument("set field \"" + std::string(key) + "\" must be a number");
    return j[key].get<double>();
  };
  if (type == "halfspace") return Halfspace{vec("a"), num("b")};
  if (type == "hyperplane") return Hyperplane{vec("a"), num("b")};
  if (type == "ball") return Ball{vec("center"), num("radius")};
  if (type == "box") return Box{vec("lo"), vec("hi")};
  if (type == "ray2d") return Ray2D{num("theta")};
  if (type == "triangle2d") return Triangle2D{vec("v1"), vec("v2"), vec("v3")};
  if (type == "whole_space") return WholeSpace{static_cast<int>(num("dim"))};
  throw std::invalid_argument("unknown set type \"" + type + "\"");
}

inline json set_to_json(const ConvexSet& s) {
  json j;
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Halfspace>) {
          j = {{"type", "halfspace"}, {"a", v.a}, {"b", v.b}};
        } else if constexpr (std::is_same_v<T, Hyperplane>) {
          j = {{"type", "hyperplane"}, {"a", v.a}, {"b", v.b}};
        } else if constexpr (std::is_same_v<T, Ball>) {
          j = {{"type", "ball"}, {"center", v.center}, {"radius", v.radius}};
        } else if constexpr (std::is_same_v<T, Box>) {
          j = {{"type", "box"}, {"lo", v.lo}, {"hi", v.hi}};
        } else if constexpr (std::is_same_v<T, Ray2D>) {
          j = {{"type", "ray2d"}, {"theta", v.theta}};
        } else if constexpr (std::is_same_v<T, Triangle2D>) {
          j = {{"type", "triangle2d"}, {"v1", v.v1}, {"v2", v.v2}, {"v3", v.v3}};
        } else {
          j = {{"type", "whole_space"}, {"dim", v.dim}};
        }
      },
      s.variant());
  return j;
}

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value(); }
};

inline ParseResult parse_config_json(const json& root);

/// Parses and validates an experiment configuration document. On failure
/// the result carries every validation error, each with its path.
inline ParseResult parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    return {std::nullopt, {std::string("$: not valid JSON: ") + e.what()}};
  }
  return parse_config_json(root);
}

inline ParseResult parse_config_json(const json& root) {
  using namespace cfg_detail;
  Errors err;
  ExperimentConfig c;

  if (!root.is_object()) return {std::nullopt, {"$: config must be a JSON object"}};
  expect_keys(root, "$",
              {"schema_version", "name", "seed", "family", "schedule", "mode", "plan", "epsilon",
               "stages", "stage_cap", "x0", "stop", "watch", "checks", "trace", "out_dir"},
              err);

  if (root.contains("schema_version")) {
    if (!root["schema_version"].is_number_integer() || root["schema_version"].get<int>() != 1)
      err.add("$.schema_version", "this library reads schema version 1");
  }
  if (root.contains("name")) {
    if (!root["name"].is_string())
      err.add("$.name", "must be a string");
    else
      c.name = root["name"].get<std::string>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
      err.add("$.seed", "must be an integer");
    else
      c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("out_dir")) {
    if (!root["out_dir"].is_string())
      err.add("$.out_dir", "must be a string");
    else
      c.out_dir = root["out_dir"].get<std::string>();
  }

  // family ------------------------------------------------------------
  if (!root.contains("family") || !root["family"].is_object()) {
    err.add("$.family", "missing required section");
  } else {
    const json& f = root["family"];
    expect_keys(f, "$.family",
                {"kind", "A", "b", "sets", "center", "radius_rule", "radius_base", "prefix_len"},
                err);
    if (!f.contains("kind") || !f["kind"].is_string()) {
      err.add("$.family.kind", "missing required field");
    } else {
      c.family.kind = f["kind"].get<std::string>();
      if (c.family.kind == "linear_system") {
        if (!f.contains("A") || !f["A"].is_array() || f["A"].empty())
          err.add("$.family.A", "linear_system needs a nonempty matrix");
        else {
          std::size_t cols = 0;
          for (std::size_t r = 0; r < f["A"].size(); ++r) {
            Vector row;
            json wrap = {{"row", f["A"][r]}};
            if (!get_vector(wrap, "row", "$.family.A[" + std::to_string(r) + "]", err, row, true))
              break;
            if (r == 0) cols = row.size();
            if (row.size() != cols) {
              err.add("$.family.A", "rows must share one length");
              break;
            }
            c.family.A.push_back(std::move(row));
          }
        }
        Vector bvec;
        if (get_vector(f, "b", "$.family", err, bvec, true)) c.family.b = bvec;
        if (!c.family.A.empty() && !c.family.b.empty() &&
            c.family.A.size() != c.family.b.size())
          err.add("$.family.b", "needs one entry per row of A");
      } else if (c.family.kind == "sets") {
        if (!f.contains("sets") || !f["sets"].is_array() || f["sets"].empty())
          err.add("$.family.sets", "explicit family needs a nonempty set list");
        else {
          c.family.sets = f["sets"];
          for (std::size_t i = 0; i < f["sets"].size(); ++i) {
            try {
              (void)parse_set(f["sets"][i]);
            } catch (const std::exception& e) {
              err.add("$.family.sets[" + std::to_string(i) + "]", e.what());
            }
          }
        }
      } else if (c.family.kind == "descending_chain") {
        get_vector(f, "center", "$.family", err, c.family.center, true);
        if (f.contains("radius_rule")) {
          if (!f["radius_rule"].is_string())
            err.add("$.family.radius_rule", "must be a string");
          else
            c.family.radius_rule = f["radius_rule"].get<std::string>();
        }
        if (c.family.radius_rule != "one_plus_inv" && c.family.radius_rule != "constant" &&
            c.family.radius_rule != "inv")
          err.add("$.family.radius_rule", "must be one_plus_inv, constant, or inv");
        get_number(f, "radius_base", "$.family", err, c.family.radius_base);
        if (!(c.family.radius_base > 0.0))
          err.add("$.family.radius_base", "must be > 0");
      } else if (c.family.kind == "triangles") {
        // no parameters
      } else if (c.family.kind == "rays_counterexample") {
        double pl = 0.0;
        if (get_number(f, "prefix_len", "$.family", err, pl, true)) {
          c.family.prefix_len = static_cast<long>(pl);
          if (c.family.prefix_len < 2) err.add("$.family.prefix_len", "must be >= 2");
        }
      } else {
        err.add("$.family.kind", "unknown family kind \"" + c.family.kind + "\"");
      }
    }
  }

  // schedule ------------------------------------------------------------
  if (!root.contains("schedule") || !root["schedule"].is_object()) {
    err.add("$.schedule", "missing required section");
  } else {
    const json& s = root["schedule"];
    expect_keys(s, "$.schedule", {"kind", "perm", "K", "table", "tail"}, err);
    if (!s.contains("kind") || !s["kind"].is_string()) {
      err.add("$.schedule.kind", "missing required field");
    } else {
      c.schedule.kind = s["kind"].get<std::string>();
      static const char* kinds[] = {"cimmino_growing",  "kaczmarz_growing", "odd_even",
                                    "cyclic_single",    "cyclic_cimmino",   "cyclic_kaczmarz",
                                    "custom",           "rays_natural",     "per_stage_cimmino",
                                    "per_stage_kaczmarz", "per_stage_single"};
      bool known = false;
      for (const char* k : kinds) known |= c.schedule.kind == k;
      if (!known) err.add("$.schedule.kind", "unknown schedule kind \"" + c.schedule.kind + "\"");
    }
    if (s.contains("perm")) {
      if (!s["perm"].is_string() ||
          (s["perm"] != "identity" && s["perm"] != "seeded"))
        err.add("$.schedule.perm", "must be \"identity\" or \"seeded\"");
      else
        c.schedule.perm = s["perm"].get<std::string>();
    }
    if (s.contains("K")) {
      if (!s["K"].is_number_integer() || s["K"].get<long>() < 1)
        err.add("$.schedule.K", "must be an integer >= 1");
      else
        c.schedule.K = static_cast<int>(s["K"].get<long>());
    }
    if (c.schedule.kind.rfind("cyclic_", 0) == 0 && c.schedule.K == 0)
      err.add("$.schedule.K", "cyclic schedules need the family size K");
    if (s.contains("tail")) {
      if (!s["tail"].is_string() || (s["tail"] != "repeat_last" && s["tail"] != "cycle"))
        err.add("$.schedule.tail", "must be \"repeat_last\" or \"cycle\"");
      else
        c.schedule.tail = s["tail"].get<std::string>();
    }
    if (c.schedule.kind == "custom") {
      if (!s.contains("table") || !s["table"].is_array() || s["table"].empty())
        err.add("$.schedule.table", "custom schedules need a nonempty table");
      else
        c.schedule.table = s["table"];
    }
  }

  // mode / plan / eps / stages -------------------------------------------
  if (root.contains("mode")) {
    if (!root["mode"].is_string())
      err.add("$.mode", "must be a string");
    else
      c.mode = root["mode"].get<std::string>();
  }
  if (c.mode != "plain" && c.mode != "perturbed" && c.mode != "superiorized" && c.mode != "eps" &&
      c.mode != "staged_eps")
    err.add("$.mode", "must be plain, perturbed, superiorized, eps, or staged_eps");

  if (root.contains("plan")) {
    const json& p = root["plan"];
    if (!p.is_object()) {
      err.add("$.plan", "must be an object");
    } else {
      expect_keys(p, "$.plan", {"kind", "coeff", "ratio", "direction", "vector"}, err);
      if (p.contains("kind") && p["kind"].is_string()) c.plan.kind = p["kind"].get<std::string>();
      if (c.plan.kind != "zero" && c.plan.kind != "decay" && c.plan.kind != "superiorized")
        err.add("$.plan.kind", "must be zero, decay, or superiorized");
      get_number(p, "coeff", "$.plan", err, c.plan.coeff);
      get_number(p, "ratio", "$.plan", err, c.plan.ratio);
      if (c.plan.kind != "zero" && !(c.plan.ratio >= 0.0 && c.plan.ratio < 1.0))
        err.add("$.plan.ratio", "must lie in [0,1) so the perturbation bound is finite");
      if (p.contains("direction")) {
        if (!p["direction"].is_string() ||
            (p["direction"] != "random_unit" && p["direction"] != "fixed"))
          err.add("$.plan.direction", "must be \"random_unit\" or \"fixed\"");
        else
          c.plan.direction = p["direction"].get<std::string>();
      }
      if (c.plan.direction == "fixed") get_vector(p, "vector", "$.plan", err, c.plan.vector, true);
    }
  }

  if (root.contains("epsilon")) {
    get_number(root, "epsilon", "$", err, c.epsilon);
  }
  if (c.mode == "eps" && !(c.epsilon > 0.0))
    err.add("$.epsilon", "eps mode requires epsilon > 0");
  if (c.mode == "superiorized" && c.plan.kind != "superiorized")
    err.add("$.plan.kind", "superiorized mode requires a superiorized plan");
  if (c.mode == "perturbed" && c.plan.kind != "decay" && c.plan.kind != "zero")
    err.add("$.plan.kind", "perturbed mode takes a zero or decay plan");
  if ((c.mode == "eps" || c.mode == "staged_eps") && c.plan.kind == "superiorized")
    err.add("$.plan.kind", "eps modes take a zero or decay plan");

  if (root.contains("stages")) {
    const json& st = root["stages"];
    if (!st.is_array() || st.empty()) {
      err.add("$.stages", "must be a nonempty array of [m, N] pairs");
    } else {
      for (std::size_t i = 0; i < st.size(); ++i) {
        const json& e = st[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer()) {
          err.add("$.stages[" + std::to_string(i) + "]", "must be an [m, N] integer pair");
          continue;
        }
        Stage stage{static_cast<int>(e[0].get<long>()), e[1].get<long>()};
        if (stage.m < 1 || stage.N < 1) {
          err.add("$.stages[" + std::to_string(i) + "]", "m and N must be >= 1");
          continue;
        }
        if (!c.stages.empty() &&
            (stage.m < c.stages.back().m || stage.N <= c.stages.back().N))
          err.add("$.stages[" + std::to_string(i) + "]",
                  "stages need nondecreasing m and strictly increasing N");
        c.stages.push_back(stage);
      }
    }
  }
  if (c.mode == "staged_eps" && c.stages.empty())
    err.add("$.stages", "staged_eps mode requires stages");
  if (root.contains("stage_cap")) {
    double cap = 0.0;
    if (get_number(root, "stage_cap", "$", err, cap)) {
      c.stage_cap = static_cast<long>(cap);
      if (c.stage_cap < 1) err.add("$.stage_cap", "must be >= 1");
    }
  }

  // x0 / stop / watch -----------------------------------------------------
  if (root.contains("x0")) {
    Vector x0;
    if (get_vector(root, "x0", "$", err, x0)) c.x0 = std::move(x0);
  } else if (c.family.kind != "rays_counterexample") {
    err.add("$.x0", "missing required field (only the rays example supplies a default seed)");
  }

  if (!root.contains("stop") || !root["stop"].is_object()) {
    err.add("$.stop", "missing required section");
  } else {
    const json& s = root["stop"];
    expect_keys(s, "$.stop",
                {"max_iters", "displacement_tol", "displacement_window", "feasibility_tol"}, err);
    double v = 0.0;
    if (get_number(s, "max_iters", "$.stop", err, v)) {
      c.stop.max_iters = static_cast<long>(v);
      if (*c.stop.max_iters < 0) err.add("$.stop.max_iters", "must be >= 0");
    }
    if (get_number(s, "displacement_tol", "$.stop", err, v)) {
      c.stop.displacement_tol = v;
      if (!(v > 0.0)) err.add("$.stop.displacement_tol", "must be > 0");
    }
    if (get_number(s, "displacement_window", "$.stop", err, v)) {
      c.stop.displacement_window = static_cast<int>(v);
      if (c.stop.displacement_window < 1) err.add("$.stop.displacement_window", "must be >= 1");
    }
    if (get_number(s, "feasibility_tol", "$.stop", err, v)) {
      c.stop.feasibility_tol = v;
      if (!(v > 0.0)) err.add("$.stop.feasibility_tol", "must be > 0");
    }
    if (c.mode != "staged_eps" && !c.stop.max_iters && !c.stop.displacement_tol &&
        !c.stop.feasibility_tol)
      err.add("$.stop", "at least one stop rule must be set");
  }

  cfg_detail::get_index_list(root, "watch", "$", err, c.watch);

  // checks ------------------------------------------------------------
  if (root.contains("checks")) {
    const json& ch = root["checks"];
    if (!ch.is_object()) {
      err.add("$.checks", "must be an object");
    } else {
      expect_keys(ch, "$.checks",
                  {"c1", "c2", "f", "kappa", "r_max", "c2_window", "tracked", "h123_k_max",
                   "h123_K", "uasc", "divergent"},
                  err);
      c.checks.any = true;
      if (ch.contains("c1")) c.checks.c1 = ch["c1"].is_boolean() && ch["c1"].get<bool>();
      if (ch.contains("c2")) c.checks.c2 = ch["c2"].is_boolean() && ch["c2"].get<bool>();
      if (ch.contains("f")) {
        const json& f = ch["f"];
        if (f.contains("const")) {
          c.checks.fk.is_const = true;
          get_number(f, "const", "$.checks.f", err, c.checks.fk.const_value);
        } else {
          get_number(f, "a", "$.checks.f", err, c.checks.fk.a);
          get_number(f, "b", "$.checks.f", err, c.checks.fk.b);
        }
      }
      if (ch.contains("kappa")) {
        double v = 0.0;
        if (get_number(ch["kappa"], "mul", "$.checks.kappa", err, v)) c.checks.fk.mul = static_cast<long>(v);
        if (get_number(ch["kappa"], "add", "$.checks.kappa", err, v)) c.checks.fk.add = static_cast<long>(v);
        if (c.checks.fk.mul < 1) err.add("$.checks.kappa.mul", "must be >= 1");
      }
      double v = 0.0;
      if (get_number(ch, "r_max", "$.checks", err, v)) {
        c.checks.r_max = static_cast<long>(v);
        if (c.checks.r_max < 1) err.add("$.checks.r_max", "must be >= 1");
      }
      if (ch.contains("c2_window")) {
        const json& w = ch["c2_window"];
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
            !w[1].is_number_integer() || w[0].get<long>() < 1 ||
            w[1].get<long>() < w[0].get<long>())
          err.add("$.checks.c2_window", "must be an increasing [r_lo, r_hi] integer pair");
        else
          c.checks.c2_window = {w[0].get<long>(), w[1].get<long>()};
      }
      cfg_detail::get_index_list(ch, "tracked", "$.checks", err, c.checks.tracked);
      if (get_number(ch, "h123_k_max", "$.checks", err, v)) c.checks.h123_k_max = static_cast<long>(v);
      if (get_number(ch, "h123_K", "$.checks", err, v)) c.checks.h123_K = static_cast<int>(v);
      if (ch.contains("uasc")) c.checks.uasc = ch["uasc"].is_boolean() && ch["uasc"].get<bool>();
      if (ch.contains("divergent")) {
        const json& d = ch["divergent"];
        expect_keys(d, "$.checks.divergent",
                    {"k_max", "indices", "sum_floor", "growth_floor", "tail_ceiling"}, err);
        if (get_number(d, "k_max", "$.checks.divergent", err, v, true))
          c.checks.divergent_k_max = static_cast<long>(v);
        cfg_detail::get_index_list(d, "indices", "$.checks.divergent", err,
                                   c.checks.divergent_indices);
        get_number(d, "sum_floor", "$.checks.divergent", err,
                   c.checks.divergent_thresholds.sum_floor);
        get_number(d, "growth_floor", "$.checks.divergent", err,
                   c.checks.divergent_thresholds.growth_floor);
        get_number(d, "tail_ceiling", "$.checks.divergent", err,
                   c.checks.divergent_thresholds.tail_ceiling);
      }
    }
  }

  if (root.contains("trace")) {
    const json& t = root["trace"];
    expect_keys(t, "$.trace", {"thin", "store_iterates"}, err);
    double v = 0.0;
    if (get_number(t, "thin", "$.trace", err, v)) {
      c.trace.thin = static_cast<long>(v);
      if (c.trace.thin < 1) err.add("$.trace.thin", "must be >= 1");
    }
    if (t.contains("store_iterates"))
      c.trace.store_iterates = t["store_iterates"].is_boolean() && t["store_iterates"].get<bool>();
  }

  // cross-section consistency ------------------------------------------
  if (err.ok()) {
    // dimension agreement where statically known
    std::optional<int> dim;
    if (c.family.kind == "linear_system" && !c.family.A.empty())
      dim = static_cast<int>(c.family.A.front().size());
    if (c.family.kind == "sets" && !c.family.sets.empty())
      dim = parse_set(c.family.sets[0]).dim();
    if (c.family.kind == "descending_chain") dim = static_cast<int>(c.family.center.size());
    if (c.family.kind == "triangles" || c.family.kind == "rays_counterexample") dim = 2;
    if (dim && c.x0 && static_cast<int>(c.x0->size()) != *dim)
      err.add("$.x0", "dimension " + std::to_string(c.x0->size()) +
                          " does not match the family dimension " + std::to_string(*dim));
    if (c.family.kind == "rays_counterexample" && c.schedule.kind != "rays_natural")
      err.add("$.schedule.kind", "the rays example uses its natural schedule (rays_natural)");
    if (c.schedule.kind == "rays_natural" && c.family.kind != "rays_counterexample")
      err.add("$.schedule.kind", "rays_natural requires the rays_counterexample family");
    const bool per_stage = c.schedule.kind.rfind("per_stage_", 0) == 0;
    if (c.mode == "staged_eps" && !per_stage && c.schedule.kind != "rays_natural")
      err.add("$.schedule.kind", "staged_eps mode uses a per_stage_* schedule");
    if (per_stage && c.mode != "staged_eps")
      err.add("$.schedule.kind", "per_stage_* schedules only apply to staged_eps mode");
  }

  if (!err.ok()) return {std::nullopt, err.list()};
  return {std::move(c), {}};
}

/// Serializes a config back to JSON; parse(serialize(c)) == c.
inline json serialize_config(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["seed"] = c.seed;
  json f;
  f["kind"] = c.family.kind;
  if (c.family.kind == "linear_system") {
    f["A"] = c.family.A;
    f["b"] = c.family.b;
  } else if (c.family.kind == "sets") {
    f["sets"] = c.family.sets;
  } else if (c.family.kind == "descending_chain") {
    f["center"] = c.family.center;
    f["radius_rule"] = c.family.radius_rule;
    f["radius_base"] = c.family.radius_base;
  } else if (c.family.kind == "rays_counterexample") {
    f["prefix_len"] = c.family.prefix_len;
  }
  j["family"] = f;
  json s;
  s["kind"] = c.schedule.kind;
  s["perm"] = c.schedule.perm;
  if (c.schedule.K > 0) s["K"] = c.schedule.K;
  if (c.schedule.kind == "custom") {
    s["table"] = c.schedule.table;
    s["tail"] = c.schedule.tail;
  }
  j["schedule"] = s;
  j["mode"] = c.mode;
  if (c.plan.kind != "zero") {
    json p;
    p["kind"] = c.plan.kind;
    p["coeff"] = c.plan.coeff;
    p["ratio"] = c.plan.ratio;
    p["direction"] = c.plan.direction;
    if (c.plan.direction == "fixed") p["vector"] = c.plan.vector;
    j["plan"] = p;
  }
  if (c.epsilon > 0.0) j["epsilon"] = c.epsilon;
  if (!c.stages.empty()) {
    json st = json::array();
    for (const Stage& g : c.stages) st.push_back({g.m, g.N});
    j["stages"] = st;
    j["stage_cap"] = c.stage_cap;
  }
  if (c.x0) j["x0"] = *c.x0;
  json stop;
  if (c.stop.max_iters) stop["max_iters"] = *c.stop.max_iters;
  if (c.stop.displacement_tol) {
    stop["displacement_tol"] = *c.stop.displacement_tol;
    stop["displacement_window"] = c.stop.displacement_window;
  }
  if (c.stop.feasibility_tol) stop["feasibility_tol"] = *c.stop.feasibility_tol;
  j["stop"] = stop;
  if (!c.watch.empty()) j["watch"] = c.watch;
  if (c.checks.any) {
    json ch;
    if (c.checks.c1) ch["c1"] = true;
    if (c.checks.c2) ch["c2"] = true;
    if (c.checks.fk.is_const)
      ch["f"] = {{"const", c.checks.fk.const_value}};
    else
      ch["f"] = {{"a", c.checks.fk.a}, {"b", c.checks.fk.b}};
    ch["kappa"] = {{"mul", c.checks.fk.mul}, {"add", c.checks.fk.add}};
    ch["r_max"] = c.checks.r_max;
    if (c.checks.c2_window)
      ch["c2_window"] = {c.checks.c2_window->first, c.checks.c2_window->second};
    if (!c.checks.tracked.empty()) ch["tracked"] = c.checks.tracked;
    if (c.checks.h123_k_max) ch["h123_k_max"] = *c.checks.h123_k_max;
    if (c.checks.h123_K > 0) ch["h123_K"] = c.checks.h123_K;
    if (c.checks.uasc) ch["uasc"] = true;
    if (c.checks.divergent_k_max) {
      json d;
      d["k_max"] = *c.checks.divergent_k_max;
      if (!c.checks.divergent_indices.empty()) d["indices"] = c.checks.divergent_indices;
      d["sum_floor"] = c.checks.divergent_thresholds.sum_floor;
      d["growth_floor"] = c.checks.divergent_thresholds.growth_floor;
      d["tail_ceiling"] = c.checks.divergent_thresholds.tail_ceiling;
      ch["divergent"] = d;
    }
    j["checks"] = ch;
  }
  json t;
  t["thin"] = c.trace.thin;
  t["store_iterates"] = c.trace.store_iterates;
  j["trace"] = t;
  j["out_dir"] = c.out_dir;
  return j;
}

/// Everything run_experiment needs, materialized from a valid config.
struct ExperimentSetup {
  Family family;
  std::optional<Schedule> schedule;          // non-staged modes
  StageScheduleFactory stage_factory;        // staged mode
  Mode mode = Mode::plain;
  std::optional<PerturbationPlan> plan;
  double eps = 0.0;
  std::vector<Stage> stages;
  Vector x0;
  StopRule stop;
  RunOptions options;
  std::shared_ptr<RaysCounterexample> rays;  // set when the family is the rays example
};

inline ExperimentSetup build_experiment(const ExperimentConfig& c) {
  std::shared_ptr<RaysCounterexample> rays;
  auto build_family = [&]() -> Family {
    if (c.family.kind == "linear_system") return family_linear_system(c.family.A, c.family.b);
    if (c.family.kind == "sets") {
      std::vector<ConvexSet> sets;
      for (const auto& sj : c.family.sets) sets.push_back(parse_set(sj));
      return Family::finite(std::move(sets));
    }
    if (c.family.kind == "descending_chain") {
      const double base = c.family.radius_base;
      std::function<double(int)> rule;
      if (c.family.radius_rule == "one_plus_inv")
        rule = [base](int i) { return base + 1.0 / static_cast<double>(i); };
      else if (c.family.radius_rule == "constant")
        rule = [base](int) { return base; };
      else
        rule = [base](int i) { return base / static_cast<double>(i); };
      return family_descending_chain(c.family.center, std::move(rule));
    }
    if (c.family.kind == "triangles") return family_triangles();
    if (c.family.kind == "rays_counterexample") {
      rays = std::make_shared<RaysCounterexample>(
          family_rays_counterexample(static_cast<std::size_t>(c.family.prefix_len)));
      return rays->family;
    }
    throw std::invalid_argument("unknown family kind");
  };

  ExperimentSetup out{build_family(), std::nullopt, {}, Mode::plain, std::nullopt,
                      0.0,            {},           {}, {},          {},
                      nullptr};
  out.rays = rays;

  // schedule
  const PermMode perm = c.schedule.perm == "identity"
                            ? PermMode::identity()
                            : PermMode::seeded(mix_seed(c.seed, 1));
  if (c.schedule.kind == "cimmino_growing") {
    out.schedule = Schedule::cimmino_growing();
  } else if (c.schedule.kind == "kaczmarz_growing") {
    out.schedule = Schedule::kaczmarz_growing(perm);
  } else if (c.schedule.kind == "odd_even") {
    out.schedule = Schedule::odd_even(perm);
  } else if (c.schedule.kind == "cyclic_single") {
    out.schedule = Schedule::cyclic_finite(c.schedule.K, CyclicBlock::single_index);
  } else if (c.schedule.kind == "cyclic_cimmino") {
    out.schedule = Schedule::cyclic_finite(c.schedule.K, CyclicBlock::full_cimmino);
  } else if (c.schedule.kind == "cyclic_kaczmarz") {
    out.schedule = Schedule::cyclic_finite(c.schedule.K, CyclicBlock::full_kaczmarz);
  } else if (c.schedule.kind == "custom") {
    std::vector<WeightFunction> table;
    for (const auto& row : c.schedule.table) {
      std::vector<std::pair<IndexVector, double>> pairs;
      for (const auto& e : row) {
        IndexVector iv;
        for (const auto& i : e.at("string")) iv.push_back(i.get<int>());
        pairs.emplace_back(std::move(iv), e.at("weight").get<double>());
      }
      table.push_back(make_weight(pairs));
    }
    out.schedule = Schedule::custom_table(std::move(table), c.schedule.tail == "cycle"
                                                                ? TailRule::cycle
                                                                : TailRule::repeat_last);
  } else if (c.schedule.kind == "rays_natural") {
    out.schedule = out.rays->schedule;
  } else if (c.schedule.kind == "per_stage_cimmino") {
    out.stage_factory = default_stage_schedule();
  } else if (c.schedule.kind == "per_stage_kaczmarz") {
    out.stage_factory = [](int, Stage s) {
      return Schedule::cyclic_finite(s.m, CyclicBlock::full_kaczmarz);
    };
  } else if (c.schedule.kind == "per_stage_single") {
    out.stage_factory = [](int, Stage s) {
      return Schedule::cyclic_finite(s.m, CyclicBlock::single_index);
    };
  }

  // mode + plan
  if (c.mode == "plain") out.mode = Mode::plain;
  else if (c.mode == "perturbed") out.mode = Mode::perturbed;
  else if (c.mode == "superiorized") out.mode = Mode::superiorized;
  else out.mode = Mode::eps;
  out.eps = c.epsilon;
  out.stages = c.stages;

  if (c.plan.kind == "decay") {
    out.plan = c.plan.direction == "fixed"
                   ? PerturbationPlan::decay(c.plan.coeff, c.plan.ratio, c.plan.vector)
                   : PerturbationPlan::decay_random(c.plan.coeff, c.plan.ratio, mix_seed(c.seed, 2));
  } else if (c.plan.kind == "superiorized") {
    out.plan = c.plan.direction == "fixed"
                   ? PerturbationPlan::superiorized(c.plan.coeff, c.plan.ratio, c.plan.vector)
                   : PerturbationPlan::superiorized_random(c.plan.coeff, c.plan.ratio,
                                                           mix_seed(c.seed, 2));
  } else if (c.mode == "perturbed") {
    out.plan = PerturbationPlan::zero();
  }

  // seed point
  if (c.x0)
    out.x0 = *c.x0;
  else if (out.rays)
    out.x0 = out.rays->x0;
  else
    throw std::invalid_argument("config has no seed point");

  out.stop.max_iters = c.stop.max_iters;
  out.stop.displacement_tol = c.stop.displacement_tol;
  out.stop.displacement_window = c.stop.displacement_window;
  out.stop.feasibility_tol = c.stop.feasibility_tol;

  out.options.watch = c.watch;
  out.options.thin = c.trace.thin;
  out.options.store_iterates = c.trace.store_iterates;
  return out;
}

}  // namespace stravg
