// elastic_cli: constants, named curves, flow runs and experiments.
// Exit codes: 0 ok, 2 a report check failed, 1 anything else.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "elastic/elastic.hpp"

using namespace elastic;
namespace ex = elastic::experiments;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Common {
  bool json_out = false;
  std::string out_dir;
  std::size_t n_points = 0;  // 0: per-command default
  std::uint64_t seed = 1;
};

std::string out_path(const Common& o, const std::string& name) {
  if (o.out_dir.empty()) return name;
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

// ---- constants ----

int cmd_constants(const Common& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Constants K = compute_constants();
  const double secs = ex::seconds_since(t0);
  json j = ex::constants_json();
  j["solve_seconds"] = secs;
  if (o.json_out) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("%-6s %-20s %s\n", "name", "value", "residual");
    std::printf("%-6s %-20.12f %.2e\n", "m8", K.m8, K.residual_m8);
    std::printf("%-6s %-20.12f %.2e\n", "mT", K.mT, K.residual_mT);
    std::printf("%-6s %-20.12f %.2e\n", "mH", K.mH, K.residual_mH);
    std::printf("%-6s %-20.10f\n", "C8", K.C8);
    std::printf("%-6s %-20.10f\n", "C2T", K.C2T);
    std::printf("solved in %.2e s\n", secs);
  }
  if (!o.out_dir.empty()) io::write_json_file(out_path(o, "constants.json"), j);
  return 0;
}

// ---- curve ----

struct CurveArgs {
  std::string name;
  double alpha = 0.01;
  double epsilon = std::numeric_limits<double>::infinity();
};

template <std::size_t N>
void emit_curve(const Common& o, const std::string& name, const DiscreteCurve<N>& c, json meta) {
  const auto e = energies(c);
  meta["name"] = name;
  meta["n_points"] = c.size();
  meta["L"] = e.L;
  meta["Bbar"] = e.Bbar;
  const auto rep = self_intersections(c, IntersectionOptions{0.0, 0.05});
  meta["self_intersections"] = rep.size();
  std::vector<Vec2> marks;
  for (const auto& p : rep.points) marks.push_back(Vec2{p.point[0], p.point[1]});
  io::write_curve(out_path(o, name + ".json"), c, meta);
  io::write_text_file(out_path(o, name + ".svg"), io::svg(c, marks));
  if (o.json_out)
    std::cout << meta.dump(2) << "\n";
  else
    std::printf("%s: %zu points, L=%.10g, Bbar=%.10g, %zu self-intersections -> %s\n", name.c_str(), c.size(), e.L,
                e.Bbar, rep.size(), out_path(o, name + ".json").c_str());
}

int cmd_curve(const Common& o, const CurveArgs& a) {
  const std::size_t n = o.n_points ? o.n_points : 1024;
  if (a.name == "eta2d" || a.name == "eta3d") {
    PerturbParams p;
    p.alpha = a.alpha;
    p.epsilon = a.epsilon;
    p.n_points = n;
    json meta{{"alpha", a.alpha}};
    if (a.name == "eta2d") {
      const auto eta = eta_planar(p);
      meta["rho"] = eta.rho;
      meta["threshold"] = eta.threshold;
      emit_curve(o, a.name, eta.curve, meta);
    } else {
      const auto eta = eta_spatial(p);
      meta["rho"] = eta.rho;
      meta["threshold"] = eta.threshold;
      emit_curve(o, a.name, eta.curve, meta);
    }
    return 0;
  }
  AnalyticCurve c;
  if (a.name == "figure8")
    c = gamma8();
  else if (a.name == "two_teardrop")
    c = gamma2T();
  else if (a.name == "teardrop")
    c = gammaT();
  else if (a.name == "heart")
    c = gammaH();
  else if (a.name == "teardrop_heart")
    c = teardrop_heart().curve;
  else
    throw std::invalid_argument("unknown curve '" + a.name + "'");
  emit_curve(o, a.name, c.sample(n), json{{"parameter_range", {c.a, c.b}}});
  return 0;
}

// ---- flow ----

struct FlowArgs {
  std::string input;
  std::string config;
};

template <std::size_t N>
int run_flow(const Common& o, const FlowArgs& a, const json& curve_json, json cfg_json, const std::string& cmd) {
  std::size_t snapshot_every = 0;
  if (cfg_json.contains("snapshot_every")) {
    snapshot_every = cfg_json["snapshot_every"].get<std::size_t>();
    cfg_json.erase("snapshot_every");
  }
  FlowConfig<N> cfg;
  if (o.n_points) cfg.n_points = o.n_points;
  cfg = io::flow_config_from_json<N>(cfg_json, cfg);
  const auto curve = io::curve_from_json<N>(curve_json);

  std::vector<std::string> outputs;
  if (snapshot_every) fs::create_directories(out_path(o, "snapshots"));
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = run<N>(curve, cfg, [&](const FlowState<N>& st) {
    if (!snapshot_every || st.steps % snapshot_every != 0) return;
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/step_%08zu.json", st.steps);
    io::write_curve(out_path(o, name), st.curve, json{{"t", st.t}, {"step", st.steps}});
    outputs.push_back(name);
  });
  const double wall = ex::seconds_since(t0);

  io::write_text_file(out_path(o, "energy.csv"), io::energy_csv(s.energy_history));
  io::write_json_file(out_path(o, "events.json"), io::events_to_json(s.events));
  io::write_curve(out_path(o, "final.json"), s.curve, json{{"t", s.t}, {"step", s.steps}});
  outputs.insert(outputs.begin(), {"energy.csv", "events.json", "final.json"});
  if constexpr (N == 2) {
    io::write_text_file(out_path(o, "final.svg"), io::svg(s.curve));
    outputs.insert(outputs.begin() + 3, "final.svg");
  }
  const json manifest{{"command", cmd},
                      {"input", a.input},
                      {"config", io::flow_config_to_json(cfg)},
                      {"snapshot_every", snapshot_every},
                      {"constants", ex::constants_json()},
                      {"outputs", outputs},
                      {"t_final", s.t},
                      {"steps", s.steps},
                      {"intersected", s.intersected},
                      {"wall_clock_seconds", wall}};
  io::write_json_file(out_path(o, "manifest.json"), manifest);
  if (o.json_out) {
    std::cout << json{{"t_final", s.t}, {"steps", s.steps}, {"events", io::events_to_json(s.events)}}.dump(2) << "\n";
  } else {
    std::printf("t=%.6g after %zu steps (%.2fs)\n", s.t, s.steps, wall);
    for (const auto& e : s.events)
      std::printf("  event %s at t=%.6g step %zu%s\n", to_string(e.kind), e.t, e.step,
                  e.intersections ? (" (" + std::to_string(e.intersections) + " points)").c_str() : "");
  }
  return 0;
}

int cmd_flow(const Common& o, const FlowArgs& a, const std::string& cmd) {
  const json curve = io::read_json_file(a.input);
  json cfg = json::object();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open config " + a.config);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = io::parse_flat_config(ss.str());
  }
  return io::curve_dimension(curve) == 3 ? run_flow<3>(o, a, curve, cfg, cmd) : run_flow<2>(o, a, curve, cfg, cmd);
}

// ---- experiment ----

struct ExperimentArgs {
  std::string name;
  std::vector<double> alphas;
  double t_max = 0;
  double epsilon = std::numeric_limits<double>::infinity();
  unsigned workers = 0;
};

void print_summary(const json& rep) {
  std::printf("%s: %s\n", rep["experiment"].get<std::string>().c_str(), rep["pass"].get<bool>() ? "pass" : "FAIL");
  if (rep.contains("checks"))
    for (const auto& c : rep["checks"])
      std::printf("  %-24s %-18.10g err %.2e  %s\n", c["check"].get<std::string>().c_str(), c["value"].get<double>(),
                  c["error"].get<double>(), c["pass"].get<bool>() ? "ok" : "FAIL");
  if (rep.contains("runs"))
    for (const auto& r : rep["runs"]) {
      std::string line;
      for (const char* k : {"curve", "mode", "alpha", "broke", "t_event", "Bbar_final", "pass"})
        if (r.contains(k)) line += std::string(k) + "=" + r[k].dump() + " ";
      std::printf("  %s\n", line.c_str());
    }
}

int cmd_experiment(const Common& o, const ExperimentArgs& a) {
  json rep;
  if (a.name == "preserve2d") {
    ex::PreserveOptions p;
    if (o.n_points) p.n_points = o.n_points;
    p.seed = o.seed;
    if (a.t_max > 0) p.t_max = a.t_max;
    if (a.workers) p.workers = a.workers;
    rep = ex::preserve2d(p);
  } else if (a.name == "break2d" || a.name == "break3d") {
    auto b = a.name == "break2d" ? ex::break2d_defaults() : ex::break3d_defaults();
    if (!a.alphas.empty()) b.alphas = a.alphas;
    if (o.n_points) b.n_points = o.n_points;
    if (a.t_max > 0) b.t_max = a.t_max;
    b.epsilon = a.epsilon;
    if (a.workers) b.workers = a.workers;
    rep = a.name == "break2d" ? ex::break2d(b) : ex::break3d(b);
  } else if (a.name == "thresholds") {
    rep = ex::thresholds(o.n_points ? o.n_points : 4096);
  } else {
    throw std::invalid_argument("unknown experiment '" + a.name + "'");
  }
  io::write_json_file(out_path(o, a.name + ".json"), rep);
  if (o.json_out)
    std::cout << rep.dump(2) << "\n";
  else
    print_summary(rep);
  return rep["pass"].get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic curves and their gradient flow"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", o.json_out, "Print machine-readable JSON");
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--n-points", o.n_points, "Number of sample points")->check(CLI::Range(8, 1 << 24));
    sub->add_option("--seed", o.seed, "Random seed");
  };

  auto* constants_cmd = app.add_subcommand("constants", "Solve for the moduli and energy constants");
  add_common(constants_cmd);

  CurveArgs ca;
  auto* curve_cmd = app.add_subcommand("curve", "Sample a named curve to JSON and SVG");
  add_common(curve_cmd);
  curve_cmd->add_option("name", ca.name, "figure8, two_teardrop, teardrop, heart, teardrop_heart, eta2d, eta3d")
      ->required();
  curve_cmd->add_option("--alpha", ca.alpha, "Perturbation size for eta2d/eta3d");
  curve_cmd->add_option("--epsilon", ca.epsilon, "Energy margin for eta2d/eta3d (default none)");

  FlowArgs fa;
  auto* flow_cmd = app.add_subcommand("flow", "Run the flow from a curve JSON file");
  add_common(flow_cmd);
  flow_cmd->add_option("input", fa.input, "Curve JSON")->required()->check(CLI::ExistingFile);
  flow_cmd->add_option("--config", fa.config, "Config file, JSON or key = value")->check(CLI::ExistingFile);

  ExperimentArgs ea;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a named experiment and write its report");
  add_common(exp_cmd);
  exp_cmd->add_option("name", ea.name, "preserve2d, break2d, break3d, thresholds")->required();
  exp_cmd->add_option("--alpha", ea.alphas, "Perturbation sizes for break2d/break3d");
  exp_cmd->add_option("--t-max", ea.t_max, "Final time");
  exp_cmd->add_option("--epsilon", ea.epsilon, "Energy margin for the perturbation");
  exp_cmd->add_option("--workers", ea.workers, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*constants_cmd) return cmd_constants(o);
    if (*curve_cmd) return cmd_curve(o, ca);
    if (*flow_cmd) return cmd_flow(o, fa, command_line(argc, argv));
    if (*exp_cmd) return cmd_experiment(o, ea);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
