#pragma once

// Multi-run experiments: embeddedness preservation below the threshold,
// embeddedness breaking for the perturbed two-teardrop and figure-eight,
// and the threshold constants. Runs fan out over a small thread pool.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "elastica.hpp"
#include "flow.hpp"
#include "io.hpp"
#include "perturb.hpp"

namespace elastic::experiments {

using json = nlohmann::json;

inline unsigned default_workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers = default_workers()) {
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Composite 5-point Gauss-Legendre.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 256) {
  static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (int q = 0; q < 5; ++q) s += w[q] * f(c + 0.5 * h * x[q]);
  }
  return 0.5 * h * s;
}

// B_bar = L * int k^2 ds of an analytic curve, by quadrature in the parameter.
inline double quadrature_bbar(const AnalyticCurve& c, int panels = 512) {
  const double L = gauss_legendre([&](double x) { return c.speed(x); }, c.a, c.b, panels);
  const double B = gauss_legendre([&](double x) { return c.curvature(x) * c.curvature(x) * c.speed(x); }, c.a, c.b,
                                  panels);
  return L * B;
}

// ---- preserve2d ----

struct CorpusCurve {
  std::string name;
  Curve2 curve;
  double target_bbar = 0;
  double shape = 0;  // family parameter found by bisection
};

namespace detail {

// Radius wobble r(theta) = 1 + a cos(3 theta + phase), seeded.
struct Wobble {
  double amplitude = 0, phase = 0;
  double operator()(double t) const { return 1 + amplitude * std::cos(3 * t + phase); }
};

inline Curve2 ellipse_like(double aspect, const Wobble& w, std::size_t n) {
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * double(i) / double(n);
    p[i] = w(t) * Vec2{aspect * std::cos(t), std::sin(t)};
  }
  return Curve2(std::move(p), true);
}

// Star-shaped pinched oval r = 1 + q cos(2 theta).
inline Curve2 pinched_oval(double q, const Wobble& w, std::size_t n) {
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * double(i) / double(n);
    const double r = (1 + q * std::cos(2 * t)) * w(t);
    p[i] = r * Vec2{std::cos(t), std::sin(t)};
  }
  return Curve2(std::move(p), true);
}

template <class Build>
double bisect_shape(Build&& build, double lo, double hi, double target) {
  // B_bar increases with the shape parameter on [lo, hi]
  if (energies(build(lo)).Bbar > target || energies(build(hi)).Bbar < target)
    throw std::runtime_error("preserve corpus: target B_bar outside the family range");
  for (int it = 0; it < 60; ++it) {
    const double mid = (lo + hi) / 2;
    (energies(build(mid)).Bbar < target ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace detail

// Five embedded curves with rotation number 1 and B_bar = 60, 80, ..., 140,
// alternating ellipses and pinched ovals with a seeded 3-fold wobble.
inline std::vector<CorpusCurve> preserve_corpus(std::size_t n_points = 512, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.0, 0.03), phase(0.0, 2 * std::numbers::pi);
  const std::size_t n_fine = std::max<std::size_t>(n_points, 2048);
  std::vector<CorpusCurve> out;
  const double targets[] = {60, 80, 100, 120, 140};
  for (int k = 0; k < 5; ++k) {
    const detail::Wobble w{amp(rng), phase(rng)};
    CorpusCurve c;
    c.target_bbar = targets[k];
    if (k % 2 == 0) {
      c.name = "ellipse_" + std::to_string(int(targets[k]));
      auto build = [&](double a) { return resample_spline(detail::ellipse_like(a, w, n_fine), n_points); };
      c.shape = detail::bisect_shape(build, 1.0, 6.0, targets[k]);
      c.curve = build(c.shape);
    } else {
      c.name = "pinched_oval_" + std::to_string(int(targets[k]));
      auto build = [&](double q) { return resample_spline(detail::pinched_oval(q, w, n_fine), n_points); };
      c.shape = detail::bisect_shape(build, 0.0, 0.6, targets[k]);
      c.curve = build(c.shape);
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct PreserveRun {
  std::string name;
  LambdaMode mode = LambdaMode::length_preserving;
  double lambda = 0;
  double bbar_initial = 0, bbar_final = 0;
  long rotation_initial = 0, rotation_final = 0;
  std::size_t intersection_events = 0;
  bool converged = false;
  double max_energy_increase = 0;  // largest relative increase between logged samples
  double max_length_drift = 0;
  std::size_t steps = 0;
  double t_final = 0, seconds = 0;
  bool pass = false;
};

struct PreserveOptions {
  std::size_t n_points = 512;
  std::uint64_t seed = 1;
  double t_max = 1e6;
  std::size_t max_steps = 100000;
  double monotone_slack = 1e-6;
  double bbar_tolerance = 0.01;  // relative to 4 pi^2
  double time_limit = 60;        // seconds per run
  unsigned workers = default_workers();
};

inline PreserveRun run_preserve(const CorpusCurve& c, LambdaMode mode, const PreserveOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  FlowConfig<2> cfg;
  cfg.mode = mode;
  cfg.n_points = o.n_points;
  cfg.t_max = o.t_max;
  cfg.max_steps = o.max_steps;
  cfg.intersection = IntersectionOptions{};  // default proximity band
  cfg.stop_on_intersection = false;
  const auto e0 = energies(c.curve);
  cfg.lambda = e0.B / e0.L;
  PreserveRun r;
  r.name = c.name;
  r.mode = mode;
  r.lambda = mode == LambdaMode::fixed ? cfg.lambda : lambda_length_preserving(c.curve);
  r.bbar_initial = e0.Bbar;
  r.rotation_initial = rotation_number(c.curve).integer;
  const auto s = run(c.curve, cfg);
  r.seconds = seconds_since(t0);
  r.steps = s.steps;
  r.t_final = s.t;
  r.bbar_final = s.energy_history.back().Bbar;
  r.rotation_final = rotation_number(s.curve).integer;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::first_self_intersection) ++r.intersection_events;
    if (e.kind == EventKind::converged) r.converged = true;
  }
  const auto& h = s.energy_history;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double a = mode == LambdaMode::fixed ? h[i - 1].E_lambda : h[i - 1].Bbar;
    const double b = mode == LambdaMode::fixed ? h[i].E_lambda : h[i].Bbar;
    r.max_energy_increase = std::max(r.max_energy_increase, (b - a) / std::abs(a));
    if (mode == LambdaMode::length_preserving)
      r.max_length_drift = std::max(r.max_length_drift, std::abs(h[i].L - h[0].L) / h[0].L);
  }
  const double circle = 4 * std::numbers::pi * std::numbers::pi;
  r.pass = r.converged && r.intersection_events == 0 && r.max_energy_increase <= o.monotone_slack &&
           std::abs(r.bbar_final - circle) <= o.bbar_tolerance * circle && r.rotation_final == r.rotation_initial &&
           r.seconds < o.time_limit;
  return r;
}

inline json to_json(const PreserveRun& r) {
  return json{{"curve", r.name},
              {"mode", to_string(r.mode)},
              {"lambda", r.lambda},
              {"Bbar_initial", r.bbar_initial},
              {"Bbar_final", r.bbar_final},
              {"rotation_initial", r.rotation_initial},
              {"rotation_final", r.rotation_final},
              {"intersection_events", r.intersection_events},
              {"converged", r.converged},
              {"max_energy_increase", r.max_energy_increase},
              {"max_length_drift", r.max_length_drift},
              {"steps", r.steps},
              {"t_final", r.t_final},
              {"seconds", r.seconds},
              {"pass", r.pass}};
}

inline json preserve2d(const PreserveOptions& o = {}) {
  const auto corpus = preserve_corpus(o.n_points, o.seed);
  std::vector<PreserveRun> runs(2 * corpus.size());
  parallel_for(
      runs.size(),
      [&](std::size_t i) {
        runs[i] = run_preserve(corpus[i / 2], i % 2 ? LambdaMode::fixed : LambdaMode::length_preserving, o);
      },
      o.workers);
  json report{{"experiment", "preserve2d"}, {"n_points", o.n_points}, {"seed", o.seed}};
  bool pass = true;
  for (const auto& c : corpus) {
    const auto rep = self_intersections(c.curve);
    report["corpus"].push_back({{"curve", c.name},
                                {"Bbar", energies(c.curve).Bbar},
                                {"shape", c.shape},
                                {"embedded", rep.empty()},
                                {"rotation", rotation_number(c.curve).integer}});
    const double b = energies(c.curve).Bbar;
    pass = pass && rep.empty() && rotation_number(c.curve).integer == 1 && b >= 60 - 1e-9 && b <= 140 + 1e-9;
  }
  for (const auto& r : runs) {
    report["runs"].push_back(to_json(r));
    pass = pass && r.pass;
  }
  report["pass"] = pass;
  return report;
}

// ---- embeddedness breaking ----

struct BreakRun {
  std::string family;
  double alpha = 0, rho = 0, epsilon = 0;
  std::size_t n_points = 0;
  double bbar_initial = 0, threshold = 0;
  bool initially_embedded = false;
  bool broke = false;
  double t_event = std::numeric_limits<double>::quiet_NaN();
  std::size_t intersections = 0;
  std::size_t steps = 0;
  double t_final = 0, seconds = 0;
};

struct BreakOptions {
  std::vector<double> alphas;
  std::size_t n_points = 2048;
  double t_max = 1.0;
  double dt_initial = 1e-18;
  double epsilon = std::numeric_limits<double>::infinity();
  std::optional<double> rho;  // unset: 0.05 L
  bool grid_check = true;     // rerun breaking cases at 2 n_points
  double grid_tolerance = 0.10;
  unsigned workers = default_workers();
};

template <std::size_t N>
BreakRun run_break(const PerturbedCurve<N>& eta, FlowConfig<N> cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  BreakRun r;
  r.family = eta.family;
  r.alpha = eta.alpha;
  r.rho = eta.rho;
  r.epsilon = eta.epsilon;
  r.n_points = cfg.n_points;
  r.bbar_initial = eta.Bbar;
  r.threshold = eta.threshold;
  r.initially_embedded = self_intersections(eta.curve, cfg.intersection).empty();
  const auto s = run(eta.curve, cfg);
  r.seconds = seconds_since(t0);
  r.steps = s.steps;
  r.t_final = s.t;
  if (const auto* e = find_event(s, EventKind::first_self_intersection)) {
    r.broke = true;
    r.t_event = e->t;
    r.intersections = e->intersections;
  }
  return r;
}

inline BreakRun run_break2d(double alpha, std::size_t n, const BreakOptions& o) {
  PerturbParams p;
  p.alpha = alpha;
  p.rho = o.rho;
  p.epsilon = o.epsilon;
  p.n_points = n;
  FlowConfig<2> cfg;
  cfg.n_points = n;
  cfg.t_max = o.t_max;
  cfg.dt_initial = o.dt_initial;
  cfg.symmetry = planar_symmetry();
  return run_break(eta_planar(p), cfg);
}

inline BreakRun run_break3d(double alpha, std::size_t n, const BreakOptions& o) {
  PerturbParams p;
  p.alpha = alpha;
  p.rho = o.rho;
  p.epsilon = o.epsilon;
  p.n_points = n;
  FlowConfig<3> cfg;
  cfg.n_points = n;
  cfg.t_max = o.t_max;
  cfg.dt_initial = o.dt_initial;
  return run_break(eta_spatial(p), cfg);
}

inline json to_json(const BreakRun& r) {
  json j{{"family", r.family},
         {"alpha", r.alpha},
         {"rho", r.rho},
         {"epsilon", std::isinf(r.epsilon) ? json("inf") : json(r.epsilon)},
         {"n_points", r.n_points},
         {"Bbar_initial", r.bbar_initial},
         {"threshold", r.threshold},
         {"initially_embedded", r.initially_embedded},
         {"broke", r.broke},
         {"intersections", r.intersections},
         {"steps", r.steps},
         {"t_final", r.t_final},
         {"seconds", r.seconds}};
  j["t_event"] = r.broke ? json(r.t_event) : json(nullptr);
  return j;
}

struct GridCheck {
  double alpha = 0;
  double t_coarse = 0, t_fine = 0, relative_change = 0;
  bool broke_fine = false;
  bool pass = false;
};

// Sweep over alpha, plus a grid-halving rerun of every case that broke.
// `required` lists the alphas that must break (with at least
// min_intersections points) for the experiment to pass.
template <class RunFn>
json break_sweep(const char* name, const BreakOptions& o, const std::vector<double>& required,
                 std::size_t min_intersections, RunFn&& run_one) {
  std::vector<BreakRun> runs(o.alphas.size());
  parallel_for(runs.size(), [&](std::size_t i) { runs[i] = run_one(o.alphas[i], o.n_points, o); }, o.workers);
  std::vector<GridCheck> grid;
  if (o.grid_check) {
    for (const auto& r : runs)
      if (r.broke) grid.push_back({r.alpha, r.t_event});
    parallel_for(
        grid.size(),
        [&](std::size_t i) {
          const auto fine = run_one(grid[i].alpha, 2 * o.n_points, o);
          grid[i].broke_fine = fine.broke;
          grid[i].t_fine = fine.t_event;
          grid[i].relative_change = std::abs(fine.t_event - grid[i].t_coarse) / grid[i].t_coarse;
          grid[i].pass = fine.broke && grid[i].relative_change < o.grid_tolerance;
        },
        o.workers);
  }
  json report{{"experiment", name}, {"n_points", o.n_points}, {"t_max", o.t_max}};
  bool pass = true;
  for (const auto& r : runs) report["runs"].push_back(to_json(r));
  for (const auto& g : grid)
    report["grid_halving"].push_back({{"alpha", g.alpha},
                                      {"t_event", g.t_coarse},
                                      {"t_event_fine", g.broke_fine ? json(g.t_fine) : json(nullptr)},
                                      {"relative_change", g.relative_change},
                                      {"pass", g.pass}});
  for (double a : required) {
    bool ok = false;
    for (const auto& r : runs)
      if (r.alpha == a) ok = r.initially_embedded && r.broke && r.intersections >= min_intersections;
    for (const auto& g : grid)
      if (g.alpha == a) ok = ok && g.pass;
    report["required"].push_back({{"alpha", a}, {"pass", ok}});
    pass = pass && ok;
  }
  report["pass"] = pass;
  return report;
}

inline BreakOptions break2d_defaults() {
  BreakOptions o;
  o.alphas = {0.002, 0.01, 0.05};
  return o;
}

inline BreakOptions break3d_defaults() {
  BreakOptions o;
  o.alphas = {0.0001, 0.01};
  return o;
}

inline json break2d(const BreakOptions& o = break2d_defaults()) {
  return break_sweep("break2d", o, {0.002, 0.01}, 2, run_break2d);
}

inline json break3d(const BreakOptions& o = break3d_defaults()) {
  return break_sweep("break3d", o, {0.01}, 1, run_break3d);
}

// ---- thresholds ----

struct ReferenceConstants {
  double m8 = 0.8261, mT = 0.7312, mH = 0.8436;
  double C8 = 112.439, C2T = 146.628;
  double modulus_tol = 5e-5, constant_tol = 5e-3;
};

inline json constants_json() {
  const auto& K = constants();
  return json{{"m8", K.m8},
              {"mT", K.mT},
              {"mH", K.mH},
              {"C8", K.C8},
              {"C2T", K.C2T},
              {"alpha_mT", K.alphaT},
              {"residuals", {{"m8", K.residual_m8}, {"mT", K.residual_mT}, {"mH", K.residual_mH}}}};
}

inline json thresholds(std::size_t n_samples = 4096) {
  const auto t0 = std::chrono::steady_clock::now();
  const Constants K = compute_constants();
  const double solve_seconds = seconds_since(t0);
  const ReferenceConstants ref;
  json checks = json::array();
  auto add = [&](const std::string& what, double value, double reference, double err, double tol) {
    checks.push_back({{"check", what}, {"value", value}, {"reference", reference}, {"error", err},
                      {"tolerance", tol}, {"pass", err <= tol}});
  };
  add("m8", K.m8, ref.m8, std::abs(K.m8 - ref.m8), ref.modulus_tol);
  add("mT", K.mT, ref.mT, std::abs(K.mT - ref.mT), ref.modulus_tol);
  add("mH", K.mH, ref.mH, std::abs(K.mH - ref.mH), ref.modulus_tol);
  add("C8", K.C8, ref.C8, std::abs(K.C8 - ref.C8), ref.constant_tol);
  add("C2T", K.C2T, ref.C2T, std::abs(K.C2T - ref.C2T), ref.constant_tol);

  const double q8 = quadrature_bbar(gamma8());
  const double q2T = quadrature_bbar(gamma2T());
  add("C8 by quadrature", q8, K.C8, std::abs(q8 - K.C8) / K.C8, 1e-10);
  add("C2T by quadrature", q2T, K.C2T, std::abs(q2T - K.C2T) / K.C2T, 1e-10);
  const double s8 = energies(gamma8().sample(n_samples)).Bbar;
  const double s2T = energies(gamma2T().sample(n_samples)).Bbar;
  add("C8 from sampled curve", s8, K.C8, std::abs(s8 - K.C8) / K.C8, 1e-4);
  add("C2T from sampled curve", s2T, K.C2T, std::abs(s2T - K.C2T) / K.C2T, 1e-4);
  bool pass = solve_seconds < 1.0;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  return json{{"experiment", "thresholds"},
              {"constants", constants_json()},
              {"solve_seconds", solve_seconds},
              {"n_samples", n_samples},
              {"checks", checks},
              {"pass", pass}};
}

}  // namespace elastic::experiments
