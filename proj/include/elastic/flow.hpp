#pragma once

// Elastic flow d/dt gamma = -2 nabla_s^2 kappa - |kappa|^2 kappa + lambda kappa
// for closed polygons in R^2 and R^3, with fixed lambda or the
// length-preserving multiplier.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "discrete_curve.hpp"
#include "intersections.hpp"

namespace elastic {

enum class LambdaMode { fixed, length_preserving };

inline const char* to_string(LambdaMode m) { return m == LambdaMode::fixed ? "fixed" : "length_preserving"; }

// gamma(x) = motion(gamma(shift - x)), indices taken modulo n
template <std::size_t N>
struct Symmetry {
  RigidMotion<N> motion;
  double shift = 0.5;
};

template <std::size_t N>
struct FlowConfig {
  LambdaMode mode = LambdaMode::length_preserving;
  double lambda = 1.0;  // fixed mode only
  double dt_initial = 1e-6;
  double dt_safety = 0.5;
  double dt_growth = 1.25;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-30;
  double t_max = 10.0;
  std::size_t max_steps = 100000;
  std::size_t resample_every = 10;
  std::size_t n_points = 512;
  IntersectionOptions intersection{0.0, 0.05};
  bool check_intersections = true;
  bool stop_on_intersection = true;
  std::optional<Symmetry<N>> symmetry;
  double convergence_tol = 1e-6;  // times (2 pi / L)^3
  std::size_t convergence_window = 100;
  double energy_slack = 1e-7;  // relative; steps above it are rejected
  double move_limit = 0.1;     // largest displacement per step, in mean spacings
  double length_drift_bound = 5e-3;
  std::size_t distance_every = 0;  // min_self_distance logging interval, 0 = off
  bool refine_event_time = true;   // bisect the detecting step for the first contact

  void validate() const {
    if (mode == LambdaMode::fixed && !(lambda > 0)) throw std::invalid_argument("FlowConfig: lambda must be positive");
    if (!(dt_initial > 0)) throw std::invalid_argument("FlowConfig: dt_initial must be positive");
    if (!(dt_safety > 0 && dt_safety <= 1)) throw std::invalid_argument("FlowConfig: dt_safety must lie in (0,1]");
    if (n_points < 64) throw std::invalid_argument("FlowConfig: n_points must be at least 64");
    if (resample_every == 0) throw std::invalid_argument("FlowConfig: resample_every must be positive");
    if (symmetry && n_points % 2 != 0) throw std::invalid_argument("FlowConfig: symmetry needs an even n_points");
  }
};

struct EnergySample {
  double t = 0;
  double L = 0, B = 0, Bbar = 0, E_lambda = 0, lambda = 0;
  double min_self_distance = std::numeric_limits<double>::quiet_NaN();
};

enum class EventKind { first_self_intersection, converged, t_max, step_limit };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::first_self_intersection: return "first_self_intersection";
    case EventKind::converged: return "converged";
    case EventKind::t_max: return "t_max";
    case EventKind::step_limit: return "step_limit";
  }
  return "unknown";
}

struct FlowEvent {
  double t = 0;
  std::size_t step = 0;
  EventKind kind = EventKind::t_max;
  std::size_t intersections = 0;
  std::string detail;
};

template <std::size_t N>
struct FlowState {
  double t = 0;
  DiscreteCurve<N> curve;
  double lambda_current = 0;
  double dt = 0;
  double L0 = 0;
  double max_velocity = 0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t calm_steps = 0;  // consecutive steps below the convergence threshold
  bool intersected = false;
  bool finished = false;
  std::vector<EnergySample> energy_history;
  std::vector<FlowEvent> events;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- discrete operators ----

template <std::size_t N>
struct CurvatureTerms {
  VertexGeometry<N> geom;
  std::vector<Vec<N>> grad_kappa;     // normal derivative of kappa on segments
  std::vector<Vec<N>> lap_kappa;      // nabla_s^2 kappa at vertices
};

template <std::size_t N>
CurvatureTerms<N> curvature_terms(const DiscreteCurve<N>& c) {
  if (!c.closed) throw std::invalid_argument("flow operators need a closed curve");
  CurvatureTerms<N> r;
  r.geom = vertex_geometry(c);
  const auto& g = r.geom;
  const std::size_t n = c.size();
  r.grad_kappa.resize(n);
  r.lap_kappa.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    const Vec<N> d = (g.kappa[c.next(e)] - g.kappa[e]) / g.h[e];
    r.grad_kappa[e] = d - dot(d, g.chord[e]) * g.chord[e];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec<N> d = (r.grad_kappa[i] - r.grad_kappa[c.prev(i)]) / g.ds[i];
    r.lap_kappa[i] = d - dot(d, g.tangent[i]) * g.tangent[i];
  }
  return r;
}

template <std::size_t N>
std::vector<Vec<N>> velocity(const DiscreteCurve<N>& c, double lambda) {
  const auto r = curvature_terms(c);
  std::vector<Vec<N>> V(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec<N>& k = r.geom.kappa[i];
    V[i] = -2.0 * r.lap_kappa[i] + (lambda - norm2(k)) * k;
  }
  return V;
}

struct LambdaNumerator {
  double direct = 0;    // sum <2 nabla^2 kappa + |kappa|^2 kappa, kappa> ds
  double by_parts = 0;  // sum -2 |nabla kappa|^2 h + |kappa|^4 ds
  double bending = 0;   // sum |kappa|^2 ds
};

template <std::size_t N>
LambdaNumerator lambda_numerator(const DiscreteCurve<N>& c) {
  const auto r = curvature_terms(c);
  const auto& g = r.geom;
  LambdaNumerator out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k2 = norm2(g.kappa[i]);
    out.direct += (2 * dot(r.lap_kappa[i], g.kappa[i]) + k2 * k2) * g.ds[i];
    out.by_parts += k2 * k2 * g.ds[i] - 2 * norm2(r.grad_kappa[i]) * g.h[i];
    out.bending += k2 * g.ds[i];
  }
  return out;
}

template <std::size_t N>
double lambda_length_preserving(const DiscreteCurve<N>& c) {
  const auto q = lambda_numerator(c);
  const double L = length(c);
  if (!(q.bending * L > 1e-12)) throw std::domain_error("lambda_length_preserving: curvature vanishes");
  return q.direct / q.bending;
}

namespace detail {

// (I + c D^4)^{-1} applied per coordinate, D^4 the cyclic stencil [1 -4 6 -4 1]
template <std::size_t N>
std::vector<Vec<N>> bilaplacian_filter(const std::vector<Vec<N>>& v, double c) {
  const std::size_t n = v.size();
  static thread_local Eigen::FFT<double> fft;
  std::vector<double> x(n), y;
  std::vector<std::complex<double>> freq;
  std::vector<Vec<N>> out(n);
  std::vector<double> denom(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = 2 - 2 * std::cos(2 * std::numbers::pi * double(k) / double(n));
    denom[k] = 1 + c * s * s;
  }
  for (std::size_t d = 0; d < N; ++d) {
    for (std::size_t i = 0; i < n; ++i) x[i] = v[i][d];
    fft.fwd(freq, x);
    for (std::size_t k = 0; k < freq.size(); ++k) freq[k] /= denom[k];
    fft.inv(y, freq);
    for (std::size_t i = 0; i < n; ++i) out[i][d] = y[i];
  }
  return out;
}

template <std::size_t N>
void project_symmetry(DiscreteCurve<N>& c, const Symmetry<N>& sym) {
  const std::size_t n = c.size();
  const auto shift = static_cast<std::size_t>(std::llround(sym.shift * double(n))) % n;
  const auto old = c.points;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (shift + n - i) % n;
    c[i] = 0.5 * (old[i] + sym.motion(old[j]));
  }
}

template <std::size_t N>
double monitored_energy(const DiscreteCurve<N>& c, const FlowConfig<N>& cfg) {
  const auto e = energies(c, cfg.lambda);
  return cfg.mode == LambdaMode::fixed ? e.E_lambda : e.Bbar;
}

// Equal-arclength spline resampling; with a symmetry, point 0 and its
// partner stay anchored so partners remain partners.
template <std::size_t N>
DiscreteCurve<N> resample_for_flow(const DiscreteCurve<N>& c, std::size_t n, const FlowConfig<N>& cfg) {
  std::size_t split = 0;
  if (cfg.symmetry) split = static_cast<std::size_t>(std::llround(cfg.symmetry->shift * double(c.size()))) % c.size();
  auto out = resample_spline(c, n, split);
  if (cfg.symmetry) project_symmetry(out, *cfg.symmetry);
  return out;
}

// Did two strands pass through each other between consecutive states with
// the same indexing? Checked by a sign change of the signed volume of each
// segment pair, confirmed by the segments meeting at the root.
inline std::size_t count_passages(const DiscreteCurve<3>& before, const DiscreteCurve<3>& after) {
  const std::size_t m = before.segment_count();
  std::vector<std::array<Vec3, 2>> boxes(m);
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = before.next(i);
    for (std::size_t d = 0; d < 3; ++d) {
      const double v[4] = {before[i][d], before[j][d], after[i][d], after[j][d]};
      boxes[i][0][d] = *std::min_element(v, v + 4);
      boxes[i][1][d] = *std::max_element(v, v + 4);
    }
    total += norm(after[j] - after[i]);
  }
  auto at = [&](std::size_t k, double tau) { return (1 - tau) * before[k] + tau * after[k]; };
  auto volume = [&](std::size_t i, std::size_t j, double tau) {
    const Vec3 p0 = at(i, tau), p1 = at(before.next(i), tau), q0 = at(j, tau), q1 = at(before.next(j), tau);
    return dot(p1 - p0, cross(q1 - q0, q0 - p0));
  };
  std::size_t count = 0;
  for_each_candidate<3>(boxes, 2 * total / double(m), [&](std::size_t i, std::size_t j) {
    if (i == j || before.next(i) == j || before.next(j) == i) return;
    double v0 = volume(i, j, 0), v1 = volume(i, j, 1);
    if (!((v0 < 0 && v1 > 0) || (v0 > 0 && v1 < 0))) return;
    double lo = 0, hi = 1;
    for (int it = 0; it < 60; ++it) {
      const double mid = (lo + hi) / 2;
      const double vm = volume(i, j, mid);
      ((vm < 0) == (v0 < 0) ? lo : hi) = mid;
    }
    const double tau = (lo + hi) / 2;
    const Vec3 p0 = at(i, tau), p1 = at(before.next(i), tau), q0 = at(j, tau), q1 = at(before.next(j), tau);
    auto [s, t] = closest_parameters(p0, p1, q0, q1);
    const double d = norm(p0 + s * (p1 - p0) - q0 - t * (q1 - q0));
    if (d <= 1e-8 * (norm(p1 - p0) + norm(q1 - q0))) ++count;
  });
  return count;
}

template <std::size_t N>
std::size_t count_intersections(const DiscreteCurve<N>& before, const DiscreteCurve<N>& after,
                                const FlowConfig<N>& cfg) {
  const std::size_t now = self_intersections(after, cfg.intersection).size();
  if constexpr (N == 3) {
    if (now == 0) return count_passages(before, after);
  }
  (void)before;
  return now;
}

template <std::size_t N>
EnergySample sample_energy(const FlowState<N>& s, const FlowConfig<N>& cfg) {
  const auto e = energies(s.curve, cfg.mode == LambdaMode::fixed ? cfg.lambda : s.lambda_current);
  EnergySample r;
  r.t = s.t;
  r.L = e.L;
  r.B = e.B;
  r.Bbar = e.Bbar;
  r.lambda = e.lambda;
  r.E_lambda = e.E_lambda;
  if (cfg.distance_every > 0 && s.steps % cfg.distance_every == 0) r.min_self_distance = min_self_distance(s.curve);
  return r;
}

template <std::size_t N>
double current_lambda(const DiscreteCurve<N>& c, const FlowConfig<N>& cfg) {
  return cfg.mode == LambdaMode::fixed ? cfg.lambda : lambda_length_preserving(c);
}

}  // namespace detail

template <std::size_t N>
FlowState<N> initial_state(const DiscreteCurve<N>& initial, const FlowConfig<N>& cfg) {
  cfg.validate();
  validate(initial);
  if (!initial.closed) throw std::invalid_argument("flow: initial curve must be closed");
  FlowState<N> s;
  s.curve = detail::resample_for_flow(initial, cfg.n_points, cfg);
  s.dt = cfg.dt_initial;
  s.L0 = length(s.curve);
  s.lambda_current = detail::current_lambda(s.curve, cfg);
  s.energy_history.push_back(detail::sample_energy(s, cfg));
  return s;
}

// One accepted time step. The fourth-order part is treated implicitly:
// gamma += dt (I + 2 dt D^4 / h^4)^{-1} V.
template <std::size_t N>
void advance(FlowState<N>& s, const FlowConfig<N>& cfg) {
  const double t_start = s.t;
  const std::size_t n = s.curve.size();
  const double lambda = detail::current_lambda(s.curve, cfg);
  const auto V = velocity(s.curve, lambda);
  double vmax = 0;
  for (const auto& v : V) vmax = std::max(vmax, norm(v));
  if (!std::isfinite(vmax)) throw FlowError("flow: velocity is not finite at t=" + std::to_string(s.t));
  s.max_velocity = vmax;
  const double L = length(s.curve);
  const double h = L / double(n);
  const double e_old = detail::monitored_energy(s.curve, cfg);

  // forward-Euler bound for the explicit curvature terms, whose slowest
  // modes (e.g. the radius of a circle) are not damped by the filter
  double kmax2 = 0;
  for (const auto& k : curvature_vector(s.curve)) kmax2 = std::max(kmax2, norm2(k));
  const double dt_explicit = cfg.dt_safety / (kmax2 * (3 * kmax2 + std::abs(lambda)));
  double dt = std::min({s.dt, cfg.dt_max, dt_explicit});
  DiscreteCurve<N> next;
  for (int attempt = 0;; ++attempt) {
    if (dt < cfg.dt_min || attempt > 200) {
      std::ostringstream msg;
      msg << "flow: step size underflow at t=" << s.t << " (dt=" << dt << ", step " << s.steps
          << ", max|V|=" << vmax << ")";
      throw FlowError(msg.str());
    }
    const auto W = detail::bilaplacian_filter(V, 2 * dt / (h * h * h * h));
    double wmax = 0;
    for (const auto& w : W) wmax = std::max(wmax, norm(w));
    const double move = dt * wmax, limit = cfg.move_limit * h;
    if (move > limit) {
      dt *= cfg.dt_safety * limit / move;
      continue;
    }
    next = s.curve;
    for (std::size_t i = 0; i < n; ++i) next[i] += dt * W[i];
    if (cfg.symmetry) detail::project_symmetry(next, *cfg.symmetry);
    double e_new;
    try {
      e_new = detail::monitored_energy(next, cfg);
    } catch (const std::invalid_argument&) {
      e_new = std::numeric_limits<double>::infinity();
    }
    if (!(e_new <= e_old + cfg.energy_slack * std::abs(e_old))) {
      dt /= 2;
      ++s.rejected;
      continue;
    }
    break;
  }

  const DiscreteCurve<N> before = s.curve;
  s.curve = std::move(next);
  s.t += dt;
  ++s.steps;

  if (cfg.check_intersections && !s.intersected) {
    const std::size_t k = detail::count_intersections(before, s.curve, cfg);
    if (k > 0) {
      s.intersected = true;
      double t_event = s.t;
      if (cfg.refine_event_time) {
        auto trial = [&](double tau) {
          DiscreteCurve<N> c = before;
          const auto W = detail::bilaplacian_filter(V, 2 * tau / (h * h * h * h));
          for (std::size_t i = 0; i < n; ++i) c[i] += tau * W[i];
          if (cfg.symmetry) detail::project_symmetry(c, *cfg.symmetry);
          return detail::count_intersections(before, c, cfg) > 0;
        };
        double lo = 0, hi = dt;
        for (int it = 0; it < 40 && hi - lo > 1e-6 * hi; ++it) {
          const double mid = (lo + hi) / 2;
          (trial(mid) ? hi : lo) = mid;
        }
        t_event = t_start + hi;
      }
      s.events.push_back({t_event, s.steps, EventKind::first_self_intersection, k, ""});
    }
  }

  if (s.steps % cfg.resample_every == 0) {
    s.curve = detail::resample_for_flow(s.curve, cfg.n_points, cfg);
    if (cfg.mode == LambdaMode::length_preserving) {
      s.curve = scaled(s.curve, s.L0 / length(s.curve), centroid(s.curve));
      if (cfg.symmetry) detail::project_symmetry(s.curve, *cfg.symmetry);
    }
  }

  s.lambda_current = detail::current_lambda(s.curve, cfg);
  s.energy_history.push_back(detail::sample_energy(s, cfg));

  const double kref = 2 * std::numbers::pi / length(s.curve);
  s.calm_steps = vmax < cfg.convergence_tol * kref * kref * kref ? s.calm_steps + 1 : 0;
  s.dt = std::min(dt * cfg.dt_growth, cfg.dt_max);
}

template <std::size_t N>
FlowState<N> step(const FlowState<N>& state, const FlowConfig<N>& cfg) {
  FlowState<N> s = state;
  advance(s, cfg);
  return s;
}

template <std::size_t N>
FlowState<N> run(const DiscreteCurve<N>& initial, const FlowConfig<N>& cfg,
                 const std::function<void(const FlowState<N>&)>& observer = {}) {
  FlowState<N> s = initial_state(initial, cfg);
  if (observer) observer(s);
  if (cfg.check_intersections) {
    const auto rep = self_intersections(s.curve, cfg.intersection);
    if (!rep.empty()) {
      s.intersected = true;
      s.events.push_back({0.0, 0, EventKind::first_self_intersection, rep.size(), "initial curve"});
      if (cfg.stop_on_intersection) {
        s.finished = true;
        return s;
      }
    }
  }
  while (true) {
    if (s.intersected && cfg.stop_on_intersection) break;
    if (s.calm_steps >= cfg.convergence_window) {
      s.events.push_back({s.t, s.steps, EventKind::converged, 0, ""});
      break;
    }
    if (s.t >= cfg.t_max) {
      s.events.push_back({s.t, s.steps, EventKind::t_max, 0, ""});
      break;
    }
    if (s.steps >= cfg.max_steps) {
      s.events.push_back({s.t, s.steps, EventKind::step_limit, 0, ""});
      break;
    }
    // land exactly on t_max
    FlowConfig<N> c = cfg;
    c.dt_max = std::min(cfg.dt_max, std::max(cfg.t_max - s.t, cfg.dt_min * 2));
    advance(s, c);
    if (observer) observer(s);
  }
  s.finished = true;
  return s;
}

template <std::size_t N>
const FlowEvent* find_event(const FlowState<N>& s, EventKind k) {
  for (const auto& e : s.events)
    if (e.kind == k) return &e;
  return nullptr;
}

}  // namespace elastic
