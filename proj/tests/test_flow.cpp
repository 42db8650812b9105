#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "elastic/elastica.hpp"
#include "elastic/flow.hpp"
#include "elastic/perturb.hpp"
#include "oracles.hpp"

using namespace elastic;
constexpr double pi = std::numbers::pi;

namespace {

Curve2 circle(std::size_t n, double r = 1) {
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = r * Vec2{std::cos(2 * pi * i / n), std::sin(2 * pi * i / n)};
  return Curve2(std::move(p), true);
}

double mean_radius(const Curve2& c) {
  const Vec2 o = centroid(c);
  double s = 0;
  for (const auto& p : c.points) s += norm(p - o);
  return s / double(c.size());
}

// r' = 1/r^3 - lambda/r by RK4
double radius_ode(double r, double lambda, double t, int steps = 20000) {
  auto f = [lambda](double x) { return 1 / (x * x * x) - lambda / x; };
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(r), k2 = f(r + h / 2 * k1), k3 = f(r + h / 2 * k2), k4 = f(r + h * k3);
    r += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

FlowConfig<2> fixed_config(double lambda, std::size_t n) {
  FlowConfig<2> cfg;
  cfg.mode = LambdaMode::fixed;
  cfg.lambda = lambda;
  cfg.n_points = n;
  return cfg;
}

}  // namespace

TEST(Velocity, CircleIsRadial) {
  for (double r : {0.5, 1.0, 3.0}) {
    const auto c = circle(256, r);
    const double lambda = 0.7;
    const auto V = velocity(c, lambda);
    const double expect = -1 / (r * r * r) + lambda / r;  // along the inward normal
    for (std::size_t i = 0; i < c.size(); i += 17) {
      const Vec2 inward = -1.0 * c[i] / r;
      EXPECT_NEAR(dot(V[i], inward), expect, 1e-3 * std::abs(expect) + 1e-12);
      EXPECT_NEAR(std::abs(cross(V[i], inward)), 0.0, 1e-10);
    }
  }
}

TEST(Velocity, ElasticaIsNearlyStationary) {
  // figure-eight with its own multiplier: |V| = O(h^2)
  double prev = 0;
  for (std::size_t n : {256, 512, 1024}) {
    const auto c = gamma8().sample(n);
    const auto V = velocity(c, lambda_length_preserving(c));
    double vmax = 0;
    for (const auto& v : V) vmax = std::max(vmax, norm(v));
    if (prev > 0) {
      EXPECT_LT(vmax, 0.3 * prev);
    }
    prev = vmax;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Multiplier, CircleAndErrors) {
  for (double r : {0.5, 2.0}) EXPECT_NEAR(lambda_length_preserving(circle(512, r)), 1 / (r * r), 1e-4 / (r * r));
  std::vector<Vec2> line;
  for (int i = 0; i < 20; ++i) line.push_back(Vec2{double(i), 0.5 * i});
  EXPECT_THROW(lambda_length_preserving(Curve2(line, false)), std::invalid_argument);
}

TEST(Multiplier, NumeratorBySummationByParts) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = oracle::random_curve(rng, 64 + rng() % 400, trial % 2);
    const auto q = lambda_numerator(c);
    EXPECT_NEAR(q.direct, q.by_parts, 1e-8 * std::abs(q.direct)) << trial;
  }
  const auto q = lambda_numerator(gamma2T().sample(1024));
  EXPECT_NEAR(q.direct, q.by_parts, 1e-8 * std::abs(q.direct));
}

TEST(Config, Validation) {
  auto cfg = fixed_config(1.0, 128);
  EXPECT_NO_THROW(cfg.validate());
  cfg.lambda = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = fixed_config(1.0, 32);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = fixed_config(1.0, 128);
  cfg.dt_initial = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = fixed_config(1.0, 128);
  cfg.dt_safety = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = fixed_config(1.0, 129);
  cfg.symmetry = planar_symmetry();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  // length-preserving mode ignores lambda
  FlowConfig<2> lp;
  lp.lambda = -1;
  EXPECT_NO_THROW(lp.validate());
}

TEST(Step, UnitCircleIsStationary) {
  const auto cfg = fixed_config(1.0, 128);
  auto s = initial_state(circle(128), cfg);
  for (int k = 0; k < 20; ++k) {
    const auto before = s.curve;
    advance(s, cfg);
    double d = 0;
    for (std::size_t i = 0; i < before.size(); ++i) d = std::max(d, norm(s.curve[i] - before[i]));
    EXPECT_LT(d, 1e-8);
  }
}

TEST(Run, CircleShrinksLikeTheRadialOde) {
  auto cfg = fixed_config(1.0, 128);
  cfg.t_max = 2.0;
  std::vector<std::pair<double, double>> track;
  run<2>(circle(128, 2.0), cfg, [&](const FlowState<2>& st) { track.emplace_back(st.t, mean_radius(st.curve)); });
  ASSERT_GT(track.size(), 10u);
  for (std::size_t k = 1; k < track.size(); ++k) EXPECT_LT(track[k].second, track[k - 1].second);
  for (std::size_t k = 0; k < track.size(); k += track.size() / 10)
    EXPECT_NEAR(track[k].second, radius_ode(2.0, 1.0, track[k].first), 4e-3) << track[k].first;
  // the explicit part is first order in time and dt follows the spacing
  const double exact = radius_ode(2.0, 1.0, 2.0);
  double prev = 0;
  for (std::size_t n : {128, 256, 512}) {
    cfg.n_points = n;
    const double err = std::abs(mean_radius(run(circle(n, 2.0), cfg).curve) - exact);
    if (prev > 0) {
      EXPECT_LT(err, 0.6 * prev);
    }
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Run, CircleConvergesToStationaryRadius) {
  auto cfg = fixed_config(1.0, 128);
  cfg.t_max = 1e4;
  const auto s = run(circle(128, 2.0), cfg);
  ASSERT_NE(find_event(s, EventKind::converged), nullptr);
  EXPECT_NEAR(mean_radius(s.curve), 1.0, 1e-3);
}

TEST(Run, MonotoneEnergyAndTopology) {
  std::mt19937_64 rng(31);
  for (auto mode : {LambdaMode::fixed, LambdaMode::length_preserving}) {
    for (int trial = 0; trial < 2; ++trial) {
      const auto c0 = oracle::random_curve(rng, 256, false);
      FlowConfig<2> cfg;
      cfg.mode = mode;
      cfg.lambda = 1.0;
      cfg.n_points = 128;
      cfg.max_steps = 400;
      cfg.t_max = 1e6;
      const long n0 = rotation_number(c0).integer;
      double prev = std::numeric_limits<double>::infinity();
      double L0 = 0;
      run<2>(c0, cfg, [&](const FlowState<2>& st) {
        const auto e = energies(st.curve, cfg.lambda);
        const double now = mode == LambdaMode::fixed ? e.E_lambda : e.Bbar;
        EXPECT_LE(now, prev + 1e-6 * std::abs(prev));
        prev = now;
        EXPECT_EQ(rotation_number(st.curve).integer, n0);
        if (L0 == 0) L0 = e.L;
        if (mode == LambdaMode::length_preserving) {
          EXPECT_LT(std::abs(e.L - L0) / L0, 5e-3);
        }
      });
    }
  }
}

TEST(Run, HistoryTimesIncrease) {
  auto cfg = fixed_config(2.0, 96);
  cfg.max_steps = 50;
  const auto s = run(circle(96, 1.3), cfg);
  for (std::size_t k = 1; k < s.energy_history.size(); ++k)
    EXPECT_GT(s.energy_history[k].t, s.energy_history[k - 1].t);
  ASSERT_FALSE(s.events.empty());
  EXPECT_EQ(s.events.back().kind, EventKind::step_limit);
}

TEST(Run, SymmetryHoldsExactly) {
  PerturbParams p;
  p.alpha = 0.01;
  p.n_points = 512;
  p.epsilon = std::numeric_limits<double>::infinity();
  const auto eta = eta_planar(p);
  FlowConfig<2> cfg;
  cfg.mode = LambdaMode::fixed;
  cfg.lambda = 1.0;
  cfg.n_points = 512;
  cfg.max_steps = 30;
  cfg.dt_initial = 1e-12;
  cfg.symmetry = planar_symmetry();
  cfg.stop_on_intersection = false;
  const auto R = cfg.symmetry->motion;
  run<2>(eta.curve, cfg, [&](const FlowState<2>& st) {
    const std::size_t n = st.curve.size();
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, norm(st.curve[i] - R(st.curve[(n / 2 + n - i) % n])));
    EXPECT_LT(d, 1e-12);
  });
}

TEST(Passages, SyntheticStrandCrossing) {
  // Lissajous figure-eight in the plane, crossing at t = 0 and t = pi; the
  // strand near t = 0 moves from above to below the other one
  const std::size_t n = 200;
  auto build = [&](double height) {
    std::vector<Vec3> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2 * pi * (double(i) + 0.3) / double(n);
      const double w = std::remainder(t, 2 * pi);
      p[i] = Vec3{std::sin(2 * t), std::sin(t), height * std::exp(-w * w / 0.1)};
    }
    return DiscreteCurve<3>(std::move(p), true);
  };
  EXPECT_EQ(detail::count_passages(build(0.05), build(-0.05)), 1u);
  EXPECT_EQ(detail::count_passages(build(0.05), build(0.02)), 0u);
  EXPECT_EQ(detail::count_passages(build(0.05), build(0.05)), 0u);
}

TEST(Perturbed, PlanarVelocityAtContact) {
  // w = rho^2 x^4 near the contact, so V2(0) = -2 d^2/dx^2 (12 rho^2 x^2) = -48 rho^2
  PerturbParams p;
  p.alpha = 0;
  p.n_points = 4096;
  p.epsilon = std::numeric_limits<double>::infinity();
  const auto eta = eta_planar(p);
  const auto V = velocity(eta.curve, 1.0);
  const double rho = eta.rho;
  EXPECT_NEAR(V[0][1], -48 * rho * rho, 0.02 * 48 * rho * rho);
  EXPECT_NEAR(V[p.n_points / 2][1], 48 * rho * rho, 0.02 * 48 * rho * rho);
}
