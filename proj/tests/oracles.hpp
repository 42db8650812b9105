#pragma once

// Independent reference computations for the tests: adaptive Simpson
// quadrature, a fixed-step RK4 integrator and random polygons.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "elastic/discrete_curve.hpp"

namespace oracle {

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  // split first so smooth periodic integrands are not fooled by symmetry
  const int pieces = 16;
  double s = 0;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + (b - a) * k / pieces, hi = a + (b - a) * (k + 1) / pieces;
    const double flo = f(lo), fhi = f(hi), fm = f((lo + hi) / 2);
    s += detail::simpson_rec(f, lo, hi, flo, fm, fhi, (hi - lo) / 6 * (flo + 4 * fm + fhi), tol / pieces, 40);
  }
  return s;
}

inline double K(double m) {
  return integrate([m](double t) { return 1 / std::sqrt(1 - m * std::sin(t) * std::sin(t)); }, 0, std::numbers::pi / 2);
}
inline double E(double m) {
  return integrate([m](double t) { return std::sqrt(1 - m * std::sin(t) * std::sin(t)); }, 0, std::numbers::pi / 2);
}
inline double F(double x, double m) {
  return integrate([m](double t) { return 1 / std::sqrt(1 - m * std::sin(t) * std::sin(t)); }, 0, x);
}
inline double Einc(double x, double m) {
  return integrate([m](double t) { return std::sqrt(1 - m * std::sin(t) * std::sin(t)); }, 0, x);
}

// am(u, m) from phi' = sqrt(1 - m sin^2 phi), phi(0) = 0, classical RK4.
inline double am_ode(double u, double m, int steps = 20000) {
  auto rhs = [m](double p) { return std::sqrt(1 - m * std::sin(p) * std::sin(p)); };
  const double h = u / steps;
  double p = 0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = rhs(p), k2 = rhs(p + h / 2 * k1), k3 = rhs(p + h / 2 * k2), k4 = rhs(p + h * k3);
    p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return p;
}

// Random closed polygon: a star-shaped blob with a few Fourier modes plus
// jitter. With `wild` the radius may go negative, which produces
// self-intersections.
inline elastic::Curve2 random_curve(std::mt19937_64& rng, std::size_t n, bool wild) {
  std::uniform_real_distribution<double> u(-1, 1);
  double a[6], b[6];
  for (int k = 0; k < 6; ++k) {
    a[k] = u(rng) * (wild ? 0.9 : 0.25) / (k + 1);
    b[k] = u(rng) * (wild ? 0.9 : 0.25) / (k + 1);
  }
  std::vector<elastic::Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * double(i) / double(n);
    double r = 1;
    for (int k = 0; k < 6; ++k) r += a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t);
    r += 0.002 * u(rng);
    p[i] = r * elastic::Vec2{std::cos(t), std::sin(t)};
  }
  return elastic::Curve2(std::move(p), true);
}

}  // namespace oracle
