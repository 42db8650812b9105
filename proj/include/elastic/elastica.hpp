#pragma once

// Planar elastica prototypes, the characteristic moduli and the named
// optimal curves (figure-eight, teardrop, heart, two-teardrop and the
// teardrop-heart composite).

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "discrete_curve.hpp"
#include "elliptic.hpp"
#include "intersections.hpp"
#include "vec.hpp"

namespace elastic {

namespace el = elliptic;

// Exact planar parametrization over [a,b]. curvature is signed with
// respect to arclength; arclength(x) is measured from a.
struct AnalyticCurve {
  double a = 0, b = 0;
  bool closed = false;
  std::function<Vec2(double)> point;
  std::function<Vec2(double)> tangent;
  std::function<double(double)> curvature;
  std::function<double(double)> speed;
  std::function<double(double)> arclength;
  std::function<double(double)> parameter_at;  // inverse of arclength

  double length() const { return arclength(b); }

  std::size_t default_points() const {
    return std::max<std::size_t>(min_curve_points, std::size_t(std::ceil(1024.0 * (b - a) / (2 * std::numbers::pi))));
  }

  // Samples equally spaced in arclength. Closed curves do not repeat
  // their first point.
  DiscreteCurve<2> sample(std::size_t n) const {
    if (n < min_curve_points) throw std::invalid_argument("AnalyticCurve::sample: need at least 8 points");
    DiscreteCurve<2> c;
    c.closed = closed;
    c.points.reserve(n);
    const double L = length();
    const double step = closed ? L / double(n) : L / double(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = k == 0 ? a : (!closed && k + 1 == n ? b : parameter_at(k * step));
      c.points.push_back(point(x));
    }
    return c;
  }

  // Samples equally spaced in the parameter.
  DiscreteCurve<2> sample_parameter(std::size_t n) const {
    DiscreteCurve<2> c;
    c.closed = closed;
    const double step = closed ? (b - a) / double(n) : (b - a) / double(n - 1);
    for (std::size_t k = 0; k < n; ++k) c.points.push_back(point(a + k * step));
    return c;
  }
};

// ---- scalar functions of the modulus ----

inline double alpha(double m) {
  if (!(m >= 0.5 && m <= 1)) throw std::domain_error("alpha: m must be at least 1/2");
  return std::asin(std::sqrt(1 / (2 * m)));
}

// first coordinate of the wavelike curve
inline double G(double x, double m) { return 2 * el::incomplete_e(x, m) - el::incomplete_f(x, m); }

inline double f(double m) {
  if (!(m >= 0.5 && m < 1)) throw std::domain_error("f: m must lie in [1/2,1)");
  return G(std::numbers::pi - alpha(m), m);
}

// first coordinate of the orbitlike curve
inline double H(double x, double m) {
  return (2 * el::incomplete_e(x, m) + (m - 2) * el::incomplete_f(x, m)) / m;
}

inline double g(double m) {
  if (!(m > 0 && m < 1)) throw std::domain_error("g: m must lie in (0,1)");
  const double pi = std::numbers::pi;
  return 2 * (H(pi / 2, m) - H(-pi / 4, m));
}

inline double figure_eight_residual(double m) { return 2 * el::complete_e(m) - el::complete_k(m); }

// bisection of a decreasing function with f(lo) > 0 > f(hi)
template <class Fn>
double bisect_decreasing(Fn&& fn, double lo, double hi, double width = 1e-13) {
  double flo = fn(lo), fhi = fn(hi);
  if (!(flo > 0 && fhi < 0)) throw std::runtime_error("bisection: bracket has no sign change");
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    const double mid = (lo + hi) / 2;
    const double fm = fn(mid);
    if (fm == 0) return mid;
    (fm > 0 ? lo : hi) = mid;
  }
  if (hi - lo > width) throw std::runtime_error("bisection: no convergence");
  return (lo + hi) / 2;
}

inline double solve_m8() { return bisect_decreasing(figure_eight_residual, 0.5, 0.99); }
inline double solve_mT() { return bisect_decreasing(f, 0.5, solve_m8()); }
inline double solve_mH() { return bisect_decreasing(g, 0.01, 0.99); }

inline double constant_C8(double m8) {
  const double k = el::complete_k(m8);
  return 32 * (2 * m8 - 1) * k * k;
}

inline double constant_C2T(double mT) {
  const double F = el::incomplete_f(std::numbers::pi - alpha(mT), mT);
  return 32 * (2 * mT - 1) * F * F;
}

struct Constants {
  double m8, mT, mH;
  double C8, C2T;
  double alphaT;  // alpha(mT)
  double residual_m8, residual_mT, residual_mH;
};

inline Constants compute_constants() {
  Constants c;
  c.m8 = solve_m8();
  c.mT = bisect_decreasing(f, 0.5, c.m8);
  c.mH = solve_mH();
  c.C8 = constant_C8(c.m8);
  c.C2T = constant_C2T(c.mT);
  c.alphaT = alpha(c.mT);
  c.residual_m8 = figure_eight_residual(c.m8);
  c.residual_mT = f(c.mT);
  c.residual_mH = g(c.mH);
  return c;
}

inline const Constants& constants() {
  static const Constants c = compute_constants();
  return c;
}

inline double constant_C8() { return constants().C8; }
inline double constant_C2T() { return constants().C2T; }

// ---- parametrized families ----

inline AnalyticCurve wavelike_curve(double m, double a, double b, bool closed = false) {
  AnalyticCurve c;
  c.a = a;
  c.b = b;
  c.closed = closed;
  const double rm = std::sqrt(m);
  const double fa = el::incomplete_f(a, m);
  c.point = [m, rm](double x) { return Vec2{G(x, m), -2 * rm * std::cos(x)}; };
  c.tangent = [m, rm](double x) {
    const double s = std::sin(x);
    return Vec2{1 - 2 * m * s * s, 2 * rm * s * std::sqrt(1 - m * s * s)};
  };
  c.curvature = [rm](double x) { return 2 * rm * std::cos(x); };
  c.speed = [m](double x) {
    const double s = std::sin(x);
    return 1 / std::sqrt(1 - m * s * s);
  };
  c.arclength = [m, fa](double x) { return el::incomplete_f(x, m) - fa; };
  c.parameter_at = [m, fa](double s) { return el::am(s + fa, m); };
  return c;
}

inline AnalyticCurve orbitlike_curve(double m, double a, double b, bool closed = false) {
  AnalyticCurve c;
  c.a = a;
  c.b = b;
  c.closed = closed;
  const double fa = el::incomplete_f(a, m);
  c.point = [m](double x) {
    const double s = std::sin(x);
    return Vec2{H(x, m), -2 * std::sqrt(1 - m * s * s) / m};
  };
  c.tangent = [](double x) { return Vec2{std::cos(2 * x), std::sin(2 * x)}; };
  c.curvature = [m](double x) {
    const double s = std::sin(x);
    return 2 * std::sqrt(1 - m * s * s);
  };
  c.speed = [m](double x) {
    const double s = std::sin(x);
    return 1 / std::sqrt(1 - m * s * s);
  };
  c.arclength = [m, fa](double x) { return el::incomplete_f(x, m) - fa; };
  c.parameter_at = [m, fa](double s) { return el::am(s + fa, m); };
  return c;
}

struct PrototypeKind {
  enum class Tag { linear, wavelike, borderline, orbitlike, circular };
  Tag tag = Tag::linear;
  double modulus = 0;
  double radius = 0;

  static PrototypeKind linear() { return {}; }
  static PrototypeKind wavelike(double m) { return {Tag::wavelike, m, 0}; }
  static PrototypeKind borderline() { return {Tag::borderline, 0, 0}; }
  static PrototypeKind orbitlike(double m) { return {Tag::orbitlike, m, 0}; }
  static PrototypeKind circular(double r) { return {Tag::circular, 0, r}; }
};

// Arclength-parametrized prototype on [s0, s1].
inline AnalyticCurve prototype(const PrototypeKind& kind, double s0, double s1) {
  using Tag = PrototypeKind::Tag;
  if ((kind.tag == Tag::wavelike || kind.tag == Tag::orbitlike) && !(kind.modulus > 0 && kind.modulus < 1))
    throw std::invalid_argument("prototype: modulus must lie in (0,1)");
  if (kind.tag == Tag::circular && !(kind.radius > 0))
    throw std::invalid_argument("prototype: radius must be positive");
  if (!(s1 > s0)) throw std::invalid_argument("prototype: empty interval");
  AnalyticCurve c;
  c.a = s0;
  c.b = s1;
  c.speed = [](double) { return 1.0; };
  c.arclength = [s0](double s) { return s - s0; };
  c.parameter_at = [s0](double s) { return s + s0; };
  const double m = kind.modulus;
  switch (kind.tag) {
    case Tag::linear:
      c.point = [](double s) { return Vec2{s, 0.0}; };
      c.tangent = [](double) { return Vec2{1.0, 0.0}; };
      c.curvature = [](double) { return 0.0; };
      break;
    case Tag::wavelike:
      c.point = [m](double s) {
        const double phi = el::am(s, m);
        return Vec2{2 * el::incomplete_e(phi, m) - s, -2 * std::sqrt(m) * std::cos(phi)};
      };
      c.tangent = [m](double s) {
        const auto j = el::sncndn(s, m);
        return Vec2{1 - 2 * m * j.sn * j.sn, 2 * std::sqrt(m) * j.sn * j.dn};
      };
      c.curvature = [m](double s) { return 2 * std::sqrt(m) * el::cn(s, m); };
      break;
    case Tag::borderline:
      c.point = [](double s) { return Vec2{2 * std::tanh(s) - s, -2 / std::cosh(s)}; };
      c.tangent = [](double s) {
        const double h = 1 / std::cosh(s);
        return Vec2{2 * h * h - 1, 2 * h * std::tanh(s)};
      };
      c.curvature = [](double s) { return 2 / std::cosh(s); };
      break;
    case Tag::orbitlike:
      c.point = [m](double s) {
        const auto j = el::sncndn(s, m);
        const double phi = el::am(s, m);
        return Vec2{(2 * el::incomplete_e(phi, m) + (m - 2) * s) / m, -2 * j.dn / m};
      };
      c.tangent = [m](double s) {
        const double phi = 2 * el::am(s, m);
        return Vec2{std::cos(phi), std::sin(phi)};
      };
      c.curvature = [m](double s) { return 2 * el::dn(s, m); };
      break;
    case Tag::circular: {
      const double r = kind.radius;
      c.point = [r](double s) { return Vec2{r * std::sin(s / r), -r * std::cos(s / r)}; };
      c.tangent = [r](double s) { return Vec2{std::cos(s / r), std::sin(s / r)}; };
      c.curvature = [r](double) { return 1 / r; };
      c.closed = std::abs((s1 - s0) - 2 * std::numbers::pi * r) < 1e-12 * r;
      break;
    }
  }
  return c;
}

// ---- named curves ----

inline AnalyticCurve gamma8() { return wavelike_curve(constants().m8, 0, 2 * std::numbers::pi, true); }

inline double teardrop_end(double mT) { return std::numbers::pi - alpha(mT); }

inline AnalyticCurve gammaT() {
  const double mT = constants().mT, b = teardrop_end(mT);
  return wavelike_curve(mT, -b, b, false);
}

inline AnalyticCurve gammaH() {
  const double pi = std::numbers::pi;
  return orbitlike_curve(constants().mH, -pi / 4, 5 * pi / 4, false);
}

// Teardrop followed by its point reflection through the shared endpoint,
// on (-2 beta, 2 beta) with beta = pi - alpha(mT).
inline AnalyticCurve gamma2T() {
  const double mT = constants().mT;
  const double beta = teardrop_end(mT);
  const AnalyticCurve T = gammaT();
  const Vec2 p = T.point(beta);
  const double LT = T.length();
  const double fa = el::incomplete_f(-beta, mT);
  AnalyticCurve c;
  c.a = -2 * beta;
  c.b = 2 * beta;
  c.closed = true;
  c.point = [T, p, beta](double x) { return x >= 0 ? T.point(x - beta) : 2.0 * p - T.point(x + beta); };
  c.tangent = [T, beta](double x) { return x >= 0 ? T.tangent(x - beta) : -T.tangent(x + beta); };
  c.curvature = [T, beta](double x) { return x >= 0 ? T.curvature(x - beta) : T.curvature(x + beta); };
  c.speed = [T, beta](double x) { return x >= 0 ? T.speed(x - beta) : T.speed(x + beta); };
  c.arclength = [mT, beta, LT, fa](double x) {
    return x >= 0 ? LT + el::incomplete_f(x - beta, mT) - fa : el::incomplete_f(x + beta, mT) - fa;
  };
  c.parameter_at = [mT, beta, LT, fa](double s) {
    return s < LT ? el::am(s + fa, mT) - beta : el::am(s - LT + fa, mT) + beta;
  };
  return c;
}

struct TeardropHeart {
  AnalyticCurve curve;
  double a2;           // heart scale relative to the teardrop
  double junction;     // parameter where the heart starts
  RigidMotion<2> S;    // reflection part of the heart placement
  Vec2 v;              // translation of the heart before centring
};

// Teardrop from a_T to b_T, then the scaled, reflected heart from a_H to
// b_H; translated so the teardrop cusp sits at the origin.
inline TeardropHeart teardrop_heart() {
  const auto& K = constants();
  const double pi = std::numbers::pi;
  const double mT = K.mT, mH = K.mH;
  const double bT = teardrop_end(mT), aT = -bT;
  const double aH = -pi / 4, bH = 5 * pi / 4;
  const AnalyticCurve T = gammaT(), Hc = gammaH();
  const double a2 = std::sqrt((2 - mH) / (2 * mT - 1));
  const RigidMotion<2> S(Mat<2>{Vec2{1.0, 0.0}, Vec2{0.0, -1.0}}, Vec2{});
  const Vec2 v = T.point(aT) - S(a2 * Hc.point(bH));
  const Vec2 shift = -T.point(aT);
  const double LT = T.length();

  TeardropHeart th;
  th.a2 = a2;
  th.S = S;
  th.v = v;
  th.junction = bT;
  AnalyticCurve& c = th.curve;
  c.a = aT;
  c.b = bT + (bH - aH);
  c.closed = true;
  c.point = [=](double x) {
    if (x <= bT) return T.point(x) + shift;
    return S(a2 * Hc.point(aH + (x - bT))) + v + shift;
  };
  c.tangent = [=](double x) {
    if (x <= bT) return T.tangent(x);
    return S.apply_linear(Hc.tangent(aH + (x - bT)));
  };
  c.curvature = [=](double x) {
    if (x <= bT) return T.curvature(x);
    return -Hc.curvature(aH + (x - bT)) / a2;
  };
  c.speed = [=](double x) {
    if (x <= bT) return T.speed(x);
    return a2 * Hc.speed(aH + (x - bT));
  };
  c.arclength = [=](double x) {
    if (x <= bT) return T.arclength(x);
    return LT + a2 * Hc.arclength(aH + (x - bT));
  };
  c.parameter_at = [=](double s) {
    if (s <= LT) return T.parameter_at(s);
    return bT + (Hc.parameter_at((s - LT) / a2) - aH);
  };
  return th;
}

// Dense sampling of the wavelike curve on [-2 pi, 4 pi], exact crossings only.
inline bool wavelike_self_intersects(double m, std::size_t points_per_period = 4096) {
  if (!(m > 0 && m < 1)) throw std::domain_error("wavelike_self_intersects: m must lie in (0,1)");
  const double pi = std::numbers::pi;
  const AnalyticCurve w = wavelike_curve(m, -2 * pi, 4 * pi, false);
  const auto c = w.sample_parameter(3 * points_per_period + 1);
  return !self_intersections(c, IntersectionOptions{0.0, 0.05}).empty();
}

}  // namespace elastic
