#pragma once

// Elliptic integrals and Jacobi elliptic functions with parameter m in [0,1).
// Complete integrals by the arithmetic-geometric mean, incomplete integrals
// and the amplitude by descending Landen (AGM) sequences after reduction
// by quasi-periodicity.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace elastic::elliptic {

namespace detail {

template <class Real>
void check_parameter(Real m, const char* who) {
  if (!(m >= Real(0) && m < Real(1)))
    throw std::domain_error(std::string(who) + ": parameter m must lie in [0,1), got " + std::to_string(double(m)));
}

// a_n, b_n, c_n of the AGM started at (1, sqrt(1-m)), c_0 = sqrt(m)
template <class Real>
struct Agm {
  static constexpr int max_terms = 64;
  Real a[max_terms], c[max_terms];
  int n = 0;  // last index

  explicit Agm(Real m) {
    a[0] = 1;
    Real b = std::sqrt(1 - m);
    c[0] = std::sqrt(m);
    const Real eps = std::numeric_limits<Real>::epsilon();
    while (std::abs(c[n]) > eps * a[n]) {
      if (n + 1 >= max_terms) throw std::runtime_error("elliptic: AGM failed to converge");
      a[n + 1] = (a[n] + b) / 2;
      c[n + 1] = c[n] * c[n] / (4 * a[n + 1]);
      b = std::sqrt(a[n] * b);
      ++n;
    }
  }
};

template <class Real>
struct Reduced {
  Real l;  // number of half periods
  Real r;  // remainder in [-pi/2, pi/2]
};

template <class Real>
Reduced<Real> reduce_angle(Real x) {
  const Real pi = std::numbers::pi_v<Real>;
  Real l = std::nearbyint(x / pi);
  return {l, x - l * pi};
}

}  // namespace detail

template <class Real>
Real complete_k(Real m) {
  static_assert(std::is_floating_point_v<Real>);
  detail::check_parameter(m, "complete_k");
  if (m == 0) return std::numbers::pi_v<Real> / 2;
  detail::Agm<Real> g(m);
  return std::numbers::pi_v<Real> / (2 * g.a[g.n]);
}

template <class Real>
Real complete_e(Real m) {
  static_assert(std::is_floating_point_v<Real>);
  detail::check_parameter(m, "complete_e");
  if (m == 0) return std::numbers::pi_v<Real> / 2;
  detail::Agm<Real> g(m);
  Real sum = 0, w = Real(0.5);
  for (int i = 0; i <= g.n; ++i, w *= 2) sum += w * g.c[i] * g.c[i];
  return std::numbers::pi_v<Real> / (2 * g.a[g.n]) * (1 - sum);
}

namespace detail {

// F and E on |phi| <= pi/2 by the descending sequence
// tan(phi_{n+1} - phi_n) = (b_n/a_n) tan(phi_n)
template <class Real>
void landen_fe(Real phi, Real m, Real& f, Real& e) {
  if (m == 0) {
    f = e = phi;
    return;
  }
  const Real k = complete_k(m);
  const Real ek = complete_e(m) / k;
  Real a = 1, b = std::sqrt(1 - m), c = std::sqrt(m);
  Real sum = 0, scale = 1;
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int i = 0; i < 64 && std::abs(c) > eps * a; ++i) {
    const Real s = std::sin(phi), co = std::cos(phi);
    phi = 2 * phi + std::atan2((b - a) * s * co, a * co * co + b * s * s);
    const Real an = (a + b) / 2;
    c = c * c / (4 * an);
    b = std::sqrt(a * b);
    a = an;
    scale *= 2;
    sum += c * std::sin(phi);
  }
  f = phi / (scale * a);
  e = ek * f + sum;
}

}  // namespace detail

template <class Real>
Real incomplete_f(Real x, Real m) {
  detail::check_parameter(m, "incomplete_f");
  auto [l, r] = detail::reduce_angle(x);
  Real f, e;
  detail::landen_fe(r, m, f, e);
  return l == 0 ? f : 2 * l * complete_k(m) + f;
}

template <class Real>
Real incomplete_e(Real x, Real m) {
  detail::check_parameter(m, "incomplete_e");
  auto [l, r] = detail::reduce_angle(x);
  Real f, e;
  detail::landen_fe(r, m, f, e);
  return l == 0 ? e : 2 * l * complete_e(m) + e;
}

// Jacobi amplitude: inverse of incomplete_f in its first argument
template <class Real>
Real am(Real u, Real m) {
  detail::check_parameter(m, "am");
  if (m == 0) return u;
  const Real k = complete_k(m);
  const Real l = std::nearbyint(u / (2 * k));
  const Real r = u - 2 * l * k;

  detail::Agm<Real> g(m);
  Real phi = std::ldexp(g.a[g.n] * r, g.n);
  for (int i = g.n; i > 0; --i) {
    Real q = g.c[i] / g.a[i] * std::sin(phi);
    if (q > 1) q = 1;
    if (q < -1) q = -1;
    phi = (phi + std::asin(q)) / 2;
  }
  return l * std::numbers::pi_v<Real> + phi;
}

template <class Real>
struct JacobiTriple {
  Real sn, cn, dn;
};

template <class Real>
JacobiTriple<Real> sncndn(Real u, Real m) {
  const Real phi = am(u, m);
  const Real s = std::sin(phi);
  return {s, std::cos(phi), std::sqrt(1 - m * s * s)};
}

template <class Real>
Real sn(Real u, Real m) { return sncndn(u, m).sn; }
template <class Real>
Real cn(Real u, Real m) { return sncndn(u, m).cn; }
template <class Real>
Real dn(Real u, Real m) { return sncndn(u, m).dn; }

// closed-form parameter derivatives of the complete integrals (m in (0,1))
template <class Real>
Real complete_k_derivative(Real m) {
  if (!(m > 0 && m < 1)) throw std::domain_error("complete_k_derivative: m must lie in (0,1)");
  return (complete_e(m) - (1 - m) * complete_k(m)) / (2 * m * (1 - m));
}

template <class Real>
Real complete_e_derivative(Real m) {
  if (!(m > 0 && m < 1)) throw std::domain_error("complete_e_derivative: m must lie in (0,1)");
  return (complete_e(m) - complete_k(m)) / (2 * m);
}

}  // namespace elastic::elliptic
