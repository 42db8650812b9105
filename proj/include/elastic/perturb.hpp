#pragma once

// Initial data that break embeddedness under the flow: the two-teardrop
// with its contact opened into two graphs, and the figure-eight lifted
// out of the plane at its crossing.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "discrete_curve.hpp"
#include "elastica.hpp"
#include "flow.hpp"

namespace elastic {

inline double bump_u(double alpha, double x) { return x * x * x * x + alpha; }

namespace detail {
inline double smooth_part(double t) { return t > 0 ? std::exp(-1 / t) : 0.0; }
// 0 for t <= 0, 1 for t >= 1, smooth in between
inline double smooth_step(double t) {
  const double a = smooth_part(t), b = smooth_part(1 - t);
  return a / (a + b);
}
}  // namespace detail

// Even, identically 1 on [-1/2, 1/2], supported in (-1, 1).
inline double cutoff_psi(double x) { return detail::smooth_step(2 * (1 - std::abs(x))); }

inline double blend_w(double alpha, double rho, const std::function<double(double)>& v, double x,
                      double rho0 = std::numeric_limits<double>::infinity()) {
  if (!(rho > 0 && rho < rho0)) throw std::invalid_argument("blend_w: rho must lie in (0, rho0)");
  const double psi = cutoff_psi(x / rho);
  if (psi == 0) return v(x);
  return (1 - psi) * v(x) + rho * rho * psi * bump_u(alpha, x);
}

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson).
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need matching samples");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      if (!(h[i] > 0)) throw std::invalid_argument("MonotoneCubic: abscissae must increase");
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0) continue;
      const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    auto end = [](double h0, double h1, double d0, double d1) {
      double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d * d0 <= 0) return 0.0;
      if (d0 * d1 <= 0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
      return d;
    };
    d_[0] = end(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  double operator()(double x) const { return eval(x, false); }
  double derivative(double x) const { return eval(x, true); }

 private:
  double eval(double x, bool deriv) const {
    if (x < x_.front() || x > x_.back()) throw std::domain_error("MonotoneCubic: outside the sampled range");
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    i = i == 0 ? 0 : std::min(i - 1, x_.size() - 2);
    const double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1], m0 = d_[i] * h, m1 = d_[i + 1] * h;
    if (!deriv) {
      const double t2 = t * t, t3 = t2 * t;
      return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    }
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
  }

  std::vector<double> x_, y_, d_;
};

struct PerturbParams {
  double alpha = 0.01;
  std::optional<double> rho;  // starting value (length); unset: 0.05 L
  double epsilon = 0.5;  // energy margin above the threshold; infinity disables shrinking
  std::size_t n_points = 4096;
  double min_spacings_per_rho = 16;
};

template <std::size_t N>
struct PerturbedCurve {
  DiscreteCurve<N> curve;
  std::string family;
  double alpha = 0, rho = 0, epsilon = 0;
  double Bbar = 0;
  double threshold = 0;  // C2T or C8
  int rho_halvings = 0;
};

// gamma(x) = R gamma(1/2 - x) with R = diag(1,-1)
inline Symmetry<2> planar_symmetry() {
  return {RigidMotion<2>(Mat<2>{Vec2{1.0, 0.0}, Vec2{0.0, -1.0}}, Vec2{}), 0.5};
}

// Two-teardrop at its native size, point i at arclength fraction i/n, contact
// at the origin for i = 0 and i = n/2 with tangents e1 and -e1, the first
// branch leaving into the upper half plane. n must be a multiple of 4.
inline DiscreteCurve<2> two_teardrop_normalized(std::size_t n) {
  if (n % 4 != 0 || n < 16) throw std::invalid_argument("two_teardrop_normalized: n must be a multiple of 4");
  const auto& K = constants();
  const AnalyticCurve T = gammaT();
  const double beta = teardrop_end(K.mT);
  const double LT = T.length(), Ltot = 2 * LT;
  const Vec2 p = T.point(-beta);
  // rotate the start tangent onto e1
  const Vec2 t0 = T.tangent(-beta);
  const Mat<2> rot = rotation(-std::atan2(t0[1], t0[0]));
  auto map = [&](const Vec2& q) { return rot * (q - p); };
  bool flip = false;
  {
    const Vec2 probe = map(T.point(T.parameter_at(0.01 * LT)));
    flip = probe[1] < 0;
  }
  std::vector<Vec2> pts(n);
  const std::size_t q = n / 4, half = n / 2;
  for (std::size_t k = 0; k <= q; ++k) {
    Vec2 z = k == 0 ? Vec2{0.0, 0.0} : map(T.point(T.parameter_at(Ltot * double(k) / double(n))));
    if (flip) z[1] = -z[1];
    pts[k] = z;
  }
  for (std::size_t k = 0; k <= q; ++k) {
    const Vec2& z = pts[k];
    pts[half - k] = Vec2{z[0], -z[1]};
    pts[(half + k) % n] = -z;
    pts[(n - k) % n] = Vec2{-z[0], z[1]};
  }
  return DiscreteCurve<2>(std::move(pts), true);
}

// Figure-eight at its native size with its crossing at the origin, reached at
// i = 0 and i = n/2. n must be even.
inline DiscreteCurve<2> figure_eight_normalized(std::size_t n) {
  if (n % 2 != 0 || n < 16) throw std::invalid_argument("figure_eight_normalized: n must be even");
  const AnalyticCurve c = gamma8();
  const double pi = std::numbers::pi;
  const double L = c.length();
  const double s0 = c.arclength(pi / 2);
  const Vec2 o = c.point(pi / 2);
  std::vector<Vec2> pts(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = s0 + L * double(k) / double(n);
    if (s > L) s -= L;
    pts[k] = k == 0 ? Vec2{0.0, 0.0} : c.point(c.parameter_at(s)) - o;
  }
  pts[n / 2] = Vec2{0.0, 0.0};
  return DiscreteCurve<2>(std::move(pts), true);
}

inline std::pair<Vec2, Vec2> figure_eight_crossing_tangents() {
  const AnalyticCurve c = gamma8();
  const double pi = std::numbers::pi;
  return {c.tangent(pi / 2), c.tangent(3 * pi / 2)};
}

namespace detail {

// Upper sheet of the normalized two-teardrop near the contact: Y = v(X) for
// points 0..k with X increasing. Returns the last index and its X (rho0).
inline std::pair<std::size_t, double> sheet_extent(const DiscreteCurve<2>& base) {
  const std::size_t q = base.size() / 4;
  std::size_t k = 1;
  while (k < q && base[k + 1][0] > base[k][0]) ++k;
  return {k, base[k][0]};
}

inline DiscreteCurve<2> apply_planar(const DiscreteCurve<2>& base, double alpha, double rho) {
  const std::size_t n = base.size(), q = n / 4, half = n / 2;
  const auto [last, rho0] = sheet_extent(base);
  std::vector<double> X{0.0}, Y{0.0};
  for (std::size_t k = 1; k <= last; ++k) {
    X.push_back(base[k][0]);
    Y.push_back(base[k][1]);
  }
  const MonotoneCubic v(X, Y);
  auto vv = [&](double x) { return v(std::abs(x)); };
  std::vector<Vec2> pts = base.points;
  for (std::size_t k = 0; k <= q; ++k) {
    Vec2 z = base[k];
    if (k <= last && z[0] < rho) z[1] = blend_w(alpha, rho, vv, z[0], rho0);
    pts[k] = z;
  }
  for (std::size_t k = 0; k <= q; ++k) {
    const Vec2& z = pts[k];
    pts[half - k] = Vec2{z[0], -z[1]};
    pts[(half + k) % n] = -z;
    pts[(n - k) % n] = Vec2{-z[0], z[1]};
  }
  return DiscreteCurve<2>(std::move(pts), true);
}

inline DiscreteCurve<3> apply_spatial(const DiscreteCurve<2>& base, double alpha, double rho) {
  const std::size_t n = base.size(), half = n / 2, window = n / 8;
  const auto [T1, T2] = figure_eight_crossing_tangents();
  const double det = T1[0] * T2[1] - T1[1] * T2[0];
  auto oblique = [&](const Vec2& p) {
    return std::pair{(p[0] * T2[1] - p[1] * T2[0]) / det, (T1[0] * p[1] - T1[1] * p[0]) / det};
  };
  DiscreteCurve<3> out = lift(base);
  for (std::size_t off = 0; off <= 2 * window; ++off) {
    // branch through index 0: graph over the T1 axis, lifted up
    {
      const std::size_t i = (n + off - window) % n;
      const auto [a, b] = oblique(base[i]);
      const double psi = cutoff_psi(a / rho);
      if (psi > 0) {
        const Vec2 p = a * T1 + (1 - psi) * b * T2;
        out[i] = Vec3{p[0], p[1], rho * rho * psi * bump_u(alpha, a)};
      }
    }
    // branch through index n/2: graph over the T2 axis, pushed down
    {
      const std::size_t i = (half + off - window) % n;
      const auto [a, b] = oblique(base[i]);
      const double psi = cutoff_psi(b / rho);
      if (psi > 0) {
        const Vec2 p = (1 - psi) * a * T1 + b * T2;
        out[i] = Vec3{p[0], p[1], -rho * rho * psi * bump_u(alpha, b)};
      }
    }
  }
  return out;
}

template <std::size_t N, class Build>
PerturbedCurve<N> shrink_until_margin(const PerturbParams& p, double threshold, double L, double rho_max,
                                      const char* family,
                                      Build&& build) {
  if (!(p.alpha >= 0 && p.alpha <= 1)) throw std::invalid_argument("perturb: alpha must lie in [0,1]");
  if (p.rho && !(*p.rho > 0)) throw std::invalid_argument("perturb: rho must be positive");
  if (!(p.epsilon > 0)) throw std::invalid_argument("perturb: epsilon must be positive");
  const double rho_min = p.min_spacings_per_rho * L / double(p.n_points);
  PerturbedCurve<N> r;
  r.family = family;
  r.alpha = p.alpha;
  r.epsilon = p.epsilon;
  r.threshold = threshold;
  double rho = p.rho.value_or(0.05 * L);
  for (int halvings = 0;; ++halvings, rho /= 2) {
    if (rho < rho_min)
      throw std::runtime_error(std::string(family) + ": energy margin unachievable at n_points=" +
                               std::to_string(p.n_points) + " (rho would fall below " + std::to_string(rho_min) + ")");
    if (rho >= rho_max) continue;
    r.curve = build(rho);
    r.Bbar = energies(r.curve).Bbar;
    r.rho = rho;
    r.rho_halvings = halvings;
    if (r.Bbar <= threshold + p.epsilon) return r;
  }
}

}  // namespace detail

inline PerturbedCurve<2> eta_planar(const PerturbParams& p) {
  if (p.n_points % 4 != 0) throw std::invalid_argument("eta_planar: n_points must be a multiple of 4");
  const auto base = two_teardrop_normalized(p.n_points);
  const double rho0 = detail::sheet_extent(base).second;
  return detail::shrink_until_margin<2>(p, constant_C2T(), length(base), rho0, "planar_two_teardrop",
                                        [&](double rho) { return detail::apply_planar(base, p.alpha, rho); });
}

inline PerturbedCurve<3> eta_spatial(const PerturbParams& p) {
  if (p.n_points % 16 != 0) throw std::invalid_argument("eta_spatial: n_points must be a multiple of 16");
  const auto base = figure_eight_normalized(p.n_points);
  const double rho0 = 0.25 * length(base);
  return detail::shrink_until_margin<3>(p, constant_C8(), length(base), rho0, "spatial_figure_eight",
                                        [&](double rho) { return detail::apply_spatial(base, p.alpha, rho); });
}

template <std::size_t N>
double lambda_rescale_factor(const DiscreteCurve<N>& c, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda_rescale: lambda must be positive");
  const auto e = energies(c);
  if (!(e.B > 0 && e.L > 0)) throw std::domain_error("lambda_rescale: degenerate energies");
  return std::sqrt(e.B / (lambda * e.L));
}

template <std::size_t N>
DiscreteCurve<N> lambda_rescale(const DiscreteCurve<N>& c, double lambda) {
  return scaled(c, lambda_rescale_factor(c, lambda));
}

}  // namespace elastic
