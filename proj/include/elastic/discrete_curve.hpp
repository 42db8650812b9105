#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "vec.hpp"

namespace elastic {

template <std::size_t N>
struct DiscreteCurve {
  std::vector<Vec<N>> points;
  bool closed = true;

  DiscreteCurve() = default;
  DiscreteCurve(std::vector<Vec<N>> p, bool is_closed = true) : points(std::move(p)), closed(is_closed) {}

  std::size_t size() const { return points.size(); }
  std::size_t segment_count() const { return closed ? points.size() : points.size() - 1; }
  const Vec<N>& operator[](std::size_t i) const { return points[i]; }
  Vec<N>& operator[](std::size_t i) { return points[i]; }
  // end point of segment i
  std::size_t next(std::size_t i) const { return i + 1 == points.size() ? 0 : i + 1; }
  std::size_t prev(std::size_t i) const { return i == 0 ? points.size() - 1 : i - 1; }
};

using Curve2 = DiscreteCurve<2>;
using Curve3 = DiscreteCurve<3>;

inline constexpr std::size_t min_curve_points = 8;

template <std::size_t N>
void validate(const DiscreteCurve<N>& c) {
  if (c.size() < min_curve_points)
    throw std::invalid_argument("curve needs at least " + std::to_string(min_curve_points) + " points, got " +
                                std::to_string(c.size()));
  for (std::size_t i = 0; i < c.segment_count(); ++i) {
    const double h = norm(c[c.next(i)] - c[i]);
    if (!(h > 0) || !std::isfinite(h))
      throw std::invalid_argument("degenerate segment " + std::to_string(i));
  }
}

template <std::size_t N>
std::vector<double> segment_lengths(const DiscreteCurve<N>& c) {
  validate(c);
  std::vector<double> h(c.segment_count());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = norm(c[c.next(i)] - c[i]);
  return h;
}

template <std::size_t N>
double length(const DiscreteCurve<N>& c) {
  double sum = 0;
  for (double h : segment_lengths(c)) sum += h;
  return sum;
}

// dual lengths: half the sum of the adjacent segments
template <std::size_t N>
std::vector<double> arclength_elements(const DiscreteCurve<N>& c) {
  const auto h = segment_lengths(c);
  const std::size_t n = c.size();
  std::vector<double> ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = (c.closed || i > 0) ? h[c.prev(i)] : 0.0;
    const double right = (c.closed || i + 1 < n) ? h[i] : 0.0;
    ds[i] = (left + right) / 2;
  }
  return ds;
}

// Per-vertex discrete geometry. kappa_i = (t+ - t-)/ds_i with unit chord
// directions t-, t+; exact for polygons inscribed in circles.
// Open curves get zero curvature at the two end vertices.
template <std::size_t N>
struct VertexGeometry {
  std::vector<double> h;        // segment lengths
  std::vector<double> ds;       // dual lengths
  std::vector<Vec<N>> chord;    // unit chord direction of segment i
  std::vector<Vec<N>> tangent;  // unit vertex tangent, normalized t- + t+
  std::vector<Vec<N>> kappa;    // curvature vector
};

template <std::size_t N>
VertexGeometry<N> vertex_geometry(const DiscreteCurve<N>& c) {
  VertexGeometry<N> g;
  g.h = segment_lengths(c);
  const std::size_t n = c.size(), m = g.h.size();
  g.chord.resize(m);
  for (std::size_t i = 0; i < m; ++i) g.chord[i] = (c[c.next(i)] - c[i]) / g.h[i];
  g.ds.resize(n);
  g.tangent.resize(n);
  g.kappa.assign(n, Vec<N>{});
  for (std::size_t i = 0; i < n; ++i) {
    const bool interior = c.closed || (i > 0 && i + 1 < n);
    if (!interior) {
      const std::size_t seg = i == 0 ? 0 : m - 1;
      g.ds[i] = g.h[seg] / 2;
      g.tangent[i] = g.chord[seg];
      continue;
    }
    const std::size_t p = c.prev(i);
    g.ds[i] = (g.h[p] + g.h[i]) / 2;
    const Vec<N> sum = g.chord[p] + g.chord[i];
    const double sn = norm(sum);
    g.tangent[i] = sn > 0 ? sum / sn : g.chord[i];
    g.kappa[i] = (g.chord[i] - g.chord[p]) / g.ds[i];
  }
  return g;
}

template <std::size_t N>
std::vector<Vec<N>> curvature_vector(const DiscreteCurve<N>& c) {
  return vertex_geometry(c).kappa;
}

struct EnergyReport {
  double L = 0;         // length
  double B = 0;         // bending energy
  double Bbar = 0;      // L * B
  double lambda = 0;
  double E_lambda = 0;  // B + lambda L
};

template <std::size_t N>
EnergyReport energies(const DiscreteCurve<N>& c, double lambda = 0.0) {
  const auto g = vertex_geometry(c);
  EnergyReport r;
  for (double h : g.h) r.L += h;
  for (std::size_t i = 0; i < c.size(); ++i) r.B += norm2(g.kappa[i]) * g.ds[i];
  r.Bbar = r.L * r.B;
  r.lambda = lambda;
  r.E_lambda = r.B + lambda * r.L;
  return r;
}

struct RotationNumber {
  double raw = 0;
  long integer = 0;
};

inline RotationNumber rotation_number(const DiscreteCurve<2>& c) {
  if (!c.closed) throw std::invalid_argument("rotation_number: curve must be closed");
  validate(c);
  double total = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 a = c[i] - c[c.prev(i)];
    const Vec2 b = c[c.next(i)] - c[i];
    total += std::atan2(cross(a, b), dot(a, b));
  }
  RotationNumber r;
  r.raw = std::abs(total) / (2 * std::numbers::pi);
  r.integer = std::lround(r.raw);
  return r;
}

namespace detail {

template <std::size_t N>
std::vector<double> cumulative_length(const DiscreteCurve<N>& c) {
  const auto h = segment_lengths(c);
  std::vector<double> s(h.size() + 1, 0.0);
  for (std::size_t i = 0; i < h.size(); ++i) s[i + 1] = s[i] + h[i];
  return s;
}

// lo[i] multiplies x[i-1], up[i] multiplies x[i+1], indices cyclic.
// Sherman-Morrison around the Thomas algorithm; diagonally dominant input.
inline std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& lo, const std::vector<double>& di,
                                                    const std::vector<double>& up, std::vector<double> r) {
  const std::size_t m = di.size();
  const double alpha = up[m - 1], beta = lo[0], gamma = -di[0];
  std::vector<double> bb(di);
  bb[0] -= gamma;
  bb[m - 1] -= alpha * beta / gamma;
  auto thomas = [&](std::vector<double> d) {
    std::vector<double> cp(m);
    cp[0] = up[0] / bb[0];
    d[0] /= bb[0];
    for (std::size_t i = 1; i < m; ++i) {
      const double den = bb[i] - lo[i] * cp[i - 1];
      cp[i] = up[i] / den;
      d[i] = (d[i] - lo[i] * d[i - 1]) / den;
    }
    for (std::size_t i = m - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
    return d;
  };
  const auto x = thomas(std::move(r));
  std::vector<double> u(m, 0.0);
  u[0] = gamma;
  u[m - 1] = alpha;
  const auto z = thomas(std::move(u));
  const double f = (x[0] + beta * x[m - 1] / gamma) / (1 + z[0] + beta * z[m - 1] / gamma);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = x[i] - f * z[i];
  return out;
}

}  // namespace detail

// n points at equal arclength along the polygon, starting at point 0
template <std::size_t N>
DiscreteCurve<N> resample_uniform(const DiscreteCurve<N>& c, std::size_t n) {
  if (n < min_curve_points) throw std::invalid_argument("resample_uniform: n must be at least 8");
  const auto s = detail::cumulative_length(c);
  const double L = s.back();
  const double step = c.closed ? L / double(n) : L / double(n - 1);
  DiscreteCurve<N> out;
  out.closed = c.closed;
  out.points.reserve(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = k * step;
    while (seg + 1 < s.size() - 1 && s[seg + 1] <= target) ++seg;
    const double t = std::clamp((target - s[seg]) / (s[seg + 1] - s[seg]), 0.0, 1.0);
    const Vec<N>& a = c[seg];
    const Vec<N>& b = c[c.next(seg)];
    out.points.push_back(a + t * (b - a));
  }
  if (!c.closed) out.points.back() = c.points.back();
  return out;
}

// Periodic cubic spline through the vertices of a closed curve with
// chord-length knots, queried by spline arclength.
template <std::size_t N>
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const DiscreteCurve<N>& c) : c_(c) {
    if (!c.closed) throw std::invalid_argument("PeriodicSpline: closed curves only");
    h_ = segment_lengths(c);
    const std::size_t m = c.size();
    // h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = 6 (d_i - d_{i-1})
    std::vector<double> lo(m), di(m), up(m);
    std::vector<Vec<N>> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t p = c.prev(i);
      lo[i] = h_[p];
      di[i] = 2 * (h_[p] + h_[i]);
      up[i] = h_[i];
      rhs[i] = 6.0 * ((c[c.next(i)] - c[i]) / h_[i] - (c[i] - c[p]) / h_[p]);
    }
    M_.resize(m);
    for (std::size_t k = 0; k < N; ++k) {
      std::vector<double> r(m);
      for (std::size_t i = 0; i < m; ++i) r[i] = rhs[i][k];
      r = detail::solve_cyclic_tridiagonal(lo, di, up, std::move(r));
      for (std::size_t i = 0; i < m; ++i) M_[i][k] = r[i];
    }
    S_.assign(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) S_[i + 1] = S_[i] + arc(i, h_[i]);
  }

  double length() const { return S_.back(); }
  // spline arclength from vertex 0 to vertex i
  double knot_arclength(std::size_t i) const { return S_[i]; }

  Vec<N> point_at(double s) const {
    const std::size_t m = h_.size();
    s = std::clamp(s, 0.0, length());
    std::size_t seg = std::upper_bound(S_.begin(), S_.end(), s) - S_.begin();
    seg = seg == 0 ? 0 : std::min(seg - 1, m - 1);
    const double want = s - S_[seg];
    if (want <= 0) return c_[seg];
    double t = h_[seg] * want / (S_[seg + 1] - S_[seg]);
    for (int it = 0; it < 8; ++it) {
      const double dt = (arc(seg, t) - want) / norm(eval(seg, t, 1));
      t = std::clamp(t - dt, 0.0, h_[seg]);
      if (std::abs(dt) < 1e-15 * h_[seg]) break;
    }
    return eval(seg, t, 0);
  }

 private:
  Vec<N> eval(std::size_t i, double t, int deriv) const {
    const std::size_t j = c_.next(i);
    const double hi = h_[i], a = hi - t;
    const Vec<N>&p = c_[i], &q = c_[j];
    if (deriv == 0)
      return (M_[i] * (a * a * a) + M_[j] * (t * t * t)) / (6 * hi) + (p / hi - M_[i] * (hi / 6)) * a +
             (q / hi - M_[j] * (hi / 6)) * t;
    return (M_[j] * (t * t) - M_[i] * (a * a)) / (2 * hi) + (q - p) / hi - (M_[j] - M_[i]) * (hi / 6);
  }

  // 5-point Gauss-Legendre arclength of segment i from 0 to t
  double arc(std::size_t i, double t) const {
    static constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
    static constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    double s = 0;
    for (int q = 0; q < 5; ++q) s += gw[q] * norm(eval(i, t * (gx[q] + 1) / 2, 1));
    return s * t / 2;
  }

  const DiscreteCurve<N>& c_;
  std::vector<double> h_;
  std::vector<Vec<N>> M_;
  std::vector<double> S_;
};

// Closed curves: n points at equal spline arclength, starting at point 0.
// With split > 0, old point `split` becomes new point n/2 and the two
// arcs are sampled separately.
template <std::size_t N>
DiscreteCurve<N> resample_spline(const DiscreteCurve<N>& c, std::size_t n, std::size_t split = 0) {
  if (n < min_curve_points) throw std::invalid_argument("resample_spline: n must be at least 8");
  const PeriodicSpline<N> sp(c);
  DiscreteCurve<N> out;
  out.points.reserve(n);
  if (split == 0) {
    for (std::size_t k = 0; k < n; ++k) out.points.push_back(k == 0 ? c[0] : sp.point_at(sp.length() * k / n));
    return out;
  }
  if (n % 2) throw std::invalid_argument("resample_spline: split needs even n");
  const double s_mid = sp.knot_arclength(split), L = sp.length(), half = double(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) out.points.push_back(k == 0 ? c[0] : sp.point_at(s_mid * k / half));
  for (std::size_t k = 0; k < n / 2; ++k)
    out.points.push_back(k == 0 ? c[split] : sp.point_at(s_mid + (L - s_mid) * k / half));
  return out;
}

template <std::size_t N>
DiscreteCurve<N> scaled(const DiscreteCurve<N>& c, double s, const Vec<N>& center = Vec<N>{}) {
  DiscreteCurve<N> out = c;
  for (auto& p : out.points) p = center + s * (p - center);
  return out;
}

template <std::size_t N>
DiscreteCurve<N> transformed(const DiscreteCurve<N>& c, const RigidMotion<N>& g) {
  DiscreteCurve<N> out = c;
  for (auto& p : out.points) p = g(p);
  return out;
}

template <std::size_t N>
Vec<N> centroid(const DiscreteCurve<N>& c) {
  Vec<N> s{};
  for (const auto& p : c.points) s += p;
  return s / double(c.size());
}

inline DiscreteCurve<3> lift(const DiscreteCurve<2>& c) {
  DiscreteCurve<3> out;
  out.closed = c.closed;
  for (const auto& p : c.points) out.points.push_back(Vec3{p[0], p[1], 0.0});
  return out;
}

}  // namespace elastic
