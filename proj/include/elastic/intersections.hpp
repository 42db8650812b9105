#pragma once

// Self-intersections of polygonal curves. A contact is a pair of
// non-adjacent segments that cross (2D, exact orientation tests) or come
// within prox_tol of each other. Contacts are clustered into points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "discrete_curve.hpp"

namespace elastic {

struct IntersectionOptions {
  std::optional<double> prox_tol;  // unset: 1e-4 * length
  double angle_tol = 0.05;         // radians
};

inline constexpr double default_prox_tol_factor = 1e-4;

template <std::size_t N>
struct Contact {
  std::size_t i = 0, j = 0;  // segments, i < j
  double si = 0, sj = 0;     // positions on the segments in [0,1]
  Vec<N> point{};
  double distance = 0;
  bool crossing = false;
  bool tangential = false;
  double sin_angle = 0;    // between interpolated tangents
  double tangent_dot = 0;  // -1 for antipodal tangents
};

template <std::size_t N>
struct IntersectionPoint {
  Vec<N> point{};
  double x1 = 0, x2 = 0;  // fractional vertex index on each branch
  bool tangential = false;
  int multiplicity = 0;
  double sin_angle = 0;
  double tangent_dot = 0;
  std::size_t contacts = 0;
};

template <std::size_t N>
struct IntersectionReport {
  std::vector<IntersectionPoint<N>> points;
  std::vector<Contact<N>> contacts;
  double prox_tol = 0;
  double angle_tol = 0;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  std::size_t tangential_count() const {
    return std::count_if(points.begin(), points.end(), [](const auto& p) { return p.tangential; });
  }
};

namespace detail {

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

// closest points of segments p0p1 and q0q1, returns parameters (s, t)
template <std::size_t N>
std::pair<double, double> closest_parameters(const Vec<N>& p0, const Vec<N>& p1, const Vec<N>& q0,
                                             const Vec<N>& q1) {
  const Vec<N> d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  const double c = dot(d1, r), b = dot(d1, d2);
  const double den = a * e - b * b;
  double s = den > 1e-300 * a * e ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
  double t = (b * s + f) / e;
  if (t < 0) {
    t = 0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1) {
    t = 1;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return {s, t};
}

inline bool segments_cross(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1) {
  const double o1 = orient(p0, p1, q0), o2 = orient(p0, p1, q1);
  const double o3 = orient(q0, q1, p0), o4 = orient(q0, q1, p1);
  if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
    // collinear: overlap of projections on the dominant axis
    const int k = std::abs(p1[0] - p0[0]) >= std::abs(p1[1] - p0[1]) ? 0 : 1;
    const double a0 = std::min(p0[k], p1[k]), a1 = std::max(p0[k], p1[k]);
    const double b0 = std::min(q0[k], q1[k]), b1 = std::max(q0[k], q1[k]);
    return a0 <= b1 && b0 <= a1;
  }
  return ((o1 <= 0 && o2 >= 0) || (o1 >= 0 && o2 <= 0)) && ((o3 <= 0 && o4 >= 0) || (o3 >= 0 && o4 <= 0));
}

template <std::size_t N>
struct SegmentContext {
  const DiscreteCurve<N>& c;
  std::vector<Vec<N>> tangent;  // vertex tangents
  std::vector<double> S;        // cumulative length
  double L = 0;
  double prox_tol = 0;
  double sin_tol = 0;

  SegmentContext(const DiscreteCurve<N>& curve, const IntersectionOptions& opt) : c(curve) {
    const auto g = vertex_geometry(curve);
    tangent = g.tangent;
    S.assign(g.h.size() + 1, 0.0);
    for (std::size_t i = 0; i < g.h.size(); ++i) S[i + 1] = S[i] + g.h[i];
    L = S.back();
    prox_tol = opt.prox_tol.value_or(default_prox_tol_factor * L);
    if (prox_tol < 0) throw std::invalid_argument("self_intersections: prox_tol must be non-negative");
    sin_tol = std::sin(opt.angle_tol);
  }

  bool adjacent(std::size_t i, std::size_t j) const {
    if (i == j) return true;
    if (c.closed) return c.next(i) == j || c.next(j) == i;
    return (i > j ? i - j : j - i) == 1;
  }

  // length of curve strictly between segments i < j, along the shorter way
  double gap(std::size_t i, std::size_t j) const {
    const double forward = S[j] - S[i + 1];
    if (!c.closed) return forward;
    return std::min(forward, L - (S[j + 1] - S[i]));
  }

  Vec<N> tangent_at(std::size_t seg, double s) const {
    const Vec<N> t = (1 - s) * tangent[seg] + s * tangent[c.next(seg)];
    const double n = norm(t);
    return n > 0 ? t / n : tangent[seg];
  }
};

// contact test for one unordered pair, i < j; identical for every caller
template <std::size_t N>
std::optional<Contact<N>> segment_contact(const SegmentContext<N>& ctx, std::size_t i, std::size_t j) {
  if (ctx.adjacent(i, j)) return std::nullopt;
  const auto& c = ctx.c;
  const Vec<N>&p0 = c[i], &p1 = c[c.next(i)], &q0 = c[j], &q1 = c[c.next(j)];
  Contact<N> k;
  k.i = i;
  k.j = j;
  if constexpr (N == 2) k.crossing = segments_cross(p0, p1, q0, q1);
  if (!k.crossing) {
    if (ctx.prox_tol <= 0 && N == 2) return std::nullopt;
    auto [s, t] = closest_parameters(p0, p1, q0, q1);
    const Vec<N> a = p0 + s * (p1 - p0), b = q0 + t * (q1 - q0);
    k.distance = norm(a - b);
    if (k.distance > ctx.prox_tol) return std::nullopt;
    if constexpr (N == 3) k.crossing = k.distance == 0;
    // neighbours along the curve are not contacts
    if (!k.crossing && ctx.gap(i, j) <= 2 * ctx.prox_tol) return std::nullopt;
    k.si = s;
    k.sj = t;
    k.point = (a + b) / 2.0;
  } else {
    const Vec<N> d1 = p1 - p0, d2 = q1 - q0;
    double den = 0;
    if constexpr (N == 2) den = cross(d1, d2);
    if constexpr (N == 2) {
      if (den != 0) {
        k.si = std::clamp(cross(q0 - p0, d2) / den, 0.0, 1.0);
        k.sj = std::clamp(cross(q0 - p0, d1) / den, 0.0, 1.0);
      }
    }
    if (den == 0) {
      auto [s, t] = closest_parameters(p0, p1, q0, q1);
      k.si = s;
      k.sj = t;
    }
    k.point = (p0 + k.si * d1 + q0 + k.sj * d2) / 2.0;
  }
  const Vec<N> ti = ctx.tangent_at(i, k.si), tj = ctx.tangent_at(j, k.sj);
  k.sin_angle = sin_angle(ti, tj);
  k.tangent_dot = dot(ti, tj);
  k.tangential = k.sin_angle < ctx.sin_tol;
  return k;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

template <std::size_t N>
struct CellKey {
  std::array<std::int64_t, N> k;
  bool operator==(const CellKey&) const = default;
};

template <std::size_t N>
struct CellHash {
  std::size_t operator()(const CellKey<N>& key) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : key.k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

// candidate pairs whose boxes, inflated by pad, share a grid cell
template <std::size_t N, class Fn>
void for_each_candidate(const std::vector<std::array<Vec<N>, 2>>& boxes, double cell, Fn&& fn) {
  using Key = CellKey<N>;
  std::unordered_map<Key, std::vector<std::size_t>, CellHash<N>> grid;
  std::vector<std::array<std::array<std::int64_t, N>, 2>> range(boxes.size());
  for (std::size_t s = 0; s < boxes.size(); ++s) {
    for (std::size_t d = 0; d < N; ++d) {
      range[s][0][d] = static_cast<std::int64_t>(std::floor(boxes[s][0][d] / cell));
      range[s][1][d] = static_cast<std::int64_t>(std::floor(boxes[s][1][d] / cell));
    }
    Key key;
    key.k = range[s][0];
    while (true) {
      grid[key].push_back(s);
      std::size_t d = 0;
      for (; d < N; ++d) {
        if (key.k[d] < range[s][1][d]) {
          ++key.k[d];
          break;
        }
        key.k[d] = range[s][0][d];
      }
      if (d == N) break;
    }
  }
  for (const auto& [key, list] : grid) {
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        const std::size_t u = list[a], v = list[b];
        // visit each pair once: in the lowest cell of the overlap of their ranges
        bool owner = true;
        for (std::size_t d = 0; d < N && owner; ++d)
          owner = key.k[d] == std::max(range[u][0][d], range[v][0][d]);
        if (owner) fn(std::min(u, v), std::max(u, v));
      }
  }
}

template <std::size_t N>
IntersectionReport<N> cluster_contacts(const SegmentContext<N>& ctx, std::vector<Contact<N>> contacts) {
  std::sort(contacts.begin(), contacts.end(),
            [](const auto& a, const auto& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  IntersectionReport<N> rep;
  rep.prox_tol = ctx.prox_tol;
  rep.angle_tol = std::asin(std::min(1.0, ctx.sin_tol));
  const std::size_t k = contacts.size();
  UnionFind uf(k);

  // spatial single linkage at 2 prox_tol (plus rounding slack)
  const double radius = 2 * ctx.prox_tol + 1e-12 * ctx.L;
  {
    std::unordered_map<CellKey<N>, std::vector<std::size_t>, CellHash<N>> grid;
    auto key_of = [&](const Vec<N>& p) {
      CellKey<N> key;
      for (std::size_t d = 0; d < N; ++d) key.k[d] = static_cast<std::int64_t>(std::floor(p[d] / radius));
      return key;
    };
    for (std::size_t a = 0; a < k; ++a) grid[key_of(contacts[a].point)].push_back(a);
    for (std::size_t a = 0; a < k; ++a) {
      const auto base = key_of(contacts[a].point);
      std::array<int, N> off;
      off.fill(-1);
      while (true) {
        CellKey<N> key = base;
        for (std::size_t d = 0; d < N; ++d) key.k[d] += off[d];
        if (auto it = grid.find(key); it != grid.end())
          for (std::size_t b : it->second)
            if (b > a && norm(contacts[a].point - contacts[b].point) <= radius) uf.unite(a, b);
        std::size_t d = 0;
        for (; d < N; ++d) {
          if (off[d] < 1) {
            ++off[d];
            break;
          }
          off[d] = -1;
        }
        if (d == N) break;
      }
    }
  }
  // proximity contacts in neighbouring segment pairs form one band
  {
    std::unordered_map<std::uint64_t, std::size_t> index;
    const std::uint64_t n = ctx.c.size();
    auto pack = [&](std::size_t i, std::size_t j) { return std::uint64_t(std::min(i, j)) * n + std::max(i, j); };
    for (std::size_t a = 0; a < k; ++a)
      if (!contacts[a].crossing) index[pack(contacts[a].i, contacts[a].j)] = a;
    auto shift = [&](std::size_t i, int d) -> std::optional<std::size_t> {
      if (ctx.c.closed) return (i + n + d) % n;
      if ((d < 0 && i == 0) || (d > 0 && i + 1 >= ctx.c.segment_count())) return std::nullopt;
      return i + d;
    };
    for (std::size_t a = 0; a < k; ++a) {
      if (contacts[a].crossing) continue;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          auto i2 = shift(contacts[a].i, di), j2 = shift(contacts[a].j, dj);
          if (!i2 || !j2 || *i2 == *j2) continue;
          if (auto it = index.find(pack(*i2, *j2)); it != index.end()) uf.unite(a, it->second);
        }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < k; ++a) groups[uf.find(a)].push_back(a);
  std::vector<std::vector<std::size_t>> ordered;
  for (auto& [root, members] : groups) ordered.push_back(std::move(members));
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  const std::size_t nseg = ctx.c.segment_count();
  for (const auto& members : ordered) {
    std::size_t best = members.front();
    for (std::size_t a : members)
      if (contacts[a].distance < contacts[best].distance) best = a;
    const auto& r = contacts[best];
    std::vector<std::size_t> segs;
    for (std::size_t a : members) {
      segs.push_back(contacts[a].i);
      segs.push_back(contacts[a].j);
    }
    std::sort(segs.begin(), segs.end());
    segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
    int runs = 1;
    for (std::size_t t = 1; t < segs.size(); ++t)
      if (segs[t] - segs[t - 1] > 1) ++runs;
    if (ctx.c.closed && runs > 1 && segs.front() == 0 && segs.back() == nseg - 1) --runs;

    IntersectionPoint<N> p;
    p.point = r.point;
    p.x1 = double(r.i) + r.si;
    p.x2 = double(r.j) + r.sj;
    p.tangential = r.tangential;
    p.multiplicity = std::max(runs, 2);
    p.sin_angle = r.sin_angle;
    p.tangent_dot = r.tangent_dot;
    p.contacts = members.size();
    rep.points.push_back(p);
  }
  rep.contacts = std::move(contacts);
  return rep;
}

}  // namespace detail

template <std::size_t N>
IntersectionReport<N> self_intersections(const DiscreteCurve<N>& c, const IntersectionOptions& opt = {}) {
  const detail::SegmentContext<N> ctx(c, opt);
  const std::size_t m = c.segment_count();
  const double pad = ctx.prox_tol / 2;
  std::vector<std::array<Vec<N>, 2>> boxes(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec<N>&a = c[i], &b = c[c.next(i)];
    for (std::size_t d = 0; d < N; ++d) {
      boxes[i][0][d] = std::min(a[d], b[d]) - pad;
      boxes[i][1][d] = std::max(a[d], b[d]) + pad;
    }
  }
  const double cell = std::max(ctx.L / double(m), ctx.prox_tol) * 2;
  std::vector<Contact<N>> contacts;
  detail::for_each_candidate<N>(boxes, cell, [&](std::size_t i, std::size_t j) {
    if (auto k = detail::segment_contact(ctx, i, j)) contacts.push_back(*k);
  });
  return detail::cluster_contacts(ctx, std::move(contacts));
}

// All-pairs variant; used as a reference and for tiny curves.
template <std::size_t N>
IntersectionReport<N> self_intersections_all_pairs(const DiscreteCurve<N>& c, const IntersectionOptions& opt = {}) {
  const detail::SegmentContext<N> ctx(c, opt);
  std::vector<Contact<N>> contacts;
  for (std::size_t i = 0; i < c.segment_count(); ++i)
    for (std::size_t j = i + 1; j < c.segment_count(); ++j)
      if (auto k = detail::segment_contact(ctx, i, j)) contacts.push_back(*k);
  return detail::cluster_contacts(ctx, std::move(contacts));
}

// Smallest distance between two segments that are far apart along the
// curve: pairs count only when their distance is at most half the length
// of curve between them.
template <std::size_t N>
double min_self_distance(const DiscreteCurve<N>& c) {
  const detail::SegmentContext<N> ctx(c, IntersectionOptions{0.0, 0.05});
  const std::size_t m = c.segment_count();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 2; j < m; ++j) {
      if (ctx.adjacent(i, j)) continue;
      const Vec<N>&p0 = c[i], &p1 = c[c.next(i)], &q0 = c[j], &q1 = c[c.next(j)];
      auto [s, t] = detail::closest_parameters(p0, p1, q0, q1);
      double d = norm(p0 + s * (p1 - p0) - q0 - t * (q1 - q0));
      if constexpr (N == 2)
        if (detail::segments_cross(p0, p1, q0, q1)) d = 0;
      if (d < best && d <= ctx.gap(i, j) / 2) best = d;
    }
  return best;
}

}  // namespace elastic
