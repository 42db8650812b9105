#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>

namespace elastic {

template <std::size_t N>
struct Vec {
  static_assert(N == 2 || N == 3, "only planar and spatial points");
  std::array<double, N> c{};

  constexpr Vec() = default;
  template <class... T>
    requires(sizeof...(T) == N && (std::is_arithmetic_v<T> && ...))
  constexpr Vec(T... v) : c{static_cast<double>(v)...} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator/(Vec a, double s) {
    for (auto& x : a.c) x /= s;
    return a;
  }
  friend constexpr bool operator==(const Vec&, const Vec&) = default;
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vec<N>& a) {
  if constexpr (N == 2) return std::hypot(a[0], a[1]);
  else return std::hypot(a[0], a[1], a[2]);
}

template <std::size_t N>
constexpr double norm2(const Vec<N>& a) { return dot(a, a); }

template <std::size_t N>
Vec<N> normalized(const Vec<N>& a) { return a / norm(a); }

constexpr double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// sine of the angle between the lines spanned by a and b
template <std::size_t N>
double sin_angle(const Vec<N>& a, const Vec<N>& b) {
  double s;
  if constexpr (N == 2) s = std::abs(cross(a, b));
  else s = norm(cross(a, b));
  return s / (norm(a) * norm(b));
}

template <std::size_t N>
using Mat = std::array<Vec<N>, N>;  // rows

template <std::size_t N>
constexpr Vec<N> operator*(const Mat<N>& m, const Vec<N>& v) {
  Vec<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = dot(m[i], v);
  return r;
}

template <std::size_t N>
constexpr Mat<N> identity() {
  Mat<N> m{};
  for (std::size_t i = 0; i < N; ++i) m[i][i] = 1.0;
  return m;
}

template <std::size_t N>
constexpr Mat<N> matmul(const Mat<N>& a, const Mat<N>& b) {
  Mat<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat<2> rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {Vec2{c, -s}, Vec2{s, c}};
}

// x -> A x + b with A orthogonal
template <std::size_t N>
struct RigidMotion {
  Mat<N> linear = identity<N>();
  Vec<N> translation{};

  RigidMotion() = default;
  RigidMotion(const Mat<N>& a, const Vec<N>& b, double tol = 1e-12) : linear(a), translation(b) {
    if (orthogonality_defect() > tol) throw std::invalid_argument("RigidMotion: matrix is not orthogonal");
  }

  Vec<N> operator()(const Vec<N>& x) const { return linear * x + translation; }
  Vec<N> apply_linear(const Vec<N>& x) const { return linear * x; }

  double determinant() const {
    const auto& a = linear;
    if constexpr (N == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    else return dot(a[0], cross(a[1], a[2]));
  }

  double orthogonality_defect() const {
    double worst = 0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < N; ++k) s += linear[k][i] * linear[k][j];
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    return worst;
  }

  // (this after other)
  RigidMotion compose(const RigidMotion& other) const {
    RigidMotion r;
    r.linear = matmul(linear, other.linear);
    r.translation = linear * other.translation + translation;
    return r;
  }
};

}  // namespace elastic
