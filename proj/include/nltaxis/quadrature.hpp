#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace nltaxis::quad {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGL8Nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGL8Weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// Composite midpoint rule with m sub-intervals on [a, b].
template <class F>
double midpoint(F&& f, double a, double b, std::size_t m) {
  if (b <= a) return 0.0;
  const double d = (b - a) / static_cast<double>(m);
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) s += f(a + (static_cast<double>(k) + 0.5) * d);
  return s * d;
}

/// Composite 8-point Gauss-Legendre rule with `panels` panels on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b, std::size_t panels) {
  if (b <= a) return 0.0;
  const double w = (b - a) / static_cast<double>(panels);
  double s = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * w;
    double ps = 0.0;
    for (std::size_t k = 0; k < kGL8Nodes.size(); ++k)
      ps += kGL8Weights[k] * f(mid + 0.5 * w * kGL8Nodes[k]);
    s += 0.5 * w * ps;
  }
  return s;
}

}  // namespace nltaxis::quad
