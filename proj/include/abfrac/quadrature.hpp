#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <utility>
#include <vector>

namespace abfrac::quad {

namespace detail {

// 7-point Gauss / 15-point Kronrod pair (QUADPACK constants).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = kKronrodWeights[7] * f(c);
  double resg = kGaussWeights[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double fv = f(c - dx) + f(c + dx);
    resk += kKronrodWeights[i] * fv;
    if (i % 2 == 1) resg += kGaussWeights[i / 2] * fv;
  }
  return {resk * h, std::fabs(resk - resg) * h};
}

struct Segment {
  double a, b, value, err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]: the worst
/// segment is bisected until the summed error estimate drops below
/// max(abs_tol, rel_tol * |integral|) or the segment budget is exhausted.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-13,
                 double rel_tol = 5e-15, int max_segments = 4000) {
  if (!(b > a)) return 0.0;
  std::priority_queue<detail::Segment> heap;
  auto [v0, e0] = detail::gk15(f, a, b);
  heap.push({a, b, v0, e0});
  double total = v0, total_err = e0;
  int segments = 1;
  while (segments < max_segments &&
         total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
    detail::Segment s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) {  // interval at machine resolution
      s.err = 0.0;
      heap.push(s);
      continue;
    }
    auto [vl, el] = detail::gk15(f, s.a, mid);
    auto [vr, er] = detail::gk15(f, mid, s.b);
    total += vl + vr - s.value;
    total_err += el + er - s.err;
    heap.push({s.a, mid, vl, el});
    heap.push({mid, s.b, vr, er});
    ++segments;
  }
  return total;
}

}  // namespace abfrac::quad
