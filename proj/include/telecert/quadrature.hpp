#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

namespace telecert {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::int64_t evaluations = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
struct G7K15 {
  static constexpr int kPoints = 8;
  // {abscissa, gauss weight (0 for Kronrod-only nodes), kronrod weight}
  static constexpr double kTable[kPoints][3] = {
      {0.000000000000000000, 0.417959183673469388, 0.209482141084727828},
      {0.405845151377397167, 0.381830050505118945, 0.190350578064785410},
      {0.741531185599394440, 0.279705391489276668, 0.140653259715525919},
      {0.949107912342758525, 0.129484966168869693, 0.063092092629978553},
      {0.207784955007898468, 0.0, 0.204432940075298892},
      {0.586087235467691130, 0.0, 0.169004726639267903},
      {0.864864423359769073, 0.0, 0.104790010322250184},
      {0.991455371120812639, 0.0, 0.022935322010529225},
  };
};

template <class F>
inline double g7k15(F&& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double g7 = G7K15::kTable[0][1] * f0;
  double k15 = G7K15::kTable[0][2] * f0;
  for (int i = 1; i < G7K15::kPoints; ++i) {
    const double dx = half * G7K15::kTable[i][0];
    const double fi = f(mid + dx) + f(mid - dx);
    g7 += G7K15::kTable[i][1] * fi;
    k15 += G7K15::kTable[i][2] * fi;
  }
  g7 *= half;
  k15 *= half;
  err = std::abs(k15 - g7);
  return k15;
}

struct Interval {
  double a, b, value, err;
  bool operator<(const Interval& o) const { return err < o.err; }
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b]. Splits the interval
/// with the largest local error estimate until the total estimate drops below
/// tol (or the interval budget runs out, which raises).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double tol,
                                    int max_intervals = 4000) {
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature tol must be > 0");
  QuadratureResult out;
  if (a == b) return out;

  std::priority_queue<detail::Interval> heap;
  double err0 = 0.0;
  const double v0 = detail::g7k15(f, a, b, err0);
  out.evaluations = 15;
  heap.push({a, b, v0, err0});
  double total_err = err0;
  int n_intervals = 1;

  while (total_err > tol) {
    if (n_intervals >= max_intervals)
      throw std::runtime_error("adaptive quadrature: interval budget exhausted");
    const detail::Interval worst = heap.top();
    heap.pop();
    total_err -= worst.err;
    const double mid = 0.5 * (worst.a + worst.b);
    double e1 = 0.0, e2 = 0.0;
    const double v1 = detail::g7k15(f, worst.a, mid, e1);
    const double v2 = detail::g7k15(f, mid, worst.b, e2);
    out.evaluations += 30;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
    total_err += e1 + e2;
    ++n_intervals;
  }

  // Reduce in a deterministic order (ascending left endpoint).
  std::vector<detail::Interval> parts;
  parts.reserve(n_intervals);
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(),
            [](const detail::Interval& x, const detail::Interval& y) {
              return x.a < y.a;
            });
  double sum = 0.0, comp = 0.0;
  for (const auto& p : parts) {
    const double y = p.value - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  out.value = sum;
  out.abs_error_estimate = total_err;
  return out;
}

}  // namespace telecert
