#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace telecert {

/// One sampled run of a box pair.
struct Outcome {
  int c0 = 0;
  int c1 = 0;
  int beta = +1;  // in {-1, +1}
};

/// The eight probabilities P(c0, c1, beta | a, b) for one setting pair.
struct OutcomeDistribution {
  std::array<double, 8> p{};

  static int index(int c0, int c1, int beta) {
    return (c0 << 2) | (c1 << 1) | (beta > 0 ? 1 : 0);
  }

  double& operator()(int c0, int c1, int beta) { return p[index(c0, c1, beta)]; }
  double operator()(int c0, int c1, int beta) const {
    return p[index(c0, c1, beta)];
  }

  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  /// P(c0, c1), beta marginalized out.
  double alice_marginal(int c0, int c1) const {
    return (*this)(c0, c1, -1) + (*this)(c0, c1, +1);
  }

  /// E[beta].
  double beta_mean() const {
    double m = 0.0;
    for (int c0 = 0; c0 < 2; ++c0)
      for (int c1 = 0; c1 < 2; ++c1)
        m += (*this)(c0, c1, +1) - (*this)(c0, c1, -1);
    return m;
  }

  bool is_normalized(double tol = 1e-12) const {
    for (double v : p)
      if (v < -tol) return false;
    return std::abs(sum() - 1.0) <= tol;
  }

  void validate(const char* what, double tol = 1e-12) const {
    if (!is_normalized(tol))
      throw std::runtime_error(std::string(what) +
                               ": distribution is not normalized");
  }
};

}  // namespace telecert
