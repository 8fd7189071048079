#include "telecert/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "telecert/certify.hpp"
#include "telecert/protocols.hpp"

namespace telecert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = 1.4142135623730951;

// Integration window for one of the three congruent boundary arcs.
constexpr double kPhiLo = kPi / 3.0;
constexpr double kPhiHi = kPi;

}  // namespace

double gisin_boundary_polar(double phi, ArctanBranch branch) {
  const double c = std::cos(phi + kPi / 3.0);
  const double u = std::atan(kSqrt2 / c);
  if (branch == ArctanBranch::Principal) return u;
  // A polar angle must be continuous and stay inside (0, pi); the principal
  // value flips sign with cos, so fold it back into the upper branch.
  return c < 0.0 ? u + kPi : u;
}

QuadratureResult gisin_sector_area_quadrature(double tol,
                                              ArctanBranch branch) {
  auto integrand = [branch](double phi) {
    const double u = gisin_boundary_polar(phi, branch);
    return 1.0 + std::cos(u);
  };
  QuadratureResult r = integrate_adaptive(integrand, kPhiLo, kPhiHi, tol);
  r.value *= 3.0;
  r.abs_error_estimate *= 3.0;
  return r;
}

QuadratureResult gisin_fidelity_quadrature(double tol, ArctanBranch branch) {
  // Sector average of (1 + t00.a)/2 in the frame aligned with the sector
  // center. Solid-angle piece: inner integral of sin(theta) is 1 + cos(u)
  // over this window's parameterization; moment piece: inner integral of
  // cos(theta) sin(theta) is sin(u)^2 / 2.
  auto integrand = [branch](double phi) {
    const double u = gisin_boundary_polar(phi, branch);
    const double s = std::sin(u);
    return 0.5 * (1.0 + std::cos(u)) + 0.25 * s * s;
  };
  QuadratureResult r = integrate_adaptive(integrand, kPhiLo, kPhiHi, tol);
  r.value *= 3.0 / kPi;
  r.abs_error_estimate *= 3.0 / kPi;
  return r;
}

CapFidelity pcrit_cap_fidelity(double tol) {
  CapFidelity out;
  out.closed_form = 0.5 * (1.0 + kPi / (8.0 * (kSqrt2 - 1.0)));

  // Defining ratio over the upper cap theta in [0, pi/4): the capped image of
  // (sin t cos p, sin t sin p, cos t) is (cos p, sin p, 1)/sqrt2, so the
  // overlap is (sin t + cos t)/sqrt2 and the azimuth integrals cancel.
  auto numerator = [](double theta) {
    return (std::sin(theta) + std::cos(theta)) / kSqrt2 * std::sin(theta);
  };
  auto denominator = [](double theta) { return std::sin(theta); };
  const QuadratureResult num =
      integrate_adaptive(numerator, 0.0, kPi / 4.0, tol);
  const QuadratureResult den =
      integrate_adaptive(denominator, 0.0, kPi / 4.0, tol);
  out.quadrature.value = 0.5 + 0.5 * num.value / den.value;
  out.quadrature.abs_error_estimate =
      (num.abs_error_estimate + den.abs_error_estimate) / den.value;
  out.quadrature.evaluations = num.evaluations + den.evaluations;
  return out;
}

double pcrit_cap_sphere_fraction() { return 3.0 * (1.0 - 1.0 / kSqrt2); }

double pcrit_total_fidelity() {
  const double frac = pcrit_cap_sphere_fraction();
  const double cap = pcrit_cap_fidelity().closed_form;
  return frac * cap + (1.0 - frac);
}

LambdaThreshold lambda_threshold() {
  LambdaThreshold t;
  t.lambda_crit = 1.0 / kSqrt2;
  t.fidelity_crit = 0.5 * (1.0 + 1.0 / kSqrt2);

  // Bisect |CHSH(ideal lambda, canonical)| - 2 on [0, 1].
  const ChshSettings canonical = ChshSettings::canonical();
  auto excess = [&](double lambda) {
    return std::abs(chsh(Protocol::ideal(lambda), canonical).value) - 2.0;
  };
  double lo = 0.0, hi = 1.0;
  if (excess(lo) > 0.0 || excess(hi) < 0.0)
    throw std::runtime_error("bisection bracket lost for the CHSH threshold");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  t.bisection_root = 0.5 * (lo + hi);
  return t;
}

}  // namespace telecert
