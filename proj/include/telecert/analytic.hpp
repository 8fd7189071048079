#pragma once

#include "telecert/quadrature.hpp"

namespace telecert {

/// Branch choice for the sector-boundary polar angle. SectorBoundary keeps
/// the angle a continuous polar coordinate in (pi/2, pi) over the integration
/// window; Principal takes the raw arctangent and exists only to demonstrate
/// how the fidelity integral degrades under the wrong branch.
enum class ArctanBranch { SectorBoundary, Principal };

/// u(phi) = arctan(sqrt(2) / cos(phi + pi/3)) with the chosen branch.
double gisin_boundary_polar(double phi,
                            ArctanBranch branch = ArctanBranch::SectorBoundary);

/// Sector solid angle computed from the boundary curve; equals pi (a quarter
/// of the sphere) when the branch is right.
QuadratureResult gisin_sector_area_quadrature(
    double tol, ArctanBranch branch = ArctanBranch::SectorBoundary);

/// Average fidelity of the sector-communication model by adaptive quadrature
/// of the sector integral (area and first-moment pieces together); the
/// inner polar integrals are reduced in closed form. Approximately 0.8724.
QuadratureResult gisin_fidelity_quadrature(
    double tol, ArctanBranch branch = ArctanBranch::SectorBoundary);

struct CapFidelity {
  double closed_form = 0.0;  // (1/2)[1 + pi / (8 (sqrt2 - 1))]
  QuadratureResult quadrature;  // defining ratio of cap integrals
};

/// Average fidelity over inputs inside one polar cap (|a_z| > 1/sqrt2) under
/// the component-capping map, both as the closed form and as the defining
/// ratio of integrals. Approximately 0.97403.
CapFidelity pcrit_cap_fidelity(double tol = 1e-9);

/// Fraction of the sphere covered by the six caps, 3 (1 - 1/sqrt2).
double pcrit_cap_sphere_fraction();

/// Whole-sphere fidelity of the capping protocol: caps at the cap fidelity,
/// everything else perfect. Approximately 0.97718.
double pcrit_total_fidelity();

struct LambdaThreshold {
  double lambda_crit = 0.0;    // 1/sqrt2
  double fidelity_crit = 0.0;  // (1 + 1/sqrt2)/2
  double bisection_root = 0.0; // root of |CHSH(lambda)| = 2 on the canonical settings
};

/// Critical shrink factor for a CHSH violation and the matching fidelity,
/// cross-checked by bisection against the CHSH evaluator.
LambdaThreshold lambda_threshold();

}  // namespace telecert
