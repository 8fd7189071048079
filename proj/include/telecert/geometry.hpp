#pragma once

#include <Eigen/Dense>

#include "telecert/rng.hpp"

namespace telecert {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit-norm tolerance for vectors accepted as Bloch vectors.
inline constexpr double kUnitNormTol = 1e-12;

/// One of the four teleportation corrections: the identity or a rotation by
/// pi about x, y or z. Each matrix is diagonal with entries in {-1, 0, +1},
/// symmetric and its own inverse.
struct PauliRotation {
  int c0 = 0;
  int c1 = 0;
  Mat3 matrix = Mat3::Identity();
};

/// Quarter of the Bloch sphere centered on a tetrahedron direction.
struct Sector {
  int i = 0;
  int j = 0;
  Vec3 center = Vec3::Zero();
};

const PauliRotation& rotation(int c0, int c1);
const Mat3& rotation_matrix(int c0, int c1);

Vec3 apply_rotation(const PauliRotation& r, const Vec3& v);
Vec3 apply_rotation(const Mat3& r, const Vec3& v);

bool is_unit(const Vec3& v, double tol = kUnitNormTol);

/// Validates |v| = 1 within tol and returns the renormalized vector;
/// rejects anything farther from the sphere.
Vec3 make_bloch(double x, double y, double z, double tol = kUnitNormTol);
Vec3 make_bloch(const Vec3& v, double tol = kUnitNormTol);
void require_unit(const Vec3& v, const char* what, double tol = kUnitNormTol);

/// Tetrahedron centers t_ij = R_ij t_00, t_00 = (1,1,1)/sqrt(3).
const Vec3& tetra_center(int i, int j);

/// Voronoi sector of `a` under the dot-product metric (argmax a.t_ij);
/// boundary ties resolve to the lexicographically lowest (i, j).
Sector sector_of(const Vec3& a);

/// Uniform point on S^2: z uniform on [-1,1], azimuth uniform on [0,2pi).
Vec3 sample_uniform_sphere(RngState& rng);

/// Haar-uniform rotation from a uniform unit quaternion.
Mat3 random_rotation_matrix(RngState& rng);

}  // namespace telecert
