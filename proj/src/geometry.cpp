#include "telecert/geometry.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace telecert {

namespace {

std::array<PauliRotation, 4> build_rotations() {
  std::array<PauliRotation, 4> r;
  r[0] = {0, 0, Vec3(1, 1, 1).asDiagonal()};
  r[1] = {0, 1, Vec3(1, -1, -1).asDiagonal()};
  r[2] = {1, 0, Vec3(-1, 1, -1).asDiagonal()};
  r[3] = {1, 1, Vec3(-1, -1, 1).asDiagonal()};
  return r;
}

std::array<Vec3, 4> build_centers() {
  const Vec3 t00 = Vec3(1, 1, 1) / std::sqrt(3.0);
  std::array<Vec3, 4> t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      t[2 * i + j] = rotation_matrix(i, j) * t00;
  return t;
}

int bit_index(int c0, int c1, const char* what) {
  if ((c0 & ~1) || (c1 & ~1))
    throw std::invalid_argument(std::string(what) + ": bits must be 0 or 1");
  return 2 * c0 + c1;
}

}  // namespace

const PauliRotation& rotation(int c0, int c1) {
  static const std::array<PauliRotation, 4> table = build_rotations();
  return table[bit_index(c0, c1, "rotation")];
}

const Mat3& rotation_matrix(int c0, int c1) { return rotation(c0, c1).matrix; }

Vec3 apply_rotation(const PauliRotation& r, const Vec3& v) {
  return r.matrix * v;
}

Vec3 apply_rotation(const Mat3& r, const Vec3& v) { return r * v; }

bool is_unit(const Vec3& v, double tol) {
  return std::abs(v.norm() - 1.0) <= tol;
}

Vec3 make_bloch(const Vec3& v, double tol) {
  const double n = v.norm();
  if (std::abs(n - 1.0) > tol)
    throw std::invalid_argument("vector is not unit norm (|v| = " +
                                std::to_string(n) + ")");
  return v / n;
}

Vec3 make_bloch(double x, double y, double z, double tol) {
  return make_bloch(Vec3(x, y, z), tol);
}

void require_unit(const Vec3& v, const char* what, double tol) {
  if (!is_unit(v, tol))
    throw std::invalid_argument(std::string(what) +
                                " must be a unit vector");
}

const Vec3& tetra_center(int i, int j) {
  static const std::array<Vec3, 4> table = build_centers();
  return table[bit_index(i, j, "tetra_center")];
}

Sector sector_of(const Vec3& a) {
  Sector best{0, 0, tetra_center(0, 0)};
  double best_dot = a.dot(best.center);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (i == 0 && j == 0) continue;
      const Vec3& t = tetra_center(i, j);
      const double d = a.dot(t);
      if (d > best_dot) {
        best = {i, j, t};
        best_dot = d;
      }
    }
  }
  return best;
}

Vec3 sample_uniform_sphere(RngState& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Mat3 random_rotation_matrix(RngState& rng) {
  // Shoemake's uniform unit quaternion.
  const double u1 = rng.uniform();
  const double u2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double u3 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s1 = std::sqrt(1.0 - u1);
  const double s2 = std::sqrt(u1);
  const Eigen::Quaterniond q(s2 * std::cos(u3),  // w
                             s1 * std::sin(u2), s1 * std::cos(u2),
                             s2 * std::sin(u3));
  return q.toRotationMatrix();
}

}  // namespace telecert
