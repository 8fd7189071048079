#include "telecert/geometry.hpp"

#include <array>
#include <cmath>

#include "test_util.hpp"

using namespace telecert;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("the four rotations are the stated diagonal matrices") {
  CHECK(rotation_matrix(0, 0).isApprox(Mat3::Identity(), 0.0));
  CHECK(rotation_matrix(0, 1).isApprox(
      Mat3(Vec3(1, -1, -1).asDiagonal()), 0.0));
  CHECK(rotation_matrix(1, 0).isApprox(
      Mat3(Vec3(-1, 1, -1).asDiagonal()), 0.0));
  CHECK(rotation_matrix(1, 1).isApprox(
      Mat3(Vec3(-1, -1, 1).asDiagonal()), 0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Mat3& r = rotation_matrix(i, j);
      CHECK((r * r).isApprox(Mat3::Identity(), 0.0));  // own inverse
      CHECK(r.isApprox(r.transpose(), 0.0));           // symmetric
    }
  CHECK_THROWS(rotation(2, 0));
}

TEST_CASE("rotation group closure, entrywise exact") {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const Mat3 prod = rotation_matrix(i, j) * rotation_matrix(k, l);
          const Mat3& expect = rotation_matrix(i ^ k, j ^ l);
          CHECK((prod - expect).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("apply_rotation on axis vectors") {
  CHECK((apply_rotation(rotation(0, 1), Vec3(0, 0, 1)) - Vec3(0, 0, -1))
            .norm() == 0.0);
  RngState rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = sample_uniform_sphere(rng);
    CHECK((apply_rotation(rotation(0, 0), v) - v).norm() == 0.0);
  }
}

TEST_CASE("compensation identity (Rv).b = v.(Rb)") {
  RngState rng(12);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 v = sample_uniform_sphere(rng);
    const Vec3 b = sample_uniform_sphere(rng);
    const Mat3& r = rotation_matrix((i >> 1) & 1, i & 1);
    worst = std::max(worst, std::abs((r * v).dot(b) - v.dot(r * b)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("make_bloch renormalizes within tolerance and rejects beyond") {
  const Vec3 v = make_bloch(1.0 + 5e-13, 0, 0);
  CHECK(tt::near(v.norm(), 1.0, 1e-15));
  CHECK_THROWS(make_bloch(1.0 + 1e-6, 0, 0));
  CHECK_THROWS(make_bloch(0, 0, 0));
}

TEST_CASE("tetra centers: t00 and the rotated copies, exact") {
  const double s = 1.0 / std::sqrt(3.0);
  CHECK((tetra_center(0, 0) - Vec3(s, s, s)).norm() == 0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec3 expect = rotation_matrix(i, j) * tetra_center(0, 0);
      CHECK((tetra_center(i, j) - expect).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(tt::near(tetra_center(i, j).norm(), 1.0, 1e-15));
    }
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sum += tetra_center(i, j);
  CHECK(sum.norm() <= 1e-15);
}

TEST_CASE("sector_of basics and tie-breaks") {
  const Sector s0 = sector_of(tetra_center(0, 0));
  CHECK(s0.i == 0);
  CHECK(s0.j == 0);

  // x axis ties between sectors 00 and 01; lexicographic pick is 00.
  const Sector sx = sector_of(Vec3(1, 0, 0));
  CHECK(sx.i == 0);
  CHECK(sx.j == 0);

  // Antipode of t00 is the corner where the other three sectors meet:
  // brute-force dots give +1/3 against all of t01, t10, t11, so the
  // lexicographic rule picks (0, 1).
  const Vec3 anti = -tetra_center(0, 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(tt::near(anti.dot(tetra_center(i, j)),
                     (i == 0 && j == 0) ? -1.0 : 1.0 / 3.0, 1e-15));
  const Sector sa = sector_of(anti);
  CHECK(sa.i == 0);
  CHECK(sa.j == 1);

  // Just inside sector 11 the tie disappears.
  const Vec3 deep = make_bloch(-0.9 * tetra_center(0, 0) +
                               0.1 * tetra_center(1, 1) +
                               Vec3::Zero(),
                               1.0);
  const Sector sd = sector_of(deep.normalized());
  CHECK(sd.i == 1);
  CHECK(sd.j == 1);
}

TEST_CASE("uniform sphere sampling: moments, cap mass, determinism") {
  const int n = 1000000;
  RngState rng(2024);
  double mean_z = 0.0, mean_p2 = 0.0;
  double worst_norm = 0.0;
  int cap = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = sample_uniform_sphere(rng);
    worst_norm = std::max(worst_norm, std::abs(v.norm() - 1.0));
    mean_z += v.z();
    mean_p2 += 0.5 * (3.0 * v.z() * v.z() - 1.0);
    if (v.z() > 1.0 / std::sqrt(2.0)) ++cap;
  }
  mean_z /= n;
  mean_p2 /= n;
  CHECK(worst_norm < 1e-12);
  CHECK(std::abs(mean_z) < 0.005);
  CHECK(std::abs(mean_p2) < 0.005);
  // Spherical-cap solid angle: fraction (1 - 1/sqrt2)/2 above z = 1/sqrt2.
  const double expect = 0.5 * (1.0 - 1.0 / std::sqrt(2.0));
  CHECK(std::abs(static_cast<double>(cap) / n - expect) < 0.002);

  RngState r1(77), r2(77);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = sample_uniform_sphere(r1);
    const Vec3 b = sample_uniform_sphere(r2);
    CHECK((a - b).norm() == 0.0);
  }
}

TEST_CASE("sector partition: each quarter gets 25% of uniform samples") {
  const int n = 1000000;
  RngState rng(5);
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    const Sector s = sector_of(sample_uniform_sphere(rng));
    ++counts[2 * s.i + s.j];
  }
  for (int c : counts)
    CHECK(std::abs(static_cast<double>(c) / n - 0.25) <= 0.005);
}

TEST_CASE("random rotations are orthogonal and isotropic") {
  RngState rng(31);
  Vec3 mean = Vec3::Zero();
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Mat3 q = random_rotation_matrix(rng);
    CHECK((q * q.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(tt::near(q.determinant(), 1.0, 1e-12));
    mean += q * Vec3::UnitZ();
  }
  CHECK((mean / n).norm() < 0.02);
}

TEST_CASE("derived rng substreams differ from the parent stream") {
  RngState base(9);
  RngState d0 = base.derive(0);
  RngState d1 = base.derive(1);
  int same01 = 0;
  for (int i = 0; i < 64; ++i) same01 += d0.next() == d1.next();
  CHECK(same01 == 0);
}

TEST_SUITE_END();
