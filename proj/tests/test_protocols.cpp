#include "telecert/protocols.hpp"

#include <array>
#include <cmath>

#include "telecert/mc.hpp"
#include "test_util.hpp"

using namespace telecert;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

std::array<Protocol, 5> exact_protocols() {
  return {Protocol::ideal(1.0), Protocol::ideal(0.37), Protocol::gisin(),
          Protocol::gisin_hashed(), Protocol::pcrit(kInvSqrt2)};
}

}  // namespace

TEST_SUITE_BEGIN("protocols");

TEST_CASE("ideal distribution: aligned, uncorrelated and orthogonal cases") {
  const Vec3 z = Vec3::UnitZ();
  const auto d = ideal_distribution(z, z, 1.0);
  CHECK(tt::near(d(0, 0, +1), 0.25, 1e-15));
  CHECK(tt::near(d(0, 0, -1), 0.0, 1e-15));
  CHECK(tt::near(d(0, 1, +1), 0.0, 1e-15));
  CHECK(tt::near(d(0, 1, -1), 0.25, 1e-15));

  RngState rng(1);
  const auto u =
      ideal_distribution(sample_uniform_sphere(rng), Vec3::UnitX(), 0.0);
  for (double p : u.p) CHECK(tt::near(p, 0.125, 1e-15));

  // a = x, b = y: R00 and R01 fix x, R10 and R11 negate it; all images are
  // orthogonal to y so every cell is 1/8.
  const auto o = ideal_distribution(Vec3::UnitX(), Vec3::UnitY(), 1.0);
  CHECK(tt::near(o(0, 0, +1), 0.125, 1e-15));
  CHECK(tt::near(o(0, 0, -1), 0.125, 1e-15));
  CHECK(tt::near(o(1, 0, +1), 0.125, 1e-15));

  CHECK_THROWS(ideal_distribution(z, z, 1.2));
  CHECK_THROWS(ideal_distribution(z, z, -0.1));
  CHECK_THROWS(ideal_distribution(Vec3(1, 1, 0), z, 1.0));
}

TEST_CASE("ideal distribution: Alice marginal is exactly 1/4") {
  RngState rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto d = ideal_distribution(sample_uniform_sphere(rng),
                                      sample_uniform_sphere(rng), 0.73);
    for (int c0 = 0; c0 < 2; ++c0)
      for (int c1 = 0; c1 < 2; ++c1)
        CHECK(tt::near(d.alice_marginal(c0, c1), 0.25, 1e-15));
  }
}

TEST_CASE("gisin distribution: support and Bob response") {
  const Vec3 t00 = tetra_center(0, 0);
  auto d = gisin_distribution(t00, t00);
  CHECK(tt::near(d(0, 0, +1), 1.0, 1e-15));
  CHECK(tt::near(d.sum() - d(0, 0, +1), 0.0, 1e-15));

  const Vec3 perp = Vec3(1, -1, 0).normalized();  // orthogonal to t00
  d = gisin_distribution(t00, perp);
  CHECK(tt::near(d(0, 0, +1), 0.5, 1e-15));
  CHECK(tt::near(d(0, 0, -1), 0.5, 1e-15));

  // Input deep in sector 11; Bob still answers with t00.
  d = gisin_distribution(tetra_center(1, 1), Vec3::UnitZ());
  CHECK(tt::near(d(1, 1, +1), 0.5 * (1.0 + kInvSqrt3), 1e-15));
  CHECK(tt::near(d(1, 1, -1), 0.5 * (1.0 - kInvSqrt3), 1e-15));
  CHECK(tt::near(d(0, 0, +1), 0.0, 1e-15));
}

TEST_CASE("hashed gisin: uniform Alice marginal, shifted Bob response") {
  RngState rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto d = gisin_hashed_distribution(sample_uniform_sphere(rng),
                                             sample_uniform_sphere(rng));
    for (int c0 = 0; c0 < 2; ++c0)
      for (int c1 = 0; c1 < 2; ++c1)
        CHECK(tt::near(d.alice_marginal(c0, c1), 0.25, 1e-15));
  }

  // a = t00 (sector 00): cell (c0, c1) answers with t_{c0 c1}.
  const auto d = gisin_hashed_distribution(tetra_center(0, 0), Vec3::UnitZ());
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1) {
      const double tz = tetra_center(c0, c1).z();
      CHECK(tt::near(d(c0, c1, +1), 0.125 * (1.0 + tz), 1e-15));
      CHECK(tt::near(std::abs(tz), kInvSqrt3, 1e-15));
    }
}

TEST_CASE("hashed gisin equals plain gisin after compensation") {
  // P(beta | c, a, R_c b) carries the center of a's sector for every output
  // cell, which is what makes the fidelities equal.
  RngState rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = sample_uniform_sphere(rng);
    const Vec3 b = sample_uniform_sphere(rng);
    const Vec3 ts = sector_of(a).center;
    const auto d = gisin_hashed_distribution(a, b);
    for (int c0 = 0; c0 < 2; ++c0)
      for (int c1 = 0; c1 < 2; ++c1) {
        const auto dc = gisin_hashed_distribution(
            a, rotation_matrix(c0, c1) * b);
        const double pc = dc.alice_marginal(c0, c1);
        const double cond = (dc(c0, c1, +1) - dc(c0, c1, -1)) / pc;
        CHECK(tt::near(cond, ts.dot(b), 1e-12));
      }
    (void)d;
  }
}

TEST_CASE("lowfid: faithful on the two special inputs, noise elsewhere") {
  const auto dx = lowfid_distribution(Vec3::UnitX(), Vec3::UnitX());
  CHECK(tt::near(dx(0, 0, +1), 0.25, 1e-15));
  const auto dz = lowfid_distribution(Vec3::UnitZ(), Vec3::UnitX());
  for (double p : dz.p) CHECK(tt::near(p, 0.125, 1e-15));
}

TEST_CASE("pcrit map: caps, identity region, degenerate inputs") {
  // Upper cap: azimuth preserved, z pinned to 1/sqrt2.
  const double theta = 0.5, phi = 1.2;  // cos(0.5) = 0.878 > 1/sqrt2
  const Vec3 a(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
               std::cos(theta));
  const Vec3 m = pcrit_map(a, kInvSqrt2);
  CHECK(tt::near(m.z(), kInvSqrt2, 1e-12));
  CHECK(tt::near(m.x(), kInvSqrt2 * std::cos(phi), 1e-12));
  CHECK(tt::near(m.y(), kInvSqrt2 * std::sin(phi), 1e-12));

  // Inside the free region the map is the identity, exactly.
  const Vec3 diag = tetra_center(0, 0);
  CHECK((pcrit_map(diag, kInvSqrt2) - diag).norm() == 0.0);

  // Degenerate pole: residual goes to the fallback axis (k+1) mod 3.
  const Vec3 mz = pcrit_map(Vec3::UnitZ(), kInvSqrt2);
  CHECK(tt::near(mz.x(), kInvSqrt2, 1e-12));
  CHECK(tt::near(mz.y(), 0.0, 1e-15));
  CHECK(tt::near(mz.z(), kInvSqrt2, 1e-12));
  const Vec3 mx = pcrit_map(Vec3::UnitX(), kInvSqrt2);
  CHECK(tt::near(mx.x(), kInvSqrt2, 1e-12));
  CHECK(tt::near(mx.y(), kInvSqrt2, 1e-12));

  CHECK_THROWS(pcrit_map(Vec3::UnitZ(), 0.5));   // below 1/sqrt3
  CHECK_THROWS(pcrit_map(Vec3::UnitZ(), 1.01));  // above 1
}

TEST_CASE("pcrit map: unit norm, component bounds, cap disjointness") {
  RngState rng(6);
  const int n = 1000000;
  double worst_norm = 0.0, worst_comp = 0.0;
  int two_caps = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 a = sample_uniform_sphere(rng);
    const Vec3 m = pcrit_map(a, kInvSqrt2);
    worst_norm = std::max(worst_norm, std::abs(m.norm() - 1.0));
    worst_comp = std::max(worst_comp, m.cwiseAbs().maxCoeff() - kInvSqrt2);
    int caps = 0;
    for (int k = 0; k < 3; ++k)
      if (std::abs(a[k]) > kInvSqrt2) ++caps;
    if (caps > 1) ++two_caps;
    // Identity exactly on the free region.
    if (a.cwiseAbs().maxCoeff() <= kInvSqrt2) CHECK((m - a).norm() == 0.0);
  }
  CHECK(worst_norm < 1e-12);
  CHECK(worst_comp < 1e-12);
  CHECK(two_caps == 0);  // a_i^2 + a_j^2 <= 1 forbids two caps
}

TEST_CASE("pcrit map with asymmetric caps stays inside all thresholds") {
  RngState rng(7);
  for (double wz : {0.62, 0.71, 0.80, 0.93}) {
    const double txy = std::sqrt(2.0) - wz;
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const Vec3 m = pcrit_map(sample_uniform_sphere(rng), wz);
      worst = std::max({worst, std::abs(m.x()) - txy, std::abs(m.y()) - txy,
                        std::abs(m.z()) - wz});
      CHECK(tt::near(m.norm(), 1.0, 1e-12));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("pcrit distribution: perfect inside, capped outside") {
  RngState rng(8);
  const Vec3 inside = tetra_center(0, 0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 b = sample_uniform_sphere(rng);
    const auto dp = pcrit_distribution(inside, b, kInvSqrt2);
    const auto di = ideal_distribution(inside, b, 1.0);
    for (int k = 0; k < 8; ++k) CHECK(tt::near(dp.p[k], di.p[k], 1e-15));
  }
  const auto d = pcrit_distribution(Vec3::UnitZ(), Vec3::UnitZ(), kInvSqrt2);
  CHECK(tt::near(d(0, 0, +1), 0.125 * (1.0 + kInvSqrt2), 1e-15));
  RngState rng2(9);
  for (int i = 0; i < 100; ++i) {
    const auto dd = pcrit_distribution(sample_uniform_sphere(rng2),
                                       sample_uniform_sphere(rng2), kInvSqrt2);
    for (int c0 = 0; c0 < 2; ++c0)
      for (int c1 = 0; c1 < 2; ++c1)
        CHECK(tt::near(dd.alice_marginal(c0, c1), 0.25, 1e-15));
  }
}

TEST_CASE("every exact distribution is normalized with nonnegative cells") {
  RngState rng(10);
  for (const Protocol& p : exact_protocols()) {
    for (int i = 0; i < 10000; ++i) {
      const auto d = p.exact_distribution(sample_uniform_sphere(rng),
                                          sample_uniform_sphere(rng));
      CHECK(d.is_normalized(1e-12));
    }
  }
}

TEST_CASE("sampling matches exact distributions within 5 sigma per cell") {
  RngState rng(12);
  const std::uint64_t n = 1000000;
  for (const Protocol& p : exact_protocols()) {
    const Vec3 a = sample_uniform_sphere(rng);
    const Vec3 b = sample_uniform_sphere(rng);
    const auto exact = p.exact_distribution(a, b);
    const Protocol* pp = &p;
    const auto counts = parallel_tally<8>(n, rng.derive(100), [&](RngState& r) {
      const Outcome o = pp->sample(a, b, r);
      return static_cast<std::size_t>(
          OutcomeDistribution::index(o.c0, o.c1, o.beta));
    });
    for (int k = 0; k < 8; ++k) {
      const double freq = static_cast<double>(counts[k]) / n;
      const double tol =
          tt::binom5(exact.p[k], static_cast<double>(n)) + 5e-7;
      CHECK(std::abs(freq - exact.p[k]) <= tol);
    }
  }
}

TEST_CASE("toner-bacon: correlation oracle E[beta] = a.b") {
  RngState rng(13);
  const std::uint64_t n = 1000000;
  // Aligned and orthogonal pairs, then a few random ones.
  std::array<std::pair<Vec3, Vec3>, 4> pairs = {
      {{Vec3::UnitZ(), Vec3::UnitZ()},
       {Vec3::UnitX(), Vec3::UnitY()},
       {sample_uniform_sphere(rng), sample_uniform_sphere(rng)},
       {sample_uniform_sphere(rng), sample_uniform_sphere(rng)}}};
  int pair_idx = 0;
  for (const auto& [a, b] : pairs) {
    const MeanResult m =
        parallel_mean(n, rng.derive(200 + pair_idx++), [&](RngState& r) {
          return static_cast<double>(toner_bacon_active_sample(a, b, r).beta);
        });
    const double target = a.dot(b);
    const double tol = std::max(5.0 * m.std_error, 0.003);
    CHECK(std::abs(m.mean - target) <= tol);
  }
}

TEST_CASE("toner-bacon: conditional table equals perfect teleportation") {
  RngState rng(14);
  const std::uint64_t n = 2000000;
  const Vec3 a = sample_uniform_sphere(rng);
  const Vec3 b = sample_uniform_sphere(rng);
  const auto counts = parallel_tally<8>(n, rng.derive(1), [&](RngState& r) {
    const Outcome o = toner_bacon_active_sample(a, b, r);
    return static_cast<std::size_t>(
        OutcomeDistribution::index(o.c0, o.c1, o.beta));
  });
  const double ab = a.dot(b);
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1)
      for (int beta : {-1, +1}) {
        const double expect = 0.125 * (1.0 + beta * ab);
        const double freq =
            static_cast<double>(
                counts[OutcomeDistribution::index(c0, c1, beta)]) /
            static_cast<double>(n);
        CHECK(std::abs(freq - expect) <=
              tt::binom5(expect, static_cast<double>(n)));
      }
}

TEST_CASE("frame-randomized gisin: uniform outputs, hidden-vector fidelity") {
  RngState rng(15);
  const std::uint64_t n = 1000000;
  const Vec3 a = sample_uniform_sphere(rng);
  const auto counts = parallel_tally<4>(n, rng.derive(5), [&](RngState& r) {
    const Outcome o = gisin_frame_randomized_sample(a, Vec3::UnitZ(), r);
    return static_cast<std::size_t>(2 * o.c0 + o.c1);
  });
  for (int ci = 0; ci < 4; ++ci)
    CHECK(std::abs(static_cast<double>(counts[ci]) / n - 0.25) <= 0.002);

  // Per-run overlap between the hidden vector and the input averages to 1/2:
  // the rotated frame makes Bob's vector isotropic.
  const MeanResult fid = parallel_mean(n, rng.derive(6), [&](RngState& r) {
    const Vec3 input = sample_uniform_sphere(r);
    Vec3 hidden = Vec3::Zero();
    (void)gisin_frame_randomized_sample(input, Vec3::UnitZ(), r, &hidden);
    return 0.5 * (1.0 + hidden.dot(input));
  });
  CHECK(std::abs(fid.mean - 0.5) <= 0.005);
}

TEST_CASE("protocol ids parse and round-trip") {
  CHECK(Protocol::parse("ideal:lambda=0.8").lambda() == 0.8);
  CHECK(Protocol::parse("ideal").lambda() == 1.0);
  CHECK(Protocol::parse("pcrit:wz=0.7071").wz() == 0.7071);
  CHECK(Protocol::parse("gisin").kind() == ProtocolKind::Gisin);
  CHECK(Protocol::parse("gisin-hashed").kind() == ProtocolKind::GisinHashed);
  CHECK(Protocol::parse("gisin-frame").kind() ==
        ProtocolKind::GisinFrameRandomized);
  CHECK(Protocol::parse("lowfid").kind() == ProtocolKind::LowFidHighChsh);
  CHECK(Protocol::parse("toner-bacon").compensation_mode() ==
        CompensationMode::ActiveCompensation);
  for (const char* good : {"ideal:lambda=0.8", "pcrit:wz=0.7071", "gisin"}) {
    const Protocol p = Protocol::parse(good);
    CHECK(Protocol::parse(p.id()).id() == p.id());
  }
  CHECK_THROWS(Protocol::parse("nope"));
  CHECK_THROWS(Protocol::parse("ideal:lambda=1.5"));
  CHECK_THROWS(Protocol::parse("pcrit:wz=0.2"));
  CHECK_THROWS(Protocol::parse("ideal:lambda=abc"));
}

TEST_CASE("capability queries match the catalog") {
  CHECK(Protocol::ideal(1.0).has_exact());
  CHECK(Protocol::ideal(1.0).has_compensated_map());
  CHECK_FALSE(Protocol::gisin_frame_randomized().has_exact());
  CHECK(Protocol::gisin_frame_randomized().has_sampling());
  CHECK_FALSE(Protocol::toner_bacon_active().has_exact());
  CHECK_THROWS(Protocol::gisin_frame_randomized().exact_distribution(
      Vec3::UnitZ(), Vec3::UnitZ()));
  CHECK_THROWS(
      Protocol::toner_bacon_active().compensated_map(Vec3::UnitZ()));
}

TEST_SUITE_END();
