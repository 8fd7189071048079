#pragma once

#include <optional>
#include <string>

#include "telecert/distribution.hpp"
#include "telecert/geometry.hpp"
#include "telecert/rng.hpp"

namespace telecert {

/// How Bob's box may use Alice's two bits. Under ActiveCompensation the bits
/// reach Bob's box before beta is produced; all statistics-only analysis
/// assumes Separated.
enum class CompensationMode { Separated, ActiveCompensation };

enum class ProtocolKind {
  Ideal,                 // P = (1/8)[1 + beta * lambda (R_c a).b]
  Gisin,                 // sector communication, Bob holds t00
  GisinHashed,           // sector XOR shared bits, Bob holds t_r
  GisinFrameRandomized,  // per-run Haar rotation of the tetrahedron frame
  LowFidHighChsh,        // faithful only on x and y inputs
  PCrit,                 // component-capped deterministic teleportation
  TonerBaconActive,      // classical fake, valid only with active compensation
};

/// Match radius for the low-fidelity protocol's special inputs.
inline constexpr double kLowFidMatchTol = 1e-9;

// ---- exact outcome distributions -----------------------------------------

OutcomeDistribution ideal_distribution(const Vec3& a, const Vec3& b,
                                       double lambda);
OutcomeDistribution gisin_distribution(const Vec3& a, const Vec3& b);
OutcomeDistribution gisin_hashed_distribution(const Vec3& a, const Vec3& b);
OutcomeDistribution lowfid_distribution(const Vec3& a, const Vec3& b,
                                        double tol = kLowFidMatchTol);
OutcomeDistribution pcrit_distribution(const Vec3& a, const Vec3& b,
                                       double wz);

// ---- sampled protocols -----------------------------------------------------

/// One run of the frame-randomized Gisin variant. Alice reports the sector of
/// a in the rotated frame; Bob's box holds the rotated t00 and answers with
/// <beta> = b.(rotated t00). If bob_hidden is non-null it receives the
/// rotated t00 of the run.
Outcome gisin_frame_randomized_sample(const Vec3& a, const Vec3& b,
                                      RngState& rng,
                                      Vec3* bob_hidden = nullptr);

/// One run of the two-bit classical simulation of perfect teleportation.
/// Shared lambda1, lambda2 are uniform on the sphere; Alice encodes
/// c0 = (1-alpha)/2, c1 = (1-c)/2 from alpha = -sgn(a.lambda1) and
/// c = sgn(a.lambda1) sgn(a.lambda2); Bob, knowing both bits, outputs
/// beta = -alpha sgn(b.(lambda1 + c lambda2)). E[beta | a, b] = a.b.
Outcome toner_bacon_active_sample(const Vec3& a, const Vec3& b, RngState& rng);

/// Deterministic map teleporting `a` with every component capped: the z cap
/// is wz and the x/y caps are sqrt(2) - wz. Returns the unit vector closest
/// in angle to `a` inside the capped region (identity when a already
/// qualifies). For inputs exactly on a coordinate axis the residual direction
/// is a fixed fallback, axis (k+1) mod 3 first.
Vec3 pcrit_map(const Vec3& a, double wz);

// ---- protocol handles ------------------------------------------------------

/// Immutable handle for one of the seven box-pair behaviors. Exact
/// distributions and sampling are separate capabilities; query before use.
class Protocol {
 public:
  static Protocol ideal(double lambda);
  static Protocol gisin();
  static Protocol gisin_hashed();
  static Protocol gisin_frame_randomized();
  static Protocol lowfid(double tol = kLowFidMatchTol);
  static Protocol pcrit(double wz);
  static Protocol toner_bacon_active();

  /// Parses CLI identifiers: "ideal:lambda=0.8", "gisin", "gisin-hashed",
  /// "gisin-frame", "lowfid", "pcrit:wz=0.7071", "toner-bacon".
  static Protocol parse(const std::string& id);
  std::string id() const;

  ProtocolKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double wz() const { return wz_; }
  double lowfid_tol() const { return lowfid_tol_; }
  CompensationMode compensation_mode() const;

  bool has_exact() const;
  bool has_sampling() const;

  /// True when the compensated reconstruction A(a) = R_c V_c(a) is a single
  /// exact function of a (same for every output cell it occurs in).
  bool has_compensated_map() const;
  Vec3 compensated_map(const Vec3& a) const;

  OutcomeDistribution exact_distribution(const Vec3& a, const Vec3& b) const;
  Outcome sample(const Vec3& a, const Vec3& b, RngState& rng,
                 Vec3* bob_hidden = nullptr) const;

 private:
  Protocol(ProtocolKind kind) : kind_(kind) {}
  ProtocolKind kind_;
  double lambda_ = 1.0;
  double wz_ = 0.0;
  double lowfid_tol_ = kLowFidMatchTol;
};

}  // namespace telecert
