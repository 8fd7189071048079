#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "telecert/distribution.hpp"
#include "telecert/geometry.hpp"
#include "telecert/protocols.hpp"
#include "telecert/rng.hpp"
#include "telecert/stats.hpp"

namespace telecert {

/// Guarded certification threshold on |CHSH|.
inline constexpr double kChshVerdictThreshold = 2.0 + 1e-9;

struct ChshSettings {
  Vec3 a0 = Vec3::UnitX();
  Vec3 a1 = Vec3::UnitY();
  Vec3 b0 = Vec3(1, 1, 0).normalized();
  Vec3 b1 = Vec3(1, -1, 0).normalized();

  /// a0 = x, a1 = y, b0 = (x+y)/sqrt2, b1 = (x-y)/sqrt2.
  static ChshSettings canonical();
  /// Same construction on an arbitrary ordered axis pair (j, k).
  static ChshSettings canonical_for_axes(int axis0, int axis1);
};

/// Which component pair the output coarse-graining picks from Alice's two
/// inputs. Bits map to axes as c0 -> x, c1 -> y, c0 XOR c1 -> z.
enum class ChshVariant { XY, XZ, YZ };

std::array<int, 2> variant_axes(ChshVariant v);
const char* variant_name(ChshVariant v);

/// Raw correlator E = sum (2 c_j - 1) beta P(c0, c1, beta), j in {0, 1}.
double correlator(const OutcomeDistribution& dist, int j);

/// Raw correlator for a coarse-graining axis (0: c0, 1: c1, 2: c0 XOR c1).
double coarse_correlator(const OutcomeDistribution& dist, int axis);
/// Mean of the coarse-grained Alice bit, sum (2 f(c) - 1) P.
double coarse_alice_mean(const OutcomeDistribution& dist, int axis);

struct ChshResult {
  double value = 0.0;
  // Connected correlators E_jk = E[alpha beta] - E[alpha] E[beta]; for boxes
  // with uniform output marginals these equal the raw correlators.
  std::array<double, 4> correlators{};  // E00, E01, E10, E11
  ChshSettings settings;
  ChshVariant variant = ChshVariant::XY;
};

/// CHSH = E00 + E01 + E10 - E11 from exact distributions.
ChshResult chsh(const Protocol& protocol, const ChshSettings& settings,
                ChshVariant variant = ChshVariant::XY);

/// Same from a recorded table; raises if any of the four pairs is missing.
ChshResult chsh(const ExperimentTable& table, const ChshSettings& settings,
                ChshVariant variant = ChshVariant::XY);

/// Same from sampled runs of a protocol (n per setting pair).
ChshResult chsh_sampled(const Protocol& protocol, const ChshSettings& settings,
                        std::uint64_t n_per_pair, RngState rng,
                        ChshVariant variant = ChshVariant::XY);

enum class SettingsStrategy { Canonical, GridRefine };

struct OptimizeOptions {
  int grid_theta = 20;
  int grid_phi = 40;
  int n_starts = 0;          // extra random multi-starts (all four vectors)
  bool refine_alice = false;
  bool search_variants = true;
  double step_tol = 1e-6;
  std::uint64_t seed = 2024;
};

struct OptimizedSettings {
  ChshSettings settings;
  ChshVariant variant = ChshVariant::XY;
  double abs_chsh = 0.0;
};

/// Canonical returns the fixed textbook settings; GridRefine runs a coarse
/// spherical grid over Bob's vectors followed by coordinate descent with a
/// shrinking step (optionally over Alice's vectors and the coarse-graining
/// variants, and from extra random starts).
OptimizedSettings optimize_settings(const Protocol& protocol,
                                    SettingsStrategy strategy,
                                    const OptimizeOptions& options = {});

enum class FidelityMode { Auto, ExactMap, MonteCarlo };

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  FidelityMode mode = FidelityMode::ExactMap;
};

/// Sphere-averaged post-processing fidelity <(1 + A(a).a)/2>. ExactMap
/// evaluates the protocol's compensated reconstruction exactly per sampled
/// input; MonteCarlo draws the output cell and then Bob's outcome along the
/// compensated direction. The frame-randomized variant has no consistent
/// compensated map and is scored per run against the hidden vector its box
/// actually holds.
FidelityEstimate average_fidelity(const Protocol& protocol, std::uint64_t n,
                                  RngState rng,
                                  FidelityMode mode = FidelityMode::Auto);

enum class Verdict { QuantumCertified, Inconclusive, AssumptionViolated };
const char* verdict_name(Verdict v);

struct CertificationReport {
  ChshResult chsh;
  FidelityEstimate fidelity;
  CheckResult marginal_check;
  CheckResult linearity_check;
  Verdict verdict = Verdict::Inconclusive;
  std::string protocol_id;  // empty when built from a table
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  std::string assumption_note;
};

struct CertifyOptions {
  double marginal_tol_exact = 1e-9;
  double marginal_tol_sampled = 0.01;
  double linearity_threshold_exact = 1e-9;
  double linearity_threshold_sampled = 0.05;
  std::uint64_t n_marginal_inputs = 64;
};

/// Runs the verifiable-assumption checks, CHSH and the fidelity estimate and
/// assembles the verdict: QuantumCertified iff |CHSH| clears the guarded
/// threshold and both checks pass; AssumptionViolated iff a check fails.
/// Raises for active-compensation sources, whose statistics certify nothing.
CertificationReport certify(const Protocol& protocol,
                            const ChshSettings& settings, std::uint64_t n,
                            RngState rng, const CertifyOptions& options = {});
CertificationReport certify(const ExperimentTable& table,
                            const ChshSettings& settings,
                            const CertifyOptions& options = {});

struct WzSweepRow {
  double wz = 0.0;
  double max_abs_chsh = 0.0;
  double fidelity = 0.0;
};

/// For each wz builds the capped protocol (z cap wz, x/y caps sqrt(2) - wz)
/// and reports the largest |CHSH| over the three canonical axis-pair settings
/// plus the Monte Carlo average fidelity.
std::vector<WzSweepRow> wz_sweep(std::span<const double> wz_values,
                                 std::uint64_t n_samples, RngState rng);

/// Critical shrink factor and fidelity for the uniform-shrinking family,
/// (1/sqrt2, (1 + 1/sqrt2)/2).
std::pair<double, double> shrink_thresholds();

}  // namespace telecert
