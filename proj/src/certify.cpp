#include "telecert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "telecert/mc.hpp"

namespace telecert {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

Vec3 axis_vec(int axis) {
  switch (axis) {
    case 0: return Vec3::UnitX();
    case 1: return Vec3::UnitY();
    default: return Vec3::UnitZ();
  }
}

int coarse_bit(int axis, int c0, int c1) {
  switch (axis) {
    case 0: return c0;
    case 1: return c1;
    default: return c0 ^ c1;
  }
}

/// Connected correlator for one setting pair.
double connected_correlator(const OutcomeDistribution& d, int axis) {
  return coarse_correlator(d, axis) -
         coarse_alice_mean(d, axis) * d.beta_mean();
}

ChshResult chsh_from_distributions(
    const std::array<OutcomeDistribution, 4>& dists,
    const ChshSettings& settings, ChshVariant variant) {
  const auto axes = variant_axes(variant);
  ChshResult r;
  r.settings = settings;
  r.variant = variant;
  // E_jk with j indexing Alice's input (coarse axis axes[j]) and k Bob's.
  r.correlators[0] = connected_correlator(dists[0], axes[0]);  // E00
  r.correlators[1] = connected_correlator(dists[1], axes[0]);  // E01
  r.correlators[2] = connected_correlator(dists[2], axes[1]);  // E10
  r.correlators[3] = connected_correlator(dists[3], axes[1]);  // E11
  r.value = r.correlators[0] + r.correlators[1] + r.correlators[2] -
            r.correlators[3];
  return r;
}

std::array<std::pair<Vec3, Vec3>, 4> setting_pairs(const ChshSettings& s) {
  return {{{s.a0, s.b0}, {s.a0, s.b1}, {s.a1, s.b0}, {s.a1, s.b1}}};
}

}  // namespace

ChshSettings ChshSettings::canonical() { return canonical_for_axes(0, 1); }

ChshSettings ChshSettings::canonical_for_axes(int axis0, int axis1) {
  if (axis0 == axis1)
    throw std::invalid_argument("canonical settings need two distinct axes");
  ChshSettings s;
  s.a0 = axis_vec(axis0);
  s.a1 = axis_vec(axis1);
  s.b0 = (axis_vec(axis0) + axis_vec(axis1)).normalized();
  s.b1 = (axis_vec(axis0) - axis_vec(axis1)).normalized();
  return s;
}

std::array<int, 2> variant_axes(ChshVariant v) {
  switch (v) {
    case ChshVariant::XY: return {0, 1};
    case ChshVariant::XZ: return {0, 2};
    default: return {1, 2};
  }
}

const char* variant_name(ChshVariant v) {
  switch (v) {
    case ChshVariant::XY: return "c0:c1";
    case ChshVariant::XZ: return "c0:xor";
    default: return "c1:xor";
  }
}

double coarse_correlator(const OutcomeDistribution& dist, int axis) {
  double e = 0.0;
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1) {
      const double alpha = 2 * coarse_bit(axis, c0, c1) - 1;
      e += alpha * (dist(c0, c1, +1) - dist(c0, c1, -1));
    }
  return e;
}

double coarse_alice_mean(const OutcomeDistribution& dist, int axis) {
  double m = 0.0;
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1)
      m += (2 * coarse_bit(axis, c0, c1) - 1) * dist.alice_marginal(c0, c1);
  return m;
}

double correlator(const OutcomeDistribution& dist, int j) {
  if (j != 0 && j != 1)
    throw std::invalid_argument("correlator bit index must be 0 or 1");
  return coarse_correlator(dist, j);
}

ChshResult chsh(const Protocol& protocol, const ChshSettings& settings,
                ChshVariant variant) {
  if (!protocol.has_exact())
    throw std::invalid_argument("protocol '" + protocol.id() +
                                "' has no exact distributions; use "
                                "chsh_sampled or a table");
  std::array<OutcomeDistribution, 4> dists;
  const auto pairs = setting_pairs(settings);
  for (int i = 0; i < 4; ++i)
    dists[i] = protocol.exact_distribution(pairs[i].first, pairs[i].second);
  return chsh_from_distributions(dists, settings, variant);
}

ChshResult chsh(const ExperimentTable& table, const ChshSettings& settings,
                ChshVariant variant) {
  std::array<OutcomeDistribution, 4> dists;
  const auto pairs = setting_pairs(settings);
  for (int i = 0; i < 4; ++i)
    dists[i] = empirical_distribution(table, pairs[i].first, pairs[i].second);
  return chsh_from_distributions(dists, settings, variant);
}

ChshResult chsh_sampled(const Protocol& protocol, const ChshSettings& settings,
                        std::uint64_t n_per_pair, RngState rng,
                        ChshVariant variant) {
  if (n_per_pair == 0)
    throw std::invalid_argument("sampled CHSH needs n >= 1 runs per pair");
  std::array<OutcomeDistribution, 4> dists;
  const auto pairs = setting_pairs(settings);
  for (int i = 0; i < 4; ++i) {
    const Vec3 a = pairs[i].first;
    const Vec3 b = pairs[i].second;
    const Protocol* p = &protocol;
    const auto counts = parallel_tally<8>(
        n_per_pair, rng.derive(1000 + i), [p, a, b](RngState& r) {
          const Outcome o = p->sample(a, b, r);
          return static_cast<std::size_t>(
              OutcomeDistribution::index(o.c0, o.c1, o.beta));
        });
    for (int k = 0; k < 8; ++k)
      dists[i].p[k] =
          static_cast<double>(counts[k]) / static_cast<double>(n_per_pair);
  }
  return chsh_from_distributions(dists, settings, variant);
}

// ---- settings search -------------------------------------------------------

namespace {

Vec3 from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

struct SearchState {
  // Vectors stored as (theta, phi): a0, a1, b0, b1.
  std::array<std::array<double, 2>, 4> ang;
  ChshVariant variant = ChshVariant::XY;

  ChshSettings settings() const {
    return {from_angles(ang[0][0], ang[0][1]), from_angles(ang[1][0], ang[1][1]),
            from_angles(ang[2][0], ang[2][1]), from_angles(ang[3][0], ang[3][1])};
  }
};

double abs_chsh(const Protocol& p, const SearchState& st) {
  return std::abs(chsh(p, st.settings(), st.variant).value);
}

/// Coordinate descent with shrinking step over the chosen vectors.
double refine(const Protocol& p, SearchState& st, bool move_alice,
              double initial_step, double step_tol) {
  double best = abs_chsh(p, st);
  double step = initial_step;
  const int first = move_alice ? 0 : 2;
  while (step > step_tol) {
    bool improved = false;
    for (int v = first; v < 4; ++v) {
      for (int comp = 0; comp < 2; ++comp) {
        for (double sign : {+1.0, -1.0}) {
          SearchState trial = st;
          trial.ang[v][comp] += sign * step;
          const double val = abs_chsh(p, trial);
          if (val > best + 1e-15) {
            best = val;
            st = trial;
            improved = true;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

OptimizedSettings optimize_settings(const Protocol& protocol,
                                    SettingsStrategy strategy,
                                    const OptimizeOptions& options) {
  if (strategy == SettingsStrategy::Canonical)
    return {ChshSettings::canonical(), ChshVariant::XY,
            std::abs(chsh(protocol, ChshSettings::canonical()).value)};

  const std::vector<ChshVariant> variants =
      options.search_variants
          ? std::vector<ChshVariant>{ChshVariant::XY, ChshVariant::XZ,
                                     ChshVariant::YZ}
          : std::vector<ChshVariant>{ChshVariant::XY};

  OptimizedSettings best;
  best.abs_chsh = -1.0;
  const double pi = std::numbers::pi;

  auto consider = [&](SearchState st, double initial_step, bool move_alice) {
    const double val = refine(protocol, st, move_alice, initial_step,
                              options.step_tol);
    if (val > best.abs_chsh) {
      best.abs_chsh = val;
      best.settings = st.settings();
      best.variant = st.variant;
    }
  };

  for (ChshVariant variant : variants) {
    const auto axes = variant_axes(variant);
    // Canonical-style start for this variant's axis pair.
    SearchState canon;
    canon.variant = variant;
    const auto cs = ChshSettings::canonical_for_axes(axes[0], axes[1]);
    auto angles_of = [](const Vec3& v) -> std::array<double, 2> {
      return {std::acos(std::clamp(v.z(), -1.0, 1.0)),
              std::atan2(v.y(), v.x())};
    };
    canon.ang = {angles_of(cs.a0), angles_of(cs.a1), angles_of(cs.b0),
                 angles_of(cs.b1)};

    // Coarse grid over Bob's two vectors; CHSH is additive in (b0, b1), so
    // each is scanned independently around the canonical Alice inputs.
    SearchState gridded = canon;
    for (int bv = 2; bv < 4; ++bv) {
      double vbest = -1.0;
      std::array<double, 2> arg = gridded.ang[bv];
      for (int it = 0; it < options.grid_theta; ++it) {
        const double theta = (it + 0.5) * pi / options.grid_theta;
        for (int ip = 0; ip < options.grid_phi; ++ip) {
          const double phi = ip * 2.0 * pi / options.grid_phi;
          SearchState trial = gridded;
          trial.ang[bv] = {theta, phi};
          const double val = abs_chsh(protocol, trial);
          if (val > vbest) {
            vbest = val;
            arg = {theta, phi};
          }
        }
      }
      gridded.ang[bv] = arg;
    }
    consider(gridded, pi / options.grid_theta, options.refine_alice);

    // Random multi-starts over all four vectors.
    RngState rng(options.seed, static_cast<std::uint64_t>(variant));
    for (int s = 0; s < options.n_starts; ++s) {
      SearchState st;
      st.variant = variant;
      for (auto& ang : st.ang) {
        const Vec3 v = sample_uniform_sphere(rng);
        ang = {std::acos(std::clamp(v.z(), -1.0, 1.0)),
               std::atan2(v.y(), v.x())};
      }
      consider(st, 0.4, true);
    }
  }
  return best;
}

// ---- fidelity ---------------------------------------------------------------

namespace {

double exact_map_fidelity_sample(const Protocol& p, RngState& rng) {
  const Vec3 a = sample_uniform_sphere(rng);
  return 0.5 * (1.0 + p.compensated_map(a).dot(a));
}

/// Post-processing run: draw the output cell from Alice's marginal, point
/// Bob's analyzer along the compensated direction R_c a and score (1+beta)/2.
double outcome_fidelity_sample(const Protocol& p, RngState& rng) {
  const Vec3 a = sample_uniform_sphere(rng);
  const OutcomeDistribution ref = p.exact_distribution(a, Vec3::UnitZ());
  double u = rng.uniform();
  int c0 = 1, c1 = 1;
  for (int i = 0; i < 4; ++i) {
    const double pc = ref.alice_marginal(i >> 1, i & 1);
    u -= pc;
    if (u < 0.0) {
      c0 = i >> 1;
      c1 = i & 1;
      break;
    }
  }
  const Vec3 bstar = rotation_matrix(c0, c1) * a;
  const OutcomeDistribution d = p.exact_distribution(a, bstar);
  const double pc = d.alice_marginal(c0, c1);
  const double p_plus = pc > 0.0 ? d(c0, c1, +1) / pc : 0.5;
  const int beta = rng.uniform() < p_plus ? +1 : -1;
  return 0.5 * (1.0 + beta);
}

/// The frame-randomized box holds a fresh hidden vector each run; the run is
/// scored by the overlap of that vector with the input.
double frame_hidden_fidelity_sample(const Protocol& p, RngState& rng) {
  const Vec3 a = sample_uniform_sphere(rng);
  Vec3 hidden = Vec3::Zero();
  (void)p.sample(a, Vec3::UnitZ(), rng, &hidden);
  return 0.5 * (1.0 + hidden.dot(a));
}

}  // namespace

FidelityEstimate average_fidelity(const Protocol& protocol, std::uint64_t n,
                                  RngState rng, FidelityMode mode) {
  if (n == 0) throw std::invalid_argument("fidelity needs n >= 1 samples");
  if (protocol.kind() == ProtocolKind::TonerBaconActive)
    throw std::invalid_argument(
        "post-processing fidelity is undefined for active-compensation "
        "protocols");

  FidelityMode effective = mode;
  if (mode == FidelityMode::Auto)
    effective = protocol.has_compensated_map() ? FidelityMode::ExactMap
                                               : FidelityMode::MonteCarlo;
  if (effective == FidelityMode::ExactMap && !protocol.has_compensated_map())
    throw std::invalid_argument("protocol '" + protocol.id() +
                                "' has no exact compensated map");

  const Protocol* p = &protocol;
  MeanResult m;
  if (effective == FidelityMode::ExactMap) {
    m = parallel_mean(n, rng,
                      [p](RngState& r) { return exact_map_fidelity_sample(*p, r); });
  } else if (protocol.kind() == ProtocolKind::GisinFrameRandomized) {
    m = parallel_mean(n, rng, [p](RngState& r) {
      return frame_hidden_fidelity_sample(*p, r);
    });
  } else {
    m = parallel_mean(n, rng,
                      [p](RngState& r) { return outcome_fidelity_sample(*p, r); });
  }
  return {m.mean, m.std_error, m.n, effective};
}

// ---- certification ----------------------------------------------------------

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::QuantumCertified: return "QuantumCertified";
    case Verdict::Inconclusive: return "Inconclusive";
    default: return "AssumptionViolated";
  }
}

std::pair<double, double> shrink_thresholds() {
  return {kInvSqrt2, 0.5 * (1.0 + kInvSqrt2)};
}

namespace {

std::string assumption_note() {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "verdict uses the consistency-only assumption set (linearity "
                "in b and uniform Alice marginals, both checked); fidelity "
                "benchmarks: %.6f under uniform shrinking, %.6f under "
                "consistency only",
                0.5 * (1.0 + kInvSqrt2),
                1.0 - 3.0 * (1.0 - kInvSqrt2) *
                          (0.5 - 0.5 * std::numbers::pi /
                                     (8.0 * (std::sqrt(2.0) - 1.0))));
  return buf;
}

Verdict assemble_verdict(const ChshResult& chsh_result,
                         const CheckResult& marginal,
                         const CheckResult& linearity) {
  if (!marginal.pass || !linearity.pass) return Verdict::AssumptionViolated;
  if (std::abs(chsh_result.value) > kChshVerdictThreshold)
    return Verdict::QuantumCertified;
  return Verdict::Inconclusive;
}

CheckResult protocol_marginal_check(const Protocol& p, const ChshSettings& s,
                                    const CertifyOptions& opt,
                                    std::uint64_t n_runs, RngState rng) {
  // Deterministic coverage of the CHSH inputs plus random ones.
  std::vector<Vec3> inputs = {s.a0, s.a1};
  for (std::uint64_t i = 0; i < opt.n_marginal_inputs; ++i)
    inputs.push_back(sample_uniform_sphere(rng));

  CheckResult r;
  std::string worst;
  if (p.has_exact()) {
    r.threshold = opt.marginal_tol_exact;
    for (const Vec3& a : inputs) {
      const OutcomeDistribution d = p.exact_distribution(a, Vec3::UnitZ());
      const CheckResult one = check_alice_marginal(d, opt.marginal_tol_exact);
      if (one.statistic > r.statistic) {
        r.statistic = one.statistic;
        worst = setting_key(a);
      }
    }
  } else {
    const std::uint64_t per_input =
        std::max<std::uint64_t>(1, n_runs / inputs.size());
    // Statistical floor: the check targets structural bias, not shot noise.
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(per_input));
    r.threshold = std::max(opt.marginal_tol_sampled, 6.0 * sigma);
    std::uint64_t stream = 0;
    for (const Vec3& a : inputs) {
      const Protocol* pp = &p;
      const auto counts = parallel_tally<4>(
          per_input, rng.derive(777 + stream++), [pp, a](RngState& rr) {
            const Outcome o = pp->sample(a, Vec3::UnitZ(), rr);
            return static_cast<std::size_t>(2 * o.c0 + o.c1);
          });
      for (int ci = 0; ci < 4; ++ci) {
        const double dev = std::abs(static_cast<double>(counts[ci]) /
                                        static_cast<double>(per_input) -
                                    0.25);
        if (dev > r.statistic) {
          r.statistic = dev;
          worst = setting_key(a);
        }
      }
    }
  }
  r.pass = r.statistic <= r.threshold;
  r.detail = "max |P(c0,c1|a) - 1/4| = " + std::to_string(r.statistic) +
             " at a = (" + worst + ")";
  return r;
}

CheckResult protocol_linearity_check(const Protocol& p, const ChshSettings& s,
                                     const CertifyOptions& opt,
                                     std::uint64_t n_runs, RngState rng) {
  const std::vector<Vec3> settings = axis_settings();
  double worst = 0.0;
  double threshold = p.has_exact() ? opt.linearity_threshold_exact
                                   : opt.linearity_threshold_sampled;
  std::uint64_t input_idx = 0;
  for (const Vec3& a : {s.a0, s.a1}) {
    ConditionalVectorEstimates est;
    if (p.has_exact()) {
      est = fit_conditional_vectors(p, a, settings);
    } else {
      std::vector<std::pair<Vec3, Vec3>> pairs;
      pairs.reserve(settings.size());
      for (const Vec3& b : settings) pairs.emplace_back(a, b);
      const std::uint64_t per =
          std::max<std::uint64_t>(1, n_runs / settings.size());
      RngState sub = rng.derive(input_idx);
      const ExperimentTable t = simulate_table(p, pairs, per, sub);
      est = fit_conditional_vectors(t, a, settings);
    }
    ++input_idx;
    const CheckResult one = check_linearity(est, threshold);
    worst = std::max(worst, one.statistic);
  }
  CheckResult r;
  r.threshold = threshold;
  r.statistic = worst;
  r.pass = worst <= threshold;
  char buf[96];
  std::snprintf(buf, sizeof buf, "max rms residual %.6g vs threshold %.3g",
                worst, threshold);
  r.detail = buf;
  return r;
}

}  // namespace

CertificationReport certify(const Protocol& protocol,
                            const ChshSettings& settings, std::uint64_t n,
                            RngState rng, const CertifyOptions& options) {
  if (protocol.compensation_mode() == CompensationMode::ActiveCompensation)
    throw std::invalid_argument(
        "active-compensation data cannot be certified in separated-mode "
        "analysis");

  CertificationReport rep;
  rep.protocol_id = protocol.id();
  rep.seed = rng.seed();
  rep.n_samples = n;
  rep.assumption_note = assumption_note();

  rep.chsh = protocol.has_exact()
                 ? chsh(protocol, settings)
                 : chsh_sampled(protocol, settings, std::max<std::uint64_t>(1, n),
                                rng.derive(1), ChshVariant::XY);
  rep.marginal_check =
      protocol_marginal_check(protocol, settings, options, n, rng.derive(2));
  rep.linearity_check =
      protocol_linearity_check(protocol, settings, options, n, rng.derive(3));
  rep.fidelity = average_fidelity(protocol, std::max<std::uint64_t>(1, n),
                                  rng.derive(4), FidelityMode::Auto);
  rep.verdict = assemble_verdict(rep.chsh, rep.marginal_check,
                                 rep.linearity_check);
  return rep;
}

CertificationReport certify(const ExperimentTable& table,
                            const ChshSettings& settings,
                            const CertifyOptions& options) {
  if (table.mode() == TableMode::ActiveCompensation)
    throw std::invalid_argument(
        "active-compensation data cannot be certified in separated-mode "
        "analysis");
  if (table.empty()) throw std::invalid_argument("table is empty");

  CertificationReport rep;
  rep.n_samples = table.size();
  rep.assumption_note = assumption_note();
  rep.chsh = chsh(table, settings);
  rep.marginal_check =
      check_alice_marginal(table, options.marginal_tol_sampled);

  // Post-processing reconstruction per recorded Alice input, using every
  // input with enough spanning Bob settings.
  double worst_residual = 0.0;
  double fid_sum = 0.0, fid_sqsum = 0.0;
  std::uint64_t fid_points = 0;
  for (const Vec3& a : table.alice_inputs()) {
    const std::vector<Vec3> bobs = table.bob_settings_for(a);
    if (bobs.size() < 4) continue;
    ConditionalVectorEstimates est;
    try {
      est = fit_conditional_vectors(table, a, bobs);
    } catch (const std::invalid_argument&) {
      continue;  // settings for this input do not span the sphere
    }
    double f = 0.0;
    for (const auto& e : est) {
      if (!e.defined) continue;
      worst_residual = std::max(worst_residual, e.residual);
      f += e.p_cell * 0.5 * (1.0 + e.A.dot(a));
    }
    fid_sum += f;
    fid_sqsum += f * f;
    ++fid_points;
  }
  if (fid_points == 0)
    throw std::invalid_argument(
        "table lacks reconstruction settings (need >= 4 spanning Bob "
        "settings for some input)");

  rep.linearity_check.threshold = options.linearity_threshold_sampled;
  rep.linearity_check.statistic = worst_residual;
  rep.linearity_check.pass = worst_residual <= rep.linearity_check.threshold;
  rep.linearity_check.detail =
      "max rms residual " + std::to_string(worst_residual) + " across " +
      std::to_string(fid_points) + " reconstructed inputs";

  rep.fidelity.value = fid_sum / static_cast<double>(fid_points);
  rep.fidelity.n = fid_points;
  rep.fidelity.mode = FidelityMode::MonteCarlo;
  if (fid_points > 1) {
    const double var = std::max(
        0.0, fid_sqsum / fid_points - rep.fidelity.value * rep.fidelity.value);
    rep.fidelity.std_error = std::sqrt(var / (fid_points - 1));
  }

  rep.verdict = assemble_verdict(rep.chsh, rep.marginal_check,
                                 rep.linearity_check);
  return rep;
}

std::vector<WzSweepRow> wz_sweep(std::span<const double> wz_values,
                                 std::uint64_t n_samples, RngState rng) {
  std::vector<WzSweepRow> rows;
  rows.reserve(wz_values.size());
  std::uint64_t stream = 0;
  for (double wz : wz_values) {
    const Protocol p = Protocol::pcrit(wz);
    WzSweepRow row;
    row.wz = wz;
    for (ChshVariant v :
         {ChshVariant::XY, ChshVariant::XZ, ChshVariant::YZ}) {
      const auto axes = variant_axes(v);
      const auto settings = ChshSettings::canonical_for_axes(axes[0], axes[1]);
      row.max_abs_chsh =
          std::max(row.max_abs_chsh, std::abs(chsh(p, settings, v).value));
    }
    row.fidelity =
        average_fidelity(p, n_samples, rng.derive(stream++), FidelityMode::ExactMap)
            .value;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace telecert
