#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "telecert/distribution.hpp"
#include "telecert/geometry.hpp"
#include "telecert/protocols.hpp"

namespace telecert {

/// Vector unit tolerance on table ingestion.
inline constexpr double kIngestUnitTol = 1e-9;

struct ExperimentRecord {
  Vec3 a = Vec3::UnitZ();
  Vec3 b = Vec3::UnitZ();
  int c0 = 0;
  int c1 = 0;
  int beta = +1;
};

enum class TableMode { Separated, ActiveCompensation };

/// Canonical grouping key: coordinates rounded to 12 significant digits.
std::string setting_key(const Vec3& v);

/// Immutable collection of runs with a grouping index by (a, b) settings.
class ExperimentTable {
 public:
  ExperimentTable() = default;
  explicit ExperimentTable(std::vector<ExperimentRecord> records,
                           TableMode mode = TableMode::Separated);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  TableMode mode() const { return mode_; }
  const std::vector<ExperimentRecord>& records() const { return records_; }

  /// Distinct Alice inputs, in first-appearance order.
  std::vector<Vec3> alice_inputs() const;
  /// Distinct Bob settings grouped with the given a, in first-appearance order.
  std::vector<Vec3> bob_settings_for(const Vec3& a) const;
  /// Record indices for one setting pair; nullptr if the pair never occurs.
  const std::vector<std::size_t>* group(const Vec3& a, const Vec3& b) const;

 private:
  std::vector<ExperimentRecord> records_;
  TableMode mode_ = TableMode::Separated;
  std::unordered_map<std::string, std::vector<std::size_t>> pair_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> alice_index_;
  std::vector<std::string> alice_order_;
};

/// CSV schema: header "ax,ay,az,bx,by,bz,c0,c1,beta", one row per run,
/// beta in {-1,+1}. Lines starting with '#' are metadata; the exporter writes
/// "# mode=active-compensation" for active-compensation tables.
ExperimentTable ingest_csv(const std::string& path);
void export_csv(const ExperimentTable& table, const std::string& path);

/// Relative frequencies over the eight outcomes for one setting pair.
/// Raises if the (a, b) group is empty.
OutcomeDistribution empirical_distribution(const ExperimentTable& table,
                                           const Vec3& a, const Vec3& b);

/// Least-squares reconstruction of Bob's conditional vector for one output
/// cell: <beta | c0, c1, a, b> = V.b fitted across settings, A = R_c V.
struct ConditionalVectorEstimate {
  int c0 = 0;
  int c1 = 0;
  bool defined = false;  // false when the cell never occurs for this a
  Vec3 V = Vec3::Zero();
  Vec3 A = Vec3::Zero();
  double residual = 0.0;  // weighted rms misfit of the linear model
  double p_cell = 0.0;    // P(c0, c1 | a)
  std::uint64_t count = 0;
  std::uint64_t n_settings = 0;
};

using ConditionalVectorEstimates = std::array<ConditionalVectorEstimate, 4>;

/// Default reconstruction settings: +/- x, y, z.
std::vector<Vec3> axis_settings();

ConditionalVectorEstimates fit_conditional_vectors(
    const ExperimentTable& table, const Vec3& a,
    std::span<const Vec3> b_settings);

/// Exact-data variant: conditional means are taken from the protocol's exact
/// distributions instead of empirical frequencies.
ConditionalVectorEstimates fit_conditional_vectors(
    const Protocol& protocol, const Vec3& a, std::span<const Vec3> b_settings);

struct CheckResult {
  bool pass = false;
  double statistic = 0.0;  // residual (linearity) or max deviation (marginal)
  double threshold = 0.0;
  std::string detail;
};

/// Pass iff the worst rms residual across defined cells is <= threshold.
CheckResult check_linearity(const ConditionalVectorEstimates& estimates,
                            double threshold);

/// Pass iff every cell of P(c0, c1 | a) is within tol of 1/4 for every a.
CheckResult check_alice_marginal(const ExperimentTable& table, double tol);
CheckResult check_alice_marginal(const OutcomeDistribution& dist, double tol);

/// Synthetic table: n runs per (a, b) setting pair, sampled from the protocol.
ExperimentTable simulate_table(
    const Protocol& protocol,
    std::span<const std::pair<Vec3, Vec3>> settings, std::uint64_t n_per_pair,
    RngState& rng);

}  // namespace telecert
