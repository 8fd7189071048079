#include "telecert/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace telecert {

namespace {

constexpr const char* kCsvHeader = "ax,ay,az,bx,by,bz,c0,c1,beta";
constexpr const char* kActiveModeComment = "# mode=active-compensation";

std::string pair_key(const Vec3& a, const Vec3& b) {
  return setting_key(a) + "|" + setting_key(b);
}

[[noreturn]] void csv_error(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string setting_key(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g", v.x(), v.y(), v.z());
  return buf;
}

ExperimentTable::ExperimentTable(std::vector<ExperimentRecord> records,
                                 TableMode mode)
    : records_(std::move(records)), mode_(mode) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    pair_index_[pair_key(r.a, r.b)].push_back(i);
    const std::string ak = setting_key(r.a);
    auto [it, inserted] = alice_index_.try_emplace(ak);
    if (inserted) alice_order_.push_back(ak);
    it->second.push_back(i);
  }
}

std::vector<Vec3> ExperimentTable::alice_inputs() const {
  std::vector<Vec3> out;
  out.reserve(alice_order_.size());
  for (const auto& key : alice_order_) {
    const auto& idx = alice_index_.at(key);
    out.push_back(records_[idx.front()].a);
  }
  return out;
}

std::vector<Vec3> ExperimentTable::bob_settings_for(const Vec3& a) const {
  std::vector<Vec3> out;
  const auto it = alice_index_.find(setting_key(a));
  if (it == alice_index_.end()) return out;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i : it->second) {
    const std::string bk = setting_key(records_[i].b);
    if (!seen.emplace(bk, true).second) continue;
    out.push_back(records_[i].b);
  }
  return out;
}

const std::vector<std::size_t>* ExperimentTable::group(const Vec3& a,
                                                       const Vec3& b) const {
  const auto it = pair_index_.find(pair_key(a, b));
  return it == pair_index_.end() ? nullptr : &it->second;
}

ExperimentTable ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::vector<ExperimentRecord> records;
  TableMode mode = TableMode::Separated;
  bool saw_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("mode=active-compensation") != std::string::npos)
        mode = TableMode::ActiveCompensation;
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader)
        csv_error(path, line_no,
                  "expected header '" + std::string(kCsvHeader) + "'");
      saw_header = true;
      continue;
    }

    std::array<std::string, 9> fields;
    std::size_t n_fields = 0;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (n_fields >= fields.size()) {
        ++n_fields;
        break;
      }
      fields[n_fields++] = tok;
    }
    if (n_fields != 9)
      csv_error(path, line_no,
                "expected 9 fields, got " + std::to_string(n_fields));

    std::array<double, 9> vals{};
    for (std::size_t i = 0; i < 9; ++i) {
      try {
        std::size_t used = 0;
        vals[i] = std::stod(fields[i], &used);
        if (used != fields[i].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        csv_error(path, line_no, "bad numeric field '" + fields[i] + "'");
      }
    }

    ExperimentRecord r;
    try {
      r.a = make_bloch(vals[0], vals[1], vals[2], kIngestUnitTol);
      r.b = make_bloch(vals[3], vals[4], vals[5], kIngestUnitTol);
    } catch (const std::exception& e) {
      csv_error(path, line_no, e.what());
    }
    if (vals[6] != 0.0 && vals[6] != 1.0)
      csv_error(path, line_no, "c0 must be 0 or 1");
    if (vals[7] != 0.0 && vals[7] != 1.0)
      csv_error(path, line_no, "c1 must be 0 or 1");
    if (vals[8] != -1.0 && vals[8] != 1.0)
      csv_error(path, line_no, "beta must be -1 or +1");
    r.c0 = static_cast<int>(vals[6]);
    r.c1 = static_cast<int>(vals[7]);
    r.beta = static_cast<int>(vals[8]);
    records.push_back(r);
  }
  return ExperimentTable(std::move(records), mode);
}

void export_csv(const ExperimentTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  if (table.mode() == TableMode::ActiveCompensation)
    out << kActiveModeComment << "\n";
  out << kCsvHeader << "\n";
  char buf[256];
  for (const auto& r : table.records()) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d\n", r.a.x(),
                  r.a.y(), r.a.z(), r.b.x(), r.b.y(), r.b.z(), r.c0, r.c1,
                  r.beta);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

OutcomeDistribution empirical_distribution(const ExperimentTable& table,
                                           const Vec3& a, const Vec3& b) {
  const auto* idx = table.group(a, b);
  if (!idx || idx->empty())
    throw std::runtime_error("no runs recorded for settings (a, b) = (" +
                             setting_key(a) + "), (" + setting_key(b) + ")");
  OutcomeDistribution d;
  const double w = 1.0 / static_cast<double>(idx->size());
  for (std::size_t i : *idx) {
    const auto& r = table.records()[i];
    d(r.c0, r.c1, r.beta) += w;
  }
  return d;
}

std::vector<Vec3> axis_settings() {
  return {Vec3::UnitX(),  -Vec3::UnitX(), Vec3::UnitY(),
          -Vec3::UnitY(), Vec3::UnitZ(),  -Vec3::UnitZ()};
}

namespace {

struct CellMoments {
  // Per b-setting: weight (run count or exact probability mass) and the
  // conditional mean of beta for this output cell.
  std::vector<double> weight;
  std::vector<double> beta_mean;
  double count = 0.0;
};

ConditionalVectorEstimates fit_from_moments(
    const std::array<CellMoments, 4>& cells, std::span<const Vec3> b_settings,
    double total_weight) {
  if (b_settings.size() < 4)
    throw std::invalid_argument(
        "conditional-vector fit needs at least 4 b-settings");

  ConditionalVectorEstimates out;
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      const int ci = 2 * c0 + c1;
      const CellMoments& m = cells[ci];
      ConditionalVectorEstimate& e = out[ci];
      e.c0 = c0;
      e.c1 = c1;
      e.count = static_cast<std::uint64_t>(std::llround(m.count));
      e.p_cell = total_weight > 0.0 ? m.count / total_weight : 0.0;
      e.n_settings = 0;

      Mat3 gram = Mat3::Zero();
      Vec3 rhs = Vec3::Zero();
      double wsum = 0.0;
      for (std::size_t s = 0; s < b_settings.size(); ++s) {
        const double w = m.weight[s];
        if (w <= 0.0) continue;
        ++e.n_settings;
        gram += w * (b_settings[s] * b_settings[s].transpose());
        rhs += w * m.beta_mean[s] * b_settings[s];
        wsum += w;
      }
      if (e.n_settings == 0) continue;  // cell never occurs for this input

      const Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
      if (eig.eigenvalues()(0) < 1e-9 * std::max(1.0, eig.eigenvalues()(2)))
        throw std::invalid_argument("b-settings do not span the sphere");
      e.V = gram.ldlt().solve(rhs);
      e.A = rotation_matrix(c0, c1) * e.V;
      double ss = 0.0;
      for (std::size_t s = 0; s < b_settings.size(); ++s) {
        const double w = m.weight[s];
        if (w <= 0.0) continue;
        const double r = e.V.dot(b_settings[s]) - m.beta_mean[s];
        ss += w * r * r;
      }
      e.residual = std::sqrt(ss / wsum);
      e.defined = true;
    }
  }
  return out;
}

}  // namespace

ConditionalVectorEstimates fit_conditional_vectors(
    const ExperimentTable& table, const Vec3& a,
    std::span<const Vec3> b_settings) {
  std::array<CellMoments, 4> cells;
  for (auto& c : cells) {
    c.weight.assign(b_settings.size(), 0.0);
    c.beta_mean.assign(b_settings.size(), 0.0);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < b_settings.size(); ++s) {
    const auto* idx = table.group(a, b_settings[s]);
    if (!idx) continue;
    std::array<double, 4> n{}, sum{};
    for (std::size_t i : *idx) {
      const auto& r = table.records()[i];
      const int ci = 2 * r.c0 + r.c1;
      n[ci] += 1.0;
      sum[ci] += r.beta;
    }
    for (int ci = 0; ci < 4; ++ci) {
      if (n[ci] == 0.0) continue;
      cells[ci].weight[s] = n[ci];
      cells[ci].beta_mean[s] = sum[ci] / n[ci];
      cells[ci].count += n[ci];
      total += n[ci];
    }
  }
  if (total == 0.0)
    throw std::runtime_error("table holds no runs for the requested settings");
  return fit_from_moments(cells, b_settings, total);
}

ConditionalVectorEstimates fit_conditional_vectors(
    const Protocol& protocol, const Vec3& a,
    std::span<const Vec3> b_settings) {
  if (!protocol.has_exact())
    throw std::invalid_argument(
        "exact conditional-vector fit needs an exact-distribution protocol");
  std::array<CellMoments, 4> cells;
  for (auto& c : cells) {
    c.weight.assign(b_settings.size(), 0.0);
    c.beta_mean.assign(b_settings.size(), 0.0);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < b_settings.size(); ++s) {
    const OutcomeDistribution d =
        protocol.exact_distribution(a, b_settings[s]);
    for (int c0 = 0; c0 < 2; ++c0) {
      for (int c1 = 0; c1 < 2; ++c1) {
        const double pc = d.alice_marginal(c0, c1);
        if (pc <= 0.0) continue;
        const int ci = 2 * c0 + c1;
        cells[ci].weight[s] = pc;
        cells[ci].beta_mean[s] = (d(c0, c1, +1) - d(c0, c1, -1)) / pc;
        cells[ci].count += pc;
        total += pc;
      }
    }
  }
  return fit_from_moments(cells, b_settings, total);
}

CheckResult check_linearity(const ConditionalVectorEstimates& estimates,
                            double threshold) {
  CheckResult r;
  r.threshold = threshold;
  r.statistic = 0.0;
  int worst = -1;
  for (int ci = 0; ci < 4; ++ci) {
    if (!estimates[ci].defined) continue;
    if (estimates[ci].residual > r.statistic) {
      r.statistic = estimates[ci].residual;
      worst = ci;
    }
  }
  r.pass = r.statistic <= threshold;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "max rms residual %.6g (cell %d%d) vs threshold %.3g",
                r.statistic, worst >= 0 ? worst >> 1 : 0,
                worst >= 0 ? worst & 1 : 0, threshold);
  r.detail = buf;
  return r;
}

CheckResult check_alice_marginal(const OutcomeDistribution& dist, double tol) {
  CheckResult r;
  r.threshold = tol;
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1)
      r.statistic =
          std::max(r.statistic, std::abs(dist.alice_marginal(c0, c1) - 0.25));
  r.pass = r.statistic <= tol;
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |P(c0,c1) - 1/4| = %.6g vs tol %.3g",
                r.statistic, tol);
  r.detail = buf;
  return r;
}

CheckResult check_alice_marginal(const ExperimentTable& table, double tol) {
  CheckResult r;
  r.threshold = tol;
  std::string worst_a;
  for (const Vec3& a : table.alice_inputs()) {
    std::array<double, 4> counts{};
    double n = 0.0;
    for (const auto& rec : table.records()) {
      if (setting_key(rec.a) != setting_key(a)) continue;
      counts[2 * rec.c0 + rec.c1] += 1.0;
      n += 1.0;
    }
    for (int ci = 0; ci < 4; ++ci) {
      const double dev = std::abs(counts[ci] / n - 0.25);
      if (dev > r.statistic) {
        r.statistic = dev;
        worst_a = setting_key(a);
      }
    }
  }
  r.pass = r.statistic <= tol;
  r.detail = "max |P(c0,c1|a) - 1/4| = " + std::to_string(r.statistic) +
             " at a = (" + worst_a + ")";
  return r;
}

ExperimentTable simulate_table(
    const Protocol& protocol,
    std::span<const std::pair<Vec3, Vec3>> settings, std::uint64_t n_per_pair,
    RngState& rng) {
  std::vector<ExperimentRecord> records;
  records.reserve(settings.size() * n_per_pair);
  for (const auto& [a, b] : settings) {
    for (std::uint64_t i = 0; i < n_per_pair; ++i) {
      const Outcome o = protocol.sample(a, b, rng);
      records.push_back({a, b, o.c0, o.c1, o.beta});
    }
  }
  const TableMode mode =
      protocol.compensation_mode() == CompensationMode::ActiveCompensation
          ? TableMode::ActiveCompensation
          : TableMode::Separated;
  return ExperimentTable(std::move(records), mode);
}

}  // namespace telecert
