#include "telecert/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace telecert {

namespace {

nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

std::string iso_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json provenance_json(const Provenance& p) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  if (!p.protocol.empty()) j["protocol"] = p.protocol;
  if (!p.input.empty()) j["input"] = p.input;
  j["seed"] = p.seed;
  j["samples"] = p.n_samples;
  if (p.timestamp) j["timestamp"] = iso_timestamp();
  return j;
}

}  // namespace

const char* fidelity_mode_name(FidelityMode mode) {
  switch (mode) {
    case FidelityMode::ExactMap: return "exact-map";
    case FidelityMode::MonteCarlo: return "monte-carlo";
    default: return "auto";
  }
}

nlohmann::json to_json(const ChshSettings& s) {
  return {{"a0", vec_json(s.a0)},
          {"a1", vec_json(s.a1)},
          {"b0", vec_json(s.b0)},
          {"b1", vec_json(s.b1)}};
}

nlohmann::json to_json(const ChshResult& r) {
  return {{"value", r.value},
          {"correlators",
           {{"E00", r.correlators[0]},
            {"E01", r.correlators[1]},
            {"E10", r.correlators[2]},
            {"E11", r.correlators[3]}}},
          {"settings", to_json(r.settings)},
          {"coarse_graining", variant_name(r.variant)}};
}

nlohmann::json to_json(const FidelityEstimate& f) {
  return {{"value", f.value},
          {"std_error", f.std_error},
          {"n", f.n},
          {"mode", fidelity_mode_name(f.mode)}};
}

nlohmann::json to_json(const CheckResult& c) {
  return {{"pass", c.pass},
          {"statistic", c.statistic},
          {"threshold", c.threshold},
          {"detail", c.detail}};
}

nlohmann::json chsh_report(const ChshResult& r, const CheckResult& marginal,
                           const Provenance& prov) {
  nlohmann::json j = provenance_json(prov);
  j["chsh"] = to_json(r);
  j["checks"] = {{"marginal", to_json(marginal)}};
  return j;
}

nlohmann::json fidelity_report(const FidelityEstimate& f,
                               const Provenance& prov) {
  nlohmann::json j = provenance_json(prov);
  j["fidelity"] = to_json(f);
  return j;
}

nlohmann::json certification_report(const CertificationReport& rep,
                                    const Provenance& prov) {
  nlohmann::json j = provenance_json(prov);
  j["chsh"] = to_json(rep.chsh);
  j["fidelity"] = to_json(rep.fidelity);
  j["checks"] = {{"marginal", to_json(rep.marginal_check)},
                 {"linearity", to_json(rep.linearity_check)}};
  j["verdict"] = verdict_name(rep.verdict);
  j["assumptions"] = rep.assumption_note;
  return j;
}

std::string render_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace telecert
