#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "telecert/certify.hpp"

namespace telecert {

inline constexpr const char* kToolName = "telecert";
inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility block carried by every report.
struct Provenance {
  std::string protocol;  // protocol id, or empty for table input
  std::string input;     // table path, or empty for protocol input
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  bool timestamp = true;
};

nlohmann::json to_json(const ChshSettings& s);
nlohmann::json to_json(const ChshResult& r);
nlohmann::json to_json(const FidelityEstimate& f);
nlohmann::json to_json(const CheckResult& c);

nlohmann::json chsh_report(const ChshResult& r, const CheckResult& marginal,
                           const Provenance& prov);
nlohmann::json fidelity_report(const FidelityEstimate& f,
                               const Provenance& prov);
nlohmann::json certification_report(const CertificationReport& rep,
                                    const Provenance& prov);

/// Serializes with a trailing newline; identical inputs give identical bytes
/// when the provenance timestamp is disabled.
std::string render_json(const nlohmann::json& j);

const char* fidelity_mode_name(FidelityMode mode);

}  // namespace telecert
