#pragma once

#include <string>

#include <json.hpp>

#include "vgeo/convergence_verifier.hpp"
#include "vgeo/drift_analyzer.hpp"
#include "vgeo/ifs_lab.hpp"
#include "vgeo/rate_formulas.hpp"
#include "vgeo/spectral_oracle.hpp"

namespace vgeo {

/// Serializes with object keys sorted and every float printed with 17
/// significant digits; indent < 0 gives a single line.
std::string dump_json(const nlohmann::json& j, int indent = 2);

std::string fnv1a_hex(const std::string& text);

nlohmann::json to_json(const DriftReport& r);
nlohmann::json to_json(const MinorizationCertificate& c);
nlohmann::json to_json(const SpectrumReport& r);
nlohmann::json to_json(const EigenpairGrowth& g);
nlohmann::json to_json(const TruncationRow& r);
nlohmann::json to_json(const BirthDeathRate& r);
nlohmann::json to_json(const RateCertificate& c);
nlohmann::json to_json(const ContractionEstimate& c);
nlohmann::json to_json(const LindleyCertificate& c);
nlohmann::json to_json(const XiBound& x);
nlohmann::json to_json(const ARConstants& c);
nlohmann::json to_json(const CouplingReport& r);
nlohmann::json to_json(const DecayCurve& c);
nlohmann::json to_json(const BoundAudit& a);

/// "n,e_n" rows with a header line.
std::string decay_csv(const DecayCurve& c);

}  // namespace vgeo
