#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "vgeo/kernel_catalog.hpp"

namespace vgeo {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode { kOk = 0, kAuditFailure = 1, kInfeasible = 2, kUnsupported = 3, kUsage = 64 };

/// Catalog model described by {"model": ..., "params": {...}}.
struct ModelSpec {
  std::string name;
  nlohmann::json params;
  std::optional<Kernel> kernel;
  std::optional<IFSModel> ifs;
  std::optional<IncrementLaw> increments;  // Lindley-type models
  double gamma = 0.0;                      // Lindley distance parameter, 0 if none
};

ModelSpec model_from_json(const nlohmann::json& config);

/// Entry point of the `vgeo` binary; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vgeo
