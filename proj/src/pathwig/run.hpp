#pragma once

#include "pathwig/scenario_format.hpp"
#include "pathwig/scenarios.hpp"

namespace pathwig {

struct RunOptions {
  std::optional<double> tolerance;  // compare-oracle bound override
  std::optional<int> rebasis_sweeps;
  std::optional<std::uint64_t> seed;
};

struct RunReport {
  nlohmann::ordered_json json;  // {"queries": [...]} or {"wigner": {...}}
  std::string text;             // aligned human tables
  bool oracle_mismatch = false;
};

inline constexpr double kDefaultOracleTolerance = 1e-9;

// Execute queries against a validated protocol. Throws std::invalid_argument
// for unresolvable final labels and ScenarioError-free engine errors; an
// oracle delta above tolerance only flags the report.
RunReport run_queries(const Protocol& protocol, std::span<const Query> queries,
                      const RunOptions& options = {});

// Resolve "label^observer" (or "eigenvalue^observer") against the final
// registered measurement event.
OutcomeSlot resolve_final_label(const Protocol& protocol, const std::string& label);

struct WignerRunOptions {
  std::string case_name;  // "c", "d", or "f"
  bool registered = true;
  int chain = 0;
  std::vector<int> erase;
};

RunReport run_wigner(const WignerRunOptions& options);

}  // namespace pathwig
