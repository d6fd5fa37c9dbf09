#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "pathwig/protocol.hpp"

namespace pathwig {

// JSON scenario documents. Complex numbers are two-element arrays [re, im],
// matrices are row-major arrays of rows. Parsing is strict: unknown fields are
// rejected unless lenient mode is on. Errors carry a JSON-pointer style path.
//
// Error classes map onto distinct process exit codes: syntax 2, schema 3,
// protocol validation 4.

enum class ScenarioErrorKind { syntax, schema, protocol };

struct ScenarioError : std::runtime_error {
  ScenarioError(ScenarioErrorKind k, std::string p, const std::string& message)
      : std::runtime_error(p.empty() ? message : p + ": " + message),
        kind(k),
        path(std::move(p)) {}
  ScenarioErrorKind kind;
  std::string path;
};

struct DistributionQuery {
  std::optional<double> report_eps;
};
struct PathsQuery {
  std::string final_label;
};
struct InterferenceQuery {
  std::string final_label;
};
struct CompareOracleQuery {
  std::optional<double> tolerance;
  std::optional<int> rebasis_sweeps;
  std::optional<std::uint64_t> seed;
};
struct WignerComparisonQuery {
  std::string final_label;
};
using Query = std::variant<DistributionQuery, PathsQuery, InterferenceQuery,
                           CompareOracleQuery, WignerComparisonQuery>;

class ScenarioDocument {
 public:
  // Throws ScenarioError. Lenient mode ignores unknown fields.
  static ScenarioDocument parse(std::string_view text, bool lenient = false);

  const Protocol& protocol() const { return protocol_; }
  const std::vector<Query>& queries() const { return queries_; }

  // Deterministic canonical serialization: fixed key order, normalized number
  // forms. parse(canonical_text()).canonical_text() is byte-identical.
  std::string canonical_text() const;

 private:
  nlohmann::ordered_json canon_;
  Protocol protocol_;
  std::vector<Query> queries_;
};

// Built-in scenario documents for the three engagement modes.
std::vector<std::string> preset_names();
ScenarioDocument preset_scenario(const std::string& name);

// Parse a JSON array of query objects (ad-hoc queries outside a document).
std::vector<Query> parse_queries_json(const nlohmann::ordered_json& array,
                                      bool lenient = false);

}  // namespace pathwig
