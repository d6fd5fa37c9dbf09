// pathwig command line front end. Talks to the engine exclusively through the
// C API in pathwig.h; every subcommand maps onto one query or preset call.
//
// Exit codes: 0 success, 1 generic error, 2 JSON syntax error, 3 schema
// violation, 4 protocol validation failure, 5 oracle mismatch.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathwig.h"

namespace {

using njson = nlohmann::json;

struct CommonFlags {
  bool json = false;
  bool lenient = false;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_flag("--json", flags.json, "machine-readable output");
  cmd->add_flag("--lenient", flags.lenient, "ignore unknown scenario fields");
  cmd->add_option("--tolerance", flags.tolerance,
                  "override the oracle comparison tolerance");
  cmd->add_option("--seed", flags.seed, "seed for randomized property sweeps");
}

int fail_with(pw_status status, const char* context) {
  std::fprintf(stderr, "pathwig: %s: %s\n", context, pw_last_error());
  return status == PW_OK ? 1 : static_cast<int>(status);
}

// PATHWIG_TOLERANCE provides the default when --tolerance is absent.
std::optional<double> env_tolerance() {
  const char* v = std::getenv("PATHWIG_TOLERANCE");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const double parsed = std::strtod(v, &end);
  if (end == v || *end != '\0') return std::nullopt;
  return parsed;
}

std::string options_json(const CommonFlags& flags) {
  njson o = njson::object();
  if (flags.tolerance) {
    o["tolerance"] = *flags.tolerance;
  } else if (auto env = env_tolerance()) {
    o["tolerance"] = *env;
  }
  if (flags.seed) o["seed"] = *flags.seed;
  return o.dump();
}

int run_scenario_query(const std::string& file, const std::string& query,
                       const CommonFlags& flags) {
  pw_scenario* scenario = nullptr;
  pw_status status = pw_scenario_load(file.c_str(), flags.lenient ? 1 : 0, &scenario);
  if (status != PW_OK) return fail_with(status, file.c_str());

  pw_report* report = nullptr;
  status = pw_run(scenario, query.empty() ? nullptr : query.c_str(),
                  options_json(flags).c_str(), &report);
  pw_scenario_free(scenario);
  if (status != PW_OK) return fail_with(status, "run");

  char* out = flags.json ? pw_report_json(report) : pw_report_text(report);
  std::fputs(out, stdout);
  pw_string_free(out);
  const pw_status report_status = pw_report_status(report);
  pw_report_free(report);
  if (report_status != PW_OK) {
    std::fprintf(stderr, "pathwig: oracle mismatch above tolerance\n");
    return static_cast<int>(report_status);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sum-over-paths simulator for sequential quantum measurements"};
  app.require_subcommand(1);

  std::string file;
  std::string final_label;
  std::string preset;
  CommonFlags flags;

  auto* simulate = app.add_subcommand("simulate", "full outcome distribution");
  simulate->add_option("file", file, "scenario file")->required();
  add_common(simulate, flags);

  auto* run = app.add_subcommand("run", "execute the scenario's embedded queries");
  run->add_option("file", file, "scenario file")->required();
  add_common(run, flags);

  auto* paths = app.add_subcommand("paths", "virtual path listing for a final outcome");
  paths->add_option("file", file, "scenario file")->required();
  paths->add_option("--final", final_label, "final outcome, e.g. yes^W")->required();
  add_common(paths, flags);

  auto* interference =
      app.add_subcommand("interference", "coherent vs incoherent sums at a final outcome");
  interference->add_option("file", file, "scenario file")->required();
  interference->add_option("--final", final_label, "final outcome, e.g. yes^W")->required();
  add_common(interference, flags);

  auto* compare = app.add_subcommand("compare-oracle",
                                     "path engine vs collapse oracle, max per-outcome delta");
  compare->add_option("file", file, "scenario file")->required();
  int sweeps = 0;
  compare->add_option("--sweeps", sweeps, "random branch-rebasis sweeps");
  add_common(compare, flags);

  auto* wigner = app.add_subcommand("wigner", "built-in friend-probe scenario report");
  std::string case_name;
  bool no_register = false;
  int chain = 0;
  std::vector<int> erase;
  wigner->add_option("--case", case_name, "c, d, or f")->required();
  wigner->add_flag("--no-register", no_register, "F does not register his outcome");
  wigner->add_option("--chain", chain, "record chain length K");
  wigner->add_option("--erase", erase, "record indices W uncomputes")->delimiter(',');
  add_common(wigner, flags);

  auto* emit = app.add_subcommand("emit-preset", "print a built-in scenario document");
  emit->add_option("name", preset, "case-c, case-d, or case-f")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    return run_scenario_query(file, R"({"distribution":{}})", flags);
  }
  if (run->parsed()) {
    return run_scenario_query(file, "", flags);
  }
  if (paths->parsed()) {
    const njson q{{"paths", {{"final", final_label}}}};
    return run_scenario_query(file, q.dump(), flags);
  }
  if (interference->parsed()) {
    const njson q{{"interference", {{"final", final_label}}}};
    return run_scenario_query(file, q.dump(), flags);
  }
  if (compare->parsed()) {
    njson body = njson::object();
    if (sweeps > 0) body["rebasis_sweeps"] = sweeps;
    const njson q{{"compare_oracle", body}};
    return run_scenario_query(file, q.dump(), flags);
  }
  if (wigner->parsed()) {
    njson o{{"case", case_name},
            {"registered", !no_register},
            {"chain", chain},
            {"erase", erase}};
    pw_report* report = nullptr;
    const pw_status status = pw_wigner(o.dump().c_str(), &report);
    if (status != PW_OK) return fail_with(status, "wigner");
    char* out = flags.json ? pw_report_json(report) : pw_report_text(report);
    std::fputs(out, stdout);
    pw_string_free(out);
    pw_report_free(report);
    return 0;
  }
  if (emit->parsed()) {
    pw_scenario* scenario = nullptr;
    const pw_status status = pw_scenario_preset(preset.c_str(), &scenario);
    if (status != PW_OK) return fail_with(status, preset.c_str());
    char* text = pw_scenario_canonical_json(scenario);
    std::fputs(text, stdout);
    pw_string_free(text);
    pw_scenario_free(scenario);
    return 0;
  }
  return 1;
}
