#include "pathwig.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pathwig/run.hpp"

using namespace pathwig;

struct pw_scenario {
  ScenarioDocument doc;
};

struct pw_report {
  RunReport report;
};

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pw_status status_of(const ScenarioError& e) {
  switch (e.kind) {
    case ScenarioErrorKind::syntax:
      return PW_ERR_SYNTAX;
    case ScenarioErrorKind::schema:
      return PW_ERR_SCHEMA;
    case ScenarioErrorKind::protocol:
      return PW_ERR_PROTOCOL;
  }
  return PW_ERR;
}

template <typename Fn>
pw_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ScenarioError& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return PW_ERR_PROTOCOL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PW_ERR;
  }
}

}  // namespace

extern "C" {

const char* pw_version(void) { return "1.0.0"; }

const char* pw_last_error(void) { return g_last_error.c_str(); }

pw_status pw_scenario_parse(const char* text, int lenient, pw_scenario** out) {
  if (!text || !out) {
    g_last_error = "null argument";
    return PW_ERR;
  }
  return guarded([&] {
    auto doc = ScenarioDocument::parse(text, lenient != 0);
    *out = new pw_scenario{std::move(doc)};
    return PW_OK;
  });
}

pw_status pw_scenario_load(const char* path, int lenient, pw_scenario** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return PW_ERR;
  }
  return guarded([&] {
    std::ifstream ifs(path, std::ios::binary);
    if (!ifs) {
      g_last_error = std::string("cannot open '") + path + "'";
      return PW_ERR;
    }
    std::ostringstream ss;
    ss << ifs.rdbuf();
    auto doc = ScenarioDocument::parse(ss.str(), lenient != 0);
    *out = new pw_scenario{std::move(doc)};
    return PW_OK;
  });
}

pw_status pw_scenario_preset(const char* name, pw_scenario** out) {
  if (!name || !out) {
    g_last_error = "null argument";
    return PW_ERR;
  }
  return guarded([&] {
    auto doc = preset_scenario(name);
    *out = new pw_scenario{std::move(doc)};
    return PW_OK;
  });
}

char* pw_scenario_canonical_json(const pw_scenario* scenario) {
  if (!scenario) return nullptr;
  return copy_string(scenario->doc.canonical_text());
}

void pw_scenario_free(pw_scenario* scenario) { delete scenario; }

pw_status pw_run(const pw_scenario* scenario, const char* query_json,
                 const char* options_json, pw_report** out) {
  if (!scenario || !out) {
    g_last_error = "null argument";
    return PW_ERR;
  }
  return guarded([&]() -> pw_status {
    RunOptions options;
    if (options_json && *options_json) {
      const auto o = nlohmann::json::parse(options_json);
      if (o.contains("tolerance")) options.tolerance = o["tolerance"].get<double>();
      if (o.contains("rebasis_sweeps")) options.rebasis_sweeps = o["rebasis_sweeps"].get<int>();
      if (o.contains("seed")) options.seed = o["seed"].get<std::uint64_t>();
    }

    std::vector<Query> queries;
    if (query_json && *query_json) {
      const auto parsed = nlohmann::ordered_json::parse(query_json);
      queries = parse_queries_json(nlohmann::ordered_json::array({parsed}));
    } else {
      queries = scenario->doc.queries();
    }
    auto report = run_queries(scenario->doc.protocol(), queries, options);
    *out = new pw_report{std::move(report)};
    return PW_OK;
  });
}

pw_status pw_wigner(const char* options_json, pw_report** out) {
  if (!options_json || !out) {
    g_last_error = "null argument";
    return PW_ERR;
  }
  return guarded([&]() -> pw_status {
    const auto o = nlohmann::json::parse(options_json);
    WignerRunOptions options;
    options.case_name = o.at("case").get<std::string>();
    if (o.contains("registered")) options.registered = o["registered"].get<bool>();
    if (o.contains("chain")) options.chain = o["chain"].get<int>();
    if (o.contains("erase")) options.erase = o["erase"].get<std::vector<int>>();
    auto report = run_wigner(options);
    *out = new pw_report{std::move(report)};
    return PW_OK;
  });
}

pw_status pw_report_status(const pw_report* report) {
  if (!report) return PW_ERR;
  return report->report.oracle_mismatch ? PW_ERR_ORACLE : PW_OK;
}

char* pw_report_json(const pw_report* report) {
  if (!report) return nullptr;
  return copy_string(report->report.json.dump(2) + "\n");
}

char* pw_report_text(const pw_report* report) {
  if (!report) return nullptr;
  return copy_string(report->report.text);
}

void pw_report_free(pw_report* report) { delete report; }

void pw_string_free(char* text) { std::free(text); }

}  // extern "C"
