/* pathwig: sum-over-paths simulator for sequential quantum measurement
 * protocols, with an independent collapse-based cross-check.
 *
 * C API over the core library. All functions return a pw_status; out
 * parameters are set only on PW_OK. Strings returned as char* are owned by
 * the caller and released with pw_string_free. Error details for the last
 * failing call on this thread are available via pw_last_error.
 */
#ifndef PATHWIG_H
#define PATHWIG_H

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes in the CLI. */
typedef enum pw_status {
  PW_OK = 0,
  PW_ERR = 1,           /* anything not covered below */
  PW_ERR_SYNTAX = 2,    /* scenario text is not valid JSON */
  PW_ERR_SCHEMA = 3,    /* JSON structure violates the scenario schema */
  PW_ERR_PROTOCOL = 4,  /* scenario compiles but fails protocol validation */
  PW_ERR_ORACLE = 5     /* engine/oracle disagreement above tolerance */
} pw_status;

typedef struct pw_scenario pw_scenario;
typedef struct pw_report pw_report;

const char* pw_version(void);
const char* pw_last_error(void);

/* Parse scenario JSON. lenient != 0 ignores unknown fields. */
pw_status pw_scenario_parse(const char* text, int lenient, pw_scenario** out);
pw_status pw_scenario_load(const char* path, int lenient, pw_scenario** out);

/* Built-in scenarios: "case-c", "case-d", "case-f". */
pw_status pw_scenario_preset(const char* name, pw_scenario** out);

/* Deterministic canonical serialization of a parsed scenario. */
char* pw_scenario_canonical_json(const pw_scenario* scenario);

void pw_scenario_free(pw_scenario* scenario);

/* Run one query, e.g. {"distribution":{}} or {"paths":{"final":"yes^W"}}.
 * Passing NULL or "" runs the scenario's embedded queries. options_json may
 * be NULL or an object with "tolerance", "rebasis_sweeps", "seed".
 * A computed report is returned even when the oracle comparison fails; the
 * failure shows up in pw_report_status. */
pw_status pw_run(const pw_scenario* scenario, const char* query_json,
                 const char* options_json, pw_report** out);

/* Preset report for the friend-probe scenarios. options_json:
 * {"case":"f","registered":true,"chain":0,"erase":[1,2]} */
pw_status pw_wigner(const char* options_json, pw_report** out);

pw_status pw_report_status(const pw_report* report); /* PW_OK or PW_ERR_ORACLE */
char* pw_report_json(const pw_report* report);
char* pw_report_text(const pw_report* report);
void pw_report_free(pw_report* report);

void pw_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* PATHWIG_H */
