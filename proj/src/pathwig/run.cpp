#include "pathwig/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "pathwig/collapse_oracle.hpp"
#include "pathwig/path_engine.hpp"

namespace pathwig {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12f", v);
  return buf;
}

std::string fmt(const cx& z) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.12f, %.12f)", std::real(z), std::imag(z));
  return buf;
}

ojson amplitude_json(const cx& z) {
  return ojson::array({std::real(z), std::imag(z)});
}

void print_table(std::ostringstream& os, const std::vector<std::pair<std::string, double>>& rows,
                 const std::string& left_header, const std::string& right_header) {
  std::size_t width = left_header.size();
  for (const auto& [label, value] : rows) width = std::max(width, label.size());
  os << left_header << std::string(width - left_header.size() + 2, ' ') << right_header
     << "\n";
  for (const auto& [label, value] : rows) {
    os << label << std::string(width - label.size() + 2, ' ') << fmt(value) << "\n";
  }
}

const MeasurementEvent& final_registered_event(const Protocol& p) {
  const MeasurementEvent* found = nullptr;
  for (const auto& e : p.events) {
    if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (m->registered) found = m;
    }
  }
  if (!found) throw std::invalid_argument("protocol has no registered measurement event");
  return *found;
}

std::vector<const MeasurementEvent*> registered_events(const Protocol& p) {
  std::vector<const MeasurementEvent*> out;
  for (const auto& e : p.events) {
    if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (m->registered) out.push_back(m);
    }
  }
  return out;
}

ojson outcome_json(const OutcomeSequence& seq) {
  ojson labels = ojson::array();
  ojson eigenvalues = ojson::array();
  ojson observers = ojson::array();
  for (const auto& slot : seq) {
    labels.push_back(outcome_text(slot));
    eigenvalues.push_back(slot.eigenvalue);
    observers.push_back(slot.observer);
  }
  return ojson{{"outcome", std::move(labels)},
               {"observers", std::move(observers)},
               {"eigenvalues", std::move(eigenvalues)}};
}

ojson run_distribution(const Protocol& p, const DistributionQuery& q,
                       std::ostringstream& text) {
  const double eps = q.report_eps.value_or(kReportAll);
  const auto dist = full_distribution(p, eps);
  ojson rows = ojson::array();
  std::vector<std::pair<std::string, double>> table;
  double total = 0.0;
  for (const auto& rec : dist) {
    ojson row = outcome_json(rec.outcome);
    ojson amps = ojson::array();
    for (const cx& a : rec.coherent_amplitudes) amps.push_back(amplitude_json(a));
    row["amplitudes"] = std::move(amps);
    row["probability"] = rec.probability;
    rows.push_back(std::move(row));
    table.push_back({outcome_text(rec.outcome), rec.probability});
    total += rec.probability;
  }
  text << "distribution (" << dist.size() << " outcome sequences)\n";
  table.push_back({"total", total});
  print_table(text, table, "outcome", "probability");
  return ojson{{"distribution", ojson{{"outcomes", std::move(rows)}, {"total", total}}}};
}

ojson run_paths(const Protocol& p, const PathsQuery& q, std::ostringstream& text) {
  const OutcomeSlot slot = resolve_final_label(p, q.final_label);
  const auto events = registered_events(p);
  const auto paths = enumerate_virtual_paths(p);

  ojson rows = ojson::array();
  std::size_t count = 0;
  text << "virtual paths to " << outcome_text(slot) << "\n";
  for (const auto& path : paths) {
    const auto& last = path.nodes.back();
    const auto& final_branch =
        events.back()->observable.branches[last.branch];
    if (!same_outcome({events.back()->observer, final_branch.eigenvalue, final_branch.label},
                      slot)) {
      continue;
    }
    ++count;
    ojson nodes = ojson::array();
    std::string line;
    for (const auto& node : path.nodes) {
      const auto& ev = *events[node.event];
      const auto& branch = ev.observable.branches[node.branch];
      nodes.push_back(ojson{{"event", node.event},
                            {"observer", ev.observer},
                            {"branch", node.branch},
                            {"label", outcome_text({ev.observer, branch.eigenvalue, branch.label})},
                            {"vector", node.vector}});
      if (!line.empty()) line += " -> ";
      line += outcome_text({ev.observer, branch.eigenvalue, branch.label}) + "[" +
              std::to_string(node.vector) + "]";
    }
    rows.push_back(ojson{{"nodes", std::move(nodes)},
                         {"amplitude", amplitude_json(path.amplitude)}});
    text << "  " << line << "  amplitude " << fmt(path.amplitude) << "\n";
  }
  text << "  " << count << " path(s)\n";
  return ojson{{"paths", ojson{{"final", outcome_text(slot)},
                               {"count", count},
                               {"paths", std::move(rows)}}}};
}

ojson run_interference(const Protocol& p, const InterferenceQuery& q,
                       std::ostringstream& text) {
  const OutcomeSlot slot = resolve_final_label(p, q.final_label);
  const InterferenceReport rep = interference_report(p, slot);
  ojson per_basis = ojson::array();
  for (const auto& term : rep.per_basis) {
    per_basis.push_back(ojson{{"coherent", term.coherent}, {"incoherent", term.incoherent}});
  }
  text << "interference at " << outcome_text(rep.final_outcome) << "\n";
  text << "  coherent sum        = " << fmt(rep.coherent_sum) << "\n";
  text << "  incoherent sum      = " << fmt(rep.incoherent_sum) << "\n";
  text << "  interference term   = " << fmt(rep.interference_term) << "\n";
  text << "  P(registered)       = " << fmt(rep.p_registered) << "\n";
  text << "  P(unregistered)     = " << fmt(rep.p_unregistered) << "\n";
  return ojson{{"interference", ojson{{"final", outcome_text(rep.final_outcome)},
                                      {"coherent_sum", rep.coherent_sum},
                                      {"incoherent_sum", rep.incoherent_sum},
                                      {"interference_term", rep.interference_term},
                                      {"p_registered", rep.p_registered},
                                      {"p_unregistered", rep.p_unregistered},
                                      {"per_basis", std::move(per_basis)}}}};
}

ojson run_compare_oracle(const Protocol& p, const CompareOracleQuery& q,
                         const RunOptions& options, std::ostringstream& text,
                         bool& mismatch) {
  const double tolerance =
      options.tolerance.value_or(q.tolerance.value_or(kDefaultOracleTolerance));
  const int sweeps = options.rebasis_sweeps.value_or(q.rebasis_sweeps.value_or(0));
  const std::uint64_t seed = options.seed.value_or(q.seed.value_or(1));

  const auto engine = full_distribution(p);
  const auto oracle = evolve_collapse(p);

  // Union of outcome keys; missing entries count as zero.
  std::vector<std::pair<OutcomeSequence, std::pair<double, double>>> merged;
  auto slot_of = [&](const OutcomeSequence& key)
      -> std::pair<double, double>& {
    for (auto& [k, v] : merged) {
      if (same_outcome(k, key)) return v;
    }
    merged.push_back({key, {0.0, 0.0}});
    return merged.back().second;
  };
  for (const auto& rec : engine) slot_of(rec.outcome).first = rec.probability;
  for (const auto& rec : oracle) slot_of(rec.outcome).second = rec.probability;

  double max_delta = 0.0;
  ojson rows = ojson::array();
  std::vector<std::pair<std::string, double>> table;
  for (const auto& [key, pair] : merged) {
    const double delta = std::abs(pair.first - pair.second);
    max_delta = std::max(max_delta, delta);
    rows.push_back(ojson{{"outcome", outcome_text(key)},
                         {"path_engine", pair.first},
                         {"collapse_oracle", pair.second},
                         {"delta", delta}});
  }

  double rebasis_max = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    const Protocol remixed = rebasis_observable_branches(p, seed + static_cast<std::uint64_t>(s));
    for (const auto& rec : full_distribution(remixed)) {
      double want = 0.0;
      for (const auto& [key, pair] : merged) {
        if (same_outcome(key, rec.outcome)) {
          want = pair.second;
          break;
        }
      }
      rebasis_max = std::max(rebasis_max, std::abs(rec.probability - want));
    }
  }
  max_delta = std::max(max_delta, rebasis_max);

  mismatch = max_delta > tolerance;
  text << "path engine vs collapse oracle\n";
  std::size_t width = 0;
  for (const auto& row : rows) {
    width = std::max(width, row["outcome"].get<std::string>().size());
  }
  for (const auto& row : rows) {
    const std::string outcome = row["outcome"].get<std::string>();
    text << "  " << outcome << std::string(width - outcome.size() + 2, ' ') << "engine "
         << fmt(row["path_engine"].get<double>()) << "  oracle "
         << fmt(row["collapse_oracle"].get<double>()) << "\n";
  }
  if (sweeps > 0) {
    text << "  rebasis sweeps      = " << sweeps << " (max delta " << rebasis_max << ")\n";
  }
  text << "  max delta           = " << max_delta << "\n";
  text << "  tolerance           = " << tolerance << "\n";
  text << "  " << (mismatch ? "MISMATCH" : "agreement within tolerance") << "\n";
  return ojson{{"compare_oracle", ojson{{"outcomes", std::move(rows)},
                                        {"rebasis_sweeps", sweeps},
                                        {"rebasis_max_delta", rebasis_max},
                                        {"max_delta", max_delta},
                                        {"tolerance", tolerance},
                                        {"ok", !mismatch}}}};
}

ojson run_wigner_comparison(const Protocol& p, const WignerComparisonQuery& q,
                            std::ostringstream& text) {
  const OutcomeSlot slot = resolve_final_label(p, q.final_label);
  const WignerComparison wc = wigner_comparison(p, slot);

  // Path-engine values for the same pair of protocols.
  const MeasurementEvent* intermediate = nullptr;
  for (const auto& e : p.events) {
    if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
      intermediate = m;
      break;
    }
  }
  const double path_reg =
      final_outcome_probability(with_registered(p, intermediate->observer, true), slot);
  const double path_unreg =
      final_outcome_probability(with_registered(p, intermediate->observer, false), slot);
  const double max_delta =
      std::max(std::abs(wc.p_mixture - path_reg), std::abs(wc.p_pure - path_unreg));

  text << "pure-vs-mixture comparison at " << outcome_text(slot) << "\n";
  text << "  p_pure (coherent)      = " << fmt(wc.p_pure) << "\n";
  text << "  p_mixture (incoherent) = " << fmt(wc.p_mixture) << "\n";
  text << "  path engine, unreg     = " << fmt(path_unreg) << "\n";
  text << "  path engine, reg       = " << fmt(path_reg) << "\n";
  return ojson{{"wigner_comparison", ojson{{"final", outcome_text(slot)},
                                           {"p_pure", wc.p_pure},
                                           {"p_mixture", wc.p_mixture},
                                           {"path_unregistered", path_unreg},
                                           {"path_registered", path_reg},
                                           {"max_delta", max_delta}}}};
}

}  // namespace

OutcomeSlot resolve_final_label(const Protocol& p, const std::string& label) {
  const MeasurementEvent& final_event = final_registered_event(p);
  std::string head = label;
  const std::size_t caret = label.rfind('^');
  if (caret != std::string::npos) {
    head = label.substr(0, caret);
    const std::string observer = label.substr(caret + 1);
    if (observer != final_event.observer) {
      throw std::invalid_argument("final label observer '" + observer +
                                  "' does not match the final event observer '" +
                                  final_event.observer + "'");
    }
  }
  if (const auto* b = final_event.observable.find_label(head)) {
    return OutcomeSlot{final_event.observer, b->eigenvalue, b->label};
  }
  char* end = nullptr;
  const double eig = std::strtod(head.c_str(), &end);
  if (end && *end == '\0' && !head.empty()) {
    if (const auto* b = final_event.observable.find_eigenvalue(eig)) {
      return OutcomeSlot{final_event.observer, b->eigenvalue, b->label};
    }
  }
  throw std::invalid_argument("unknown final outcome label '" + label + "'");
}

RunReport run_queries(const Protocol& protocol, std::span<const Query> queries,
                      const RunOptions& options) {
  require_valid(protocol);
  RunReport report;
  std::ostringstream text;
  ojson results = ojson::array();

  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (i > 0) text << "\n";
    std::visit(
        [&](const auto& q) {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, DistributionQuery>) {
            results.push_back(run_distribution(protocol, q, text));
          } else if constexpr (std::is_same_v<T, PathsQuery>) {
            results.push_back(run_paths(protocol, q, text));
          } else if constexpr (std::is_same_v<T, InterferenceQuery>) {
            results.push_back(run_interference(protocol, q, text));
          } else if constexpr (std::is_same_v<T, CompareOracleQuery>) {
            bool mismatch = false;
            results.push_back(run_compare_oracle(protocol, q, options, text, mismatch));
            report.oracle_mismatch = report.oracle_mismatch || mismatch;
          } else {
            results.push_back(run_wigner_comparison(protocol, q, text));
          }
        },
        queries[i]);
  }
  report.json = ojson{{"queries", std::move(results)}};
  report.text = text.str();
  return report;
}

RunReport run_wigner(const WignerRunOptions& options) {
  WignerFriendConfig cfg;
  std::string mode_text;
  if (options.case_name == "c") {
    cfg = WignerFriendConfig::case_c();
    mode_text = "W measures the spin";
  } else if (options.case_name == "d") {
    cfg = WignerFriendConfig::case_d();
    mode_text = "W measures F's probe";
  } else if (options.case_name == "f") {
    cfg = WignerFriendConfig::case_f();
    mode_text = "W engages the composite probe+spin";
  } else {
    throw std::invalid_argument("unknown case '" + options.case_name + "' (expected c, d, f)");
  }
  cfg.f_registered = options.registered;
  cfg.chain_length = options.chain;
  cfg.erasure = options.erase;

  const ScenarioReport rep = registering_gap(cfg);

  std::ostringstream text;
  text << "case " << options.case_name << ": " << mode_text << "\n";
  if (options.chain > 0) {
    text << "chain length " << options.chain << ", erased {";
    for (std::size_t i = 0; i < options.erase.size(); ++i) {
      if (i) text << ",";
      text << options.erase[i];
    }
    text << "}\n";
  }
  ojson amps = ojson::array();
  for (std::size_t i = 0; i < rep.amplitudes.size(); ++i) {
    text << "  A" << (i + 1) << " = " << fmt(rep.amplitudes[i]) << "\n";
    amps.push_back(amplitude_json(rep.amplitudes[i]));
  }
  std::vector<std::pair<std::string, double>> table;
  ojson rows = ojson::array();
  for (const auto& rec : rep.joint_table) {
    table.push_back({outcome_text(rec.outcome), rec.probability});
    ojson row = outcome_json(rec.outcome);
    row["probability"] = rec.probability;
    rows.push_back(std::move(row));
  }
  print_table(text, table, "outcome", "probability");
  text << "P(yes^W | F registering)     = " << fmt(rep.p_yes_registered) << "\n";
  text << "P(yes^W | F not registering) = " << fmt(rep.p_yes_unregistered) << "\n";
  text << "gap                          = " << fmt(rep.gap) << "\n";
  text << "interference term            = " << fmt(rep.interference_term) << "\n";
  text << "record survival              = " << (rep.record_survival ? "yes" : "no") << "\n";

  RunReport out;
  out.text = text.str();
  ojson erase = ojson::array();
  for (int e : options.erase) erase.push_back(e);
  out.json = ojson{{"wigner", ojson{{"case", options.case_name},
                                    {"registered", options.registered},
                                    {"chain", options.chain},
                                    {"erase", std::move(erase)},
                                    {"amplitudes", std::move(amps)},
                                    {"joint_table", std::move(rows)},
                                    {"p_yes_registered", rep.p_yes_registered},
                                    {"p_yes_unregistered", rep.p_yes_unregistered},
                                    {"gap", rep.gap},
                                    {"interference_term", rep.interference_term},
                                    {"record_survival", rep.record_survival}}}};
  return out;
}

}  // namespace pathwig
