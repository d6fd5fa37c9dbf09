#include "pathwig/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pathwig {

namespace {

constexpr double kTauF = 1.0;  // F couples his probe
constexpr double kT1 = 2.0;   // F looks (or not)
constexpr double kTauW = 3.0;  // W couples
constexpr double kT2 = 4.0;   // W looks

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

bool parse_record_name(const std::string& name, int& index) {
  std::string_view v = name;
  if (v.starts_with("FR")) {
    v.remove_prefix(2);
  } else if (v.starts_with("R")) {
    v.remove_prefix(1);
  } else {
    return false;
  }
  if (v.empty()) return false;
  index = 0;
  for (char ch : v) {
    if (ch < '0' || ch > '9') return false;
    index = index * 10 + (ch - '0');
  }
  return index >= 1;
}

std::vector<int> record_indices(const SpaceLayout& layout) {
  std::vector<int> out;
  for (const auto& s : layout.subsystems()) {
    int k = 0;
    if (parse_record_name(s.name, k)) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string record_subsystem(const SpaceLayout& layout, int index) {
  for (const auto& s : layout.subsystems()) {
    int k = 0;
    if (parse_record_name(s.name, k) && k == index) return s.name;
  }
  throw std::invalid_argument("unknown record index " + std::to_string(index));
}

// First coupling event whose target list contains `name`.
std::size_t find_coupling_on(const Protocol& p, const std::string& name) {
  for (std::size_t i = 0; i < p.events.size(); ++i) {
    if (const auto* c = std::get_if<CouplingEvent>(&p.events[i])) {
      if (std::find(c->targets.begin(), c->targets.end(), name) != c->targets.end()) {
        return i;
      }
    }
  }
  throw std::invalid_argument("no coupling event targets subsystem '" + name + "'");
}

StateVector on_sub(const SpaceLayout& layout, const std::vector<std::string>& names,
                   const std::vector<cx>& entries) {
  return StateVector(layout.sub_layout(names), entries);
}

// Probe projector observable with caller-chosen branch bases: the probe factor
// is pinned to |1> ("yes") or |0> ("no"), every other group enumerates.
ObservableDecomposition probe_observable(const SpaceLayout& layout,
                                         const std::string& probe,
                                         const std::vector<BasisGroup>& groups_yes,
                                         const std::vector<BasisGroup>& groups_no,
                                         const Tolerances& tol) {
  const std::string probe_names[] = {probe};
  const SpaceLayout probe_space = layout.sub_layout(probe_names);
  const StateVector one = StateVector::basis_state(probe_space, 1);
  const OperatorMatrix p_yes = embed_operator(outer(one, one), probe_names, layout, tol);
  const OperatorMatrix p_no = sub(OperatorMatrix::identity(layout), p_yes);

  ObservableDecomposition obs;
  obs.label = probe;
  obs.branches.push_back({1.0, "yes", p_yes, grouped_product_basis(layout, groups_yes)});
  obs.branches.push_back({0.0, "no", p_no, grouped_product_basis(layout, groups_no)});
  return obs;
}

}  // namespace

WignerFriendConfig WignerFriendConfig::case_c() {
  WignerFriendConfig cfg;
  cfg.spin_init = {kInvSqrt2, kInvSqrt2};          // x+
  cfg.f_basis[0] = {1.0, 0.0};                     // z basis
  cfg.f_basis[1] = {0.0, 1.0};
  cfg.w_mode = WMode::spin;
  cfg.w_basis[0] = {kInvSqrt2, kInvSqrt2};         // x basis
  cfg.w_basis[1] = {kInvSqrt2, -kInvSqrt2};
  return cfg;
}

WignerFriendConfig WignerFriendConfig::case_d() {
  WignerFriendConfig cfg = case_c();
  cfg.w_mode = WMode::probe;
  cfg.w_basis[0] = {0.0, 1.0};  // phi_1 = |1F>: W copies F's probe
  cfg.w_basis[1] = {1.0, 0.0};
  return cfg;
}

WignerFriendConfig WignerFriendConfig::case_f() {
  WignerFriendConfig cfg = case_c();
  cfg.w_mode = WMode::composite;
  // (|1F s1F> +/- |0F s2F>)/sqrt(2) on (F, spin) with the z spin basis:
  // |1F s1F> is composite index 2, |0F s2F> is index 1.
  cfg.w_basis[0] = {0.0, kInvSqrt2, kInvSqrt2, 0.0};
  cfg.w_basis[1] = {0.0, -kInvSqrt2, kInvSqrt2, 0.0};
  return cfg;
}

namespace {

Protocol build_base(const WignerFriendConfig& cfg) {
  SpaceLayout layout(
      {Subsystem{"W", 2}, Subsystem{"F", 2}, Subsystem{"spin", 2}});
  const Tolerances tol;

  const StateVector s0 = on_sub(layout, {"spin"}, cfg.spin_init);
  const StateVector s1f = on_sub(layout, {"spin"}, cfg.f_basis[0]);
  const StateVector s2f = on_sub(layout, {"spin"}, cfg.f_basis[1]);

  const std::string w_names[] = {"W"};
  const std::string f_names[] = {"F"};
  const SpaceLayout w_sub = layout.sub_layout(w_names);
  const SpaceLayout f_sub = layout.sub_layout(f_names);

  Protocol p;
  p.layout = layout;
  const StateVector factors[] = {StateVector::basis_state(w_sub, 0),
                                 StateVector::basis_state(f_sub, 0), s0};
  p.initial = tensor_state(factors, tol);

  // F entangles his probe with the spin in his own basis.
  p.events.push_back(controlled_flip_coupling(kTauF, layout, "F", "spin", s1f, s2f, tol));

  auto computational = [&](const std::string& name) {
    BasisGroup g;
    g.names = {name};
    const SpaceLayout gl = layout.sub_layout(g.names);
    for (std::size_t k = 0; k < gl.total_dim(); ++k) {
      g.vectors.push_back(StateVector::basis_state(gl, k));
    }
    return g;
  };
  auto pinned = [&](const std::string& name, std::size_t which) {
    BasisGroup g;
    g.names = {name};
    g.vectors = {StateVector::basis_state(layout.sub_layout(g.names), which)};
    return g;
  };

  // F's observable: probe pinned, spin enumerated in F's own basis. This is
  // the basis in which the nonvanishing paths are the four canonical ones.
  {
    auto groups = [&](std::size_t sel) {
      return std::vector<BasisGroup>{computational("W"), pinned("F", sel),
                                     BasisGroup{{"spin"}, {s1f, s2f}}};
    };
    MeasurementEvent m;
    m.time = kT1;
    m.observer = "F";
    m.registered = cfg.f_registered;
    m.observable = probe_observable(layout, "F", groups(1), groups(0), tol);
    p.events.push_back(std::move(m));
  }

  // W's coupling and the matching final basis.
  std::vector<BasisGroup> w_yes, w_no;
  switch (cfg.w_mode) {
    case WMode::spin: {
      const StateVector s1w = on_sub(layout, {"spin"}, cfg.w_basis[0]);
      const StateVector s2w = on_sub(layout, {"spin"}, cfg.w_basis[1]);
      p.events.push_back(
          controlled_flip_coupling(kTauW, layout, "W", "spin", s1w, s2w, tol));
      auto groups = [&](std::size_t sel) {
        return std::vector<BasisGroup>{pinned("W", sel), computational("F"),
                                       BasisGroup{{"spin"}, {s1w, s2w}}};
      };
      w_yes = groups(1);
      w_no = groups(0);
      break;
    }
    case WMode::probe: {
      const StateVector phi1 = on_sub(layout, {"F"}, cfg.w_basis[0]);
      const StateVector phi2 = on_sub(layout, {"F"}, cfg.w_basis[1]);
      p.events.push_back(
          controlled_flip_coupling(kTauW, layout, "W", "F", phi1, phi2, tol));
      auto groups = [&](std::size_t sel) {
        return std::vector<BasisGroup>{pinned("W", sel),
                                       BasisGroup{{"F"}, {phi1, phi2}},
                                       BasisGroup{{"spin"}, {s1f, s2f}}};
      };
      w_yes = groups(1);
      w_no = groups(0);
      break;
    }
    case WMode::composite: {
      const std::vector<std::string> fs_names = {"F", "spin"};
      const SpaceLayout fs = layout.sub_layout(fs_names);
      const StateVector fs1(fs, cfg.w_basis[0]);
      const StateVector fs2(fs, cfg.w_basis[1]);
      const StateVector seeds[] = {fs1, fs2};
      auto fs_basis = complete_orthonormal(fs, seeds, tol.projector);
      std::vector<StateVector> completion(fs_basis.begin() + 1, fs_basis.end());
      p.events.push_back(composite_basis_coupling(kTauW, layout, "W", fs_names, fs1,
                                                  completion, tol));
      auto groups = [&](std::size_t sel) {
        return std::vector<BasisGroup>{pinned("W", sel),
                                       BasisGroup{fs_names, fs_basis}};
      };
      w_yes = groups(1);
      w_no = groups(0);
      break;
    }
  }

  MeasurementEvent w_measure;
  w_measure.time = kT2;
  w_measure.observer = "W";
  w_measure.registered = true;
  w_measure.observable = probe_observable(layout, "W", w_yes, w_no, tol);
  p.events.push_back(std::move(w_measure));
  return p;
}

Protocol rename_subsystems(const Protocol& p, const std::map<std::string, std::string>& map) {
  auto rename = [&](const std::string& name) {
    auto it = map.find(name);
    return it == map.end() ? name : it->second;
  };
  auto rename_layout = [&](const SpaceLayout& l) {
    std::vector<Subsystem> subs = l.subsystems();
    for (auto& s : subs) s.name = rename(s.name);
    return SpaceLayout(std::move(subs));
  };

  Protocol out = p;
  out.layout = rename_layout(p.layout);
  out.initial.layout = rename_layout(p.initial.layout);
  for (auto& e : out.events) {
    if (auto* c = std::get_if<CouplingEvent>(&e)) {
      for (auto& t : c->targets) t = rename(t);
      c->unitary.layout = rename_layout(c->unitary.layout);
    } else {
      auto& m = std::get<MeasurementEvent>(e);
      for (auto& b : m.observable.branches) {
        b.projector.layout = rename_layout(b.projector.layout);
        for (auto& v : b.basis) v.layout = rename_layout(v.layout);
      }
    }
  }
  return out;
}

}  // namespace

Protocol build_case_c(const WignerFriendConfig& cfg) {
  if (cfg.w_mode != WMode::spin) {
    throw std::invalid_argument("case C expects w_mode 'spin'");
  }
  return build_wigner_friend(cfg);
}

Protocol build_case_d(const WignerFriendConfig& cfg) {
  if (cfg.w_mode != WMode::probe) {
    throw std::invalid_argument("case D expects w_mode 'probe'");
  }
  return build_wigner_friend(cfg);
}

Protocol build_case_f(const WignerFriendConfig& cfg) {
  if (cfg.w_mode != WMode::composite) {
    throw std::invalid_argument("case F expects w_mode 'composite'");
  }
  return build_wigner_friend(cfg);
}

Protocol build_wigner_friend(const WignerFriendConfig& cfg) {
  Protocol p = build_base(cfg);
  p = extend_chain(p, cfg.chain_length);
  p = erase_records(p, cfg.erasure);
  if (cfg.regroup > 0) {
    std::map<std::string, std::string> renames;
    for (int k = 1; k <= std::min(cfg.regroup, cfg.chain_length); ++k) {
      renames["R" + std::to_string(k)] = "FR" + std::to_string(k);
    }
    p = rename_subsystems(p, renames);
  }
  return p;
}

Protocol extend_chain(const Protocol& p, int k) {
  if (k < 0) throw std::invalid_argument("chain length must be nonnegative");
  if (k == 0) return p;

  const auto existing = record_indices(p.layout);
  const int base = existing.empty() ? 0 : existing.back();

  std::vector<Subsystem> subs = p.layout.subsystems();
  std::vector<std::string> new_names;
  for (int j = 1; j <= k; ++j) {
    new_names.push_back("R" + std::to_string(base + j));
    subs.push_back(Subsystem{new_names.back(), 2});
  }
  SpaceLayout layout(std::move(subs));

  Protocol out;
  out.layout = layout;
  out.tol = p.tol;

  const SpaceLayout rec_layout = layout.sub_layout(new_names);
  const std::size_t rec_dim = rec_layout.total_dim();

  // Fresh records start in |0>; the layouts concatenate to the extended one.
  out.initial = kron(p.initial, StateVector::basis_state(rec_layout, 0));

  auto extend_observable = [&](const ObservableDecomposition& obs) {
    ObservableDecomposition ext;
    ext.label = obs.label;
    for (const auto& b : obs.branches) {
      ObservableBranch nb;
      nb.eigenvalue = b.eigenvalue;
      nb.label = b.label;
      nb.projector = kron(b.projector, OperatorMatrix::identity(rec_layout));
      for (const auto& v : b.basis) {
        for (std::size_t r = 0; r < rec_dim; ++r) {
          nb.basis.push_back(kron(v, StateVector::basis_state(rec_layout, r)));
        }
      }
      ext.branches.push_back(std::move(nb));
    }
    return ext;
  };

  for (const auto& e : p.events) {
    if (const auto* c = std::get_if<CouplingEvent>(&e)) {
      out.events.push_back(*c);  // local matrices and targets are unaffected
    } else {
      const auto& m = std::get<MeasurementEvent>(e);
      MeasurementEvent nm;
      nm.time = m.time;
      nm.observer = m.observer;
      nm.registered = m.registered;
      nm.observable = extend_observable(m.observable);
      out.events.push_back(std::move(nm));
    }
  }

  // Copy couplings squeeze between F's coupling and whatever follows it.
  const std::size_t anchor = find_coupling_on(out, "F");
  const double t0 = event_time(out.events[anchor]);
  const double t1 = anchor + 1 < out.events.size()
                        ? event_time(out.events[anchor + 1])
                        : t0 + 1.0;
  std::vector<ProtocolEvent> copies;
  for (int j = 1; j <= k; ++j) {
    const double t = t0 + (t1 - t0) * static_cast<double>(j) / (k + 1);
    copies.push_back(cnot_coupling(t, layout, "F", new_names[static_cast<std::size_t>(j - 1)]));
  }
  out.events.insert(out.events.begin() + static_cast<std::ptrdiff_t>(anchor) + 1,
                    copies.begin(), copies.end());
  return out;
}

Protocol erase_records(const Protocol& p, const std::vector<int>& subset) {
  if (subset.empty()) return p;
  std::vector<int> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  Protocol out = p;
  const std::size_t w_coupling = find_coupling_on(out, "W");
  const double tw = event_time(out.events[w_coupling]);
  const double tp = w_coupling > 0 ? event_time(out.events[w_coupling - 1])
                                   : tw - 1.0;
  std::vector<ProtocolEvent> inverses;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::string name = record_subsystem(out.layout, sorted[i]);
    const double t = tp + (tw - tp) * static_cast<double>(i + 1) / (sorted.size() + 1);
    inverses.push_back(cnot_coupling(t, out.layout, "F", name));
  }
  out.events.insert(out.events.begin() + static_cast<std::ptrdiff_t>(w_coupling),
                    inverses.begin(), inverses.end());
  return out;
}

bool surviving_record_check(const Protocol& p) {
  const auto records = record_indices(p.layout);
  if (records.empty()) return false;

  const std::size_t w_coupling = find_coupling_on(p, "W");
  const double tw = event_time(p.events[w_coupling]);
  const auto& w_targets = std::get<CouplingEvent>(p.events[w_coupling]).targets;

  bool survives = false;
  for (int idx : records) {
    const std::string name = record_subsystem(p.layout, idx);
    int touches = 0;
    for (const auto& e : p.events) {
      const auto* c = std::get_if<CouplingEvent>(&e);
      if (!c || event_time(e) >= tw) continue;
      if (std::find(c->targets.begin(), c->targets.end(), name) != c->targets.end()) {
        ++touches;
      }
    }
    const bool engaged_by_w =
        std::find(w_targets.begin(), w_targets.end(), name) != w_targets.end();
    if (touches % 2 == 1 && !engaged_by_w) {
      survives = true;
      break;
    }
  }

  if (survives) {
    // A surviving record pins the statistics to the registered values.
    const MeasurementEvent* first = nullptr;
    for (const auto& e : p.events) {
      if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
        first = m;
        break;
      }
    }
    if (first) {
      const Protocol reg = with_registered(p, first->observer, true);
      const double a = final_outcome_probability(p, yes_w_slot());
      const double b = final_outcome_probability(reg, yes_w_slot());
      if (std::abs(a - b) > 1e-10) {
        throw std::logic_error("surviving record does not pin the final statistics");
      }
    }
  }
  return survives;
}

OutcomeSlot yes_w_slot() { return OutcomeSlot{"W", 1.0, "yes"}; }

ScenarioReport registering_gap(const WignerFriendConfig& cfg) {
  const Protocol built = build_wigner_friend(cfg);
  const Protocol reg = with_registered(built, "F", true);
  const Protocol unreg = with_registered(built, "F", false);

  ScenarioReport report;
  const auto paths = enumerate_virtual_paths(reg);
  for (const auto& path : paths) {
    const std::size_t bf = path.nodes[0].branch;
    const std::size_t bw = path.nodes[1].branch;
    const std::size_t idx =
        cfg.w_mode == WMode::composite ? bw * 2 + bf : bf * 2 + bw;
    report.amplitudes[idx] += path.amplitude;
  }

  // The table reflects the protocol as configured: four rows with F
  // registered, the two coherent rows without.
  for (const auto& rec : full_distribution(built)) {
    report.joint_table.push_back({rec.outcome, rec.probability});
  }
  report.p_yes_registered = final_outcome_probability(reg, yes_w_slot());
  report.p_yes_unregistered = final_outcome_probability(unreg, yes_w_slot());
  report.gap = report.p_yes_unregistered - report.p_yes_registered;
  report.interference_term = interference_report(reg, yes_w_slot()).interference_term;
  report.record_survival = surviving_record_check(built);

  if (cfg.w_mode != WMode::composite && std::abs(report.gap) > 1e-12) {
    throw std::logic_error("registering gap must vanish outside composite engagement");
  }
  return report;
}

}  // namespace pathwig
