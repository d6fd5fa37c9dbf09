#include "pathwig/scenario_format.hpp"

#include <algorithm>
#include <cmath>

#include "pathwig/scenarios.hpp"

namespace pathwig {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(ScenarioErrorKind kind, const std::string& path,
                       const std::string& msg) {
  throw ScenarioError(kind, path, msg);
}

[[noreturn]] void fail_schema(const std::string& path, const std::string& msg) {
  fail(ScenarioErrorKind::schema, path, msg);
}

const ojson& require_object(const ojson& node, const std::string& path) {
  if (!node.is_object()) fail_schema(path, "expected an object");
  return node;
}

const ojson& require_array(const ojson& node, const std::string& path) {
  if (!node.is_array()) fail_schema(path, "expected an array");
  return node;
}

double require_number(const ojson& node, const std::string& path) {
  if (!node.is_number()) fail_schema(path, "expected a number");
  return node.get<double>();
}

bool require_bool(const ojson& node, const std::string& path) {
  if (!node.is_boolean()) fail_schema(path, "expected a boolean");
  return node.get<bool>();
}

std::string require_string(const ojson& node, const std::string& path) {
  if (!node.is_string()) fail_schema(path, "expected a string");
  return node.get<std::string>();
}

const ojson* find_key(const ojson& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const ojson& require_key(const ojson& obj, const char* key, const std::string& path) {
  const ojson* v = find_key(obj, key);
  if (!v) fail_schema(path, std::string("missing required field '") + key + "'");
  return *v;
}

void check_keys(const ojson& obj, const std::string& path,
                std::initializer_list<const char*> allowed, bool lenient) {
  if (lenient) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& key = it.key();
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      fail_schema(path, "unknown field '" + key + "'");
    }
  }
}

cx parse_complex(const ojson& node, const std::string& path) {
  if (!node.is_array() || node.size() != 2) {
    fail_schema(path, "complex numbers are [re, im] pairs");
  }
  return cx{require_number(node[0], path + "/0"), require_number(node[1], path + "/1")};
}

std::vector<cx> parse_cvector(const ojson& node, const std::string& path,
                              std::size_t expected) {
  require_array(node, path);
  if (node.size() != expected) {
    fail_schema(path, "expected " + std::to_string(expected) + " complex entries, got " +
                          std::to_string(node.size()));
  }
  std::vector<cx> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    out.push_back(parse_complex(node[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<cx> parse_cmatrix(const ojson& node, const std::string& path, std::size_t dim) {
  require_array(node, path);
  if (node.size() != dim) {
    fail_schema(path, "expected " + std::to_string(dim) + " matrix rows, got " +
                          std::to_string(node.size()));
  }
  std::vector<cx> entries;
  entries.reserve(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    auto row = parse_cvector(node[r], path + "/" + std::to_string(r), dim);
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return entries;
}

ojson emit_complex(const cx& z) { return ojson::array({std::real(z), std::imag(z)}); }

ojson emit_cvector(std::span<const cx> v) {
  ojson out = ojson::array();
  for (const cx& z : v) out.push_back(emit_complex(z));
  return out;
}

ojson emit_cmatrix(const OperatorMatrix& m) {
  ojson out = ojson::array();
  const std::size_t d = m.dim();
  for (std::size_t r = 0; r < d; ++r) {
    out.push_back(emit_cvector(std::span(&m.entries[r * d], d)));
  }
  return out;
}

std::size_t line_of_byte(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

struct EventResult {
  ProtocolEvent event;
  ojson canon;
};

EventResult parse_couple(const ojson& node, const std::string& path,
                         const SpaceLayout& layout, bool lenient) {
  require_object(node, path);
  check_keys(node, path,
             {"time", "targets", "matrix", "cnot", "controlled_flip", "composite_flip"},
             lenient);
  const double time = require_number(require_key(node, "time", path), path + "/time");

  const bool has_matrix = find_key(node, "matrix") != nullptr;
  const bool has_cnot = find_key(node, "cnot") != nullptr;
  const bool has_cflip = find_key(node, "controlled_flip") != nullptr;
  const bool has_comp = find_key(node, "composite_flip") != nullptr;
  const int forms = int(has_matrix) + int(has_cnot) + int(has_cflip) + int(has_comp);
  if (forms != 1) {
    fail_schema(path, "a couple event needs exactly one of matrix, cnot, "
                      "controlled_flip, composite_flip");
  }

  auto sub_dim = [&](const std::vector<std::string>& names, const std::string& where) {
    std::size_t d = 1;
    for (const auto& n : names) {
      if (!layout.has(n)) fail_schema(where, "unknown subsystem '" + n + "'");
      d *= layout.dim_at(layout.position(n));
    }
    return d;
  };
  auto parse_targets = [&](const ojson& arr, const std::string& where) {
    require_array(arr, where);
    if (arr.empty()) fail_schema(where, "targets must not be empty");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      names.push_back(require_string(arr[i], where + "/" + std::to_string(i)));
    }
    return names;
  };

  ojson canon;
  canon["time"] = time;
  try {
    if (has_matrix) {
      const auto targets =
          parse_targets(require_key(node, "targets", path), path + "/targets");
      const std::size_t d = sub_dim(targets, path + "/targets");
      auto entries = parse_cmatrix(*find_key(node, "matrix"), path + "/matrix", d);
      OperatorMatrix local(layout.sub_layout(targets), std::move(entries), true);
      canon["targets"] = targets;
      canon["matrix"] = emit_cmatrix(local);
      return {CouplingEvent{time, targets, std::move(local)}, std::move(canon)};
    }
    if (has_cnot) {
      const ojson& g = require_object(*find_key(node, "cnot"), path + "/cnot");
      check_keys(g, path + "/cnot", {"control", "target"}, lenient);
      const std::string control =
          require_string(require_key(g, "control", path + "/cnot"), path + "/cnot/control");
      const std::string target =
          require_string(require_key(g, "target", path + "/cnot"), path + "/cnot/target");
      sub_dim({control, target}, path + "/cnot");
      canon["cnot"] = ojson{{"control", control}, {"target", target}};
      return {cnot_coupling(time, layout, control, target), std::move(canon)};
    }
    if (has_cflip) {
      const std::string p = path + "/controlled_flip";
      const ojson& g = require_object(*find_key(node, "controlled_flip"), p);
      check_keys(g, p, {"pointer", "system", "basis"}, lenient);
      const std::string pointer = require_string(require_key(g, "pointer", p), p + "/pointer");
      const std::string system = require_string(require_key(g, "system", p), p + "/system");
      const std::size_t d = sub_dim({system}, p);
      sub_dim({pointer}, p);
      const ojson& basis = require_array(require_key(g, "basis", p), p + "/basis");
      if (basis.size() != 2) fail_schema(p + "/basis", "expected a pair of states");
      const SpaceLayout sys = layout.sub_layout(std::vector<std::string>{system});
      StateVector b1(sys, parse_cvector(basis[0], p + "/basis/0", d));
      StateVector b2(sys, parse_cvector(basis[1], p + "/basis/1", d));
      canon["controlled_flip"] =
          ojson{{"pointer", pointer},
                {"system", system},
                {"basis", ojson::array({emit_cvector(b1.entries), emit_cvector(b2.entries)})}};
      return {controlled_flip_coupling(time, layout, pointer, system, b1, b2),
              std::move(canon)};
    }
    const std::string p = path + "/composite_flip";
    const ojson& g = require_object(*find_key(node, "composite_flip"), p);
    check_keys(g, p, {"pointer", "targets", "distinguished", "completion"}, lenient);
    const std::string pointer = require_string(require_key(g, "pointer", p), p + "/pointer");
    const auto targets = parse_targets(require_key(g, "targets", p), p + "/targets");
    const std::size_t d = sub_dim(targets, p + "/targets");
    sub_dim({pointer}, p);
    const SpaceLayout sys = layout.sub_layout(targets);
    StateVector dist(sys, parse_cvector(require_key(g, "distinguished", p),
                                        p + "/distinguished", d));
    const ojson& comp = require_array(require_key(g, "completion", p), p + "/completion");
    std::vector<StateVector> completion;
    ojson comp_canon = ojson::array();
    for (std::size_t i = 0; i < comp.size(); ++i) {
      completion.emplace_back(
          sys, parse_cvector(comp[i], p + "/completion/" + std::to_string(i), d));
      comp_canon.push_back(emit_cvector(completion.back().entries));
    }
    canon["composite_flip"] = ojson{{"pointer", pointer},
                                    {"targets", targets},
                                    {"distinguished", emit_cvector(dist.entries)},
                                    {"completion", std::move(comp_canon)}};
    return {composite_basis_coupling(time, layout, pointer, targets, dist, completion),
            std::move(canon)};
  } catch (const std::invalid_argument& e) {
    fail(ScenarioErrorKind::protocol, path, e.what());
  }
}

EventResult parse_measure(const ojson& node, const std::string& path,
                          const SpaceLayout& layout, bool lenient) {
  require_object(node, path);
  check_keys(node, path, {"time", "observer", "registered", "observable"}, lenient);
  const double time = require_number(require_key(node, "time", path), path + "/time");
  const std::string observer =
      require_string(require_key(node, "observer", path), path + "/observer");
  const bool registered =
      require_bool(require_key(node, "registered", path), path + "/registered");

  const std::string op = path + "/observable";
  const ojson& obs_node = require_object(require_key(node, "observable", path), op);
  check_keys(obs_node, op, {"label", "branches"}, lenient);

  ObservableDecomposition obs;
  if (const ojson* l = find_key(obs_node, "label")) {
    obs.label = require_string(*l, op + "/label");
  }

  const ojson& branches = require_array(require_key(obs_node, "branches", op), op + "/branches");
  if (branches.empty()) fail_schema(op + "/branches", "observable needs branches");

  ojson canon_branches = ojson::array();
  const std::size_t d = layout.total_dim();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const std::string bp = op + "/branches/" + std::to_string(i);
    const ojson& bn = require_object(branches[i], bp);
    check_keys(bn, bp, {"eigenvalue", "label", "basis_states", "projector"}, lenient);
    ObservableBranch branch;
    branch.eigenvalue = require_number(require_key(bn, "eigenvalue", bp), bp + "/eigenvalue");
    if (const ojson* l = find_key(bn, "label")) {
      branch.label = require_string(*l, bp + "/label");
    }
    const ojson* states = find_key(bn, "basis_states");
    const ojson* proj = find_key(bn, "projector");
    if ((states != nullptr) == (proj != nullptr)) {
      fail_schema(bp, "a branch needs exactly one of basis_states or projector");
    }
    ojson cb;
    cb["eigenvalue"] = branch.eigenvalue;
    if (!branch.label.empty()) cb["label"] = branch.label;
    if (states) {
      require_array(*states, bp + "/basis_states");
      if (states->empty()) fail_schema(bp + "/basis_states", "needs at least one state");
      OperatorMatrix acc = OperatorMatrix::zero(layout);
      ojson cs = ojson::array();
      for (std::size_t s = 0; s < states->size(); ++s) {
        StateVector v(layout, parse_cvector((*states)[s],
                                            bp + "/basis_states/" + std::to_string(s), d));
        acc = add(acc, outer(v, v));
        cs.push_back(emit_cvector(v.entries));
        branch.basis.push_back(std::move(v));
      }
      branch.projector = std::move(acc);
      cb["basis_states"] = std::move(cs);
    } else {
      branch.projector =
          OperatorMatrix(layout, parse_cmatrix(*proj, bp + "/projector", d));
      cb["projector"] = emit_cmatrix(branch.projector);
    }
    canon_branches.push_back(std::move(cb));
    obs.branches.push_back(std::move(branch));
  }

  ojson canon;
  canon["time"] = time;
  canon["observer"] = observer;
  canon["registered"] = registered;
  ojson canon_obs;
  if (!obs.label.empty()) canon_obs["label"] = obs.label;
  canon_obs["branches"] = std::move(canon_branches);
  canon["observable"] = std::move(canon_obs);

  MeasurementEvent m;
  m.time = time;
  m.observer = observer;
  m.registered = registered;
  m.observable = std::move(obs);
  return {std::move(m), std::move(canon)};
}

std::pair<Query, ojson> parse_query(const ojson& node, const std::string& path,
                                    bool lenient) {
  require_object(node, path);
  if (node.size() != 1) {
    fail_schema(path, "a query is an object with exactly one key");
  }
  const std::string name = node.begin().key();
  const ojson& body = require_object(node.begin().value(), path + "/" + name);
  const std::string bp = path + "/" + name;

  auto final_of = [&]() {
    return require_string(require_key(body, "final", bp), bp + "/final");
  };

  ojson canon_body = ojson::object();
  if (name == "distribution") {
    check_keys(body, bp, {"report_eps"}, lenient);
    DistributionQuery q;
    if (const ojson* e = find_key(body, "report_eps")) {
      q.report_eps = require_number(*e, bp + "/report_eps");
      canon_body["report_eps"] = *q.report_eps;
    }
    return {q, ojson{{name, std::move(canon_body)}}};
  }
  if (name == "paths" || name == "interference" || name == "wigner_comparison") {
    check_keys(body, bp, {"final"}, lenient);
    const std::string final_label = final_of();
    canon_body["final"] = final_label;
    ojson canon = ojson{{name, std::move(canon_body)}};
    if (name == "paths") return {PathsQuery{final_label}, std::move(canon)};
    if (name == "interference") return {InterferenceQuery{final_label}, std::move(canon)};
    return {WignerComparisonQuery{final_label}, std::move(canon)};
  }
  if (name == "compare_oracle") {
    check_keys(body, bp, {"tolerance", "rebasis_sweeps", "seed"}, lenient);
    CompareOracleQuery q;
    if (const ojson* t = find_key(body, "tolerance")) {
      q.tolerance = require_number(*t, bp + "/tolerance");
      canon_body["tolerance"] = *q.tolerance;
    }
    if (const ojson* s = find_key(body, "rebasis_sweeps")) {
      if (!s->is_number_integer()) fail_schema(bp + "/rebasis_sweeps", "expected an integer");
      q.rebasis_sweeps = s->get<int>();
      canon_body["rebasis_sweeps"] = *q.rebasis_sweeps;
    }
    if (const ojson* s = find_key(body, "seed")) {
      if (!s->is_number_unsigned()) fail_schema(bp + "/seed", "expected a nonnegative integer");
      q.seed = s->get<std::uint64_t>();
      canon_body["seed"] = *q.seed;
    }
    return {q, ojson{{name, std::move(canon_body)}}};
  }
  fail_schema(path, "unknown query '" + name + "'");
}

}  // namespace

ScenarioDocument ScenarioDocument::parse(std::string_view text, bool lenient) {
  ojson root;
  try {
    root = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ScenarioErrorKind::syntax,
         "line " + std::to_string(line_of_byte(text, e.byte)), e.what());
  }

  require_object(root, "");
  check_keys(root, "", {"schema_version", "subsystems", "initial", "events", "queries"},
             lenient);

  ScenarioDocument doc;
  ojson& canon = doc.canon_;

  const ojson& ver = require_key(root, "schema_version", "");
  if (!ver.is_number_integer() || ver.get<int>() != 1) {
    fail_schema("/schema_version", "unsupported schema_version (expected 1)");
  }
  canon["schema_version"] = 1;

  // subsystems
  const ojson& subs = require_array(require_key(root, "subsystems", ""), "/subsystems");
  if (subs.empty()) fail_schema("/subsystems", "needs at least one subsystem");
  std::vector<Subsystem> subsystems;
  ojson canon_subs = ojson::array();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string sp = "/subsystems/" + std::to_string(i);
    const ojson& s = require_object(subs[i], sp);
    check_keys(s, sp, {"name", "dim"}, lenient);
    Subsystem sub;
    sub.name = require_string(require_key(s, "name", sp), sp + "/name");
    const ojson& dim = require_key(s, "dim", sp);
    if (!dim.is_number_unsigned()) fail_schema(sp + "/dim", "expected a positive integer");
    sub.dim = dim.get<std::size_t>();
    canon_subs.push_back(ojson{{"name", sub.name}, {"dim", sub.dim}});
    subsystems.push_back(std::move(sub));
  }
  SpaceLayout layout;
  try {
    layout = SpaceLayout(std::move(subsystems));
  } catch (const std::invalid_argument& e) {
    fail_schema("/subsystems", e.what());
  }
  canon["subsystems"] = std::move(canon_subs);

  // initial state
  const ojson& init = require_object(require_key(root, "initial", ""), "/initial");
  check_keys(init, "/initial", {"product", "vector"}, lenient);
  const ojson* product = find_key(init, "product");
  const ojson* vec = find_key(init, "vector");
  if ((product != nullptr) == (vec != nullptr)) {
    fail_schema("/initial", "expected exactly one of product or vector");
  }
  doc.protocol_.layout = layout;
  try {
    if (product) {
      require_object(*product, "/initial/product");
      if (product->size() != layout.size()) {
        fail_schema("/initial/product", "needs one state per subsystem");
      }
      std::vector<StateVector> factors;
      ojson canon_prod;
      for (const auto& s : layout.subsystems()) {
        const ojson* f = find_key(*product, s.name.c_str());
        if (!f) fail_schema("/initial/product", "missing subsystem '" + s.name + "'");
        const std::string fp = "/initial/product/" + s.name;
        factors.emplace_back(layout.sub_layout(std::vector<std::string>{s.name}),
                             parse_cvector(*f, fp, s.dim));
        canon_prod[s.name] = emit_cvector(factors.back().entries);
      }
      doc.protocol_.initial = tensor_state(factors);
      canon["initial"] = ojson{{"product", std::move(canon_prod)}};
    } else {
      doc.protocol_.initial =
          StateVector(layout, parse_cvector(*vec, "/initial/vector", layout.total_dim()));
      canon["initial"] = ojson{{"vector", emit_cvector(doc.protocol_.initial.entries)}};
    }
  } catch (const std::invalid_argument& e) {
    fail(ScenarioErrorKind::protocol, "/initial", e.what());
  }

  // events
  const ojson& events = require_array(require_key(root, "events", ""), "/events");
  ojson canon_events = ojson::array();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string ep = "/events/" + std::to_string(i);
    const ojson& e = require_object(events[i], ep);
    if (e.size() != 1) fail_schema(ep, "an event is an object with exactly one key");
    const std::string kind = e.begin().key();
    if (kind == "couple") {
      auto res = parse_couple(e.begin().value(), ep + "/couple", layout, lenient);
      canon_events.push_back(ojson{{"couple", std::move(res.canon)}});
      doc.protocol_.events.push_back(std::move(res.event));
    } else if (kind == "measure") {
      auto res = parse_measure(e.begin().value(), ep + "/measure", layout, lenient);
      canon_events.push_back(ojson{{"measure", std::move(res.canon)}});
      doc.protocol_.events.push_back(std::move(res.event));
    } else {
      fail_schema(ep, "unknown event kind '" + kind + "'");
    }
  }
  canon["events"] = std::move(canon_events);

  // queries (optional)
  if (const ojson* queries = find_key(root, "queries")) {
    require_array(*queries, "/queries");
    ojson canon_queries = ojson::array();
    for (std::size_t i = 0; i < queries->size(); ++i) {
      auto [query, cq] = parse_query((*queries)[i], "/queries/" + std::to_string(i), lenient);
      doc.queries_.push_back(std::move(query));
      canon_queries.push_back(std::move(cq));
    }
    canon["queries"] = std::move(canon_queries);
  }

  const auto diags = validate(doc.protocol_);
  if (!diags.empty()) {
    std::string msg = "protocol validation failed";
    for (const auto& d : diags) msg += "; " + d.where + ": " + d.message;
    fail(ScenarioErrorKind::protocol, "", msg);
  }
  return doc;
}

std::string ScenarioDocument::canonical_text() const { return canon_.dump(2) + "\n"; }

std::vector<Query> parse_queries_json(const nlohmann::ordered_json& array, bool lenient) {
  require_array(array, "/queries");
  std::vector<Query> out;
  for (std::size_t i = 0; i < array.size(); ++i) {
    out.push_back(parse_query(array[i], "/queries/" + std::to_string(i), lenient).first);
  }
  return out;
}

std::vector<std::string> preset_names() { return {"case-c", "case-d", "case-f"}; }

namespace {

ojson gate_json(const WignerFriendConfig& cfg, const Protocol& p) {
  switch (cfg.w_mode) {
    case WMode::spin:
      return ojson{{"controlled_flip",
                    ojson{{"pointer", "W"},
                          {"system", "spin"},
                          {"basis", ojson::array({emit_cvector(cfg.w_basis[0]),
                                                  emit_cvector(cfg.w_basis[1])})}}}};
    case WMode::probe:
      return ojson{{"controlled_flip",
                    ojson{{"pointer", "W"},
                          {"system", "F"},
                          {"basis", ojson::array({emit_cvector(cfg.w_basis[0]),
                                                  emit_cvector(cfg.w_basis[1])})}}}};
    case WMode::composite: {
      const std::vector<std::string> fs_names = {"F", "spin"};
      const SpaceLayout fs = p.layout.sub_layout(fs_names);
      const StateVector seeds[] = {StateVector(fs, cfg.w_basis[0]),
                                   StateVector(fs, cfg.w_basis[1])};
      const auto fs_basis = complete_orthonormal(fs, seeds, 1e-10);
      ojson completion = ojson::array();
      for (std::size_t i = 1; i < fs_basis.size(); ++i) {
        completion.push_back(emit_cvector(fs_basis[i].entries));
      }
      return ojson{{"composite_flip", ojson{{"pointer", "W"},
                                            {"targets", fs_names},
                                            {"distinguished", emit_cvector(cfg.w_basis[0])},
                                            {"completion", std::move(completion)}}}};
    }
  }
  throw std::logic_error("unreachable");
}

ojson measure_json(const MeasurementEvent& m) {
  ojson branches = ojson::array();
  for (const auto& b : m.observable.branches) {
    ojson cb;
    cb["eigenvalue"] = b.eigenvalue;
    if (!b.label.empty()) cb["label"] = b.label;
    ojson states = ojson::array();
    for (const auto& v : b.basis) states.push_back(emit_cvector(v.entries));
    cb["basis_states"] = std::move(states);
    branches.push_back(std::move(cb));
  }
  ojson obs;
  if (!m.observable.label.empty()) obs["label"] = m.observable.label;
  obs["branches"] = std::move(branches);
  return ojson{{"measure", ojson{{"time", m.time},
                                 {"observer", m.observer},
                                 {"registered", m.registered},
                                 {"observable", std::move(obs)}}}};
}

}  // namespace

ScenarioDocument preset_scenario(const std::string& name) {
  WignerFriendConfig cfg;
  if (name == "case-c") {
    cfg = WignerFriendConfig::case_c();
  } else if (name == "case-d") {
    cfg = WignerFriendConfig::case_d();
  } else if (name == "case-f") {
    cfg = WignerFriendConfig::case_f();
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  const Protocol p = build_wigner_friend(cfg);

  ojson doc;
  doc["schema_version"] = 1;
  ojson subs = ojson::array();
  for (const auto& s : p.layout.subsystems()) {
    subs.push_back(ojson{{"name", s.name}, {"dim", s.dim}});
  }
  doc["subsystems"] = std::move(subs);

  ojson prod;
  prod["W"] = emit_cvector(std::vector<cx>{cx{1.0, 0.0}, cx{0.0, 0.0}});
  prod["F"] = emit_cvector(std::vector<cx>{cx{1.0, 0.0}, cx{0.0, 0.0}});
  prod["spin"] = emit_cvector(cfg.spin_init);
  doc["initial"] = ojson{{"product", std::move(prod)}};

  ojson events = ojson::array();
  {
    ojson g = ojson{{"time", event_time(p.events[0])},
                    {"controlled_flip",
                     ojson{{"pointer", "F"},
                           {"system", "spin"},
                           {"basis", ojson::array({emit_cvector(cfg.f_basis[0]),
                                                   emit_cvector(cfg.f_basis[1])})}}}};
    events.push_back(ojson{{"couple", std::move(g)}});
  }
  events.push_back(measure_json(std::get<MeasurementEvent>(p.events[1])));
  {
    ojson g;
    g["time"] = event_time(p.events[2]);
    const ojson gate = gate_json(cfg, p);
    for (const auto& [k, v] : gate.items()) g[k] = v;
    events.push_back(ojson{{"couple", std::move(g)}});
  }
  events.push_back(measure_json(std::get<MeasurementEvent>(p.events[3])));
  doc["events"] = std::move(events);

  doc["queries"] =
      ojson::array({ojson{{"distribution", ojson::object()}},
                    ojson{{"compare_oracle", ojson::object()}}});

  return ScenarioDocument::parse(doc.dump(2) + "\n");
}

}  // namespace pathwig
