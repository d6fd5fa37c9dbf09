#include "pathwig/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace pathwig {

const ObservableBranch* ObservableDecomposition::find_eigenvalue(double eigenvalue) const {
  for (const auto& b : branches) {
    if (b.eigenvalue == eigenvalue) return &b;  // eigenvalues are canonical reals
  }
  return nullptr;
}

const ObservableBranch* ObservableDecomposition::find_label(std::string_view name) const {
  for (const auto& b : branches) {
    if (b.label == name) return &b;
  }
  return nullptr;
}

OperatorMatrix ObservableDecomposition::weighted_sum() const {
  OperatorMatrix acc = OperatorMatrix::zero(branches.front().projector.layout);
  for (const auto& b : branches) {
    acc = add(acc, scaled(b.projector, cx{b.eigenvalue, 0.0}));
  }
  return acc;
}

double event_time(const ProtocolEvent& e) {
  return std::visit([](const auto& ev) { return ev.time; }, e);
}

bool same_outcome(const OutcomeSlot& a, const OutcomeSlot& b) {
  return a.observer == b.observer && a.eigenvalue == b.eigenvalue;
}

bool same_outcome(const OutcomeSequence& a, const OutcomeSequence& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_outcome(a[i], b[i])) return false;
  }
  return true;
}

std::string outcome_text(const OutcomeSlot& slot) {
  std::string head = slot.label;
  if (head.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", slot.eigenvalue);
    head = buf;
  }
  return head + "^" + slot.observer;
}

std::string outcome_text(const OutcomeSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += outcome_text(seq[i]);
  }
  return out;
}

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "protocol validation failed:";
        for (const auto& d : diags) os << "\n  " << d.where << ": " << d.message;
        return os.str();
      }()),
      diagnostics(std::move(diags)) {}

void require_valid(const Protocol& p) {
  auto diags = validate(p);
  if (!diags.empty()) throw ValidationError(std::move(diags));
}

namespace {

double max_abs_entry(const OperatorMatrix& m) {
  double mx = 0.0;
  for (const cx& z : m.entries) mx = std::max(mx, std::abs(z));
  return mx;
}

void check_observable(const ObservableDecomposition& obs, const SpaceLayout& layout,
                      const Tolerances& tol, const std::string& where,
                      std::vector<Diagnostic>& out) {
  if (obs.branches.empty()) {
    out.push_back({where, "observable '" + obs.label + "' has no branches"});
    return;
  }
  for (std::size_t i = 0; i < obs.branches.size(); ++i) {
    const auto& b = obs.branches[i];
    const std::string bw = where + ".branches[" + std::to_string(i) + "]";
    if (!(b.projector.layout == layout)) {
      out.push_back({bw, "projector is not defined on the full layout"});
      return;
    }
    if (!is_hermitian(b.projector, tol.projector)) {
      out.push_back({bw, "projector is not Hermitian"});
    }
    if (!is_idempotent(b.projector, tol.projector)) {
      out.push_back({bw, "projector is not idempotent"});
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (obs.branches[j].eigenvalue == b.eigenvalue) {
        out.push_back({bw, "duplicate eigenvalue in observable '" + obs.label + "'"});
      }
      if (max_abs_entry(compose(obs.branches[j].projector, b.projector)) > tol.projector) {
        out.push_back({bw, "projectors of branches " + std::to_string(j) + " and " +
                               std::to_string(i) + " are not orthogonal"});
      }
    }
    if (!b.basis.empty()) {
      const std::size_t rank =
          static_cast<std::size_t>(std::llround(std::real(trace(b.projector))));
      if (b.basis.size() != rank) {
        out.push_back({bw, "branch basis size does not match projector rank"});
      }
      for (std::size_t u = 0; u < b.basis.size(); ++u) {
        for (std::size_t v = 0; v <= u; ++v) {
          const cx g = inner(b.basis[u], b.basis[v]);
          const cx want = (u == v) ? cx{1.0, 0.0} : cx{0.0, 0.0};
          if (std::abs(g - want) > tol.projector) {
            out.push_back({bw, "branch basis is not orthonormal"});
            u = b.basis.size();  // one diagnostic is enough
            break;
          }
        }
      }
      for (const auto& v : b.basis) {
        const StateVector pv = apply(b.projector, v);
        double resid = 0.0;
        for (std::size_t k = 0; k < pv.entries.size(); ++k) {
          resid = std::max(resid, std::abs(pv.entries[k] - v.entries[k]));
        }
        if (resid > tol.projector) {
          out.push_back({bw, "branch basis vector lies outside the projector range"});
          break;
        }
      }
    }
  }
  OperatorMatrix sum = OperatorMatrix::zero(layout);
  for (const auto& b : obs.branches) sum = add(sum, b.projector);
  if (max_abs_diff(sum, OperatorMatrix::identity(layout)) > tol.projector) {
    out.push_back({where, "incomplete observable '" + obs.label +
                              "': branch projectors do not sum to the identity"});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Protocol& p) {
  std::vector<Diagnostic> out;
  const Tolerances& tol = p.tol;

  if (!(p.initial.layout == p.layout)) {
    out.push_back({"initial", "initial state layout does not match the protocol layout"});
    return out;
  }
  if (std::abs(p.initial.norm() - 1.0) > tol.norm) {
    out.push_back({"initial", "initial state is not normalized"});
  }

  double prev_time = -std::numeric_limits<double>::infinity();
  bool any_registered = false;
  for (std::size_t i = 0; i < p.events.size(); ++i) {
    const std::string where = "events[" + std::to_string(i) + "]";
    const double t = event_time(p.events[i]);
    if (!(t > prev_time)) {
      out.push_back({where, "non-increasing event times"});
    }
    prev_time = t;

    if (const auto* c = std::get_if<CouplingEvent>(&p.events[i])) {
      std::size_t local_dim = 1;
      bool targets_ok = true;
      for (std::size_t a = 0; a < c->targets.size(); ++a) {
        if (!p.layout.has(c->targets[a])) {
          out.push_back({where, "unknown coupling target '" + c->targets[a] + "'"});
          targets_ok = false;
          continue;
        }
        local_dim *= p.layout.dim_at(p.layout.position(c->targets[a]));
        for (std::size_t b = 0; b < a; ++b) {
          if (c->targets[a] == c->targets[b]) {
            out.push_back({where, "duplicate coupling target '" + c->targets[a] + "'"});
            targets_ok = false;
          }
        }
      }
      if (targets_ok && local_dim != c->unitary.dim()) {
        out.push_back({where, "coupling matrix dimension does not match its targets"});
      } else if (targets_ok && !is_unitary(c->unitary, tol.unitary)) {
        out.push_back({where, "coupling matrix fails the unitarity bound"});
      }
    } else {
      const auto& m = std::get<MeasurementEvent>(p.events[i]);
      if (m.registered) any_registered = true;
      check_observable(m.observable, p.layout, tol,
                       where + ".observable", out);
    }
  }
  if (!any_registered) {
    out.push_back({"events", "no registered measurement event"});
  }
  return out;
}

std::vector<StateVector> range_basis(const OperatorMatrix& projector, double tol) {
  const std::size_t d = projector.dim();
  const std::size_t rank =
      static_cast<std::size_t>(std::llround(std::real(trace(projector))));
  std::vector<std::vector<cx>> cols(d, std::vector<cx>(d));
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) cols[c][r] = projector.at(r, c);
  }
  auto col_norm = [&](const std::vector<cx>& v) {
    double s = 0.0;
    for (const cx& z : v) s += std::norm(z);
    return std::sqrt(s);
  };
  std::vector<StateVector> basis;
  basis.reserve(rank);
  for (std::size_t step = 0; step < rank; ++step) {
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double nn = col_norm(cols[c]);
      if (nn > best + 1e-12) {  // strictly-better pivot keeps ties at lowest index
        best = nn;
        pivot = c;
      }
    }
    if (best <= std::max(tol, 1e-7)) {
      throw std::invalid_argument("projector rank is below its trace; range extraction failed");
    }
    std::vector<cx> b = cols[pivot];
    for (cx& z : b) z /= best;
    for (std::size_t c = 0; c < d; ++c) {
      cx overlap{0.0, 0.0};
      for (std::size_t r = 0; r < d; ++r) overlap += std::conj(b[r]) * cols[c][r];
      for (std::size_t r = 0; r < d; ++r) cols[c][r] -= overlap * b[r];
    }
    basis.emplace_back(projector.layout, std::move(b));
  }
  return basis;
}

void ensure_branch_bases(ObservableDecomposition& obs, double tol) {
  for (auto& b : obs.branches) {
    if (b.basis.empty()) b.basis = range_basis(b.projector, tol);
  }
}

std::vector<StateVector> grouped_product_basis(const SpaceLayout& layout,
                                               std::span<const BasisGroup> groups) {
  // Groups must tile the layout contiguously, in order.
  std::size_t pos = 0;
  for (const auto& g : groups) {
    for (const auto& name : g.names) {
      if (pos >= layout.size() || layout.subsystems()[pos].name != name) {
        throw std::invalid_argument("basis groups must tile the layout in order");
      }
      ++pos;
    }
    if (g.vectors.empty()) {
      throw std::invalid_argument("empty basis group");
    }
  }
  if (pos != layout.size()) {
    throw std::invalid_argument("basis groups do not cover the layout");
  }

  std::vector<StateVector> out;
  std::vector<std::size_t> choice(groups.size(), 0);
  while (true) {
    StateVector v = groups[0].vectors[choice[0]];
    for (std::size_t g = 1; g < groups.size(); ++g) {
      v = kron(v, groups[g].vectors[choice[g]]);
    }
    out.push_back(std::move(v));
    std::size_t g = groups.size();
    while (g-- > 0) {
      if (++choice[g] < groups[g].vectors.size()) break;
      choice[g] = 0;
      if (g == 0) return out;
    }
  }
}

std::vector<StateVector> complete_orthonormal(const SpaceLayout& layout,
                                              std::span<const StateVector> vectors,
                                              double tol) {
  const std::size_t d = layout.total_dim();
  std::vector<StateVector> basis(vectors.begin(), vectors.end());
  for (const auto& v : basis) {
    if (std::abs(v.norm() - 1.0) > tol) {
      throw std::invalid_argument("complete_orthonormal: seed vector not normalized");
    }
  }
  for (std::size_t i = 0; i < d && basis.size() < d; ++i) {
    StateVector cand = StateVector::basis_state(layout, i);
    for (const auto& b : basis) {
      const cx ov = inner(b, cand);
      for (std::size_t k = 0; k < d; ++k) cand.entries[k] -= ov * b.entries[k];
    }
    const double nn = cand.norm();
    if (nn > 1e-6) {
      for (cx& z : cand.entries) z /= nn;
      basis.push_back(std::move(cand));
    }
  }
  if (basis.size() != d) {
    throw std::invalid_argument("complete_orthonormal: could not complete the basis");
  }
  return basis;
}

ObservableDecomposition observable_from_hermitian_approx(const OperatorMatrix& hermitian,
                                                         double cluster_gap,
                                                         const Tolerances& tol) {
  if (!is_hermitian(hermitian, tol.projector)) {
    throw std::invalid_argument("matrix is not Hermitian");
  }
  const std::size_t d = hermitian.dim();
  OperatorMatrix a = hermitian;                            // worked on in place
  OperatorMatrix v = OperatorMatrix::identity(a.layout);   // accumulated rotations

  // Cyclic complex Jacobi sweeps until the off-diagonal mass is negligible.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off = std::max(off, std::abs(a.at(p, q)));
    }
    if (off < 1e-13) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const cx apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = std::real(a.at(p, p));
        const double aqq = std::real(a.at(q, q));
        const cx phase = apq / std::abs(apq);
        const double tau = (aqq - app) / (2.0 * std::abs(apq));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // columns p, q of A and V rotate; rows of A by the conjugate
        for (std::size_t r = 0; r < d; ++r) {
          const cx arp = a.at(r, p), arq = a.at(r, q);
          a.at(r, p) = c * arp - s * std::conj(phase) * arq;
          a.at(r, q) = s * phase * arp + c * arq;
          const cx vrp = v.at(r, p), vrq = v.at(r, q);
          v.at(r, p) = c * vrp - s * std::conj(phase) * vrq;
          v.at(r, q) = s * phase * vrp + c * vrq;
        }
        for (std::size_t col = 0; col < d; ++col) {
          const cx apc = a.at(p, col), aqc = a.at(q, col);
          a.at(p, col) = c * apc - s * phase * aqc;
          a.at(q, col) = s * std::conj(phase) * apc + c * aqc;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::real(a.at(x, x)) < std::real(a.at(y, y));
  });

  ObservableDecomposition obs;
  obs.label = "approximate";
  std::size_t start = 0;
  while (start < d) {
    std::size_t end = start + 1;
    while (end < d && std::real(a.at(order[end], order[end])) -
                              std::real(a.at(order[end - 1], order[end - 1])) <=
                          cluster_gap) {
      ++end;
    }
    ObservableBranch branch;
    double mean = 0.0;
    OperatorMatrix proj = OperatorMatrix::zero(hermitian.layout);
    for (std::size_t k = start; k < end; ++k) {
      mean += std::real(a.at(order[k], order[k]));
      std::vector<cx> column(d);
      for (std::size_t r = 0; r < d; ++r) column[r] = v.at(r, order[k]);
      StateVector vec(hermitian.layout, std::move(column));
      proj = add(proj, outer(vec, vec));
      branch.basis.push_back(std::move(vec));
    }
    branch.eigenvalue = mean / static_cast<double>(end - start);
    branch.projector = std::move(proj);
    obs.branches.push_back(std::move(branch));
    start = end;
  }
  return obs;
}

ObservableDecomposition projector_observable(const SpaceLayout& layout,
                                             const std::string& target,
                                             const StateVector& axis,
                                             const Tolerances& tol) {
  const std::string sub_names[] = {target};
  const SpaceLayout axis_space = layout.sub_layout(sub_names);
  if (!(axis.layout == axis_space)) {
    throw std::invalid_argument("axis state is not defined on subsystem '" + target + "'");
  }
  if (std::abs(axis.norm() - 1.0) > tol.norm) {
    throw std::invalid_argument("axis state is not normalized");
  }

  auto full = complete_orthonormal(axis_space, std::span(&axis, 1), tol.projector);
  std::vector<StateVector> complement(full.begin() + 1, full.end());

  auto groups_for = [&](const std::vector<StateVector>& target_vectors) {
    std::vector<BasisGroup> groups;
    for (const auto& s : layout.subsystems()) {
      BasisGroup g;
      g.names = {s.name};
      if (s.name == target) {
        g.vectors = target_vectors;
      } else {
        const SpaceLayout gl = layout.sub_layout(g.names);
        for (std::size_t k = 0; k < s.dim; ++k) {
          g.vectors.push_back(StateVector::basis_state(gl, k));
        }
      }
      groups.push_back(std::move(g));
    }
    return groups;
  };

  const OperatorMatrix p_yes = embed_operator(outer(axis, axis), sub_names, layout, tol);
  const OperatorMatrix p_no = sub(OperatorMatrix::identity(layout), p_yes);

  ObservableDecomposition obs;
  obs.label = target;
  auto yes_groups = groups_for({axis});
  auto no_groups = groups_for(complement);
  obs.branches.push_back({1.0, "yes", p_yes, grouped_product_basis(layout, yes_groups)});
  obs.branches.push_back({0.0, "no", p_no, grouped_product_basis(layout, no_groups)});
  return obs;
}

namespace {

OperatorMatrix pointer_flip_local(const SpaceLayout& layout, const std::string& pointer,
                                  std::span<const std::string> targets,
                                  const StateVector& distinguished) {
  const std::string ptr_names[] = {pointer};
  const SpaceLayout ptr = layout.sub_layout(ptr_names);
  if (ptr.total_dim() != 2) {
    throw std::invalid_argument("pointer subsystem '" + pointer + "' must be two-level");
  }
  const SpaceLayout sys = layout.sub_layout(targets);
  if (!(distinguished.layout == sys)) {
    throw std::invalid_argument("conditioning state is not defined on the coupling targets");
  }
  OperatorMatrix flip = OperatorMatrix::zero(ptr);
  flip.at(0, 1) = flip.at(1, 0) = cx{1.0, 0.0};
  const OperatorMatrix p = outer(distinguished, distinguished);
  OperatorMatrix u = add(kron(flip, p),
                         kron(OperatorMatrix::identity(ptr),
                              sub(OperatorMatrix::identity(sys), p)));
  u.unitary_tag = true;
  return u;
}

}  // namespace

CouplingEvent controlled_flip_coupling(double time, const SpaceLayout& layout,
                                       const std::string& pointer,
                                       const std::string& system,
                                       const StateVector& b1, const StateVector& b2,
                                       const Tolerances& tol) {
  if (std::abs(b1.norm() - 1.0) > tol.projector ||
      std::abs(b2.norm() - 1.0) > tol.projector ||
      std::abs(inner(b1, b2)) > tol.projector) {
    throw std::invalid_argument("controlled flip basis pair is not orthonormal");
  }
  const std::string sys_names[] = {system};
  CouplingEvent ev;
  ev.time = time;
  ev.targets = {pointer, system};
  ev.unitary = pointer_flip_local(layout, pointer, sys_names, b1);
  return ev;  // the flip condition is b1; b2 fixes the complement convention
}

CouplingEvent composite_basis_coupling(double time, const SpaceLayout& layout,
                                       const std::string& pointer,
                                       const std::vector<std::string>& targets,
                                       const StateVector& distinguished,
                                       const std::vector<StateVector>& completion,
                                       const Tolerances& tol) {
  std::vector<StateVector> family;
  family.push_back(distinguished);
  family.insert(family.end(), completion.begin(), completion.end());
  const SpaceLayout sys = layout.sub_layout(targets);
  if (family.size() != sys.total_dim()) {
    throw std::invalid_argument("composite coupling family is incomplete");
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!(family[i].layout == sys)) {
      throw std::invalid_argument("composite coupling state is not on the target space");
    }
    for (std::size_t j = 0; j <= i; ++j) {
      const cx g = inner(family[i], family[j]);
      const cx want = (i == j) ? cx{1.0, 0.0} : cx{0.0, 0.0};
      if (std::abs(g - want) > tol.projector) {
        throw std::invalid_argument("composite coupling family is not orthonormal");
      }
    }
  }
  CouplingEvent ev;
  ev.time = time;
  ev.targets.push_back(pointer);
  ev.targets.insert(ev.targets.end(), targets.begin(), targets.end());
  ev.unitary = pointer_flip_local(layout, pointer, targets, distinguished);
  return ev;
}

CouplingEvent cnot_coupling(double time, const SpaceLayout& layout,
                            const std::string& control, const std::string& target) {
  const std::string ctrl_names[] = {control};
  const SpaceLayout ctrl = layout.sub_layout(ctrl_names);
  return controlled_flip_coupling(time, layout, target, control,
                                  StateVector::basis_state(ctrl, 1),
                                  StateVector::basis_state(ctrl, 0));
}

Protocol with_registered(const Protocol& p, const std::string& observer, bool registered) {
  Protocol out = p;
  bool found = false;
  for (auto& e : out.events) {
    if (auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (m->observer == observer) {
        m->registered = registered;
        found = true;
      }
    }
  }
  if (!found) {
    throw std::invalid_argument("no measurement event for observer '" + observer + "'");
  }
  return out;
}

Protocol demote_intermediate_registered(const Protocol& p) {
  Protocol out = p;
  MeasurementEvent* last = nullptr;
  for (auto& e : out.events) {
    if (auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (m->registered) last = m;
    }
  }
  for (auto& e : out.events) {
    if (auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (m->registered && m != last) m->registered = false;
    }
  }
  return out;
}

Protocol drop_final_registered(const Protocol& p) {
  Protocol out = p;
  for (std::size_t i = out.events.size(); i-- > 0;) {
    if (const auto* m = std::get_if<MeasurementEvent>(&out.events[i])) {
      if (m->registered) {
        out.events.erase(out.events.begin() + static_cast<std::ptrdiff_t>(i));
        return out;
      }
    }
  }
  throw std::invalid_argument("protocol has no registered measurement to drop");
}

Protocol rebasis_observable_branches(const Protocol& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Protocol out = p;
  for (auto& e : out.events) {
    auto* m = std::get_if<MeasurementEvent>(&e);
    if (!m) continue;
    for (auto& branch : m->observable.branches) {
      const std::size_t r = branch.basis.size();
      if (r == 0) continue;
      // Random unitary mix via Gram-Schmidt of a Gaussian matrix.
      std::vector<std::vector<cx>> u(r, std::vector<cx>(r));
      for (auto& row : u) {
        for (auto& z : row) z = cx{gauss(rng), gauss(rng)};
      }
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          cx ov{0.0, 0.0};
          for (std::size_t k = 0; k < r; ++k) ov += std::conj(u[j][k]) * u[i][k];
          for (std::size_t k = 0; k < r; ++k) u[i][k] -= ov * u[j][k];
        }
        double nn = 0.0;
        for (std::size_t k = 0; k < r; ++k) nn += std::norm(u[i][k]);
        nn = std::sqrt(nn);
        for (std::size_t k = 0; k < r; ++k) u[i][k] /= nn;
      }
      std::vector<StateVector> mixed;
      mixed.reserve(r);
      for (std::size_t i = 0; i < r; ++i) {
        StateVector v = scaled(branch.basis[0], u[i][0]);
        for (std::size_t k = 1; k < r; ++k) {
          v = add(v, scaled(branch.basis[k], u[i][k]));
        }
        mixed.push_back(std::move(v));
      }
      branch.basis = std::move(mixed);
    }
  }
  return out;
}

}  // namespace pathwig
