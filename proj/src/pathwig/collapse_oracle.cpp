#include "pathwig/collapse_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace pathwig {

DensityMatrix::DensityMatrix(SpaceLayout l, std::vector<cx> e)
    : layout(std::move(l)), entries(std::move(e)) {
  const std::size_t d = layout.total_dim();
  if (entries.size() != d * d) {
    throw std::invalid_argument("density matrix entry count does not match layout");
  }
}

double DensityMatrix::trace_real() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += std::real(at(i, i));
  return t;
}

double DensityMatrix::purity() const {
  // Re tr(rho^2) = sum_ij rho_ij rho_ji for Hermitian rho.
  double t = 0.0;
  const std::size_t d = dim();
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      t += std::real(at(r, c) * at(c, r));
    }
  }
  return t;
}

DensityMatrix DensityMatrix::from_state(const StateVector& v) {
  const std::size_t d = v.entries.size();
  std::vector<cx> e(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      e[r * d + c] = v.entries[r] * std::conj(v.entries[c]);
    }
  }
  return DensityMatrix(v.layout, std::move(e));
}

namespace {

OperatorMatrix density_to_mat(const DensityMatrix& rho) {
  return OperatorMatrix(rho.layout, rho.entries);
}

DensityMatrix conjugate_by(const OperatorMatrix& u, const DensityMatrix& rho) {
  return DensityMatrix(rho.layout,
                       compose(compose(u, density_to_mat(rho)), adjoint(u)).entries);
}

// Lueders update candidate P rho P; its trace is the branch probability.
DensityMatrix project(const OperatorMatrix& p, const DensityMatrix& rho) {
  return DensityMatrix(rho.layout,
                       compose(compose(p, density_to_mat(rho)), p).entries);
}

void scale_in_place(DensityMatrix& rho, double factor) {
  for (cx& z : rho.entries) z *= factor;
}

// Shared tree walk; validation is the caller's business.
CollapseTree build_tree(const Protocol& p) {
  CollapseTree tree;
  tree.root.state = DensityMatrix::from_state(p.initial);
  tree.root.probability = 1.0;

  std::vector<CollapseNode*> frontier{&tree.root};
  for (const auto& e : p.events) {
    if (const auto* cpl = std::get_if<CouplingEvent>(&e)) {
      const OperatorMatrix u = embed_operator(cpl->unitary, cpl->targets, p.layout, p.tol);
      for (CollapseNode* node : frontier) {
        node->state = conjugate_by(u, node->state);
      }
      continue;
    }
    const auto& m = std::get<MeasurementEvent>(e);
    if (!m.registered) continue;
    std::vector<CollapseNode*> next;
    for (CollapseNode* node : frontier) {
      for (const auto& branch : m.observable.branches) {
        DensityMatrix candidate = project(branch.projector, node->state);
        const double prob = candidate.trace_real();
        if (prob < p.tol.branch) continue;  // dropped; mass reported as-is
        scale_in_place(candidate, 1.0 / prob);
        node->children.push_back(CollapseNode{
            OutcomeSlot{m.observer, branch.eigenvalue, branch.label},
            prob, std::move(candidate), {}});
      }
      for (auto& child : node->children) next.push_back(&child);
    }
    frontier = std::move(next);
  }
  return tree;
}

}  // namespace

CollapseTree collapse_tree(const Protocol& p) {
  require_valid(p);
  return build_tree(p);
}

std::vector<MarginalRecord> CollapseTree::leaves() const {
  std::vector<MarginalRecord> out;
  OutcomeSequence prefix;
  std::function<void(const CollapseNode&, double)> walk = [&](const CollapseNode& node,
                                                              double weight) {
    if (node.children.empty()) {
      if (!prefix.empty()) out.push_back({prefix, weight});
      return;
    }
    for (const auto& child : node.children) {
      prefix.push_back(child.slot);
      walk(child, weight * child.probability);
      prefix.pop_back();
    }
  };
  walk(root, root.probability);
  return out;
}

std::vector<MarginalRecord> evolve_collapse(const Protocol& p) {
  return collapse_tree(p).leaves();
}

std::variant<StateVector, DensityMatrix> state_after(const Protocol& p, double time,
                                                     StateMode mode) {
  if (p.events.empty() || time < event_time(p.events.front())) {
    throw std::invalid_argument("state_after time precedes every event");
  }

  // Truncated prefixes legitimately may have no registered event yet.
  Protocol truncated = p;
  std::erase_if(truncated.events,
                [&](const ProtocolEvent& e) { return event_time(e) > time; });
  for (const auto& d : validate(truncated)) {
    if (d.message != "no registered measurement event") {
      throw ValidationError(validate(truncated));
    }
  }

  if (mode == StateMode::pure) {
    StateVector state = truncated.initial;
    for (const auto& e : truncated.events) {
      if (const auto* cpl = std::get_if<CouplingEvent>(&e)) {
        state = apply(embed_operator(cpl->unitary, cpl->targets, p.layout, p.tol), state);
      } else if (std::get<MeasurementEvent>(e).registered) {
        throw std::invalid_argument("pure mode is undefined after a registered measurement");
      }
    }
    return state;
  }

  const CollapseTree tree = build_tree(truncated);
  DensityMatrix mix{p.layout,
                    std::vector<cx>(p.layout.total_dim() * p.layout.total_dim(), cx{})};
  std::function<void(const CollapseNode&, double)> fold = [&](const CollapseNode& node,
                                                              double weight) {
    if (node.children.empty()) {
      for (std::size_t i = 0; i < mix.entries.size(); ++i) {
        mix.entries[i] += weight * node.state.entries[i];
      }
      return;
    }
    for (const auto& child : node.children) fold(child, weight * child.probability);
  };
  fold(tree.root, 1.0);
  return mix;
}

WignerComparison wigner_comparison(const Protocol& p, const OutcomeSlot& final_outcome) {
  // Expect exactly two measurement events, the later one registered.
  const MeasurementEvent* intermediate = nullptr;
  const MeasurementEvent* final_event = nullptr;
  for (const auto& e : p.events) {
    if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
      if (!intermediate) {
        intermediate = m;
      } else if (!final_event) {
        final_event = m;
      } else {
        throw std::invalid_argument("comparison expects exactly two measurement events");
      }
    }
  }
  if (!intermediate || !final_event || !final_event->registered) {
    throw std::invalid_argument(
        "comparison expects an intermediate and a registered final measurement");
  }

  auto final_probability = [&](const Protocol& variant) {
    double total = 0.0;
    for (const auto& rec : evolve_collapse(variant)) {
      if (same_outcome(rec.outcome.back(), final_outcome)) total += rec.probability;
    }
    return total;
  };

  WignerComparison result;
  result.p_mixture = final_probability(with_registered(p, intermediate->observer, true));
  result.p_pure = final_probability(with_registered(p, intermediate->observer, false));
  return result;
}

}  // namespace pathwig
