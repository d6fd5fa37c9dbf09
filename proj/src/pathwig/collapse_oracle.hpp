#pragma once

#include <variant>

#include "pathwig/protocol.hpp"

namespace pathwig {

// Independent verification engine: density-matrix evolution with projective
// (Lueders) branching at registered events. This module deliberately shares no
// amplitude code with the path engine; agreement between the two is a real
// cross-check, not a tautology.

struct DensityMatrix {
  SpaceLayout layout;
  std::vector<cx> entries;  // row-major, Hermitian, unit trace

  DensityMatrix() = default;
  DensityMatrix(SpaceLayout l, std::vector<cx> e);

  std::size_t dim() const { return layout.total_dim(); }
  cx& at(std::size_t r, std::size_t c) { return entries[r * dim() + c]; }
  const cx& at(std::size_t r, std::size_t c) const { return entries[r * dim() + c]; }

  double trace_real() const;
  double purity() const;  // Re tr(rho^2); 1 for pure states

  static DensityMatrix from_state(const StateVector& v);
};

// One registered event's branching. `probability` is conditional on the
// parent node; the children of any node sum to 1 up to dropped branches
// (conditional probability below tol.branch).
struct CollapseNode {
  OutcomeSlot slot;
  double probability = 1.0;
  DensityMatrix state;  // normalized post-measurement state
  std::vector<CollapseNode> children;
};

struct CollapseTree {
  CollapseNode root;
  std::vector<MarginalRecord> leaves() const;  // absolute probabilities, DFS order
};

CollapseTree collapse_tree(const Protocol& p);
std::vector<MarginalRecord> evolve_collapse(const Protocol& p);

enum class StateMode { pure, mixture };

// State assigned to the full system just after `time`. Pure mode evolves the
// initial vector unitarily and refuses protocols with an earlier registered
// event; mixture mode returns the branch-averaged density matrix.
std::variant<StateVector, DensityMatrix> state_after(const Protocol& p, double time,
                                                     StateMode mode);

// The two candidate probability assignments for the final outcome of a
// two-measurement protocol. Keeping the intermediate event unregistered
// preserves the superposition and yields the coherent value |A1 + A2|^2;
// registering it branches the state and yields the mixture value
// |A1|^2 + |A2|^2. The pairing pure <-> coherent is the mathematically
// forced one and is the convention used throughout.
struct WignerComparison {
  double p_pure = 0.0;
  double p_mixture = 0.0;
};
WignerComparison wigner_comparison(const Protocol& p, const OutcomeSlot& final_outcome);

}  // namespace pathwig
