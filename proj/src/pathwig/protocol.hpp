#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include "pathwig/hilbert.hpp"

namespace pathwig {

// A measured quantity is given as an eigenvalue-labeled family of orthogonal
// projectors rather than a raw Hermitian matrix. Outcome selection is then
// exact branch membership, with no floating-point spectrum comparison.
struct ObservableBranch {
  double eigenvalue = 0.0;
  std::string label;               // display name ("yes"/"no"); may be empty
  OperatorMatrix projector;        // on the full protocol layout
  std::vector<StateVector> basis;  // orthonormal basis of the projector range;
                                   // computed deterministically when left empty
};

struct ObservableDecomposition {
  std::string label;
  std::vector<ObservableBranch> branches;

  const ObservableBranch* find_eigenvalue(double eigenvalue) const;  // exact compare
  const ObservableBranch* find_label(std::string_view name) const;
  OperatorMatrix weighted_sum() const;  // sum of eigenvalue * projector
};

struct CouplingEvent {
  double time = 0.0;
  std::vector<std::string> targets;
  OperatorMatrix unitary;  // on sub_layout(targets), tagged unitary
};

struct MeasurementEvent {
  double time = 0.0;
  std::string observer;
  bool registered = true;
  ObservableDecomposition observable;
};

using ProtocolEvent = std::variant<CouplingEvent, MeasurementEvent>;

double event_time(const ProtocolEvent& e);

// Preparation is the given initial state, not an event. Event times are
// ordering keys only; nothing evolves between events on its own.
struct Protocol {
  SpaceLayout layout;
  StateVector initial;
  std::vector<ProtocolEvent> events;
  Tolerances tol;
};

struct OutcomeSlot {
  std::string observer;
  double eigenvalue = 0.0;
  std::string label;  // display only; identity is (observer, eigenvalue)
};
using OutcomeSequence = std::vector<OutcomeSlot>;

struct MarginalRecord {
  OutcomeSequence outcome;
  double probability = 0.0;
};

bool same_outcome(const OutcomeSlot& a, const OutcomeSlot& b);
bool same_outcome(const OutcomeSequence& a, const OutcomeSequence& b);
std::string outcome_text(const OutcomeSlot& slot);      // e.g. "yes^W"
std::string outcome_text(const OutcomeSequence& seq);   // space-joined

struct Diagnostic {
  std::string where;
  std::string message;
};

// Full invariant scan; an empty result means the protocol is runnable.
// Diagnostics, not failure: invalid protocols are refused by queries, not here.
std::vector<Diagnostic> validate(const Protocol& p);

struct ValidationError : std::runtime_error {
  explicit ValidationError(std::vector<Diagnostic> diags);
  std::vector<Diagnostic> diagnostics;
};
void require_valid(const Protocol& p);

// Orthonormal basis of a projector's range, via column-pivoted Gram-Schmidt.
// Deterministic: pivots resolve to the lowest column index.
std::vector<StateVector> range_basis(const OperatorMatrix& projector, double tol);

// Materialize any missing branch bases in place.
void ensure_branch_bases(ObservableDecomposition& obs, double tol);

// Approximate convenience: diagonalize a Hermitian matrix (complex Jacobi
// sweeps) and cluster its eigenvalues into branches, merging anything closer
// than cluster_gap. The branch eigenvalues come out of floating-point
// arithmetic, not canonical user-supplied reals; supply exact projector
// families directly whenever they are known.
ObservableDecomposition observable_from_hermitian_approx(const OperatorMatrix& hermitian,
                                                         double cluster_gap = 1e-8,
                                                         const Tolerances& tol = {});

// Two-branch probe observable: eigenvalue 1 projects onto `axis` of the named
// subsystem ("yes"), eigenvalue 0 onto its complement ("no"), both embedded
// into the full layout with explicit product bases.
ObservableDecomposition projector_observable(const SpaceLayout& layout,
                                             const std::string& target,
                                             const StateVector& axis,
                                             const Tolerances& tol = {});

// Pointer flip conditioned on the system lying along b1:
//   |0_ptr>|b1> <-> |1_ptr>|b1>,   |i_ptr>|b2> -> |i_ptr>|b2>.
// The pointer must be two-level; {b1, b2} must be orthonormal.
CouplingEvent controlled_flip_coupling(double time, const SpaceLayout& layout,
                                       const std::string& pointer,
                                       const std::string& system,
                                       const StateVector& b1, const StateVector& b2,
                                       const Tolerances& tol = {});

// Pointer flip conditioned on a composite state of several subsystems. The
// distinguished state plus the completion must form a complete orthonormal
// family on the joint target space.
CouplingEvent composite_basis_coupling(double time, const SpaceLayout& layout,
                                       const std::string& pointer,
                                       const std::vector<std::string>& targets,
                                       const StateVector& distinguished,
                                       const std::vector<StateVector>& completion,
                                       const Tolerances& tol = {});

// CNOT in the computational basis.
CouplingEvent cnot_coupling(double time, const SpaceLayout& layout,
                            const std::string& control, const std::string& target);

// Protocol surgery. Each helper returns a modified copy.
Protocol with_registered(const Protocol& p, const std::string& observer, bool registered);
Protocol demote_intermediate_registered(const Protocol& p);
Protocol drop_final_registered(const Protocol& p);

// Replace every stored branch basis by a random unitary remix of itself.
// All probabilities are invariant under this (the coherent sums are basis
// covariant); used for property sweeps.
Protocol rebasis_observable_branches(const Protocol& p, std::uint64_t seed);

// Orthonormal product basis over contiguous groups of subsystems, kron'd in
// layout order. Choices enumerate lexicographically with the first group
// slowest, which fixes basis indices for path listings.
struct BasisGroup {
  std::vector<std::string> names;
  std::vector<StateVector> vectors;  // on sub_layout(names)
};
std::vector<StateVector> grouped_product_basis(const SpaceLayout& layout,
                                               std::span<const BasisGroup> groups);

// Extend `vectors` to an orthonormal basis of the layout's full space by
// Gram-Schmidt over the computational basis.
std::vector<StateVector> complete_orthonormal(const SpaceLayout& layout,
                                              std::span<const StateVector> vectors,
                                              double tol);

}  // namespace pathwig
