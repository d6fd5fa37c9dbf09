#pragma once

#include <array>

#include "pathwig/path_engine.hpp"

namespace pathwig {

// Builders for the three ways the outer observer W can engage a friend-probe
// experiment on a spin: measuring the spin in his own basis (spin), measuring
// F's probe (probe), or engaging the composite probe+spin so that no record
// of F's outcome survives (composite). A chain of record qubits copied from
// F's probe models the measurement chain; erasure uncomputes chosen records
// just before W's engagement.
enum class WMode { spin, probe, composite };

struct WignerFriendConfig {
  std::vector<cx> spin_init;               // |s0>, two entries
  std::array<std::vector<cx>, 2> f_basis;  // F's spin basis, two entries each
  WMode w_mode = WMode::spin;
  // W's basis pair: spin pair (spin mode), probe pair (probe mode), or a pair
  // of composite states on (F probe, spin), four entries each (composite mode).
  std::array<std::vector<cx>, 2> w_basis;
  bool f_registered = true;
  int chain_length = 0;      // K record qubits copied from F's probe
  std::vector<int> erasure;  // record indices W uncomputes, subset of 1..K
  int regroup = 0;           // records 1..regroup relabeled as part of F's probe
                             // (naming only; the physics is unchanged)

  static WignerFriendConfig case_c();  // canonical: s0 = x+, F = z, W = x
  static WignerFriendConfig case_d();  // W copies F's probe (computational basis)
  static WignerFriendConfig case_f();  // composite engagement, balanced basis
};

Protocol build_case_c(const WignerFriendConfig& cfg);
Protocol build_case_d(const WignerFriendConfig& cfg);
Protocol build_case_f(const WignerFriendConfig& cfg);
Protocol build_wigner_friend(const WignerFriendConfig& cfg);  // dispatch on w_mode

// Append k record qubits, each copied from F's probe immediately after F's
// coupling. Existing events keep their matrices; observables extend by
// identity on the new factors.
Protocol extend_chain(const Protocol& p, int k);

// Insert, just before W's coupling, the inverse copy operations for the named
// record indices (uncomputation; the copy is an involution).
Protocol erase_records(const Protocol& p, const std::vector<int>& subset);

// True iff at least one record qubit still carries F's outcome when W
// engages: it was copied an odd number of times before W's coupling and W's
// engagement does not touch it. When true, the final-event statistics are
// verified to match the F-registered variant.
bool surviving_record_check(const Protocol& p);

// The outcome W reads off: probe eigenvalue 1.
OutcomeSlot yes_w_slot();

struct ScenarioReport {
  std::array<cx, 4> amplitudes{};          // A1..A4 of the registered variant
  std::vector<MarginalRecord> joint_table; // registered-variant distribution
  double p_yes_registered = 0.0;
  double p_yes_unregistered = 0.0;
  double gap = 0.0;                        // unregistered minus registered
  double interference_term = 0.0;          // from the interference report
  bool record_survival = false;
};

// Run both register-flag settings through the path engine. For spin and probe
// modes the gap must vanish (asserted at 1e-12); for composite mode the gap
// is the interference term.
ScenarioReport registering_gap(const WignerFriendConfig& cfg);

}  // namespace pathwig
