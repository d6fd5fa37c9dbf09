#pragma once

#include <optional>

#include "pathwig/protocol.hpp"

namespace pathwig {

// Sum-over-paths evaluation of outcome-sequence probabilities.
//
// A virtual path picks one branch and one intra-branch basis vector at every
// registered measurement; its amplitude is the ordered product of transfer
// matrix elements <q_k | U_k | q_{k-1}>, where U_k collects the coupling
// unitaries strictly between consecutive registered events (identity if
// none). A real path fixes only the branches; within a degenerate
// intermediate branch amplitudes add coherently, which is implemented exactly
// as a branch-projector insertion. Distinct final basis states never
// interfere: the sequence probability adds their squared moduli.
//
// Summation order is fixed: events in time order, branches in declaration
// order, basis vectors by ascending index, vector entries by ascending
// composite index. Evaluation is single-threaded and bit-reproducible.

struct PathNode {
  std::size_t event = 0;  // index among registered events, in time order
  std::size_t branch = 0;
  std::size_t vector = 0;
};

struct VirtualPath {
  std::vector<PathNode> nodes;
  cx amplitude{0.0, 0.0};
};

struct RealPathRecord {
  OutcomeSequence outcome;
  std::vector<cx> coherent_amplitudes;  // one per final-branch basis vector
  double probability = 0.0;             // sum of squared moduli of the above
};

struct InterferenceBasisTerm {
  double coherent = 0.0;    // |sum of path amplitudes|^2
  double incoherent = 0.0;  // sum of |path amplitude|^2
};

struct InterferenceReport {
  OutcomeSlot final_outcome;
  std::vector<VirtualPath> paths;  // virtual paths reaching the final branch
  std::vector<InterferenceBasisTerm> per_basis;
  double coherent_sum = 0.0;
  double incoherent_sum = 0.0;
  double interference_term = 0.0;  // coherent_sum - incoherent_sum
  double p_registered = 0.0;       // P(final outcome), protocol as given
  double p_unregistered = 0.0;     // same with intermediate events demoted
};

struct CertaintyResult {
  OutcomeSlot outcome;       // forced final outcome
  double probability = 0.0;  // P(final eigenvalue repeats the first)
};

// Sentinel for full_distribution: keep zero-probability sequences too.
inline constexpr double kReportAll = -1.0;

std::vector<VirtualPath> enumerate_virtual_paths(const Protocol& p);

// Coherent amplitudes of an outcome sequence, one per final-branch basis
// vector; intermediate branch selection is exact membership.
std::vector<cx> real_path_amplitude(const Protocol& p, const OutcomeSequence& outcome);

double sequence_probability(const Protocol& p, const OutcomeSequence& outcome);

// Every outcome sequence with probability > report_eps (kReportAll keeps all),
// enumerated branch-lexicographically. Total probability must be 1.
std::vector<RealPathRecord> full_distribution(const Protocol& p,
                                              double report_eps = kReportAll);

// Classical marginalization onto the registered-slot subset `keep`.
std::vector<MarginalRecord> marginal(std::span<const RealPathRecord> dist,
                                     std::span<const std::size_t> keep);

// P(outcome at the final registered event == slot), everything else summed out.
double final_outcome_probability(const Protocol& p, const OutcomeSlot& slot);

InterferenceReport interference_report(const Protocol& p, const OutcomeSlot& final_outcome);

// Detects a final observable equal to the evolved first observable (same
// eigenvalue-weighted projector sum after conjugation by the inter-event
// evolution). When they match, the final outcome repeats the first one with
// certainty; the returned probability is P(final eigenvalue == first).
std::optional<CertaintyResult> certainty_check(const Protocol& p);

}  // namespace pathwig
