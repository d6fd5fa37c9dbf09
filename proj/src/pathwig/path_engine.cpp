#include "pathwig/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace pathwig {

namespace {

struct Step {
  OperatorMatrix segment;  // couplings since the previous registered event
  std::string observer;
  ObservableDecomposition observable;  // branch bases materialized
};

struct Compiled {
  StateVector initial;
  std::vector<Step> steps;
  Tolerances tol;
};

Compiled compile(const Protocol& p) {
  require_valid(p);
  Compiled c{p.initial, {}, p.tol};
  OperatorMatrix segment = OperatorMatrix::identity(p.layout);
  bool pending = false;  // couplings accumulated since the last registered event
  for (const auto& e : p.events) {
    if (const auto* cpl = std::get_if<CouplingEvent>(&e)) {
      segment = compose(embed_operator(cpl->unitary, cpl->targets, p.layout, p.tol), segment);
      pending = true;
      continue;
    }
    const auto& m = std::get<MeasurementEvent>(e);
    if (!m.registered) continue;  // contributes no outcome slot
    Step step{pending ? segment : OperatorMatrix::identity(p.layout), m.observer,
              m.observable};
    ensure_branch_bases(step.observable, p.tol.projector);
    c.steps.push_back(std::move(step));
    segment = OperatorMatrix::identity(p.layout);
    pending = false;
  }
  if (c.steps.empty()) {
    throw std::invalid_argument("protocol has no registered measurement events");
  }
  return c;
}

OutcomeSlot slot_of(const Step& step, std::size_t branch) {
  const auto& b = step.observable.branches[branch];
  return OutcomeSlot{step.observer, b.eigenvalue, b.label};
}

std::size_t resolve_branch(const Step& step, const OutcomeSlot& slot) {
  if (step.observer != slot.observer) {
    throw std::invalid_argument("outcome observer '" + slot.observer +
                                "' does not match event observer '" + step.observer + "'");
  }
  for (std::size_t i = 0; i < step.observable.branches.size(); ++i) {
    if (step.observable.branches[i].eigenvalue == slot.eigenvalue) return i;
  }
  throw std::invalid_argument("no branch with eigenvalue " +
                              std::to_string(slot.eigenvalue) + " for observer '" +
                              slot.observer + "'");
}

}  // namespace

std::vector<VirtualPath> enumerate_virtual_paths(const Protocol& p) {
  const Compiled c = compile(p);
  std::vector<VirtualPath> out;
  std::vector<PathNode> nodes;

  std::function<void(std::size_t, const StateVector&, cx)> walk =
      [&](std::size_t k, const StateVector& prev, cx amp) {
        const Step& step = c.steps[k];
        const StateVector evolved = apply(step.segment, prev);
        for (std::size_t b = 0; b < step.observable.branches.size(); ++b) {
          const auto& basis = step.observable.branches[b].basis;
          for (std::size_t v = 0; v < basis.size(); ++v) {
            const cx element = inner(basis[v], evolved);
            const cx next = amp * element;
            if (std::abs(next) <= c.tol.prune) continue;
            nodes.push_back({k, b, v});
            if (k + 1 == c.steps.size()) {
              out.push_back({nodes, next});
            } else {
              walk(k + 1, basis[v], next);
            }
            nodes.pop_back();
          }
        }
      };
  walk(0, c.initial, cx{1.0, 0.0});
  return out;
}

namespace {

// Shared chain evaluation: project through the outcome's intermediate
// branches, then read off overlaps with the final branch basis.
std::vector<cx> amplitudes_for(const Compiled& c, const std::vector<std::size_t>& branches) {
  StateVector state = c.initial;
  for (std::size_t k = 0; k + 1 < c.steps.size(); ++k) {
    state = apply(c.steps[k].segment, state);
    state = apply(c.steps[k].observable.branches[branches[k]].projector, state);
  }
  state = apply(c.steps.back().segment, state);
  const auto& basis = c.steps.back().observable.branches[branches.back()].basis;
  std::vector<cx> amps;
  amps.reserve(basis.size());
  for (const auto& v : basis) amps.push_back(inner(v, state));
  return amps;
}

double probability_of(std::span<const cx> amps) {
  double p = 0.0;
  for (const cx& a : amps) p += std::norm(a);
  return p;
}

}  // namespace

std::vector<cx> real_path_amplitude(const Protocol& p, const OutcomeSequence& outcome) {
  const Compiled c = compile(p);
  if (outcome.size() != c.steps.size()) {
    throw std::invalid_argument("outcome length does not match the registered event count");
  }
  std::vector<std::size_t> branches(c.steps.size());
  for (std::size_t k = 0; k < c.steps.size(); ++k) {
    branches[k] = resolve_branch(c.steps[k], outcome[k]);
  }
  return amplitudes_for(c, branches);
}

double sequence_probability(const Protocol& p, const OutcomeSequence& outcome) {
  const auto amps = real_path_amplitude(p, outcome);
  return probability_of(amps);
}

std::vector<RealPathRecord> full_distribution(const Protocol& p, double report_eps) {
  const Compiled c = compile(p);
  std::vector<RealPathRecord> out;
  OutcomeSequence prefix;
  double total = 0.0;

  std::function<void(std::size_t, const StateVector&)> walk =
      [&](std::size_t k, const StateVector& state) {
        const Step& step = c.steps[k];
        const StateVector evolved = apply(step.segment, state);
        for (std::size_t b = 0; b < step.observable.branches.size(); ++b) {
          prefix.push_back(slot_of(step, b));
          if (k + 1 == c.steps.size()) {
            const auto& basis = step.observable.branches[b].basis;
            std::vector<cx> amps;
            amps.reserve(basis.size());
            for (const auto& v : basis) amps.push_back(inner(v, evolved));
            const double prob = probability_of(amps);
            total += prob;
            if (prob > report_eps) {
              out.push_back({prefix, std::move(amps), prob});
            }
          } else {
            walk(k + 1, apply(step.observable.branches[b].projector, evolved));
          }
          prefix.pop_back();
        }
      };
  walk(0, c.initial);

  if (std::abs(total - 1.0) > c.tol.sum) {
    throw std::logic_error("distribution does not sum to 1 within tolerance");
  }
  return out;
}

std::vector<MarginalRecord> marginal(std::span<const RealPathRecord> dist,
                                     std::span<const std::size_t> keep) {
  if (keep.empty()) {
    throw std::invalid_argument("marginal requires a non-empty slot subset");
  }
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw std::invalid_argument("marginal slots must be strictly increasing");
    }
  }
  std::vector<MarginalRecord> out;
  for (const auto& rec : dist) {
    OutcomeSequence reduced;
    reduced.reserve(keep.size());
    for (std::size_t slot : keep) {
      if (slot >= rec.outcome.size()) {
        throw std::invalid_argument("marginal slot index out of range");
      }
      reduced.push_back(rec.outcome[slot]);
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const MarginalRecord& m) {
      return same_outcome(m.outcome, reduced);
    });
    if (it == out.end()) {
      out.push_back({std::move(reduced), rec.probability});
    } else {
      it->probability += rec.probability;
    }
  }
  return out;
}

double final_outcome_probability(const Protocol& p, const OutcomeSlot& slot) {
  const auto dist = full_distribution(p);
  double total = 0.0;
  for (const auto& rec : dist) {
    if (same_outcome(rec.outcome.back(), slot)) total += rec.probability;
  }
  return total;
}

InterferenceReport interference_report(const Protocol& p, const OutcomeSlot& final_outcome) {
  const Compiled c = compile(p);
  const std::size_t final_branch = resolve_branch(c.steps.back(), final_outcome);
  const std::size_t basis_size =
      c.steps.back().observable.branches[final_branch].basis.size();

  InterferenceReport report;
  report.final_outcome = slot_of(c.steps.back(), final_branch);

  const auto all_paths = enumerate_virtual_paths(p);
  std::vector<cx> coherent(basis_size, cx{0.0, 0.0});
  report.per_basis.assign(basis_size, {});
  for (const auto& path : all_paths) {
    if (path.nodes.back().branch != final_branch) continue;
    const std::size_t v = path.nodes.back().vector;
    coherent[v] += path.amplitude;
    report.per_basis[v].incoherent += std::norm(path.amplitude);
    report.paths.push_back(path);
  }
  for (std::size_t v = 0; v < basis_size; ++v) {
    report.per_basis[v].coherent = std::norm(coherent[v]);
    report.coherent_sum += report.per_basis[v].coherent;
    report.incoherent_sum += report.per_basis[v].incoherent;
  }
  report.interference_term = report.coherent_sum - report.incoherent_sum;

  report.p_registered = final_outcome_probability(p, final_outcome);
  report.p_unregistered =
      final_outcome_probability(demote_intermediate_registered(p), final_outcome);
  return report;
}

std::optional<CertaintyResult> certainty_check(const Protocol& p) {
  const Compiled c = compile(p);
  if (c.steps.size() < 2) return std::nullopt;

  // Evolution between the first and the final registered event.
  OperatorMatrix evolution = OperatorMatrix::identity(c.initial.layout);
  for (std::size_t k = 1; k < c.steps.size(); ++k) {
    evolution = compose(c.steps[k].segment, evolution);
  }
  const OperatorMatrix first = c.steps.front().observable.weighted_sum();
  const OperatorMatrix last = c.steps.back().observable.weighted_sum();
  const OperatorMatrix moved = compose(compose(evolution, first), adjoint(evolution));
  if (max_abs_diff(last, moved) > c.tol.certainty) return std::nullopt;

  const auto dist = full_distribution(p);
  double p_repeat = 0.0;
  std::vector<std::pair<double, double>> first_marginal;  // (eigenvalue, probability)
  for (const auto& rec : dist) {
    if (rec.outcome.front().eigenvalue == rec.outcome.back().eigenvalue) {
      p_repeat += rec.probability;
    }
    auto it = std::find_if(first_marginal.begin(), first_marginal.end(),
                           [&](const auto& pr) { return pr.first == rec.outcome.front().eigenvalue; });
    if (it == first_marginal.end()) {
      first_marginal.push_back({rec.outcome.front().eigenvalue, rec.probability});
    } else {
      it->second += rec.probability;
    }
  }
  double modal_eig = first_marginal.front().first;
  double modal_p = first_marginal.front().second;
  for (const auto& [eig, prob] : first_marginal) {
    if (prob > modal_p) {
      modal_p = prob;
      modal_eig = eig;
    }
  }
  const auto& final_branches = c.steps.back().observable.branches;
  const auto forced = std::find_if(final_branches.begin(), final_branches.end(),
                                   [&](const auto& b) { return b.eigenvalue == modal_eig; });
  if (forced == final_branches.end()) return std::nullopt;  // relabeled spectrum
  CertaintyResult result;
  result.outcome = OutcomeSlot{c.steps.back().observer, forced->eigenvalue, forced->label};
  result.probability = p_repeat;
  return result;
}

}  // namespace pathwig
