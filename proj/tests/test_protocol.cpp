#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathwig/protocol.hpp"

using namespace pathwig;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

SpaceLayout one_qubit() { return SpaceLayout({{"q", 2}}); }

StateVector qstate(const SpaceLayout& l, std::vector<cx> e) {
  return StateVector(l, std::move(e));
}

}  // namespace

TEST_CASE("projector_observable on axis |1> gives the z projectors") {
  const SpaceLayout l = one_qubit();
  const auto obs = projector_observable(l, "q", StateVector::basis_state(l, 1));
  REQUIRE(obs.branches.size() == 2);
  CHECK(obs.branches[0].eigenvalue == 1.0);
  CHECK(obs.branches[0].label == "yes");
  CHECK(obs.branches[0].projector.at(1, 1) == cx{1.0, 0.0});
  CHECK(obs.branches[0].projector.at(0, 0) == cx{0.0, 0.0});
  CHECK(obs.branches[1].eigenvalue == 0.0);
  CHECK(obs.branches[1].label == "no");
  CHECK(obs.branches[1].projector.at(0, 0) == cx{1.0, 0.0});
}

TEST_CASE("projector_observable on |+> has all projector entries 1/2") {
  const SpaceLayout l = one_qubit();
  const auto obs = projector_observable(l, "q", qstate(l, {kInvSqrt2, kInvSqrt2}));
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(std::abs(obs.branches[0].projector.at(r, c) - cx{0.5, 0.0}) < 1e-12);
    }
  }
}

TEST_CASE("projector_observable branches sum to the identity") {
  SpaceLayout l({{"W", 2}, {"F", 2}, {"spin", 2}});
  const std::string fs[] = {std::string("F")};
  const auto obs =
      projector_observable(l, "F", StateVector::basis_state(l.sub_layout(fs), 1));
  const auto total = add(obs.branches[0].projector, obs.branches[1].projector);
  CHECK(max_abs_diff(total, OperatorMatrix::identity(l)) < 1e-14);
  // branch bases span their ranges
  CHECK(obs.branches[0].basis.size() == 4);
  CHECK(obs.branches[1].basis.size() == 4);
}

TEST_CASE("projector_observable rejects a non-normalized axis") {
  const SpaceLayout l = one_qubit();
  CHECK_THROWS_AS(projector_observable(l, "q", qstate(l, {cx{0.5, 0.0}, cx{0.0, 0.0}})),
                  std::invalid_argument);
}

TEST_CASE("controlled flip reproduces the CNOT truth table in the computational basis") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::string sys[] = {std::string("sys")};
  const auto ev = controlled_flip_coupling(1.0, l, "ptr", "sys",
                                           StateVector::basis_state(l.sub_layout(sys), 1),
                                           StateVector::basis_state(l.sub_layout(sys), 0));
  const auto u = embed_operator(ev.unitary, ev.targets, l);
  // |ptr, sys>: 00->00, 01->11, 10->10, 11->01
  const std::size_t image[4] = {0, 3, 2, 1};
  for (std::size_t col = 0; col < 4; ++col) {
    const auto out = apply(u, StateVector::basis_state(l, col));
    CHECK(std::abs(out.entries[image[col]] - cx{1.0, 0.0}) < 1e-14);
  }
}

TEST_CASE("controlled flip in the x basis splits |0> across pointer branches") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::string sys_names[] = {std::string("sys")};
  const SpaceLayout sys = l.sub_layout(sys_names);
  const StateVector plus = qstate(sys, {kInvSqrt2, kInvSqrt2});
  const StateVector minus = qstate(sys, {kInvSqrt2, -kInvSqrt2});
  const auto ev = controlled_flip_coupling(1.0, l, "ptr", "sys", plus, minus);
  const auto u = embed_operator(ev.unitary, ev.targets, l);
  const auto out = apply(u, StateVector::basis_state(l, 0));  // |0_ptr>|0>
  // expected (|1_ptr>|+> + |0_ptr>|->)/sqrt(2)
  StateVector expected(l, {cx{0.5, 0.0}, cx{-0.5, 0.0}, cx{0.5, 0.0}, cx{0.5, 0.0}});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(out.entries[i] - expected.entries[i]) < 1e-14);
  }
  CHECK(is_unitary(u, 1e-12));
}

TEST_CASE("controlled flip rejects a non-orthonormal pair") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::string sys_names[] = {std::string("sys")};
  const SpaceLayout sys = l.sub_layout(sys_names);
  CHECK_THROWS_AS(controlled_flip_coupling(1.0, l, "ptr", "sys",
                                           StateVector::basis_state(sys, 0),
                                           StateVector::basis_state(sys, 0)),
                  std::invalid_argument);
}

TEST_CASE("controlled flip is an involution") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::string sys_names[] = {std::string("sys")};
  const SpaceLayout sys = l.sub_layout(sys_names);
  const StateVector b1 = qstate(sys, {cx{0.8, 0.0}, cx{0.0, 0.6}});
  const StateVector b2 = qstate(sys, {cx{0.6, 0.0}, cx{0.0, -0.8}});
  const auto ev = controlled_flip_coupling(1.0, l, "ptr", "sys", b1, b2);
  const auto u = embed_operator(ev.unitary, ev.targets, l);
  CHECK(max_abs_diff(compose(u, u), OperatorMatrix::identity(l)) < 1e-10);
}

TEST_CASE("composite coupling acts per the distinguished-state rule") {
  SpaceLayout l({{"W", 2}, {"F", 2}, {"spin", 2}});
  const std::vector<std::string> fs = {"F", "spin"};
  const SpaceLayout sub = l.sub_layout(fs);
  // (|1F s1> + |0F s2>)/sqrt(2) with the computational spin basis
  StateVector fs1 = qstate(sub, {cx{0}, cx{kInvSqrt2, 0.0}, cx{kInvSqrt2, 0.0}, cx{0}});
  StateVector fs2 = qstate(sub, {cx{0}, cx{-kInvSqrt2, 0.0}, cx{kInvSqrt2, 0.0}, cx{0}});
  const StateVector seeds[] = {fs1, fs2};
  auto basis = complete_orthonormal(sub, seeds, 1e-10);
  std::vector<StateVector> completion(basis.begin() + 1, basis.end());
  const auto ev = composite_basis_coupling(3.0, l, "W", fs, fs1, completion);
  const auto u = embed_operator(ev.unitary, ev.targets, l);

  // |0W>|1FS> -> |1W>|1FS>; |0W>|2FS> stays.
  StateVector in1 = kron(StateVector::basis_state(l.sub_layout(std::vector<std::string>{"W"}), 0), fs1);
  StateVector out1 = apply(u, StateVector(l, in1.entries));
  StateVector want1 = kron(StateVector::basis_state(l.sub_layout(std::vector<std::string>{"W"}), 1), fs1);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(out1.entries[i] - want1.entries[i]) < 1e-12);
  }
  StateVector in2 = kron(StateVector::basis_state(l.sub_layout(std::vector<std::string>{"W"}), 0), fs2);
  StateVector out2 = apply(u, StateVector(l, in2.entries));
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(out2.entries[i] - in2.entries[i]) < 1e-12);
  }
}

TEST_CASE("composite coupling on a product state matches controlled_flip") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::vector<std::string> sys = {"sys"};
  const SpaceLayout sub = l.sub_layout(sys);
  const StateVector b1 = StateVector::basis_state(sub, 1);
  const StateVector b2 = StateVector::basis_state(sub, 0);
  const auto flip = controlled_flip_coupling(1.0, l, "ptr", "sys", b1, b2);
  const auto comp = composite_basis_coupling(1.0, l, "ptr", sys, b1, {b2});
  CHECK(max_abs_diff(embed_operator(flip.unitary, flip.targets, l),
                     embed_operator(comp.unitary, comp.targets, l)) < 1e-14);
}

TEST_CASE("composite coupling rejects sloppy orthonormality") {
  SpaceLayout l({{"ptr", 2}, {"sys", 2}});
  const std::vector<std::string> sys = {"sys"};
  const SpaceLayout sub = l.sub_layout(sys);
  StateVector almost = qstate(sub, {cx{1.0, 0.0}, cx{1e-3, 0.0}});
  CHECK_THROWS_AS(
      composite_basis_coupling(1.0, l, "ptr", sys, StateVector::basis_state(sub, 0),
                               {almost}),
      std::invalid_argument);
}

namespace {

Protocol minimal_protocol() {
  const SpaceLayout l = one_qubit();
  Protocol p;
  p.layout = l;
  p.initial = StateVector::basis_state(l, 0);
  MeasurementEvent m;
  m.time = 1.0;
  m.observer = "A";
  m.registered = true;
  m.observable = projector_observable(l, "q", StateVector::basis_state(l, 0));
  p.events.push_back(std::move(m));
  return p;
}

}  // namespace

TEST_CASE("validate accepts a minimal protocol") {
  CHECK(validate(minimal_protocol()).empty());
}

TEST_CASE("validate flags non-increasing event times") {
  Protocol p = minimal_protocol();
  MeasurementEvent m = std::get<MeasurementEvent>(p.events[0]);
  p.events.push_back(m);  // same time again
  const auto diags = validate(p);
  REQUIRE(!diags.empty());
  bool found = false;
  for (const auto& d : diags) found = found || d.message.find("non-increasing") != std::string::npos;
  CHECK(found);
}

TEST_CASE("validate flags an incomplete observable") {
  Protocol p = minimal_protocol();
  auto& m = std::get<MeasurementEvent>(p.events[0]);
  for (auto& b : m.observable.branches) {
    b.projector = scaled(b.projector, cx{0.9, 0.0});
    b.basis.clear();
  }
  const auto diags = validate(p);
  bool found = false;
  for (const auto& d : diags) {
    found = found || d.message.find("incomplete observable") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("validate flags a missing registered event") {
  Protocol p = minimal_protocol();
  std::get<MeasurementEvent>(p.events[0]).registered = false;
  const auto diags = validate(p);
  bool found = false;
  for (const auto& d : diags) {
    found = found || d.message.find("no registered measurement") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("weighted sum is Hermitian and reproduces eigenvalues on branch bases") {
  SpaceLayout l({{"W", 2}, {"F", 2}});
  const std::string f[] = {std::string("F")};
  auto obs = projector_observable(l, "F", StateVector::basis_state(l.sub_layout(f), 1));
  const auto m = obs.weighted_sum();
  CHECK(is_hermitian(m, 1e-14));
  for (const auto& branch : obs.branches) {
    for (const auto& v : branch.basis) {
      const auto mv = apply(m, v);
      for (std::size_t i = 0; i < mv.entries.size(); ++i) {
        CHECK(std::abs(mv.entries[i] - cx{branch.eigenvalue, 0.0} * v.entries[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("relabeling eigenvalues leaves branch projectors untouched") {
  const SpaceLayout l = one_qubit();
  auto obs = projector_observable(l, "q", StateVector::basis_state(l, 1));
  auto relabeled = obs;
  relabeled.branches[0].eigenvalue = 7.5;   // injective remap of {1, 0}
  relabeled.branches[1].eigenvalue = -3.0;
  for (std::size_t b = 0; b < obs.branches.size(); ++b) {
    CHECK(max_abs_diff(obs.branches[b].projector, relabeled.branches[b].projector) == 0.0);
  }
  CHECK(validate(minimal_protocol()).empty());
}

TEST_CASE("the approximate eigendecomposition recovers a degenerate projector family") {
  SpaceLayout l({{"A", 2}, {"B", 2}});
  // H = 2 P0 - 1 P1 with P0 = |00><00| + |11><11| (degenerate pair).
  OperatorMatrix p0 = OperatorMatrix::zero(l);
  p0.at(0, 0) = p0.at(3, 3) = cx{1.0, 0.0};
  const OperatorMatrix p1 = sub(OperatorMatrix::identity(l), p0);
  const OperatorMatrix h = add(scaled(p0, cx{2.0, 0.0}), scaled(p1, cx{-1.0, 0.0}));

  const auto obs = observable_from_hermitian_approx(h);
  REQUIRE(obs.branches.size() == 2);
  CHECK(obs.branches[0].eigenvalue == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(obs.branches[1].eigenvalue == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(max_abs_diff(obs.branches[0].projector, p1) < 1e-8);
  CHECK(max_abs_diff(obs.branches[1].projector, p0) < 1e-8);
  CHECK(obs.branches[0].basis.size() == 2);
  CHECK(obs.branches[1].basis.size() == 2);
}

TEST_CASE("the approximate eigendecomposition clusters near-degenerate eigenvalues") {
  SpaceLayout l({{"q", 2}});
  OperatorMatrix h = OperatorMatrix::zero(l);
  h.at(0, 0) = cx{1.0, 0.0};
  h.at(1, 1) = cx{1.0 + 1e-10, 0.0};
  const auto merged = observable_from_hermitian_approx(h, 1e-8);
  CHECK(merged.branches.size() == 1);
  const auto split = observable_from_hermitian_approx(h, 1e-12);
  CHECK(split.branches.size() == 2);
  CHECK_THROWS_AS(
      observable_from_hermitian_approx(OperatorMatrix(l, {cx{0, 0}, cx{1, 0}, cx{0, 0}, cx{0, 0}})),
      std::invalid_argument);
}

TEST_CASE("protocol tolerances override the module defaults") {
  Protocol p = minimal_protocol();
  // nudge one coupling off unitarity by 1e-8: rejected by default, accepted
  // when the protocol carries a looser bound
  CouplingEvent c;
  c.time = 0.5;
  c.targets = {"q"};
  c.unitary = OperatorMatrix::identity(p.layout);
  c.unitary.at(0, 0) = cx{1.0 + 1e-8, 0.0};
  p.events.insert(p.events.begin(), std::move(c));

  bool flagged = false;
  for (const auto& d : validate(p)) {
    flagged = flagged || d.message.find("unitarity") != std::string::npos;
  }
  CHECK(flagged);

  Protocol loose = p;
  loose.tol.unitary = 1e-6;
  CHECK(validate(loose).empty());
}

TEST_CASE("layouts beyond the dense cap are rejected") {
  std::vector<Subsystem> subs;
  for (int i = 0; i < 9; ++i) subs.push_back({"q" + std::to_string(i), 2});  // 512
  CHECK_THROWS_AS(SpaceLayout(std::move(subs)), std::invalid_argument);
}

TEST_CASE("range_basis recovers an orthonormal basis of a rank-2 projector") {
  SpaceLayout l({{"A", 2}, {"B", 2}});
  // projector onto span{|00>, |11>}
  OperatorMatrix p = OperatorMatrix::zero(l);
  p.at(0, 0) = cx{1.0, 0.0};
  p.at(3, 3) = cx{1.0, 0.0};
  const auto basis = range_basis(p, 1e-10);
  REQUIRE(basis.size() == 2);
  for (const auto& v : basis) {
    const auto pv = apply(p, v);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(pv.entries[i] - v.entries[i]) < 1e-12);
    }
  }
  CHECK(std::abs(inner(basis[0], basis[1])) < 1e-12);
}
