#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pathwig/hilbert.hpp"

using namespace pathwig;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

SpaceLayout qubit(const std::string& name) {
  return SpaceLayout({Subsystem{name, 2}});
}

StateVector state(const SpaceLayout& l, std::vector<cx> e) {
  return StateVector(l, std::move(e));
}

// Gram-Schmidt of a Gaussian matrix; test-local randomness source.
OperatorMatrix random_unitary(const SpaceLayout& l, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t d = l.total_dim();
  std::vector<std::vector<cx>> rows(d, std::vector<cx>(d));
  for (auto& row : rows) {
    for (auto& z : row) z = cx{gauss(rng), gauss(rng)};
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      cx ov{0.0, 0.0};
      for (std::size_t k = 0; k < d; ++k) ov += std::conj(rows[j][k]) * rows[i][k];
      for (std::size_t k = 0; k < d; ++k) rows[i][k] -= ov * rows[j][k];
    }
    double nn = 0.0;
    for (const cx& z : rows[i]) nn += std::norm(z);
    nn = std::sqrt(nn);
    for (cx& z : rows[i]) z /= nn;
  }
  std::vector<cx> entries(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) entries[r * d + c] = rows[r][c];
  }
  return OperatorMatrix(l, std::move(entries), true);
}

StateVector random_state(const SpaceLayout& l, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cx> e(l.total_dim());
  for (auto& z : e) z = cx{gauss(rng), gauss(rng)};
  StateVector v(l, std::move(e));
  const double nn = v.norm();
  for (auto& z : v.entries) z /= nn;
  return v;
}

}  // namespace

TEST_CASE("layout indexing puts the leftmost subsystem first") {
  SpaceLayout l({{"A", 2}, {"B", 3}, {"C", 2}});
  CHECK(l.total_dim() == 12);
  std::size_t digits[3];
  l.digits_of(11, digits);
  CHECK(digits[0] == 1);
  CHECK(digits[1] == 2);
  CHECK(digits[2] == 1);
  const std::size_t back[] = {1, 2, 1};
  CHECK(l.index_of(back) == 11);
}

TEST_CASE("layout rejects duplicate names and trivial factors") {
  CHECK_THROWS_AS(SpaceLayout({{"A", 2}, {"A", 2}}), std::invalid_argument);
  CHECK_THROWS_AS(SpaceLayout({{"A", 1}}), std::invalid_argument);
}

TEST_CASE("tensor_state on computational basis states") {
  const auto a = qubit("a"), b = qubit("b"), c = qubit("c");
  const StateVector factors[] = {StateVector::basis_state(a, 0),
                                 StateVector::basis_state(b, 0),
                                 StateVector::basis_state(c, 0)};
  const StateVector out = tensor_state(factors);
  CHECK(out.entries[0] == cx{1.0, 0.0});
  for (std::size_t i = 1; i < 8; ++i) CHECK(out.entries[i] == cx{0.0, 0.0});
}

TEST_CASE("tensor_state spreads a superposed last factor") {
  const auto w = qubit("W"), f = qubit("F"), s = qubit("spin");
  const StateVector factors[] = {StateVector::basis_state(w, 0),
                                 StateVector::basis_state(f, 0),
                                 state(s, {kInvSqrt2, kInvSqrt2})};
  const StateVector out = tensor_state(factors);
  CHECK(std::abs(out.entries[0] - cx{kInvSqrt2, 0.0}) < 1e-15);
  CHECK(std::abs(out.entries[1] - cx{kInvSqrt2, 0.0}) < 1e-15);
  for (std::size_t i = 2; i < 8; ++i) CHECK(std::abs(out.entries[i]) == 0.0);
}

TEST_CASE("tensor_state matches the direct Kronecker expansion") {
  const auto a = qubit("a"), b = qubit("b");
  const StateVector factors[] = {state(a, {kInvSqrt2, kInvSqrt2}),
                                 state(b, {kInvSqrt2, -kInvSqrt2})};
  const StateVector out = tensor_state(factors);
  const cx expected[] = {{0.5, 0.0}, {-0.5, 0.0}, {0.5, 0.0}, {-0.5, 0.0}};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.entries[i] - expected[i]) < 1e-15);
}

TEST_CASE("tensor_state rejects non-normalized factors and name collisions") {
  const auto a = qubit("a");
  const StateVector bad[] = {state(a, {cx{2.0, 0.0}, cx{0.0, 0.0}})};
  CHECK_THROWS_AS(tensor_state(bad), std::invalid_argument);
  const StateVector clash[] = {StateVector::basis_state(a, 0),
                               StateVector::basis_state(a, 0)};
  CHECK_THROWS_AS(tensor_state(clash), std::invalid_argument);
}

TEST_CASE("embedded identity is the full identity") {
  SpaceLayout l({{"W", 2}, {"F", 2}, {"spin", 2}});
  const std::string targets[] = {std::string("spin")};
  const auto id = OperatorMatrix::identity(l.sub_layout(targets));
  const auto embedded = embed_operator(id, targets, l);
  CHECK(max_abs_diff(embedded, OperatorMatrix::identity(l)) == 0.0);
}

TEST_CASE("embedding CNOT(control=spin, target=F) permutes the expected basis states") {
  SpaceLayout l({{"W", 2}, {"F", 2}, {"spin", 2}});
  // CNOT on (F, spin) with spin as control: |F,s> -> |F xor s, s>.
  const std::string targets[] = {std::string("F"), std::string("spin")};
  const SpaceLayout sub = l.sub_layout(targets);
  std::vector<cx> e(16, cx{0.0, 0.0});
  auto set = [&](std::size_t from, std::size_t to) { e[to * 4 + from] = cx{1.0, 0.0}; };
  set(0, 0);  // 00 -> 00
  set(1, 3);  // 01 -> 11
  set(2, 2);  // 10 -> 10
  set(3, 1);  // 11 -> 01
  const OperatorMatrix local(sub, std::move(e), true);
  const auto full = embed_operator(local, targets, l);

  // Hand-enumerated images of all 8 basis states (W F s -> W F' s).
  const std::size_t expected[8] = {0, 3, 2, 1, 4, 7, 6, 5};
  for (std::size_t col = 0; col < 8; ++col) {
    for (std::size_t row = 0; row < 8; ++row) {
      const cx want = (row == expected[col]) ? cx{1.0, 0.0} : cx{0.0, 0.0};
      CHECK(full.at(row, col) == want);
    }
  }
}

TEST_CASE("embedding a non-unitary matrix tagged unitary fails") {
  SpaceLayout l({{"A", 2}, {"B", 2}});
  const std::string targets[] = {std::string("A")};
  OperatorMatrix bad(l.sub_layout(targets), {cx{2, 0}, cx{0, 0}, cx{0, 0}, cx{1, 0}}, true);
  CHECK_THROWS_AS(embed_operator(bad, targets, l), std::invalid_argument);
}

TEST_CASE("apply, inner, adjoint behave as expected on simple cases") {
  const auto a = qubit("a");
  const StateVector plus = state(a, {kInvSqrt2, kInvSqrt2});
  CHECK(max_abs_diff(OperatorMatrix::identity(a), adjoint(OperatorMatrix::identity(a))) == 0.0);
  const StateVector applied = apply(OperatorMatrix::identity(a), plus);
  CHECK(applied.entries == plus.entries);

  CHECK(inner(StateVector::basis_state(a, 0), StateVector::basis_state(a, 1)) == cx{0.0, 0.0});
  CHECK(std::abs(inner(plus, StateVector::basis_state(a, 0)) - cx{kInvSqrt2, 0.0}) < 1e-15);
  // conjugate linearity in the first argument
  const StateVector phased = state(a, {cx{0.0, 1.0}, cx{0.0, 0.0}});
  CHECK(std::abs(inner(phased, StateVector::basis_state(a, 0)) - cx{0.0, -1.0}) < 1e-15);
}

TEST_CASE("random unitaries preserve inner products") {
  std::mt19937_64 rng(7);
  SpaceLayout l({{"A", 2}, {"B", 3}});
  for (int trial = 0; trial < 25; ++trial) {
    const auto u = random_unitary(l, rng);
    const auto a = random_state(l, rng);
    const auto b = random_state(l, rng);
    CHECK(std::abs(inner(apply(u, a), apply(u, b)) - inner(a, b)) < 1e-10);
  }
}

TEST_CASE("embedding factorizes over disjoint adjacent targets") {
  std::mt19937_64 rng(11);
  SpaceLayout l({{"A", 2}, {"B", 2}, {"C", 3}});
  const std::string ta[] = {std::string("A")};
  const std::string tb[] = {std::string("B")};
  const std::string tab[] = {std::string("A"), std::string("B")};
  for (int trial = 0; trial < 10; ++trial) {
    const auto ua = random_unitary(l.sub_layout(ta), rng);
    const auto ub = random_unitary(l.sub_layout(tb), rng);
    const auto lhs = compose(embed_operator(ua, ta, l), embed_operator(ub, tb, l));
    const auto rhs = embed_operator(kron(ua, ub), tab, l);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("adjoint is an exact involution") {
  std::mt19937_64 rng(13);
  SpaceLayout l({{"A", 2}, {"B", 2}});
  const auto u = random_unitary(l, rng);
  CHECK(max_abs_diff(adjoint(adjoint(u)), u) == 0.0);
}

TEST_CASE("kron norm is the product of factor norms") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector a(qubit("a"), {cx{gauss(rng), gauss(rng)}, cx{gauss(rng), gauss(rng)}});
    StateVector b(qubit("b"), {cx{gauss(rng), gauss(rng)}, cx{gauss(rng), gauss(rng)}});
    CHECK(std::abs(kron(a, b).norm() - a.norm() * b.norm()) < 1e-12);
  }
}

TEST_CASE("non-adjacent embedding permutes target order correctly") {
  SpaceLayout l({{"A", 2}, {"B", 2}, {"C", 2}});
  // local acts on (C, A): flip C when A is 1 -> CNOT(control=A pointer=C)
  const std::string targets[] = {std::string("C"), std::string("A")};
  const SpaceLayout sub = l.sub_layout(targets);
  std::vector<cx> e(16, cx{0.0, 0.0});
  auto set = [&](std::size_t from, std::size_t to) { e[to * 4 + from] = cx{1.0, 0.0}; };
  // index = c*2 + a
  set(0, 0);  // c0 a0
  set(1, 3);  // c0 a1 -> c1 a1
  set(2, 2);  // c1 a0
  set(3, 1);  // c1 a1 -> c0 a1
  const OperatorMatrix local(sub, std::move(e), true);
  const auto full = embed_operator(local, targets, l);
  // |A B C> = |1 0 0> (index 4) must map to |1 0 1> (index 5), B untouched.
  const StateVector in = StateVector::basis_state(l, 4);
  const StateVector out = apply(full, in);
  CHECK(std::abs(out.entries[5] - cx{1.0, 0.0}) < 1e-15);
}
