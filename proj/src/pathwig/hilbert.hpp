#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathwig {

using cx = std::complex<double>;

// Numeric tolerances used by validation and reporting. A Protocol carries its
// own copy so a run can tighten or relax them without touching globals.
struct Tolerances {
  double norm = 1e-12;       // | ||psi|| - 1 | for protocol input states
  double unitary = 1e-10;    // max-entry bound on U^dag U - I
  double projector = 1e-10;  // Hermiticity / idempotence / completeness
  double prune = 1e-14;      // virtual paths below this |amplitude| are dropped
  double branch = 1e-14;     // collapse branches below this probability are dropped
  double sum = 1e-10;        // distribution normalization bound
  double certainty = 1e-10;  // entrywise bound for the repeated-observable check
};

struct Subsystem {
  std::string name;
  std::size_t dim = 0;
};

// Dense matrices only; layouts are capped so a full operator stays desk-sized.
inline constexpr std::size_t kMaxTotalDim = 256;

// Ordered tensor-product factors of a composite Hilbert space. The leftmost
// subsystem is the most significant digit of a composite basis index: for
// qubits (A, B) the basis order is |00>, |01>, |10>, |11> with A's bit first.
// Subsystem order is fixed at construction; all permutation logic lives in
// embed_operator.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Subsystem> subsystems);

  const std::vector<Subsystem>& subsystems() const { return subs_; }
  std::size_t size() const { return subs_.size(); }
  std::size_t total_dim() const { return total_; }

  bool has(std::string_view name) const;
  std::size_t position(std::string_view name) const;  // throws on unknown name
  std::size_t dim_at(std::size_t pos) const { return subs_[pos].dim; }

  void digits_of(std::size_t index, std::span<std::size_t> out) const;
  std::size_t index_of(std::span<const std::size_t> digits) const;

  // Layout of the named subsystems, in the order given.
  SpaceLayout sub_layout(std::span<const std::string> names) const;

  bool operator==(const SpaceLayout& other) const;

 private:
  std::vector<Subsystem> subs_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

// Values are treated as immutable once built; every operation below returns a
// fresh value. Loops accumulate in ascending index order, so results are
// bit-reproducible across runs.
struct StateVector {
  SpaceLayout layout;
  std::vector<cx> entries;

  StateVector() = default;
  StateVector(SpaceLayout l, std::vector<cx> e);

  double norm() const;
  static StateVector basis_state(const SpaceLayout& l, std::size_t index);
};

struct OperatorMatrix {
  SpaceLayout layout;
  std::vector<cx> entries;  // row-major, dim x dim
  bool unitary_tag = false;

  OperatorMatrix() = default;
  OperatorMatrix(SpaceLayout l, std::vector<cx> e, bool unitary = false);

  std::size_t dim() const { return layout.total_dim(); }
  cx& at(std::size_t r, std::size_t c) { return entries[r * dim() + c]; }
  const cx& at(std::size_t r, std::size_t c) const { return entries[r * dim() + c]; }

  static OperatorMatrix identity(const SpaceLayout& l);
  static OperatorMatrix zero(const SpaceLayout& l);
};

// Kronecker products; layouts concatenate, no normalization requirements.
StateVector kron(const StateVector& a, const StateVector& b);
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);

// Product-state preparation: factors must be normalized and their layouts
// concatenate without name collisions.
StateVector tensor_state(std::span<const StateVector> factors, const Tolerances& tol = {});

StateVector apply(const OperatorMatrix& op, const StateVector& v);
cx inner(const StateVector& a, const StateVector& b);  // conjugate-linear in a
StateVector add(const StateVector& a, const StateVector& b);
StateVector scaled(const StateVector& v, cx factor);

OperatorMatrix adjoint(const OperatorMatrix& op);
OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b);  // apply b, then a
OperatorMatrix add(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix sub(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix scaled(const OperatorMatrix& m, cx factor);
OperatorMatrix outer(const StateVector& a, const StateVector& b);  // |a><b|
cx trace(const OperatorMatrix& m);

double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b);
bool is_unitary(const OperatorMatrix& op, double tol);
bool is_hermitian(const OperatorMatrix& op, double tol);
bool is_idempotent(const OperatorMatrix& op, double tol);

// Lift `local` (acting on sub_layout(targets)) to the full layout, identity on
// every other subsystem. Targets may be non-adjacent and in any order; a
// unitary tag is checked before embedding and carried through.
OperatorMatrix embed_operator(const OperatorMatrix& local,
                              std::span<const std::string> targets,
                              const SpaceLayout& layout,
                              const Tolerances& tol = {});

}  // namespace pathwig
