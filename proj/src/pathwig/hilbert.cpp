#include "pathwig/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace pathwig {

SpaceLayout::SpaceLayout(std::vector<Subsystem> subsystems) : subs_(std::move(subsystems)) {
  if (subs_.empty()) {
    throw std::invalid_argument("layout requires at least one subsystem");
  }
  std::unordered_set<std::string_view> seen;
  total_ = 1;
  for (const auto& s : subs_) {
    if (s.dim < 2) {
      throw std::invalid_argument("subsystem '" + s.name + "' must have dim >= 2");
    }
    if (!seen.insert(s.name).second) {
      throw std::invalid_argument("duplicate subsystem name '" + s.name + "'");
    }
    total_ *= s.dim;
    if (total_ > kMaxTotalDim) {
      throw std::invalid_argument("total dimension exceeds dense-matrix cap of " +
                                  std::to_string(kMaxTotalDim));
    }
  }
  strides_.assign(subs_.size(), 1);
  for (std::size_t i = subs_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * subs_[i].dim;
  }
}

bool SpaceLayout::has(std::string_view name) const {
  return std::any_of(subs_.begin(), subs_.end(),
                     [&](const Subsystem& s) { return s.name == name; });
}

std::size_t SpaceLayout::position(std::string_view name) const {
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    if (subs_[i].name == name) return i;
  }
  throw std::invalid_argument("unknown subsystem '" + std::string(name) + "'");
}

void SpaceLayout::digits_of(std::size_t index, std::span<std::size_t> out) const {
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    out[i] = (index / strides_[i]) % subs_[i].dim;
  }
}

std::size_t SpaceLayout::index_of(std::span<const std::size_t> digits) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    index += digits[i] * strides_[i];
  }
  return index;
}

SpaceLayout SpaceLayout::sub_layout(std::span<const std::string> names) const {
  std::vector<Subsystem> picked;
  picked.reserve(names.size());
  for (const auto& n : names) {
    picked.push_back(subs_[position(n)]);
  }
  return SpaceLayout(std::move(picked));
}

bool SpaceLayout::operator==(const SpaceLayout& other) const {
  if (subs_.size() != other.subs_.size()) return false;
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    if (subs_[i].name != other.subs_[i].name || subs_[i].dim != other.subs_[i].dim) {
      return false;
    }
  }
  return true;
}

StateVector::StateVector(SpaceLayout l, std::vector<cx> e)
    : layout(std::move(l)), entries(std::move(e)) {
  if (entries.size() != layout.total_dim()) {
    throw std::invalid_argument("state vector length does not match layout dimension");
  }
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const cx& z : entries) sum += std::norm(z);
  return std::sqrt(sum);
}

StateVector StateVector::basis_state(const SpaceLayout& l, std::size_t index) {
  if (index >= l.total_dim()) {
    throw std::invalid_argument("basis index out of range");
  }
  std::vector<cx> e(l.total_dim(), cx{0.0, 0.0});
  e[index] = cx{1.0, 0.0};
  return StateVector(l, std::move(e));
}

OperatorMatrix::OperatorMatrix(SpaceLayout l, std::vector<cx> e, bool unitary)
    : layout(std::move(l)), entries(std::move(e)), unitary_tag(unitary) {
  const std::size_t d = layout.total_dim();
  if (entries.size() != d * d) {
    throw std::invalid_argument("operator entry count does not match layout dimension");
  }
}

OperatorMatrix OperatorMatrix::identity(const SpaceLayout& l) {
  const std::size_t d = l.total_dim();
  std::vector<cx> e(d * d, cx{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i) e[i * d + i] = cx{1.0, 0.0};
  return OperatorMatrix(l, std::move(e), true);
}

OperatorMatrix OperatorMatrix::zero(const SpaceLayout& l) {
  const std::size_t d = l.total_dim();
  return OperatorMatrix(l, std::vector<cx>(d * d, cx{0.0, 0.0}));
}

namespace {

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string("layout mismatch in ") + what);
  }
}

SpaceLayout concat_layouts(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<Subsystem> subs = a.subsystems();
  subs.insert(subs.end(), b.subsystems().begin(), b.subsystems().end());
  return SpaceLayout(std::move(subs));
}

}  // namespace

StateVector kron(const StateVector& a, const StateVector& b) {
  const std::size_t da = a.entries.size(), db = b.entries.size();
  std::vector<cx> e(da * db);
  for (std::size_t i = 0; i < da; ++i) {
    for (std::size_t j = 0; j < db; ++j) {
      e[i * db + j] = a.entries[i] * b.entries[j];
    }
  }
  return StateVector(concat_layouts(a.layout, b.layout), std::move(e));
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  const std::size_t da = a.dim(), db = b.dim(), d = da * db;
  std::vector<cx> e(d * d);
  for (std::size_t ra = 0; ra < da; ++ra) {
    for (std::size_t rb = 0; rb < db; ++rb) {
      for (std::size_t ca = 0; ca < da; ++ca) {
        for (std::size_t cb = 0; cb < db; ++cb) {
          e[(ra * db + rb) * d + (ca * db + cb)] = a.at(ra, ca) * b.at(rb, cb);
        }
      }
    }
  }
  return OperatorMatrix(concat_layouts(a.layout, b.layout), std::move(e),
                        a.unitary_tag && b.unitary_tag);
}

StateVector tensor_state(std::span<const StateVector> factors, const Tolerances& tol) {
  if (factors.empty()) {
    throw std::invalid_argument("tensor_state needs at least one factor");
  }
  for (const auto& f : factors) {
    if (std::abs(f.norm() - 1.0) > tol.norm) {
      throw std::invalid_argument("tensor_state factor is not normalized");
    }
  }
  StateVector out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    out = kron(out, factors[i]);  // concat_layouts rejects name collisions
  }
  return out;
}

StateVector apply(const OperatorMatrix& op, const StateVector& v) {
  require_same_layout(op.layout, v.layout, "apply");
  const std::size_t d = op.dim();
  std::vector<cx> e(d, cx{0.0, 0.0});
  for (std::size_t r = 0; r < d; ++r) {
    cx acc{0.0, 0.0};
    const cx* row = &op.entries[r * d];
    for (std::size_t c = 0; c < d; ++c) acc += row[c] * v.entries[c];
    e[r] = acc;
  }
  return StateVector(v.layout, std::move(e));
}

cx inner(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout, b.layout, "inner");
  cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    acc += std::conj(a.entries[i]) * b.entries[i];
  }
  return acc;
}

StateVector add(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout, b.layout, "add");
  std::vector<cx> e(a.entries.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.entries[i] + b.entries[i];
  return StateVector(a.layout, std::move(e));
}

StateVector scaled(const StateVector& v, cx factor) {
  std::vector<cx> e(v.entries.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = v.entries[i] * factor;
  return StateVector(v.layout, std::move(e));
}

OperatorMatrix adjoint(const OperatorMatrix& op) {
  const std::size_t d = op.dim();
  std::vector<cx> e(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) e[c * d + r] = std::conj(op.at(r, c));
  }
  return OperatorMatrix(op.layout, std::move(e), op.unitary_tag);
}

OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_layout(a.layout, b.layout, "compose");
  const std::size_t d = a.dim();
  std::vector<cx> e(d * d, cx{0.0, 0.0});
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t k = 0; k < d; ++k) {
      const cx ark = a.at(r, k);
      if (ark == cx{0.0, 0.0}) continue;
      const cx* brow = &b.entries[k * d];
      for (std::size_t c = 0; c < d; ++c) e[r * d + c] += ark * brow[c];
    }
  }
  return OperatorMatrix(a.layout, std::move(e), a.unitary_tag && b.unitary_tag);
}

OperatorMatrix add(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_layout(a.layout, b.layout, "add");
  std::vector<cx> e(a.entries.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.entries[i] + b.entries[i];
  return OperatorMatrix(a.layout, std::move(e));
}

OperatorMatrix sub(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_layout(a.layout, b.layout, "sub");
  std::vector<cx> e(a.entries.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.entries[i] - b.entries[i];
  return OperatorMatrix(a.layout, std::move(e));
}

OperatorMatrix scaled(const OperatorMatrix& m, cx factor) {
  std::vector<cx> e(m.entries.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = m.entries[i] * factor;
  return OperatorMatrix(m.layout, std::move(e));
}

OperatorMatrix outer(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout, b.layout, "outer");
  const std::size_t d = a.entries.size();
  std::vector<cx> e(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) e[r * d + c] = a.entries[r] * std::conj(b.entries[c]);
  }
  return OperatorMatrix(a.layout, std::move(e));
}

cx trace(const OperatorMatrix& m) {
  cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < m.dim(); ++i) acc += m.at(i, i);
  return acc;
}

double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_layout(a.layout, b.layout, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    m = std::max(m, std::abs(a.entries[i] - b.entries[i]));
  }
  return m;
}

bool is_unitary(const OperatorMatrix& op, double tol) {
  return max_abs_diff(compose(adjoint(op), op), OperatorMatrix::identity(op.layout)) <= tol;
}

bool is_hermitian(const OperatorMatrix& op, double tol) {
  return max_abs_diff(op, adjoint(op)) <= tol;
}

bool is_idempotent(const OperatorMatrix& op, double tol) {
  return max_abs_diff(compose(op, op), op) <= tol;
}

OperatorMatrix embed_operator(const OperatorMatrix& local,
                              std::span<const std::string> targets,
                              const SpaceLayout& layout, const Tolerances& tol) {
  if (targets.empty()) {
    throw std::invalid_argument("embed_operator needs at least one target");
  }
  std::vector<std::size_t> tpos;
  tpos.reserve(targets.size());
  std::size_t local_dim = 1;
  for (const auto& name : targets) {
    const std::size_t p = layout.position(name);
    if (std::find(tpos.begin(), tpos.end(), p) != tpos.end()) {
      throw std::invalid_argument("duplicate embed target '" + name + "'");
    }
    tpos.push_back(p);
    local_dim *= layout.dim_at(p);
  }
  if (local_dim != local.dim()) {
    throw std::invalid_argument("local operator dimension does not match targets");
  }
  if (local.unitary_tag && !is_unitary(local, tol.unitary)) {
    throw std::invalid_argument("operator tagged unitary fails the unitarity bound");
  }

  std::vector<bool> is_target(layout.size(), false);
  for (std::size_t p : tpos) is_target[p] = true;

  const std::size_t d = layout.total_dim();
  const std::size_t n = layout.size();
  OperatorMatrix out = OperatorMatrix::zero(layout);
  out.unitary_tag = local.unitary_tag;

  std::vector<std::size_t> dr(n), dc(n);
  for (std::size_t r = 0; r < d; ++r) {
    layout.digits_of(r, dr);
    for (std::size_t c = 0; c < d; ++c) {
      layout.digits_of(c, dc);
      bool diagonal_rest = true;
      for (std::size_t p = 0; p < n; ++p) {
        if (!is_target[p] && dr[p] != dc[p]) {
          diagonal_rest = false;
          break;
        }
      }
      if (!diagonal_rest) continue;
      std::size_t lr = 0, lc = 0;
      for (std::size_t p : tpos) {
        lr = lr * layout.dim_at(p) + dr[p];
        lc = lc * layout.dim_at(p) + dc[p];
      }
      out.at(r, c) = local.at(lr, lc);
    }
  }
  return out;
}

}  // namespace pathwig
