#include "insens/state.hpp"

#include <numeric>
#include <sstream>

#include "insens/error.hpp"

namespace insens {

StateVector::StateVector(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_) {
    if (c < 0) throw DomainError("state vector entries must be nonnegative");
  }
}

StateVector::StateVector(std::initializer_list<int> counts)
    : StateVector(std::vector<int>(counts)) {}

void StateVector::set_count(ClassIndex i, int value) {
  if (value < 0) throw DomainError("state vector entries must be nonnegative");
  counts_.at(i - 1) = value;
}

int StateVector::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), 0);
}

bool StateVector::is_zero() const noexcept {
  for (int c : counts_) {
    if (c != 0) return false;
  }
  return true;
}

std::string StateVector::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (k) os << ',';
    os << counts_[k];
  }
  os << ')';
  return os.str();
}

bool can_transition(const StateVector& n, ClassIndex i) noexcept {
  return i == kExterior || (i <= n.size() && n[i - 1] > 0);
}

StateVector transition(const StateVector& n, ClassIndex i, ClassIndex j) {
  if (i > n.size() || j > n.size()) {
    throw DomainError("class index out of range in transition");
  }
  if (!can_transition(n, i)) {
    throw DomainError("transition underflow: class " + std::to_string(i) +
                      " is empty in state " + n.to_string());
  }
  std::vector<int> out = n.counts();
  if (i != kExterior) --out[i - 1];
  if (j != kExterior) ++out[j - 1];
  return StateVector(std::move(out));
}

LatticeBox::LatticeBox(std::vector<int> upper) : upper_(std::move(upper)) {
  if (upper_.empty()) throw DomainError("lattice box needs at least one class");
  size_ = 1;
  for (int u : upper_) {
    if (u < 0) throw DomainError("lattice box bounds must be nonnegative");
    size_ *= static_cast<std::size_t>(u) + 1;
  }
}

bool LatticeBox::contains(const StateVector& n) const noexcept {
  if (n.size() != upper_.size()) return false;
  for (std::size_t k = 0; k < upper_.size(); ++k) {
    if (n[k] > upper_[k]) return false;
  }
  return true;
}

bool LatticeBox::on_upper_face(const StateVector& n) const noexcept {
  for (std::size_t k = 0; k < upper_.size(); ++k) {
    if (n[k] == upper_[k]) return true;
  }
  return false;
}

std::size_t LatticeBox::index_of(const StateVector& n) const {
  if (!contains(n)) {
    throw DomainError("state " + n.to_string() + " lies outside the box");
  }
  std::size_t index = 0;
  for (std::size_t k = 0; k < upper_.size(); ++k) {
    index = index * (static_cast<std::size_t>(upper_[k]) + 1) +
            static_cast<std::size_t>(n[k]);
  }
  return index;
}

StateVector LatticeBox::state_at(std::size_t index) const {
  if (index >= size_) throw DomainError("box index out of range");
  std::vector<int> counts(upper_.size());
  for (std::size_t k = upper_.size(); k-- > 0;) {
    const auto extent = static_cast<std::size_t>(upper_[k]) + 1;
    counts[k] = static_cast<int>(index % extent);
    index /= extent;
  }
  return StateVector(std::move(counts));
}

std::vector<StateVector> LatticeBox::states() const {
  std::vector<StateVector> out;
  out.reserve(size_);
  for (std::size_t s = 0; s < size_; ++s) out.push_back(state_at(s));
  return out;
}

}  // namespace insens
