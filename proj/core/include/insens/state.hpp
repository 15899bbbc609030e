#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace insens {

// Index into the extended class set {0, 1, ..., N}; 0 is the exterior of
// the network (source of external arrivals, sink of departures).
using ClassIndex = std::size_t;
inline constexpr ClassIndex kExterior = 0;

// Occupancy vector n = (n_1, ..., n_N). Component k of the vector holds the
// count of class k + 1.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t num_classes) : counts_(num_classes, 0) {}
  explicit StateVector(std::vector<int> counts);
  StateVector(std::initializer_list<int> counts);

  std::size_t size() const noexcept { return counts_.size(); }

  // Count of class i, 1-based (i in 1..N).
  int count(ClassIndex i) const { return counts_.at(i - 1); }
  void set_count(ClassIndex i, int value);

  // 0-based coordinate access.
  int operator[](std::size_t k) const { return counts_[k]; }

  int total() const noexcept;
  bool is_zero() const noexcept;

  const std::vector<int>& counts() const noexcept { return counts_; }
  auto begin() const noexcept { return counts_.begin(); }
  auto end() const noexcept { return counts_.end(); }

  std::string to_string() const;

  friend auto operator<=>(const StateVector&, const StateVector&) = default;
  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<int> counts_;
};

// T_ij n = n - e_i + e_j with e_0 = 0. Throws DomainError on underflow or
// when an index exceeds N.
StateVector transition(const StateVector& n, ClassIndex i, ClassIndex j);

// Non-throwing variant: false when n_i = 0 for i != 0.
bool can_transition(const StateVector& n, ClassIndex i) noexcept;

// Finite box {n : 0 <= n_i <= upper_i} with a dense row-major enumeration
// (last class varies fastest).
class LatticeBox {
 public:
  LatticeBox() = default;
  explicit LatticeBox(std::vector<int> upper);

  std::size_t num_classes() const noexcept { return upper_.size(); }
  const std::vector<int>& upper() const noexcept { return upper_; }
  std::size_t size() const noexcept { return size_; }

  bool contains(const StateVector& n) const noexcept;
  // True when some coordinate sits on its upper face.
  bool on_upper_face(const StateVector& n) const noexcept;

  std::size_t index_of(const StateVector& n) const;
  StateVector state_at(std::size_t index) const;

  std::vector<StateVector> states() const;

 private:
  std::vector<int> upper_;
  std::size_t size_ = 0;
};

}  // namespace insens
