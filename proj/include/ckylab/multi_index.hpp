#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace ckylab {

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Strictly increasing multi-indices of length `degree` drawn from
/// {0, ..., dim-1}, enumerated in lexicographic order.
class MultiIndexSet {
 public:
  MultiIndexSet(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 0 || dim > 30) throw InputError("dimension out of supported range");
    if (degree < 0 || degree > dim) return;
    std::vector<int> idx(degree);
    for (int i = 0; i < degree; ++i) idx[i] = i;
    while (true) {
      std::uint32_t mask = 0;
      for (int i : idx) mask |= (1u << i);
      position_.emplace(mask, static_cast<int>(indices_.size()));
      indices_.push_back(idx);
      int k = degree - 1;
      while (k >= 0 && idx[k] == dim - degree + k) --k;
      if (k < 0) break;
      ++idx[k];
      for (int i = k + 1; i < degree; ++i) idx[i] = idx[i - 1] + 1;
    }
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<int>& operator[](int pos) const { return indices_[pos]; }
  const std::vector<std::vector<int>>& all() const { return indices_; }

  /// Position of the sorted multi-index `idx`, or -1 if it is not one.
  int position(std::span<const int> idx) const {
    std::uint32_t mask = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim_ || (mask & (1u << i))) return -1;
      mask |= (1u << i);
    }
    if (static_cast<int>(idx.size()) != degree_) return -1;
    auto it = position_.find(mask);
    return it == position_.end() ? -1 : it->second;
  }

 private:
  int dim_;
  int degree_;
  std::vector<std::vector<int>> indices_;
  std::unordered_map<std::uint32_t, int> position_;
};

/// Sorts `idx` in place and returns the sign of the sorting permutation,
/// or 0 if an index repeats.
inline int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i - 1] == idx[i]) return 0;
  }
  return sign;
}

/// Complement of a sorted multi-index in {0, ..., dim-1}.
inline std::vector<int> complement(std::span<const int> idx, int dim) {
  std::vector<int> out;
  std::size_t k = 0;
  for (int i = 0; i < dim; ++i) {
    if (k < idx.size() && idx[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace ckylab
