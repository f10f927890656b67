#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "orsep/errors.hpp"

namespace orsep {

// Permutation of {0, ..., degree-1}, stored as the image vector.
// Composition is left-to-right: (p * q)(i) = q(p(i)), matching the action of
// group elements on cosets when words act by their letters in reading order.
class Perm {
 public:
  Perm() = default;
  explicit Perm(std::vector<int> images);
  static Perm identity(int degree);

  int degree() const { return int(images_.size()); }
  int apply(int i) const { return images_[std::size_t(i)]; }
  const std::vector<int>& images() const { return images_; }

  Perm operator*(const Perm& other) const;
  Perm inverse() const;
  Perm pow(long long e) const;
  bool is_identity() const;

  // Cycle lengths in decreasing order, fixed points included.
  std::vector<int> cycle_type() const;
  // Disjoint cycle notation on 0-based points, e.g. "(0 1 2)(3 4)" or "()".
  std::string cycles_string() const;

  bool operator==(const Perm&) const = default;
  bool operator<(const Perm& other) const { return images_ < other.images_; }

 private:
  std::vector<int> images_;
};

struct PermHash {
  std::size_t operator()(const Perm& p) const;
};

// All elements of the subgroup generated by gens, by breadth-first closure in
// deterministic order (identity first). Throws SubgroupTooLarge when the
// element count would exceed bound.
std::vector<Perm> permutation_closure(const std::vector<Perm>& gens, std::size_t bound);

}  // namespace orsep
