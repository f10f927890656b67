#pragma once

#include <vector>

#include "orsep/words.hpp"

namespace orsep {

// Substring index over every cyclic rotation of W^n and its inverse.
// A freely reduced word equal to 1 in the group must contain more than half
// of some rotation, so any subword of length >= threshold() can be replaced
// by the inverse of the rotation's complement, which is strictly shorter.
class PieceIndex {
 public:
  explicit PieceIndex(const Presentation& p);

  const Presentation& presentation() const { return pres_; }
  std::size_t relator_length() const { return relator_length_; }
  // Smallest length strictly greater than relator_length()/2.
  std::size_t threshold() const { return threshold_; }
  const std::vector<std::vector<Letter>>& rotations() const { return rotations_; }

  // One pass of greedy replacement to a Dehn-irreducible word. Letters of
  // free-factor generators never match and pass through untouched.
  Word reduce(const Word& w) const;

  // Full word-problem decision, free-product aware: alternating blocks of
  // core and free-factor letters are reduced until no block vanishes.
  bool is_trivial(const Word& w) const;

 private:
  struct Match {
    std::size_t pos = 0;
    std::size_t len = 0;
    std::size_t rotation = 0;
  };
  bool find_replacement(const std::vector<Letter>& w, Match& m) const;

  Presentation pres_;
  std::vector<std::vector<Letter>> rotations_;
  std::size_t relator_length_ = 0;
  std::size_t threshold_ = 0;
  std::vector<bool> core_letter_;
};

inline PieceIndex build_piece_index(const Presentation& p) { return PieceIndex(p); }
inline Word dehn_reduce(const Word& w, const PieceIndex& idx) { return idx.reduce(w); }
inline bool is_trivial(const Word& w, const PieceIndex& idx) { return idx.is_trivial(w); }
bool is_trivial(const Word& w, const Presentation& p);

}  // namespace orsep
