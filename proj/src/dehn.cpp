#include "orsep/dehn.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace orsep {

PieceIndex::PieceIndex(const Presentation& p) : pres_(p) {
  Word relator = p.relator();
  relator_length_ = relator.size();
  threshold_ = relator_length_ / 2 + 1;
  std::set<std::vector<Letter>> seen;
  for (const Word& base : {relator, relator.inverse()}) {
    const auto& v = base.letters();
    for (std::size_t r = 0; r < v.size(); ++r) {
      std::vector<Letter> rot;
      rot.reserve(v.size());
      rot.insert(rot.end(), v.begin() + long(r), v.end());
      rot.insert(rot.end(), v.begin(), v.begin() + long(r));
      if (seen.insert(rot).second) rotations_.push_back(std::move(rot));
    }
  }
  core_letter_.assign(p.generators().size(), false);
  for (int g : p.core_generators()) core_letter_[std::size_t(g)] = true;
}

bool PieceIndex::find_replacement(const std::vector<Letter>& w, Match& m) const {
  for (std::size_t pos = 0; pos < w.size(); ++pos) {
    std::size_t best_len = 0;
    std::size_t best_rot = 0;
    for (std::size_t r = 0; r < rotations_.size(); ++r) {
      const auto& rot = rotations_[r];
      std::size_t len = 0;
      while (len < rot.size() && pos + len < w.size() && w[pos + len] == rot[len]) ++len;
      if (len > best_len) {
        best_len = len;
        best_rot = r;
      }
    }
    if (best_len >= threshold_) {
      m.pos = pos;
      m.len = best_len;
      m.rotation = best_rot;
      return true;
    }
  }
  return false;
}

Word PieceIndex::reduce(const Word& w) const {
  std::vector<Letter> cur = w.letters();
  Match m;
  while (find_replacement(cur, m)) {
    const auto& rot = rotations_[m.rotation];
    // rot = s . rest with s the matched piece; since rot = 1 in the group,
    // s = rest^-1, which is strictly shorter than s.
    std::vector<Letter> next;
    next.reserve(cur.size());
    next.insert(next.end(), cur.begin(), cur.begin() + long(m.pos));
    for (std::size_t i = rot.size(); i > m.len; --i) next.push_back(-rot[i - 1]);
    next.insert(next.end(), cur.begin() + long(m.pos + m.len), cur.end());
    cur = free_reduce(next).letters();
  }
  return Word::from_reduced(std::move(cur));
}

bool PieceIndex::is_trivial(const Word& w) const {
  if (pres_.free_factors().empty()) return reduce(w).empty();
  // Alternate: freely reduce, Dehn-reduce each maximal core block, repeat.
  // At a fixpoint every nonempty core block is Dehn-irreducible, hence
  // nontrivial, and the word is a free-product normal form.
  std::vector<Letter> cur = w.letters();
  while (true) {
    std::vector<Letter> next;
    std::size_t i = 0;
    while (i < cur.size()) {
      bool core = core_letter_[std::size_t(letter_gen(cur[i]))];
      std::size_t j = i;
      while (j < cur.size() && core_letter_[std::size_t(letter_gen(cur[j]))] == core) ++j;
      if (core) {
        Word block = free_reduce(std::span<const Letter>(cur.data() + i, j - i));
        Word red = reduce(block);
        next.insert(next.end(), red.letters().begin(), red.letters().end());
      } else {
        next.insert(next.end(), cur.begin() + long(i), cur.begin() + long(j));
      }
      i = j;
    }
    next = free_reduce(next).letters();
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur.empty();
}

bool is_trivial(const Word& w, const Presentation& p) { return PieceIndex(p).is_trivial(w); }

}  // namespace orsep
