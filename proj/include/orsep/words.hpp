#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orsep/errors.hpp"

namespace orsep {

// A letter is a nonzero code: +k is generator k-1, -k is its inverse.
using Letter = std::int32_t;

inline Letter inverse_letter(Letter l) { return -l; }
inline int letter_gen(Letter l) { return (l > 0 ? l : -l) - 1; }
inline int letter_sign(Letter l) { return l > 0 ? 1 : -1; }
inline Letter make_letter(int gen, int sign) {
  return sign > 0 ? Letter(gen + 1) : Letter(-(gen + 1));
}

// Ordering used everywhere words are compared: a < a^-1 < b < b^-1 < ...
inline int letter_key(Letter l) { return 2 * letter_gen(l) + (l < 0 ? 1 : 0); }
bool letter_less(Letter a, Letter b);
bool word_less(std::span<const Letter> a, std::span<const Letter> b);

// A freely reduced word. Construction goes through free_reduce or the
// concatenation operators, which maintain reducedness.
class Word {
 public:
  Word() = default;

  static Word single(Letter l);
  // Trusts the caller that `letters` is freely reduced (asserted in debug).
  static Word from_reduced(std::vector<Letter> letters);

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<Letter>& letters() const { return letters_; }

  Word inverse() const;
  Word operator*(const Word& rhs) const;
  Word pow(int k) const;
  // u * w * u^-1
  Word conjugated_by(const Word& u) const;
  Word appended(Letter l) const;
  Word prepended(Letter l) const;
  Word subword(std::size_t begin, std::size_t end) const;

  bool operator==(const Word&) const = default;
  bool operator<(const Word& rhs) const;

 private:
  std::vector<Letter> letters_;
};

Word free_reduce(std::span<const Letter> letters);
Word free_reduce(std::initializer_list<Letter> letters);

// Exponent sum per generator.
std::vector<long long> exponent_vector(const Word& w, std::size_t n_gens);

// A cyclically reduced word up to rotation; stores the least rotation as its
// canonical representative, so operator== is cyclic equality.
class CyclicWord {
 public:
  CyclicWord() = default;
  // Requires a cyclically reduced input; canonicalizes the rotation.
  static CyclicWord from_cyclically_reduced(const Word& w);

  const Word& representative() const { return rep_; }
  std::size_t size() const { return rep_.size(); }
  bool empty() const { return rep_.empty(); }

  bool operator==(const CyclicWord&) const = default;
  bool operator<(const CyclicWord& rhs) const { return rep_ < rhs.rep_; }

 private:
  Word rep_;
};

// Returns (c, u) with w = u * c * u^-1 and c cyclically reduced.
std::pair<CyclicWord, Word> cyclic_reduce(const Word& w);

// Maximal k >= 2 with c = root^k, if any; root is primitive.
std::optional<std::pair<CyclicWord, int>> is_proper_power(const CyclicWord& c);

struct Generator {
  std::string name;
  bool operator==(const Generator&) const = default;
};

// One-relator presentation < S | W^n > with W cyclically reduced and
// primitive and n >= 2. Generators absent from W are carried along as free
// factors: the group presented is the one-relator group on the occurring
// generators, free-product the free group on the rest.
class Presentation {
 public:
  Presentation(std::vector<Generator> generators, CyclicWord relator_root, int exponent);

  const std::vector<Generator>& generators() const { return generators_; }
  const CyclicWord& relator_root() const { return root_; }
  int exponent() const { return exponent_; }

  Word relator() const { return root_.representative().pow(exponent_); }
  const std::vector<int>& core_generators() const { return core_; }
  const std::vector<int>& free_factors() const { return free_; }
  bool occurs_in_root(int gen) const { return occurs_[std::size_t(gen)]; }

  int index_of(std::string_view name) const;  // -1 if absent
  bool single_letter_names() const;

  std::string print() const;
  std::string print_word(const Word& w) const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  bool operator==(const Presentation&) const = default;

 private:
  std::vector<Generator> generators_;
  CyclicWord root_;
  int exponent_ = 2;
  std::vector<bool> occurs_;
  std::vector<int> core_;
  std::vector<int> free_;
};

// Grammar: '<' gens '|' relator '>', lowercase letters are generators,
// uppercase their inverses, '^' powers (negative allowed), parenthesized
// subwords allowed. The relator is normalized: freely and cyclically
// reduced, the primitive root extracted and the exponent folded, so
// "< a | a^4 >" and "< a | (a a)^2 >" both store root a with exponent 4.
Presentation parse_presentation(const std::string& text);

// The one-relator factor of the free-product splitting: drops free-factor
// generators and re-indexes the relator over the survivors.
Presentation restricted_to_core(const Presentation& p);

// Word over the presentation's alphabet; same letter syntax as the relator.
Word parse_word(const std::string& text, const Presentation& p);
Word parse_word_over(const std::string& text, std::span<const std::string> names);

std::string print_word_over(const Word& w, std::span<const std::string> names);
std::vector<std::string> generator_names(const Presentation& p);

std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace orsep
