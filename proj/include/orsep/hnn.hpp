#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "orsep/errors.hpp"
#include "orsep/hierarchy.hpp"
#include "orsep/perm.hpp"
#include "orsep/quotients.hpp"
#include "orsep/words.hpp"

namespace orsep {

// HNN extension over a finite permutation base: associated subgroups m1, m2
// with an isomorphism alpha between them, stored element-wise. Construction
// extends alpha multiplicatively from generator pairs and checks
// multiplicativity exhaustively and bijectivity onto m2.
class FiniteBaseHnn {
 public:
  FiniteBaseHnn() = default;
  FiniteBaseHnn(std::vector<Perm> base_gens,
                std::vector<std::pair<Perm, Perm>> alpha_gen_pairs,
                std::size_t closure_bound = kDefaultClosureBound);

  int degree() const { return degree_; }
  const std::vector<Perm>& base_gens() const { return base_gens_; }
  const std::vector<Perm>& base_elements() const { return base_; }
  const std::vector<Perm>& m1_elements() const { return m1_; }
  const std::vector<Perm>& m2_elements() const { return m2_; }
  const std::vector<std::pair<Perm, Perm>>& alpha_gen_pairs() const { return alpha_gens_; }
  std::vector<std::pair<Perm, Perm>> alpha_pairs() const;

  bool in_base(const Perm& p) const;
  bool in_m1(const Perm& p) const;
  bool in_m2(const Perm& p) const;
  Perm alpha(const Perm& g) const;
  Perm alpha_inv(const Perm& g) const;

 private:
  std::vector<Perm> base_gens_;
  std::vector<std::pair<Perm, Perm>> alpha_gens_;
  std::vector<Perm> base_;  // sorted
  std::vector<Perm> m1_;    // sorted
  std::vector<Perm> m2_;    // sorted
  std::map<Perm, Perm> alpha_;
  std::map<Perm, Perm> alpha_inv_;
  int degree_ = 0;
};

// Alternating word head * t^{e1} b1 * t^{e2} b2 * ... over a finite base.
struct HnnWord {
  Perm head;
  std::vector<std::pair<int, Perm>> tail;  // (exponent in {+1,-1}, base element)

  static HnnWord base_word(Perm b);
  static HnnWord identity(int degree);
  static HnnWord stable(int eps, int degree);

  int t_length() const { return int(tail.size()); }
  HnnWord operator*(const HnnWord& other) const;
  HnnWord inverse() const;
  bool operator==(const HnnWord&) const = default;
};

// Pinches t g t^-1 (g in m1) to alpha(g) and t^-1 g t (g in m2) to
// alpha_inv(g), leftmost first, until no pinch applies. The t-length never
// increases and the value in the HNN group is unchanged.
HnnWord britton_reduce(const HnnWord& w, const FiniteBaseHnn& h);

struct BaseConjugation {
  Perm base;
  HnnWord conjugator;  // c with britton_reduce(c^-1 * w * c) == base
};

// Cyclic Britton reduction: repeatedly rotates and pinches while possible.
// Returns the base element and conjugator when the t-length reaches zero;
// returns nothing once a cyclically reduced form of positive t-length is
// reached (such an element is not conjugate into the base).
std::optional<BaseConjugation> conjugate_into_base(const HnnWord& w, const FiniteBaseHnn& h);

enum class HnnVerdict { non_conjugate, conjugate_in_base, inapplicable };

const char* hnn_verdict_name(HnnVerdict v);

struct CriterionResult {
  HnnVerdict verdict = HnnVerdict::inapplicable;
  std::optional<Perm> conjugator;  // conjugate_in_base: c with c * x * c^-1 == y
  bool y_in_class = false;         // recorded hypothesis checks over the base
  bool class_meets_m1 = false;
  bool class_meets_m2 = false;
};

// Finite checks of the non-conjugacy criterion: if y lies in the base class
// of x the verdict is conjugate_in_base; else if the class of x misses both
// associated subgroups, x's conjugacy class in the whole HNN group stays
// inside the base, so y is certified non-conjugate; otherwise inapplicable.
CriterionResult hnn_nonconjugacy_criterion(const FiniteBaseHnn& h, const Perm& x, const Perm& y);

struct CentralizerResult {
  std::vector<Perm> elements;  // centralizer of x in the base, sorted
  bool exact = false;          // true: equals the centralizer in the whole HNN group
};

CentralizerResult hnn_centralizer_base(const FiniteBaseHnn& h, const Perm& x);

// Relators of the HNN presentation: the base relator power plus one stable
// relation t u t^-1 alpha(u)^-1 per associated generator pair. Generators
// are the base generators followed by the stable letter.
RelatorSystem hnn_relator_system(const HnnData& hd);

// A finite quotient of the HNN group, split into base images and the stable
// letter image, together with the induced finite-base HNN extension.
struct QuotientHnn {
  FiniteBaseHnn hnn;
  std::vector<Perm> xi;  // images of the base generators
  Perm t_image;
  int degree = 0;

  Perm eval_base(const Word& w_over_base) const;
  // Word over base generators plus the stable letter (last index) to an
  // alternating HNN word over the finite base.
  HnnWord eta(const Word& w_over_hnn) const;
};

// Builds the finite-base HNN induced by a finite quotient theta of the HNN
// presentation (images: base generators first, stable letter last). Verifies
// the base relator and checks every stable relation by conjugation with
// theta's stable-letter image; a failing stable relation raises
// AlphaInconsistent.
QuotientHnn build_quotient_hnn(const HnnData& hd, const FiniteQuotient& theta,
                               std::size_t closure_bound = kDefaultClosureBound);

}  // namespace orsep
