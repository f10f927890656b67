#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orsep/words.hpp"

namespace orsep {

// Length of the cyclic word minus the number of distinct generators in it.
int compute_rc(const CyclicWord& c);
inline int compute_rc(const Presentation& p) { return compute_rc(p.relator_root()); }

// When RC(W) = 0 every letter of W occurs exactly once, so introducing
// c := W and eliminating one letter rewrites the group as F_m * Z/n.
// The solver computes free-product syllable normal forms over the new basis
// and decides the word problem independently of the Dehn route.
class RcZeroDecomposition {
 public:
  explicit RcZeroDecomposition(const Presentation& p);

  int free_rank() const { return free_rank_; }
  int torsion_order() const { return torsion_order_; }
  // Index (in the source presentation) of the eliminated generator.
  int eliminated_generator() const { return eliminated_; }
  // The torsion generator c equals this word of the source group.
  const Word& torsion_word() const { return torsion_word_; }
  // Expression for the eliminated generator over the new basis; the letter
  // code for c is the extra index generators().size().
  const Word& substitution() const { return substitution_; }
  // Names of the new basis: surviving generators then the torsion generator.
  const std::vector<std::string>& basis_names() const { return basis_names_; }

  // Image of a source-alphabet word over the new basis, freely reduced.
  Word rewrite(const Word& w) const;
  // Syllable normal form over F_m * Z/n; empty iff trivial.
  std::vector<std::pair<int, int>> normal_form(const Word& w) const;  // (basis index, exponent)
  bool is_trivial(const Word& w) const;

 private:
  const Presentation pres_;
  int free_rank_ = 0;
  int torsion_order_ = 0;
  int eliminated_ = -1;
  Word torsion_word_;
  Word substitution_;
  std::vector<std::string> basis_names_;
  std::vector<int> gen_to_basis_;  // source gen -> basis index, -1 for eliminated
  int torsion_basis_ = -1;
};

RcZeroDecomposition decompose_rc_zero(const Presentation& p);

struct SubscriptedGenerator {
  std::string base;
  int height = 0;
  std::string name() const { return base + "_" + std::to_string(height); }
  bool operator==(const SubscriptedGenerator&) const = default;
};

// One descent step: an automorphism of the free group on S u {t} twists
// chosen generators by powers of t so the relator becomes t-balanced; the
// group G * <t> is then an HNN extension over Magnus subgroups of a
// one-relator base whose relator has strictly smaller RC.
struct HnnData {
  Presentation original;                  // source presentation (no free factors)
  std::string stable;                     // stable letter name
  std::vector<int> twists;                // per source generator: exponent of t appended
  Presentation base;                      // over the subscripted alphabet
  std::vector<SubscriptedGenerator> subscripts;  // parallel to base.generators()
  std::vector<int> u1;                    // indices into base.generators()
  std::vector<int> u2;                    // aligned: alpha(u1[k]) = u2[k]
  int rc_before = 0;
  int rc_after = 0;

  // Alphabet of H in source coordinates: original generators then t.
  std::vector<std::string> h_names() const;
  // Alphabet of H in HNN coordinates: base generators then t.
  std::vector<std::string> hnn_names() const;

  // Defining word t^-i x t^i of a subscripted generator, over h_names().
  Word embedding_word(int base_gen) const;
  // The twist automorphism applied to a source word, over h_names().
  Word apply_twists(const Word& w) const;
  // Rewrites a word over h_names() into HNN coordinates (over hnn_names());
  // requires every source generator to keep a height window, which holds by
  // construction.
  Word to_hnn_coordinates(const Word& w_over_h) const;

  int base_index_of(const std::string& base_name, int height) const;  // -1 if absent
};

HnnData hierarchy_step(const Presentation& p);

// u1 and u2 must each omit at least one generator occurring in the base
// relator root (vacuously true when empty).
bool verify_magnus_condition(const HnnData& h);

nlohmann::ordered_json to_json(const HnnData& h);
HnnData hnn_data_from_json(const nlohmann::ordered_json& j);

}  // namespace orsep
