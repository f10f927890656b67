#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orsep/dehn.hpp"
#include "orsep/errors.hpp"
#include "orsep/hierarchy.hpp"
#include "orsep/hnn.hpp"
#include "orsep/quotients.hpp"
#include "orsep/words.hpp"

namespace orsep {

inline constexpr const char* kToolVersion = "0.1.0";

enum class AbelianVerdict { non_conjugate, indeterminate };

// Exponent-sum prefilter: conjugate elements have equal images in the
// abelianization, which is the integer lattice modulo the relator's
// exponent-sum row. Sound for non-conjugacy only.
AbelianVerdict abelianization_check(const Presentation& p, const Word& x, const Word& y);

struct AbelianizationData {
  std::vector<long long> relator_row;  // exponent row of the full relator
  std::vector<long long> x_row;
  std::vector<long long> y_row;
  bool separated = false;
};

AbelianizationData abelianization_data(const Presentation& p, const Word& x, const Word& y);

// First freely reduced u in length-lexicographic order with u x u^-1 = y in
// the group, up to |u| <= max_len. The walk deduplicates on the reduced form
// of u x u^-1, which preserves the first-success order because the test
// depends on u only through that element.
std::optional<Word> enumerate_conjugators(const Presentation& p, const Word& x, const Word& y,
                                          int max_len);

// Same walk restricted to members of h1; deduplication keys on the pair
// (reduced conjugate, image of u) so that membership is never merged away.
std::optional<Word> enumerate_conjugators_in_subgroup(const Presentation& p,
                                                      const FiniteIndexSubgroup& h1, const Word& x,
                                                      const Word& y, int max_len);

// Self-contained verifiable record. The document is ordered JSON with the
// stable field order {kind, presentation, x, y, scope, witness, checks,
// tool_version}; verification re-derives every stored value with finite
// checks only and rejects any mismatch.
struct Certificate {
  nlohmann::ordered_json doc;
  std::string kind() const;
  std::string dump(int indent = -1) const;
  static Certificate from_text(const std::string& text);
};

struct ConjugacyBudget {
  int max_conjugator_len = 12;
  int max_index = 12;
  int hnn_index = 4;  // fresh low-index search depth for the HNN fast path
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::size_t closure_bound = kDefaultClosureBound;
  int max_pair_refinements = 64;
  std::optional<std::string> cache_dir;  // read-only quotient cache
};

// Decides conjugacy of x and y: Dehn equality short-circuit, abelianization
// prefilter, HNN fast path through one hierarchy step, then fair alternation
// of conjugator enumeration and separating-quotient search with growing
// budgets. Throws BudgetExceeded when both schedules cap out undecided.
Certificate decide_conjugacy(const Presentation& p, const Word& x, const Word& y,
                             const ConjugacyBudget& budget = {});

// Conjugacy within the finite-index subgroup h1; x and y must be members.
// Conjugator enumeration is membership-filtered and quotient refutation
// tests the class of x under the image of h1 (generated by Schreier
// generator images). Throws NotInSubgroup or BudgetExceeded.
Certificate decide_conjugacy_in_subgroup(const Presentation& p, const FiniteIndexSubgroup& h1,
                                         const Word& x, const Word& y,
                                         const ConjugacyBudget& budget = {});

// Certificate builders. Each recomputes the facts it records and refuses to
// assemble an unverifiable document.
Certificate make_conjugacy_certificate(const Presentation& p, const Word& x, const Word& y,
                                       const Word& conjugator,
                                       const std::optional<FiniteIndexSubgroup>& scope = {});
Certificate make_abelian_certificate(const Presentation& p, const Word& x, const Word& y,
                                     const std::optional<FiniteIndexSubgroup>& scope = {});
Certificate make_quotient_certificate(const Presentation& p, const Word& x, const Word& y,
                                      const FiniteQuotient& q,
                                      const std::optional<FiniteIndexSubgroup>& scope = {});
Certificate make_hnn_certificate(const Presentation& p, const Word& x, const Word& y,
                                 const HnnData& hd, const FiniteQuotient& theta);
Certificate make_separation_certificate(const Presentation& p, const Word& g,
                                        const std::vector<Word>& f_gens, const FiniteQuotient& q);
Certificate make_cc_certificate(const Presentation& p, const CCWitness& w);

// Independent re-check of a certificate: parses everything back, re-derives
// each recorded value, and compares. Returns false on any mismatch or
// malformed input; never throws.
bool verify_certificate(const Certificate& c);

}  // namespace orsep
