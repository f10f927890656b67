#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orsep/errors.hpp"
#include "orsep/perm.hpp"
#include "orsep/words.hpp"

namespace orsep {

inline constexpr std::size_t kDefaultClosureBound = 1'000'000;
inline constexpr std::uint64_t kDefaultNodeBudget = 50'000'000;

// Defining relators over a named alphabet: the shared input of coset
// enumeration and quotient checking. Covers both one-relator presentations
// and HNN presentations with stable-letter relations.
struct RelatorSystem {
  std::vector<std::string> generators;
  std::vector<Word> relators;
  std::uint64_t hash() const;
  bool operator==(const RelatorSystem&) const = default;
};

RelatorSystem relator_system(const Presentation& p);

// A homomorphism onto a permutation group: one image permutation per
// generator. Every relator is checked to evaluate to the identity on
// construction, so instances are homomorphisms by invariant.
class FiniteQuotient {
 public:
  FiniteQuotient() = default;
  FiniteQuotient(RelatorSystem sys, std::vector<Perm> images);

  int degree() const { return degree_; }
  const RelatorSystem& system() const { return sys_; }
  const std::vector<Perm>& images() const { return images_; }
  std::uint64_t system_hash() const { return sys_.hash(); }

  Perm evaluate(const Word& w) const;
  bool is_transitive() const;

  // Block-diagonal join acting on the disjoint union of the two coset sets.
  // Both summands must be quotients of the same relator system.
  FiniteQuotient direct_sum(const FiniteQuotient& other) const;

  bool operator==(const FiniteQuotient&) const = default;

 private:
  RelatorSystem sys_;
  std::vector<Perm> images_;
  std::vector<Perm> inverses_;
  int degree_ = 0;
};

// All coset actions of subgroups of index <= max_index, by backtracking
// coset-table completion with first-appearance coset numbering (each
// subgroup appears exactly once), emitted in degree-major order and in a
// fixed deterministic order within each degree. The callback returns false
// to stop early. Throws BudgetExceeded when the branch-node count passes
// node_budget.
void for_each_low_index(const RelatorSystem& sys, int max_index,
                        const std::function<bool(const FiniteQuotient&)>& emit,
                        std::uint64_t node_budget = kDefaultNodeBudget);

std::vector<FiniteQuotient> enumerate_low_index(const RelatorSystem& sys, int max_index,
                                                std::uint64_t node_budget = kDefaultNodeBudget);

// Conjugacy search inside the subgroup generated by within_gens: returns c
// with c * g * c^-1 == h when one exists. Runs an orbit walk under
// conjugation, with a cycle-type prefilter (sound in any subgroup of the
// symmetric group). Throws SubgroupTooLarge past the orbit bound.
std::optional<Perm> finite_conjugacy_test(const std::vector<Perm>& within_gens, const Perm& g,
                                          const Perm& h, std::size_t bound = kDefaultClosureBound);

// The orbit of x under conjugation by the subgroup generated by gens, in
// breadth-first order.
std::vector<Perm> conjugacy_class_of(const std::vector<Perm>& gens, const Perm& x,
                                     std::size_t bound = kDefaultClosureBound);

// Subgroup of finite index given as the full preimage of Q0 under a finite
// quotient. Q0 generators must lie in the image group; closures of Q0 and of
// the image group are precomputed, bounded by closure_bound.
class FiniteIndexSubgroup {
 public:
  FiniteIndexSubgroup() = default;
  FiniteIndexSubgroup(FiniteQuotient q, std::vector<Perm> q0_gens,
                      std::size_t closure_bound = kDefaultClosureBound);

  const FiniteQuotient& quotient() const { return quotient_; }
  const std::vector<Perm>& q0_gens() const { return q0_gens_; }
  const std::vector<Perm>& q0_elements() const { return q0_elements_; }
  const std::vector<Perm>& image_elements() const { return image_elements_; }

  bool contains_image(const Perm& p) const;
  bool member_test(const Word& w) const;
  int index() const;
  bool is_normal() const;

 private:
  FiniteQuotient quotient_;
  std::vector<Perm> q0_gens_;
  std::vector<Perm> q0_elements_;     // sorted
  std::vector<Perm> image_elements_;  // sorted
};

// Preimage of the trivial subgroup: the kernel, normal by construction.
FiniteIndexSubgroup subgroup_kernel(const FiniteQuotient& q,
                                    std::size_t closure_bound = kDefaultClosureBound);
// Preimage of the whole image group: the whole group.
FiniteIndexSubgroup subgroup_whole(const FiniteQuotient& q,
                                   std::size_t closure_bound = kDefaultClosureBound);

// Schreier generators of the subgroup from the coset table of the image
// action on cosets of Q0, as words over the system generators. Every output
// passes member_test; the outputs generate the subgroup.
std::vector<Word> schreier_generators(const FiniteIndexSubgroup& h1);

struct SeparationBudget {
  int max_index = 12;
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::size_t closure_bound = kDefaultClosureBound;
  int max_pair_refinements = 64;
};

// First quotient (single or pairwise direct sum, deterministic schedule) in
// which the images of x and y are not conjugate. Throws BudgetExceeded when
// the schedule is exhausted, and immediately when x equals y in the group.
FiniteQuotient separate_conjugacy_class(const Presentation& p, const Word& x, const Word& y,
                                        const SeparationBudget& budget = {});

// First quotient in which the image of g is not conjugate into the subgroup
// generated by the images of f_gens. Throws ImmediateFailure when g is
// trivial, or when every candidate image subgroup was the whole image group;
// BudgetExceeded otherwise on exhaustion.
FiniteQuotient separate_torsion_from_subgroup_conjugates(const Presentation& p, const Word& g,
                                                         const std::vector<Word>& f_gens,
                                                         const SeparationBudget& budget = {});

struct CCWitness {
  Word x;
  std::vector<Word> centralizer_gens;
  FiniteIndexSubgroup p;
  FiniteQuotient n;
  bool check_passed = false;
};

// Checks the centralizer-covering containment inside the image of n: the
// full centralizer of the image of x must lie in the product of the closure
// of the centralizer-generator images with the image of p. True certifies
// the instance; false is inconclusive (the supplied generators may
// undergenerate the centralizer). Throws IncompatibleQuotients when the
// kernel of n is not contained in p.
bool verify_cc(const Presentation& pres, const CCWitness& w,
               std::size_t closure_bound = kDefaultClosureBound);

// Searches deterministic refinements of p's quotient (itself first, then its
// direct sums with enumerated quotients) for one passing verify_cc.
CCWitness find_cc_quotient(const Presentation& pres, const Word& x,
                           const std::vector<Word>& centralizer_gens,
                           const FiniteIndexSubgroup& p, const SeparationBudget& budget = {});

// Append-only JSON-lines cache of enumerated quotients, keyed by the relator
// system hash; single writer, any number of readers. Loading re-validates
// every entry and skips malformed or foreign lines.
std::vector<FiniteQuotient> load_cached_quotients(const RelatorSystem& sys,
                                                  const std::string& cache_dir);
void append_cached_quotients(const RelatorSystem& sys, const std::vector<FiniteQuotient>& qs,
                             const std::string& cache_dir);

nlohmann::ordered_json quotient_to_json(const FiniteQuotient& q);

}  // namespace orsep
