#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "orsep/dehn.hpp"
#include "orsep/quotients.hpp"
#include "orsep/words.hpp"

using namespace orsep;

namespace {

Word random_word(std::mt19937& rng, int n_gens, std::size_t len) {
  std::uniform_int_distribution<int> gen(0, n_gens - 1);
  std::uniform_int_distribution<int> sign(0, 1);
  std::vector<Letter> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(make_letter(gen(rng), sign(rng) ? 1 : -1));
  return free_reduce(out);
}

std::vector<Perm> all_perms(int degree) {
  std::vector<int> base(std::size_t(degree), 0);
  std::iota(base.begin(), base.end(), 0);
  std::vector<Perm> out;
  do {
    out.emplace_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

bool transitive(const std::vector<Perm>& gens, int degree) {
  std::vector<bool> seen(std::size_t(degree), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& g : gens) {
      for (int w : {g.apply(v), g.inverse().apply(v)}) {
        if (!seen[std::size_t(w)]) {
          seen[std::size_t(w)] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
  }
  return count == degree;
}

// Subgroups of index k correspond to transitive relator-respecting actions
// on {0..k-1} up to relabeling the k-1 non-basepoint points, and that
// relabeling acts freely, so the subgroup count is the action count divided
// by (k-1)!.
long count_index_k_subgroups_brute(const RelatorSystem& sys, int k) {
  auto perms = all_perms(k);
  long actions = 0;
  std::vector<Perm> images(sys.generators.size());
  std::function<void(std::size_t)> rec = [&](std::size_t g) {
    if (g == images.size()) {
      for (const auto& r : sys.relators) {
        Perm acc = Perm::identity(k);
        for (Letter l : r.letters()) {
          const Perm& p = images[std::size_t(letter_gen(l))];
          acc = acc * (letter_sign(l) > 0 ? p : p.inverse());
        }
        if (!acc.is_identity()) return;
      }
      if (transitive(images, k)) ++actions;
      return;
    }
    for (const auto& p : perms) {
      images[g] = p;
      rec(g + 1);
    }
  };
  rec(0);
  long fact = 1;
  for (int i = 2; i < k; ++i) fact *= i;
  return actions / fact;
}

}  // namespace

TEST_CASE("quotient construction checks the relators") {
  Presentation p = parse_presentation("< a, b | (ab)^2 >");
  RelatorSystem sys = relator_system(p);
  CHECK(sys.generators == std::vector<std::string>{"a", "b"});
  REQUIRE(sys.relators.size() == 1);
  CHECK(sys.relators[0] == p.relator());

  // a -> (0 1), b -> (0 1): ab -> id, relator holds.
  FiniteQuotient good(sys, {Perm({1, 0}), Perm({1, 0})});
  CHECK(good.degree() == 2);
  CHECK(good.is_transitive());
  // a -> (0 1), b -> id: (ab)^2 -> id as well (order 2).
  CHECK_NOTHROW(FiniteQuotient(sys, {Perm({1, 0}), Perm::identity(2)}));
  // a -> 3-cycle, b -> id: (ab)^2 is a 3-cycle, not a relator-respecting map.
  CHECK_THROWS_AS(FiniteQuotient(sys, {Perm({1, 2, 0}), Perm::identity(3)}), Error);
  CHECK_THROWS_AS(FiniteQuotient(sys, {Perm({1, 0})}), Error);
  CHECK_THROWS_AS(FiniteQuotient(sys, {Perm({1, 0}), Perm::identity(3)}), Error);
}

TEST_CASE("evaluation is a homomorphism") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  auto qs = enumerate_low_index(relator_system(p), 4);
  REQUIRE_FALSE(qs.empty());
  std::mt19937 rng(20260815);
  const FiniteQuotient& q = qs.back();
  for (int trial = 0; trial < 100; ++trial) {
    Word u = random_word(rng, 2, 8);
    Word v = random_word(rng, 2, 8);
    CHECK(q.evaluate(u * v) == q.evaluate(u) * q.evaluate(v));
    CHECK(q.evaluate(u.inverse()) == q.evaluate(u).inverse());
  }
  CHECK(q.evaluate(p.relator()).is_identity());
}

TEST_CASE("low-index counts match the brute-force subgroup count") {
  for (const char* pres : {"< a, b | (ab)^2 >", "< a, b | (abaB)^2 >"}) {
    CAPTURE(pres);
    RelatorSystem sys = relator_system(parse_presentation(pres));
    auto qs = enumerate_low_index(sys, 4);
    for (int k = 1; k <= 4; ++k) {
      long got = std::count_if(qs.begin(), qs.end(),
                               [&](const FiniteQuotient& q) { return q.degree() == k; });
      CHECK(got == count_index_k_subgroups_brute(sys, k));
    }
  }
}

TEST_CASE("low-index desk checks") {
  auto qs5 = enumerate_low_index(relator_system(parse_presentation("< a | a^5 >")), 5);
  CHECK(std::any_of(qs5.begin(), qs5.end(),
                    [](const FiniteQuotient& q) { return q.degree() == 5; }));
  for (const char* pres : {"< a | a^5 >", "< a, b | (abAB)^3 >"}) {
    auto qs = enumerate_low_index(relator_system(parse_presentation(pres)), 1);
    CHECK(qs.size() == 1);
    CHECK(qs[0].degree() == 1);
  }
}

TEST_CASE("enumeration is deterministic, degree-major, and streamable") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  auto first = enumerate_low_index(sys, 5);
  auto second = enumerate_low_index(sys, 5);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].images() == second[i].images());
    if (i) CHECK(first[i - 1].degree() <= first[i].degree());
  }
  std::size_t stop_after = first.size() / 2;
  std::vector<FiniteQuotient> seen;
  for_each_low_index(sys, 5, [&](const FiniteQuotient& q) {
    seen.push_back(q);
    return seen.size() < stop_after;
  });
  CHECK(seen.size() == stop_after);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i].images() == first[i].images());
}

TEST_CASE("enumeration respects the node budget") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  CHECK_THROWS_AS(enumerate_low_index(sys, 6, 10), Error);
  try {
    enumerate_low_index(sys, 6, 10);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::budget_exceeded);
  }
}

TEST_CASE("direct sums act block-diagonally") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  auto qs = enumerate_low_index(sys, 3);
  auto big = std::find_if(qs.begin(), qs.end(),
                          [](const FiniteQuotient& q) { return q.degree() == 3; });
  REQUIRE(big != qs.end());
  FiniteQuotient sum = qs[0].direct_sum(*big);
  CHECK(sum.degree() == 1 + big->degree());
  Word w = parse_word_over("abA", std::vector<std::string>{"a", "b"});
  Perm lhs = sum.evaluate(w);
  Perm rhs = big->evaluate(w);
  for (int i = 0; i < big->degree(); ++i) CHECK(lhs.apply(1 + i) == 1 + rhs.apply(i));
}

TEST_CASE("finite conjugacy agrees with brute force over the closure") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    int deg = 4 + int(rng() % 2);
    std::vector<Perm> gens;
    for (int i = 0; i < 2; ++i) {
      std::vector<int> img(std::size_t(deg), 0);
      std::iota(img.begin(), img.end(), 0);
      std::shuffle(img.begin(), img.end(), rng);
      gens.emplace_back(img);
    }
    auto closure = permutation_closure(gens, 100000);
    std::uniform_int_distribution<std::size_t> pick(0, closure.size() - 1);
    Perm g = closure[pick(rng)];
    Perm h = closure[pick(rng)];
    bool brute = false;
    for (const auto& c : closure)
      if (c * g * c.inverse() == h) brute = true;
    auto found = finite_conjugacy_test(gens, g, h, 100000);
    CHECK(found.has_value() == brute);
    if (found) CHECK(*found * g * found->inverse() == h);
  }
  // Same cycle type, huge conjugation orbit, tiny bound: the walk gives up.
  Perm seven({1, 2, 3, 4, 5, 6, 0});
  CHECK_THROWS_AS(
      finite_conjugacy_test({seven, Perm({1, 0, 2, 3, 4, 5, 6})}, seven, seven.inverse(), 2),
      Error);
  // Mismatched cycle types are rejected before any walk, whatever the bound.
  CHECK_FALSE(finite_conjugacy_test({seven}, Perm::identity(7), seven, 1).has_value());
}

TEST_CASE("conjugacy classes match brute force") {
  std::vector<Perm> gens{Perm({1, 2, 0, 3}), Perm({1, 0, 2, 3})};  // S_3 x 1 inside S_4
  auto closure = permutation_closure(gens, 1000);
  Perm x({1, 0, 2, 3});
  auto cls = conjugacy_class_of(gens, x);
  std::set<Perm> expect;
  for (const auto& c : closure) expect.insert(c * x * c.inverse());
  CHECK(cls.size() == expect.size());
  for (const auto& p : cls) CHECK(expect.count(p) == 1);
}

TEST_CASE("finite-index subgroups: the index-2 kernel workhorse") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  RelatorSystem sys = relator_system(p);
  FiniteQuotient q(sys, {Perm({1, 0}), Perm::identity(2)});
  FiniteIndexSubgroup h1 = subgroup_kernel(q);
  CHECK(h1.index() == 2);
  CHECK(h1.is_normal());
  CHECK(h1.member_test(parse_word("b", p)));
  CHECK(h1.member_test(parse_word("aa", p)));
  CHECK(h1.member_test(parse_word("abA", p)));
  CHECK_FALSE(h1.member_test(parse_word("a", p)));
  CHECK_FALSE(h1.member_test(parse_word("ab", p)));

  FiniteIndexSubgroup whole = subgroup_whole(q);
  CHECK(whole.index() == 1);
  CHECK(whole.member_test(parse_word("a", p)));

  // Q0 generators must lie in the image group.
  CHECK_THROWS_AS(FiniteIndexSubgroup(q, {Perm({1, 2, 0})}), Error);
}

TEST_CASE("a point stabilizer of a degree-3 action is not normal") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  auto qs = enumerate_low_index(sys, 3);
  bool found_nonnormal = false;
  for (const auto& q : qs) {
    if (q.degree() != 3) continue;
    // The trivial Q0 subgroup is the stabilizer-free kernel; instead take Q0
    // generated by one image that fixes the basepoint but not everything.
    for (const auto& im : {q.evaluate(Word::single(make_letter(0, 1))),
                           q.evaluate(Word::single(make_letter(1, 1)))}) {
      if (im.apply(0) != 0 || im.is_identity()) continue;
      FiniteIndexSubgroup h(q, {im});
      if (!h.is_normal()) found_nonnormal = true;
    }
  }
  CHECK(found_nonnormal);
}

TEST_CASE("schreier generators of the index-2 kernel") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  FiniteQuotient q(relator_system(p), {Perm({1, 0}), Perm::identity(2)});
  FiniteIndexSubgroup h1 = subgroup_kernel(q);
  auto sgens = schreier_generators(h1);
  std::set<Word> got(sgens.begin(), sgens.end());
  std::set<Word> expect{parse_word("b", p), parse_word("aa", p), parse_word("abA", p)};
  CHECK(got == expect);
  for (const auto& w : sgens) CHECK(h1.member_test(w));

  // Q0 = image: the subgroup is everything, and the generators come back.
  FiniteIndexSubgroup whole = subgroup_whole(q);
  auto wgens = schreier_generators(whole);
  std::set<Word> wset(wgens.begin(), wgens.end());
  CHECK(wset == std::set<Word>{parse_word("a", p), parse_word("b", p)});
}

TEST_CASE("schreier generators generate the right image subgroup") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  auto qs = enumerate_low_index(sys, 4);
  int tested = 0;
  for (const auto& q : qs) {
    if (q.degree() < 3) continue;
    FiniteIndexSubgroup h = subgroup_kernel(q);
    auto sgens = schreier_generators(h);
    std::vector<Perm> imgs;
    for (const auto& w : sgens) {
      CHECK(h.member_test(w));
      imgs.push_back(h.quotient().evaluate(w));
    }
    // The kernel's image subgroup is trivial, so every Schreier image is id.
    for (const auto& im : imgs) CHECK(im.is_identity());
    if (++tested >= 5) break;
  }
  CHECK(tested >= 1);
}

TEST_CASE("separating the conjugacy class of a from b") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  Word x = parse_word("a", p);
  Word y = parse_word("b", p);
  FiniteQuotient q = separate_conjugacy_class(p, x, y);
  auto cls = conjugacy_class_of(q.images(), q.evaluate(x));
  CHECK(std::find(cls.begin(), cls.end(), q.evaluate(y)) == cls.end());

  // Conjugate pair: no quotient can separate, the budget runs out.
  SeparationBudget tight;
  tight.max_index = 3;
  CHECK_THROWS_AS(separate_conjugacy_class(p, x, x.conjugated_by(y), tight), Error);
  try {
    separate_conjugacy_class(p, x, x.conjugated_by(y), tight);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::budget_exceeded);
  }
}

TEST_CASE("separating a torsion element from subgroup conjugates") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  Word g = parse_word("abaB", p);
  std::vector<Word> f_gens{parse_word("a", p)};
  FiniteQuotient q = separate_torsion_from_subgroup_conjugates(p, g, f_gens);
  // Re-verify from scratch: the class of g-bar misses the subgroup f-bar.
  std::vector<Perm> f_imgs;
  for (const auto& w : f_gens) f_imgs.push_back(q.evaluate(w));
  auto f_closure = permutation_closure(f_imgs, kDefaultClosureBound);
  std::set<Perm> f_set(f_closure.begin(), f_closure.end());
  for (const auto& c : conjugacy_class_of(q.images(), q.evaluate(g)))
    CHECK(f_set.count(c) == 0);

  CHECK_THROWS_AS(separate_torsion_from_subgroup_conjugates(p, Word(), f_gens), Error);
  try {
    separate_torsion_from_subgroup_conjugates(p, Word(), f_gens);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::immediate_failure);
  }
}

TEST_CASE("centralizer condition: verify and search on the worked instance") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  Word x = parse_word("abaB", p);
  std::vector<Word> cgens{x};
  FiniteQuotient z2(relator_system(p), {Perm({1, 0}), Perm::identity(2)});
  FiniteIndexSubgroup big_p = subgroup_kernel(z2);

  // A modest closure bound prunes candidates with huge images; the witness
  // the schedule lands on has image order 384, well inside it.
  SeparationBudget budget;
  budget.closure_bound = 1000;
  CCWitness w = find_cc_quotient(p, x, cgens, big_p, budget);
  CHECK(w.check_passed);
  CHECK(w.n.degree() == 10);
  CHECK(verify_cc(p, w));

  // Independent recomputation of both sides of the containment.
  const FiniteQuotient& n = w.n;
  Perm xbar = n.evaluate(x);
  std::vector<Perm> centralizer;
  for (const auto& m : permutation_closure(n.images(), kDefaultClosureBound))
    if (m * xbar == xbar * m) centralizer.push_back(m);
  std::vector<Perm> cg_imgs;
  for (const auto& c : cgens) cg_imgs.push_back(n.evaluate(c));
  auto cg_closure = permutation_closure(cg_imgs, kDefaultClosureBound);
  std::vector<Perm> p_imgs;
  for (const auto& sw : schreier_generators(big_p)) p_imgs.push_back(n.evaluate(sw));
  auto p_closure = permutation_closure(p_imgs, kDefaultClosureBound);
  std::set<Perm> product;
  for (const auto& u : cg_closure)
    for (const auto& v : p_closure) product.insert(u * v);
  for (const auto& m : centralizer) CHECK(product.count(m) == 1);

  // Non-commuting generators are rejected outright.
  CCWitness bad = w;
  bad.centralizer_gens = {parse_word("a", p)};
  CHECK_FALSE(verify_cc(p, bad));
}

TEST_CASE("cc search with the whole group passes on the trivial quotient") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  Word x = parse_word("abaB", p);
  FiniteQuotient triv(relator_system(p), {Perm::identity(1), Perm::identity(1)});
  CCWitness w = find_cc_quotient(p, x, {x}, subgroup_whole(triv));
  CHECK(w.check_passed);
  CHECK(w.n.degree() == 1);
}

TEST_CASE("quotient cache round-trips and ignores foreign entries") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  RelatorSystem other = relator_system(parse_presentation("< a, b | (abAB)^3 >"));
  auto qs = enumerate_low_index(sys, 3);
  auto qs_other = enumerate_low_index(other, 2);

  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "orsep_test_cache";
  std::filesystem::remove_all(dir);
  append_cached_quotients(sys, qs, dir.string());
  append_cached_quotients(other, qs_other, dir.string());
  {
    std::ofstream f(dir / "quotients.jsonl", std::ios::app);
    f << "this is not json\n";
    f << "{\"system\": \"" << hex64(sys.hash()) << "\", \"degree\": 2, \"images\": [[0,1],[1,0,2]]}\n";
  }
  auto loaded = load_cached_quotients(sys, dir.string());
  REQUIRE(loaded.size() == qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) CHECK(loaded[i].images() == qs[i].images());

  // Appending the same batch again must not duplicate lines.
  auto size_before = std::filesystem::file_size(dir / "quotients.jsonl");
  append_cached_quotients(sys, qs, dir.string());
  CHECK(std::filesystem::file_size(dir / "quotients.jsonl") == size_before);

  CHECK_THROWS_AS(append_cached_quotients(sys, qs_other, dir.string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loading from a missing cache directory yields nothing") {
  RelatorSystem sys = relator_system(parse_presentation("< a, b | (abaB)^2 >"));
  CHECK(load_cached_quotients(sys, "/nonexistent/orsep").empty());
}
