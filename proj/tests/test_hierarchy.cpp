#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "orsep/dehn.hpp"
#include "orsep/hierarchy.hpp"
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

const std::vector<std::string> kDescentCorpus = {
    "< a, b | (abaB)^2 >",      "< a, b | (abAB)^3 >",    "< a, b | (aabb)^2 >",
    "< a, b, c | (abbACCC)^2 >", "< a, b | (aab)^2 >",     "< a, b | (aabab)^3 >",
    "< a, b | (aaabbb)^2 >",    "< a, b | (abbab)^2 >",   "< a, b | (aabAB)^2 >",
    "< a, b, c | (abcABC)^2 >", "< a, b, c | (aabbcc)^3 >", "< a, b, c | (abaBcc)^2 >",
};

// Every structural promise of one descent step, checked from scratch.
void check_step(const Presentation& p, const HnnData& h) {
  CHECK(h.rc_before == compute_rc(p));
  CHECK(h.rc_after == compute_rc(h.base));
  CHECK(h.rc_after < h.rc_before);
  CHECK(verify_magnus_condition(h));
  CHECK(h.base.exponent() == p.exponent());
  CHECK(h.subscripts.size() == h.base.generators().size());
  CHECK(h.u1.size() == h.u2.size());

  // The twisted relator is t-balanced.
  Word phi = h.apply_twists(p.relator_root().representative());
  int t = int(p.generators().size());
  long t_sum = 0;
  for (Letter l : phi.letters())
    if (letter_gen(l) == t) t_sum += letter_sign(l);
  CHECK(t_sum == 0);

  // The base relator root keeps the original length and stays primitive.
  CHECK(h.base.relator_root().size() == p.relator_root().size());
  CHECK_FALSE(is_proper_power(h.base.relator_root()));

  // Stable relations are identities in the free group on S u {t}.
  Word tw = Word::single(make_letter(t, 1));
  for (std::size_t k = 0; k < h.u1.size(); ++k) {
    CHECK(tw * h.embedding_word(h.u1[k]) * tw.inverse() == h.embedding_word(h.u2[k]));
    CHECK(h.subscripts[std::size_t(h.u1[k])].base == h.subscripts[std::size_t(h.u2[k])].base);
    CHECK(h.subscripts[std::size_t(h.u1[k])].height ==
          h.subscripts[std::size_t(h.u2[k])].height + 1);
  }

  // Substituting the embedding words back into the base relator recovers the
  // twisted relator letter for letter.
  Word embedded;
  for (Letter l : h.base.relator_root().representative().letters()) {
    Word e = h.embedding_word(letter_gen(l));
    embedded = embedded * (letter_sign(l) > 0 ? e : e.inverse());
  }
  CHECK(embedded == phi);

  // Subscript bookkeeping: names match and each subscripted generator is
  // where base_index_of says it is.
  for (std::size_t i = 0; i < h.subscripts.size(); ++i) {
    CHECK(h.base.generators()[i].name == h.subscripts[i].name());
    CHECK(h.base_index_of(h.subscripts[i].base, h.subscripts[i].height) == int(i));
  }
  CHECK(h.base_index_of("nonexistent", 0) == -1);
}

}  // namespace

TEST_CASE("repetition complexity") {
  CHECK(compute_rc(parse_presentation("< a, b, c | (abbACCC)^2 >")) == 4);
  CHECK(compute_rc(parse_presentation("< a, b | (abaB)^2 >")) == 2);
  CHECK(compute_rc(parse_presentation("< a, b | (abAB)^3 >")) == 2);
  CHECK(compute_rc(parse_presentation("< a, b | (ab)^2 >")) == 0);
  CHECK(compute_rc(parse_presentation("< a | a^2 >")) == 0);
  CHECK(compute_rc(CyclicWord::from_cyclically_reduced(
            parse_word_over("aabab", std::vector<std::string>{"a", "b"}))) == 3);
}

TEST_CASE("rc-zero decomposition of < a, b | (ab)^2 >") {
  Presentation p = parse_presentation("< a, b | (ab)^2 >");
  RcZeroDecomposition d(p);
  CHECK(d.free_rank() == 1);
  CHECK(d.torsion_order() == 2);
  CHECK(d.eliminated_generator() == 1);  // b = a^-1 c
  CHECK(d.basis_names() == std::vector<std::string>{"a", "c"});
  CHECK(d.torsion_word() == parse_word("ab", p));
  // c := W, so rewriting W must give the single torsion letter.
  Word c = d.rewrite(parse_word("ab", p));
  CHECK(c.size() == 1);
  CHECK(d.basis_names()[std::size_t(letter_gen(c[0]))] == "c");
  CHECK(decompose_rc_zero(p).free_rank() == 1);
}

TEST_CASE("rc-zero solver agrees with the Dehn solver") {
  std::mt19937 rng(20260815);
  for (const char* pres : {"< a, b | (ab)^2 >", "< a, b, c | (abc)^3 >", "< a | a^4 >"}) {
    Presentation p = parse_presentation(pres);
    RcZeroDecomposition d(p);
    PieceIndex idx(p);
    for (int trial = 0; trial < 300; ++trial) {
      Word w = random_word(rng, int(p.generators().size()), std::size_t(rng() % 16));
      CHECK(d.is_trivial(w) == idx.is_trivial(w));
    }
  }
}

TEST_CASE("syllable normal forms are well-formed and invariant") {
  Presentation p = parse_presentation("< a, b | (ab)^3 >");
  RcZeroDecomposition d(p);
  std::mt19937 rng(9);
  int torsion = int(d.basis_names().size()) - 1;
  for (int trial = 0; trial < 200; ++trial) {
    Word w = random_word(rng, 2, 12);
    auto nf = d.normal_form(w);
    for (std::size_t i = 0; i < nf.size(); ++i) {
      if (i + 1 < nf.size()) CHECK(nf[i].first != nf[i + 1].first);
      if (nf[i].first == torsion) {
        CHECK(nf[i].second >= 1);
        CHECK(nf[i].second < d.torsion_order());
      } else {
        CHECK(nf[i].second != 0);
      }
    }
    CHECK(d.is_trivial(w) == nf.empty());
    // Multiplying by the relator cannot change the normal form.
    auto nf2 = d.normal_form(w * p.relator().conjugated_by(random_word(rng, 2, 3)));
    CHECK(nf == nf2);
  }
}

TEST_CASE("rc guards") {
  CHECK_THROWS_AS(RcZeroDecomposition(parse_presentation("< a, b | (abaB)^2 >")), Error);
  CHECK_THROWS_AS(hierarchy_step(parse_presentation("< a, b | (ab)^2 >")), Error);
  CHECK_THROWS_AS(hierarchy_step(parse_presentation("< a, b, c | (abaB)^2 >")), Error);
  try {
    hierarchy_step(parse_presentation("< a, b | (ab)^2 >"));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rc_zero);
  }
}

TEST_CASE("one descent step on the running example") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  HnnData h = hierarchy_step(p);
  check_step(p, h);
  CHECK(h.rc_before == 2);
  CHECK(h.rc_after == 1);
  CHECK(h.stable == "t");
  // The twist is chosen so the repeated letter a spreads over two heights.
  std::set<std::string> base_names;
  for (const auto& s : h.subscripts) base_names.insert(s.name());
  CHECK(base_names.count("a_0") + base_names.count("a_1") +
            base_names.count("a_-1") >= 2);
}

TEST_CASE("descent corpus: strict decrease, Magnus condition, identities") {
  for (const auto& pres : kDescentCorpus) {
    CAPTURE(pres);
    Presentation p = parse_presentation(pres);
    REQUIRE(compute_rc(p) > 0);
    HnnData h = hierarchy_step(p);
    check_step(p, h);
  }
}

TEST_CASE("iterated descent reaches rc zero within rc(W) steps") {
  for (const auto& pres : kDescentCorpus) {
    CAPTURE(pres);
    Presentation p = parse_presentation(pres);
    int budget = compute_rc(p);
    Presentation cur = p;
    int steps = 0;
    while (compute_rc(cur) > 0) {
      REQUIRE(steps < budget);
      HnnData h = hierarchy_step(cur);
      check_step(cur, h);
      cur = restricted_to_core(h.base);
      ++steps;
    }
    CHECK(compute_rc(cur) == 0);
  }
}

TEST_CASE("twist application is a homomorphism on words") {
  Presentation p = parse_presentation("< a, b | (aabb)^2 >");
  HnnData h = hierarchy_step(p);
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Word u = random_word(rng, 2, 8);
    Word v = random_word(rng, 2, 8);
    CHECK(h.apply_twists(u * v) == h.apply_twists(u) * h.apply_twists(v));
    CHECK(h.apply_twists(u.inverse()) == h.apply_twists(u).inverse());
  }
}

TEST_CASE("hnn coordinates expand back to the word they encode") {
  Presentation p = parse_presentation("< a, b | (abaB)^2 >");
  HnnData h = hierarchy_step(p);
  int t_src = int(p.generators().size());
  int t_dst = int(h.base.generators().size());
  std::mt19937 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    // Random word over S u {t}.
    std::vector<Letter> raw;
    for (std::size_t i = 0; i < 10; ++i)
      raw.push_back(make_letter(int(rng() % std::size_t(t_src + 1)), rng() % 2 ? 1 : -1));
    Word w = free_reduce(raw);
    Word coords = h.to_hnn_coordinates(w);
    // Substitute each base generator by its defining word and t by t.
    Word expanded;
    for (Letter l : coords.letters()) {
      Word piece = letter_gen(l) == t_dst ? Word::single(make_letter(t_src, 1))
                                          : h.embedding_word(letter_gen(l));
      expanded = expanded * (letter_sign(l) > 0 ? piece : piece.inverse());
    }
    CHECK(expanded == w);
  }
}

TEST_CASE("hnn data serializes and parses back") {
  for (const auto& pres : {std::string("< a, b | (abaB)^2 >"), kDescentCorpus[3]}) {
    Presentation p = parse_presentation(pres);
    HnnData h = hierarchy_step(p);
    HnnData back = hnn_data_from_json(to_json(h));
    CHECK(back.original == h.original);
    CHECK(back.stable == h.stable);
    CHECK(back.twists == h.twists);
    CHECK(back.base == h.base);
    CHECK(back.subscripts == h.subscripts);
    CHECK(back.u1 == h.u1);
    CHECK(back.u2 == h.u2);
    CHECK(back.rc_before == h.rc_before);
    CHECK(back.rc_after == h.rc_after);
  }
}

TEST_CASE("restricting to the core drops exactly the free factors") {
  Presentation p = parse_presentation("< a, b, c | (abaB)^2 >");
  Presentation core = restricted_to_core(p);
  CHECK(core.generators().size() == 2);
  CHECK(core.free_factors().empty());
  CHECK(core.relator_root().size() == 4);
  CHECK(compute_rc(core) == compute_rc(p));
  CHECK(restricted_to_core(core) == core);
}
