#include "orsep/hierarchy.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <set>

namespace orsep {

int compute_rc(const CyclicWord& c) {
  std::set<int> gens;
  for (Letter l : c.representative().letters()) gens.insert(letter_gen(l));
  return int(c.size()) - int(gens.size());
}

RcZeroDecomposition::RcZeroDecomposition(const Presentation& p) : pres_(p) {
  if (compute_rc(p) != 0) fail(Errc::rc_not_zero, "relator root repeats a generator");
  torsion_order_ = p.exponent();
  free_rank_ = int(p.generators().size()) - 1;
  torsion_word_ = p.relator_root().representative();
  // Eliminate the generator at the last position of the canonical root:
  // with W = A x^s, c := W gives x = A^-1 c (s = +1) or x = c^-1 A (s = -1).
  const Word& w = torsion_word_;
  Letter last = w[w.size() - 1];
  eliminated_ = letter_gen(last);
  gen_to_basis_.assign(p.generators().size(), -1);
  for (std::size_t i = 0; i < p.generators().size(); ++i) {
    if (int(i) == eliminated_) continue;
    gen_to_basis_[i] = int(basis_names_.size());
    basis_names_.push_back(p.generators()[i].name);
  }
  torsion_basis_ = int(basis_names_.size());
  std::string cname = "c";
  while (std::find(basis_names_.begin(), basis_names_.end(), cname) != basis_names_.end())
    cname += "_";
  basis_names_.push_back(cname);

  Word prefix = w.subword(0, w.size() - 1);
  auto map_old = [&](const Word& v) {
    std::vector<Letter> out;
    for (Letter l : v.letters()) {
      assert(letter_gen(l) != eliminated_);
      out.push_back(make_letter(gen_to_basis_[std::size_t(letter_gen(l))], letter_sign(l)));
    }
    return free_reduce(out);
  };
  Word c = Word::single(make_letter(torsion_basis_, 1));
  substitution_ = letter_sign(last) > 0 ? map_old(prefix).inverse() * c
                                        : c.inverse() * map_old(prefix);
}

Word RcZeroDecomposition::rewrite(const Word& w) const {
  std::vector<Letter> out;
  for (Letter l : w.letters()) {
    int g = letter_gen(l);
    if (g == eliminated_) {
      Word part = letter_sign(l) > 0 ? substitution_ : substitution_.inverse();
      out.insert(out.end(), part.letters().begin(), part.letters().end());
    } else {
      out.push_back(make_letter(gen_to_basis_[std::size_t(g)], letter_sign(l)));
    }
  }
  return free_reduce(out);
}

std::vector<std::pair<int, int>> RcZeroDecomposition::normal_form(const Word& w) const {
  Word img = rewrite(w);
  // Stack of (basis index, exponent); torsion exponents live mod n in [1, n-1],
  // free letters keep exponent +-1 per entry.
  std::vector<std::pair<int, int>> stack;
  for (Letter l : img.letters()) {
    int b = letter_gen(l);
    int s = letter_sign(l);
    if (b == torsion_basis_) {
      if (!stack.empty() && stack.back().first == torsion_basis_) {
        int e = (stack.back().second + s) % torsion_order_;
        if (e < 0) e += torsion_order_;
        stack.pop_back();
        if (e != 0) stack.emplace_back(torsion_basis_, e);
      } else {
        int e = s % torsion_order_;
        if (e < 0) e += torsion_order_;
        if (e != 0) stack.emplace_back(torsion_basis_, e);
      }
    } else {
      if (!stack.empty() && stack.back().first == b) {
        int e = stack.back().second + s;
        stack.pop_back();
        if (e != 0) stack.emplace_back(b, e);
      } else {
        stack.emplace_back(b, s);
      }
    }
  }
  return stack;
}

bool RcZeroDecomposition::is_trivial(const Word& w) const { return normal_form(w).empty(); }

RcZeroDecomposition decompose_rc_zero(const Presentation& p) { return RcZeroDecomposition(p); }

std::vector<std::string> HnnData::h_names() const {
  auto names = generator_names(original);
  names.push_back(stable);
  return names;
}

std::vector<std::string> HnnData::hnn_names() const {
  auto names = generator_names(base);
  names.push_back(stable);
  return names;
}

Word HnnData::embedding_word(int base_gen) const {
  const auto& sub = subscripts[std::size_t(base_gen)];
  int x = original.index_of(sub.base);
  assert(x >= 0);
  int t = int(original.generators().size());
  Word t_pow = Word::single(make_letter(t, 1)).pow(-sub.height);
  return t_pow * Word::single(make_letter(x, 1)) * t_pow.inverse();
}

Word HnnData::apply_twists(const Word& w) const {
  int t = int(original.generators().size());
  std::vector<Letter> out;
  for (Letter l : w.letters()) {
    int g = letter_gen(l);
    int e = twists[std::size_t(g)];
    if (letter_sign(l) > 0) {
      out.push_back(l);
      for (int i = 0; i < std::abs(e); ++i) out.push_back(make_letter(t, e > 0 ? 1 : -1));
    } else {
      for (int i = 0; i < std::abs(e); ++i) out.push_back(make_letter(t, e > 0 ? -1 : 1));
      out.push_back(l);
    }
  }
  return free_reduce(out);
}

int HnnData::base_index_of(const std::string& base_name, int height) const {
  for (std::size_t i = 0; i < subscripts.size(); ++i)
    if (subscripts[i].base == base_name && subscripts[i].height == height) return int(i);
  return -1;
}

Word HnnData::to_hnn_coordinates(const Word& w_over_h) const {
  int t_src = int(original.generators().size());
  int t_dst = int(base.generators().size());
  // Window anchor per source generator: height 0 when present, else the
  // window minimum; x = t^i x_i t^-i.
  std::vector<int> anchor(original.generators().size(), 0);
  std::vector<int> anchor_idx(original.generators().size(), -1);
  for (std::size_t g = 0; g < original.generators().size(); ++g) {
    const std::string& name = original.generators()[g].name;
    int best = 0;
    int best_idx = base_index_of(name, 0);
    if (best_idx < 0) {
      for (std::size_t k = 0; k < subscripts.size(); ++k) {
        if (subscripts[k].base != name) continue;
        if (best_idx < 0 || subscripts[k].height < best) {
          best = subscripts[k].height;
          best_idx = int(k);
        }
      }
    }
    anchor[g] = best;
    anchor_idx[g] = best_idx;
  }
  std::vector<Letter> out;
  auto push_t = [&](int count) {
    for (int i = 0; i < std::abs(count); ++i) out.push_back(make_letter(t_dst, count > 0 ? 1 : -1));
  };
  for (Letter l : w_over_h.letters()) {
    int g = letter_gen(l);
    if (g == t_src) {
      out.push_back(make_letter(t_dst, letter_sign(l)));
      continue;
    }
    assert(anchor_idx[std::size_t(g)] >= 0);
    push_t(anchor[std::size_t(g)]);
    out.push_back(make_letter(anchor_idx[std::size_t(g)], letter_sign(l)));
    push_t(-anchor[std::size_t(g)]);
  }
  return free_reduce(out);
}

bool verify_magnus_condition(const HnnData& h) {
  std::set<int> occurring;
  for (Letter l : h.base.relator_root().representative().letters()) occurring.insert(letter_gen(l));
  auto omits_occurring = [&](const std::vector<int>& u) {
    if (u.empty()) return true;
    std::set<int> in_u(u.begin(), u.end());
    for (int g : occurring)
      if (!in_u.count(g)) return true;
    return false;
  };
  return omits_occurring(h.u1) && omits_occurring(h.u2);
}

namespace {

struct Candidate {
  int gen_a = -1;
  int gen_b = -1;
  long p = 0;
  long q = 0;
};

std::optional<HnnData> try_candidate(const Presentation& pres, const Candidate& cand, int rc_before,
                                     const std::string& stable) {
  std::vector<int> twists(pres.generators().size(), 0);
  twists[std::size_t(cand.gen_a)] += int(cand.p);
  if (cand.gen_b >= 0) twists[std::size_t(cand.gen_b)] += int(cand.q);

  // The base presentation is filled in below; pres is just a placeholder
  // keeping the aggregate constructible.
  HnnData h{pres, stable, twists, pres, {}, {}, {}, rc_before, 0};

  Word phi_w = h.apply_twists(pres.relator_root().representative());
  int t = int(pres.generators().size());
  long t_sum = 0;
  for (Letter l : phi_w.letters())
    if (letter_gen(l) == t) t_sum += letter_sign(l);
  if (t_sum != 0) return std::nullopt;

  // Height of a letter occurrence is minus the prefix t-exponent, so that
  // x at height i stands for x_i = t^-i x t^i.
  struct Occ {
    int gen;
    int sign;
    int height;
  };
  std::vector<Occ> occs;
  int hsum = 0;
  for (Letter l : phi_w.letters()) {
    if (letter_gen(l) == t) {
      hsum += letter_sign(l);
    } else {
      occs.push_back({letter_gen(l), letter_sign(l), -hsum});
    }
  }

  std::map<int, std::pair<int, int>> window;  // gen -> (min, max) height
  for (const auto& o : occs) {
    auto it = window.find(o.gen);
    if (it == window.end())
      window[o.gen] = {o.height, o.height};
    else {
      it->second.first = std::min(it->second.first, o.height);
      it->second.second = std::max(it->second.second, o.height);
    }
  }

  std::vector<Generator> base_gens;
  std::vector<SubscriptedGenerator> subs;
  std::map<std::pair<int, int>, int> sub_index;  // (gen, height) -> base index
  for (std::size_t g = 0; g < pres.generators().size(); ++g) {
    auto it = window.find(int(g));
    if (it == window.end()) continue;  // cannot happen: core presentation
    for (int i = it->second.first; i <= it->second.second; ++i) {
      sub_index[{int(g), i}] = int(base_gens.size());
      SubscriptedGenerator s{pres.generators()[g].name, i};
      base_gens.push_back(Generator{s.name()});
      subs.push_back(s);
    }
  }

  std::vector<Letter> rewritten;
  rewritten.reserve(occs.size());
  for (const auto& o : occs) rewritten.push_back(make_letter(sub_index[{o.gen, o.height}], o.sign));
  Word base_word = free_reduce(rewritten);
  if (base_word.size() != pres.relator_root().size()) return std::nullopt;
  auto [base_cyc, conj] = cyclic_reduce(base_word);
  if (!conj.empty() || base_cyc.size() != base_word.size()) return std::nullopt;
  if (is_proper_power(base_cyc)) return std::nullopt;

  int rc_after = compute_rc(base_cyc);
  if (rc_after >= rc_before) return std::nullopt;

  h.base = Presentation(base_gens, base_cyc, pres.exponent());
  h.subscripts = subs;
  h.rc_after = rc_after;
  for (const auto& [key, mm] : window) {
    for (int i = mm.first + 1; i <= mm.second; ++i) {
      h.u1.push_back(sub_index[{key, i}]);
      h.u2.push_back(sub_index[{key, i - 1}]);
    }
  }

  if (!verify_magnus_condition(h)) return std::nullopt;

  // Stable relations are identities in the free group on S u {t}:
  // t (t^-i x t^i) t^-1 = t^-(i-1) x t^(i-1).
  Word tw = Word::single(make_letter(t, 1));
  for (std::size_t k = 0; k < h.u1.size(); ++k) {
    Word lhs = tw * h.embedding_word(h.u1[k]) * tw.inverse();
    if (lhs != h.embedding_word(h.u2[k])) return std::nullopt;
  }
  // The embedded base relator recovers the twisted relator exactly.
  Word embedded;
  for (Letter l : base_cyc.representative().letters()) {
    Word e = h.embedding_word(letter_gen(l));
    embedded = embedded * (letter_sign(l) > 0 ? e : e.inverse());
  }
  if (embedded != phi_w) return std::nullopt;

  return h;
}

}  // namespace

HnnData hierarchy_step(const Presentation& p) {
  if (!p.free_factors().empty())
    fail(Errc::invalid_argument, "hierarchy step requires every generator to occur in the relator");
  int rc = compute_rc(p);
  if (rc == 0) fail(Errc::rc_zero, "relator root has repetition complexity zero");

  std::string stable = "t";
  if (p.index_of(stable) >= 0) {
    for (char c : std::string("suvwzyxrqponmlkjihgfedcba")) {
      std::string cand(1, c);
      if (p.index_of(cand) < 0) {
        stable = cand;
        break;
      }
    }
    if (p.index_of(stable) >= 0) stable = "t_stable";
  }

  const Word& root = p.relator_root().representative();
  auto sigma = exponent_vector(root, p.generators().size());
  std::vector<int> occ_count(p.generators().size(), 0);
  for (Letter l : root.letters()) occ_count[std::size_t(letter_gen(l))]++;

  int m = int(p.generators().size());
  std::vector<Candidate> candidates;
  std::set<std::vector<int>> seen;
  auto add = [&](int i, int j, long pp, long qq) {
    if (pp == 0 && qq == 0) return;
    std::vector<int> tw(p.generators().size(), 0);
    tw[std::size_t(i)] += int(pp);
    if (j >= 0) tw[std::size_t(j)] += int(qq);
    bool all_zero = std::all_of(tw.begin(), tw.end(), [](int x) { return x == 0; });
    if (all_zero) return;
    if (!seen.insert(tw).second) return;
    candidates.push_back({i, j, pp, qq});
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      long si = sigma[std::size_t(i)];
      long sj = sigma[std::size_t(j)];
      std::vector<std::pair<long, long>> bases;
      if (si == 0 && sj == 0)
        bases = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
      else if (si == 0)
        bases = {{1, 0}};
      else if (sj == 0)
        bases = {{0, 1}};
      else {
        long g = std::gcd(std::abs(si), std::abs(sj));
        bases = {{sj / g, -si / g}};
      }
      for (int k = 1; k <= 3; ++k)
        for (auto [bp, bq] : bases) {
          add(i, j, k * bp, k * bq);
          add(i, j, -k * bp, -k * bq);
        }
    }
  }
  // Prefer candidates that twist a repeated letter: only those can split a
  // letter across heights directly.
  std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    auto pref = [&](const Candidate& c) {
      bool rep = (c.p != 0 && occ_count[std::size_t(c.gen_a)] > 1) ||
                 (c.gen_b >= 0 && c.q != 0 && occ_count[std::size_t(c.gen_b)] > 1);
      return rep ? 0 : 1;
    };
    return pref(a) < pref(b);
  });

  for (const auto& cand : candidates) {
    if (auto h = try_candidate(p, cand, rc, stable)) return *h;
  }
  fail(Errc::search_exhausted, "no balancing twist reduced the repetition complexity");
}

nlohmann::ordered_json to_json(const HnnData& h) {
  nlohmann::ordered_json j;
  j["original"] = {{"generators", generator_names(h.original)},
                   {"relator_root", h.original.print_word(h.original.relator_root().representative())},
                   {"exponent", h.original.exponent()}};
  j["stable"] = h.stable;
  nlohmann::ordered_json tw = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < h.twists.size(); ++g)
    if (h.twists[g] != 0) tw[h.original.generators()[g].name] = h.twists[g];
  j["twists"] = tw;
  nlohmann::ordered_json bg = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < h.subscripts.size(); ++i)
    bg.push_back({{"name", h.subscripts[i].name()},
                  {"base", h.subscripts[i].base},
                  {"height", h.subscripts[i].height}});
  auto base_names = generator_names(h.base);
  j["base"] = {{"generators", bg},
               {"relator_root", print_word_over(h.base.relator_root().representative(), base_names)},
               {"exponent", h.base.exponent()}};
  auto name_list = [&](const std::vector<int>& u) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int i : u) arr.push_back(base_names[std::size_t(i)]);
    return arr;
  };
  j["u1"] = name_list(h.u1);
  j["u2"] = name_list(h.u2);
  nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < h.u1.size(); ++k)
    alpha.push_back({base_names[std::size_t(h.u1[k])], base_names[std::size_t(h.u2[k])]});
  j["alpha"] = alpha;
  nlohmann::ordered_json emb = nlohmann::ordered_json::object();
  auto hn = h.h_names();
  for (std::size_t i = 0; i < h.subscripts.size(); ++i)
    emb[h.subscripts[i].name()] = print_word_over(h.embedding_word(int(i)), hn);
  j["embedding"] = emb;
  j["rc_before"] = h.rc_before;
  j["rc_after"] = h.rc_after;
  return j;
}

HnnData hnn_data_from_json(const nlohmann::ordered_json& j) {
  std::vector<Generator> ogens;
  for (const auto& n : j.at("original").at("generators")) ogens.push_back(Generator{n.get<std::string>()});
  std::vector<std::string> onames;
  for (const auto& g : ogens) onames.push_back(g.name);
  Word oroot = parse_word_over(j.at("original").at("relator_root").get<std::string>(), onames);
  Presentation original(ogens, CyclicWord::from_cyclically_reduced(oroot),
                        j.at("original").at("exponent").get<int>());
  HnnData h{original, j.at("stable").get<std::string>(), {}, original, {}, {}, {}, 0, 0};
  h.twists.assign(ogens.size(), 0);
  for (auto it = j.at("twists").begin(); it != j.at("twists").end(); ++it) {
    int g = h.original.index_of(it.key());
    if (g < 0) fail(Errc::invalid_argument, "twist references unknown generator");
    h.twists[std::size_t(g)] = it.value().get<int>();
  }
  std::vector<Generator> bgens;
  for (const auto& entry : j.at("base").at("generators")) {
    SubscriptedGenerator s{entry.at("base").get<std::string>(), entry.at("height").get<int>()};
    if (entry.at("name").get<std::string>() != s.name())
      fail(Errc::invalid_argument, "subscripted generator name mismatch");
    h.subscripts.push_back(s);
    bgens.push_back(Generator{s.name()});
  }
  std::vector<std::string> bnames;
  for (const auto& g : bgens) bnames.push_back(g.name);
  Word broot = parse_word_over(j.at("base").at("relator_root").get<std::string>(), bnames);
  h.base = Presentation(bgens, CyclicWord::from_cyclically_reduced(broot),
                        j.at("base").at("exponent").get<int>());
  auto read_list = [&](const nlohmann::ordered_json& arr) {
    std::vector<int> out;
    for (const auto& n : arr) {
      int i = h.base.index_of(n.get<std::string>());
      if (i < 0) fail(Errc::invalid_argument, "unknown base generator in u-list");
      out.push_back(i);
    }
    return out;
  };
  h.u1 = read_list(j.at("u1"));
  h.u2 = read_list(j.at("u2"));
  if (h.u1.size() != h.u2.size()) fail(Errc::invalid_argument, "u1/u2 size mismatch");
  h.rc_before = j.at("rc_before").get<int>();
  h.rc_after = j.at("rc_after").get<int>();
  return h;
}

}  // namespace orsep
