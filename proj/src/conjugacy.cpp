#include "orsep/conjugacy.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace orsep {

namespace {

std::vector<long long> scaled_relator_row(const Presentation& p) {
  auto row = exponent_vector(p.relator_root().representative(), p.generators().size());
  for (auto& v : row) v *= p.exponent();
  return row;
}

}  // namespace

AbelianizationData abelianization_data(const Presentation& p, const Word& x, const Word& y) {
  AbelianizationData data;
  data.relator_row = scaled_relator_row(p);
  data.x_row = exponent_vector(x, p.generators().size());
  data.y_row = exponent_vector(y, p.generators().size());
  std::vector<long long> diff(data.x_row.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = data.x_row[i] - data.y_row[i];
  bool row_zero = std::all_of(data.relator_row.begin(), data.relator_row.end(),
                              [](long long v) { return v == 0; });
  if (row_zero) {
    data.separated = std::any_of(diff.begin(), diff.end(), [](long long v) { return v != 0; });
    return data;
  }
  // The difference must be an integer multiple of the relator row.
  std::optional<long long> k;
  bool consistent = true;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    long long r = data.relator_row[i];
    if (r == 0) {
      if (diff[i] != 0) consistent = false;
    } else if (diff[i] % r != 0) {
      consistent = false;
    } else {
      long long q = diff[i] / r;
      if (k && *k != q) consistent = false;
      k = q;
    }
    if (!consistent) break;
  }
  data.separated = !consistent;
  return data;
}

AbelianVerdict abelianization_check(const Presentation& p, const Word& x, const Word& y) {
  return abelianization_data(p, x, y).separated ? AbelianVerdict::non_conjugate
                                                : AbelianVerdict::indeterminate;
}

namespace {

// Shared walker for the conjugator search. States are reduced forms of
// u x u^-1, extended by prepending letters: state(l u) only depends on l and
// state(u), so identical keys can be pruned without affecting the first
// success in length-lexicographic order.
std::optional<Word> conjugator_walk(const Presentation& p, const Word& x, const Word& y,
                                    int max_len, const FiniteIndexSubgroup* h1) {
  PieceIndex idx(p);
  Word y_inv = y.inverse();
  auto success = [&](const Word& state, const Perm& img) {
    if (h1 && !h1->contains_image(img)) return false;
    return is_trivial(state * y_inv, idx);
  };

  struct Node {
    Word state;
    Perm img;
    int parent;
    Letter step;
  };
  Perm id = h1 ? Perm::identity(h1->quotient().degree()) : Perm();
  std::vector<Node> arena;
  std::set<std::pair<Word, Perm>> seen;

  Word root_state = idx.reduce(x);
  if (success(root_state, id)) return Word();
  arena.push_back({root_state, id, -1, 0});
  seen.insert({root_state, id});

  std::vector<Letter> alphabet;
  for (std::size_t g = 0; g < p.generators().size(); ++g) {
    alphabet.push_back(make_letter(int(g), 1));
    alphabet.push_back(make_letter(int(g), -1));
  }
  auto reconstruct = [&](int node, Letter l) {
    std::vector<Letter> letters{l};
    for (int i = node; i > 0; i = arena[std::size_t(i)].parent)
      letters.push_back(arena[std::size_t(i)].step);
    return free_reduce(letters);
  };

  std::size_t layer_begin = 0;
  std::size_t layer_end = arena.size();
  for (int len = 1; len <= max_len && layer_begin < layer_end; ++len) {
    for (Letter l : alphabet) {
      Perm img_l;
      if (h1) {
        const Perm& base = h1->quotient().images()[std::size_t(letter_gen(l))];
        img_l = letter_sign(l) > 0 ? base : base.inverse();
      }
      for (std::size_t i = layer_begin; i < layer_end; ++i) {
        if (len > 1 && arena[i].step == inverse_letter(l)) continue;  // keep u freely reduced
        Word state = idx.reduce(Word::single(l) * arena[i].state * Word::single(inverse_letter(l)));
        Perm img = h1 ? img_l * arena[i].img : Perm();
        auto key = std::make_pair(state, img);
        if (!seen.insert(key).second) continue;
        if (success(state, img)) return reconstruct(int(i), l);
        arena.push_back({std::move(state), std::move(img), int(i), l});
      }
    }
    layer_begin = layer_end;
    layer_end = arena.size();
  }
  return std::nullopt;
}

}  // namespace

std::optional<Word> enumerate_conjugators(const Presentation& p, const Word& x, const Word& y,
                                          int max_len) {
  return conjugator_walk(p, x, y, max_len, nullptr);
}

std::optional<Word> enumerate_conjugators_in_subgroup(const Presentation& p,
                                                      const FiniteIndexSubgroup& h1, const Word& x,
                                                      const Word& y, int max_len) {
  return conjugator_walk(p, x, y, max_len, &h1);
}

std::string Certificate::kind() const {
  return doc.is_object() && doc.contains("kind") && doc["kind"].is_string()
             ? doc["kind"].get<std::string>()
             : std::string();
}

std::string Certificate::dump(int indent) const { return doc.dump(indent); }

Certificate Certificate::from_text(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::syntax_error, "certificate is not valid JSON");
  return Certificate{std::move(j)};
}

namespace {

using Json = nlohmann::ordered_json;

Json presentation_json(const Presentation& p) {
  Json j;
  j["generators"] = generator_names(p);
  j["relator"] = p.print_word(p.relator_root().representative());
  j["exponent"] = p.exponent();
  return j;
}

Presentation presentation_from(const Json& j) {
  std::vector<Generator> gens;
  for (const auto& n : j.at("generators")) gens.push_back(Generator{n.get<std::string>()});
  std::vector<std::string> names;
  for (const auto& g : gens) names.push_back(g.name);
  Word root = parse_word_over(j.at("relator").get<std::string>(), names);
  auto [cyc, conj] = cyclic_reduce(root);
  if (!conj.empty() || cyc.size() != root.size())
    fail(Errc::syntax_error, "relator is not cyclically reduced");
  return Presentation(gens, cyc, j.at("exponent").get<int>());
}

Json perm_json(const Perm& p) { return Json(p.images()); }

Perm perm_from(const Json& j) { return Perm(j.get<std::vector<int>>()); }

Json quotient_json(const FiniteQuotient& q) {
  Json j;
  j["degree"] = q.degree();
  Json imgs = Json::array();
  for (const auto& p : q.images()) imgs.push_back(perm_json(p));
  j["images"] = imgs;
  return j;
}

FiniteQuotient quotient_from(const RelatorSystem& sys, const Json& j) {
  std::vector<Perm> images;
  for (const auto& img : j.at("images")) images.push_back(perm_from(img));
  FiniteQuotient q(sys, std::move(images));
  if (q.degree() != j.at("degree").get<int>())
    fail(Errc::invalid_argument, "stored degree does not match the images");
  return q;
}

Json subgroup_json(const FiniteIndexSubgroup& h1) {
  Json j;
  j["quotient"] = quotient_json(h1.quotient());
  Json q0 = Json::array();
  for (const auto& g : h1.q0_gens()) q0.push_back(perm_json(g));
  j["q0_gens"] = q0;
  return j;
}

FiniteIndexSubgroup subgroup_from(const RelatorSystem& sys, const Json& j) {
  FiniteQuotient q = quotient_from(sys, j.at("quotient"));
  std::vector<Perm> q0;
  for (const auto& g : j.at("q0_gens")) q0.push_back(perm_from(g));
  return FiniteIndexSubgroup(std::move(q), std::move(q0));
}

Json scope_json(const std::optional<FiniteIndexSubgroup>& scope) {
  Json j;
  if (!scope) {
    j["type"] = "group";
  } else {
    j["type"] = "subgroup";
    j["subgroup"] = subgroup_json(*scope);
  }
  return j;
}

std::optional<FiniteIndexSubgroup> scope_from(const RelatorSystem& sys, const Json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "group") return std::nullopt;
  if (type == "subgroup") return subgroup_from(sys, j.at("subgroup"));
  fail(Errc::syntax_error, "unknown certificate scope");
}

Json hnnword_json(const HnnWord& w) {
  Json j;
  j["head"] = perm_json(w.head);
  Json tail = Json::array();
  for (const auto& [eps, b] : w.tail) tail.push_back(Json::array({eps, perm_json(b)}));
  j["tail"] = tail;
  return j;
}

HnnWord hnnword_from(const Json& j) {
  HnnWord w;
  w.head = perm_from(j.at("head"));
  for (const auto& seg : j.at("tail"))
    w.tail.emplace_back(seg.at(0).get<int>(), perm_from(seg.at(1)));
  return w;
}

Json word_list_json(const Presentation& p, const std::vector<Word>& ws) {
  Json arr = Json::array();
  for (const auto& w : ws) arr.push_back(p.print_word(w));
  return arr;
}

std::vector<Word> word_list_from(const std::vector<std::string>& names, const Json& arr) {
  std::vector<Word> out;
  for (const auto& s : arr) out.push_back(parse_word_over(s.get<std::string>(), names));
  return out;
}

Certificate assemble(const std::string& kind, const Presentation& p, const std::string& x,
                     const std::string& y, const Json& scope, const Json& witness,
                     const Json& checks) {
  Json doc;
  doc["kind"] = kind;
  doc["presentation"] = presentation_json(p);
  doc["x"] = x;
  doc["y"] = y;
  doc["scope"] = scope;
  doc["witness"] = witness;
  doc["checks"] = checks;
  doc["tool_version"] = kToolVersion;
  return Certificate{std::move(doc)};
}

void require_members(const FiniteIndexSubgroup& scope, std::initializer_list<const Word*> words) {
  for (const Word* w : words)
    if (!scope.member_test(*w)) fail(Errc::not_in_subgroup, "word lies outside the scoped subgroup");
}

void require_scope_system(const Presentation& p, const std::optional<FiniteIndexSubgroup>& scope) {
  if (scope && scope->quotient().system().hash() != relator_system(p).hash())
    fail(Errc::invalid_argument, "scope quotient belongs to a different presentation");
}

}  // namespace

Certificate make_conjugacy_certificate(const Presentation& p, const Word& x, const Word& y,
                                       const Word& conjugator,
                                       const std::optional<FiniteIndexSubgroup>& scope) {
  require_scope_system(p, scope);
  PieceIndex idx(p);
  if (!is_trivial(conjugator * x * conjugator.inverse() * y.inverse(), idx))
    fail(Errc::invalid_argument, "conjugator fails the defining identity");
  Json checks;
  checks["dehn_identity"] = true;
  if (scope) {
    require_members(*scope, {&x, &y, &conjugator});
    checks["members"] = true;
  }
  Json witness;
  witness["method"] = "conjugator";
  witness["conjugator"] = p.print_word(conjugator);
  return assemble("Conjugacy", p, p.print_word(x), p.print_word(y), scope_json(scope), witness,
                  checks);
}

Certificate make_abelian_certificate(const Presentation& p, const Word& x, const Word& y,
                                     const std::optional<FiniteIndexSubgroup>& scope) {
  require_scope_system(p, scope);
  auto data = abelianization_data(p, x, y);
  if (!data.separated) fail(Errc::invalid_argument, "abelianization does not separate the pair");
  Json checks;
  checks["separated"] = true;
  if (scope) {
    require_members(*scope, {&x, &y});
    checks["members"] = true;
  }
  Json witness;
  witness["method"] = "abelianization";
  witness["relator_row"] = data.relator_row;
  witness["x_row"] = data.x_row;
  witness["y_row"] = data.y_row;
  return assemble("NonConjugacy", p, p.print_word(x), p.print_word(y), scope_json(scope), witness,
                  checks);
}

Certificate make_quotient_certificate(const Presentation& p, const Word& x, const Word& y,
                                      const FiniteQuotient& q,
                                      const std::optional<FiniteIndexSubgroup>& scope) {
  require_scope_system(p, scope);
  if (q.system().hash() != relator_system(p).hash())
    fail(Errc::invalid_argument, "witness quotient belongs to a different presentation");
  std::vector<Perm> within = q.images();
  Json checks;
  checks["relator_identity"] = true;
  if (scope) {
    require_members(*scope, {&x, &y});
    within.clear();
    for (const auto& s : schreier_generators(*scope)) within.push_back(q.evaluate(s));
    checks["members"] = true;
  }
  if (finite_conjugacy_test(within, q.evaluate(x), q.evaluate(y)))
    fail(Errc::invalid_argument, "witness quotient does not separate the pair");
  checks["images_nonconjugate"] = true;
  Json witness;
  witness["method"] = "quotient";
  witness["quotient"] = quotient_json(q);
  return assemble("NonConjugacy", p, p.print_word(x), p.print_word(y), scope_json(scope), witness,
                  checks);
}

Certificate make_hnn_certificate(const Presentation& p, const Word& x, const Word& y,
                                 const HnnData& hd, const FiniteQuotient& theta) {
  if (hd.original.hash() != p.hash())
    fail(Errc::invalid_argument, "hierarchy data belongs to a different presentation");
  QuotientHnn qh = build_quotient_hnn(hd, theta);
  Word wx = hd.to_hnn_coordinates(hd.apply_twists(x));
  Word wy = hd.to_hnn_coordinates(hd.apply_twists(y));
  auto cx = conjugate_into_base(qh.eta(wx), qh.hnn);
  auto cy = conjugate_into_base(qh.eta(wy), qh.hnn);
  if (!cx || !cy) fail(Errc::invalid_argument, "image is not conjugate into the finite base");
  auto res = hnn_nonconjugacy_criterion(qh.hnn, cx->base, cy->base);
  if (res.verdict != HnnVerdict::non_conjugate)
    fail(Errc::invalid_argument, "the non-conjugacy criterion does not apply");

  auto hnn_names = hd.hnn_names();
  Json witness;
  witness["method"] = "hnn";
  witness["hierarchy"] = to_json(hd);
  witness["theta"] = quotient_json(theta);
  witness["x_hnn"] = print_word_over(wx, hnn_names);
  witness["y_hnn"] = print_word_over(wy, hnn_names);
  witness["x_conjugator"] = hnnword_json(cx->conjugator);
  witness["y_conjugator"] = hnnword_json(cy->conjugator);
  witness["x_base"] = perm_json(cx->base);
  witness["y_base"] = perm_json(cy->base);
  Json checks;
  checks["rc_decrease"] = hd.rc_after < hd.rc_before;
  checks["magnus_condition"] = verify_magnus_condition(hd);
  checks["y_in_base_class"] = res.y_in_class;
  checks["x_class_meets_m1"] = res.class_meets_m1;
  checks["x_class_meets_m2"] = res.class_meets_m2;
  if (!checks["rc_decrease"].get<bool>() || !checks["magnus_condition"].get<bool>())
    fail(Errc::invalid_argument, "hierarchy data fails its own invariants");
  return assemble("HnnNonConjugacy", p, p.print_word(x), p.print_word(y),
                  scope_json(std::nullopt), witness, checks);
}

Certificate make_separation_certificate(const Presentation& p, const Word& g,
                                        const std::vector<Word>& f_gens, const FiniteQuotient& q) {
  if (q.system().hash() != relator_system(p).hash())
    fail(Errc::invalid_argument, "witness quotient belongs to a different presentation");
  PieceIndex idx(p);
  if (is_trivial(g, idx)) fail(Errc::invalid_argument, "the element is trivial");
  std::vector<Perm> f_images;
  for (const auto& w : f_gens) f_images.push_back(q.evaluate(w));
  if (f_images.empty()) f_images.push_back(Perm::identity(q.degree()));
  auto f_closure = permutation_closure(f_images, kDefaultClosureBound);
  std::sort(f_closure.begin(), f_closure.end());
  auto cls = conjugacy_class_of(q.images(), q.evaluate(g));
  for (const auto& e : cls)
    if (std::binary_search(f_closure.begin(), f_closure.end(), e))
      fail(Errc::invalid_argument, "the class meets the subgroup image");
  Json witness;
  witness["method"] = "separation";
  witness["quotient"] = quotient_json(q);
  witness["f_gens"] = word_list_json(p, f_gens);
  Json checks;
  checks["g_nontrivial"] = true;
  checks["class_disjoint"] = true;
  return assemble("Separation", p, p.print_word(g), "", scope_json(std::nullopt), witness, checks);
}

Certificate make_cc_certificate(const Presentation& p, const CCWitness& w) {
  if (!verify_cc(p, w)) fail(Errc::invalid_argument, "the centralizer condition check fails");
  Json witness;
  witness["method"] = "cc";
  witness["centralizer_gens"] = word_list_json(p, w.centralizer_gens);
  witness["p"] = subgroup_json(w.p);
  witness["n"] = quotient_json(w.n);
  Json checks;
  checks["p_normal"] = true;
  checks["kernel_contained"] = true;
  checks["cc_holds"] = true;
  return assemble("CCInstance", p, p.print_word(w.x), "", scope_json(std::nullopt), witness,
                  checks);
}

namespace {

bool verify_conjugacy(const Presentation& p, const std::vector<std::string>& names,
                      const Json& doc, const std::optional<FiniteIndexSubgroup>& scope) {
  const Json& witness = doc.at("witness");
  if (witness.at("method") != "conjugator") return false;
  Word x = parse_word_over(doc.at("x").get<std::string>(), names);
  Word y = parse_word_over(doc.at("y").get<std::string>(), names);
  Word u = parse_word_over(witness.at("conjugator").get<std::string>(), names);
  PieceIndex idx(p);
  if (!is_trivial(u * x * u.inverse() * y.inverse(), idx)) return false;
  Json checks;
  checks["dehn_identity"] = true;
  if (scope) {
    if (!scope->member_test(x) || !scope->member_test(y) || !scope->member_test(u)) return false;
    checks["members"] = true;
  }
  return doc.at("checks") == checks;
}

bool verify_nonconjugacy(const Presentation& p, const std::vector<std::string>& names,
                         const Json& doc, const std::optional<FiniteIndexSubgroup>& scope) {
  const Json& witness = doc.at("witness");
  Word x = parse_word_over(doc.at("x").get<std::string>(), names);
  Word y = parse_word_over(doc.at("y").get<std::string>(), names);
  std::string method = witness.at("method").get<std::string>();
  if (method == "abelianization") {
    auto data = abelianization_data(p, x, y);
    if (!data.separated) return false;
    if (witness.at("relator_row").get<std::vector<long long>>() != data.relator_row) return false;
    if (witness.at("x_row").get<std::vector<long long>>() != data.x_row) return false;
    if (witness.at("y_row").get<std::vector<long long>>() != data.y_row) return false;
    Json checks;
    checks["separated"] = true;
    if (scope) {
      if (!scope->member_test(x) || !scope->member_test(y)) return false;
      checks["members"] = true;
    }
    return doc.at("checks") == checks;
  }
  if (method == "quotient") {
    FiniteQuotient q = quotient_from(relator_system(p), witness.at("quotient"));
    std::vector<Perm> within = q.images();
    Json checks;
    checks["relator_identity"] = true;
    if (scope) {
      if (!scope->member_test(x) || !scope->member_test(y)) return false;
      within.clear();
      for (const auto& s : schreier_generators(*scope)) within.push_back(q.evaluate(s));
      checks["members"] = true;
    }
    if (finite_conjugacy_test(within, q.evaluate(x), q.evaluate(y))) return false;
    checks["images_nonconjugate"] = true;
    return doc.at("checks") == checks;
  }
  return false;
}

bool verify_hnn(const Presentation& p, const std::vector<std::string>& names, const Json& doc,
                const std::optional<FiniteIndexSubgroup>& scope) {
  if (scope) return false;  // this certificate kind is group-scoped
  const Json& witness = doc.at("witness");
  if (witness.at("method") != "hnn") return false;
  Word x = parse_word_over(doc.at("x").get<std::string>(), names);
  Word y = parse_word_over(doc.at("y").get<std::string>(), names);
  HnnData hd = hnn_data_from_json(witness.at("hierarchy"));
  if (hd.original.hash() != p.hash()) return false;

  // Re-derive the hierarchy-step facts recorded in the data.
  if (compute_rc(p) != hd.rc_before || compute_rc(hd.base) != hd.rc_after) return false;
  if (hd.rc_after >= hd.rc_before) return false;
  if (!verify_magnus_condition(hd)) return false;
  int t = int(hd.original.generators().size());
  Word tw = Word::single(make_letter(t, 1));
  for (std::size_t k = 0; k < hd.u1.size(); ++k) {
    Word lhs = tw * hd.embedding_word(hd.u1[k]) * tw.inverse();
    if (lhs != hd.embedding_word(hd.u2[k])) return false;
  }
  Word embedded;
  for (Letter l : hd.base.relator_root().representative().letters()) {
    Word e = hd.embedding_word(letter_gen(l));
    embedded = embedded * (letter_sign(l) > 0 ? e : e.inverse());
  }
  if (embedded != hd.apply_twists(p.relator_root().representative())) return false;

  FiniteQuotient theta = quotient_from(hnn_relator_system(hd), witness.at("theta"));
  QuotientHnn qh = build_quotient_hnn(hd, theta);
  Word wx = hd.to_hnn_coordinates(hd.apply_twists(x));
  Word wy = hd.to_hnn_coordinates(hd.apply_twists(y));
  auto hnn_names = hd.hnn_names();
  if (parse_word_over(witness.at("x_hnn").get<std::string>(), hnn_names) != wx) return false;
  if (parse_word_over(witness.at("y_hnn").get<std::string>(), hnn_names) != wy) return false;

  Perm bx = perm_from(witness.at("x_base"));
  Perm by = perm_from(witness.at("y_base"));
  HnnWord ux = hnnword_from(witness.at("x_conjugator"));
  HnnWord uy = hnnword_from(witness.at("y_conjugator"));
  HnnWord rx = britton_reduce(ux.inverse() * qh.eta(wx) * ux, qh.hnn);
  HnnWord ry = britton_reduce(uy.inverse() * qh.eta(wy) * uy, qh.hnn);
  if (rx.t_length() != 0 || rx.head != bx) return false;
  if (ry.t_length() != 0 || ry.head != by) return false;

  auto res = hnn_nonconjugacy_criterion(qh.hnn, bx, by);
  if (res.verdict != HnnVerdict::non_conjugate) return false;
  Json checks;
  checks["rc_decrease"] = true;
  checks["magnus_condition"] = true;
  checks["y_in_base_class"] = res.y_in_class;
  checks["x_class_meets_m1"] = res.class_meets_m1;
  checks["x_class_meets_m2"] = res.class_meets_m2;
  return doc.at("checks") == checks;
}

bool verify_separation(const Presentation& p, const std::vector<std::string>& names,
                       const Json& doc, const std::optional<FiniteIndexSubgroup>& scope) {
  if (scope) return false;
  const Json& witness = doc.at("witness");
  if (witness.at("method") != "separation") return false;
  if (doc.at("y").get<std::string>() != "") return false;
  Word g = parse_word_over(doc.at("x").get<std::string>(), names);
  FiniteQuotient q = quotient_from(relator_system(p), witness.at("quotient"));
  auto f_gens = word_list_from(names, witness.at("f_gens"));
  PieceIndex idx(p);
  if (is_trivial(g, idx)) return false;
  std::vector<Perm> f_images;
  for (const auto& w : f_gens) f_images.push_back(q.evaluate(w));
  if (f_images.empty()) f_images.push_back(Perm::identity(q.degree()));
  auto f_closure = permutation_closure(f_images, kDefaultClosureBound);
  std::sort(f_closure.begin(), f_closure.end());
  for (const auto& e : conjugacy_class_of(q.images(), q.evaluate(g)))
    if (std::binary_search(f_closure.begin(), f_closure.end(), e)) return false;
  Json checks;
  checks["g_nontrivial"] = true;
  checks["class_disjoint"] = true;
  return doc.at("checks") == checks;
}

bool verify_cc_certificate(const Presentation& p, const std::vector<std::string>& names,
                           const Json& doc, const std::optional<FiniteIndexSubgroup>& scope) {
  if (scope) return false;
  const Json& witness = doc.at("witness");
  if (witness.at("method") != "cc") return false;
  if (doc.at("y").get<std::string>() != "") return false;
  CCWitness w;
  w.x = parse_word_over(doc.at("x").get<std::string>(), names);
  w.centralizer_gens = word_list_from(names, witness.at("centralizer_gens"));
  w.p = subgroup_from(relator_system(p), witness.at("p"));
  w.n = quotient_from(relator_system(p), witness.at("n"));
  if (!verify_cc(p, w)) return false;
  Json checks;
  checks["p_normal"] = true;
  checks["kernel_contained"] = true;
  checks["cc_holds"] = true;
  return doc.at("checks") == checks;
}

bool verify_impl(const Json& doc) {
  if (!doc.is_object()) return false;
  if (doc.at("tool_version").get<std::string>() != kToolVersion) return false;
  Presentation p = presentation_from(doc.at("presentation"));
  auto names = generator_names(p);
  auto scope = scope_from(relator_system(p), doc.at("scope"));
  std::string kind = doc.at("kind").get<std::string>();
  if (kind == "Conjugacy") return verify_conjugacy(p, names, doc, scope);
  if (kind == "NonConjugacy") return verify_nonconjugacy(p, names, doc, scope);
  if (kind == "HnnNonConjugacy") return verify_hnn(p, names, doc, scope);
  if (kind == "Separation") return verify_separation(p, names, doc, scope);
  if (kind == "CCInstance") return verify_cc_certificate(p, names, doc, scope);
  return false;
}

}  // namespace

bool verify_certificate(const Certificate& c) {
  try {
    return verify_impl(c.doc);
  } catch (const std::exception&) {
    return false;
  }
}

namespace {

// Shared refutation step: first separating quotient where the image of y
// avoids the class of the image of x under `within` (the whole image group,
// or the image of the scoped subgroup).
std::optional<FiniteQuotient> separating_quotient(const Presentation& p, const Word& x,
                                                  const Word& y,
                                                  const std::vector<Word>* subgroup_words,
                                                  int max_index, const ConjugacyBudget& b) {
  RelatorSystem sys = relator_system(p);
  auto separates = [&](const FiniteQuotient& q) {
    std::vector<Perm> within;
    if (subgroup_words) {
      for (const auto& w : *subgroup_words) within.push_back(q.evaluate(w));
      if (within.empty()) within.push_back(Perm::identity(q.degree()));
    } else {
      within = q.images();
    }
    try {
      return !finite_conjugacy_test(within, q.evaluate(x), q.evaluate(y), b.closure_bound)
                  .has_value();
    } catch (const Error& e) {
      if (e.code() == Errc::subgroup_too_large) return false;
      throw;
    }
  };
  std::vector<FiniteQuotient> singles;
  std::optional<FiniteQuotient> found;
  try {
    for_each_low_index(sys, max_index, [&](const FiniteQuotient& q) {
      singles.push_back(q);
      if (separates(q)) {
        found = q;
        return false;
      }
      return true;
    }, b.node_budget);
  } catch (const Error& e) {
    if (e.code() != Errc::budget_exceeded) throw;
  }
  if (found) return found;
  int refinements = 0;
  for (std::size_t j = 1; j < singles.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      if (refinements++ >= b.max_pair_refinements) return std::nullopt;
      FiniteQuotient sum = singles[i].direct_sum(singles[j]);
      if (separates(sum)) return sum;
    }
  return std::nullopt;
}

Certificate decide_common(const Presentation& p, const Word& x, const Word& y,
                          const ConjugacyBudget& budget,
                          const std::optional<FiniteIndexSubgroup>& scope,
                          const std::vector<Word>* subgroup_words) {
  PieceIndex idx(p);
  if (is_trivial(x * y.inverse(), idx))
    return make_conjugacy_certificate(p, x, y, Word(), scope);
  if (abelianization_data(p, x, y).separated) return make_abelian_certificate(p, x, y, scope);

  if (!scope && budget.cache_dir) {
    for (const auto& q : load_cached_quotients(relator_system(p), *budget.cache_dir)) {
      try {
        if (!finite_conjugacy_test(q.images(), q.evaluate(x), q.evaluate(y), budget.closure_bound))
          return make_quotient_certificate(p, x, y, q, scope);
      } catch (const Error& e) {
        if (e.code() != Errc::subgroup_too_large) throw;
      }
    }
  }

  if (!scope && p.free_factors().empty() && compute_rc(p) > 0 && budget.hnn_index > 0) {
    try {
      HnnData hd = hierarchy_step(p);
      RelatorSystem sys_h = hnn_relator_system(hd);
      std::vector<FiniteQuotient> thetas;
      if (budget.cache_dir) thetas = load_cached_quotients(sys_h, *budget.cache_dir);
      try {
        for (const auto& q : enumerate_low_index(sys_h, budget.hnn_index, budget.node_budget))
          thetas.push_back(q);
      } catch (const Error& e) {
        if (e.code() != Errc::budget_exceeded) throw;
      }
      for (const auto& theta : thetas) {
        try {
          QuotientHnn qh = build_quotient_hnn(hd, theta, budget.closure_bound);
          Word wx = hd.to_hnn_coordinates(hd.apply_twists(x));
          Word wy = hd.to_hnn_coordinates(hd.apply_twists(y));
          auto cx = conjugate_into_base(qh.eta(wx), qh.hnn);
          auto cy = conjugate_into_base(qh.eta(wy), qh.hnn);
          if (!cx || !cy) continue;
          auto res = hnn_nonconjugacy_criterion(qh.hnn, cx->base, cy->base);
          if (res.verdict == HnnVerdict::non_conjugate)
            return make_hnn_certificate(p, x, y, hd, theta);
        } catch (const Error& e) {
          if (e.code() != Errc::alpha_inconsistent && e.code() != Errc::subgroup_too_large) throw;
        }
      }
    } catch (const Error& e) {
      if (e.code() != Errc::search_exhausted && e.code() != Errc::budget_exceeded) throw;
    }
  }

  for (int round = 0;; ++round) {
    int len = std::min(2 * (round + 1), budget.max_conjugator_len);
    int index = std::min(1 << (round + 1), budget.max_index);
    bool final_round = len == budget.max_conjugator_len && index == budget.max_index;
    std::optional<Word> u =
        subgroup_words ? enumerate_conjugators_in_subgroup(p, *scope, x, y, len)
                       : enumerate_conjugators(p, x, y, len);
    if (u) return make_conjugacy_certificate(p, x, y, *u, scope);
    if (auto q = separating_quotient(p, x, y, subgroup_words, index, budget))
      return make_quotient_certificate(p, x, y, *q, scope);
    if (final_round)
      fail(Errc::budget_exceeded, "undecided: conjugator and quotient budgets exhausted");
  }
}

}  // namespace

Certificate decide_conjugacy(const Presentation& p, const Word& x, const Word& y,
                             const ConjugacyBudget& budget) {
  return decide_common(p, x, y, budget, std::nullopt, nullptr);
}

Certificate decide_conjugacy_in_subgroup(const Presentation& p, const FiniteIndexSubgroup& h1,
                                         const Word& x, const Word& y,
                                         const ConjugacyBudget& budget) {
  if (h1.quotient().system().hash() != relator_system(p).hash())
    fail(Errc::invalid_argument, "subgroup quotient belongs to a different presentation");
  if (!h1.member_test(x) || !h1.member_test(y))
    fail(Errc::not_in_subgroup, "both inputs must lie in the subgroup");
  std::vector<Word> schreier = schreier_generators(h1);
  return decide_common(p, x, y, budget, h1, &schreier);
}

}  // namespace orsep
