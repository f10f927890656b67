#include "orsep/hnn.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace orsep {

namespace {

bool sorted_contains(const std::vector<Perm>& sorted, const Perm& p) {
  return std::binary_search(sorted.begin(), sorted.end(), p);
}

std::vector<Perm> sorted_closure_of(const std::vector<Perm>& gens, int degree, std::size_t bound) {
  std::vector<Perm> use = gens;
  if (use.empty()) use.push_back(Perm::identity(degree));
  auto elems = permutation_closure(use, bound);
  std::sort(elems.begin(), elems.end());
  return elems;
}

}  // namespace

FiniteBaseHnn::FiniteBaseHnn(std::vector<Perm> base_gens,
                             std::vector<std::pair<Perm, Perm>> alpha_gen_pairs,
                             std::size_t closure_bound)
    : base_gens_(std::move(base_gens)), alpha_gens_(std::move(alpha_gen_pairs)) {
  if (base_gens_.empty()) fail(Errc::invalid_argument, "base needs at least one generator");
  degree_ = base_gens_.front().degree();
  for (const auto& g : base_gens_)
    if (g.degree() != degree_) fail(Errc::invalid_argument, "mixed degrees in base");
  base_ = sorted_closure_of(base_gens_, degree_, closure_bound);

  std::vector<Perm> m1_gens, m2_gens;
  for (const auto& [g, ag] : alpha_gens_) {
    if (g.degree() != degree_ || ag.degree() != degree_)
      fail(Errc::invalid_argument, "alpha pair degree mismatch");
    if (!sorted_contains(base_, g) || !sorted_contains(base_, ag))
      fail(Errc::invalid_argument, "alpha pair outside the base group");
    m1_gens.push_back(g);
    m2_gens.push_back(ag);
  }
  m1_ = sorted_closure_of(m1_gens, degree_, closure_bound);
  m2_ = sorted_closure_of(m2_gens, degree_, closure_bound);
  if (m1_.size() != m2_.size())
    fail(Errc::alpha_inconsistent, "associated subgroups have different orders");

  // Extend alpha multiplicatively over m1 and detect collisions.
  Perm id = Perm::identity(degree_);
  alpha_[id] = id;
  std::deque<Perm> queue{id};
  while (!queue.empty()) {
    Perm e = queue.front();
    queue.pop_front();
    Perm ae = alpha_.at(e);
    for (const auto& [g, ag] : alpha_gens_) {
      Perm ne = e * g;
      Perm na = ae * ag;
      auto it = alpha_.find(ne);
      if (it != alpha_.end()) {
        if (it->second != na)
          fail(Errc::alpha_inconsistent, "alpha is not well defined on a product");
      } else {
        alpha_.emplace(ne, na);
        queue.push_back(ne);
      }
    }
  }
  if (alpha_.size() != m1_.size())
    fail(Errc::alpha_inconsistent, "alpha does not cover the first associated subgroup");
  std::vector<Perm> images;
  for (const auto& [g, ag] : alpha_) {
    if (!sorted_contains(m1_, g)) fail(Errc::alpha_inconsistent, "alpha domain escapes m1");
    images.push_back(ag);
  }
  std::sort(images.begin(), images.end());
  if (images != m2_) fail(Errc::alpha_inconsistent, "alpha image is not the second subgroup");
  for (const auto& [g, ag] : alpha_) alpha_inv_.emplace(ag, g);

  for (const auto& [g, ag] : alpha_)
    for (const auto& [h, ah] : alpha_)
      if (alpha_.at(g * h) != ag * ah)
        fail(Errc::alpha_inconsistent, "alpha fails multiplicativity");
}

std::vector<std::pair<Perm, Perm>> FiniteBaseHnn::alpha_pairs() const {
  return std::vector<std::pair<Perm, Perm>>(alpha_.begin(), alpha_.end());
}

bool FiniteBaseHnn::in_base(const Perm& p) const { return sorted_contains(base_, p); }
bool FiniteBaseHnn::in_m1(const Perm& p) const { return sorted_contains(m1_, p); }
bool FiniteBaseHnn::in_m2(const Perm& p) const { return sorted_contains(m2_, p); }

Perm FiniteBaseHnn::alpha(const Perm& g) const {
  auto it = alpha_.find(g);
  if (it == alpha_.end()) fail(Errc::invalid_argument, "alpha applied outside m1");
  return it->second;
}

Perm FiniteBaseHnn::alpha_inv(const Perm& g) const {
  auto it = alpha_inv_.find(g);
  if (it == alpha_inv_.end()) fail(Errc::invalid_argument, "alpha inverse applied outside m2");
  return it->second;
}

HnnWord HnnWord::base_word(Perm b) { return HnnWord{std::move(b), {}}; }

HnnWord HnnWord::identity(int degree) { return HnnWord{Perm::identity(degree), {}}; }

HnnWord HnnWord::stable(int eps, int degree) {
  return HnnWord{Perm::identity(degree), {{eps, Perm::identity(degree)}}};
}

HnnWord HnnWord::operator*(const HnnWord& other) const {
  HnnWord out = *this;
  if (out.tail.empty()) {
    out.head = out.head * other.head;
  } else {
    out.tail.back().second = out.tail.back().second * other.head;
  }
  out.tail.insert(out.tail.end(), other.tail.begin(), other.tail.end());
  return out;
}

HnnWord HnnWord::inverse() const {
  HnnWord out;
  if (tail.empty()) {
    out.head = head.inverse();
    return out;
  }
  out.head = tail.back().second.inverse();
  for (std::size_t i = tail.size(); i-- > 1;)
    out.tail.emplace_back(-tail[i].first, tail[i - 1].second.inverse());
  out.tail.emplace_back(-tail.front().first, head.inverse());
  return out;
}

HnnWord britton_reduce(const HnnWord& w, const FiniteBaseHnn& h) {
  if (!h.in_base(w.head)) fail(Errc::invalid_argument, "head outside the base group");
  for (const auto& [eps, b] : w.tail) {
    if (eps != 1 && eps != -1) fail(Errc::invalid_argument, "stable exponent must be +1 or -1");
    if (!h.in_base(b)) fail(Errc::invalid_argument, "segment outside the base group");
  }
  HnnWord cur = w;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < cur.tail.size(); ++i) {
      int e = cur.tail[i].first;
      const Perm& g = cur.tail[i].second;
      if (cur.tail[i + 1].first != -e) continue;
      bool pinch = e == 1 ? h.in_m1(g) : h.in_m2(g);
      if (!pinch) continue;
      Perm image = e == 1 ? h.alpha(g) : h.alpha_inv(g);
      Perm merged_right = image * cur.tail[i + 1].second;
      if (i == 0)
        cur.head = cur.head * merged_right;
      else
        cur.tail[i - 1].second = cur.tail[i - 1].second * merged_right;
      cur.tail.erase(cur.tail.begin() + long(i), cur.tail.begin() + long(i) + 2);
      changed = true;
      break;
    }
  }
  return cur;
}

std::optional<BaseConjugation> conjugate_into_base(const HnnWord& w, const FiniteBaseHnn& h) {
  HnnWord cur = britton_reduce(w, h);
  HnnWord conj = HnnWord::identity(h.degree());
  while (cur.t_length() > 0) {
    int e1 = cur.tail.front().first;
    int ek = cur.tail.back().first;
    Perm wrap = cur.tail.back().second * cur.head;
    bool pinch = e1 == -ek && (ek == 1 ? h.in_m1(wrap) : h.in_m2(wrap));
    if (!pinch) return std::nullopt;
    HnnWord u{cur.head, {{e1, Perm::identity(h.degree())}}};
    HnnWord next = britton_reduce(u.inverse() * cur * u, h);
    if (next.t_length() >= cur.t_length())
      fail(Errc::invalid_argument, "internal: cyclic pinch failed to shorten");
    cur = next;
    conj = conj * u;
  }
  return BaseConjugation{cur.head, conj};
}

const char* hnn_verdict_name(HnnVerdict v) {
  switch (v) {
    case HnnVerdict::non_conjugate: return "NonConjugate";
    case HnnVerdict::conjugate_in_base: return "ConjugateInBase";
    case HnnVerdict::inapplicable: return "Inapplicable";
  }
  return "?";
}

CriterionResult hnn_nonconjugacy_criterion(const FiniteBaseHnn& h, const Perm& x, const Perm& y) {
  if (!h.in_base(x) || !h.in_base(y))
    fail(Errc::invalid_argument, "criterion inputs must lie in the base");
  CriterionResult res;
  for (const auto& a : h.base_elements()) {
    Perm conj = a * x * a.inverse();
    if (conj == y && !res.conjugator) {
      res.y_in_class = true;
      res.conjugator = a;
    }
    if (h.in_m1(conj)) res.class_meets_m1 = true;
    if (h.in_m2(conj)) res.class_meets_m2 = true;
  }
  if (res.y_in_class)
    res.verdict = HnnVerdict::conjugate_in_base;
  else if (!res.class_meets_m1 && !res.class_meets_m2)
    res.verdict = HnnVerdict::non_conjugate;
  else
    res.verdict = HnnVerdict::inapplicable;
  return res;
}

CentralizerResult hnn_centralizer_base(const FiniteBaseHnn& h, const Perm& x) {
  if (!h.in_base(x)) fail(Errc::invalid_argument, "element must lie in the base");
  CentralizerResult res;
  bool meets = false;
  for (const auto& a : h.base_elements()) {
    if (a * x == x * a) res.elements.push_back(a);
    Perm conj = a * x * a.inverse();
    if (h.in_m1(conj) || h.in_m2(conj)) meets = true;
  }
  res.exact = !meets;
  return res;
}

RelatorSystem hnn_relator_system(const HnnData& hd) {
  RelatorSystem sys;
  sys.generators = hd.hnn_names();
  sys.relators.push_back(hd.base.relator());
  int t = int(hd.base.generators().size());
  for (std::size_t k = 0; k < hd.u1.size(); ++k) {
    sys.relators.push_back(free_reduce({make_letter(t, 1), make_letter(hd.u1[k], 1),
                                        make_letter(t, -1), make_letter(hd.u2[k], -1)}));
  }
  return sys;
}

Perm QuotientHnn::eval_base(const Word& w_over_base) const {
  Perm acc = Perm::identity(degree);
  for (Letter l : w_over_base.letters()) {
    std::size_t g = std::size_t(letter_gen(l));
    if (g >= xi.size()) fail(Errc::invalid_argument, "letter outside the base alphabet");
    acc = acc * (letter_sign(l) > 0 ? xi[g] : xi[g].inverse());
  }
  return acc;
}

HnnWord QuotientHnn::eta(const Word& w_over_hnn) const {
  HnnWord out = HnnWord::identity(degree);
  int t = int(xi.size());
  for (Letter l : w_over_hnn.letters()) {
    int g = letter_gen(l);
    if (g == t) {
      out = out * HnnWord::stable(letter_sign(l), degree);
    } else if (g < t) {
      Perm p = letter_sign(l) > 0 ? xi[std::size_t(g)] : xi[std::size_t(g)].inverse();
      out = out * HnnWord::base_word(p);
    } else {
      fail(Errc::invalid_argument, "letter outside the HNN alphabet");
    }
  }
  return out;
}

QuotientHnn build_quotient_hnn(const HnnData& hd, const FiniteQuotient& theta,
                               std::size_t closure_bound) {
  std::size_t nbase = hd.base.generators().size();
  if (theta.images().size() != nbase + 1)
    fail(Errc::invalid_argument, "quotient arity does not match the HNN presentation");
  QuotientHnn out;
  out.degree = theta.degree();
  out.xi.assign(theta.images().begin(), theta.images().end() - 1);
  out.t_image = theta.images().back();

  if (!out.eval_base(hd.base.relator()).is_identity())
    fail(Errc::invalid_argument, "base relator does not vanish in the quotient");
  std::vector<std::pair<Perm, Perm>> alpha_pairs;
  for (std::size_t k = 0; k < hd.u1.size(); ++k) {
    Perm u = out.xi[std::size_t(hd.u1[k])];
    Perm au = out.xi[std::size_t(hd.u2[k])];
    if (out.t_image * u * out.t_image.inverse() != au)
      fail(Errc::alpha_inconsistent, "stable relation fails in the quotient");
    alpha_pairs.emplace_back(u, au);
  }
  out.hnn = FiniteBaseHnn(out.xi, alpha_pairs, closure_bound);
  return out;
}

}  // namespace orsep
