#include "orsep/quotients.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "orsep/dehn.hpp"

namespace orsep {

namespace {

bool sorted_contains(const std::vector<Perm>& sorted, const Perm& p) {
  return std::binary_search(sorted.begin(), sorted.end(), p);
}

std::vector<Perm> sorted_closure(const std::vector<Perm>& gens, int degree, std::size_t bound) {
  std::vector<Perm> use = gens;
  if (use.empty()) use.push_back(Perm::identity(degree));
  auto elems = permutation_closure(use, bound);
  std::sort(elems.begin(), elems.end());
  return elems;
}

}  // namespace

std::uint64_t RelatorSystem::hash() const {
  std::uint64_t h = fnv1a("relator-system");
  for (const auto& g : generators) {
    h ^= fnv1a(g);
    h *= 1099511628211ull;
  }
  for (const auto& r : relators) {
    h ^= fnv1a("relator");
    for (Letter l : r.letters()) {
      h ^= std::uint64_t(std::int64_t(l)) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
  }
  return h;
}

RelatorSystem relator_system(const Presentation& p) {
  RelatorSystem sys;
  sys.generators = generator_names(p);
  sys.relators.push_back(p.relator());
  return sys;
}

FiniteQuotient::FiniteQuotient(RelatorSystem sys, std::vector<Perm> images)
    : sys_(std::move(sys)), images_(std::move(images)) {
  if (images_.size() != sys_.generators.size())
    fail(Errc::invalid_argument, "one image permutation per generator required");
  if (images_.empty()) fail(Errc::invalid_argument, "empty generator list");
  degree_ = images_.front().degree();
  if (degree_ < 1) fail(Errc::invalid_argument, "degree must be positive");
  for (const auto& p : images_)
    if (p.degree() != degree_) fail(Errc::invalid_argument, "mixed image degrees");
  inverses_.reserve(images_.size());
  for (const auto& p : images_) inverses_.push_back(p.inverse());
  for (const auto& r : sys_.relators)
    if (!evaluate(r).is_identity())
      fail(Errc::invalid_argument, "relator does not evaluate to the identity");
}

Perm FiniteQuotient::evaluate(const Word& w) const {
  Perm acc = Perm::identity(degree_);
  for (Letter l : w.letters()) {
    std::size_t g = std::size_t(letter_gen(l));
    if (g >= images_.size()) fail(Errc::invalid_argument, "word letter outside the alphabet");
    acc = acc * (letter_sign(l) > 0 ? images_[g] : inverses_[g]);
  }
  return acc;
}

bool FiniteQuotient::is_transitive() const {
  std::vector<bool> seen(std::size_t(degree_), false);
  std::deque<int> queue{0};
  seen[0] = true;
  int count = 1;
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (const auto& p : images_) {
      for (int d : {p.apply(c), p.inverse().apply(c)}) {
        if (!seen[std::size_t(d)]) {
          seen[std::size_t(d)] = true;
          ++count;
          queue.push_back(d);
        }
      }
    }
  }
  return count == degree_;
}

FiniteQuotient FiniteQuotient::direct_sum(const FiniteQuotient& other) const {
  if (sys_.hash() != other.sys_.hash())
    fail(Errc::invalid_argument, "direct sum requires a common relator system");
  std::vector<Perm> joined;
  for (std::size_t g = 0; g < images_.size(); ++g) {
    std::vector<int> img(std::size_t(degree_ + other.degree_));
    for (int i = 0; i < degree_; ++i) img[std::size_t(i)] = images_[g].apply(i);
    for (int i = 0; i < other.degree_; ++i)
      img[std::size_t(degree_ + i)] = degree_ + other.images_[g].apply(i);
    joined.emplace_back(std::move(img));
  }
  return FiniteQuotient(sys_, std::move(joined));
}

namespace {

// Backtracking coset-table completion. Columns pair each generator with its
// inverse; a definition always records both directions. Branching fills the
// first undefined slot in row-major order, trying existing cosets in
// ascending order and then one fresh coset, so each subgroup's table is
// produced exactly once with first-appearance numbering.
class LowIndexSearch {
 public:
  LowIndexSearch(const RelatorSystem& sys, std::uint64_t node_budget)
      : ngens_(int(sys.generators.size())), ncols_(2 * int(sys.generators.size())),
        budget_(node_budget) {
    for (const auto& r : sys.relators) {
      if (r.empty()) continue;
      std::vector<int> cols;
      for (Letter l : r.letters()) cols.push_back(col_of(l));
      relators_.push_back(std::move(cols));
    }
  }

  // Emits all complete tables using exactly `index` cosets. Returns false if
  // the emit callback stopped the search.
  bool run_exact(int index, const std::function<bool(const std::vector<int>&, int)>& emit) {
    max_cosets_ = index;
    table_.assign(std::size_t(index * ncols_), -1);
    used_ = 1;
    emit_ = &emit;
    stopped_ = false;
    dfs();
    return !stopped_;
  }

  std::uint64_t nodes_used() const { return nodes_; }

 private:
  int col_of(Letter l) const { return 2 * letter_gen(l) + (letter_sign(l) < 0 ? 1 : 0); }
  static int inv_col(int col) { return col ^ 1; }

  int& at(int c, int col) { return table_[std::size_t(c * ncols_ + col)]; }
  int get(int c, int col) const { return table_[std::size_t(c * ncols_ + col)]; }

  bool define(int c, int col, int t, std::vector<int>& trail) {
    int back = get(t, inv_col(col));
    if (back != -1 && back != c) return false;
    if (get(c, col) == -1) {
      at(c, col) = t;
      trail.push_back(c * ncols_ + col);
    }
    if (back == -1) {
      at(t, inv_col(col)) = c;
      trail.push_back(t * ncols_ + inv_col(col));
    }
    return true;
  }

  // Two-ended scan of one relator at one coset; fills a single gap as a
  // deduction. Returns false on contradiction, sets changed on deduction.
  bool scan(int c, const std::vector<int>& r, std::vector<int>& trail, bool& changed) {
    int f = c;
    std::size_t i = 0;
    while (i < r.size()) {
      int next = get(f, r[i]);
      if (next == -1) break;
      f = next;
      ++i;
    }
    int b = c;
    std::size_t j = r.size();
    while (j > i) {
      int prev = get(b, inv_col(r[j - 1]));
      if (prev == -1) break;
      b = prev;
      --j;
    }
    if (i == j) return f == b;
    if (j == i + 1) {
      if (!define(f, r[i], b, trail)) return false;
      changed = true;
    }
    return true;
  }

  bool deduce(std::vector<int>& trail) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int c = 0; c < used_; ++c)
        for (const auto& r : relators_)
          if (!scan(c, r, trail, changed)) return false;
    }
    return true;
  }

  void undo(const std::vector<int>& trail) {
    for (int idx : trail) table_[std::size_t(idx)] = -1;
  }

  void dfs() {
    if (stopped_) return;
    int slot = -1;
    for (int idx = 0; idx < used_ * ncols_; ++idx) {
      if (table_[std::size_t(idx)] == -1) {
        slot = idx;
        break;
      }
    }
    if (slot == -1) {
      if (used_ == max_cosets_) {
        if (!(*emit_)(table_, used_)) stopped_ = true;
      }
      return;
    }
    int c = slot / ncols_;
    int col = slot % ncols_;
    int limit = used_ < max_cosets_ ? used_ + 1 : used_;
    for (int t = 0; t < limit && !stopped_; ++t) {
      if (++nodes_ > budget_) fail(Errc::budget_exceeded, "coset enumeration node budget exhausted");
      bool grew = (t == used_);
      if (grew) ++used_;
      std::vector<int> trail;
      if (define(c, col, t, trail) && deduce(trail)) dfs();
      undo(trail);
      if (grew) --used_;
    }
  }

  int ngens_;
  int ncols_;
  std::uint64_t budget_;
  std::vector<std::vector<int>> relators_;
  std::vector<int> table_;
  int used_ = 1;
  int max_cosets_ = 1;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
  const std::function<bool(const std::vector<int>&, int)>* emit_ = nullptr;
};

}  // namespace

void for_each_low_index(const RelatorSystem& sys, int max_index,
                        const std::function<bool(const FiniteQuotient&)>& emit,
                        std::uint64_t node_budget) {
  if (max_index < 1) fail(Errc::invalid_argument, "max_index must be at least 1");
  if (sys.generators.empty()) fail(Errc::invalid_argument, "empty generator list");
  LowIndexSearch search(sys, node_budget);
  int ncols = 2 * int(sys.generators.size());
  for (int k = 1; k <= max_index; ++k) {
    bool keep_going = search.run_exact(k, [&](const std::vector<int>& table, int used) {
      std::vector<Perm> images;
      for (std::size_t g = 0; g < sys.generators.size(); ++g) {
        std::vector<int> img(static_cast<std::size_t>(used), 0);
        for (int c = 0; c < used; ++c) img[std::size_t(c)] = table[std::size_t(c * ncols + 2 * int(g))];
        images.emplace_back(std::move(img));
      }
      return emit(FiniteQuotient(sys, std::move(images)));
    });
    if (!keep_going) return;
  }
}

std::vector<FiniteQuotient> enumerate_low_index(const RelatorSystem& sys, int max_index,
                                                std::uint64_t node_budget) {
  std::vector<FiniteQuotient> out;
  for_each_low_index(sys, max_index, [&](const FiniteQuotient& q) {
    out.push_back(q);
    return true;
  }, node_budget);
  return out;
}

std::optional<Perm> finite_conjugacy_test(const std::vector<Perm>& within_gens, const Perm& g,
                                          const Perm& h, std::size_t bound) {
  if (g.degree() != h.degree()) fail(Errc::invalid_argument, "degree mismatch");
  if (g.cycle_type() != h.cycle_type()) return std::nullopt;
  if (g == h) return Perm::identity(g.degree());
  std::map<Perm, Perm> conj;  // orbit element -> c with c * g * c^-1 == element
  std::deque<Perm> queue;
  conj.emplace(g, Perm::identity(g.degree()));
  queue.push_back(g);
  while (!queue.empty()) {
    Perm e = queue.front();
    queue.pop_front();
    Perm c = conj.at(e);
    for (const auto& s : within_gens) {
      for (const Perm& ss : {s, s.inverse()}) {
        Perm next = ss * e * ss.inverse();
        if (conj.count(next)) continue;
        Perm nc = ss * c;
        if (next == h) return nc;
        if (conj.size() + 1 > bound)
          fail(Errc::subgroup_too_large, "conjugation orbit exceeds the order bound");
        conj.emplace(next, nc);
        queue.push_back(next);
      }
    }
  }
  return std::nullopt;
}

std::vector<Perm> conjugacy_class_of(const std::vector<Perm>& gens, const Perm& x,
                                     std::size_t bound) {
  std::vector<Perm> orbit{x};
  std::set<Perm> seen{x};
  std::deque<Perm> queue{x};
  while (!queue.empty()) {
    Perm e = queue.front();
    queue.pop_front();
    for (const auto& s : gens) {
      for (const Perm& ss : {s, s.inverse()}) {
        Perm next = ss * e * ss.inverse();
        if (seen.insert(next).second) {
          if (orbit.size() + 1 > bound)
            fail(Errc::subgroup_too_large, "conjugation orbit exceeds the order bound");
          orbit.push_back(next);
          queue.push_back(next);
        }
      }
    }
  }
  return orbit;
}

FiniteIndexSubgroup::FiniteIndexSubgroup(FiniteQuotient q, std::vector<Perm> q0_gens,
                                         std::size_t closure_bound)
    : quotient_(std::move(q)), q0_gens_(std::move(q0_gens)) {
  image_elements_ = sorted_closure(quotient_.images(), quotient_.degree(), closure_bound);
  for (const auto& g : q0_gens_)
    if (g.degree() != quotient_.degree())
      fail(Errc::invalid_argument, "subgroup generator degree mismatch");
  q0_elements_ = sorted_closure(q0_gens_, quotient_.degree(), closure_bound);
  for (const auto& e : q0_elements_)
    if (!sorted_contains(image_elements_, e))
      fail(Errc::invalid_argument, "subgroup generator outside the image group");
}

bool FiniteIndexSubgroup::contains_image(const Perm& p) const {
  return sorted_contains(q0_elements_, p);
}

bool FiniteIndexSubgroup::member_test(const Word& w) const {
  return contains_image(quotient_.evaluate(w));
}

int FiniteIndexSubgroup::index() const {
  return int(image_elements_.size() / q0_elements_.size());
}

bool FiniteIndexSubgroup::is_normal() const {
  for (const auto& s : quotient_.images()) {
    Perm si = s.inverse();
    for (const auto& e : q0_elements_) {
      if (!sorted_contains(q0_elements_, s * e * si)) return false;
      if (!sorted_contains(q0_elements_, si * e * s)) return false;
    }
  }
  return true;
}

FiniteIndexSubgroup subgroup_kernel(const FiniteQuotient& q, std::size_t closure_bound) {
  return FiniteIndexSubgroup(q, {}, closure_bound);
}

FiniteIndexSubgroup subgroup_whole(const FiniteQuotient& q, std::size_t closure_bound) {
  return FiniteIndexSubgroup(q, q.images(), closure_bound);
}

std::vector<Word> schreier_generators(const FiniteIndexSubgroup& h1) {
  const FiniteQuotient& q = h1.quotient();
  const auto& q0 = h1.q0_elements();
  auto canon = [&](const Perm& m) {
    Perm best = q0.front() * m;
    for (std::size_t i = 1; i < q0.size(); ++i) {
      Perm cand = q0[i] * m;
      if (cand < best) best = cand;
    }
    return best;
  };
  struct Coset {
    Word transversal;
    Perm reached;
  };
  std::map<Perm, int> coset_of;  // canonical key -> index
  std::vector<Coset> cosets;
  Perm id = Perm::identity(q.degree());
  coset_of.emplace(canon(id), 0);
  cosets.push_back({Word(), id});
  for (std::size_t head = 0; head < cosets.size(); ++head) {
    for (std::size_t g = 0; g < q.images().size(); ++g) {
      Perm next = cosets[head].reached * q.images()[g];
      Perm key = canon(next);
      if (!coset_of.count(key)) {
        coset_of.emplace(key, int(cosets.size()));
        cosets.push_back({cosets[head].transversal.appended(make_letter(int(g), 1)), next});
      }
    }
  }
  std::vector<Word> gens;
  std::set<Word> seen;
  for (const auto& coset : cosets) {
    for (std::size_t g = 0; g < q.images().size(); ++g) {
      Perm next = coset.reached * q.images()[g];
      int target = coset_of.at(canon(next));
      Word w = coset.transversal.appended(make_letter(int(g), 1)) *
               cosets[std::size_t(target)].transversal.inverse();
      if (w.empty()) continue;
      if (!h1.member_test(w))
        fail(Errc::invalid_argument, "internal: Schreier word escaped the subgroup");
      if (seen.insert(w).second) gens.push_back(w);
    }
  }
  return gens;
}

FiniteQuotient separate_conjugacy_class(const Presentation& p, const Word& x, const Word& y,
                                        const SeparationBudget& budget) {
  PieceIndex idx(p);
  if (is_trivial(x * y.inverse(), idx))
    fail(Errc::budget_exceeded, "the two elements are equal in the group");
  RelatorSystem sys = relator_system(p);
  auto separates = [&](const FiniteQuotient& q) {
    try {
      return !finite_conjugacy_test(q.images(), q.evaluate(x), q.evaluate(y),
                                    budget.closure_bound)
                  .has_value();
    } catch (const Error& e) {
      if (e.code() == Errc::subgroup_too_large) return false;
      throw;
    }
  };
  std::vector<FiniteQuotient> singles;
  std::optional<FiniteQuotient> found;
  for_each_low_index(sys, budget.max_index, [&](const FiniteQuotient& q) {
    singles.push_back(q);
    if (separates(q)) {
      found = q;
      return false;
    }
    return true;
  }, budget.node_budget);
  if (found) return *found;
  int refinements = 0;
  for (std::size_t j = 1; j < singles.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (refinements++ >= budget.max_pair_refinements)
        fail(Errc::budget_exceeded, "no separating quotient within the search budget");
      FiniteQuotient sum = singles[i].direct_sum(singles[j]);
      if (separates(sum)) return sum;
    }
  }
  fail(Errc::budget_exceeded, "no separating quotient within the search budget");
}

FiniteQuotient separate_torsion_from_subgroup_conjugates(const Presentation& p, const Word& g,
                                                         const std::vector<Word>& f_gens,
                                                         const SeparationBudget& budget) {
  PieceIndex idx(p);
  if (is_trivial(g, idx))
    fail(Errc::immediate_failure, "the identity element lies in every subgroup");
  RelatorSystem sys = relator_system(p);
  bool saw_candidate = false;
  bool all_whole = true;
  std::optional<FiniteQuotient> found;
  for_each_low_index(sys, budget.max_index, [&](const FiniteQuotient& q) {
    saw_candidate = true;
    std::vector<Perm> f_images;
    for (const auto& w : f_gens) f_images.push_back(q.evaluate(w));
    auto f_bar = sorted_closure(f_images, q.degree(), budget.closure_bound);
    auto image = sorted_closure(q.images(), q.degree(), budget.closure_bound);
    if (f_bar.size() == image.size()) return true;  // image of F is everything here
    all_whole = false;
    try {
      auto cls = conjugacy_class_of(q.images(), q.evaluate(g), budget.closure_bound);
      for (const auto& e : cls)
        if (sorted_contains(f_bar, e)) return true;
      found = q;
      return false;
    } catch (const Error& e) {
      if (e.code() == Errc::subgroup_too_large) return true;
      throw;
    }
  }, budget.node_budget);
  if (found) return *found;
  if (saw_candidate && all_whole)
    fail(Errc::immediate_failure, "the subgroup image was the whole image in every quotient");
  fail(Errc::budget_exceeded, "no separating quotient within the search budget");
}

bool verify_cc(const Presentation& pres, const CCWitness& w, std::size_t closure_bound) {
  RelatorSystem sys = relator_system(pres);
  if (w.n.system().hash() != sys.hash()) return false;
  if (w.p.quotient().system().hash() != sys.hash()) return false;
  PieceIndex idx(pres);
  for (const auto& c : w.centralizer_gens) {
    Word comm = c * w.x * c.inverse() * w.x.inverse();
    if (!is_trivial(comm, idx)) return false;
  }
  if (!w.p.is_normal()) return false;

  FiniteIndexSubgroup kernel_n = subgroup_kernel(w.n, closure_bound);
  for (const auto& k : schreier_generators(kernel_n))
    if (!w.p.member_test(k))
      fail(Errc::incompatible_quotients, "kernel of the refining quotient escapes the subgroup");

  auto image = permutation_closure(w.n.images(), closure_bound);
  Perm psi_x = w.n.evaluate(w.x);
  std::vector<Perm> centralizer;
  for (const auto& m : image)
    if (m * psi_x == psi_x * m) centralizer.push_back(m);

  std::vector<Perm> c_images;
  for (const auto& c : w.centralizer_gens) c_images.push_back(w.n.evaluate(c));
  auto c_bar = sorted_closure(c_images, w.n.degree(), closure_bound);
  std::vector<Perm> p_images;
  for (const auto& s : schreier_generators(w.p)) p_images.push_back(w.n.evaluate(s));
  auto p_bar = sorted_closure(p_images, w.n.degree(), closure_bound);

  std::set<Perm> product;
  for (const auto& c : c_bar)
    for (const auto& q : p_bar) product.insert(c * q);
  for (const auto& z : centralizer)
    if (!product.count(z)) return false;
  return true;
}

CCWitness find_cc_quotient(const Presentation& pres, const Word& x,
                           const std::vector<Word>& centralizer_gens,
                           const FiniteIndexSubgroup& p, const SeparationBudget& budget) {
  PieceIndex idx(pres);
  for (const auto& c : centralizer_gens) {
    Word comm = c * x * c.inverse() * x.inverse();
    if (!is_trivial(comm, idx))
      fail(Errc::invalid_argument, "claimed centralizer generator does not commute with x");
  }
  auto attempt = [&](const FiniteQuotient& n) -> std::optional<CCWitness> {
    CCWitness w{x, centralizer_gens, p, n, false};
    try {
      if (verify_cc(pres, w, budget.closure_bound)) {
        w.check_passed = true;
        return w;
      }
    } catch (const Error& e) {
      // A candidate whose image outgrows the closure bound is inconclusive,
      // like a failing containment; the schedule moves on.
      if (e.code() != Errc::subgroup_too_large) throw;
    }
    return std::nullopt;
  };
  if (auto w = attempt(p.quotient())) return *w;
  RelatorSystem sys = relator_system(pres);
  std::optional<CCWitness> found;
  for_each_low_index(sys, budget.max_index, [&](const FiniteQuotient& q) {
    if (auto w = attempt(p.quotient().direct_sum(q))) {
      found = *w;
      return false;
    }
    return true;
  }, budget.node_budget);
  if (found) return *found;
  fail(Errc::budget_exceeded, "no refinement satisfied the centralizer condition");
}

nlohmann::ordered_json quotient_to_json(const FiniteQuotient& q) {
  nlohmann::ordered_json j;
  j["system"] = hex64(q.system_hash());
  j["degree"] = q.degree();
  nlohmann::ordered_json imgs = nlohmann::ordered_json::array();
  for (const auto& p : q.images()) imgs.push_back(p.images());
  j["images"] = imgs;
  return j;
}

namespace {

std::filesystem::path cache_file(const std::string& cache_dir) {
  return std::filesystem::path(cache_dir) / "quotients.jsonl";
}

}  // namespace

std::vector<FiniteQuotient> load_cached_quotients(const RelatorSystem& sys,
                                                  const std::string& cache_dir) {
  std::vector<FiniteQuotient> out;
  std::ifstream in(cache_file(cache_dir));
  if (!in) return out;
  std::string key = hex64(sys.hash());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    if (!j.contains("system") || j["system"] != key) continue;
    try {
      std::vector<Perm> images;
      for (const auto& img : j.at("images")) images.emplace_back(img.get<std::vector<int>>());
      out.emplace_back(sys, std::move(images));
    } catch (const std::exception&) {
      continue;  // malformed or invalid entries are skipped, never trusted
    }
  }
  return out;
}

void append_cached_quotients(const RelatorSystem& sys, const std::vector<FiniteQuotient>& qs,
                             const std::string& cache_dir) {
  for (const auto& q : qs)
    if (q.system_hash() != sys.hash())
      fail(Errc::invalid_argument, "quotient belongs to a different relator system");
  std::filesystem::create_directories(cache_dir);
  std::set<std::string> existing;
  {
    std::ifstream in(cache_file(cache_dir));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) existing.insert(line);
  }
  std::ofstream out(cache_file(cache_dir), std::ios::app);
  if (!out) fail(Errc::invalid_argument, "cache directory is not writable");
  for (const auto& q : qs) {
    std::string line = quotient_to_json(q).dump();
    if (existing.insert(line).second) out << line << '\n';
  }
}

}  // namespace orsep
