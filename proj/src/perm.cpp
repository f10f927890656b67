#include "orsep/perm.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace orsep {

Perm::Perm(std::vector<int> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size(), false);
  for (int v : images_) {
    if (v < 0 || v >= int(images_.size()) || seen[std::size_t(v)])
      fail(Errc::invalid_argument, "image vector is not a permutation");
    seen[std::size_t(v)] = true;
  }
}

Perm Perm::identity(int degree) {
  std::vector<int> img(static_cast<std::size_t>(degree), 0);
  std::iota(img.begin(), img.end(), 0);
  return Perm(std::move(img));
}

Perm Perm::operator*(const Perm& other) const {
  if (degree() != other.degree()) fail(Errc::invalid_argument, "degree mismatch in composition");
  std::vector<int> img(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i)
    img[i] = other.images_[std::size_t(images_[i])];
  Perm p;
  p.images_ = std::move(img);
  return p;
}

Perm Perm::inverse() const {
  std::vector<int> img(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) img[std::size_t(images_[i])] = int(i);
  Perm p;
  p.images_ = std::move(img);
  return p;
}

Perm Perm::pow(long long e) const {
  Perm base = e >= 0 ? *this : inverse();
  long long k = e >= 0 ? e : -e;
  Perm acc = identity(degree());
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return acc;
}

bool Perm::is_identity() const {
  for (std::size_t i = 0; i < images_.size(); ++i)
    if (images_[i] != int(i)) return false;
  return true;
}

std::vector<int> Perm::cycle_type() const {
  std::vector<bool> seen(images_.size(), false);
  std::vector<int> lens;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = int(i); !seen[std::size_t(j)]; j = images_[std::size_t(j)]) {
      seen[std::size_t(j)] = true;
      ++len;
    }
    lens.push_back(len);
  }
  std::sort(lens.rbegin(), lens.rend());
  return lens;
}

std::string Perm::cycles_string() const {
  std::vector<bool> seen(images_.size(), false);
  std::ostringstream out;
  bool any = false;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (seen[i] || images_[i] == int(i)) {
      seen[i] = true;
      continue;
    }
    out << '(';
    bool first = true;
    for (int j = int(i); !seen[std::size_t(j)]; j = images_[std::size_t(j)]) {
      seen[std::size_t(j)] = true;
      if (!first) out << ' ';
      out << j;
      first = false;
    }
    out << ')';
    any = true;
  }
  if (!any) out << "()";
  return out.str();
}

std::size_t PermHash::operator()(const Perm& p) const {
  std::size_t h = 1469598103934665603ull;
  for (int v : p.images()) {
    h ^= std::size_t(v) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<Perm> permutation_closure(const std::vector<Perm>& gens, std::size_t bound) {
  if (gens.empty()) fail(Errc::invalid_argument, "closure needs at least one generator");
  int deg = gens.front().degree();
  for (const auto& g : gens)
    if (g.degree() != deg) fail(Errc::invalid_argument, "mixed degrees in closure");
  std::vector<Perm> elements;
  std::unordered_set<Perm, PermHash> seen;
  std::deque<Perm> queue;
  Perm id = Perm::identity(deg);
  elements.push_back(id);
  seen.insert(id);
  queue.push_back(id);
  while (!queue.empty()) {
    Perm cur = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      Perm next = cur * g;
      if (seen.insert(next).second) {
        if (elements.size() + 1 > bound)
          fail(Errc::subgroup_too_large, "closure exceeds element bound");
        elements.push_back(next);
        queue.push_back(next);
      }
    }
  }
  return elements;
}

}  // namespace orsep
