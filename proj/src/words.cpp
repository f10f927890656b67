#include "orsep/words.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <numeric>
#include <sstream>

namespace orsep {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::syntax_error: return "SyntaxError";
    case Errc::torsion_required: return "TorsionRequired";
    case Errc::empty_relator: return "EmptyRelator";
    case Errc::rc_not_zero: return "RCNotZero";
    case Errc::rc_zero: return "RCZero";
    case Errc::search_exhausted: return "SearchExhausted";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::subgroup_too_large: return "SubgroupTooLarge";
    case Errc::alpha_inconsistent: return "AlphaInconsistent";
    case Errc::incompatible_quotients: return "IncompatibleQuotients";
    case Errc::not_in_subgroup: return "NotInSubgroup";
    case Errc::immediate_failure: return "ImmediateFailure";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

bool letter_less(Letter a, Letter b) { return letter_key(a) < letter_key(b); }

bool word_less(std::span<const Letter> a, std::span<const Letter> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](Letter x, Letter y) { return letter_less(x, y); });
}

Word Word::single(Letter l) {
  Word w;
  w.letters_.push_back(l);
  return w;
}

Word Word::from_reduced(std::vector<Letter> letters) {
#ifndef NDEBUG
  for (std::size_t i = 0; i + 1 < letters.size(); ++i) assert(letters[i] != -letters[i + 1]);
#endif
  Word w;
  w.letters_ = std::move(letters);
  return w;
}

Word free_reduce(std::span<const Letter> letters) {
  std::vector<Letter> out;
  out.reserve(letters.size());
  for (Letter l : letters) {
    if (l == 0) fail(Errc::invalid_argument, "zero letter");
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return Word::from_reduced(std::move(out));
}

Word free_reduce(std::initializer_list<Letter> letters) {
  return free_reduce(std::span<const Letter>(letters.begin(), letters.size()));
}

Word Word::inverse() const {
  std::vector<Letter> out;
  out.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(-*it);
  return Word::from_reduced(std::move(out));
}

Word Word::operator*(const Word& rhs) const {
  std::vector<Letter> out = letters_;
  for (Letter l : rhs.letters_) {
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return Word::from_reduced(std::move(out));
}

Word Word::pow(int k) const {
  Word base = k >= 0 ? *this : inverse();
  int m = k >= 0 ? k : -k;
  Word out;
  for (int i = 0; i < m; ++i) out = out * base;
  return out;
}

Word Word::conjugated_by(const Word& u) const { return u * *this * u.inverse(); }

Word Word::appended(Letter l) const {
  Word out = *this;
  if (!out.letters_.empty() && out.letters_.back() == -l)
    out.letters_.pop_back();
  else
    out.letters_.push_back(l);
  return out;
}

Word Word::prepended(Letter l) const {
  if (!letters_.empty() && letters_.front() == -l)
    return Word::from_reduced(std::vector<Letter>(letters_.begin() + 1, letters_.end()));
  std::vector<Letter> out;
  out.reserve(letters_.size() + 1);
  out.push_back(l);
  out.insert(out.end(), letters_.begin(), letters_.end());
  return Word::from_reduced(std::move(out));
}

Word Word::subword(std::size_t begin, std::size_t end) const {
  return Word::from_reduced(std::vector<Letter>(letters_.begin() + long(begin), letters_.begin() + long(end)));
}

bool Word::operator<(const Word& rhs) const {
  if (size() != rhs.size()) return size() < rhs.size();
  return word_less(letters_, rhs.letters_);
}

std::vector<long long> exponent_vector(const Word& w, std::size_t n_gens) {
  std::vector<long long> v(n_gens, 0);
  for (Letter l : w.letters()) v[std::size_t(letter_gen(l))] += letter_sign(l);
  return v;
}

namespace {

bool cyclically_reduced(const Word& w) {
  return w.size() < 2 || w[0] != -w[w.size() - 1];
}

// Index of the least rotation under letter_key order.
std::size_t least_rotation(const std::vector<Letter>& v) {
  std::size_t n = v.size();
  if (n < 2) return 0;
  std::size_t best = 0;
  for (std::size_t cand = 1; cand < n; ++cand) {
    for (std::size_t i = 0; i < n; ++i) {
      int a = letter_key(v[(cand + i) % n]);
      int b = letter_key(v[(best + i) % n]);
      if (a != b) {
        if (a < b) best = cand;
        break;
      }
    }
  }
  return best;
}

std::vector<Letter> rotate(const std::vector<Letter>& v, std::size_t r) {
  std::vector<Letter> out;
  out.reserve(v.size());
  out.insert(out.end(), v.begin() + long(r), v.end());
  out.insert(out.end(), v.begin(), v.begin() + long(r));
  return out;
}

}  // namespace

CyclicWord CyclicWord::from_cyclically_reduced(const Word& w) {
  if (!cyclically_reduced(w)) fail(Errc::invalid_argument, "word is not cyclically reduced");
  CyclicWord c;
  std::size_t r = least_rotation(w.letters());
  c.rep_ = Word::from_reduced(rotate(w.letters(), r));
  return c;
}

std::pair<CyclicWord, Word> cyclic_reduce(const Word& w) {
  std::vector<Letter> v = w.letters();
  std::vector<Letter> conj;
  while (v.size() >= 2 && v.front() == -v.back()) {
    conj.push_back(v.front());
    v.erase(v.begin());
    v.pop_back();
  }
  std::size_t r = least_rotation(v);
  // If c = p q and the canonical rotation is q p, then w = (u p)(q p)(u p)^-1.
  for (std::size_t i = 0; i < r; ++i) conj.push_back(v[i]);
  CyclicWord c = CyclicWord::from_cyclically_reduced(Word::from_reduced(rotate(v, r)));
  return {c, free_reduce(conj)};
}

std::optional<std::pair<CyclicWord, int>> is_proper_power(const CyclicWord& c) {
  std::size_t n = c.size();
  const auto& v = c.representative().letters();
  for (std::size_t d = 1; d <= n / 2; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = 0; i + d < n; ++i) {
      if (v[i] != v[i + d]) {
        periodic = false;
        break;
      }
    }
    if (periodic) {
      Word root = Word::from_reduced(std::vector<Letter>(v.begin(), v.begin() + long(d)));
      return std::make_pair(CyclicWord::from_cyclically_reduced(root), int(n / d));
    }
  }
  return std::nullopt;
}

Presentation::Presentation(std::vector<Generator> generators, CyclicWord relator_root, int exponent)
    : generators_(std::move(generators)), root_(std::move(relator_root)), exponent_(exponent) {
  if (generators_.empty()) fail(Errc::invalid_argument, "presentation needs at least one generator");
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].name.empty()) fail(Errc::invalid_argument, "empty generator name");
    for (std::size_t j = i + 1; j < generators_.size(); ++j)
      if (generators_[i].name == generators_[j].name)
        fail(Errc::invalid_argument, "duplicate generator name " + generators_[i].name);
  }
  if (root_.empty()) fail(Errc::empty_relator, "relator reduces to the empty word");
  if (exponent_ < 2) fail(Errc::torsion_required, "relator is not a proper power");
  if (is_proper_power(root_)) fail(Errc::invalid_argument, "relator root must be primitive");
  occurs_.assign(generators_.size(), false);
  for (Letter l : root_.representative().letters()) {
    int g = letter_gen(l);
    if (g < 0 || std::size_t(g) >= generators_.size())
      fail(Errc::invalid_argument, "relator letter outside alphabet");
    occurs_[std::size_t(g)] = true;
  }
  for (std::size_t i = 0; i < generators_.size(); ++i)
    (occurs_[i] ? core_ : free_).push_back(int(i));
}

int Presentation::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < generators_.size(); ++i)
    if (generators_[i].name == name) return int(i);
  return -1;
}

bool Presentation::single_letter_names() const {
  for (const auto& g : generators_)
    if (g.name.size() != 1 || !std::islower(static_cast<unsigned char>(g.name[0]))) return false;
  return true;
}

std::vector<std::string> generator_names(const Presentation& p) {
  std::vector<std::string> names;
  names.reserve(p.generators().size());
  for (const auto& g : p.generators()) names.push_back(g.name);
  return names;
}

std::string print_word_over(const Word& w, std::span<const std::string> names) {
  if (w.empty()) return "1";
  bool compact = true;
  for (const auto& n : names)
    if (n.size() != 1 || !std::islower(static_cast<unsigned char>(n[0]))) compact = false;
  std::string out;
  if (compact) {
    for (Letter l : w.letters()) {
      char c = names[std::size_t(letter_gen(l))][0];
      out.push_back(l > 0 ? c : char(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out.push_back(' ');
    out += names[std::size_t(letter_gen(w[i]))];
    if (w[i] < 0) out += "^-1";
  }
  return out;
}

std::string Presentation::print_word(const Word& w) const {
  auto names = generator_names(*this);
  return print_word_over(w, names);
}

std::string Presentation::print() const {
  std::ostringstream os;
  os << "< ";
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (i) os << ", ";
    os << generators_[i].name;
  }
  os << " | ( ";
  auto names = generator_names(*this);
  const Word& rep = root_.representative();
  for (std::size_t i = 0; i < rep.size(); ++i) {
    if (i) os << ' ';
    os << names[std::size_t(letter_gen(rep[i]))];
    if (rep[i] < 0) os << "^-1";
  }
  os << " )^" << exponent_ << " >";
  return os.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[std::size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::uint64_t Presentation::hash() const { return fnv1a(print()); }
std::string Presentation::hash_hex() const { return hex64(hash()); }

namespace {

struct WordParser {
  std::string_view text;
  std::size_t pos = 0;
  std::span<const std::string> names;
  bool compact;  // single lowercase letters, case encodes sign

  explicit WordParser(std::string_view t, std::span<const std::string> n) : text(t), names(n) {
    compact = true;
    for (const auto& name : names)
      if (name.size() != 1 || !std::islower(static_cast<unsigned char>(name[0]))) compact = false;
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  long parse_int() {
    skip_ws();
    bool neg = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
      neg = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      fail(Errc::syntax_error, "expected integer exponent");
    long v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      v = v * 10 + (text[pos] - '0');
      if (v > 1000000) fail(Errc::syntax_error, "exponent too large");
      ++pos;
    }
    return neg ? -v : v;
  }

  int find_name(const std::string& n) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return int(i);
    return -1;
  }

  // item := ('1' | letter | '(' word ')') ('^' int)?
  // Appends the expansion onto raw; total length guarded.
  void parse_item(std::vector<Letter>& raw) {
    skip_ws();
    std::vector<Letter> unit;
    if (peek() == '1') {
      ++pos;  // identity
    } else if (peek() == '(') {
      ++pos;
      parse_word_into(unit, true);
      if (peek() != ')') fail(Errc::syntax_error, "expected ')'");
      ++pos;
    } else {
      Letter l = parse_letter();
      unit.push_back(l);
    }
    long exp = 1;
    if (peek() == '^') {
      ++pos;
      exp = parse_int();
    }
    if (exp < 0) {
      std::reverse(unit.begin(), unit.end());
      for (auto& l : unit) l = -l;
      exp = -exp;
    }
    if ((raw.size() + unit.size() * std::size_t(exp)) > 1000000)
      fail(Errc::syntax_error, "word expansion too large");
    for (long i = 0; i < exp; ++i) raw.insert(raw.end(), unit.begin(), unit.end());
  }

  Letter parse_letter() {
    skip_ws();
    if (pos >= text.size()) fail(Errc::syntax_error, "unexpected end of word");
    if (compact) {
      char c = text[pos];
      if (!std::isalpha(static_cast<unsigned char>(c))) fail(Errc::syntax_error, std::string("unexpected character '") + c + "'");
      ++pos;
      char low = char(std::tolower(static_cast<unsigned char>(c)));
      std::string n(1, low);
      int g = find_name(n);
      if (g < 0) fail(Errc::syntax_error, "unknown generator '" + n + "'");
      return make_letter(g, std::islower(static_cast<unsigned char>(c)) ? 1 : -1);
    }
    // Token mode: name chars are [A-Za-z0-9_]; '^-1' is handled by parse_item.
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
        ++pos;
      else
        break;
    }
    if (pos == start) fail(Errc::syntax_error, "expected generator token");
    std::string n(text.substr(start, pos - start));
    int g = find_name(n);
    if (g >= 0) return make_letter(g, 1);
    fail(Errc::syntax_error, "unknown generator '" + n + "'");
  }

  void parse_word_into(std::vector<Letter>& raw, bool inside_group) {
    while (true) {
      skip_ws();
      if (pos >= text.size()) break;
      char c = text[pos];
      if (c == ')' ) {
        if (!inside_group) fail(Errc::syntax_error, "unmatched ')'");
        break;
      }
      if (c == '>' || c == '|') break;
      parse_item(raw);
    }
  }
};

}  // namespace

Word parse_word_over(const std::string& text, std::span<const std::string> names) {
  WordParser wp(text, names);
  std::vector<Letter> raw;
  wp.parse_word_into(raw, false);
  if (!wp.eof()) fail(Errc::syntax_error, "trailing characters in word");
  return free_reduce(raw);
}

Word parse_word(const std::string& text, const Presentation& p) {
  auto names = generator_names(p);
  return parse_word_over(text, names);
}

Presentation parse_presentation(const std::string& text) {
  std::string_view t(text);
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  };
  skip();
  if (pos >= t.size() || t[pos] != '<') fail(Errc::syntax_error, "expected '<'");
  ++pos;
  std::vector<Generator> gens;
  while (true) {
    skip();
    if (pos >= t.size()) fail(Errc::syntax_error, "unterminated generator list");
    if (t[pos] == '|') break;
    if (!gens.empty()) {
      if (t[pos] != ',') fail(Errc::syntax_error, "expected ',' or '|'");
      ++pos;
      skip();
    }
    if (pos >= t.size() || !std::islower(static_cast<unsigned char>(t[pos])))
      fail(Errc::syntax_error, "expected lowercase generator name");
    std::size_t start = pos;
    while (pos < t.size() && (std::isalnum(static_cast<unsigned char>(t[pos])) || t[pos] == '_'))
      ++pos;
    gens.push_back(Generator{std::string(t.substr(start, pos - start))});
  }
  ++pos;  // '|'
  std::size_t rel_start = pos;
  std::size_t close = t.rfind('>');
  if (close == std::string::npos || close < rel_start) fail(Errc::syntax_error, "expected '>'");
  std::string rel_text(t.substr(rel_start, close - rel_start));
  for (std::size_t i = close + 1; i < t.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(t[i]))) fail(Errc::syntax_error, "trailing characters after '>'");

  std::vector<std::string> names;
  names.reserve(gens.size());
  for (auto& g : gens) names.push_back(g.name);
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) fail(Errc::syntax_error, "duplicate generator " + names[i]);

  Word raw = parse_word_over(rel_text, names);
  if (raw.empty()) fail(Errc::empty_relator, "relator reduces to the empty word");
  auto [cyc, conj] = cyclic_reduce(raw);
  (void)conj;
  if (cyc.empty()) fail(Errc::empty_relator, "relator is conjugate to the empty word");
  CyclicWord root = cyc;
  int exponent = 1;
  if (auto power = is_proper_power(cyc)) {
    root = power->first;
    exponent = power->second;
  }
  if (exponent < 2) fail(Errc::torsion_required, "relator must be a proper power");
  return Presentation(std::move(gens), root, exponent);
}

Presentation restricted_to_core(const Presentation& p) {
  if (p.free_factors().empty()) return p;
  std::vector<int> remap(p.generators().size(), -1);
  std::vector<Generator> gens;
  for (int g : p.core_generators()) {
    remap[std::size_t(g)] = int(gens.size());
    gens.push_back(p.generators()[std::size_t(g)]);
  }
  std::vector<Letter> letters;
  for (Letter l : p.relator_root().representative().letters())
    letters.push_back(make_letter(remap[std::size_t(letter_gen(l))], letter_sign(l)));
  return Presentation(std::move(gens), CyclicWord::from_cyclically_reduced(Word::from_reduced(letters)),
                      p.exponent());
}

}  // namespace orsep
