#include "shadowkit/group.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <sstream>

#include "shadowkit/errors.hpp"

namespace shadowkit {

namespace {

std::int64_t checked_narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw ResourceError("dyadic arithmetic overflowed 64-bit numerator");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ResourceError("integer overflow in group arithmetic");
  return r;
}

__int128 shift_left(std::int64_t v, std::int64_t by) {
  if (v == 0) return 0;
  if (by >= 63) throw ResourceError("dyadic arithmetic overflowed 64-bit numerator");
  return static_cast<__int128>(v) * (static_cast<__int128>(1) << by);
}

}  // namespace

std::size_t NormalFormHash::operator()(const NormalForm& nf) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (std::int64_t x : nf.v) {
    h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------- Dyadic

Dyadic Dyadic::make(std::int64_t num, std::int64_t exp) {
  if (num == 0) return Dyadic{0, 0};
  auto tz = std::countr_zero(static_cast<std::uint64_t>(num));
  return Dyadic{num >> tz, checked_add(exp, tz)};
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  if (num == 0) return o;
  if (o.num == 0) return *this;
  std::int64_t e = std::min(exp, o.exp);
  __int128 a = shift_left(num, exp - e);
  __int128 b = shift_left(o.num, o.exp - e);
  __int128 sum = a + b;
  if (sum == 0) return Dyadic{0, 0};
  // Normalize in 128 bits before narrowing.
  while ((sum & 1) == 0) {
    sum /= 2;
    e = checked_add(e, 1);
  }
  return make(checked_narrow(sum), e);
}

double Dyadic::to_double() const {
  return std::ldexp(static_cast<double>(num), static_cast<int>(exp));
}

std::string Dyadic::str() const {
  if (num == 0) return "0";
  if (exp >= 0) {
    if (exp < 62) {
      __int128 v = shift_left(num, exp);
      if (v <= std::numeric_limits<std::int64_t>::max() &&
          v >= std::numeric_limits<std::int64_t>::min()) {
        return std::to_string(static_cast<std::int64_t>(v));
      }
    }
    return std::to_string(num) + "*2^" + std::to_string(exp);
  }
  if (exp > -63) {
    return std::to_string(num) + "/" +
           std::to_string(static_cast<std::uint64_t>(1) << (-exp));
  }
  return std::to_string(num) + "*2^" + std::to_string(exp);
}

// ---------------------------------------------------------------- GroupFamily

GroupFamily GroupFamily::free_abelian(int rank) {
  if (rank < 1) throw InputError("free abelian rank must be >= 1");
  return GroupFamily(FamilyKind::FreeAbelian, rank);
}

GroupFamily GroupFamily::free(int rank) {
  if (rank < 1) throw InputError("free group rank must be >= 1");
  return GroupFamily(FamilyKind::Free, rank);
}

GroupFamily GroupFamily::solvable_bs() { return GroupFamily(FamilyKind::SolvableBS, 2); }

std::string GroupFamily::name() const {
  switch (kind_) {
    case FamilyKind::FreeAbelian: return "free-abelian(" + std::to_string(rank_) + ")";
    case FamilyKind::Free: return "free(" + std::to_string(rank_) + ")";
    case FamilyKind::SolvableBS: return "solvable-bs";
  }
  return "?";
}

NormalForm GroupFamily::identity() const {
  switch (kind_) {
    case FamilyKind::FreeAbelian: return NormalForm{std::vector<std::int64_t>(rank_, 0)};
    case FamilyKind::Free: return NormalForm{};
    case FamilyKind::SolvableBS: return NormalForm{{0, 0, 0}};
  }
  return NormalForm{};
}

NormalForm GroupFamily::exponents(std::vector<std::int64_t> n) const {
  if (kind_ != FamilyKind::FreeAbelian || static_cast<int>(n.size()) != rank_) {
    throw InputError("exponent vector does not match " + name());
  }
  return NormalForm{std::move(n)};
}

NormalForm GroupFamily::letters(std::vector<std::int64_t> word) const {
  if (kind_ != FamilyKind::Free) throw InputError("letters() requires a free group");
  std::vector<std::int64_t> out;
  for (std::int64_t l : word) {
    if (l == 0 || std::abs(l) > rank_) throw InputError("letter out of range for " + name());
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return NormalForm{std::move(out)};
}

NormalForm GroupFamily::affine(std::int64_t k, Dyadic t) const {
  if (kind_ != FamilyKind::SolvableBS) throw InputError("affine() requires the solvable BS group");
  t = Dyadic::make(t.num, t.exp);
  return NormalForm{{k, t.num, t.exp}};
}

std::pair<std::int64_t, Dyadic> GroupFamily::affine_pair(const NormalForm& a) const {
  if (kind_ != FamilyKind::SolvableBS) throw InputError("affine_pair() requires the solvable BS group");
  return {a.v[0], Dyadic{a.v[1], a.v[2]}};
}

NormalForm GroupFamily::multiply(const NormalForm& a, const NormalForm& b) const {
  switch (kind_) {
    case FamilyKind::FreeAbelian: {
      NormalForm r = a;
      for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] = checked_add(r.v[i], b.v[i]);
      return r;
    }
    case FamilyKind::Free: {
      std::vector<std::int64_t> out = a.v;
      for (std::int64_t l : b.v) {
        if (!out.empty() && out.back() == -l) {
          out.pop_back();
        } else {
          out.push_back(l);
        }
      }
      return NormalForm{std::move(out)};
    }
    case FamilyKind::SolvableBS: {
      // (x -> 2^k1 x + t1) o (x -> 2^k2 x + t2) = x -> 2^(k1+k2) x + t1 + 2^k1 t2
      auto [k1, t1] = affine_pair(a);
      auto [k2, t2] = affine_pair(b);
      Dyadic t = t1 + t2.shifted(k1);
      return NormalForm{{checked_add(k1, k2), t.num, t.exp}};
    }
  }
  return NormalForm{};
}

NormalForm GroupFamily::inverse(const NormalForm& a) const {
  switch (kind_) {
    case FamilyKind::FreeAbelian: {
      NormalForm r = a;
      for (auto& x : r.v) x = -x;
      return r;
    }
    case FamilyKind::Free: {
      NormalForm r;
      r.v.reserve(a.v.size());
      for (auto it = a.v.rbegin(); it != a.v.rend(); ++it) r.v.push_back(-*it);
      return r;
    }
    case FamilyKind::SolvableBS: {
      auto [k, t] = affine_pair(a);
      Dyadic ti = (-t).shifted(-k);
      return NormalForm{{-k, ti.num, ti.exp}};
    }
  }
  return NormalForm{};
}

std::string GroupFamily::format(const NormalForm& a) const {
  std::ostringstream os;
  switch (kind_) {
    case FamilyKind::FreeAbelian: {
      os << '(';
      for (std::size_t i = 0; i < a.v.size(); ++i) os << (i ? "," : "") << a.v[i];
      os << ')';
      break;
    }
    case FamilyKind::Free: {
      if (a.v.empty()) return "e";
      for (std::size_t i = 0; i < a.v.size(); ++i) {
        if (i) os << '.';
        os << static_cast<char>('a' + std::abs(a.v[i]) - 1);
        if (a.v[i] < 0) os << "^-1";
      }
      break;
    }
    case FamilyKind::SolvableBS: {
      auto [k, t] = affine_pair(a);
      os << '(' << k << ',' << t.str() << ')';
      break;
    }
  }
  return os.str();
}

std::vector<std::pair<std::string, NormalForm>> GroupFamily::base_generators() const {
  std::vector<std::pair<std::string, NormalForm>> out;
  switch (kind_) {
    case FamilyKind::FreeAbelian:
      for (int i = 0; i < rank_; ++i) {
        std::vector<std::int64_t> e(rank_, 0);
        e[i] = 1;
        out.emplace_back("e" + std::to_string(i + 1), NormalForm{std::move(e)});
      }
      break;
    case FamilyKind::Free:
      for (int i = 0; i < rank_; ++i) {
        out.emplace_back(std::string(1, static_cast<char>('a' + i)), NormalForm{{i + 1}});
      }
      break;
    case FamilyKind::SolvableBS:
      out.emplace_back("a", affine(0, Dyadic{1, 0}));
      out.emplace_back("b", affine(1, Dyadic{0, 0}));
      break;
  }
  return out;
}

// ---------------------------------------------------------------- GeneratingSet

namespace {

// Breadth-first search by right multiplication.  Calls `visit(nf, parent,
// generator)` for every newly discovered element; stops when visit returns
// true.  Returns false if the budget ran out first.
template <typename Visit>
bool bfs(const GeneratingSet& s, std::size_t budget, Visit&& visit) {
  const GroupFamily& fam = s.family();
  std::unordered_map<NormalForm, std::size_t, NormalFormHash> seen;
  std::vector<NormalForm> nodes;
  nodes.push_back(fam.identity());
  seen.emplace(nodes.back(), 0);
  if (visit(nodes.back(), CayleyBall::npos, CayleyBall::npos, 0)) return true;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    for (std::size_t g = 0; g < s.size(); ++g) {
      NormalForm next = fam.multiply(nodes[head], s[g].element);
      if (seen.count(next)) continue;
      if (nodes.size() >= budget) return false;
      std::size_t id = nodes.size();
      seen.emplace(next, id);
      nodes.push_back(next);
      if (visit(nodes.back(), head, g, id)) return true;
    }
  }
  return true;
}

}  // namespace

GeneratingSet GeneratingSet::standard(const GroupFamily& family,
                                      std::vector<std::string> names) {
  auto base = family.base_generators();
  if (!names.empty()) {
    if (names.size() != base.size()) {
      throw InputError("expected " + std::to_string(base.size()) + " generator names");
    }
    for (std::size_t i = 0; i < base.size(); ++i) base[i].first = names[i];
  }
  std::vector<Generator> gens;
  const std::size_t k = base.size();
  for (std::size_t i = 0; i < k; ++i) gens.push_back({base[i].first, base[i].second, i + k});
  for (std::size_t i = 0; i < k; ++i) {
    gens.push_back({base[i].first + "^-1", family.inverse(base[i].second), i});
  }
  return GeneratingSet(family, std::move(gens));
}

GeneratingSet GeneratingSet::from_elements(
    const GroupFamily& family,
    std::vector<std::pair<std::string, NormalForm>> elements, std::size_t budget) {
  if (elements.empty()) throw InputError("generating set must be nonempty");
  std::vector<Generator> gens;
  auto find = [&](const NormalForm& nf) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < gens.size(); ++i) {
      if (gens[i].element == nf) return i;
    }
    return std::nullopt;
  };
  for (auto& [name, nf] : elements) {
    if (family.is_identity(nf)) throw InputError("generator '" + name + "' is the identity");
    if (find(nf)) throw InputError("generator '" + name + "' duplicates another generator");
    for (const auto& g : gens) {
      if (g.name == name) throw InputError("duplicate generator name '" + name + "'");
    }
    gens.push_back({name, nf, CayleyBall::npos});
  }
  const std::size_t listed = gens.size();
  for (std::size_t i = 0; i < listed; ++i) {
    if (gens[i].inverse != CayleyBall::npos) continue;
    NormalForm inv = family.inverse(gens[i].element);
    if (auto j = find(inv)) {
      gens[i].inverse = *j;
      gens[*j].inverse = i;
    } else {
      gens.push_back({gens[i].name + "^-1", inv, i});
      gens[i].inverse = gens.size() - 1;
    }
  }
  GeneratingSet result(family, std::move(gens));

  // Generation check: every base generator of the family must be reachable.
  std::vector<NormalForm> pending;
  for (auto& [name, nf] : family.base_generators()) pending.push_back(nf);
  bool done = bfs(result, budget, [&](const NormalForm& nf, std::size_t, std::size_t, std::size_t) {
    std::erase(pending, nf);
    return pending.empty();
  });
  if (!done || !pending.empty()) {
    throw InputError("listed elements do not generate " + family.name() +
                     " (checked within a search budget of " + std::to_string(budget) + ")");
  }
  return result;
}

std::optional<std::size_t> GeneratingSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    if (gens_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> GeneratingSet::index_of(const NormalForm& element) const {
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    if (gens_[i].element == element) return i;
  }
  return std::nullopt;
}

bool GeneratingSet::is_standard_free_abelian() const {
  if (family_.kind() != FamilyKind::FreeAbelian) return false;
  if (gens_.size() != static_cast<std::size_t>(2 * family_.rank())) return false;
  for (const auto& g : gens_) {
    std::int64_t nonzero = 0;
    for (std::int64_t x : g.element.v) {
      if (x != 0) {
        if (std::abs(x) != 1) return false;
        ++nonzero;
      }
    }
    if (nonzero != 1) return false;
  }
  return true;
}

std::vector<std::size_t> GeneratingSet::parse_word(std::string_view text) const {
  std::string normalized(text);
  // Accept the middle dot as a separator.
  for (std::size_t pos; (pos = normalized.find("\xC2\xB7")) != std::string::npos;) {
    normalized.replace(pos, 2, " ");
  }
  for (char& c : normalized) {
    if (c == '*' || c == ',') c = ' ';
  }
  std::istringstream is(normalized);
  std::vector<std::size_t> word;
  std::string tok;
  while (is >> tok) {
    if (tok == "e" && !index_of(tok)) continue;
    if (auto i = index_of(tok)) {
      word.push_back(*i);
      continue;
    }
    auto caret = tok.rfind('^');
    if (caret != std::string::npos) {
      std::string base = tok.substr(0, caret);
      std::string_view ex = std::string_view(tok).substr(caret + 1);
      long power = 0;
      auto [ptr, ec] = std::from_chars(ex.data(), ex.data() + ex.size(), power);
      auto bi = index_of(base);
      if (ec == std::errc() && ptr == ex.data() + ex.size() && bi) {
        std::size_t letter = power >= 0 ? *bi : gens_[*bi].inverse;
        for (long r = 0; r < std::labs(power); ++r) word.push_back(letter);
        continue;
      }
    }
    throw InputError("unknown generator symbol '" + tok + "'");
  }
  return word;
}

std::string GeneratingSet::format_word(const std::vector<std::size_t>& word) const {
  if (word.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ' ';
    out += gens_.at(word[i]).name;
  }
  return out;
}

bool operator==(const GeneratingSet& a, const GeneratingSet& b) {
  if (!(a.family_ == b.family_) || a.gens_.size() != b.gens_.size()) return false;
  for (std::size_t i = 0; i < a.gens_.size(); ++i) {
    if (!(a.gens_[i].element == b.gens_[i].element)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- elements

std::vector<std::size_t> GroupElement::inverse_word(const GeneratingSet& s) const {
  std::vector<std::size_t> out;
  out.reserve(word.size());
  for (auto it = word.rbegin(); it != word.rend(); ++it) out.push_back(s[*it].inverse);
  return out;
}

GroupElement reduce(const std::vector<std::size_t>& word, const GeneratingSet& s) {
  GroupElement g;
  g.normal_form = s.family().identity();
  for (std::size_t letter : word) {
    if (letter >= s.size()) throw InputError("generator index out of range");
    if (!g.word.empty() && s[g.word.back()].inverse == letter) {
      g.word.pop_back();
    } else {
      g.word.push_back(letter);
    }
  }
  for (std::size_t letter : g.word) {
    g.normal_form = s.family().multiply(g.normal_form, s[letter].element);
  }
  return g;
}

GroupElement reduce(std::string_view word, const GeneratingSet& s) {
  return reduce(s.parse_word(word), s);
}

GroupElement inverse(const GroupElement& g, const GeneratingSet& s) {
  return GroupElement{g.inverse_word(s), s.family().inverse(g.normal_form)};
}

GroupElement multiply(const GroupElement& g, const GroupElement& h, const GeneratingSet& s) {
  std::vector<std::size_t> w = g.word;
  w.insert(w.end(), h.word.begin(), h.word.end());
  return reduce(w, s);
}

std::vector<std::size_t> geodesic_word(const NormalForm& target, const GeneratingSet& t,
                                       std::size_t budget) {
  std::vector<std::pair<std::size_t, std::size_t>> parent;  // (parent id, generator)
  std::optional<std::size_t> hit;
  bool finished = bfs(t, budget, [&](const NormalForm& nf, std::size_t p, std::size_t g, std::size_t id) {
    parent.resize(id + 1);
    parent[id] = {p, g};
    if (nf == target) {
      hit = id;
      return true;
    }
    return false;
  });
  if (!hit) {
    if (!finished) {
      throw ResourceError("word-length search exceeded budget of " + std::to_string(budget) +
                          " nodes");
    }
    throw InputError("element is not reachable from the generating set");
  }
  std::vector<std::size_t> word;
  for (std::size_t id = *hit; parent[id].first != CayleyBall::npos; id = parent[id].first) {
    word.push_back(parent[id].second);
  }
  std::reverse(word.begin(), word.end());
  return word;
}

std::size_t word_length(const NormalForm& g, const GeneratingSet& s, std::size_t budget) {
  if (s.family().is_identity(g)) return 0;
  if (s.is_standard_free_abelian()) {
    std::size_t total = 0;
    for (std::int64_t x : g.v) total += static_cast<std::size_t>(std::llabs(x));
    return total;
  }
  return geodesic_word(g, s, budget).size();
}

// ---------------------------------------------------------------- CayleyBall

std::shared_ptr<const CayleyBall> CayleyBall::build(const GeneratingSet& s, std::size_t radius,
                                                    std::size_t budget) {
  std::shared_ptr<CayleyBall> ball(new CayleyBall(s));
  ball->radius_ = radius;
  const GroupFamily& fam = s.family();

  std::vector<GroupElement> layer{GroupElement{{}, fam.identity()}};
  std::unordered_map<NormalForm, std::size_t, NormalFormHash>& index = ball->index_;
  index.emplace(fam.identity(), 0);
  ball->elements_ = layer;
  ball->lengths_.push_back(0);
  ball->layer_end_.push_back(1);

  for (std::size_t r = 1; r <= radius; ++r) {
    std::vector<GroupElement> next;
    std::unordered_map<NormalForm, bool, NormalFormHash> fresh;
    for (const GroupElement& g : layer) {
      for (std::size_t gen = 0; gen < s.size(); ++gen) {
        NormalForm nf = fam.multiply(g.normal_form, s[gen].element);
        if (index.count(nf) || fresh.count(nf)) continue;
        if (ball->elements_.size() + next.size() >= budget) {
          throw ResourceError("Cayley ball of radius " + std::to_string(radius) +
                              " exceeds budget of " + std::to_string(budget) + " elements");
        }
        fresh.emplace(nf, true);
        GroupElement h{g.word, std::move(nf)};
        h.word.push_back(gen);
        next.push_back(std::move(h));
      }
    }
    std::sort(next.begin(), next.end(), [](const GroupElement& a, const GroupElement& b) {
      return a.normal_form < b.normal_form;
    });
    for (const GroupElement& g : next) {
      index.emplace(g.normal_form, ball->elements_.size());
      ball->elements_.push_back(g);
      ball->lengths_.push_back(r);
    }
    ball->layer_end_.push_back(ball->elements_.size());
    layer = std::move(next);
    if (layer.empty()) {
      // Finite group: remaining layers are empty.
      for (std::size_t rr = r + 1; rr <= radius; ++rr) ball->layer_end_.push_back(ball->elements_.size());
      break;
    }
  }

  const std::size_t n = ball->elements_.size();
  ball->adjacency_.assign(n * s.size(), npos);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t gen = 0; gen < s.size(); ++gen) {
      NormalForm nf = fam.multiply(s[gen].element, ball->elements_[i].normal_form);
      auto it = index.find(nf);
      if (it != index.end()) ball->adjacency_[i * s.size() + gen] = it->second;
    }
  }
  return ball;
}

std::optional<std::size_t> CayleyBall::find(const NormalForm& nf) const {
  auto it = index_.find(nf);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CayleyBall::prefix_size(std::size_t r) const {
  if (r >= layer_end_.size()) return elements_.size();
  return layer_end_[r];
}

}  // namespace shadowkit
