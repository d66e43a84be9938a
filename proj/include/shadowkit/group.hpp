#pragma once

// Finitely generated groups given by words over finite symmetric generating
// sets.  Three families are supported, each with a solvable word problem:
//
//   * FreeAbelian(k)  normal form is the exponent vector in Z^k;
//   * Free(k)         normal form is the freely reduced word;
//   * SolvableBS      <a, b | ba = a^2 b>, represented faithfully by the affine
//                     maps x -> 2^k x + t with t an exact dyadic rational
//                     (a = x + 1, b = 2x).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shadowkit {

enum class FamilyKind { FreeAbelian, Free, SolvableBS };

// Canonical, family-specific encoding of a group element.
//   FreeAbelian: exponents (n_1, ..., n_k)
//   Free:        letters +-(i+1) of the reduced word
//   SolvableBS:  (k, numerator, binary exponent) of x -> 2^k x + num * 2^exp
struct NormalForm {
  std::vector<std::int64_t> v;

  friend bool operator==(const NormalForm&, const NormalForm&) = default;
  friend auto operator<=>(const NormalForm&, const NormalForm&) = default;
};

struct NormalFormHash {
  std::size_t operator()(const NormalForm& nf) const noexcept;
};

// Exact dyadic rational num * 2^exp, normalized so num is odd (or zero with
// exp = 0).  Arithmetic throws ResourceError on int64 overflow.
struct Dyadic {
  std::int64_t num = 0;
  std::int64_t exp = 0;

  static Dyadic make(std::int64_t num, std::int64_t exp);
  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-() const { return make(-num, exp); }
  Dyadic shifted(std::int64_t k) const { return make(num, exp + k); }  // * 2^k
  double to_double() const;
  std::string str() const;

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

class GroupFamily {
 public:
  static GroupFamily free_abelian(int rank);
  static GroupFamily free(int rank);
  static GroupFamily solvable_bs();

  FamilyKind kind() const { return kind_; }
  int rank() const { return rank_; }
  std::string name() const;

  NormalForm identity() const;
  NormalForm multiply(const NormalForm& a, const NormalForm& b) const;
  NormalForm inverse(const NormalForm& a) const;
  bool is_identity(const NormalForm& a) const { return a == identity(); }
  std::string format(const NormalForm& a) const;

  // Helpers for building normal forms directly.
  NormalForm exponents(std::vector<std::int64_t> n) const;   // FreeAbelian
  NormalForm letters(std::vector<std::int64_t> word) const;  // Free, reduces
  NormalForm affine(std::int64_t k, Dyadic t) const;         // SolvableBS
  std::pair<std::int64_t, Dyadic> affine_pair(const NormalForm& a) const;

  // Base generators (without inverses): e1..ek, letters a, b, c, ..., or a, b.
  std::vector<std::pair<std::string, NormalForm>> base_generators() const;

  friend bool operator==(const GroupFamily&, const GroupFamily&) = default;

 private:
  GroupFamily(FamilyKind kind, int rank) : kind_(kind), rank_(rank) {}
  FamilyKind kind_;
  int rank_;
};

struct Generator {
  std::string name;
  NormalForm element;
  std::size_t inverse = 0;  // index of the inverse generator in the same set
};

// Default cap on nodes visited by breadth-first searches and ball builds.
inline constexpr std::size_t kDefaultSearchBudget = 4'000'000;

// Finite symmetric generating set.  Generators are ordered; every generator's
// inverse is also a member.
class GeneratingSet {
 public:
  // Base generators of the family followed by their inverses.  Optional
  // `names` rename the base generators (inverses get a "^-1" suffix).
  static GeneratingSet standard(const GroupFamily& family,
                                std::vector<std::string> names = {});

  // Builds a symmetric set from the listed elements, appending missing
  // inverses.  Throws InputError if an element is the identity, duplicates
  // another, or if the set does not generate the family within `budget`.
  static GeneratingSet from_elements(
      const GroupFamily& family,
      std::vector<std::pair<std::string, NormalForm>> elements,
      std::size_t budget = 200'000);

  const GroupFamily& family() const { return family_; }
  std::size_t size() const { return gens_.size(); }
  const Generator& operator[](std::size_t i) const { return gens_[i]; }
  const std::vector<Generator>& generators() const { return gens_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<std::size_t> index_of(const NormalForm& element) const;

  // True when this is the standard set of a FreeAbelian family (closed-form
  // word length applies).
  bool is_standard_free_abelian() const;

  // Parses "a b^-1 a", "a*b", "b^3", "e" into generator indices.
  std::vector<std::size_t> parse_word(std::string_view text) const;
  std::string format_word(const std::vector<std::size_t>& word) const;

  friend bool operator==(const GeneratingSet& a, const GeneratingSet& b);

 private:
  GeneratingSet(GroupFamily family, std::vector<Generator> gens)
      : family_(family), gens_(std::move(gens)) {}
  GroupFamily family_;
  std::vector<Generator> gens_;
};

struct GroupElement {
  std::vector<std::size_t> word;  // generator indices, product left to right
  NormalForm normal_form;

  std::vector<std::size_t> inverse_word(const GeneratingSet& s) const;
};

// Freely reduces `word` and computes its normal form.
GroupElement reduce(const std::vector<std::size_t>& word, const GeneratingSet& s);
GroupElement reduce(std::string_view word, const GeneratingSet& s);

GroupElement inverse(const GroupElement& g, const GeneratingSet& s);
GroupElement multiply(const GroupElement& g, const GroupElement& h,
                      const GeneratingSet& s);

// Exact Cayley-graph distance from the identity.
std::size_t word_length(const NormalForm& g, const GeneratingSet& s,
                        std::size_t budget = kDefaultSearchBudget);

// Geodesic word over `t` for the element `target`.
std::vector<std::size_t> geodesic_word(const NormalForm& target,
                                       const GeneratingSet& t,
                                       std::size_t budget = kDefaultSearchBudget);

// Rewrites an element (typically a generator of another set) as a geodesic
// word over `t`.
inline std::vector<std::size_t> rewrite_generator(
    const NormalForm& s, const GeneratingSet& t,
    std::size_t budget = kDefaultSearchBudget) {
  return geodesic_word(s, t, budget);
}

// All elements of word length <= radius with explicit left-multiplication
// adjacency g -> s g.  Elements are ordered by word length, then by normal
// form; index 0 is the identity.
class CayleyBall {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  static std::shared_ptr<const CayleyBall> build(
      const GeneratingSet& s, std::size_t radius,
      std::size_t budget = kDefaultSearchBudget);

  const GeneratingSet& generators() const { return genset_; }
  std::size_t radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }
  const GroupElement& element(std::size_t i) const { return elements_[i]; }
  const std::vector<GroupElement>& elements() const { return elements_; }
  std::size_t length(std::size_t i) const { return lengths_[i]; }

  // Index of s * element(i), or npos if it lies outside the ball.
  std::size_t neighbor(std::size_t i, std::size_t s) const {
    return adjacency_[i * genset_.size() + s];
  }
  std::optional<std::size_t> find(const NormalForm& nf) const;

  // Number of elements with word length <= r (r <= radius).
  std::size_t prefix_size(std::size_t r) const;

 private:
  CayleyBall(GeneratingSet s) : genset_(std::move(s)) {}
  GeneratingSet genset_;
  std::size_t radius_ = 0;
  std::vector<GroupElement> elements_;
  std::vector<std::size_t> lengths_;
  std::vector<std::size_t> adjacency_;
  std::vector<std::size_t> layer_end_;
  std::unordered_map<NormalForm, std::size_t, NormalFormHash> index_;
};

}  // namespace shadowkit
