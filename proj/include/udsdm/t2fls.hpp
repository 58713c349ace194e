#pragma once

// Interval type-2 fuzzy inference over three quanta: triangular upper
// membership functions with a scaled lower function, minimum t-norm,
// Karnik-Mendel center-of-sets type reduction and midpoint defuzzification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace udsdm {

enum class Term : std::size_t { low = 0, medium = 1, high = 2 };
inline constexpr std::size_t kTermCount = 3;

inline const char* to_string(Term t) {
  switch (t) {
    case Term::low: return "low";
    case Term::medium: return "medium";
    case Term::high: return "high";
  }
  return "?";
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double midpoint() const { return 0.5 * (lower + upper); }
  bool operator==(const Interval&) const = default;
};

struct TriangularMf {
  double left = 0.0;
  double apex = 0.0;
  double right = 0.0;

  void validate() const {
    if (!(left <= apex && apex <= right)) {
      throw std::invalid_argument("triangular MF needs left <= apex <= right");
    }
  }

  double operator()(double x) const {
    if (x == apex) return 1.0;
    if (x < left || x > right) return 0.0;
    if (x < apex) return (x - left) / (apex - left);
    return (right - x) / (right - apex);
  }

  bool operator==(const TriangularMf&) const = default;
};

struct It2Set {
  Term term = Term::low;
  TriangularMf upper_mf;
  double lower_scale = 1.0;

  void validate() const {
    upper_mf.validate();
    if (!(lower_scale > 0.0 && lower_scale <= 1.0)) {
      throw std::invalid_argument("IT2 set lower_scale must lie in (0,1]");
    }
  }

  bool operator==(const It2Set&) const = default;
};

// [g_L(x), g_U(x)] on the unit universe.
inline Interval membership(const It2Set& set, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("membership: x must lie in [0,1]");
  const double up = set.upper_mf(x);
  return {set.lower_scale * up, up};
}

using TermSets = std::array<It2Set, kTermCount>;

inline TermSets default_term_sets(double lower_scale = 0.8) {
  return {It2Set{Term::low, {0.0, 0.0, 0.5}, lower_scale},
          It2Set{Term::medium, {0.1, 0.5, 0.9}, lower_scale},
          It2Set{Term::high, {0.5, 1.0, 1.0}, lower_scale}};
}

struct FuzzyRule {
  std::array<Term, 3> antecedents{};
  Term consequent = Term::low;

  bool operator==(const FuzzyRule&) const = default;
};

struct RuleBase {
  std::vector<FuzzyRule> rules;
  std::array<Interval, kTermCount> consequent_centroids{};

  // Every antecedent combination exactly once, consequent = round(mean index).
  static RuleBase monotone_default() {
    RuleBase rb;
    for (std::size_t a = 0; a < kTermCount; ++a) {
      for (std::size_t b = 0; b < kTermCount; ++b) {
        for (std::size_t c = 0; c < kTermCount; ++c) {
          const auto mean_index = static_cast<double>(a + b + c) / 3.0;
          const auto out = static_cast<std::size_t>(std::lround(mean_index));
          rb.rules.push_back({{Term(a), Term(b), Term(c)}, Term(out)});
        }
      }
    }
    rb.consequent_centroids = {Interval{0.15, 0.25}, Interval{0.45, 0.55}, Interval{0.75, 0.85}};
    return rb;
  }

  void validate() const {
    if (rules.size() != 27) {
      throw std::invalid_argument("rule base needs 27 rules, has " + std::to_string(rules.size()));
    }
    std::array<bool, 27> seen{};
    for (const auto& r : rules) {
      const auto key = static_cast<std::size_t>(r.antecedents[0]) * 9 +
                       static_cast<std::size_t>(r.antecedents[1]) * 3 +
                       static_cast<std::size_t>(r.antecedents[2]);
      if (key >= 27 || static_cast<std::size_t>(r.consequent) >= kTermCount) {
        throw std::invalid_argument("rule base: term label out of range");
      }
      if (seen[key]) throw std::invalid_argument("rule base: duplicate antecedent combination");
      seen[key] = true;
    }
    for (const auto& c : consequent_centroids) {
      if (!(c.lower <= c.upper) || c.lower < 0.0 || c.upper > 1.0) {
        throw std::invalid_argument("rule base: consequent centroid must satisfy 0 <= c_L <= c_R <= 1");
      }
    }
  }

  bool operator==(const RuleBase&) const = default;
};

// Minimum t-norm over the antecedent memberships, applied to both bounds.
inline Interval fire_rule(const std::array<Interval, 3>& inputs) {
  Interval out{1.0, 1.0};
  for (const auto& in : inputs) {
    out.lower = std::min(out.lower, in.lower);
    out.upper = std::min(out.upper, in.upper);
  }
  return out;
}

class NoRuleFired : public std::runtime_error {
 public:
  NoRuleFired() : std::runtime_error("no rule fired") {}
};

namespace detail {

// One side of the Karnik-Mendel procedure. For the left endpoint, rules with
// centroids at or below the current estimate take their upper firing and the
// rest their lower; the right endpoint mirrors this. Each pass moves the
// estimate monotonically, so iteration stops at the first pass that does not
// improve it.
inline double km_endpoint(std::vector<std::pair<double, Interval>> items, bool left) {
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n = items.size();
  double num = 0.0, den = 0.0;
  for (const auto& [c, f] : items) {
    const double w = f.midpoint();
    num += w * c;
    den += w;
  }
  double y = num / den;
  for (std::size_t iter = 0; iter <= n + 1; ++iter) {
    std::size_t k = 0;  // rules on the low-centroid side of the switch point
    while (k < n && items[k].first <= y) ++k;
    num = den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = items[i].second;
      const bool low_side = i < k;
      const double w = left ? (low_side ? f.upper : f.lower) : (low_side ? f.lower : f.upper);
      num += w * items[i].first;
      den += w;
    }
    if (!(den > 0.0)) return y;
    const double next = num / den;
    if (left ? !(next < y) : !(next > y)) return left ? std::min(y, next) : std::max(y, next);
    y = next;
  }
  throw std::logic_error("Karnik-Mendel iteration did not converge");
}

}  // namespace detail

// Center-of-sets type reduction. centroids[k] is the consequent centroid
// interval of rule k; throws NoRuleFired when every upper firing is zero.
inline Interval km_type_reduce(std::span<const Interval> firings, std::span<const Interval> centroids) {
  if (firings.size() != centroids.size()) {
    throw std::invalid_argument("km_type_reduce: firings and centroids differ in length");
  }
  std::vector<std::pair<double, Interval>> left, right;
  for (std::size_t k = 0; k < firings.size(); ++k) {
    const auto& f = firings[k];
    if (!(f.lower >= 0.0 && f.lower <= f.upper)) {
      throw std::invalid_argument("km_type_reduce: firing interval must satisfy 0 <= lower <= upper");
    }
    if (f.upper <= 0.0) continue;
    left.emplace_back(centroids[k].lower, f);
    right.emplace_back(centroids[k].upper, f);
  }
  if (left.empty()) throw NoRuleFired();
  return {detail::km_endpoint(std::move(left), true), detail::km_endpoint(std::move(right), false)};
}

class FuzzySystem {
 public:
  FuzzySystem() : FuzzySystem(default_term_sets(), RuleBase::monotone_default()) {}
  FuzzySystem(TermSets sets, RuleBase rules) : sets_(sets), rules_(std::move(rules)) {
    for (std::size_t i = 0; i < kTermCount; ++i) {
      sets_[i].validate();
      if (sets_[i].term != Term(i)) throw std::invalid_argument("term sets must be ordered low, medium, high");
    }
    rules_.validate();
  }

  const TermSets& sets() const { return sets_; }
  const RuleBase& rules() const { return rules_; }

  // Type-reduced interval; throws NoRuleFired.
  Interval type_reduce(const std::array<double, 3>& triple) const {
    std::array<std::array<Interval, kTermCount>, 3> grades;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t t = 0; t < kTermCount; ++t) grades[i][t] = membership(sets_[t], triple[i]);
    }
    std::vector<Interval> firings, centroids;
    firings.reserve(rules_.rules.size());
    centroids.reserve(rules_.rules.size());
    for (const auto& rule : rules_.rules) {
      firings.push_back(fire_rule({grades[0][static_cast<std::size_t>(rule.antecedents[0])],
                                   grades[1][static_cast<std::size_t>(rule.antecedents[1])],
                                   grades[2][static_cast<std::size_t>(rule.antecedents[2])]}));
      centroids.push_back(rules_.consequent_centroids[static_cast<std::size_t>(rule.consequent)]);
    }
    return km_type_reduce(firings, centroids);
  }

  // Crisp degree of distribution; 0 when no rule fires.
  double infer(const std::array<double, 3>& triple) const {
    for (double v : triple) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("infer_dod: inputs must lie in [0,1]");
    }
    try {
      return type_reduce(triple).midpoint();
    } catch (const NoRuleFired&) {
      return 0.0;
    }
  }

 private:
  TermSets sets_;
  RuleBase rules_;
};

inline double infer_dod(const FuzzySystem& fls, const std::array<double, 3>& triple) {
  return fls.infer(triple);
}

}  // namespace udsdm
