#pragma once

// Set algebra over Z, F_p and Z/p^kZ: sum/product sets, representation
// functions, energies, variant-slope counts and dyadic pigeonholing.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sumprod/errors.hpp"
#include "sumprod/report.hpp"
#include "sumprod/ring.hpp"

namespace sumprod {

// ---------------------------------------------------------------------------
// Checked integer helpers (the Integers universe has no reduction).

inline i64 checked_add(i64 a, i64 b) {
  i64 r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorKind::ParamOutOfRange, "integer overflow in sum");
  return r;
}

inline i64 checked_mul(i64 a, i64 b) {
  i64 r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorKind::ParamOutOfRange, "integer overflow in product");
  return r;
}

inline u64 checked_pow(u64 base, int exp) {
  u64 r = 1;
  for (int i = 0; i < exp; ++i) {
    if (__builtin_mul_overflow(r, base, &r)) fail(ErrorKind::ParamOutOfRange, "energy overflows 64 bits");
  }
  return r;
}

/// Reduced fraction with positive denominator. Modular universes always use
/// den == 1; the Integers universe needs true fractions for ratio sets.
struct Fraction {
  i64 num = 0;
  i64 den = 1;

  static Fraction make(i64 num, i64 den) {
    require(den != 0, ErrorKind::ZeroDenominator, "fraction with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const i64 g = std::gcd(num, den);
    return {num / g, den / g};
  }
  static Fraction integer(i64 v) { return {v, 1}; }

  bool is_integer() const noexcept { return den == 1; }

  friend bool operator==(const Fraction&, const Fraction&) = default;
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    const __int128 l = static_cast<__int128>(a.num) * b.den;
    const __int128 r = static_cast<__int128>(b.num) * a.den;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

struct FractionHash {
  std::size_t operator()(const Fraction& f) const noexcept {
    return std::hash<i64>{}(f.num) * 0x9E3779B97F4A7C15ULL ^ std::hash<i64>{}(f.den);
  }
};

// ---------------------------------------------------------------------------

class Universe {
 public:
  enum class Kind { Integers, PrimeField, Ring };

  static Universe integers() { return Universe(Kind::Integers, std::nullopt); }
  static Universe prime_field(i64 p) { return Universe(Kind::PrimeField, Modulus(p, 1)); }
  static Universe ring(i64 p, int k) {
    return k == 1 ? prime_field(p) : Universe(Kind::Ring, Modulus(p, k));
  }

  /// Parses "Z", "Fp:<p>" or "Zq:<q>" with q an odd prime power.
  static Universe parse(const std::string& tag) {
    if (tag == "Z") return integers();
    const auto colon = tag.find(':');
    require(colon != std::string::npos, ErrorKind::UsageError, "bad universe tag '" + tag + "'");
    const std::string head = tag.substr(0, colon);
    i64 value = 0;
    try {
      value = std::stoll(tag.substr(colon + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::UsageError, "bad universe tag '" + tag + "'");
    }
    if (head == "Fp") return prime_field(value);
    if (head == "Zq") {
      require(value >= 3 && value % 2 == 1, ErrorKind::UsageError, "Zq modulus must be an odd prime power");
      i64 p = 3;
      while (value % p != 0) p += 2;
      int k = 0;
      i64 rest = value;
      while (rest % p == 0) {
        rest /= p;
        ++k;
      }
      require(rest == 1, ErrorKind::UsageError, "Zq modulus must be an odd prime power");
      return ring(p, k);
    }
    fail(ErrorKind::UsageError, "bad universe tag '" + tag + "'");
  }

  Kind kind() const noexcept { return kind_; }
  bool is_modular() const noexcept { return kind_ != Kind::Integers; }
  const Modulus& modulus() const {
    require(modulus_.has_value(), ErrorKind::UniverseMismatch, "the integers have no modulus");
    return *modulus_;
  }
  /// Number of elements, or 0 for the integers.
  i64 size() const noexcept { return modulus_ ? modulus_->q() : 0; }

  std::string tag() const {
    switch (kind_) {
      case Kind::Integers: return "Z";
      case Kind::PrimeField: return "Fp:" + std::to_string(modulus_->p());
      case Kind::Ring: return "Zq:" + std::to_string(modulus_->q());
    }
    return "?";
  }

  i64 reduce(i64 a) const { return modulus_ ? modulus_->reduce(a) : a; }
  i64 add(i64 a, i64 b) const { return modulus_ ? modulus_->add(a, b) : checked_add(a, b); }
  i64 sub(i64 a, i64 b) const { return modulus_ ? modulus_->sub(a, b) : checked_add(a, -b); }
  i64 mul(i64 a, i64 b) const { return modulus_ ? modulus_->mul(a, b) : checked_mul(a, b); }

  /// a / b, or nullopt when b is a zero divisor of the ring (b = 0 throws).
  std::optional<Fraction> ratio(i64 a, i64 b) const {
    require(b != 0, ErrorKind::ZeroDenominator, "division by zero");
    if (!modulus_) return Fraction::make(a, b);
    if (!modulus_->is_unit(b)) return std::nullopt;
    return Fraction::integer(modulus_->mul(a, modulus_->inv(b)));
  }

  friend bool operator==(const Universe& a, const Universe& b) {
    return a.kind_ == b.kind_ && a.modulus_ == b.modulus_;
  }

 private:
  Universe(Kind kind, std::optional<Modulus> modulus) : kind_(kind), modulus_(std::move(modulus)) {}

  Kind kind_;
  std::optional<Modulus> modulus_;
};

/// Sorted, duplicate-free set of canonical elements of one universe.
class FiniteSet {
 public:
  FiniteSet() : universe_(Universe::integers()) {}
  explicit FiniteSet(Universe universe, std::vector<i64> elements = {})
      : universe_(std::move(universe)), elements_(std::move(elements)) {
    for (auto& e : elements_) e = universe_.reduce(e);
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  }
  FiniteSet(Universe universe, std::initializer_list<i64> elements)
      : FiniteSet(std::move(universe), std::vector<i64>(elements)) {}

  const Universe& universe() const noexcept { return universe_; }
  const std::vector<i64>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  auto begin() const noexcept { return elements_.begin(); }
  auto end() const noexcept { return elements_.end(); }
  i64 operator[](std::size_t i) const { return elements_[i]; }

  bool contains(i64 v) const {
    return std::binary_search(elements_.begin(), elements_.end(), universe_.reduce(v));
  }

  /// The set with v removed (no-op when absent).
  FiniteSet without(i64 v) const {
    std::vector<i64> rest;
    for (i64 e : elements_) {
      if (e != universe_.reduce(v)) rest.push_back(e);
    }
    return FiniteSet(universe_, std::move(rest));
  }

  friend bool operator==(const FiniteSet& a, const FiniteSet& b) {
    return a.universe_ == b.universe_ && a.elements_ == b.elements_;
  }

 private:
  Universe universe_;
  std::vector<i64> elements_;
};

inline void require_same_universe(const FiniteSet& a, const FiniteSet& b) {
  require(a.universe() == b.universe(), ErrorKind::UniverseMismatch,
          "sets live in " + a.universe().tag() + " and " + b.universe().tag());
}

enum class Op { Sum, Difference, Product, Ratio };

inline std::string_view to_string(Op op) {
  switch (op) {
    case Op::Sum: return "sum";
    case Op::Difference: return "difference";
    case Op::Product: return "product";
    case Op::Ratio: return "ratio";
  }
  return "?";
}

/// Representation function r(z) = #{(a, b) : a op b = z}, keys ascending.
struct RepCounts {
  Op op = Op::Sum;
  std::vector<std::pair<Fraction, u64>> entries;
  /// Pairs skipped because the denominator is a zero divisor (rings only).
  u64 dropped = 0;

  u64 total() const {
    u64 t = 0;
    for (const auto& e : entries) t += e.second;
    return t;
  }
  u64 max_count() const {
    u64 m = 0;
    for (const auto& e : entries) m = std::max(m, e.second);
    return m;
  }
  u64 at(const Fraction& key) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), key,
                               [](const auto& e, const Fraction& k) { return e.first < k; });
    return (it != entries.end() && it->first == key) ? it->second : 0;
  }
  u64 at(i64 key) const { return at(Fraction::integer(key)); }
  std::size_t size() const noexcept { return entries.size(); }

  /// Sum of r(z)^n over all keys.
  u64 moment(int n) const {
    u64 s = 0;
    for (const auto& e : entries) {
      if (__builtin_add_overflow(s, checked_pow(e.second, n), &s)) {
        fail(ErrorKind::ParamOutOfRange, "moment overflows 64 bits");
      }
    }
    return s;
  }
};

namespace detail {

inline std::optional<Fraction> apply(const Universe& u, Op op, i64 a, i64 b) {
  switch (op) {
    case Op::Sum: return Fraction::integer(u.add(a, b));
    case Op::Difference: return Fraction::integer(u.sub(a, b));
    case Op::Product: return Fraction::integer(u.mul(a, b));
    case Op::Ratio: return u.ratio(a, b);
  }
  return std::nullopt;
}

inline RepCounts finish(Op op, std::unordered_map<Fraction, u64, FractionHash>& counts, u64 dropped) {
  RepCounts out{op, {counts.begin(), counts.end()}, dropped};
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

}  // namespace detail

inline RepCounts rep_counts(const FiniteSet& a, const FiniteSet& b, Op op) {
  require_same_universe(a, b);
  if (op == Op::Ratio) {
    require(!b.contains(0), ErrorKind::ZeroDenominator, "ratio set needs 0 outside the denominator set");
  }
  std::unordered_map<Fraction, u64, FractionHash> counts;
  counts.reserve(a.size() * b.size());
  u64 dropped = 0;
  for (i64 x : a) {
    for (i64 y : b) {
      if (auto z = detail::apply(a.universe(), op, x, y)) {
        ++counts[*z];
      } else {
        ++dropped;
      }
    }
  }
  return detail::finish(op, counts, dropped);
}

/// The exact set {a op b}. Ratio sets of integers are not integral and are
/// available only through rep_counts.
inline FiniteSet combine(const FiniteSet& a, const FiniteSet& b, Op op) {
  require_same_universe(a, b);
  require(!(op == Op::Ratio && !a.universe().is_modular()), ErrorKind::UniverseMismatch,
          "the ratio set of integers leaves Z; use rep_counts");
  const RepCounts r = rep_counts(a, b, op);
  std::vector<i64> values;
  values.reserve(r.size());
  for (const auto& e : r.entries) values.push_back(e.first.num);
  return FiniteSet(a.universe(), std::move(values));
}

/// xA = {x a : a in A}.
inline FiniteSet dilate(const FiniteSet& a, i64 x) {
  std::vector<i64> values;
  values.reserve(a.size());
  for (i64 e : a) values.push_back(a.universe().mul(x, e));
  return FiniteSet(a.universe(), std::move(values));
}

enum class EnergyKind { Additive, Multiplicative };

/// n-th order energy. Additive: sum of r_{A-B}(z)^n. Multiplicative: sum of
/// r_{A/B}(x)^n, which needs every element of B invertible.
inline u64 energy(const FiniteSet& a, const FiniteSet& b, EnergyKind kind, int n = 2) {
  require(n >= 2, ErrorKind::ParamOutOfRange, "energy order must be >= 2");
  if (kind == EnergyKind::Additive) return rep_counts(a, b, Op::Difference).moment(n);
  const RepCounts r = rep_counts(a, b, Op::Ratio);
  require(r.dropped == 0, ErrorKind::ZeroDenominator, "multiplicative energy needs unit denominators");
  return r.moment(n);
}

// ---------------------------------------------------------------------------
// Variant slopes Q = (A1 + A2) / (A1 + A2) over F_p.

/// r_Q(z) = #{(a1, a1', a2, a2') : z = (a1 + a2) / (a1' + a2')} for z in Z.
/// Tuples with a1' + a2' = 0 contribute to no z. Keys with r_Q(z) = 0 are
/// omitted.
inline RepCounts variant_slope_counts(const FiniteSet& z, const FiniteSet& a1, const FiniteSet& a2) {
  require_same_universe(z, a1);
  require_same_universe(a1, a2);
  require(z.universe().kind() == Universe::Kind::PrimeField, ErrorKind::UniverseMismatch,
          "variant slopes are defined over F_p");
  const Universe& u = z.universe();
  const RepCounts sums = rep_counts(a1, a2, Op::Sum);
  std::unordered_map<i64, u64> by_value;
  for (const auto& [s, c] : sums.entries) by_value[s.num] = c;

  RepCounts out{Op::Ratio, {}, 0};
  for (i64 target : z) {
    u64 r = 0;
    for (const auto& [den, c_den] : sums.entries) {
      if (den.num == 0) continue;
      auto it = by_value.find(u.mul(target, den.num));
      if (it != by_value.end()) r += it->second * c_den;
    }
    if (r > 0) out.entries.emplace_back(Fraction::integer(target), r);
  }
  return out;
}

/// R(Z, A1, A2) = sum over z in Z of r_Q(z)^2.
inline u64 restricted_energy(const FiniteSet& z, const FiniteSet& a1, const FiniteSet& a2) {
  return variant_slope_counts(z, a1, a2).moment(2);
}

// ---------------------------------------------------------------------------
// Dyadic pigeonholing.

enum class Weight { Linear, Square };

struct DyadicClass {
  int index = 0;                  ///< i0: members satisfy 2^(i0-1) <= r < 2^i0
  std::vector<Fraction> members;  ///< ascending
  u64 mass = 0;                   ///< sum of weight(r) over members
  u64 total_mass = 0;             ///< sum of weight(r) over all keys
  int class_count = 0;            ///< classes 1..K that can be non-empty
};

/// Class of r-values with the largest weighted mass; ties go to the smaller
/// index. Guarantees mass * class_count >= total_mass.
inline DyadicClass dyadic_popular(const RepCounts& r, Weight weight) {
  require(!r.entries.empty(), ErrorKind::EmptyInput, "dyadic pigeonholing of an empty map");
  const int classes = std::bit_width(r.max_count());
  std::vector<u64> mass(classes + 1, 0);
  u64 total = 0;
  for (const auto& [key, c] : r.entries) {
    const u64 w = weight == Weight::Square ? c * c : c;
    mass[std::bit_width(c)] += w;
    total += w;
  }
  int best = 1;
  for (int i = 2; i <= classes; ++i) {
    if (mass[i] > mass[best]) best = i;
  }
  DyadicClass out{best, {}, mass[best], total, classes};
  for (const auto& [key, c] : r.entries) {
    if (static_cast<int>(std::bit_width(c)) == best) out.members.push_back(key);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Set families.

enum class FamilyKind { AP, GP, RandomSubset };

struct FamilyParams {
  i64 start = 1;  ///< first AP term; first GP term defaults to `ratio` when 0
  i64 step = 1;
  i64 ratio = 2;
  i64 lo = 1;     ///< RandomSubset range over the integers, inclusive
  i64 hi = 1000;
};

/// Deterministic for a fixed seed. AP: start + i*step. GP: g, g*r, ..., with
/// g = start (or r when start == 0). RandomSubset: n distinct elements drawn
/// uniformly from the universe (or [lo, hi] over the integers).
inline FiniteSet generate_family(FamilyKind kind, std::size_t n, const FamilyParams& params,
                                 const Universe& universe, u64 seed = 0) {
  const i64 count = static_cast<i64>(n);
  std::vector<i64> values;
  values.reserve(n);
  switch (kind) {
    case FamilyKind::AP: {
      require(universe.reduce(params.step) != 0, ErrorKind::ParamOutOfRange, "AP step must be nonzero");
      i64 v = universe.reduce(params.start);
      for (i64 i = 0; i < count; ++i) {
        values.push_back(v);
        v = universe.add(v, params.step);
      }
      break;
    }
    case FamilyKind::GP: {
      if (!universe.is_modular()) {
        require(params.ratio >= 2, ErrorKind::ParamOutOfRange, "GP over Z needs ratio >= 2");
      }
      i64 v = universe.reduce(params.start == 0 ? params.ratio : params.start);
      require(v != 0, ErrorKind::ParamOutOfRange, "GP first term must be nonzero");
      for (i64 i = 0; i < count; ++i) {
        values.push_back(v);
        if (i + 1 < count) v = universe.mul(v, params.ratio);
      }
      break;
    }
    case FamilyKind::RandomSubset: {
      const i64 lo = universe.is_modular() ? 0 : params.lo;
      const i64 hi = universe.is_modular() ? universe.size() - 1 : params.hi;
      require(hi - lo + 1 >= count, ErrorKind::ParamOutOfRange, "universe smaller than requested subset");
      std::mt19937_64 rng(seed);
      std::vector<i64> pool(static_cast<std::size_t>(hi - lo + 1));
      std::iota(pool.begin(), pool.end(), lo);
      // Partial Fisher-Yates with an explicit index draw keeps the result
      // independent of the standard library's distribution implementations.
      for (i64 i = 0; i < count; ++i) {
        const u64 span = pool.size() - static_cast<u64>(i);
        const auto j = static_cast<std::size_t>(i + static_cast<i64>(rng() % span));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        values.push_back(pool[static_cast<std::size_t>(i)]);
      }
      break;
    }
  }
  FiniteSet out(universe, std::move(values));
  require(out.size() == n, ErrorKind::ParamOutOfRange,
          "family collapsed to " + std::to_string(out.size()) + " distinct elements, wanted " + std::to_string(n));
  return out;
}

// ---------------------------------------------------------------------------
// Reports.

namespace detail {

inline double ratio_of_powers(std::initializer_list<std::pair<double, double>> num,
                              std::initializer_list<std::pair<double, double>> den) {
  double log_value = 0;
  for (auto [b, e] : num) log_value += e * std::log(b);
  for (auto [b, e] : den) log_value -= e * std::log(b);
  return std::exp(log_value);
}

inline u64 mul_u64(u64 a, u64 b) {
  u64 r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorKind::ParamOutOfRange, "report quantity overflows 64 bits");
  return r;
}

}  // namespace detail

/// Multiplicative energy sum over r_{A*B}(z)^2, valid in every universe
/// including zeros and zero divisors.
inline u64 product_energy_direct(const FiniteSet& a, const FiniteSet& b) {
  return rep_counts(a, b, Op::Product).moment(2);
}

/// Sum-product statistics of A, with the exact Cauchy-Schwarz/Hoelder checks
/// asserted and the asymptotic ratios recorded for inspection.
inline ReportDocument sum_product_report(const FiniteSet& a) {
  require(a.size() >= 2, ErrorKind::ParamOutOfRange, "sum-product report needs |A| >= 2");
  ReportDocument rep("sum_product");
  const auto n = static_cast<u64>(a.size());
  const RepCounts sums = rep_counts(a, a, Op::Sum);
  const RepCounts prods = rep_counts(a, a, Op::Product);
  const u64 sumset = sums.size();
  const u64 prodset = prods.size();
  const u64 e_add = energy(a, a, EnergyKind::Additive, 2);
  const u64 e_mul = product_energy_direct(a, a);
  const u64 e3_add = energy(a, a, EnergyKind::Additive, 3);
  const u64 sum_cubes = sums.moment(3);

  rep.set("universe", a.universe().tag());
  rep.set("size", n);
  rep.set("sumset_size", sumset);
  rep.set("productset_size", prodset);
  rep.set("additive_energy", e_add);
  rep.set("multiplicative_energy", e_mul);
  rep.set("third_additive_energy", e3_add);

  if (!a.contains(0)) {
    const RepCounts ratios = rep_counts(a, a, Op::Ratio);
    if (ratios.dropped == 0) {
      rep.check_eq("multiplicative_energy_ratio_route", ratios.moment(2), e_mul);
    }
  }
  const u64 n4 = checked_pow(n, 4);
  rep.check_le("cauchy_schwarz_additive", n4, detail::mul_u64(sumset, e_add));
  rep.check_le("cauchy_schwarz_multiplicative", n4, detail::mul_u64(prodset, e_mul));
  rep.check_le("hoelder_sumset", checked_pow(n, 6), detail::mul_u64(detail::mul_u64(sumset, sumset), sum_cubes));

  const double s = static_cast<double>(sumset), p = static_cast<double>(prodset), m = static_cast<double>(n);
  rep.set("ratio_sum8_prod3_over_n12", detail::ratio_of_powers({{s, 8}, {p, 3}}, {{m, 12}}));
  rep.set("ratio_sum2_prod3_over_n6", detail::ratio_of_powers({{s, 2}, {p, 3}}, {{m, 6}}));
  rep.set("ratio_min_stevens_over_n6",
          std::min(detail::ratio_of_powers({{s, 3}, {p, 2}}, {{m, 6}}),
                   detail::ratio_of_powers({{p, 3}, {s, 2}}, {{m, 6}})));
  rep.set("ratio_e3_power_over_productset",
          detail::ratio_of_powers({{static_cast<double>(e3_add), 4.0 / 3.0}}, {{m, 4}, {p, 1}}));
  rep.set("exponent_max_over_log_n", std::log(std::max(s, p)) / std::log(m));
  if (a.universe().kind() == Universe::Kind::PrimeField) {
    const double prime = static_cast<double>(a.universe().modulus().p());
    rep.set("precondition_n_le_p_2_5", m <= std::pow(prime, 0.4));
    rep.set("precondition_n_le_p_1_2", m <= std::sqrt(prime));
  } else {
    rep.set("precondition_n_le_p_2_5", nullptr);
    rep.set("precondition_n_le_p_1_2", nullptr);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Text format: "universe=<tag>" header then one decimal integer per line.

inline void write_set(std::ostream& out, const FiniteSet& a) {
  out << "universe=" << a.universe().tag() << '\n';
  for (i64 e : a) out << e << '\n';
}

inline FiniteSet read_set(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::UsageError, "empty set file");
  require(line.rfind("universe=", 0) == 0, ErrorKind::UsageError, "set file must start with universe=");
  const Universe universe = Universe::parse(line.substr(9));
  std::vector<i64> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stoll(line, &used));
      require(used == line.size(), ErrorKind::UsageError, "trailing characters in '" + line + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::UsageError, "not an integer: '" + line + "'");
    }
  }
  return FiniteSet(universe, std::move(values));
}

}  // namespace sumprod
