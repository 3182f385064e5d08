#pragma once

// Exact incidence counting over Z and F_p: point-line incidences, rich lines,
// collinear triples, point-plane incidences in F_p^3, and the experiment
// constructions built on them.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sumprod/errors.hpp"
#include "sumprod/parallel.hpp"
#include "sumprod/report.hpp"
#include "sumprod/setalg.hpp"

namespace sumprod {

struct Point2 {
  i64 x = 0;
  i64 y = 0;
  friend auto operator<=>(const Point2&, const Point2&) = default;
};

struct Point3 {
  i64 x = 0;
  i64 y = 0;
  i64 z = 0;
  friend auto operator<=>(const Point3&, const Point3&) = default;
};

namespace detail {

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
}

inline Point2 canonical(const Universe& u, Point2 p) { return {u.reduce(p.x), u.reduce(p.y)}; }
inline Point3 canonical(const Universe& u, Point3 p) { return {u.reduce(p.x), u.reduce(p.y), u.reduce(p.z)}; }

}  // namespace detail

struct Point2Hash {
  std::size_t operator()(const Point2& p) const noexcept {
    return detail::hash_mix(std::hash<i64>{}(p.x), std::hash<i64>{}(p.y));
  }
};

/// Duplicate-free, sorted point configuration over one universe.
template <typename P>
class BasicPointSet {
 public:
  explicit BasicPointSet(Universe universe = Universe::integers(), std::vector<P> points = {})
      : universe_(std::move(universe)), points_(std::move(points)) {
    for (auto& p : points_) p = detail::canonical(universe_, p);
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  const Universe& universe() const noexcept { return universe_; }
  const std::vector<P>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }
  bool contains(const P& p) const {
    return std::binary_search(points_.begin(), points_.end(), detail::canonical(universe_, p));
  }

 private:
  Universe universe_;
  std::vector<P> points_;
};

using PointSet = BasicPointSet<Point2>;
using PointSet3 = BasicPointSet<Point3>;

/// Cartesian product A x B as a point set.
inline PointSet grid(const FiniteSet& a, const FiniteSet& b) {
  require_same_universe(a, b);
  std::vector<Point2> pts;
  pts.reserve(a.size() * b.size());
  for (i64 x : a) {
    for (i64 y : b) pts.push_back({x, y});
  }
  return PointSet(a.universe(), std::move(pts));
}

// ---------------------------------------------------------------------------

/// A line y = m x + b or x = c. Over the integers m and b are rationals;
/// over F_p they are field elements (den == 1).
class Line {
 public:
  enum class Kind { Slope, Vertical };

  static Line slope(const Universe& u, Fraction m, Fraction b) {
    if (u.is_modular()) {
      require(m.is_integer() && b.is_integer(), ErrorKind::UniverseMismatch, "modular lines have integral coefficients");
      m = Fraction::integer(u.reduce(m.num));
      b = Fraction::integer(u.reduce(b.num));
    }
    return Line(u, Kind::Slope, m, b);
  }
  static Line slope(const Universe& u, i64 m, i64 b) { return slope(u, Fraction::integer(m), Fraction::integer(b)); }

  static Line vertical(const Universe& u, i64 c) { return Line(u, Kind::Vertical, {}, Fraction::integer(u.reduce(c))); }

  /// The unique line through two distinct points (Z or F_p only).
  static Line through(const Universe& u, Point2 p1, Point2 p2) {
    require(u.kind() != Universe::Kind::Ring, ErrorKind::UniverseMismatch,
            "lines through two points need Z or a prime field");
    p1 = detail::canonical(u, p1);
    p2 = detail::canonical(u, p2);
    require(!(p1 == p2), ErrorKind::PreconditionUnmet, "a line needs two distinct points");
    if (p1.x == p2.x) return vertical(u, p1.x);
    if (!u.is_modular()) {
      const Fraction m = Fraction::make(p2.y - p1.y, p2.x - p1.x);
      // b = y1 - m x1 = (y1 * m.den - m.num * x1) / m.den
      const Fraction b = Fraction::make(checked_add(checked_mul(p1.y, m.den), -checked_mul(m.num, p1.x)), m.den);
      return Line(u, Kind::Slope, m, b);
    }
    const Modulus& mod = u.modulus();
    const i64 m = mod.mul(mod.sub(p2.y, p1.y), mod.inv(mod.sub(p2.x, p1.x)));
    return slope(u, m, mod.sub(p1.y, mod.mul(m, p1.x)));
  }

  Kind kind() const noexcept { return kind_; }
  const Fraction& m() const noexcept { return m_; }
  /// Intercept for slope lines; the x-coordinate for vertical lines.
  const Fraction& b() const noexcept { return b_; }
  const Universe& universe() const noexcept { return universe_; }

  bool contains(Point2 p) const {
    p = detail::canonical(universe_, p);
    if (kind_ == Kind::Vertical) return p.x == b_.num;
    if (universe_.is_modular()) return p.y == universe_.add(universe_.mul(m_.num, p.x), b_.num);
    const __int128 lhs = static_cast<__int128>(p.y) * m_.den * b_.den;
    const __int128 rhs = static_cast<__int128>(m_.num) * p.x * b_.den + static_cast<__int128>(b_.num) * m_.den;
    return lhs == rhs;
  }

  /// Intercept of the slope-m line through p (rational over Z).
  static Fraction intercept_through(const Universe& u, const Fraction& m, Point2 p) {
    if (u.is_modular()) return Fraction::integer(u.sub(p.y, u.mul(m.num, p.x)));
    return Fraction::make(checked_add(checked_mul(p.y, m.den), -checked_mul(m.num, p.x)), m.den);
  }

  friend bool operator==(const Line& a, const Line& b) {
    return a.kind_ == b.kind_ && a.m_ == b.m_ && a.b_ == b.b_;
  }
  friend bool operator<(const Line& a, const Line& b) {
    return std::tie(a.kind_, a.m_, a.b_) < std::tie(b.kind_, b.m_, b.b_);
  }

  std::string str() const {
    return kind_ == Kind::Vertical ? "x=" + b_.str() : "y=" + m_.str() + "x+" + b_.str();
  }

 private:
  Line(Universe u, Kind kind, Fraction m, Fraction b) : universe_(std::move(u)), kind_(kind), m_(m), b_(b) {}

  Universe universe_;
  Kind kind_;
  Fraction m_;
  Fraction b_;
};

struct LineHash {
  std::size_t operator()(const Line& l) const noexcept {
    FractionHash h;
    return detail::hash_mix(detail::hash_mix(static_cast<std::size_t>(l.kind()), h(l.m())), h(l.b()));
  }
};

/// |{(p, l) : p in l}| with lines counted per occurrence. Points are sharded
/// across `workers`; the result does not depend on the sharding.
inline u64 incidences(const PointSet& pts, const std::vector<Line>& lines, unsigned workers = 1) {
  const Universe& u = pts.universe();
  std::unordered_map<i64, u64> verticals;
  std::map<Fraction, std::unordered_map<Fraction, u64, FractionHash>> by_slope;
  for (const Line& l : lines) {
    require(l.universe() == u, ErrorKind::UniverseMismatch, "line and point universes differ");
    if (l.kind() == Line::Kind::Vertical) {
      ++verticals[l.b().num];
    } else {
      ++by_slope[l.m()][l.b()];
    }
  }
  const auto& points = pts.points();
  const auto partial = map_blocks(points.size(), workers, [&](std::size_t begin, std::size_t end) {
    u64 count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const Point2 p = points[i];
      if (auto it = verticals.find(p.x); it != verticals.end()) count += it->second;
      for (const auto& [m, intercepts] : by_slope) {
        if (auto it = intercepts.find(Line::intercept_through(u, m, p)); it != intercepts.end()) {
          count += it->second;
        }
      }
    }
    return count;
  });
  u64 total = 0;
  for (u64 c : partial) total += c;
  return total;
}

/// Lines spanned by the points with at least k of them, with exact counts,
/// sorted by line.
inline std::vector<std::pair<Line, u64>> rich_lines(const PointSet& pts, u64 k) {
  require(k >= 2, ErrorKind::ParamOutOfRange, "rich_lines needs k >= 2");
  const auto& points = pts.points();
  std::unordered_map<Line, u64, LineHash> pair_counts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      ++pair_counts[Line::through(pts.universe(), points[i], points[j])];
    }
  }
  std::vector<std::pair<Line, u64>> out;
  for (const auto& [line, pairs] : pair_counts) {
    // pairs = t(t-1)/2
    const auto t = static_cast<u64>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(pairs))) / 2.0));
    if (t >= k) out.emplace_back(line, t);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

// ---------------------------------------------------------------------------
// Elekes: P = (A+A) x (A.A), L = {y = a1 (x - a2)}.

struct ElekesConfig {
  PointSet points;
  std::vector<Line> lines;  ///< all |A|^2 lines, coincident ones repeated
  std::size_t distinct_lines = 0;
  u64 min_line_richness = 0;  ///< fewest points of P on any line of L
};

inline ElekesConfig elekes_config(const FiniteSet& a) {
  require(a.size() >= 2, ErrorKind::ParamOutOfRange, "Elekes construction needs |A| >= 2");
  const Universe& u = a.universe();
  const FiniteSet sums = combine(a, a, Op::Sum);
  const FiniteSet prods = combine(a, a, Op::Product);
  ElekesConfig cfg{grid(sums, prods), {}, 0, 0};
  cfg.lines.reserve(a.size() * a.size());
  for (i64 a1 : a) {
    for (i64 a2 : a) cfg.lines.push_back(Line::slope(u, a1, u.mul(u.reduce(-a1), a2)));
  }
  cfg.distinct_lines = std::unordered_set<Line, LineHash>(cfg.lines.begin(), cfg.lines.end()).size();
  cfg.min_line_richness = std::numeric_limits<u64>::max();
  for (const Line& l : cfg.lines) {
    u64 on_line = 0;
    for (i64 x : sums) {
      if (prods.contains(u.add(u.mul(l.m().num, x), l.b().num))) ++on_line;
    }
    cfg.min_line_richness = std::min(cfg.min_line_richness, on_line);
  }
  require(cfg.min_line_richness >= a.size(), ErrorKind::PreconditionUnmet,
          "Elekes line richness guarantee violated");
  return cfg;
}

// ---------------------------------------------------------------------------
// Solymosi's dyadic slope construction for sets of positive integers.

inline ReportDocument solymosi_stats(const FiniteSet& a) {
  require(!a.universe().is_modular(), ErrorKind::UniverseMismatch, "Solymosi statistics need positive integers");
  require(a.size() >= 2, ErrorKind::ParamOutOfRange, "Solymosi statistics need |A| >= 2");
  for (i64 e : a) require(e > 0, ErrorKind::NonPositiveElement, "element " + std::to_string(e) + " is not positive");

  ReportDocument rep("solymosi");
  const u64 n_a = a.size();
  const RepCounts ratios = rep_counts(a, a, Op::Ratio);
  const u64 e_mul = ratios.moment(2);
  const DyadicClass cls = dyadic_popular(ratios, Weight::Square);
  const u64 n = cls.members.size();
  const int i0 = cls.index;
  const u64 sumset = combine(a, a, Op::Sum).size();
  const u64 sumset_sq = sumset * sumset;
  const int log_ceil = std::bit_width(n_a - 1);  // ceil(log2 |A|) for |A| >= 2

  // l_i : y = s_i x for the sorted slopes in D, then l_{n+1} : x = min A.
  std::vector<std::vector<Point2>> on_line;
  for (const Fraction& s : cls.members) {
    std::vector<Point2> pts;
    for (i64 x : a) {
      const __int128 num = static_cast<__int128>(x) * s.num;
      if (num % s.den != 0) continue;
      const auto y = static_cast<i64>(num / s.den);
      if (a.contains(y)) pts.push_back({x, y});
    }
    on_line.push_back(std::move(pts));
  }
  {
    std::vector<Point2> last;
    for (i64 y : a) last.push_back({a[0], y});
    on_line.push_back(std::move(last));
  }
  // Parts between two slope lines sit in disjoint open cones. The last part
  // (l_n with the vertical line) only does when its vertical point lies
  // above l_n, so it is tallied separately.
  std::set<Point2> all_points;
  u64 sum_of_parts = 0;
  u64 sum_of_cone_parts = 0;
  std::size_t cone_points = 0;
  u64 min_part = std::numeric_limits<u64>::max();
  bool inside_sumset_square = true;
  const FiniteSet sums = combine(a, a, Op::Sum);
  for (std::size_t i = 0; i + 1 < on_line.size(); ++i) {
    std::set<Point2> part;
    for (const Point2& p : on_line[i]) {
      for (const Point2& q : on_line[i + 1]) part.insert({p.x + q.x, p.y + q.y});
    }
    for (const Point2& v : part) {
      inside_sumset_square = inside_sumset_square && sums.contains(v.x) && sums.contains(v.y);
    }
    sum_of_parts += part.size();
    min_part = std::min<u64>(min_part, part.size());
    all_points.insert(part.begin(), part.end());
    if (i + 2 < on_line.size()) {
      sum_of_cone_parts += part.size();
      cone_points = all_points.size();
    }
  }
  const u64 p_size = all_points.size();

  rep.set("size", n_a);
  rep.set("multiplicative_energy", e_mul);
  rep.set("i0", i0);
  rep.set("n", n);
  rep.set("class_mass", cls.mass);
  rep.set("class_count", cls.class_count);
  rep.set("ceil_log2_size", log_ceil);
  rep.set("P_size", p_size);
  rep.set("min_part_size", min_part);
  rep.set("sumset_size", sumset);
  json slopes = json::array();
  for (const auto& s : cls.members) slopes.push_back(s.str());
  rep.set("slopes", std::move(slopes));

  const u64 two_i0 = u64{1} << i0;
  // Chain as printed: E/ceil(log2|A|) <= n 2^i0 <= |A+A|^2. Informational:
  // the first link fails for generic sets.
  rep.add("printed_chain_energy_le_n2i0", e_mul, json(n * two_i0 * static_cast<u64>(log_ceil)).dump() + " (= n*2^i0*ceil(log2|A|))",
          "<=", e_mul <= n * two_i0 * static_cast<u64>(log_ceil), false);
  rep.add("printed_chain_n2i0_le_sumset_sq", n * two_i0, sumset_sq, "<=", n * two_i0 <= sumset_sq, false);

  // Exact chain behind the construction.
  rep.check_le("pigeonhole_energy_le_K_mass", e_mul, cls.mass * static_cast<u64>(cls.class_count));
  rep.check_le("class_mass_le_n_4i0", cls.mass, n * two_i0 * two_i0);
  const u64 quarter = (two_i0 / 2) * (two_i0 / 2);
  rep.check_le("n_minus_1_4i0m1_le_P", (n - 1) * quarter, p_size);
  rep.check_eq("cone_parts_disjoint", sum_of_cone_parts, static_cast<u64>(cone_points));
  rep.add("n_4i0m1_le_P", n * quarter, p_size, "<=", n * quarter <= p_size, false);
  rep.add("all_parts_disjoint", sum_of_parts, p_size, "==", sum_of_parts == p_size, false);
  rep.add("P_inside_sumset_square", inside_sumset_square, true, "==", inside_sumset_square);
  rep.check_le("P_le_sumset_sq", p_size, sumset_sq);
  return rep;
}

// ---------------------------------------------------------------------------
// Collinear triples T and T° over F_p (or Z).

struct CollinearCounts {
  u64 all = 0;       ///< T: determinant identity holds
  u64 distinct = 0;  ///< T°: three pairwise distinct collinear points
  u64 eq12 = 0;      ///< tuples with u1 = u2
  u64 eq13 = 0;
  u64 eq23 = 0;
  u64 eq123 = 0;
  u64 degenerate() const { return all - distinct; }
};

namespace detail {

inline std::pair<i64, i64> direction_key(const Universe& u, i64 dx, i64 dy) {
  if (u.is_modular()) {
    const Modulus& m = u.modulus();
    dx = m.reduce(dx);
    dy = m.reduce(dy);
    if (dx != 0) return {1, m.mul(dy, m.inv(dx))};
    return {0, 1};
  }
  const i64 g = std::gcd(dx, dy);
  dx /= g;
  dy /= g;
  if (dx < 0 || (dx == 0 && dy < 0)) {
    dx = -dx;
    dy = -dy;
  }
  return {dx, dy};
}

struct PairHash {
  std::size_t operator()(const std::pair<i64, i64>& p) const noexcept {
    return hash_mix(std::hash<i64>{}(p.first), std::hash<i64>{}(p.second));
  }
};

inline u64 intersection_size(const FiniteSet& a, const FiniteSet& b) {
  u64 c = 0;
  for (i64 x : a) c += b.contains(x) ? 1 : 0;
  return c;
}

}  // namespace detail

/// T and T° with the coincidence breakdown. Points u_i range over A_i x A_i.
/// Collinear tuples are counted by hashing directions from u1.
inline CollinearCounts collinear_counts(const FiniteSet& a1, const FiniteSet& a2, const FiniteSet& a3) {
  require_same_universe(a1, a2);
  require_same_universe(a2, a3);
  const Universe& u = a1.universe();
  require(u.kind() != Universe::Kind::Ring, ErrorKind::UniverseMismatch, "collinearity needs Z or F_p");
  const PointSet g2 = grid(a2, a2), g3 = grid(a3, a3);
  const u64 n2 = g2.size(), n3 = g3.size();

  CollinearCounts out;
  std::unordered_map<std::pair<i64, i64>, std::pair<u64, u64>, detail::PairHash> dirs;
  for (i64 x : a1) {
    for (i64 y : a1) {
      const Point2 base{x, y};
      dirs.clear();
      u64 same2 = 0, same3 = 0;
      for (const Point2& q : g2) {
        if (q == base) {
          ++same2;
        } else {
          ++dirs[detail::direction_key(u, u.sub(q.x, x), u.sub(q.y, y))].first;
        }
      }
      for (const Point2& q : g3) {
        if (q == base) {
          ++same3;
        } else {
          ++dirs[detail::direction_key(u, u.sub(q.x, x), u.sub(q.y, y))].second;
        }
      }
      u64 t = same2 * n3 + same3 * n2 - same2 * same3;
      for (const auto& [key, c] : dirs) t += c.first * c.second;
      out.all += t;
    }
  }
  const u64 s1 = a1.size(), s2 = a2.size(), s3 = a3.size();
  const u64 i12 = detail::intersection_size(a1, a2);
  const u64 i13 = detail::intersection_size(a1, a3);
  const u64 i23 = detail::intersection_size(a2, a3);
  u64 i123 = 0;
  for (i64 v : a1) i123 += (a2.contains(v) && a3.contains(v)) ? 1 : 0;
  out.eq12 = i12 * i12 * s3 * s3;
  out.eq13 = i13 * i13 * s2 * s2;
  out.eq23 = i23 * i23 * s1 * s1;
  out.eq123 = i123 * i123;
  out.distinct = out.all - (out.eq12 + out.eq13 + out.eq23 - 2 * out.eq123);
  return out;
}

inline u64 collinear_T(const FiniteSet& a1, const FiniteSet& a2, const FiniteSet& a3, bool distinct_only) {
  const CollinearCounts c = collinear_counts(a1, a2, a3);
  return distinct_only ? c.distinct : c.all;
}

// ---------------------------------------------------------------------------
// Planes in F_p^3.

/// alpha x + beta y + gamma z = delta, scaled so the first nonzero
/// coefficient among (alpha, beta, gamma) is 1.
class Plane {
 public:
  Plane(const Universe& u, i64 alpha, i64 beta, i64 gamma, i64 delta) : universe_(u) {
    require(u.kind() == Universe::Kind::PrimeField, ErrorKind::UniverseMismatch, "planes live in F_p^3");
    std::array<i64, 4> c{u.reduce(alpha), u.reduce(beta), u.reduce(gamma), u.reduce(delta)};
    const auto lead = std::find_if(c.begin(), c.begin() + 3, [](i64 v) { return v != 0; });
    require(lead != c.begin() + 3, ErrorKind::PreconditionUnmet, "plane normal must be nonzero");
    const i64 scale = u.modulus().inv(*lead);
    for (auto& v : c) v = u.mul(v, scale);
    coeffs_ = c;
  }

  const Universe& universe() const noexcept { return universe_; }
  i64 alpha() const noexcept { return coeffs_[0]; }
  i64 beta() const noexcept { return coeffs_[1]; }
  i64 gamma() const noexcept { return coeffs_[2]; }
  i64 delta() const noexcept { return coeffs_[3]; }
  const std::array<i64, 4>& coefficients() const noexcept { return coeffs_; }

  bool contains(const Point3& p) const {
    const Universe& u = universe_;
    return u.add(u.add(u.mul(alpha(), p.x), u.mul(beta(), p.y)), u.mul(gamma(), p.z)) == delta();
  }

  friend bool operator==(const Plane& a, const Plane& b) { return a.coeffs_ == b.coeffs_; }

 private:
  Universe universe_;
  std::array<i64, 4> coeffs_{};
};

/// |{(p, pi) : p in pi}|, grouping planes by normal vector.
inline u64 point_plane_incidences(const PointSet3& pts, const std::vector<Plane>& planes, unsigned workers = 1) {
  const Universe& u = pts.universe();
  std::map<std::array<i64, 3>, std::unordered_map<i64, u64>> by_normal;
  for (const Plane& pl : planes) {
    require(pl.universe() == u, ErrorKind::UniverseMismatch, "plane and point universes differ");
    ++by_normal[{pl.alpha(), pl.beta(), pl.gamma()}][pl.delta()];
  }
  const auto& points = pts.points();
  const auto partial = map_blocks(points.size(), workers, [&](std::size_t begin, std::size_t end) {
    u64 count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const Point3& p = points[i];
      for (const auto& [n, deltas] : by_normal) {
        const i64 d = u.add(u.add(u.mul(n[0], p.x), u.mul(n[1], p.y)), u.mul(n[2], p.z));
        if (auto it = deltas.find(d); it != deltas.end()) count += it->second;
      }
    }
    return count;
  });
  u64 total = 0;
  for (u64 c : partial) total += c;
  return total;
}

namespace detail {

using Line3Key = std::array<i64, 6>;

struct Line3Hash {
  std::size_t operator()(const Line3Key& k) const noexcept {
    std::size_t h = 0;
    for (i64 v : k) h = hash_mix(h, std::hash<i64>{}(v));
    return h;
  }
};

/// Canonical (direction, point) of the intersection line of two planes, or
/// nothing when they are parallel or identical.
inline std::optional<Line3Key> intersection_line(const Plane& a, const Plane& b) {
  const Universe& u = a.universe();
  const Modulus& m = u.modulus();
  const std::array<i64, 3> n1{a.alpha(), a.beta(), a.gamma()}, n2{b.alpha(), b.beta(), b.gamma()};
  std::array<i64, 3> d{m.sub(m.mul(n1[1], n2[2]), m.mul(n1[2], n2[1])),
                       m.sub(m.mul(n1[2], n2[0]), m.mul(n1[0], n2[2])),
                       m.sub(m.mul(n1[0], n2[1]), m.mul(n1[1], n2[0]))};
  const auto lead = static_cast<std::size_t>(std::find_if(d.begin(), d.end(), [](i64 v) { return v != 0; }) - d.begin());
  if (lead == 3) return std::nullopt;
  const i64 scale = m.inv(d[lead]);
  for (auto& v : d) v = m.mul(v, scale);
  // Point with coordinate `lead` = 0; solve for the other two.
  const std::size_t i = (lead + 1) % 3, j = (lead + 2) % 3;
  const i64 det = m.sub(m.mul(n1[i], n2[j]), m.mul(n1[j], n2[i]));
  const i64 inv_det = m.inv(det);
  std::array<i64, 3> pt{0, 0, 0};
  pt[i] = m.mul(m.sub(m.mul(a.delta(), n2[j]), m.mul(b.delta(), n1[j])), inv_det);
  pt[j] = m.mul(m.sub(m.mul(n1[i], b.delta()), m.mul(n2[i], a.delta())), inv_det);
  return Line3Key{d[0], d[1], d[2], pt[0], pt[1], pt[2]};
}

}  // namespace detail

/// Largest number of planes of the list sharing a common line. A lone plane
/// counts as 1; an empty list gives 0.
inline u64 max_collinear_planes(const std::vector<Plane>& planes) {
  if (planes.empty()) return 0;
  u64 best = 1;
  std::unordered_map<detail::Line3Key, u64, detail::Line3Hash> pencil;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    pencil.clear();
    for (std::size_t j = 0; j < planes.size(); ++j) {
      if (j == i) continue;
      if (auto key = detail::intersection_line(planes[i], planes[j])) {
        best = std::max(best, 1 + ++pencil[*key]);
      }
    }
  }
  return best;
}

struct PlaneConfig {
  PointSet3 points;
  std::vector<Plane> planes;
  ReportDocument report;
};

/// P = (A.A) x A x A^{-1}, planes a x + y = b z + c with a in A^{-1},
/// b in A.A, c in A; N2 = I(P, planes) bounds |A|^2 E+(A).
inline PlaneConfig energy_plane_config(const FiniteSet& a, unsigned workers = 1) {
  const Universe& u = a.universe();
  require(u.kind() == Universe::Kind::PrimeField, ErrorKind::UniverseMismatch, "point-plane construction lives in F_p");
  require(!a.contains(0), ErrorKind::ZeroElement, "A must not contain 0");
  const Modulus& m = u.modulus();
  std::vector<i64> inv_values;
  for (i64 e : a) inv_values.push_back(m.inv(e));
  const FiniteSet inverses(u, inv_values);
  const FiniteSet prods = combine(a, a, Op::Product);

  std::vector<Point3> pts;
  for (i64 x : prods) {
    for (i64 y : a) {
      for (i64 z : inverses) pts.push_back({x, y, z});
    }
  }
  std::vector<Plane> planes;
  for (i64 s : inverses) {
    for (i64 t : prods) {
      for (i64 c : a) planes.emplace_back(u, s, 1, u.reduce(-t), c);
    }
  }
  PlaneConfig cfg{PointSet3(u, std::move(pts)), std::move(planes), ReportDocument("point_plane")};
  ReportDocument& rep = cfg.report;

  const u64 n2 = point_plane_incidences(cfg.points, cfg.planes, workers);
  // Same count through the representation function of uv + a.
  std::unordered_map<i64, u64> r;
  for (i64 x : prods) {
    for (i64 z : inverses) {
      for (i64 y : a) ++r[u.add(u.mul(x, z), y)];
    }
  }
  u64 n2_algebraic = 0;
  for (const auto& [z, c] : r) n2_algebraic += c * c;

  const u64 e_add = energy(a, a, EnergyKind::Additive, 2);
  const u64 size = a.size();
  const u64 k = max_collinear_planes(cfg.planes);
  const double mm = static_cast<double>(cfg.points.size()), nn = static_cast<double>(cfg.planes.size());

  rep.set("size", size);
  rep.set("points", cfg.points.size());
  rep.set("planes", cfg.planes.size());
  rep.set("N2", n2);
  rep.set("additive_energy", e_add);
  rep.set("max_collinear_planes", k);
  rep.set("ratio_N2_over_m_sqrt_n_plus_km",
          static_cast<double>(n2) / (mm * std::sqrt(nn) + static_cast<double>(k) * mm));
  rep.check_eq("N2_two_routes", n2, n2_algebraic);
  rep.check_le("energy_times_size_sq_le_N2", e_add * size * size, n2);
  // A line with direction (alpha, beta, 0) fixes a and leaves b free, so
  // the sharp bound is |A.A|; k <= |A| is kept as an informational check.
  rep.add("k_le_size", k, size, "<=", k <= size, false);
  rep.check_le("k_le_product_set", k, prods.size());
  return cfg;
}

// ---------------------------------------------------------------------------
// Szemeredi-Trotter sharp grid.

inline ReportDocument st_experiment(i64 n, const Budget& budget = {}, unsigned workers = 1) {
  require(n >= 2, ErrorKind::ParamOutOfRange, "grid size must be >= 2");
  const u64 npoints = static_cast<u64>(2 * n * n * n);
  budget.check_tuples(npoints * static_cast<u64>(n), "Szemeredi-Trotter grid");
  const Universe z = Universe::integers();
  std::vector<Point2> pts;
  pts.reserve(npoints);
  for (i64 x = 1; x <= n; ++x) {
    for (i64 y = 1; y <= 2 * n * n; ++y) pts.push_back({x, y});
  }
  std::vector<Line> lines;
  for (i64 m = 1; m <= n; ++m) {
    for (i64 b = 1; b <= n * n; ++b) lines.push_back(Line::slope(z, m, b));
  }
  const PointSet ps(z, std::move(pts));
  const u64 inc = incidences(ps, lines, workers);
  const double p = static_cast<double>(ps.size()), l = static_cast<double>(lines.size());
  ReportDocument rep("szemeredi_trotter");
  rep.set("n", n);
  rep.set("points", ps.size());
  rep.set("lines", lines.size());
  rep.set("incidences", inc);
  rep.set("ratio", static_cast<double>(inc) / (std::cbrt(p * p) * std::cbrt(l * l) + p + l));
  return rep;
}

// ---------------------------------------------------------------------------
// CSV: "kind,x,y[,z]" for points, "kind,m,b" for lines (vertical: m empty,
// b = x-intercept).

inline void write_points_csv(std::ostream& out, const PointSet& pts) {
  out << "kind,x,y\n";
  for (const Point2& p : pts) out << "point," << p.x << ',' << p.y << '\n';
}

inline void write_points_csv(std::ostream& out, const PointSet3& pts) {
  out << "kind,x,y,z\n";
  for (const Point3& p : pts) out << "point," << p.x << ',' << p.y << ',' << p.z << '\n';
}

inline void write_lines_csv(std::ostream& out, const std::vector<Line>& lines) {
  out << "kind,m,b\n";
  for (const Line& l : lines) {
    if (l.kind() == Line::Kind::Vertical) {
      out << "vertical,," << l.b().str() << '\n';
    } else {
      out << "slope," << l.m().str() << ',' << l.b().str() << '\n';
    }
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline Fraction parse_fraction(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Fraction::integer(std::stoll(s));
    return Fraction::make(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::logic_error&) {
    fail(ErrorKind::UsageError, "bad number '" + s + "'");
  }
}

}  // namespace detail

inline PointSet read_points_csv(std::istream& in, const Universe& u) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "kind,x,y", ErrorKind::UsageError,
          "point CSV must start with kind,x,y");
  std::vector<Point2> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    require(cells.size() == 3 && cells[0] == "point", ErrorKind::UsageError, "bad point row '" + line + "'");
    pts.push_back({detail::parse_fraction(cells[1]).num, detail::parse_fraction(cells[2]).num});
  }
  return PointSet(u, std::move(pts));
}

inline std::vector<Line> read_lines_csv(std::istream& in, const Universe& u) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "kind,m,b", ErrorKind::UsageError,
          "line CSV must start with kind,m,b");
  std::vector<Line> lines;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    require(cells.size() == 3, ErrorKind::UsageError, "bad line row '" + line + "'");
    if (cells[0] == "vertical") {
      lines.push_back(Line::vertical(u, detail::parse_fraction(cells[2]).num));
    } else if (cells[0] == "slope") {
      lines.push_back(Line::slope(u, detail::parse_fraction(cells[1]), detail::parse_fraction(cells[2])));
    } else {
      fail(ErrorKind::UsageError, "unknown line kind '" + cells[0] + "'");
    }
  }
  return lines;
}

}  // namespace sumprod
