#pragma once

// Geometry of Z_q^2 with q = p^3 and p = 3 mod 4: norms, circles,
// perpendicular bisectors, isometries, and the reflection-pair census N(x, y).

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sumprod/errors.hpp"
#include "sumprod/parallel.hpp"
#include "sumprod/report.hpp"
#include "sumprod/ring.hpp"

namespace sumprod {

/// A point of Z_q^2; coordinates are canonical residues of the owning plane.
struct Vec2 {
  i64 x1 = 0;
  i64 x2 = 0;
  friend auto operator<=>(const Vec2&, const Vec2&) = default;
};

struct Vec2Hash {
  std::size_t operator()(const Vec2& v) const noexcept {
    return std::hash<i64>{}(v.x1 * 0x9E3779B1LL + v.x2);
  }
};

using PointPair = std::pair<Vec2, Vec2>;

struct PointPairHash {
  std::size_t operator()(const PointPair& y) const noexcept {
    return Vec2Hash{}(y.first) * 31U ^ Vec2Hash{}(y.second);
  }
};

enum class LineClass { NonIsotropic, Isotropic };

/// a x1 + b x2 = c, scaled so the first unit among (a, b) is 1.
struct ZqLine {
  i64 a = 0;
  i64 b = 0;
  i64 c = 0;
  friend auto operator<=>(const ZqLine&, const ZqLine&) = default;
};

struct ZqLineHash {
  std::size_t operator()(const ZqLine& l) const noexcept {
    std::size_t h = std::hash<i64>{}(l.a);
    h = h * 1000003U ^ std::hash<i64>{}(l.b);
    return h * 1000003U ^ std::hash<i64>{}(l.c);
  }
};

enum class IsometryKind { Rotation, Reflection, Translation };

inline std::string to_string(IsometryKind k) {
  switch (k) {
    case IsometryKind::Rotation: return "rotation";
    case IsometryKind::Reflection: return "reflection";
    case IsometryKind::Translation: return "translation";
  }
  return "?";
}

/// v -> M v + t. M is stored row-major as {m00, m01, m10, m11}.
struct IsometryMap {
  std::array<i64, 4> m{1, 0, 0, 1};
  Vec2 t;
  IsometryKind kind = IsometryKind::Rotation;

  std::array<i64, 6> key() const { return {m[0], m[1], m[2], m[3], t.x1, t.x2}; }
  friend bool operator==(const IsometryMap& a, const IsometryMap& b) { return a.key() == b.key(); }
};

struct IsometryKeyHash {
  std::size_t operator()(const std::array<i64, 6>& k) const noexcept {
    std::size_t h = 0;
    for (i64 v : k) h = h * 1000003U ^ std::hash<i64>{}(v);
    return h;
  }
};

enum class CensusScope { NonIsotropic, All };

/// Duplicate-free list of reflection maps plus a membership index.
struct ReflectionCensus {
  CensusScope scope = CensusScope::NonIsotropic;
  std::vector<IsometryMap> maps;
  std::unordered_set<std::array<i64, 6>, IsometryKeyHash> index;
  u64 candidates = 0;  ///< (matrix, center) presentations before dedupe

  std::size_t size() const noexcept { return maps.size(); }
  bool contains(const IsometryMap& m) const { return index.contains(m.key()); }
};

/// The plane Z_q^2, q = p^k. Most lemmas need k = 3; the constructor only
/// insists on p = 3 mod 4.
class ZqPlane {
 public:
  explicit ZqPlane(i64 p, int k = 3) : mod_(p, k) { mod_.require_3_mod_4(); }

  const Modulus& modulus() const noexcept { return mod_; }
  i64 p() const noexcept { return mod_.p(); }
  i64 q() const noexcept { return mod_.q(); }

  Vec2 vec(i64 a, i64 b) const { return {mod_.reduce(a), mod_.reduce(b)}; }
  Vec2 add(Vec2 u, Vec2 v) const { return {mod_.add(u.x1, v.x1), mod_.add(u.x2, v.x2)}; }
  Vec2 sub(Vec2 u, Vec2 v) const { return {mod_.sub(u.x1, v.x1), mod_.sub(u.x2, v.x2)}; }
  bool is_unit(i64 a) const { return mod_.is_unit(a); }

  /// Point with linear index i in [0, q^2).
  Vec2 point(i64 i) const { return {i / q(), i % q()}; }
  i64 index(Vec2 v) const { return v.x1 * q() + v.x2; }

  i64 norm(Vec2 v) const { return mod_.add(mod_.mul(v.x1, v.x1), mod_.mul(v.x2, v.x2)); }

  // -- circles --------------------------------------------------------------

  std::vector<Vec2> circle(Vec2 u, i64 rho) const {
    rho = mod_.reduce(rho);
    std::vector<Vec2> out;
    for (i64 a = 0; a < q(); ++a) {
      for (i64 b = 0; b < q(); ++b) {
        if (norm({a, b}) == rho) out.push_back(add(u, {a, b}));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Closed form for |C_rho(u)| when q = p^3.
  u64 circle_size(i64 rho) const {
    require_cube();
    const i64 pp = p();
    switch (mod_.valuation(rho)) {
      case 0: return static_cast<u64>(pp * pp * pp + pp * pp);
      case 1: return 0;
      case 2: return static_cast<u64>(pp * pp * pp + pp * pp);
      default: return static_cast<u64>(pp * pp);
    }
  }

  /// Number of ordered pairs (u1, u2) with |u1 - u2| = rho.
  u64 distance_pair_count(i64 rho) const {
    return static_cast<u64>(q() * q()) * circle_size(rho);
  }

  // -- lines ------------------------------------------------------------------

  ZqLine make_line(i64 a, i64 b, i64 c) const {
    a = mod_.reduce(a);
    b = mod_.reduce(b);
    c = mod_.reduce(c);
    require(is_unit(a) || is_unit(b), ErrorKind::PreconditionUnmet,
            "line needs a unit coefficient: " + std::to_string(a) + "," + std::to_string(b));
    const i64 s = mod_.inv(is_unit(a) ? a : b);
    return {mod_.mul(a, s), mod_.mul(b, s), mod_.mul(c, s)};
  }

  bool on_line(const ZqLine& l, Vec2 v) const {
    return mod_.add(mod_.mul(l.a, v.x1), mod_.mul(l.b, v.x2)) == l.c;
  }

  std::vector<Vec2> line_points(const ZqLine& l) const {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(q()));
    for (i64 s = 0; s < q(); ++s) {
      if (l.a == 1) {
        out.push_back({mod_.sub(l.c, mod_.mul(l.b, s)), s});
      } else {
        out.push_back({s, mod_.sub(l.c, mod_.mul(l.a, s))});
      }
    }
    return out;
  }

  LineClass classify_line(const ZqLine& l) const {
    const bool non_iso = is_unit(l.a) && is_unit(l.b) && is_unit(mod_.add(mod_.mul(l.a, l.a), mod_.mul(l.b, l.b)));
    return non_iso ? LineClass::NonIsotropic : LineClass::Isotropic;
  }

  /// B(x, y) = {z : |z - x| = |z - y|} as the line 2(y - x).z = |y| - |x|.
  ZqLine bisector(Vec2 x, Vec2 y) const {
    require(!(x == y), ErrorKind::PreconditionUnmet, "bisector of a point with itself");
    const i64 a = mod_.mul(2, mod_.sub(y.x1, x.x1));
    const i64 b = mod_.mul(2, mod_.sub(y.x2, x.x2));
    require(is_unit(a) || is_unit(b), ErrorKind::DegenerateBisector, "bisector has no unit coefficient");
    return make_line(a, b, mod_.sub(norm(y), norm(x)));
  }

  /// Non-isotropic lines u + t(1, s), s a unit; sorted and deduplicated.
  std::vector<ZqLine> nonisotropic_lines_through(Vec2 u) const {
    std::vector<ZqLine> out;
    for (i64 s = 0; s < q(); ++s) {
      if (!is_unit(s)) continue;
      // normal (-s, 1)
      const ZqLine l = make_line(mod_.neg(s), 1, mod_.add(mod_.mul(mod_.neg(s), u.x1), u.x2));
      if (classify_line(l) == LineClass::NonIsotropic) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// All non-isotropic lines (a = 1, b a unit).
  std::vector<ZqLine> nonisotropic_lines() const {
    std::vector<ZqLine> out;
    for (i64 b = 0; b < q(); ++b) {
      if (!is_unit(b)) continue;
      for (i64 c = 0; c < q(); ++c) {
        const ZqLine l{1, b, c};
        if (classify_line(l) == LineClass::NonIsotropic) out.push_back(l);
      }
    }
    return out;
  }

  // -- isometries ---------------------------------------------------------------

  /// (a, b) with a^2 + b^2 = 1.
  std::vector<std::pair<i64, i64>> unit_circle() const {
    std::vector<std::pair<i64, i64>> out;
    for (i64 a = 0; a < q(); ++a) {
      for (i64 b = 0; b < q(); ++b) {
        if (norm({a, b}) == 1) out.emplace_back(a, b);
      }
    }
    return out;
  }

  Vec2 apply(const IsometryMap& f, Vec2 v) const {
    return {mod_.add(mod_.add(mod_.mul(f.m[0], v.x1), mod_.mul(f.m[1], v.x2)), f.t.x1),
            mod_.add(mod_.add(mod_.mul(f.m[2], v.x1), mod_.mul(f.m[3], v.x2)), f.t.x2)};
  }

  /// Rotation [[a,-b],[b,a]] about center u.
  IsometryMap make_rotation(i64 a, i64 b, Vec2 center = {}) const {
    require(norm({mod_.reduce(a), mod_.reduce(b)}) == 1, ErrorKind::NotOnUnitCircle, "a^2 + b^2 != 1");
    return about_center({mod_.reduce(a), mod_.neg(b), mod_.reduce(b), mod_.reduce(a)}, center);
  }

  /// Reflection [[a,b],[b,-a]] about center u.
  IsometryMap make_reflection(i64 a, i64 b, Vec2 center = {}) const {
    require(norm({mod_.reduce(a), mod_.reduce(b)}) == 1, ErrorKind::NotOnUnitCircle, "a^2 + b^2 != 1");
    return about_center({mod_.reduce(a), mod_.reduce(b), mod_.reduce(b), mod_.neg(a)}, center);
  }

  IsometryMap make_translation(Vec2 t) const {
    IsometryMap f;
    f.t = vec(t.x1, t.x2);
    f.kind = classify({1, 0, 0, 1}, f.t);
    return f;
  }

  /// outer o inner.
  IsometryMap compose(const IsometryMap& outer, const IsometryMap& inner) const {
    const auto& a = outer.m;
    const auto& b = inner.m;
    IsometryMap f;
    f.m = {mod_.add(mod_.mul(a[0], b[0]), mod_.mul(a[1], b[2])), mod_.add(mod_.mul(a[0], b[1]), mod_.mul(a[1], b[3])),
           mod_.add(mod_.mul(a[2], b[0]), mod_.mul(a[3], b[2])), mod_.add(mod_.mul(a[2], b[1]), mod_.mul(a[3], b[3]))};
    f.t = apply(outer, inner.t);
    f.kind = classify(f.m, f.t);
    return f;
  }

  /// Kind from the matrix shape. The identity map counts as a rotation.
  IsometryKind classify(const std::array<i64, 4>& m, Vec2 t) const {
    if (m == std::array<i64, 4>{1, 0, 0, 1}) return t == Vec2{} ? IsometryKind::Rotation : IsometryKind::Translation;
    if (m[0] == m[3] && m[1] == mod_.neg(m[2])) return IsometryKind::Rotation;
    require(mod_.add(m[0], m[3]) == 0 && m[1] == m[2], ErrorKind::PreconditionUnmet, "matrix is not an isometry");
    return IsometryKind::Reflection;
  }

  /// The reflection fixing a non-isotropic line pointwise.
  IsometryMap reflection_fixing_line(const ZqLine& l) const {
    require(classify_line(l) == LineClass::NonIsotropic, ErrorKind::IsotropicLine, "line is isotropic");
    const Vec2 u1 = line_points(l)[0];
    const i64 d1 = mod_.neg(l.b), d2 = l.a;  // direction of l
    const i64 s = mod_.inv(mod_.add(mod_.mul(d1, d1), mod_.mul(d2, d2)));
    const i64 diag = mod_.mul(s, mod_.sub(mod_.mul(d1, d1), mod_.mul(d2, d2)));
    const i64 off = mod_.mul(s, mod_.mul(2, mod_.mul(d1, d2)));
    return about_center({diag, off, off, mod_.neg(diag)}, u1);
  }

  /// The rotation about u taking x to y (|x - u| = |y - u| a unit).
  IsometryMap unique_rotation(Vec2 u, Vec2 x, Vec2 y) const {
    const Vec2 X = sub(x, u), Y = sub(y, u);
    require(is_unit(norm(X)), ErrorKind::NonUnitRadius, "radius is not a unit");
    require(norm(X) == norm(Y), ErrorKind::NormMismatch, "|x - u| != |y - u|");
    const auto [a, b] = rotation_taking(X, Y);
    return make_rotation(a, b, u);
  }

  /// The rotation taking x -> z and y -> w, or nothing when x - y = z - w
  /// (then only a translation does).
  std::optional<IsometryMap> segment_rotation(Vec2 x, Vec2 y, Vec2 z, Vec2 w) const {
    require(!(x == z && y == w), ErrorKind::PreconditionUnmet, "(x, y) = (z, w)");
    const Vec2 X = sub(x, y), Z = sub(z, w);
    require(norm(X) == norm(Z), ErrorKind::NormMismatch, "|x - y| != |z - w|");
    require(is_unit(norm(X)), ErrorKind::NonUnitDistance, "|x - y| is not a unit");
    if (X == Z) return std::nullopt;
    const auto [a, b] = rotation_taking(X, Z);
    IsometryMap f = make_rotation(a, b);
    f.t = sub(z, apply(f, x));
    f.kind = classify(f.m, f.t);
    return f;
  }

  /// Probe for the equal-bisector lemma: B(x,z) = B(y,w) non-isotropic
  /// implies |x - y| = |z - w|.
  bool bisector_equal_distance_check(Vec2 x, Vec2 y, Vec2 z, Vec2 w) const {
    if (x == z && y == w) return true;
    require(!(x == z) && !(y == w), ErrorKind::PreconditionUnmet, "bisector of a point with itself");
    std::optional<ZqLine> l1, l2;
    try {
      l1 = bisector(x, z);
      l2 = bisector(y, w);
    } catch (const Error&) {
      fail(ErrorKind::PreconditionUnmet, "degenerate bisector");
    }
    require(*l1 == *l2 && classify_line(*l1) == LineClass::NonIsotropic, ErrorKind::PreconditionUnmet,
            "bisectors differ or are isotropic");
    return norm(sub(x, y)) == norm(sub(z, w));
  }

  // -- reflection census -----------------------------------------------------------

  /// Every reflection v -> S(v - u) + u as a distinct affine map. The default
  /// scope keeps reflections whose fixed line is non-isotropic.
  ReflectionCensus reflection_census(CensusScope scope = CensusScope::NonIsotropic, const Budget& budget = {}) const {
    const auto circle1 = unit_circle();
    budget.check_tuples(static_cast<u64>(circle1.size()) * static_cast<u64>(q() * q()), "reflection census");
    ReflectionCensus census;
    census.scope = scope;
    for (const auto& [a, b] : circle1) {
      if (scope == CensusScope::NonIsotropic && !fixes_nonisotropic_direction(a, b)) continue;
      for (i64 i = 0; i < q() * q(); ++i) {
        const IsometryMap f = make_reflection(a, b, point(i));
        ++census.candidates;
        if (census.index.insert(f.key()).second) census.maps.push_back(f);
      }
    }
    std::sort(census.maps.begin(), census.maps.end(), [](const auto& l, const auto& r) { return l.key() < r.key(); });
    return census;
  }

  /// Fixed point set of a map, for small q.
  std::vector<Vec2> fixed_points(const IsometryMap& f) const {
    std::vector<Vec2> out;
    for (i64 i = 0; i < q() * q(); ++i) {
      if (apply(f, point(i)) == point(i)) out.push_back(point(i));
    }
    return out;
  }

  /// N(x, y) by scanning all ordered census pairs.
  u64 N_count_census(const ReflectionCensus& r, const PointPair& x, const PointPair& y) const {
    u64 count = 0;
    for (const auto& s1 : r.maps) {
      const Vec2 z1 = apply(s1, x.first), z2 = apply(s1, x.second);
      for (const auto& s2 : r.maps) {
        if (apply(s2, z1) == y.first && apply(s2, z2) == y.second) ++count;
      }
    }
    return count;
  }

  /// N(x, y) by scanning S1 and solving for S2.
  u64 N_count(const ReflectionCensus& r, const PointPair& x, const PointPair& y) const {
    u64 count = 0;
    std::vector<std::pair<i64, i64>> matrices;
    const Vec2 Y = sub(y.first, y.second);
    for (const auto& s1 : r.maps) {
      const Vec2 z1 = apply(s1, x.first), z2 = apply(s1, x.second);
      const Vec2 D = sub(z1, z2);
      const i64 det = norm(D);
      if (is_unit(det)) {
        // [[D1, D2], [-D2, D1]] (a, b) = (Y1, Y2)
        const i64 inv = mod_.inv(det);
        const i64 a = mod_.mul(inv, mod_.sub(mod_.mul(D.x1, Y.x1), mod_.mul(D.x2, Y.x2)));
        const i64 b = mod_.mul(inv, mod_.add(mod_.mul(D.x2, Y.x1), mod_.mul(D.x1, Y.x2)));
        if (norm({a, b}) != 1) continue;
        count += reflection_hits(r, a, b, z1, z2, y) ? 1 : 0;
      } else {
        if (matrices.empty()) matrices = census_matrices(r);
        for (const auto& [a, b] : matrices) count += reflection_hits(r, a, b, z1, z2, y) ? 1 : 0;
      }
    }
    return count;
  }

  /// f(M): number of ordered census pairs (S1, S2) with S2 o S1 = M.
  std::unordered_map<std::array<i64, 6>, u64, IsometryKeyHash> composition_multiplicity(
      const ReflectionCensus& r, const Budget& budget = {}, unsigned workers = 1) const {
    const u64 n = r.size();
    budget.check_tuples(n * n, "reflection pair compositions");
    using Map = std::unordered_map<std::array<i64, 6>, u64, IsometryKeyHash>;
    auto parts = map_blocks(r.maps.size(), workers, [&](std::size_t begin, std::size_t end) {
      Map local;
      for (std::size_t i = begin; i < end; ++i) {
        for (const auto& s2 : r.maps) ++local[compose(s2, r.maps[i]).key()];
      }
      return local;
    });
    Map total = std::move(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      for (const auto& [k, c] : parts[i]) total[k] += c;
    }
    return total;
  }

  // -- internals ------------------------------------------------------------------

 private:
  void require_cube() const {
    require(mod_.k() == 3, ErrorKind::ParamOutOfRange, "closed form needs q = p^3");
  }

  IsometryMap about_center(std::array<i64, 4> m, Vec2 u) const {
    IsometryMap f;
    f.m = m;
    f.t = {0, 0};
    f.t = sub(u, apply(f, u));
    f.kind = classify(f.m, f.t);
    return f;
  }

  /// (a, b) with [[a,-b],[b,a]] X = Y, for |X| = |Y| a unit.
  std::pair<i64, i64> rotation_taking(Vec2 X, Vec2 Y) const {
    const i64 inv = mod_.inv(norm(X));
    return {mod_.mul(inv, mod_.add(mod_.mul(X.x1, Y.x1), mod_.mul(X.x2, Y.x2))),
            mod_.mul(inv, mod_.sub(mod_.mul(X.x1, Y.x2), mod_.mul(X.x2, Y.x1)))};
  }

  /// Whether the +1 eigendirection of [[a,b],[b,-a]] has two unit coordinates.
  bool fixes_nonisotropic_direction(i64 a, i64 b) const {
    Vec2 d{mod_.add(1, a), b};
    if (!is_unit(d.x1) && !is_unit(d.x2)) d = {b, mod_.sub(1, a)};
    return is_unit(d.x1) && is_unit(d.x2);
  }

  std::vector<std::pair<i64, i64>> census_matrices(const ReflectionCensus& r) const {
    std::vector<std::pair<i64, i64>> out;
    for (const auto& f : r.maps) out.emplace_back(f.m[0], f.m[1]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool reflection_hits(const ReflectionCensus& r, i64 a, i64 b, Vec2 z1, Vec2 z2, const PointPair& y) const {
    IsometryMap s;
    s.m = {a, b, b, mod_.neg(a)};
    s.t = {0, 0};
    s.t = sub(y.first, apply(s, z1));
    s.kind = IsometryKind::Reflection;
    return apply(s, z2) == y.second && r.contains(s);
  }

  Modulus mod_;
};

// ---------------------------------------------------------------------------
// N distribution.

/// Histogram n -> A_x(n) for a fixed pair x. Bins with n > 0 count
/// distinct images y; zero_all and zero_restricted are the N = 0 counts over
/// all of (Z_q^2)^2 and over pairs at distance |x1 - x2|.
struct NDistribution {
  i64 p = 0;
  PointPair x;
  std::map<u64, u64> hist;
  u64 census_size = 0;
  u64 skipped_degenerate = 0;
  u64 zero_all = 0;
  u64 zero_restricted = 0;
  u64 distinct_y = 0;

  u64 mass() const {
    u64 m = 0;
    for (const auto& [n, c] : hist) m += n * c;
    return m;
  }
};

inline NDistribution N_distribution(const ZqPlane& g, const ReflectionCensus& r, const PointPair& x,
                                    const Budget& budget = {}, unsigned workers = 1) {
  const i64 d = g.norm(g.sub(x.first, x.second));
  require(g.is_unit(d), ErrorKind::NonUnitDistance, "|x1 - x2| must be a unit");
  const auto f = g.composition_multiplicity(r, budget, workers);
  std::unordered_map<PointPair, u64, PointPairHash> by_y;
  for (const auto& [key, mult] : f) {
    IsometryMap m;
    m.m = {key[0], key[1], key[2], key[3]};
    m.t = {key[4], key[5]};
    by_y[{g.apply(m, x.first), g.apply(m, x.second)}] += mult;
  }
  NDistribution out;
  out.p = g.p();
  out.x = x;
  out.census_size = r.size();
  out.distinct_y = by_y.size();
  for (const auto& [y, n] : by_y) ++out.hist[n];
  const u64 q = static_cast<u64>(g.q());
  out.zero_all = q * q * q * q - out.distinct_y;
  out.zero_restricted = g.distance_pair_count(d) - out.distinct_y;
  return out;
}

/// The conjectured table (n, A_x(n)) for general p.
inline std::vector<std::pair<i64, i64>> conjecture_table(i64 p) {
  const auto pw = [p](int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r *= p;
    return r;
  };
  return {{pw(3) - 3 * pw(2), pw(9) - pw(8)},
          {pw(3) - pw(2), pw(8)},
          {pw(3), pw(8) - 2 * pw(7) + pw(6)},
          {pw(4) - pw(3), pw(6) - pw(5)},
          {pw(4), pw(5) - 2 * pw(4) + pw(3)},
          {pw(5) - pw(4), pw(3) - pw(2)},
          {pw(5), pw(2) - 2 * p + 1},
          {pw(6) - pw(5), 1}};
}

inline json to_json(const NDistribution& h) {
  json a = json::object();
  for (const auto& [n, c] : h.hist) a[std::to_string(n)] = c;
  return {{"p", h.p},
          {"x", {{h.x.first.x1, h.x.first.x2}, {h.x.second.x1, h.x.second.x2}}},
          {"A", a},
          {"census_size", h.census_size},
          {"skipped_degenerate", h.skipped_degenerate},
          {"A0_all_pairs", h.zero_all},
          {"A0_equal_distance_pairs", h.zero_restricted}};
}

/// CSV with columns n,count. The n = 0 row uses the equal-distance domain.
inline void write_histogram_csv(std::ostream& out, const NDistribution& h) {
  out << "n,count\n";
  out << 0 << ',' << h.zero_restricted << '\n';
  for (const auto& [n, c] : h.hist) out << n << ',' << c << '\n';
}

/// Compares a histogram with the conjectured table. Bins whose n collides
/// with another bin or with 0 are reported, not asserted.
inline ReportDocument compare_with_conjecture(const NDistribution& h) {
  ReportDocument rep("conjecture");
  rep.set("distribution", to_json(h));
  const auto table = conjecture_table(h.p);
  std::map<i64, int> multiplicity;
  for (const auto& [n, a] : table) ++multiplicity[n];
  for (const auto& [n, expected] : table) {
    const std::string name = "A_x(" + std::to_string(n) + ")";
    if (n == 0 || multiplicity[n] > 1) {
      rep.add(name, h.zero_restricted, expected, "==", static_cast<i64>(h.zero_restricted) == expected, false);
      continue;
    }
    const auto it = h.hist.find(static_cast<u64>(n));
    const u64 got = it == h.hist.end() ? 0 : it->second;
    rep.check_eq(name, got, static_cast<u64>(expected));
  }
  u64 extra = 0;
  for (const auto& [n, c] : h.hist) {
    if (!multiplicity.contains(static_cast<i64>(n))) extra += c;
  }
  rep.check_eq("mass_outside_table", extra, u64{0});
  const u64 q = static_cast<u64>(h.p * h.p * h.p);
  u64 total = h.zero_all;
  for (const auto& [n, c] : h.hist) total += c;
  rep.check_eq("total_y_mass", total, q * q * q * q);
  rep.check_eq("pair_mass", h.mass(), static_cast<u64>(h.census_size) * h.census_size);
  rep.set("A0_all_pairs", h.zero_all);
  rep.set("A0_equal_distance_pairs", h.zero_restricted);
  return rep;
}

// ---------------------------------------------------------------------------
// Point families in Z_q^2.

/// B(P) over ordered pairs of P~ with multiplicities w(l).
struct BisectorFamily {
  std::map<ZqLine, u64> w;
  u64 pairs = 0;               ///< |P~|
  u64 skipped_degenerate = 0;  ///< ordered pairs x != y outside P~

  u64 weight_square_sum() const {
    u64 s = 0;
    for (const auto& [l, c] : w) s += c * c;
    return s;
  }
};

inline bool unit_difference(const ZqPlane& g, Vec2 x, Vec2 y) {
  const Vec2 d = g.sub(x, y);
  return g.is_unit(d.x1) && g.is_unit(d.x2);
}

inline BisectorFamily bisector_family(const ZqPlane& g, const std::vector<Vec2>& pts) {
  BisectorFamily fam;
  for (const Vec2& x : pts) {
    for (const Vec2& y : pts) {
      if (x == y) continue;
      if (!unit_difference(g, x, y)) {
        ++fam.skipped_degenerate;
        continue;
      }
      ++fam.pairs;
      ++fam.w[g.bisector(x, y)];
    }
  }
  return fam;
}

/// |P~|, |Pi'_d|, |Q'_d|, |Q'| and the Cauchy-Schwarz chain for B(P).
inline ReportDocument quadruple_stats(const ZqPlane& g, std::vector<Vec2> pts, const Budget& budget = {}) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const u64 n = pts.size();
  budget.check_tuples(n * n * n * n, "quadruple statistics");
  std::unordered_set<PointPair, PointPairHash> tilde;
  std::map<i64, u64> pi_d;
  for (const Vec2& x : pts) {
    for (const Vec2& y : pts) {
      if (x == y || !unit_difference(g, x, y)) continue;
      tilde.insert({x, y});
      ++pi_d[g.norm(g.sub(x, y))];
    }
  }
  // (x, z) grouped by the non-isotropic bisector B(x, z).
  std::map<ZqLine, std::vector<std::pair<Vec2, Vec2>>> groups;
  for (const Vec2& x : pts) {
    for (const Vec2& z : pts) {
      if (x == z || !unit_difference(g, x, z)) continue;
      const ZqLine l = g.bisector(x, z);
      if (g.classify_line(l) == LineClass::NonIsotropic) groups[l].emplace_back(x, z);
    }
  }
  std::map<i64, u64> q_d;
  u64 q_all = 0;
  for (const auto& [line, members] : groups) {
    for (const auto& [x, z] : members) {
      for (const auto& [y, w] : members) {
        if (!tilde.contains({x, y}) || !tilde.contains({z, w})) continue;
        ++q_all;
        const i64 dxy = g.norm(g.sub(x, y));
        if (dxy == g.norm(g.sub(z, w))) ++q_d[dxy];
      }
    }
  }
  const BisectorFamily fam = bisector_family(g, pts);

  ReportDocument rep("quadruples");
  rep.set("points", n);
  rep.set("P_tilde", tilde.size());
  json pj = json::object(), qj = json::object();
  for (const auto& [d, c] : pi_d) pj[std::to_string(d)] = c;
  for (const auto& [d, c] : q_d) qj[std::to_string(d)] = c;
  rep.set("Pi_d", pj);
  rep.set("Q_d", qj);
  rep.set("Q", q_all);
  rep.set("bisector_lines", fam.w.size());
  rep.set("weight_square_sum", fam.weight_square_sum());
  rep.set("skipped_degenerate", fam.skipped_degenerate);
  u64 q_d_total = 0;
  for (const auto& [d, c] : q_d) q_d_total += c;
  rep.check_eq("sum_Q_d_eq_Q", q_d_total, q_all);
  rep.check_eq("sum_w_eq_P_tilde", fam.pairs, static_cast<u64>(tilde.size()));
  rep.check_le("cauchy_schwarz_bisectors", fam.pairs * fam.pairs,
               static_cast<u64>(fam.w.size()) * fam.weight_square_sum());
  return rep;
}

}  // namespace sumprod
