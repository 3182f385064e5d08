#pragma once

// Sparse graphs, the bisector pair graph, A^2 row statistics, Gershgorin
// discs, power-iteration eigenvalue estimates, Cayley spectra on Z_q^2 and
// expander-mixing checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sumprod/errors.hpp"
#include "sumprod/parallel.hpp"
#include "sumprod/report.hpp"
#include "sumprod/zqgeom.hpp"

namespace sumprod {

using u32 = std::uint32_t;

/// Undirected graph in CSR form with sorted neighbor lists. A self-loop
/// appears once in its vertex's list.
class SparseGraph {
 public:
  SparseGraph() = default;

  static SparseGraph from_adjacency(std::vector<std::vector<u32>> adj) {
    SparseGraph g;
    g.offsets_.assign(1, 0);
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      for (u32 v : row) require(v < adj.size(), ErrorKind::ParamOutOfRange, "neighbor id out of range");
      g.targets_.insert(g.targets_.end(), row.begin(), row.end());
      g.offsets_.push_back(g.targets_.size());
    }
    return g;
  }

  /// Each {u, v} is added in both directions.
  static SparseGraph from_edges(u32 n, const std::vector<std::pair<u32, u32>>& edges) {
    std::vector<std::vector<u32>> adj(n);
    for (const auto& [u, v] : edges) {
      require(u < n && v < n, ErrorKind::ParamOutOfRange, "edge endpoint out of range");
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    return from_adjacency(std::move(adj));
  }

  static SparseGraph complete(u32 n) {
    std::vector<std::vector<u32>> adj(n);
    for (u32 u = 0; u < n; ++u) {
      for (u32 v = 0; v < n; ++v) {
        if (u != v) adj[u].push_back(v);
      }
    }
    return from_adjacency(std::move(adj));
  }

  static SparseGraph cycle(u32 n) {
    std::vector<std::pair<u32, u32>> edges;
    for (u32 u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
    return from_edges(n, edges);
  }

  u32 vertex_count() const noexcept { return offsets_.empty() ? 0 : static_cast<u32>(offsets_.size() - 1); }
  u64 degree(u32 v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const u32> neighbors(u32 v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  bool adjacent(u32 u, u32 v) const {
    const auto n = neighbors(u);
    return std::binary_search(n.begin(), n.end(), v);
  }

  /// Undirected edge count, loops counted once.
  u64 edge_count() const {
    return (targets_.size() + self_loops()) / 2;
  }

  u64 self_loops() const {
    u64 c = 0;
    for (u32 v = 0; v < vertex_count(); ++v) c += adjacent(v, v) ? 1 : 0;
    return c;
  }

  bool is_symmetric() const {
    for (u32 u = 0; u < vertex_count(); ++u) {
      for (u32 v : neighbors(u)) {
        if (!adjacent(v, u)) return false;
      }
    }
    return true;
  }

  std::optional<u64> regular_degree() const {
    if (vertex_count() == 0) return std::nullopt;
    const u64 d = degree(0);
    for (u32 v = 1; v < vertex_count(); ++v) {
      if (degree(v) != d) return std::nullopt;
    }
    return d;
  }

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y, unsigned workers = 1) const {
    for_blocks(vertex_count(), workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t u = begin; u < end; ++u) {
        double s = 0;
        for (u32 v : neighbors(static_cast<u32>(u))) s += x[v];
        y[u] = s;
      }
    });
  }

  /// Two-colouring when the graph is bipartite.
  std::optional<std::vector<int>> bipartition() const {
    std::vector<int> colour(vertex_count(), -1);
    std::queue<u32> todo;
    for (u32 s = 0; s < vertex_count(); ++s) {
      if (colour[s] >= 0) continue;
      colour[s] = 0;
      todo.push(s);
      while (!todo.empty()) {
        const u32 u = todo.front();
        todo.pop();
        for (u32 v : neighbors(u)) {
          if (colour[v] < 0) {
            colour[v] = 1 - colour[u];
            todo.push(v);
          } else if (colour[v] == colour[u]) {
            return std::nullopt;
          }
        }
      }
    }
    return colour;
  }

  /// Optional per-vertex payload (bisector graph: x1, x2 coordinates).
  std::vector<std::array<i64, 4>>& payload() { return payload_; }
  const std::vector<std::array<i64, 4>>& payload() const { return payload_; }

 private:
  std::vector<u64> offsets_;
  std::vector<u32> targets_;
  std::vector<std::array<i64, 4>> payload_;
};

// ---------------------------------------------------------------------------
// The pair graph on V = {(x1, x2) : |x1 - x2| = d}.

/// Vertex lookup for pairs of Z_q^2 points; dense over (Z_q^2)^2.
class PairIndex {
 public:
  PairIndex(const ZqPlane& g, i64 d) : q2_(g.q() * g.q()) {
    const u64 cells = static_cast<u64>(q2_) * static_cast<u64>(q2_);
    require(cells <= (u64{1} << 30), ErrorKind::ResourceLimit, "pair index over (Z_q^2)^2 is too large");
    ids_.assign(cells, kNone);
    for (i64 i = 0; i < q2_; ++i) {
      const Vec2 x1 = g.point(i);
      for (i64 j = 0; j < q2_; ++j) {
        if (g.norm(g.sub(x1, g.point(j))) != d) continue;
        ids_[static_cast<u64>(i * q2_ + j)] = static_cast<u32>(pairs_.size());
        pairs_.emplace_back(x1, g.point(j));
      }
    }
    plane_q_ = g.q();
  }

  static constexpr u32 kNone = ~u32{0};

  std::size_t size() const noexcept { return pairs_.size(); }
  const PointPair& pair(u32 id) const { return pairs_[id]; }
  u32 id(const PointPair& x) const {
    return ids_[static_cast<u64>((x.first.x1 * plane_q_ + x.first.x2) * q2_ + x.second.x1 * plane_q_ + x.second.x2)];
  }

 private:
  i64 q2_;
  i64 plane_q_ = 0;
  std::vector<u32> ids_;
  std::vector<PointPair> pairs_;
};

struct BisectorGraph {
  SparseGraph graph;
  PairIndex index;
  i64 d = 0;
};

/// x ~ y iff y = S(x) for a reflection S fixing a non-isotropic line
/// (equivalently B(x1, y1) = B(x2, y2) = that line when x moves).
inline BisectorGraph build_bisector_graph(const ZqPlane& g, i64 d, const ReflectionCensus& census,
                                          const Budget& budget = {}, unsigned workers = 1) {
  d = g.modulus().reduce(d);
  require(g.is_unit(d), ErrorKind::NonUnitDistance, "graph distance must be a unit");
  require(census.scope == CensusScope::NonIsotropic, ErrorKind::PreconditionUnmet,
          "bisector graph uses the non-isotropic reflection census");
  const u64 vertices_estimate = g.distance_pair_count(d);
  budget.check_tuples(vertices_estimate * census.size(), "bisector graph build");
  PairIndex index(g, d);
  const u32 n = static_cast<u32>(index.size());
  std::vector<std::vector<u32>> adj(n);
  for_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const PointPair& x = index.pair(static_cast<u32>(v));
      auto& row = adj[v];
      row.reserve(census.size());
      for (const auto& s : census.maps) row.push_back(index.id({g.apply(s, x.first), g.apply(s, x.second)}));
    }
  });
  SparseGraph graph = SparseGraph::from_adjacency(std::move(adj));
  const auto deg = graph.regular_degree();
  require(deg && *deg == census.size(), ErrorKind::PreconditionUnmet, "bisector graph is not census-regular");
  graph.payload().reserve(n);
  for (u32 v = 0; v < n; ++v) {
    const auto& [a, b] = index.pair(v);
    graph.payload().push_back({a.x1, a.x2, b.x1, b.x2});
  }
  return {std::move(graph), std::move(index), d};
}

// ---------------------------------------------------------------------------
// A^2 = cJ J + cI I + E, streamed row by row.

struct A2Stats {
  u64 rows = 0;
  i64 c_j = 0;
  i64 c_i = 0;
  u64 min_row_sum = 0;
  u64 max_row_sum = 0;
  u64 nonzero_diagonal = 0;       ///< rows with E_xx != 0
  std::map<u64, u64> first_row;   ///< value -> count over row 0 of A^2
};

/// Row statistics for the first `max_rows` rows (0 = all).
inline A2Stats a2_decomposition(const SparseGraph& g, i64 c_j, i64 c_i, u32 max_rows = 0, unsigned workers = 1) {
  const u32 n = g.vertex_count();
  const u32 rows = max_rows == 0 ? n : std::min(max_rows, n);
  struct Partial {
    u64 lo = std::numeric_limits<u64>::max();
    u64 hi = 0;
    u64 bad_diag = 0;
    std::map<u64, u64> first;
  };
  const auto parts = map_blocks(rows, workers, [&](std::size_t begin, std::size_t end) {
    Partial part;
    std::vector<u32> counts(n, 0);
    std::vector<u32> touched;
    for (std::size_t r = begin; r < end; ++r) {
      const u32 x = static_cast<u32>(r);
      touched.clear();
      for (u32 z : g.neighbors(x)) {
        for (u32 y : g.neighbors(z)) {
          if (counts[y]++ == 0) touched.push_back(y);
        }
      }
      // Untouched entries contribute |0 - c_j| each.
      i64 sum = static_cast<i64>(n - touched.size()) * std::abs(c_j);
      if (counts[x] == 0) sum += std::abs(c_j + c_i) - std::abs(c_j);
      for (u32 y : touched) sum += std::abs(static_cast<i64>(counts[y]) - c_j - (y == x ? c_i : 0));
      const i64 diag = static_cast<i64>(counts[x]) - c_j - c_i;
      if (diag != 0) ++part.bad_diag;
      part.lo = std::min(part.lo, static_cast<u64>(sum));
      part.hi = std::max(part.hi, static_cast<u64>(sum));
      if (x == 0) {
        part.first[0] = n - touched.size();
        for (u32 y : touched) ++part.first[counts[y]];
      }
      for (u32 y : touched) counts[y] = 0;
    }
    return part;
  });
  A2Stats out;
  out.rows = rows;
  out.c_j = c_j;
  out.c_i = c_i;
  out.min_row_sum = std::numeric_limits<u64>::max();
  for (const auto& part : parts) {
    out.min_row_sum = std::min(out.min_row_sum, part.lo);
    out.max_row_sum = std::max(out.max_row_sum, part.hi);
    out.nonzero_diagonal += part.bad_diag;
    for (const auto& [k, c] : part.first) out.first_row[k] += c;
  }
  return out;
}

/// |A^2_xy| by sorted neighbor-list intersection.
inline u64 a2_entry(const SparseGraph& g, u32 x, u32 y) {
  const auto a = g.neighbors(x), b = g.neighbors(y);
  u64 c = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

/// The closed-form E row sum used with the conjectured N table.
inline i64 e_row_sum_closed_form(i64 p) {
  const auto pw = [p](int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r *= p;
    return r;
  };
  return 2 * pw(2) * pw(8) + 3 * pw(2) * (pw(8) - 2 * pw(7) + pw(6)) +
         (pw(4) - 2 * pw(3) + 3 * pw(2)) * (pw(6) - pw(5)) +
         (pw(4) - pw(3) + 3 * pw(2)) * (pw(5) - 2 * pw(4) + pw(3)) +
         (pw(5) - pw(4) - pw(3) + 3 * pw(2)) * (pw(3) - pw(2)) +
         (pw(5) - pw(3) + 3 * pw(2)) * (pw(2) - 2 * p + 1) +
         (pw(3) - 3 * pw(2)) * (2 * pw(7) - 2 * pw(6) + 2 * pw(4) - 2 * pw(3) + 2 * p - 2);
}

inline A2Stats a2_decomposition_bisector(const SparseGraph& g, i64 p, u32 max_rows = 0, unsigned workers = 1) {
  const i64 p2 = p * p, p3 = p2 * p, p5 = p3 * p2, p6 = p3 * p3;
  return a2_decomposition(g, p3 - 3 * p2, p6 - p5 - p3 + 3 * p2, max_rows, workers);
}

// ---------------------------------------------------------------------------
// Gershgorin discs.

struct GershgorinDiscs {
  std::vector<i64> centers;
  std::vector<i64> radii;  ///< off-diagonal absolute row sums
  i64 bound = 0;           ///< max_i |a_ii| + r_i

  bool contains(double lambda) const {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (std::abs(lambda - static_cast<double>(centers[i])) <= static_cast<double>(radii[i]) + 1e-9) return true;
    }
    return false;
  }
};

inline GershgorinDiscs gershgorin_bound(const std::vector<std::vector<i64>>& m) {
  GershgorinDiscs out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    require(m[i].size() == m.size(), ErrorKind::NonSquare, "matrix is not square");
    i64 r = 0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j != i) r += std::abs(m[i][j]);
    }
    out.centers.push_back(m[i][i]);
    out.radii.push_back(r);
    out.bound = std::max(out.bound, std::abs(m[i][i]) + r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Power iteration.

struct EigenEstimate {
  double abs_lambda = 0;
  double lambda = 0;  ///< signed eigenvalue of the extracted eigenvector
  double residual = 0;
  u64 iterations = 0;
  bool bipartite_deflated = false;
};

struct PowerOptions {
  double tolerance = 1e-6;
  u64 max_iterations = 5000;
  u64 seed = 1;
  bool deflate_bipartite = false;
  unsigned workers = 1;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    const double c = dot(v, b) / dot(b, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
  }
}

inline double normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0) {
    for (double& x : v) x /= n;
  }
  return n;
}

}  // namespace detail

/// Dominant |lambda| of A on the complement of the all-ones vector (and of
/// the bipartition sign vector when requested), by power iteration on A^2.
/// The reported residual is ||A u - lambda u|| / ||u|| for an extracted
/// eigenvector u of A.
inline EigenEstimate second_eigenvalue(const SparseGraph& g, const PowerOptions& opt = {}) {
  const u32 n = g.vertex_count();
  require(n >= 2, ErrorKind::ParamOutOfRange, "graph needs at least two vertices");
  require(g.regular_degree().has_value(), ErrorKind::PreconditionUnmet, "second_eigenvalue needs a regular graph");
  std::vector<std::vector<double>> basis{std::vector<double>(n, 1.0)};
  EigenEstimate est;
  if (opt.deflate_bipartite) {
    if (const auto colour = g.bipartition()) {
      std::vector<double> sign(n);
      for (u32 v = 0; v < n; ++v) sign[v] = (*colour)[v] == 0 ? 1.0 : -1.0;
      basis.push_back(std::move(sign));
      est.bipartite_deflated = true;
    }
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n), av(n), a2v(n), u(n), au(n);
  for (double& x : v) x = dist(rng);
  detail::project_out(v, basis);
  require(detail::normalize(v) > 0, ErrorKind::NonConvergence, "start vector vanished after deflation");

  for (u64 it = 1; it <= opt.max_iterations; ++it) {
    g.multiply(v, av, opt.workers);
    g.multiply(av, a2v, opt.workers);
    detail::project_out(a2v, basis);
    const double mu = detail::dot(v, a2v);  // Rayleigh quotient of A^2
    const double lambda = std::sqrt(std::max(mu, 0.0));
    // (A - l)(A + l) v ~ 0: (A + l) v has eigenvalue +l, (A - l) v has -l.
    double best_res = std::numeric_limits<double>::infinity();
    double best_sign = 1;
    for (double sign : {1.0, -1.0}) {
      for (u32 i = 0; i < n; ++i) u[i] = av[i] + sign * lambda * v[i];
      const double un = std::sqrt(detail::dot(u, u));
      if (un < 1e-8) continue;
      g.multiply(u, au, opt.workers);
      double r2 = 0;
      for (u32 i = 0; i < n; ++i) {
        const double e = au[i] - sign * lambda * u[i];
        r2 += e * e;
      }
      const double res = std::sqrt(r2) / un;
      if (res < best_res) {
        best_res = res;
        best_sign = sign;
      }
    }
    if (lambda < 1e-12) {
      best_res = std::sqrt(detail::dot(av, av));
      best_sign = 1;
    }
    est.abs_lambda = lambda;
    est.lambda = best_sign * lambda;
    est.residual = best_res;
    est.iterations = it;
    if (best_res < opt.tolerance) return est;
    v = a2v;
    if (detail::normalize(v) == 0) {
      est.abs_lambda = est.lambda = 0;
      est.residual = 0;
      return est;
    }
  }
  fail(ErrorKind::NonConvergence, "power iteration did not reach residual " + std::to_string(opt.tolerance) +
                                      " (last " + std::to_string(est.residual) + ")");
}

/// Largest eigenvalue of A by power iteration on A + D I, D the max degree.
inline EigenEstimate largest_eigenvalue(const SparseGraph& g, const PowerOptions& opt = {}) {
  const u32 n = g.vertex_count();
  require(n >= 1, ErrorKind::ParamOutOfRange, "empty graph");
  double shift = 0;
  for (u32 v = 0; v < n; ++v) shift = std::max(shift, static_cast<double>(g.degree(v)));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<double> v(n), av(n);
  for (double& x : v) x = dist(rng);
  detail::normalize(v);
  EigenEstimate est;
  for (u64 it = 1; it <= opt.max_iterations; ++it) {
    g.multiply(v, av, opt.workers);
    const double lambda = detail::dot(v, av);
    double r2 = 0;
    for (u32 i = 0; i < n; ++i) r2 += (av[i] - lambda * v[i]) * (av[i] - lambda * v[i]);
    est = {std::abs(lambda), lambda, std::sqrt(r2), it, false};
    if (est.residual < opt.tolerance) return est;
    for (u32 i = 0; i < n; ++i) v[i] = av[i] + shift * v[i];
    detail::normalize(v);
  }
  fail(ErrorKind::NonConvergence, "power iteration for the top eigenvalue did not converge");
}

// ---------------------------------------------------------------------------
// Cayley graphs on Z_q^2.

struct CayleySpectrum {
  std::vector<double> eigenvalues;  ///< indexed by character h = (h1, h2), h1 * q + h2
  u64 degree = 0;
  u64 exact_trace = 0;     ///< q^2 * [0 in S]
  u64 exact_trace_sq = 0;  ///< q^2 * |{(s, s') : s + s' = 0}|

  double sum() const { return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0); }
  double sum_sq() const {
    double s = 0;
    for (double l : eigenvalues) s += l * l;
    return s;
  }
  /// max |lambda_chi| over non-trivial characters.
  double max_nontrivial() const {
    double m = 0;
    for (std::size_t i = 1; i < eigenvalues.size(); ++i) m = std::max(m, std::abs(eigenvalues[i]));
    return m;
  }
};

/// lambda_chi = sum_{s in S} cos(2 pi h.s / q) for every character h.
inline CayleySpectrum cayley_spectrum(const ZqPlane& g, std::vector<Vec2> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  const Modulus& m = g.modulus();
  for (const Vec2& v : s) {
    require(std::binary_search(s.begin(), s.end(), Vec2{m.neg(v.x1), m.neg(v.x2)}), ErrorKind::AsymmetricConnectionSet,
            "connection set is not closed under negation");
  }
  const i64 q = g.q();
  std::vector<double> cosines(static_cast<std::size_t>(q));
  for (i64 k = 0; k < q; ++k) cosines[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(q));
  CayleySpectrum out;
  out.degree = s.size();
  out.eigenvalues.resize(static_cast<std::size_t>(q * q));
  for (i64 h = 0; h < q * q; ++h) {
    const Vec2 hv = g.point(h);
    double l = 0;
    for (const Vec2& v : s) l += cosines[m.add(m.mul(hv.x1, v.x1), m.mul(hv.x2, v.x2))];
    out.eigenvalues[h] = l;
  }
  const u64 q2 = static_cast<u64>(q * q);
  out.exact_trace = std::binary_search(s.begin(), s.end(), Vec2{}) ? q2 : 0;
  out.exact_trace_sq = q2 * s.size();
  return out;
}

/// Spectrum facts of the tensor square (the graph on pairs whose both
/// coordinates step through S).
inline ReportDocument tensor_report(const ZqPlane& g, const CayleySpectrum& sp, double tolerance = 1e-6) {
  ReportDocument rep("cayley");
  const double top = *std::max_element(sp.eigenvalues.begin(), sp.eigenvalues.end());
  const double p = static_cast<double>(g.p());
  const u64 trivial_bound = static_cast<u64>((p * p * p + p * p) * (p * p * p + p * p));
  const double max_nt = sp.max_nontrivial();
  rep.set("degree", sp.degree);
  rep.set("lambda_max", top);
  rep.set("trace", sp.sum());
  rep.set("trace_sq", sp.sum_sq());
  rep.set("max_nontrivial", max_nt);
  rep.set("tensor_degree", sp.degree * sp.degree);
  rep.set("tensor_max_nontrivial", static_cast<double>(sp.degree) * max_nt);
  rep.set("tensor_max_both_nontrivial", max_nt * max_nt);
  rep.set("tensor_trivial_bound", trivial_bound);
  rep.set("tensor_gap_ratio", static_cast<double>(sp.degree) * max_nt / static_cast<double>(trivial_bound));
  const double scale = static_cast<double>(sp.exact_trace_sq) + 1.0;
  rep.add("lambda_max_eq_degree", top, sp.degree, "==", std::abs(top - static_cast<double>(sp.degree)) < tolerance);
  rep.add("trace_identity", sp.sum(), sp.exact_trace, "==",
          std::abs(sp.sum() - static_cast<double>(sp.exact_trace)) < tolerance * scale);
  rep.add("trace_sq_identity", sp.sum_sq(), sp.exact_trace_sq, "==",
          std::abs(sp.sum_sq() - static_cast<double>(sp.exact_trace_sq)) < tolerance * scale);
  rep.check_le("tensor_nontrivial_le_trivial_bound", static_cast<double>(sp.degree) * max_nt,
               static_cast<double>(trivial_bound));
  return rep;
}

// ---------------------------------------------------------------------------
// Expander mixing.

inline ReportDocument mixing_check(const SparseGraph& g, const std::vector<u32>& s, const std::vector<u32>& t,
                                   double lambda) {
  const auto deg = g.regular_degree();
  require(deg.has_value(), ErrorKind::PreconditionUnmet, "mixing check needs a regular graph");
  std::vector<char> in_t(g.vertex_count(), 0);
  for (u32 v : t) in_t[v] = 1;
  u64 edges = 0;
  for (u32 u : s) {
    for (u32 v : g.neighbors(u)) edges += in_t[v] ? 1 : 0;
  }
  const double expected = static_cast<double>(*deg) * static_cast<double>(s.size()) * static_cast<double>(t.size()) /
                          static_cast<double>(g.vertex_count());
  const double deviation = std::abs(static_cast<double>(edges) - expected);
  const double bound = lambda * std::sqrt(static_cast<double>(s.size()) * static_cast<double>(t.size()));
  ReportDocument rep("mixing");
  rep.set("S", s.size());
  rep.set("T", t.size());
  rep.set("edges", edges);
  rep.set("expected", expected);
  rep.set("lambda", lambda);
  rep.set("slack", bound - deviation);
  rep.add("expander_mixing", deviation, bound, "<=", deviation <= bound + 1e-9 * (1.0 + bound));
  return rep;
}

// ---------------------------------------------------------------------------
// Edge-list I/O: u32 little-endian pairs (u <= v, each edge once) and a
// JSON sidecar.

inline void write_edge_list(std::ostream& out, const SparseGraph& g) {
  const auto put = [&out](u32 x) {
    const char bytes[4] = {static_cast<char>(x & 0xFF), static_cast<char>((x >> 8) & 0xFF),
                           static_cast<char>((x >> 16) & 0xFF), static_cast<char>((x >> 24) & 0xFF)};
    out.write(bytes, 4);
  };
  for (u32 u = 0; u < g.vertex_count(); ++u) {
    for (u32 v : g.neighbors(u)) {
      if (u <= v) {
        put(u);
        put(v);
      }
    }
  }
}

inline json graph_sidecar(const SparseGraph& g) {
  json side = {{"schema", ReportDocument::kSchema}, {"vertices", g.vertex_count()}, {"edges", g.edge_count()}};
  if (const auto d = g.regular_degree()) side["degree"] = *d;
  if (!g.payload().empty()) {
    json payload = json::array();
    for (const auto& p : g.payload()) payload.push_back(p);
    side["payload"] = std::move(payload);
  }
  return side;
}

inline SparseGraph read_edge_list(std::istream& in, const json& sidecar) {
  const u32 n = sidecar.at("vertices").get<u32>();
  std::vector<std::pair<u32, u32>> edges;
  unsigned char buf[8];
  while (in.read(reinterpret_cast<char*>(buf), 8)) {
    const auto get = [&buf](int o) {
      return static_cast<u32>(buf[o]) | static_cast<u32>(buf[o + 1]) << 8 | static_cast<u32>(buf[o + 2]) << 16 |
             static_cast<u32>(buf[o + 3]) << 24;
    };
    edges.emplace_back(get(0), get(4));
  }
  require(in.gcount() == 0, ErrorKind::UsageError, "truncated edge list");
  SparseGraph g = SparseGraph::from_edges(n, edges);
  if (sidecar.contains("payload")) {
    for (const auto& p : sidecar["payload"]) g.payload().push_back(p.get<std::array<i64, 4>>());
  }
  return g;
}

}  // namespace sumprod
