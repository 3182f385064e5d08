#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "sumprod/incidence.hpp"

using namespace sumprod;

namespace {

const Universe Z = Universe::integers();

FiniteSet fset(i64 p, std::vector<i64> v) { return FiniteSet(Universe::prime_field(p), std::move(v)); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::UsageError;
}

/// All subsets of {0..p-1} with 1..max_size elements.
std::vector<FiniteSet> small_subsets(i64 p, std::size_t max_size) {
  std::vector<FiniteSet> out;
  for (u64 mask = 1; mask < (u64{1} << p); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > max_size) continue;
    std::vector<i64> v;
    for (i64 i = 0; i < p; ++i) {
      if (mask >> i & 1U) v.push_back(i);
    }
    out.emplace_back(Universe::prime_field(p), v);
  }
  return out;
}

}  // namespace

TEST(Line, CanonicalForms) {
  const Line l1 = Line::through(Z, {0, 1}, {2, 2});
  const Line l2 = Line::through(Z, {4, 3}, {-2, 0});
  EXPECT_EQ(l1, l2);
  EXPECT_EQ(l1.m(), Fraction::make(1, 2));
  EXPECT_EQ(l1.b(), Fraction::integer(1));
  EXPECT_TRUE(l1.contains({6, 4}));
  EXPECT_FALSE(l1.contains({1, 1}));
  EXPECT_EQ(Line::through(Z, {3, 1}, {3, 9}), Line::vertical(Z, 3));
  const Universe f = Universe::prime_field(7);
  EXPECT_EQ(Line::through(f, {0, 0}, {1, 3}), Line::slope(f, 10, 7));
  EXPECT_EQ(kind_of([] { Line::through(Z, {1, 1}, {1, 1}); }), ErrorKind::PreconditionUnmet);
  EXPECT_EQ(kind_of([] { Line::through(Universe::ring(3, 3), {0, 0}, {3, 1}); }), ErrorKind::UniverseMismatch);
}

TEST(Incidences, SpecExamples) {
  EXPECT_EQ(incidences(PointSet(Z, {{0, 0}}), {Line::slope(Z, 0, 0)}), 1U);
  EXPECT_EQ(incidences(PointSet(Z, {{0, 0}, {1, 1}}), {Line::slope(Z, 1, 0), Line::slope(Z, 0, 0)}), 3U);
  EXPECT_EQ(incidences(PointSet(Z), {Line::slope(Z, 1, 0)}), 0U);
  EXPECT_EQ(kind_of([] { incidences(PointSet(Z, {{0, 0}}), {Line::slope(Universe::prime_field(5), 1, 0)}); }),
            ErrorKind::UniverseMismatch);
}

TEST(Incidences, DuplicateLinesCountPerOccurrence) {
  const Line l = Line::slope(Z, 2, 1);
  EXPECT_EQ(incidences(PointSet(Z, {{0, 1}, {1, 3}}), {l, l, Line::vertical(Z, 0)}), 5U);
}

TEST(Incidences, MatchesMembershipOracle) {
  std::mt19937_64 rng(21);
  for (const Universe& u : {Z, Universe::prime_field(11)}) {
    for (int t = 0; t < 40; ++t) {
      std::vector<Point2> pts;
      for (int i = 0; i < 60; ++i) pts.push_back({static_cast<i64>(rng() % 9), static_cast<i64>(rng() % 9)});
      std::vector<Line> lines;
      for (int i = 0; i < 60; ++i) {
        if (rng() % 5 == 0) {
          lines.push_back(Line::vertical(u, static_cast<i64>(rng() % 9)));
        } else if (u.is_modular()) {
          lines.push_back(Line::slope(u, static_cast<i64>(rng() % 11), static_cast<i64>(rng() % 11)));
        } else {
          lines.push_back(Line::slope(u, Fraction::make(static_cast<i64>(rng() % 7) - 3, 1 + static_cast<i64>(rng() % 3)),
                                      Fraction::make(static_cast<i64>(rng() % 9), 1 + static_cast<i64>(rng() % 2))));
        }
      }
      const PointSet ps(u, pts);
      const u64 expected = oracle::incidences(ps, lines);
      EXPECT_EQ(incidences(ps, lines), expected);
      EXPECT_EQ(incidences(ps, lines, 3), expected);
    }
  }
}

TEST(RichLines, SpecExamples) {
  const auto one = rich_lines(PointSet(Z, {{0, 0}, {1, 1}, {2, 2}}), 3);
  ASSERT_EQ(one.size(), 1U);
  EXPECT_EQ(one[0].second, 3U);
  EXPECT_EQ(one[0].first, Line::slope(Z, 1, 0));

  std::vector<Point2> grid3;
  for (i64 x = 0; x < 3; ++x)
    for (i64 y = 0; y < 3; ++y) grid3.push_back({x, y});
  const auto lines = rich_lines(PointSet(Z, grid3), 3);
  EXPECT_EQ(lines.size(), 8U);
  EXPECT_TRUE(rich_lines(PointSet(Z, {{0, 0}, {1, 2}, {2, 1}, {3, 5}}), 3).empty());
  EXPECT_THROW(rich_lines(PointSet(Z, grid3), 1), Error);
}

TEST(RichLines, CountsRecheckByMembership) {
  std::mt19937_64 rng(4);
  for (const Universe& u : {Z, Universe::prime_field(7)}) {
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({static_cast<i64>(rng() % 7), static_cast<i64>(rng() % 7)});
    const PointSet ps(u, pts);
    const auto lines = rich_lines(ps, 2);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      EXPECT_EQ(oracle::incidences(ps, {lines[i].first}), lines[i].second);
      if (i > 0) {
        EXPECT_FALSE(lines[i - 1].first == lines[i].first);
      }
    }
  }
}

TEST(Elekes, SpecExamples) {
  const ElekesConfig c = elekes_config(FiniteSet(Z, {1, 2}));
  EXPECT_EQ(c.points.size(), 9U);
  EXPECT_EQ(c.lines.size(), 4U);
  EXPECT_GE(incidences(c.points, c.lines), 8U);
  const ElekesConfig c3 = elekes_config(FiniteSet(Z, {1, 2, 3}));
  for (const Line& l : c3.lines) EXPECT_GE(oracle::incidences(c3.points, {l}), 3U);
  EXPECT_EQ(kind_of([] { elekes_config(FiniteSet(Z, {5})); }), ErrorKind::ParamOutOfRange);
}

TEST(Elekes, IncidenceLowerBoundAndCoincidentLines) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const FiniteSet a = oracle::random_set(Z, 12, -20, 20, rng);
    if (a.size() < 2) continue;
    const ElekesConfig c = elekes_config(a);
    EXPECT_GE(incidences(c.points, c.lines), a.size() * c.lines.size());
  }
  // 0 in A: every line y = 0 (a1 = 0) coincides.
  const ElekesConfig z = elekes_config(FiniteSet(Z, {0, 1, 2}));
  EXPECT_EQ(z.lines.size(), 9U);
  EXPECT_EQ(z.distinct_lines, 7U);
}

TEST(Solymosi, SpecExamples) {
  const ReportDocument r = solymosi_stats(FiniteSet(Z, {1, 2, 4}));
  EXPECT_EQ(r.get("multiplicative_energy"), 19);
  EXPECT_TRUE(r.find_check("printed_chain_energy_le_n2i0")->passed);
  EXPECT_TRUE(r.find_check("printed_chain_n2i0_le_sumset_sq")->passed);
  EXPECT_TRUE(r.all_passed());
  // The part built from l_n and the vertical line overlaps an earlier cone.
  EXPECT_FALSE(r.find_check("all_parts_disjoint")->passed);
  EXPECT_TRUE(r.find_check("cone_parts_disjoint")->passed);
  EXPECT_EQ(kind_of([] { solymosi_stats(FiniteSet(Z, {3})); }), ErrorKind::ParamOutOfRange);
  EXPECT_EQ(kind_of([] { solymosi_stats(FiniteSet(Z, {-1, 2})); }), ErrorKind::NonPositiveElement);
}

TEST(Solymosi, ExactChainHoldsForRandomSets) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const FiniteSet a = oracle::random_set(Z, 30, 1, 100, rng);
    if (a.size() < 2) continue;
    const ReportDocument r = solymosi_stats(a);
    EXPECT_TRUE(r.all_passed()) << r.to_json().dump();
  }
}

TEST(Solymosi, PrintedChainFailsOnSpecSet) {
  // E = 236, ceil(log2 8) = 3, n 2^i0 = 6 * 8 = 48; the printed first link
  // needs 236 / 3 <= 48.
  const ReportDocument r = solymosi_stats(FiniteSet(Z, {1, 2, 3, 4, 6, 8, 9, 12}));
  EXPECT_EQ(r.get("multiplicative_energy"), 236);
  EXPECT_EQ(r.get("n"), 6);
  EXPECT_EQ(r.get("i0"), 3);
  EXPECT_FALSE(r.find_check("printed_chain_energy_le_n2i0")->passed);
  EXPECT_TRUE(r.all_passed());
}

TEST(CollinearT, SpecExamples) {
  const FiniteSet zero = fset(5, {0});
  EXPECT_EQ(collinear_T(zero, zero, zero, false), 1U);
  EXPECT_EQ(collinear_T(zero, zero, zero, true), 0U);
  const FiniteSet a = fset(5, {0, 1});
  const oracle::TCounts o = oracle::collinear(a, a, a);
  const CollinearCounts c = collinear_counts(a, a, a);
  EXPECT_EQ(c.all, o.all);
  EXPECT_EQ(c.distinct, o.distinct);
  // 4 points of a 2x2 grid: no three distinct collinear.
  EXPECT_EQ(c.distinct, 0U);
  EXPECT_EQ(c.degenerate(), c.eq12 + c.eq13 + c.eq23 - 2 * c.eq123);
  EXPECT_EQ(kind_of([] { collinear_T(fset(5, {1}), fset(7, {1}), fset(5, {1}), false); }),
            ErrorKind::UniverseMismatch);
}

TEST(CollinearT, MatchesSixLoopOracleExhaustivelyOverF5) {
  const auto subsets = small_subsets(5, 3);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 400; ++t) {
    const FiniteSet& a1 = subsets[rng() % subsets.size()];
    const FiniteSet& a2 = subsets[rng() % subsets.size()];
    const FiniteSet& a3 = subsets[rng() % subsets.size()];
    const oracle::TCounts o = oracle::collinear(a1, a2, a3);
    const CollinearCounts c = collinear_counts(a1, a2, a3);
    ASSERT_EQ(c.all, o.all);
    ASSERT_EQ(c.distinct, o.distinct);
    EXPECT_EQ(collinear_T(a1, a2, a3, false), collinear_T(a1, a3, a2, false));
  }
}

TEST(CollinearT, IntegersMatchOracle) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const FiniteSet a1 = oracle::random_set(Z, 4, -3, 3, rng);
    const FiniteSet a2 = oracle::random_set(Z, 4, -3, 3, rng);
    const FiniteSet a3 = oracle::random_set(Z, 4, -3, 3, rng);
    const oracle::TCounts o = oracle::collinear(a1, a2, a3);
    EXPECT_EQ(collinear_T(a1, a2, a3, false), o.all);
    EXPECT_EQ(collinear_T(a1, a2, a3, true), o.distinct);
  }
}

TEST(Plane, Normalization) {
  const Universe f = Universe::prime_field(5);
  const Plane p(f, 0, 2, 4, 1);
  EXPECT_EQ(p.coefficients(), (std::array<i64, 4>{0, 1, 2, 3}));
  EXPECT_EQ(Plane(f, 0, 4, 3, 2), p);
  EXPECT_EQ(kind_of([&] { Plane(f, 0, 0, 0, 1); }), ErrorKind::PreconditionUnmet);
  EXPECT_EQ(kind_of([] { Plane(Universe::integers(), 1, 0, 0, 0); }), ErrorKind::UniverseMismatch);
}

TEST(PointPlane, SpecExamples) {
  const Universe f3 = Universe::prime_field(3);
  EXPECT_EQ(point_plane_incidences(PointSet3(f3, {{0, 0, 0}}), {Plane(f3, 0, 0, 1, 0)}), 1U);
  EXPECT_EQ(point_plane_incidences(PointSet3(f3), {Plane(f3, 0, 0, 1, 0)}), 0U);

  std::vector<Point3> cube;
  for (i64 x = 0; x < 3; ++x)
    for (i64 y = 0; y < 3; ++y)
      for (i64 z = 0; z < 3; ++z) cube.push_back({x, y, z});
  const PointSet3 full(f3, cube);
  std::vector<Plane> through_origin;
  for (i64 a = 0; a < 3; ++a)
    for (i64 b = 0; b < 3; ++b)
      for (i64 c = 0; c < 3; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const Plane pl(f3, a, b, c, 0);
        if (std::find(through_origin.begin(), through_origin.end(), pl) == through_origin.end()) {
          through_origin.push_back(pl);
        }
      }
  EXPECT_EQ(through_origin.size(), 13U);
  for (const Plane& pl : through_origin) EXPECT_EQ(point_plane_incidences(full, {pl}), 9U);
  EXPECT_EQ(point_plane_incidences(full, through_origin), oracle::point_plane_incidences(full, through_origin));
}

TEST(PointPlane, MaxCollinearPlanes) {
  const Universe f3 = Universe::prime_field(3);
  EXPECT_EQ(max_collinear_planes({}), 0U);
  EXPECT_EQ(max_collinear_planes({Plane(f3, 1, 0, 0, 0)}), 1U);
  EXPECT_EQ(max_collinear_planes({Plane(f3, 1, 0, 0, 0), Plane(f3, 0, 1, 0, 0)}), 2U);
  // Pencil through the z-axis: a x + b y = 0.
  const std::vector<Plane> pencil{Plane(f3, 1, 0, 0, 0), Plane(f3, 0, 1, 0, 0), Plane(f3, 1, 1, 0, 0),
                                  Plane(f3, 1, 2, 0, 0)};
  EXPECT_EQ(max_collinear_planes(pencil), 4U);
  // Parallel planes share no line.
  EXPECT_EQ(max_collinear_planes({Plane(f3, 1, 0, 0, 0), Plane(f3, 1, 0, 0, 1)}), 1U);
  // k m incidences for the m points on the common line.
  std::vector<Point3> axis;
  for (i64 z = 0; z < 3; ++z) axis.push_back({0, 0, z});
  EXPECT_EQ(point_plane_incidences(PointSet3(f3, axis), pencil), 4U * 3U);
}

TEST(PointPlane, MaxCollinearMatchesLineScan) {
  // Oracle: for every line of F_3^3 (point + direction), count planes containing it.
  const Universe f3 = Universe::prime_field(3);
  std::mt19937_64 rng(10);
  for (int t = 0; t < 10; ++t) {
    std::vector<Plane> planes;
    for (int i = 0; i < 8; ++i) {
      i64 a = 0, b = 0, c = 0;
      while (a == 0 && b == 0 && c == 0) {
        a = static_cast<i64>(rng() % 3);
        b = static_cast<i64>(rng() % 3);
        c = static_cast<i64>(rng() % 3);
      }
      planes.emplace_back(f3, a, b, c, static_cast<i64>(rng() % 3));
    }
    u64 best = 1;
    for (i64 px = 0; px < 3; ++px)
      for (i64 py = 0; py < 3; ++py)
        for (i64 pz = 0; pz < 3; ++pz)
          for (i64 dx = 0; dx < 3; ++dx)
            for (i64 dy = 0; dy < 3; ++dy)
              for (i64 dz = 0; dz < 3; ++dz) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                std::vector<Plane> distinct;
                for (const Plane& pl : planes) {
                  bool all = true;
                  for (i64 s = 0; s < 3 && all; ++s) all = pl.contains({px + s * dx, py + s * dy, pz + s * dz});
                  if (all && std::find(distinct.begin(), distinct.end(), pl) == distinct.end()) distinct.push_back(pl);
                }
                best = std::max<u64>(best, distinct.size());
              }
    // Duplicate planes in the list count separately in max_collinear_planes;
    // compare on the deduplicated list.
    std::vector<Plane> dedup;
    for (const Plane& pl : planes) {
      if (std::find(dedup.begin(), dedup.end(), pl) == dedup.end()) dedup.push_back(pl);
    }
    EXPECT_EQ(max_collinear_planes(dedup), best);
  }
}

TEST(EnergyPlane, SpecExamples) {
  const PlaneConfig one = energy_plane_config(fset(5, {1}));
  EXPECT_EQ(one.points.size(), 1U);
  EXPECT_EQ(one.planes.size(), 1U);
  EXPECT_EQ(one.report.get("N2"), 1);
  EXPECT_TRUE(one.report.all_passed());

  const PlaneConfig two = energy_plane_config(fset(7, {1, 2}));
  EXPECT_TRUE(two.report.find_check("energy_times_size_sq_le_N2")->passed);
  EXPECT_EQ(two.report.get("N2"), oracle::point_plane_incidences(two.points, two.planes));

  const PlaneConfig three = energy_plane_config(fset(11, {1, 2, 3}));
  // Planes s x + y - t z = c with s fixed all contain a line in z = 0 once
  // c is matched to t, so k reaches |A.A| = 6 rather than |A| = 3.
  EXPECT_EQ(three.report.get("max_collinear_planes"), 6);
  EXPECT_FALSE(three.report.find_check("k_le_size")->passed);
  EXPECT_TRUE(three.report.find_check("k_le_product_set")->passed);
  EXPECT_TRUE(three.report.all_passed());
  EXPECT_EQ(kind_of([] { energy_plane_config(fset(5, {0, 1})); }), ErrorKind::ZeroElement);
}

TEST(EnergyPlane, RandomSetsPassAllChecks) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const FiniteSet a = oracle::random_set(Universe::prime_field(31), 5, 1, 30, rng);
    EXPECT_TRUE(energy_plane_config(a).report.all_passed());
  }
}

TEST(SzemerediTrotter, SmallGridsAndBudget) {
  const ReportDocument r2 = st_experiment(2);
  // Oracle count on the same configuration.
  std::vector<Point2> pts;
  for (i64 x = 1; x <= 2; ++x)
    for (i64 y = 1; y <= 8; ++y) pts.push_back({x, y});
  std::vector<Line> lines;
  for (i64 m = 1; m <= 2; ++m)
    for (i64 b = 1; b <= 4; ++b) lines.push_back(Line::slope(Z, m, b));
  EXPECT_EQ(r2.get("incidences"), oracle::incidences(PointSet(Z, pts), lines));
  EXPECT_EQ(r2.get("incidences"), 16);  // n^4
  EXPECT_EQ(kind_of([] { st_experiment(1); }), ErrorKind::ParamOutOfRange);
  Budget tight;
  tight.max_tuples = 100;
  EXPECT_EQ(kind_of([&] { st_experiment(8, tight); }), ErrorKind::ResourceLimit);

  const double r8 = st_experiment(8).get("ratio").get<double>();
  const double r16 = st_experiment(16).get("ratio").get<double>();
  EXPECT_LT(std::max(r8, r16) / std::min(r8, r16), 2.0);
}

TEST(IncidenceIO, CsvRoundTrip) {
  const PointSet pts(Z, {{1, 2}, {-3, 4}});
  std::stringstream sp;
  write_points_csv(sp, pts);
  EXPECT_EQ(sp.str(), "kind,x,y\npoint,-3,4\npoint,1,2\n");
  EXPECT_EQ(read_points_csv(sp, Z).points(), pts.points());

  const std::vector<Line> lines{Line::slope(Z, Fraction::make(1, 2), Fraction::make(-3, 4)), Line::vertical(Z, 7)};
  std::stringstream sl;
  write_lines_csv(sl, lines);
  EXPECT_EQ(sl.str(), "kind,m,b\nslope,1/2,-3/4\nvertical,,7\n");
  const auto back = read_lines_csv(sl, Z);
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[0], lines[0]);
  EXPECT_EQ(back[1], lines[1]);

  std::stringstream bad("kind,x,y\nline,1,2\n");
  EXPECT_EQ(kind_of([&] { read_points_csv(bad, Z); }), ErrorKind::UsageError);
}
