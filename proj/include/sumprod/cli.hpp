// Batch experiment driver behind the sumprod executable.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sumprod/errors.hpp"
#include "sumprod/incidence.hpp"
#include "sumprod/report.hpp"
#include "sumprod/ring.hpp"
#include "sumprod/setalg.hpp"
#include "sumprod/spectral.hpp"
#include "sumprod/zqgeom.hpp"

namespace sumprod::cli {

/// Everything a run depends on. Zero-valued size fields mean "command default";
/// resolve() fills them in so the echoed config is complete.
struct ExperimentConfig {
  std::string command;
  i64 p = 0;
  int k = 3;
  u64 seed = 1;
  unsigned workers = 1;
  u64 budget_tuples = 8'000'000'000ULL;
  double budget_seconds = 3600;
  std::string out;
  std::string format = "json";
  std::string universe;       ///< sumprod only: Z, Fp:<p>, Zq:<q>
  std::string family = "all"; ///< ap, gp, random, all
  u64 n = 0;                  ///< set size (0: command default)
  std::string x = "auto";     ///< conjecture base pair, "auto" or "a,b,c,d"
  i64 d = 1;                  ///< distance for the bisector graph
  u64 samples = 0;            ///< random cases per property (0: command default)
  u64 rows = 0;               ///< A^2 rows streamed by `spectral` (0: all)
  u64 grid = 5;               ///< Szemeredi-Trotter grid parameter
  bool sampled = false;       ///< conjecture: sample y-columns instead of the full census
  std::string graph_out;      ///< spectral: binary edge list path (sidecar at path + ".json")

  Budget budget() const { return {budget_tuples, budget_seconds}; }

  json to_json() const {
    return {{"command", command},   {"p", p},
            {"k", k},               {"seed", seed},
            {"workers", workers},   {"budget_tuples", budget_tuples},
            {"budget_seconds", budget_seconds}, {"format", format},
            {"universe", universe}, {"family", family},
            {"n", n},               {"x", x},
            {"d", d},               {"samples", samples},
            {"rows", rows},         {"grid", grid},
            {"sampled", sampled}};
  }

  /// Overwrites fields present in `j`; unknown keys are a usage error.
  void merge(const json& j) {
    require(j.is_object(), ErrorKind::UsageError, "config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      try {
        if (key == "command") command = value.get<std::string>();
        else if (key == "p") p = value.get<i64>();
        else if (key == "k") k = value.get<int>();
        else if (key == "seed") seed = value.get<u64>();
        else if (key == "workers") workers = value.get<unsigned>();
        else if (key == "budget_tuples") budget_tuples = value.get<u64>();
        else if (key == "budget_seconds") budget_seconds = value.get<double>();
        else if (key == "out") out = value.get<std::string>();
        else if (key == "format") format = value.get<std::string>();
        else if (key == "universe") universe = value.get<std::string>();
        else if (key == "family") family = value.get<std::string>();
        else if (key == "n") n = value.get<u64>();
        else if (key == "x") x = value.get<std::string>();
        else if (key == "d") d = value.get<i64>();
        else if (key == "samples") samples = value.get<u64>();
        else if (key == "rows") rows = value.get<u64>();
        else if (key == "grid") grid = value.get<u64>();
        else if (key == "sampled") sampled = value.get<bool>();
        else if (key == "graph_out") graph_out = value.get<std::string>();
        else fail(ErrorKind::UsageError, "unknown config key '" + key + "'");
      } catch (const json::exception& e) {
        fail(ErrorKind::UsageError, "config key '" + key + "': " + e.what());
      }
    }
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::UsageError, "cannot open config file " + path);
    ExperimentConfig cfg;
    try {
      cfg.merge(json::parse(in));
    } catch (const json::exception& e) {
      fail(ErrorKind::UsageError, std::string("config file is not valid JSON: ") + e.what());
    }
    return cfg;
  }
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"sumprod", "incidence", "bisectors", "conjecture", "spectral"};
  return names;
}

/// Fills command defaults and rejects invalid combinations.
inline ExperimentConfig resolve(ExperimentConfig cfg) {
  require(std::find(commands().begin(), commands().end(), cfg.command) != commands().end(), ErrorKind::UsageError,
          "unknown command '" + cfg.command + "'");
  require(cfg.format == "json" || cfg.format == "csv", ErrorKind::UsageError, "format must be json or csv");
  require(cfg.workers >= 1, ErrorKind::UsageError, "workers must be positive");
  require(cfg.budget_tuples > 0 && cfg.budget_seconds > 0, ErrorKind::UsageError, "budgets must be positive");
  require(cfg.k >= 1, ErrorKind::UsageError, "k must be positive");
  const bool zq = cfg.command == "bisectors" || cfg.command == "conjecture" || cfg.command == "spectral";
  if (cfg.command == "sumprod") {
    if (cfg.universe.empty()) cfg.universe = cfg.p == 0 ? "Z" : "Fp:" + std::to_string(cfg.p);
    require(cfg.family == "ap" || cfg.family == "gp" || cfg.family == "random" || cfg.family == "all",
            ErrorKind::UsageError, "family must be ap, gp, random or all");
    if (cfg.samples == 0) cfg.samples = 1;
  } else {
    require(cfg.universe.empty(), ErrorKind::UsageError, "--universe applies to sumprod only");
  }
  if (cfg.command == "incidence") {
    if (cfg.p == 0) cfg.p = 7;
    if (cfg.n == 0) cfg.n = 10;
    if (cfg.samples == 0) cfg.samples = 10;
  }
  if (zq) {
    if (cfg.p == 0) cfg.p = 3;
    if (cfg.samples == 0) cfg.samples = cfg.command == "conjecture" ? 1000 : 200;
  }
  if (cfg.p != 0) {
    require(cfg.p >= 3 && is_prime(cfg.p), ErrorKind::UsageError, "p must be an odd prime");
    if (zq) require(cfg.p % 4 == 3, ErrorKind::UsageError, "p must be 3 mod 4");
  }
  return cfg;
}

struct RunResult {
  int status = 1;
  ReportDocument report;
  std::string csv;  ///< CSV body when the command has one (histograms)
  std::string error;
};

namespace detail {

inline u64 draw(std::mt19937_64& rng, u64 bound) { return rng() % bound; }

inline Vec2 random_point(const ZqPlane& g, std::mt19937_64& rng) {
  return g.point(static_cast<i64>(draw(rng, static_cast<u64>(g.q() * g.q()))));
}

inline PointPair parse_base_pair(const ZqPlane& g, const std::string& spec) {
  if (spec == "auto") return {g.vec(0, 0), g.vec(1, 0)};
  std::vector<i64> v;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stoll(item));
    } catch (const std::exception&) {
      fail(ErrorKind::UsageError, "bad coordinate '" + item + "' in --x");
    }
  }
  require(v.size() == 4, ErrorKind::UsageError, "--x takes auto or four comma-separated coordinates");
  return {g.vec(v[0], v[1]), g.vec(v[2], v[3])};
}

inline std::string checks_csv(const ReportDocument& rep) {
  std::ostringstream out;
  out << "name,lhs,relation,rhs,verdict,asserted\n";
  for (const auto& c : rep.checks()) {
    out << c.name << ',' << c.lhs.dump() << ',' << c.relation << ',' << c.rhs.dump() << ','
        << (c.passed ? "pass" : "fail") << ',' << (c.asserted ? "true" : "false") << '\n';
  }
  return out.str();
}

// -- sumprod -----------------------------------------------------------------

inline void run_sumprod(const ExperimentConfig& cfg, ReportDocument& rep, const Deadline& deadline) {
  const Universe u = Universe::parse(cfg.universe);
  std::vector<std::pair<std::string, FamilyKind>> families;
  if (cfg.family == "ap" || cfg.family == "all") families.emplace_back("ap", FamilyKind::AP);
  if (cfg.family == "gp" || cfg.family == "all") families.emplace_back("gp", FamilyKind::GP);
  if (cfg.family == "random" || cfg.family == "all") families.emplace_back("random", FamilyKind::RandomSubset);
  std::vector<u64> sizes;
  if (cfg.n != 0) sizes = {cfg.n};
  else if (u.is_modular()) sizes = {8, 16, 32, 64};
  else sizes = {8, 16, 32};  // GP products over Z overflow beyond 2^31 elements
  u64 work = 0;
  for (u64 n : sizes) work += families.size() * cfg.samples * n * n * n;
  cfg.budget().check_tuples(work, "sum-product reports");

  json ratios = json::object();
  for (const auto& [fname, kind] : families) {
    for (u64 n : sizes) {
      for (u64 s = 0; s < cfg.samples; ++s) {
        deadline.check("sumprod " + fname);
        const bool random = kind == FamilyKind::RandomSubset;
        const FiniteSet a = generate_family(kind, n, FamilyParams{}, u, cfg.seed + s);
        ReportDocument sec = sum_product_report(a);
        const RepCounts sums = rep_counts(a, a, Op::Sum);
        const RepCounts prods = rep_counts(a, a, Op::Product);
        sec.check_le("trivial_sum_representation_bound", sums.max_count(), n);
        sec.check_le("trivial_product_representation_bound", prods.max_count(), n);
        sec.check_le("energy_lower_bound", n * n, sec.get("additive_energy").get<u64>());
        sec.check_le("energy_upper_bound", sec.get("additive_energy").get<u64>(), n * n * n);
        if (u.kind() == Universe::Kind::PrimeField) {
          const u64 p = static_cast<u64>(u.modulus().p());
          sec.check_le("cauchy_davenport", std::min(p, 2 * n - 1), sums.size());
        }
        if (!u.is_modular() && kind == FamilyKind::AP) sec.check_eq("ap_sumset_2n_minus_1", sums.size(), 2 * n - 1);
        if (!u.is_modular() && kind == FamilyKind::GP) sec.check_eq("gp_productset_2n_minus_1", prods.size(), 2 * n - 1);
        std::string name = fname + "_n" + std::to_string(n);
        if (random && cfg.samples > 1) name += "_s" + std::to_string(s);
        ratios[name] = {{"ratio_sum8_prod3_over_n12", sec.get("ratio_sum8_prod3_over_n12")},
                        {"ratio_sum2_prod3_over_n6", sec.get("ratio_sum2_prod3_over_n6")},
                        {"ratio_min_stevens_over_n6", sec.get("ratio_min_stevens_over_n6")},
                        {"ratio_e3_power_over_productset", sec.get("ratio_e3_power_over_productset")}};
        rep.add_section(name, sec);
        if (!random) break;  // deterministic families do not depend on the seed
      }
    }
  }
  rep.set("universe", u.tag());
  rep.set("ratios", ratios);
}

// -- incidence ---------------------------------------------------------------

inline void run_incidence(const ExperimentConfig& cfg, ReportDocument& rep, const Deadline& deadline) {
  const Universe z = Universe::integers();
  const u64 n = cfg.n;
  require(n >= 2, ErrorKind::UsageError, "incidence needs --n >= 2");
  cfg.budget().check_tuples(cfg.samples * n * n * n * n * n, "Elekes/Solymosi experiments");
  FamilyParams range;
  range.lo = 1;
  range.hi = static_cast<i64>(10 * n);

  u64 elekes_failures = 0, richness_min = std::numeric_limits<u64>::max();
  for (u64 s = 0; s < cfg.samples; ++s) {
    deadline.check("Elekes");
    const FiniteSet a = generate_family(FamilyKind::RandomSubset, n, range, z, cfg.seed + s);
    try {
      const ElekesConfig e = elekes_config(a);
      const u64 inc = incidences(e.points, e.lines, cfg.workers);
      richness_min = std::min(richness_min, e.min_line_richness);
      if (inc < n * e.lines.size()) ++elekes_failures;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::PreconditionUnmet) throw;
      ++elekes_failures;
    }
  }
  rep.set("elekes_min_line_richness", richness_min);
  rep.check_eq("elekes_failures", elekes_failures, u64{0});

  for (u64 s = 0; s < cfg.samples; ++s) {
    deadline.check("Solymosi");
    const FiniteSet a = generate_family(FamilyKind::RandomSubset, n, range, z, cfg.seed + 1000 + s);
    rep.add_section("solymosi_" + std::to_string(s), solymosi_stats(a));
  }

  deadline.check("Szemeredi-Trotter");
  rep.add_section("szemeredi_trotter", st_experiment(static_cast<i64>(cfg.grid), cfg.budget(), cfg.workers));

  // T and T° over F_p: the hashed count against the direct triple scan.
  const Universe fp = Universe::prime_field(cfg.p);
  const u64 tn = std::min<u64>(4, static_cast<u64>(cfg.p));
  u64 t_mismatch = 0, breakdown_mismatch = 0;
  json t_values = json::array();
  for (u64 s = 0; s < cfg.samples; ++s) {
    deadline.check("collinear triples");
    const FiniteSet a1 = generate_family(FamilyKind::RandomSubset, tn, {}, fp, cfg.seed + 2000 + 3 * s);
    const FiniteSet a2 = generate_family(FamilyKind::RandomSubset, tn, {}, fp, cfg.seed + 2001 + 3 * s);
    const FiniteSet a3 = generate_family(FamilyKind::RandomSubset, tn, {}, fp, cfg.seed + 2002 + 3 * s);
    const CollinearCounts c = collinear_counts(a1, a2, a3);
    if (c.all != collinear_T(a1, a2, a3, false) || c.distinct != collinear_T(a1, a2, a3, true)) ++t_mismatch;
    if (c.degenerate() != c.eq12 + c.eq13 + c.eq23 - 2 * c.eq123) ++breakdown_mismatch;
    t_values.push_back({{"T", c.all}, {"T_distinct", c.distinct}});
  }
  rep.set("collinear_counts", t_values);
  rep.check_eq("collinear_two_routes_mismatches", t_mismatch, u64{0});
  rep.check_eq("collinear_degenerate_breakdown_mismatches", breakdown_mismatch, u64{0});

  deadline.check("point-plane");
  const u64 pn = std::min<u64>(n, static_cast<u64>(cfg.p - 1));
  FamilyParams nonzero;
  nonzero.lo = 1;
  nonzero.hi = cfg.p - 1;
  std::vector<i64> values;
  {
    const FiniteSet pool = generate_family(FamilyKind::RandomSubset, pn, nonzero, z, cfg.seed + 3000);
    values.assign(pool.begin(), pool.end());
  }
  const FiniteSet a = FiniteSet(fp, values);
  cfg.budget().check_tuples(static_cast<u64>(std::pow(static_cast<double>(pn), 6)) * pn, "point-plane incidences");
  rep.add_section("point_plane", energy_plane_config(a, cfg.workers).report);
}

// -- bisectors ---------------------------------------------------------------

/// Full search over quadruples with B(x, z) = B(y, w) non-isotropic: group
/// unit-difference pairs by bisector and compare norms inside each group.
inline std::pair<u64, u64> bisector_quadruple_search(const ZqPlane& g, const Budget& budget) {
  const u64 q2 = static_cast<u64>(g.q() * g.q());
  budget.check_tuples(q2 * q2, "bisector pair grouping");
  std::unordered_map<ZqLine, std::vector<std::pair<u32, u32>>, ZqLineHash> groups;
  for (u64 i = 0; i < q2; ++i) {
    const Vec2 x = g.point(static_cast<i64>(i));
    for (u64 j = 0; j < q2; ++j) {
      const Vec2 z = g.point(static_cast<i64>(j));
      if (!unit_difference(g, x, z)) continue;
      const ZqLine l = g.bisector(x, z);
      if (g.classify_line(l) == LineClass::NonIsotropic) groups[l].emplace_back(i, j);
    }
  }
  u64 work = 0;
  for (const auto& [l, v] : groups) work += v.size() * v.size();
  budget.check_tuples(work, "equal-bisector quadruples");
  u64 tested = 0, counterexamples = 0;
  for (const auto& [l, v] : groups) {
    for (const auto& [xi, zi] : v) {
      const Vec2 x = g.point(xi), z = g.point(zi);
      for (const auto& [yi, wi] : v) {
        const Vec2 y = g.point(yi), w = g.point(wi);
        ++tested;
        if (g.norm(g.sub(x, y)) != g.norm(g.sub(z, w))) ++counterexamples;
      }
    }
  }
  return {tested, counterexamples};
}

inline void run_bisectors(const ExperimentConfig& cfg, ReportDocument& rep, const Deadline& deadline) {
  const ZqPlane g(cfg.p, cfg.k);
  const Modulus& m = g.modulus();
  const i64 p = g.p(), q = g.q();
  const u64 q2 = static_cast<u64>(q * q);
  std::mt19937_64 rng(cfg.seed);

  // Square roots: closed form against enumeration for every d.
  u64 sqrt_mismatch = 0;
  for (i64 d = 0; d < q; ++d) {
    if (sqrt_count(RingElem(d, m)) != sqrt_count_oracle(RingElem(d, m))) ++sqrt_mismatch;
  }
  rep.check_eq("sqrt_count_mismatches", sqrt_mismatch, u64{0});

  // Circles: one distance histogram per centre against the closed form.
  deadline.check("circles");
  cfg.budget().check_tuples(cfg.samples * q2, "circle histograms");
  u64 circle_mismatch = 0, distance_total = 0;
  for (u64 s = 0; s < cfg.samples; ++s) {
    const Vec2 u = random_point(g, rng);
    std::vector<u64> hist(static_cast<std::size_t>(q), 0);
    for (u64 i = 0; i < q2; ++i) ++hist[static_cast<std::size_t>(g.norm(g.sub(g.point(static_cast<i64>(i)), u)))];
    for (i64 rho = 0; rho < q; ++rho) circle_mismatch += hist[static_cast<std::size_t>(rho)] != g.circle_size(rho) ? 1 : 0;
  }
  for (i64 rho = 0; rho < q; ++rho) distance_total += g.distance_pair_count(rho);
  rep.check_eq("circle_size_mismatches", circle_mismatch, u64{0});
  rep.check_eq("distance_mass", distance_total, q2 * q2);

  // Non-isotropic lines through a point.
  deadline.check("lines");
  u64 line_mismatch = 0;
  const u64 expected_lines = static_cast<u64>(p * p * p - p * p);
  for (u64 s = 0; s < cfg.samples; ++s) {
    const Vec2 u = random_point(g, rng);
    const auto lines = g.nonisotropic_lines_through(u);
    const std::set<ZqLine> distinct(lines.begin(), lines.end());
    bool ok = lines.size() == expected_lines && distinct.size() == lines.size();
    for (const auto& l : lines) ok = ok && g.on_line(l, u) && g.classify_line(l) == LineClass::NonIsotropic;
    line_mismatch += ok ? 0 : 1;
  }
  rep.set("lines_through_point", expected_lines);
  rep.check_eq("lines_through_point_mismatches", line_mismatch, u64{0});

  // C.1: every non-isotropic line is fixed by exactly one census reflection.
  deadline.check("reflection census");
  const ReflectionCensus census = g.reflection_census(CensusScope::NonIsotropic, cfg.budget());
  const auto all_lines = g.nonisotropic_lines();
  rep.set("census_size", census.size());
  rep.set("nonisotropic_lines", all_lines.size());
  u64 fixer_not_in_census = 0, fixer_moves_line = 0;
  std::set<std::array<i64, 6>> fixers;
  for (const auto& l : all_lines) {
    const IsometryMap s = g.reflection_fixing_line(l);
    if (!census.contains(s)) ++fixer_not_in_census;
    for (const Vec2& v : g.line_points(l)) fixer_moves_line += g.apply(s, v) == v ? 0 : 1;
    fixers.insert(s.key());
  }
  rep.check_eq("fixing_reflection_in_census_failures", fixer_not_in_census, u64{0});
  rep.check_eq("fixing_reflection_moves_line_points", fixer_moves_line, u64{0});
  rep.check_eq("distinct_fixing_reflections", static_cast<u64>(fixers.size()), static_cast<u64>(all_lines.size()));
  rep.check_eq("census_equals_line_count", static_cast<u64>(census.size()), static_cast<u64>(all_lines.size()));
  const u64 exhaustive = census.size() * q2 + all_lines.size() * census.size() * static_cast<u64>(q);
  if (exhaustive <= std::min<u64>(cfg.budget_tuples, 100'000'000ULL)) {
    deadline.check("exhaustive fixing search");
    std::vector<std::vector<char>> fixed(census.size(), std::vector<char>(q2, 0));
    for (std::size_t i = 0; i < census.size(); ++i) {
      for (const Vec2& v : g.fixed_points(census.maps[i])) fixed[i][static_cast<std::size_t>(g.index(v))] = 1;
    }
    u64 wrong = 0;
    for (const auto& l : all_lines) {
      const auto pts = g.line_points(l);
      u64 count = 0;
      for (std::size_t i = 0; i < census.size(); ++i) {
        bool all = true;
        for (const Vec2& v : pts) all = all && fixed[i][static_cast<std::size_t>(g.index(v))];
        count += all ? 1 : 0;
      }
      wrong += count == 1 ? 0 : 1;
    }
    rep.check_eq("exhaustive_unique_fixer_failures", wrong, u64{0});
  }

  // C.2: the rotation about u taking x to y exists and is unique.
  deadline.check("unique rotation");
  const auto unit_circle = g.unit_circle();
  u64 rotation_failures = 0;
  for (u64 s = 0; s < cfg.samples; ++s) {
    const Vec2 u = random_point(g, rng);
    Vec2 x = random_point(g, rng);
    while (!g.is_unit(g.norm(g.sub(x, u)))) x = random_point(g, rng);
    const auto circle = g.circle(u, g.norm(g.sub(x, u)));
    const Vec2 y = circle[draw(rng, circle.size())];
    const IsometryMap f = g.unique_rotation(u, x, y);
    bool ok = g.apply(f, u) == u && g.apply(f, x) == y && f.kind == IsometryKind::Rotation;
    u64 found = 0;
    for (const auto& [a, b] : unit_circle) {
      const IsometryMap r = g.make_rotation(a, b, u);
      found += g.apply(r, x) == y ? 1 : 0;
    }
    rotation_failures += ok && found == 1 ? 0 : 1;
  }
  rep.check_eq("unique_rotation_failures", rotation_failures, u64{0});

  // C.3: a rotation taking segment xy to zw exists iff x - y != z - w.
  deadline.check("segment rotation");
  u64 segment_failures = 0;
  for (u64 s = 0; s < cfg.samples; ++s) {
    const Vec2 x = random_point(g, rng);
    Vec2 y = random_point(g, rng);
    while (!g.is_unit(g.norm(g.sub(x, y)))) y = random_point(g, rng);
    const Vec2 z = random_point(g, rng);
    Vec2 w;
    if (s % 2 == 0) {
      w = g.sub(z, g.sub(x, y));
    } else {
      const auto circle = g.circle(z, g.norm(g.sub(x, y)));
      w = circle[draw(rng, circle.size())];
    }
    if (x == z && y == w) continue;
    const auto f = g.segment_rotation(x, y, z, w);
    const bool translation_only = g.sub(x, y) == g.sub(z, w);
    bool ok = f.has_value() != translation_only;
    if (f) ok = ok && g.apply(*f, x) == z && g.apply(*f, y) == w && f->kind == IsometryKind::Rotation;
    segment_failures += ok ? 0 : 1;
  }
  rep.check_eq("segment_rotation_failures", segment_failures, u64{0});

  // Equal bisectors force equal distances: exhaustive when it fits the
  // budget, sampled through reflections otherwise.
  deadline.check("equal bisector search");
  if (q2 * q2 <= cfg.budget_tuples && p == 3) {
    const auto [tested, counterexamples] = bisector_quadruple_search(g, cfg.budget());
    rep.set("equal_bisector_quadruples", tested);
    rep.check_eq("equal_bisector_counterexamples", counterexamples, u64{0});
  } else {
    u64 counterexamples = 0;
    for (u64 s = 0; s < cfg.samples; ++s) {
      const IsometryMap refl = census.maps[draw(rng, census.size())];
      const Vec2 x = random_point(g, rng), y = random_point(g, rng);
      const Vec2 z = g.apply(refl, x), w = g.apply(refl, y);
      if (!unit_difference(g, x, z) || !unit_difference(g, y, w)) continue;
      counterexamples += g.bisector_equal_distance_check(x, y, z, w) ? 0 : 1;
    }
    rep.set("equal_bisector_quadruples", cfg.samples);
    rep.check_eq("equal_bisector_counterexamples", counterexamples, u64{0});
  }

  deadline.check("quadruple statistics");
  std::vector<Vec2> pts;
  for (int i = 0; i < 24; ++i) pts.push_back(random_point(g, rng));
  rep.add_section("quadruples", quadruple_stats(g, pts, cfg.budget()));
}

// -- conjecture --------------------------------------------------------------

inline void run_conjecture(const ExperimentConfig& cfg, ReportDocument& rep, std::string& csv,
                           const Deadline& deadline) {
  const ZqPlane g(cfg.p, cfg.k);
  const PointPair x = parse_base_pair(g, cfg.x);
  require(g.is_unit(g.norm(g.sub(x.first, x.second))), ErrorKind::UsageError, "|x1 - x2| must be a unit");
  if (!cfg.sampled && cfg.k == 3) {
    const u64 expected = static_cast<u64>(g.p() * g.p() * g.p() * g.p() * g.p() * (g.p() - 1));
    cfg.budget().check_tuples(expected * expected, "reflection pair compositions");
  }
  const ReflectionCensus census = g.reflection_census(CensusScope::NonIsotropic, cfg.budget());
  deadline.check("reflection census");
  const u64 pairs = static_cast<u64>(census.size()) * census.size();
  if (!cfg.sampled) {
    const NDistribution h = N_distribution(g, census, x, cfg.budget(), cfg.workers);
    deadline.check("N census");
    rep = compare_with_conjecture(h);
    std::ostringstream out;
    write_histogram_csv(out, h);
    csv = out.str();
    return;
  }
  // Sampled y-columns: y = S2 S1 x for random census pairs, N(x, y) by scanning S1.
  cfg.budget().check_tuples(cfg.samples * census.size(), "sampled N columns");
  std::mt19937_64 rng(cfg.seed);
  std::map<u64, u64> seen;
  std::set<i64> table_n;
  for (const auto& [n, a] : conjecture_table(g.p())) table_n.insert(n);
  u64 outside = 0;
  for (u64 s = 0; s < cfg.samples; ++s) {
    if (s % 64 == 0) deadline.check("sampled N columns");
    const IsometryMap& s1 = census.maps[draw(rng, census.size())];
    const IsometryMap& s2 = census.maps[draw(rng, census.size())];
    const IsometryMap mm = g.compose(s2, s1);
    const PointPair y{g.apply(mm, x.first), g.apply(mm, x.second)};
    const u64 n = g.N_count(census, x, y);
    ++seen[n];
    outside += table_n.contains(static_cast<i64>(n)) ? 0 : 1;
  }
  rep = ReportDocument("conjecture_sampled");
  json h = json::object();
  for (const auto& [n, c] : seen) h[std::to_string(n)] = c;
  rep.set("census_size", census.size());
  rep.set("pairs", pairs);
  rep.set("samples", cfg.samples);
  rep.set("observed_N", h);
  // Columns are drawn in proportion to N, so only membership is meaningful.
  rep.add("sampled_N_in_table", outside, 0, "==", outside == 0, false);
  std::ostringstream out;
  out << "n,count\n";
  for (const auto& [n, c] : seen) out << n << ',' << c << '\n';
  csv = out.str();
}

// -- spectral ----------------------------------------------------------------

inline void run_spectral(const ExperimentConfig& cfg, ReportDocument& rep, const Deadline& deadline) {
  const ZqPlane g(cfg.p, cfg.k);
  const i64 p = g.p();
  std::mt19937_64 rng(cfg.seed);
  const ReflectionCensus census = g.reflection_census(CensusScope::NonIsotropic, cfg.budget());
  const BisectorGraph bg = build_bisector_graph(g, cfg.d, census, cfg.budget(), cfg.workers);
  deadline.check("graph build");
  const SparseGraph& graph = bg.graph;
  const u32 nv = graph.vertex_count();
  const u64 degree = graph.regular_degree().value_or(0);
  rep.set("vertices", nv);
  rep.set("degree", degree);
  rep.set("edges", graph.edge_count());
  rep.check_eq("vertices_eq_distance_pairs", static_cast<u64>(nv), g.distance_pair_count(bg.d));
  rep.check_eq("degree_eq_census", degree, static_cast<u64>(census.size()));
  rep.check_eq("symmetric", graph.is_symmetric(), true);
  rep.check_eq("self_loops", graph.self_loops(), u64{0});

  if (!cfg.graph_out.empty()) {
    std::ofstream out(cfg.graph_out, std::ios::binary);
    require(out.good(), ErrorKind::UsageError, "cannot write " + cfg.graph_out);
    write_edge_list(out, graph);
    std::ofstream side(cfg.graph_out + ".json");
    side << graph_sidecar(graph).dump(2) << '\n';
  }

  const u64 rows = cfg.rows == 0 ? nv : std::min<u64>(cfg.rows, nv);
  cfg.budget().check_tuples(rows * degree * degree, "A^2 row streaming");
  const A2Stats a2 = a2_decomposition_bisector(graph, p, static_cast<u32>(rows), cfg.workers);
  deadline.check("A^2 decomposition");
  rep.set("a2_rows", a2.rows);
  rep.set("c_J", a2.c_j);
  rep.set("c_I", a2.c_i);
  rep.set("E_min_row_sum", a2.min_row_sum);
  rep.set("E_max_row_sum", a2.max_row_sum);
  rep.set("E_row_sum_closed_form", e_row_sum_closed_form(p));
  rep.check_eq("E_diagonal_nonzero_rows", a2.nonzero_diagonal, u64{0});
  rep.add("E_row_sum_matches_closed_form", a2.max_row_sum, e_row_sum_closed_form(p), "==",
          a2.min_row_sum == a2.max_row_sum && static_cast<i64>(a2.max_row_sum) == e_row_sum_closed_form(p), false);

  // (A^2)_xy against N(x, y) on random pairs, half of them two steps apart.
  u64 a2_mismatch = 0;
  for (u64 s = 0; s < cfg.samples; ++s) {
    const u32 xv = static_cast<u32>(draw(rng, nv));
    u32 yv = static_cast<u32>(draw(rng, nv));
    if (s % 2 == 0) {
      const auto n1 = graph.neighbors(xv);
      const u32 mid = n1[draw(rng, n1.size())];
      const auto n2 = graph.neighbors(mid);
      yv = n2[draw(rng, n2.size())];
    }
    a2_mismatch += a2_entry(graph, xv, yv) == g.N_count(census, bg.index.pair(xv), bg.index.pair(yv)) ? 0 : 1;
  }
  rep.check_eq("A2_equals_N_mismatches", a2_mismatch, u64{0});

  deadline.check("power iteration");
  PowerOptions opt;
  opt.seed = cfg.seed;
  opt.workers = cfg.workers;
  const EigenEstimate plain = second_eigenvalue(graph, opt);
  const bool bipartite = graph.bipartition().has_value();
  EigenEstimate second = plain;
  if (bipartite) {
    opt.deflate_bipartite = true;
    second = second_eigenvalue(graph, opt);
  }
  const double p5 = std::pow(static_cast<double>(p), 5);
  rep.set("bipartite", bipartite);
  rep.set("lambda_orthogonal_to_ones", plain.lambda);
  rep.set("lambda_2", second.lambda);
  rep.set("lambda_2_residual", second.residual);
  rep.set("lambda_2_iterations", second.iterations);
  rep.set("lambda_2_over_p5", second.abs_lambda / p5);
  rep.check_le("lambda_2_residual_le_tolerance", second.residual, opt.tolerance);
  rep.check_le("lambda_2_le_10_p5", second.abs_lambda, 10 * p5);
  // On 1-perp, A^2 = c_I I + E, so lambda^2 <= c_I + (max row sum of |E|).
  const double gersh = static_cast<double>(a2.c_i) + static_cast<double>(a2.max_row_sum);
  rep.add("lambda_sq_le_gershgorin", plain.abs_lambda * plain.abs_lambda, gersh, "<=",
          plain.abs_lambda * plain.abs_lambda <= gersh * (1 + 1e-9), rows == nv);

  deadline.check("mixing");
  std::vector<u32> sv, tv;
  for (u32 v = 0; v < nv; ++v) {
    const u64 r = draw(rng, 10);
    if (r == 0) sv.push_back(v);
    if (r == 1) tv.push_back(v);
  }
  rep.add_section("mixing", mixing_check(graph, sv, tv, plain.abs_lambda * (1 + 1e-9)));

  deadline.check("Cayley spectrum");
  rep.add_section("cayley", tensor_report(g, cayley_spectrum(g, g.circle({}, 1))));
}

}  // namespace detail

/// Runs one command. Library errors and usage errors become status 1 with
/// the message in `error`; a failed asserted check gives status 2.
inline RunResult run(const std::string& command, ExperimentConfig config) {
  RunResult result;
  try {
    config.command = command;
    const ExperimentConfig cfg = resolve(config);
    const Deadline deadline(cfg.budget());
    ReportDocument rep(cfg.command);
    if (cfg.command == "sumprod") detail::run_sumprod(cfg, rep, deadline);
    else if (cfg.command == "incidence") detail::run_incidence(cfg, rep, deadline);
    else if (cfg.command == "bisectors") detail::run_bisectors(cfg, rep, deadline);
    else if (cfg.command == "conjecture") detail::run_conjecture(cfg, rep, result.csv, deadline);
    else detail::run_spectral(cfg, rep, deadline);
    rep.config() = cfg.to_json();
    rep.set_wall_time(deadline.elapsed());
    if (result.csv.empty()) result.csv = detail::checks_csv(rep);
    result.status = rep.all_passed() ? 0 : 2;
    result.report = std::move(rep);
  } catch (const Error& e) {
    result.status = 1;
    result.report = ReportDocument("error");
    result.csv.clear();
    result.error = e.what();
  } catch (const std::exception& e) {
    result.status = 1;
    result.report = ReportDocument("error");
    result.csv.clear();
    result.error = std::string("UsageError: ") + e.what();
  }
  return result;
}

/// The text written to --out (or stdout).
inline std::string render(const RunResult& r, const std::string& format) {
  if (format == "csv") return r.csv;
  return r.report.to_json().dump(2) + "\n";
}

}  // namespace sumprod::cli
