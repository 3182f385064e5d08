// Acceptance runner: `acceptance N` evaluates criterion N (1-11) and prints
// one PASS/FAIL line; with no argument every criterion runs in turn.

#include <bit>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sumprod/cli.hpp"

using namespace sumprod;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

std::vector<FiniteSet> subsets_up_to(const Universe& u, std::size_t max_size) {
  const i64 p = u.size();
  std::vector<FiniteSet> out;
  for (u64 mask = 1; mask < (u64{1} << p); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > max_size) continue;
    std::vector<i64> v;
    for (i64 i = 0; i < p; ++i) {
      if (mask >> i & 1U) v.push_back(i);
    }
    out.emplace_back(u, v);
  }
  return out;
}

void criterion_1(Outcome& o) {
  u64 checked = 0;
  for (i64 p : {3, 7, 11}) {
    const Modulus m(p, 3);
    for (i64 d = 0; d < m.q(); ++d) {
      const RingElem e(d, m);
      o.expect(sqrt_count(e) == sqrt_count_oracle(e), "sqrt_count p=" + std::to_string(p) + " d=" + std::to_string(d));
      ++checked;
    }
  }
  o.detail << checked << " residues checked";
}

void criterion_2(Outcome& o) {
  std::mt19937_64 rng(2);
  for (i64 p : {3, 7}) {
    const ZqPlane g(p);
    const i64 q = g.q();
    for (int s = 0; s < 50; ++s) {
      const Vec2 u = oracle::random_point(g, rng);
      std::vector<u64> hist(static_cast<std::size_t>(q), 0);
      for (i64 i = 0; i < q * q; ++i) ++hist[static_cast<std::size_t>(g.norm(g.sub(g.point(i), u)))];
      for (i64 rho = 0; rho < q; ++rho) {
        o.expect(hist[static_cast<std::size_t>(rho)] == g.circle_size(rho),
                 "circle p=" + std::to_string(p) + " rho=" + std::to_string(rho));
      }
    }
    // Spot-check the enumerating circle() against the histogram route.
    const Vec2 u = oracle::random_point(g, rng);
    for (i64 rho : {i64{0}, i64{1}, p, p * p, q - 1}) {
      o.expect(g.circle(u, rho).size() == g.circle_size(rho), "circle() p=" + std::to_string(p));
    }
    u64 total = 0;
    for (i64 rho = 0; rho < q; ++rho) total += g.distance_pair_count(rho);
    const u64 q2 = static_cast<u64>(q * q);
    o.expect(total == q2 * q2, "sum of D over rho at p=" + std::to_string(p));
    o.detail << "p=" << p << " sum D=" << total << "; ";
  }
}

void criterion_3(Outcome& o) {
  std::mt19937_64 rng(3);
  for (i64 p : {3, 7}) {
    const ZqPlane g(p);
    const u64 expected = static_cast<u64>(p * p * p - p * p);
    const i64 count = p == 3 ? g.q() * g.q() : 60;
    for (i64 i = 0; i < count; ++i) {
      const Vec2 u = p == 3 ? g.point(i) : oracle::random_point(g, rng);
      const auto lines = g.nonisotropic_lines_through(u);
      const std::set<ZqLine> distinct(lines.begin(), lines.end());
      bool ok = lines.size() == expected && distinct.size() == expected;
      for (const auto& l : lines) ok = ok && g.on_line(l, u) && g.classify_line(l) == LineClass::NonIsotropic;
      o.expect(ok, "lines through a point at p=" + std::to_string(p));
    }
    o.detail << "p=" << p << ": " << count << " points, " << expected << " lines each; ";
  }
}

void criterion_4(Outcome& o) {
  const ZqPlane g(3);
  const i64 q2 = g.q() * g.q();
  std::mt19937_64 rng(4);

  // C.1 over every reflection presentation, isotropic ones included.
  const ReflectionCensus all = g.reflection_census(CensusScope::All);
  const auto lines = g.nonisotropic_lines();
  std::vector<std::vector<char>> fixed(all.size(), std::vector<char>(static_cast<std::size_t>(q2), 0));
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (i64 v = 0; v < q2; ++v) fixed[i][static_cast<std::size_t>(v)] = g.apply(all.maps[i], g.point(v)) == g.point(v);
  }
  u64 bad_lines = 0;
  for (const auto& l : lines) {
    const auto pts = g.line_points(l);
    u64 fixers = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      bool ok = true;
      for (const Vec2& v : pts) ok = ok && fixed[i][static_cast<std::size_t>(g.index(v))];
      fixers += ok ? 1 : 0;
    }
    bad_lines += fixers == 1 ? 0 : 1;
  }
  o.expect(bad_lines == 0, "C.1: " + std::to_string(bad_lines) + " lines without a unique fixer");
  o.detail << "C.1 " << lines.size() << " lines vs " << all.size() << " reflections; ";

  // C.2 against the exhaustive rotation search.
  for (int s = 0; s < 1000; ++s) {
    const Vec2 u = oracle::random_point(g, rng);
    Vec2 x = oracle::random_point(g, rng);
    while (!g.is_unit(g.norm(g.sub(x, u)))) x = oracle::random_point(g, rng);
    const auto circle = g.circle(u, g.norm(g.sub(x, u)));
    const Vec2 y = circle[rng() % circle.size()];
    const auto found = oracle::rotations_about(g, u, x, y);
    o.expect(found.size() == 1 && found[0].key() == g.unique_rotation(u, x, y).key(), "C.2 unique rotation");
  }
  o.detail << "C.2 1000 cases; ";

  // C.3: no rotation exactly when x - y = z - w.
  u64 none = 0;
  for (int s = 0; s < 600; ++s) {
    const Vec2 x = oracle::random_point(g, rng);
    Vec2 y = oracle::random_point(g, rng);
    while (!g.is_unit(g.norm(g.sub(x, y)))) y = oracle::random_point(g, rng);
    const Vec2 z = oracle::random_point(g, rng);
    Vec2 w;
    if (s % 3 == 0) {
      w = g.sub(z, g.sub(x, y));
    } else {
      const auto circle = g.circle(z, g.norm(g.sub(x, y)));
      w = circle[rng() % circle.size()];
    }
    if (x == z && y == w) continue;
    const auto f = g.segment_rotation(x, y, z, w);
    const auto found = oracle::rotations_mapping(g, {x, y}, {z, w});
    const bool parallel = g.sub(x, y) == g.sub(z, w);
    none += f ? 0 : 1;
    o.expect(f.has_value() != parallel, "C.3 NoRotation iff x - y = z - w");
    o.expect(f ? found.size() == 1 && found[0].key() == f->key() : found.empty(), "C.3 against exhaustive search");
  }
  o.detail << "C.3 600 cases (" << none << " translation-only); ";

  const auto [tested, counterexamples] = cli::detail::bisector_quadruple_search(g, Budget{});
  o.expect(counterexamples == 0, "equal bisectors with unequal distances");
  o.detail << "equal-bisector quadruples " << tested << ", counterexamples " << counterexamples;
}

void criterion_5(Outcome& o) {
  cli::ExperimentConfig c;
  c.p = 3;
  c.workers = 8;
  const auto r = cli::run("conjecture", c);
  o.expect(r.status == 0, "conjecture exit status " + std::to_string(r.status) + " " + r.error);
  if (r.status == 1) return;
  const json a = r.report.get("distribution")["A"];
  const std::vector<std::pair<std::string, u64>> bins{{"18", 6561}, {"27", 2916}, {"54", 486}, {"81", 108},
                                                      {"162", 18},  {"243", 4},   {"486", 1}};
  for (const auto& [n, v] : bins) o.expect(a.contains(n) && a[n].get<u64>() == v, "A_x(" + n + ")");
  o.expect(a.size() == bins.size(), "no bins beyond the table");
  o.expect(r.report.find_check("total_y_mass")->passed, "total y mass");
  o.expect(r.report.find_check("pair_mass")->passed, "pair mass");
  o.detail << "A_x(0) over equal-distance pairs = " << r.report.get("A0_equal_distance_pairs")
           << ", over all pairs = " << r.report.get("A0_all_pairs");
}

void criterion_6(Outcome& o) {
  cli::ExperimentConfig c;
  c.p = 3;
  c.samples = 1000;
  const auto r = cli::run("spectral", c);
  o.expect(r.status == 0, "spectral exit status " + std::to_string(r.status) + " " + r.error);
  if (r.status == 1) return;
  o.expect(r.report.get("vertices") == 26244, "|V| = 26244");
  o.expect(r.report.get("degree") == 486, "486-regular");
  for (const char* name : {"vertices_eq_distance_pairs", "degree_eq_census", "symmetric", "A2_equals_N_mismatches",
                           "E_diagonal_nonzero_rows", "lambda_2_residual_le_tolerance", "lambda_2_le_10_p5"}) {
    const auto* chk = r.report.find_check(name);
    o.expect(chk != nullptr && chk->passed, name);
  }
  o.detail << "lambda_2 = " << r.report.get("lambda_2") << " (residual " << r.report.get("lambda_2_residual")
           << "), C = lambda_2 / p^5 = " << r.report.get("lambda_2_over_p5");
}

void criterion_7(Outcome& o) {
  const ZqPlane g(3);
  const auto circle = g.circle({}, 1);
  const CayleySpectrum sp = cayley_spectrum(g, circle);
  const ReportDocument rep = tensor_report(g, sp);
  o.expect(circle.size() == 36 && sp.degree == 36, "|C_1(0)| = 36");
  o.expect(rep.all_passed(), "Cayley checks");
  o.expect(sp.exact_trace == 0 && sp.exact_trace_sq == 729U * 36U, "exact traces");
  o.expect(rep.get("tensor_degree") == 1296, "tensor degree 1296");
  o.detail << "lambda_max=" << rep.get("lambda_max") << " trace=" << rep.get("trace")
           << " trace_sq=" << rep.get("trace_sq") << " tensor_degree=" << rep.get("tensor_degree");
}

void criterion_8(Outcome& o) {
  std::mt19937_64 rng(8);
  const Universe z = Universe::integers();
  const Universe f = Universe::prime_field(101);
  for (int s = 0; s < 200; ++s) {
    const Universe& u = s % 2 == 0 ? z : f;
    const i64 lo = s % 2 == 0 ? -15 : 0, hi = s % 2 == 0 ? 15 : 100;
    const FiniteSet a = oracle::random_set(u, 10, lo, hi, rng), b = oracle::random_set(u, 10, lo, hi, rng);
    o.expect(energy(a, b, EnergyKind::Additive) == oracle::additive_energy(a, b), "additive energy");
    const FiniteSet a1 = oracle::random_set(u, 10, 1, hi, rng), b1 = oracle::random_set(u, 10, 1, hi, rng);
    o.expect(energy(a1, b1, EnergyKind::Multiplicative) == oracle::multiplicative_energy(a1, b1),
             "multiplicative energy");
  }
  u64 families = 0;
  for (const std::string tag : {"Z", "Fp:10007", "Fp:101"}) {
    const Universe u = Universe::parse(tag);
    for (FamilyKind kind : {FamilyKind::AP, FamilyKind::GP, FamilyKind::RandomSubset}) {
      for (std::size_t n = 2; n <= 64; n += 2) {
        if (!u.is_modular() && kind == FamilyKind::GP && n > 32) continue;
        if (tag == "Fp:101" && n > 50) continue;
        const FiniteSet a = generate_family(kind, n, FamilyParams{}, u, n);
        const u64 sums = combine(a, a, Op::Sum).size();
        const u64 nn = n;
        o.expect(nn * nn * nn * nn <= sums * energy(a, a, EnergyKind::Additive), "|A|^4 <= |A+A| E(A)");
        ++families;
      }
    }
  }
  u64 cd = 0;
  for (i64 p : {5, 7, 11, 13, 101}) {
    const Universe u = Universe::prime_field(p);
    for (int s = 0; s < 100; ++s) {
      const FiniteSet a = oracle::random_set(u, 12, 0, p - 1, rng), b = oracle::random_set(u, 12, 0, p - 1, rng);
      const u64 bound = std::min<u64>(static_cast<u64>(p), a.size() + b.size() - 1);
      o.expect(combine(a, b, Op::Sum).size() >= bound, "Cauchy-Davenport");
      ++cd;
    }
  }
  o.detail << "200 energy pairs, " << families << " families, " << cd << " Cauchy-Davenport pairs";
}

void criterion_9(Outcome& o) {
  std::mt19937_64 rng(9);
  const Universe z = Universe::integers();
  for (int s = 0; s < 50; ++s) {
    const FiniteSet a = oracle::random_set(z, 30, -60, 60, rng);
    if (a.size() < 2) continue;
    try {
      const ElekesConfig e = elekes_config(a);
      o.expect(e.min_line_richness >= a.size(), "Elekes line richness");
      o.expect(incidences(e.points, e.lines) >= a.size() * e.lines.size(), "Elekes incidences");
    } catch (const Error& err) {
      o.expect(false, std::string("Elekes: ") + err.what());
    }
  }
  u64 chain_failures = 0, asserted_failures = 0, tested = 0;
  for (int s = 0; s < 50; ++s) {
    const FiniteSet a = oracle::random_set(z, 16, 1, 80, rng);
    if (a.size() < 2) continue;
    const ReportDocument rep = solymosi_stats(a);
    const bool chain = rep.find_check("printed_chain_energy_le_n2i0")->passed &&
                       rep.find_check("printed_chain_n2i0_le_sumset_sq")->passed;
    chain_failures += chain ? 0 : 1;
    asserted_failures += rep.all_passed() ? 0 : 1;
    ++tested;
  }
  o.expect(chain_failures == 0, "printed Solymosi chain");
  o.detail << "Solymosi: " << tested << " sets, printed chain failed on " << chain_failures
           << ", corrected asserted checks failed on " << asserted_failures;
}

void criterion_10(Outcome& o) {
  u64 triples = 0;
  for (i64 p : {5, 7}) {
    const Universe u = Universe::prime_field(p);
    const auto sets = subsets_up_to(u, 4);
    for (const auto& a1 : sets) {
      for (const auto& a2 : sets) {
        for (const auto& a3 : sets) {
          const CollinearCounts c = collinear_counts(a1, a2, a3);
          const oracle::TCounts t = oracle::collinear(a1, a2, a3);
          o.expect(c.all == t.all && c.distinct == t.distinct, "T counts over F_" + std::to_string(p));
          ++triples;
        }
      }
    }
  }
  o.detail << triples << " triples";
}

void criterion_11(Outcome& o) {
  for (const std::string tag : {"Fp:10007", "Z"}) {
    cli::ExperimentConfig c;
    c.universe = tag;
    c.samples = 3;
    const auto r = cli::run("sumprod", c);
    o.expect(r.status == 0, "sumprod over " + tag + " exit " + std::to_string(r.status) + " " + r.error);
    if (r.status == 1) continue;
    u64 asserted = 0;
    for (const auto& chk : r.report.checks()) asserted += chk.asserted ? 1 : 0;
    o.detail << tag << ": " << asserted << " asserted checks; ";
    if (tag != "Z") {
      for (const auto& [name, ratios] : r.report.get("ratios").items()) {
        o.detail << name << " r8_3=" << ratios["ratio_sum8_prod3_over_n12"].get<double>() << " ";
      }
    }
  }
}

const std::vector<std::function<void(Outcome&)>> kCriteria{
    criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};

bool evaluate(std::size_t i) {
  Outcome o;
  try {
    kCriteria[i - 1](o);
  } catch (const std::exception& e) {
    o.expect(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail.str() << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::cerr << "usage: acceptance [1-" << kCriteria.size() << "]\n";
    return 1;
  }
  if (argc == 2) {
    const int i = std::atoi(argv[1]);
    if (i < 1 || i > static_cast<int>(kCriteria.size())) {
      std::cerr << "unknown criterion " << argv[1] << '\n';
      return 1;
    }
    return evaluate(static_cast<std::size_t>(i)) ? 0 : 1;
  }
  bool all = true;
  for (std::size_t i = 1; i <= kCriteria.size(); ++i) all = evaluate(i) && all;
  return all ? 0 : 1;
}
