#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sumprod/cli.hpp"

namespace {

// Flags only override the config file when they were given.
template <typename T>
void override_if_set(const CLI::App& app, const std::string& flag, const T& value, T& field) {
  if (app.count(flag) > 0) field = value;
}

}  // namespace

int main(int argc, char** argv) {
  using sumprod::cli::ExperimentConfig;
  CLI::App app{"sumprod: sum-product, incidence and Z_q bisector experiments"};
  app.require_subcommand(1, 1);

  ExperimentConfig flags;
  std::string config_path;
  std::vector<CLI::App*> subs;
  for (const auto& name : sumprod::cli::commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--p", flags.p, "prime (3 mod 4 for Z_q commands)");
    sub->add_option("--k", flags.k, "exponent of q = p^k");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--workers", flags.workers, "worker threads");
    sub->add_option("--budget-tuples", flags.budget_tuples, "maximum enumerated tuples");
    sub->add_option("--budget-seconds", flags.budget_seconds, "wall-clock limit");
    sub->add_option("--out", flags.out, "output path (default stdout)");
    sub->add_option("--format", flags.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--n", flags.n, "set size");
    sub->add_option("--samples", flags.samples, "random cases per property");
    if (name == "sumprod") {
      sub->add_option("--universe", flags.universe, "Z, Fp:<p> or Zq:<q>");
      sub->add_option("--family", flags.family, "ap, gp, random or all");
    }
    if (name == "incidence") sub->add_option("--grid", flags.grid, "Szemeredi-Trotter grid parameter");
    if (name == "conjecture") {
      sub->add_option("--x", flags.x, "base pair: auto or x1,y1,x2,y2");
      sub->add_flag("--sampled", flags.sampled, "sample y-columns instead of the full census");
    }
    if (name == "spectral") {
      sub->add_option("--d", flags.d, "graph distance (a unit)");
      sub->add_option("--rows", flags.rows, "A^2 rows to stream (0 = all)");
      sub->add_option("--graph-out", flags.graph_out, "binary edge list output");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = ExperimentConfig::from_file(config_path);
  } catch (const sumprod::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  override_if_set(*sub, "--p", flags.p, cfg.p);
  override_if_set(*sub, "--k", flags.k, cfg.k);
  override_if_set(*sub, "--seed", flags.seed, cfg.seed);
  override_if_set(*sub, "--workers", flags.workers, cfg.workers);
  override_if_set(*sub, "--budget-tuples", flags.budget_tuples, cfg.budget_tuples);
  override_if_set(*sub, "--budget-seconds", flags.budget_seconds, cfg.budget_seconds);
  override_if_set(*sub, "--out", flags.out, cfg.out);
  override_if_set(*sub, "--format", flags.format, cfg.format);
  override_if_set(*sub, "--n", flags.n, cfg.n);
  override_if_set(*sub, "--samples", flags.samples, cfg.samples);
  if (sub->get_name() == "sumprod") {
    override_if_set(*sub, "--universe", flags.universe, cfg.universe);
    override_if_set(*sub, "--family", flags.family, cfg.family);
  }
  if (sub->get_name() == "incidence") override_if_set(*sub, "--grid", flags.grid, cfg.grid);
  if (sub->get_name() == "conjecture") {
    override_if_set(*sub, "--x", flags.x, cfg.x);
    override_if_set(*sub, "--sampled", flags.sampled, cfg.sampled);
  }
  if (sub->get_name() == "spectral") {
    override_if_set(*sub, "--d", flags.d, cfg.d);
    override_if_set(*sub, "--rows", flags.rows, cfg.rows);
    override_if_set(*sub, "--graph-out", flags.graph_out, cfg.graph_out);
  }

  const auto result = sumprod::cli::run(sub->get_name(), cfg);
  if (result.status == 1) {
    std::cerr << result.error << '\n';
    return 1;
  }
  const std::string text = sumprod::cli::render(result, cfg.format);
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << "UsageError: cannot write " << cfg.out << '\n';
      return 1;
    }
    out << text;
  }
  if (result.status == 2) std::cerr << "asserted checks failed\n";
  return result.status;
}
