#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hypstrata/cli.hpp"

using namespace hypstrata;

int main(int argc, char** argv) {
  CLI::App app{"Strata of hyperbolic polynomials by the roots of P and P^(k)"};
  app.require_subcommand(1);

  std::string format = "json";
  std::uint64_t seed = 7;
  double tol = kClassifyTol;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--tol", tol, "Classification tolerance, relative to the smallest root gap");

  int n = 0;
  int k = 0;
  std::optional<int> dim;
  std::string roots;
  std::string mults;
  int mover = 2;
  int direction = 1;
  std::string policy = "targeted";
  std::string traj;
  std::string out;
  std::string suite;
  int n_max = 6;
  int samples = 50;
  unsigned threads = 0;

  auto* en = app.add_subcommand("enumerate", "List admissible configuration vectors")->fallthrough();
  en->add_option("--n", n, "Degree")->required();
  en->add_option("--k", k, "Derivative order")->required();
  en->add_option("--dim", dim, "Keep only this dimension");

  auto add_point = [&](CLI::App* sub) {
    sub->add_option("--roots", roots, "Distinct roots, comma separated")->required();
    sub->add_option("--mults", mults, "Multiplicities, comma separated (default all 1)");
    sub->add_option("--k", k, "Derivative order")->required();
  };

  auto* cl = app.add_subcommand("classify", "Configuration vector of a point")->fallthrough();
  add_point(cl);

  auto* fl = app.add_subcommand("flow", "Flow one leg to the stratum boundary")->fallthrough();
  add_point(fl);
  fl->add_option("--mover", mover, "Moving root, 1-based among distinct roots");
  fl->add_option("--direction", direction, "1 or -1")->check(CLI::IsMember({1, -1}));
  fl->add_option("--traj", traj, "Directory for the trajectory CSV");

  auto* rt = app.add_subcommand("retract", "Retract a point to a dimension-0 stratum")->fallthrough();
  add_point(rt);
  rt->add_option("--policy", policy, "leftmost, rightmost, targeted or random");
  rt->add_option("--traj", traj, "Directory for per-leg trajectory CSVs");

  auto* po = app.add_subcommand("poset", "Stratum poset as a DOT graph")->fallthrough();
  po->add_option("--n", n, "Degree")->required();
  po->add_option("--k", k, "Derivative order")->required();
  po->add_option("--out", out, "DOT output file");

  auto* ve = app.add_subcommand("verify", "Run a verification suite")->fallthrough();
  ve->add_option("--suite", suite, "lemmas, transversality, flows or enumeration")->required();
  ve->add_option("--n-max", n_max, "Largest degree sampled");
  ve->add_option("--samples", samples, "Number of samples");
  ve->add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : cli::kExitDomain;
  }

  const auto result = cli::guarded([&]() -> cli::CommandResult {
    if (*en) return cli::cmd_enumerate(n, k, dim);
    if (*po) return cli::cmd_poset(n, k, out);
    if (*ve) return cli::cmd_verify(suite, VerifyOptions{n_max, samples, seed, threads});
    const auto rc = cli::parse_configuration(roots, mults);
    if (*cl) return cli::cmd_classify(rc, k, tol);
    if (*fl) return cli::cmd_flow(rc, k, mover, direction, traj);
    return cli::cmd_retract(rc, k, parse_policy(policy), seed, traj);
  });
  std::cout << result.render(cli::parse_format(format));
  return result.exit_code;
}
