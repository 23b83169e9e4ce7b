#include "commands.hpp"

#include "hybavg/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace hybavg::cli;

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("model", o.model, "hopper | nonhyperbolic | classical")->required();
  sub->add_option("--settings", o.settings_path, "tolerance overrides (key = value file)");
  sub->add_option("--out", o.out, "output path prefix for .toml and .csv");
  sub->add_flag("--quiet", o.quiet, "do not print the report");
  sub->allow_extras();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid averaging toolkit"};
  app.require_subcommand(1);

  CommonOptions o;
  int strides = 10;
  double x2_init = 0.0;
  auto* simulate = app.add_subcommand("simulate", "simulate strides and the averaged flow");
  add_common(simulate, o);
  simulate->add_option("--strides", strides, "number of strides");
  auto* x2_opt = simulate->add_option("--x2-init", x2_init, "initial slow state");

  auto* certify = app.add_subcommand("certify", "orthogonal-reset stability certificate");
  add_common(certify, o);

  double eps_min = 0.01, eps_max = 0.5;
  int points = 8;
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep of the return-map eigenvalue gap");
  add_common(sweep, o);
  sweep->add_option("--eps-min", eps_min);
  sweep->add_option("--eps-max", eps_max);
  sweep->add_option("--points", points);

  auto* check = app.add_subcommand("check", "run the property suite on one model");
  add_common(check, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    o.params = parse_overrides(sub->remaining());
    if (sub == simulate) return cmd_simulate(o, strides, x2_init, x2_opt->count() > 0, std::cout);
    if (sub == certify) return cmd_certify(o, std::cout);
    if (sub == sweep) return cmd_sweep(o, eps_min, eps_max, points, std::cout);
    return cmd_check(o, std::cout);
  } catch (const hybavg::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const hybavg::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
