#include <CLI11.hpp>

#include "qrelent/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "qrelent: divergence identities, tail criteria and preservation experiments\n"
      "for sequences of positive operators"};
  app.get_formatter()->column_width(28);

  qrelent::CliArgs args;
  app.add_option("command", args.command,
                 "check-identities | criterion | scenario | experiment | describe");
  app.add_option("kind", args.kind,
                 "scenario/experiment kind, or the command to describe");
  app.add_option("--config", args.config_path, "JSON run configuration (flags override it)");
  auto* seed_opt = app.add_option("--seed", args.seed, "rng seed");
  app.add_option("--out", args.out_dir, "output directory (default .)");
  app.add_option("--tol", args.tol_overrides, "tolerance override NAME=VALUE (repeatable)");

  CLI11_PARSE(app, argc, argv);
  args.has_seed = seed_opt->count() > 0;

  if (args.command.empty() && args.config_path.empty()) {
    std::cerr << app.help();
    return 2;
  }
  return qrelent::cli_main(args);
}
