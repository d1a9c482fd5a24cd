// Command line front end: one subcommand, one config file, artifacts in the
// resolved output directory. Flags override the environment, which overrides
// the config.

#include <string>

#include <CLI11.hpp>

#include "convext/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"operator norms and extremizers for convolution with a measure"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int threads = -1;
  app.add_option("--output-dir", output_dir,
                 "override the config output directory");
  app.add_option("--threads", threads,
                 "override the worker thread count (0 = hardware)");

  const std::pair<const char*, const char*> subs[] = {
      {"norm", "multistart norm estimate, oracle cross-check on tiny grids"},
      {"solve", "single extremizer solve plus the full verification battery"},
      {"verify", "verification battery on a stored grid function"},
      {"decompose", "bubble decomposition sweep over a list of levels"},
      {"localize", "concentration split of a near-extremizer"},
      {"bootstrap", "exponent bootstrap iteration on the Riesz diagram"},
      {"kernel", "kernel powers, positivity scan, smoothing exponent"},
      {"oracle", "derivative-free norm search on tiny grids"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
  }

  CLI11_PARSE(app, argc, argv);

  convext::cli::Overrides ov;
  if (!output_dir.empty()) ov.output_dir = output_dir;
  if (threads >= 0) ov.threads = threads;
  const std::string sub = app.get_subcommands().front()->get_name();
  return convext::cli::run_to_exit_code(sub, config_path, ov);
}
