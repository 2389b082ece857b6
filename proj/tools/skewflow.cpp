#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skewflow/harness/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bilinear zero-sum game dynamics under mirror descent"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file or preset name");
  run->add_option("config", run_config, "Config path or preset name")->required();

  std::string sweep_config;
  auto* sweep = app.add_subcommand("sweep", "Sweep horizons and fit the duality-gap rate");
  sweep->add_option("config", sweep_config, "Sweep config path or preset name")->required();

  std::optional<std::size_t> corrupt_step;
  auto* verify = app.add_subcommand("verify", "Run the built-in identity and bound checks");
  verify->add_option("--corrupt-step", corrupt_step, "Perturb this step (negative control)")
      ->group("");

  std::string plot_csv;
  std::optional<std::string> plot_out;
  auto* plot = app.add_subcommand("plot", "Render a trajectory CSV as a two-panel SVG");
  plot->add_option("csv", plot_csv, "Trajectory CSV")->required();
  plot->add_option("--out", plot_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : skewflow::harness::kExitConfig;
  }

  namespace h = skewflow::harness;
  if (*run) return h::cmd_run(run_config);
  if (*sweep) return h::cmd_sweep(sweep_config);
  if (*verify) return h::cmd_verify({corrupt_step});
  if (*plot) return h::cmd_plot(plot_csv, plot_out);
  return h::kExitConfig;
}
