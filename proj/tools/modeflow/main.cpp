#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "modeflow/error.hpp"

namespace {

void add_run_options(CLI::App* cmd, modeflow::cli::RunArgs& a, bool method = false) {
  cmd->add_option("-i,--input", a.input, "TensorFile (.mft) or CSV input")->required();
  cmd->add_option("-o,--output", a.output, "artifact directory to create")->required();
  cmd->add_option("-c,--config", a.config, "RunConfig JSON");
  cmd->add_option("--truth", a.truth, "reference tensor for the reported RRMSE");
  cmd->add_option("--dt", a.dt, "time step (overrides the config)");
  cmd->add_option("--seed", a.seed, "training seed (overrides the config)");
  cmd->add_flag("--plots", a.plots, "also write spectrum SVG and field heatmaps");
  cmd->add_flag("-v,--verbose", a.verbose, "report training progress on stderr");
  if (method) cmd->add_option("--method", a.method, "svd or hosvd")->check(CLI::IsMember({"svd", "hosvd"}));
}

}  // namespace

int main(int argc, char** argv) {
  namespace mc = modeflow::cli;
  CLI::App app{"modeflow: modal decomposition, data repair and reduced-order models"};
  app.require_subcommand(1);

  mc::RunArgs run;
  mc::SyntheticArgs synth;
  std::string info_path;

  auto* decompose = app.add_subcommand("decompose", "SVD, HOSVD, HODMD or multi-dimensional HODMD");
  decompose->require_subcommand(1);
  for (const char* m : {"svd", "hosvd", "hodmd", "mdhodmd"}) add_run_options(decompose->add_subcommand(m), run);

  auto* repair = app.add_subcommand("repair", "fill gaps in a database");
  repair->require_subcommand(1);
  add_run_options(repair->add_subcommand("gappy", "gappy SVD/HOSVD"), run, true);

  add_run_options(app.add_subcommand("superres", "iterative SVD/HOSVD super-resolution"), run, true);

  auto* forecast = app.add_subcommand("forecast", "predictive reduced-order models");
  forecast->require_subcommand(1);
  add_run_options(forecast->add_subcommand("dmd", "HODMD extrapolation of permanent modes"), run);
  add_run_options(forecast->add_subcommand("nn", "SVD + neural network forecasting"), run);

  auto* reconstruct = app.add_subcommand("reconstruct", "field reconstruction from sensors");
  reconstruct->require_subcommand(1);
  add_run_options(reconstruct->add_subcommand("nn", "parallel decoders"), run);

  add_run_options(app.add_subcommand("autoencode", "autoencoder pattern identification"), run);

  auto* generate = app.add_subcommand("generate", "ground-truth data");
  generate->require_subcommand(1);
  auto* synthetic = generate->add_subcommand("synthetic", "sum of exponentially modulated oscillations");
  synthetic->add_option("-o,--output", synth.output, "artifact directory to create")->required();
  synthetic->add_option("-c,--config", synth.config, "RunConfig JSON");
  synthetic->add_option("--modes", synth.modes, "number of modes (default spectrum)")->check(CLI::PositiveNumber);
  synthetic->add_option("--noise", synth.noise, "Gaussian noise level");
  synthetic->add_option("--seed", synth.seed, "profile and noise seed");
  synthetic->add_option("--dt", synth.dt, "time step (overrides the config)");

  auto* info = app.add_subcommand("info", "describe a tensor file");
  info->add_option("file", info_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(modeflow::ExitCode::kIoError);
  }

  try {
    if (decompose->parsed()) {
      for (auto* sub : decompose->get_subcommands()) mc::run_decompose(sub->get_name(), run);
    } else if (repair->parsed()) {
      mc::run_repair_gappy(run);
    } else if (app.got_subcommand("superres")) {
      mc::run_superres(run);
    } else if (forecast->parsed()) {
      if (forecast->got_subcommand("dmd")) mc::run_forecast_dmd(run);
      else mc::run_forecast_nn(run);
    } else if (reconstruct->parsed()) {
      mc::run_reconstruct_nn(run);
    } else if (app.got_subcommand("autoencode")) {
      mc::run_autoencode(run);
    } else if (generate->parsed()) {
      mc::run_generate_synthetic(synth);
    } else if (info->parsed()) {
      mc::run_info(info_path);
    }
  } catch (const modeflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(modeflow::ExitCode::kIoError);
  }
  return 0;
}
