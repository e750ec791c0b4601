#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using cnnt::cli::Format;

const std::map<std::string, Format> kFormats{{"table", Format::Table}, {"json", Format::Json}, {"csv", Format::Csv}};

void add_hw_flags(CLI::App* cmd, cnnt::cli::HwFlags& hw) {
  cmd->add_option("--board", hw.board, "Board preset: ultra96, zcu104, zcu102");
  cmd->add_option("--bram", hw.bram18, "BRAM18 blocks available");
  cmd->add_option("--dsp", hw.dsp, "DSP slices available");
  cmd->add_option("--freq-mhz", hw.freq_mhz, "Clock frequency in MHz");
  cmd->add_option("--port-bytes", hw.port_bytes, "Bytes per cycle per memory port");
}

void add_cfg_flags(CLI::App* cmd, cnnt::cli::CfgFlags& c) {
  cmd->add_option("--tr", c.tr, "Output-row tile");
  cmd->add_option("--tc", c.tc, "Output-column tile");
  cmd->add_option("--mu", c.mu, "Input channels per compute step");
  cmd->add_option("--tau", c.tau, "Output channels per compute step");
  cmd->add_option("--lambda", c.lambda, "FC input tile");
  cmd->add_option("--omega", c.omega, "FC output tile");
}

void add_range(CLI::App* cmd, const std::string& name, cnnt::Range& r) {
  cmd->add_option("--" + name + "-min", r.lo, "Lower bound for " + name);
  cmd->add_option("--" + name + "-max", r.hi, "Upper bound for " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiled CNN accelerator simulator, performance model and design-space explorer"};
  app.require_subcommand(1);

  cnnt::cli::RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a network on the tiled engine and report modeled cost");
  run_cmd->add_option("--network", run.network, "Network file or preset name")->required();
  run_cmd->add_option("--weights", run.weights, "Weight container");
  run_cmd->add_option("--input", run.input, "Input tensor container");
  run_cmd->add_option("--output", run.output, "Where to write the final tensor")->capture_default_str();
  run_cmd->add_option("--trace", run.trace, "Write the event trace as JSON lines");
  run_cmd->add_option("--seed", run.seed, "Generate random weights/input from this seed");
  run_cmd->add_flag("--verify", run.verify, "Compare every layer against the untiled reference");
  run_cmd->add_option("--format", run.format, "table, json or csv")->transform(CLI::CheckedTransformer(kFormats));
  add_hw_flags(run_cmd, run.hw);
  add_cfg_flags(run_cmd, run.cfg);

  cnnt::cli::CountOpsArgs count;
  auto* count_cmd = app.add_subcommand("count-ops", "Per-layer and total operation counts");
  count_cmd->add_option("--network", count.network, "Network file or preset name")->required();
  count_cmd->add_option("--format", count.format, "table, json or csv")->transform(CLI::CheckedTransformer(kFormats));

  cnnt::cli::ExploreArgs ex;
  bool rect = false;
  auto* ex_cmd = app.add_subcommand("explore", "Rank feasible tile configurations for a board");
  ex_cmd->add_option("--network", ex.network, "Network file or preset name")->capture_default_str();
  add_hw_flags(ex_cmd, ex.hw);
  add_range(ex_cmd, "tr", ex.bounds.tile_rows);
  add_range(ex_cmd, "tc", ex.bounds.tile_cols);
  add_range(ex_cmd, "mu", ex.bounds.in_channels);
  add_range(ex_cmd, "tau", ex.bounds.out_channels);
  ex_cmd->add_flag("--rect", rect, "Explore Tc independently of Tr");
  ex_cmd->add_flag("--heuristic", ex.heuristic, "Keep only tau/mu within the ratio window");
  ex_cmd->add_option("--ratio-low", ex.ratio_low, "Lower tau/mu ratio")->capture_default_str();
  ex_cmd->add_option("--ratio-high", ex.ratio_high, "Upper tau/mu ratio")->capture_default_str();
  ex_cmd->add_flag("--all", ex.all, "Emit every feasible configuration, not the best per compute unit");
  ex_cmd->add_option("--threads", ex.threads, "Worker threads (0 = all cores)");
  ex_cmd->add_option("--format", ex.format, "csv, json or table")->transform(CLI::CheckedTransformer(kFormats));

  cnnt::cli::QuantizeArgs qw;
  auto* q_cmd = app.add_subcommand("quantize-weights", "Write a Q2.14 weight container");
  q_cmd->add_option("--network", qw.network, "Network file or preset name")->required();
  q_cmd->add_option("--floats", qw.floats, "JSON file of real-valued weights");
  q_cmd->add_option("--seed", qw.seed, "Generate random weights from this seed");
  q_cmd->add_option("--output", qw.output, "Output container")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cnnt::cli::kValidationError;
  }

  if (*run_cmd) return cnnt::cli::cmd_run(run, std::cout, std::cerr);
  if (*count_cmd) return cnnt::cli::cmd_count_ops(count, std::cout, std::cerr);
  if (*ex_cmd) {
    ex.bounds.square_tiles = !rect;
    return cnnt::cli::cmd_explore(ex, std::cout, std::cerr);
  }
  if (*q_cmd) return cnnt::cli::cmd_quantize_weights(qw, std::cout, std::cerr);
  return cnnt::cli::kValidationError;
}
