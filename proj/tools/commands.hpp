#pragma once

// Subcommand implementations for the cnnt tool. Each returns the process exit
// code: 0 success, 1 I/O error, 2 validation or feasibility error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnnt/cnnt.hpp"

#ifndef CNNT_PRESET_DIR
#define CNNT_PRESET_DIR "presets"
#endif

namespace cnnt::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kValidationError = 2 };

enum class Format { Table, Json, Csv };

struct HwFlags {
  std::string board;
  std::optional<std::size_t> bram18;
  std::optional<std::size_t> dsp;
  std::optional<double> freq_mhz;
  std::optional<std::size_t> port_bytes;
};

struct CfgFlags {
  std::optional<std::size_t> tr, tc, mu, tau, lambda, omega;
};

struct RunArgs {
  std::string network;
  std::string weights;
  std::string input;
  std::string output = "output.cntw";
  std::string trace;
  std::optional<std::uint64_t> seed;
  bool verify = false;
  HwFlags hw;
  CfgFlags cfg;
  Format format = Format::Table;
};

struct CountOpsArgs {
  std::string network;
  Format format = Format::Table;
};

struct ExploreArgs {
  std::string network = "alexnet";
  HwFlags hw;
  ExploreBounds bounds{{1, 64}, {1, 64}, {1, 64}, {1, 128}, true};
  bool heuristic = false;
  double ratio_low = 1.5;
  double ratio_high = 3.0;
  bool all = false;
  unsigned threads = 0;
  Format format = Format::Csv;
};

struct QuantizeArgs {
  std::string network;
  std::string floats;
  std::optional<std::uint64_t> seed;
  std::string output;
};

// Thrown for bad flag combinations; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A path to a network file, or the name of a shipped preset.
inline NetworkSpec resolve_network(const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_network(arg);
  const char* env = std::getenv("CNNT_PRESET_DIR");
  const std::filesystem::path dir = env ? env : CNNT_PRESET_DIR;
  const auto preset = dir / (arg + ".json");
  if (std::filesystem::exists(preset)) return load_network(preset.string());
  throw IoError("no network file or preset named '" + arg + "'");
}

inline HardwareBudget resolve_hw(const HwFlags& f, const std::string& fallback_board) {
  HardwareBudget hw;
  const std::string name = f.board.empty() ? fallback_board : f.board;
  if (!name.empty()) {
    const auto b = find_board(name);
    if (!b) throw UsageError("unknown board '" + name + "' (known boards: " + known_boards() + ")");
    hw = b->hw;
  } else {
    hw.name = "custom";
  }
  if (f.bram18) hw.bram18_total = *f.bram18;
  if (f.dsp) hw.dsp_total = *f.dsp;
  if (f.freq_mhz) hw.freq_mhz = *f.freq_mhz;
  if (f.port_bytes) hw.port_bytes_per_cycle = *f.port_bytes;
  if ((f.bram18 || f.dsp || f.freq_mhz) && f.board.empty()) hw.name = "custom";
  validate(hw);
  return hw;
}

inline TileConfig resolve_cfg(const CfgFlags& f, const HwFlags& hwf) {
  TileConfig c{13, 13, 12, 24, 96, 192};
  if (const auto b = find_board(hwf.board.empty() ? "ultra96" : hwf.board)) c = b->published;
  if (f.tr) c.tile_rows = *f.tr;
  if (f.tc) c.tile_cols = *f.tc;
  if (f.mu) c.in_channels = *f.mu;
  if (f.tau) c.out_channels = *f.tau;
  if (f.lambda) c.fc_inputs = *f.lambda;
  else if (f.mu) c.fc_inputs = std::max(c.fc_inputs, c.in_channels);
  if (f.omega) c.fc_outputs = *f.omega;
  else if (f.tau) c.fc_outputs = std::max(c.fc_outputs, c.out_channels);
  validate(c);
  return c;
}

// Runs `body`, translating exceptions into exit codes and error messages.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kValidationError;
  }
}

inline int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec net = resolve_network(a.network);
    const HardwareBudget hw = resolve_hw(a.hw, "ultra96");
    const TileConfig cfg = resolve_cfg(a.cfg, a.hw);

    NetworkWeights<FixedQ> weights;
    if (!a.weights.empty()) weights = load_weights(a.weights, net);
    else if (a.seed) weights = random_weights(net, *a.seed);
    else throw UsageError("run needs --weights or --seed");

    QTensor input;
    if (!a.input.empty()) input = load_tensor(a.input);
    else if (a.seed) input = random_input(net, *a.seed + 1);
    else throw UsageError("run needs --input or --seed");
    if (input.dims != net.input.dims()) throw UsageError("input tensor dims do not match the network input");

    // Feasibility first: nothing executes on an over-budget configuration.
    const CostReport report = network_report(net, cfg, hw);
    SimOptions sim;
    sim.port_bytes_per_cycle = hw.port_bytes_per_cycle;
    const NetworkRun run = run_network_tiled(net, input, weights, cfg, sim);

    if (!a.trace.empty()) {
      std::ofstream tf(a.trace);
      if (!tf) throw IoError("cannot open trace file '" + a.trace + "'");
      for (std::size_t i = 0; i < run.traces.size(); ++i) write_trace_jsonl(tf, run.traces[i], i);
    }
    const QTensor& final_out = run.outputs.empty() ? input : run.outputs.back();
    if (!a.output.empty()) write_tensor(a.output, final_out);

    std::optional<bool> verified;
    if (a.verify) verified = run.outputs == run_network_reference(net, input, weights);

    switch (a.format) {
      case Format::Json: {
        auto j = to_json(report);
        if (verified) j["bitExactVsReference"] = *verified;
        out << j.dump(2) << '\n';
        break;
      }
      case Format::Csv: out << kComparisonCsvHeader << '\n' << comparison_csv_row(report) << '\n'; break;
      case Format::Table:
        out << "network " << net.name << " on " << hw.name << ", compute unit " << cfg.in_channels << "x"
            << cfg.out_channels << ", Tr=" << cfg.tile_rows << " Tc=" << cfg.tile_cols << " lambda=" << cfg.fc_inputs
            << " omega=" << cfg.fc_outputs << ", " << hw.freq_mhz << " MHz\n";
        print_layer_table(out, report);
        if (verified) out << "bit-exact vs reference: " << (*verified ? "yes" : "NO") << '\n';
        break;
    }
    return (verified && !*verified) ? static_cast<int>(kValidationError) : static_cast<int>(kOk);
  });
}

inline int cmd_count_ops(const CountOpsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec net = resolve_network(a.network);
    std::uint64_t accel = 0, host = 0;
    for (const auto& l : net.layers) {
      accel += layer_ops(l);
      host += host_ops(l);
    }
    const double share = accel + host == 0 ? 0.0 : static_cast<double>(accel) / static_cast<double>(accel + host);
    switch (a.format) {
      case Format::Json: {
        nlohmann::json j;
        j["network"] = net.name;
        j["layers"] = nlohmann::json::array();
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
          const auto& l = net.layers[i];
          j["layers"].push_back({{"layer", i}, {"kind", std::string(to_string(l.kind))}, {"ops", layer_ops(l)},
                                 {"hostOps", host_ops(l)}});
        }
        j["totalOps"] = accel;
        j["hostOps"] = host;
        j["acceleratorShare"] = share;
        out << j.dump(2) << '\n';
        break;
      }
      case Format::Csv:
        out << "layer,kind,ops,host_ops\n";
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
          const auto& l = net.layers[i];
          out << i << ',' << to_string(l.kind) << ',' << layer_ops(l) << ',' << host_ops(l) << '\n';
        }
        out << "total,," << accel << ',' << host << '\n';
        break;
      case Format::Table:
        out << std::left << std::setw(6) << "layer" << std::setw(9) << "kind" << std::right << std::setw(16) << "ops"
            << '\n';
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
          const auto& l = net.layers[i];
          out << std::left << std::setw(6) << i << std::setw(9) << to_string(l.kind) << std::right << std::setw(16)
              << layer_ops(l) << '\n';
        }
        out << "total " << accel << '\n'
            << "conv+fc share of estimated workload: " << std::fixed << std::setprecision(2) << 100.0 * share
            << "% (host-path ops estimated: " << host << ")\n";
        out.unsetf(std::ios::fixed);
        break;
    }
    return static_cast<int>(kOk);
  });
}

inline int cmd_explore(const ExploreArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec net = resolve_network(a.network);
    if (a.hw.board.empty() && !(a.hw.bram18 && a.hw.dsp && a.hw.freq_mhz)) {
      throw UsageError("explore needs --board or all of --bram --dsp --freq-mhz (known boards: " + known_boards() + ")");
    }
    const HardwareBudget hw = resolve_hw(a.hw, "");
    ExploreOptions opt;
    opt.heuristic = a.heuristic;
    opt.ratio_low = a.ratio_low;
    opt.ratio_high = a.ratio_high;
    opt.best_per_unit = !a.all;
    opt.threads = a.threads;
    const auto rows = to_rows(explore(net, hw, a.bounds, opt));
    switch (a.format) {
      case Format::Json: out << explore_to_json(rows).dump(2) << '\n'; break;
      case Format::Csv: write_explore_csv(out, rows); break;
      case Format::Table:
        out << "network " << net.name << " on " << hw.name << ": " << rows.size() << " ranked configurations\n";
        out << std::setw(4) << "Tr" << std::setw(4) << "Tc" << std::setw(5) << "mu" << std::setw(5) << "tau"
            << std::setw(8) << "lambda" << std::setw(8) << "omega" << std::setw(8) << "BRAM18" << std::setw(7)
            << "DSP" << std::setw(10) << "peak" << std::setw(10) << "achieved" << std::setw(12) << "latency_ms"
            << "  pareto\n";
        for (const auto& r : rows) {
          out << std::setw(4) << r.cfg.tile_rows << std::setw(4) << r.cfg.tile_cols << std::setw(5)
              << r.cfg.in_channels << std::setw(5) << r.cfg.out_channels << std::setw(8) << r.cfg.fc_inputs
              << std::setw(8) << r.cfg.fc_outputs << std::setw(8) << r.bram18 << std::setw(7) << r.dsp << std::fixed
              << std::setprecision(2) << std::setw(10) << r.peak_gops << std::setw(10) << r.achieved_gops
              << std::setprecision(4) << std::setw(12) << r.latency_ms << (r.pareto ? "  *" : "") << '\n';
          out.unsetf(std::ios::fixed);
        }
        break;
    }
    return static_cast<int>(kOk);
  });
}

struct QuantizeSummary {
  std::size_t tensor = 0;
  std::size_t values = 0;
  double max_error = 0.0;  // over in-range values
  std::size_t saturated = 0;
};

inline int cmd_quantize_weights(const QuantizeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec net = resolve_network(a.network);
    if (a.output.empty()) throw UsageError("quantize-weights needs --output");
    NetworkWeights<FixedQ> weights;
    std::vector<QuantizeSummary> summary;
    if (!a.floats.empty()) {
      std::ifstream in(a.floats);
      if (!in) throw IoError("cannot open float weights '" + a.floats + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed float weights: ") + e.what());
      }
      const auto& layers = doc.at("layers");
      std::size_t li = 0;
      auto quantize_values = [&](const nlohmann::json& arr, std::size_t expected) {
        if (!arr.is_array() || arr.size() != expected) {
          throw UsageError("float tensor " + std::to_string(summary.size()) + " needs " + std::to_string(expected) +
                           " values");
        }
        QuantizeSummary s{summary.size(), expected, 0.0, 0};
        std::vector<FixedQ> q;
        for (const auto& v : arr) {
          const double x = v.get<double>();
          const FixedQ fq = quantize(x);
          if (x > dequantize(FixedQ::max()) || x < dequantize(FixedQ::min())) ++s.saturated;
          else s.max_error = std::max(s.max_error, std::abs(dequantize(fq) - x));
          q.push_back(fq);
        }
        summary.push_back(s);
        return q;
      };
      for (const auto& l : net.layers) {
        if (!l.on_accelerator()) continue;
        if (li >= layers.size()) throw UsageError("float weights missing for accelerator layer " + std::to_string(li));
        const auto& lj = layers[li++];
        const auto dims = expected_weight_dims(l);
        LayerWeights<FixedQ> lw{QTensor(dims, quantize_values(lj.at("weights"), QTensor::element_count(dims))), {}};
        if (lj.contains("bias")) lw.bias = quantize_values(lj.at("bias"), l.out_channels);
        weights.push_back(std::move(lw));
      }
      if (li != layers.size()) throw UsageError("float weights have more layers than the network");
    } else if (a.seed) {
      weights = random_weights(net, *a.seed);
      for (std::size_t i = 0; i < weights.size(); ++i) summary.push_back({i, weights[i].weights.size(), 0.0, 0});
    } else {
      throw UsageError("quantize-weights needs --floats or --seed");
    }
    write_weights(a.output, weights);
    std::size_t saturated = 0;
    out << "tensor,values,max_error,saturated\n";
    for (const auto& s : summary) {
      out << s.tensor << ',' << s.values << ',' << format_double(s.max_error) << ',' << s.saturated << '\n';
      saturated += s.saturated;
    }
    out << "saturated values: " << saturated << '\n';
    return static_cast<int>(kOk);
  });
}

}  // namespace cnnt::cli
