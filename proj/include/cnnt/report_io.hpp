#pragma once

// CostReport serialisation: JSON (lossless), a Table-1-style comparison CSV,
// and a human-readable per-layer table.

#include <charconv>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "json.hpp"

#include "cnnt/perf_model.hpp"

namespace cnnt {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

inline nlohmann::json to_json(const TileConfig& c) {
  return {{"Tr", c.tile_rows},   {"Tc", c.tile_cols},     {"mu", c.in_channels},
          {"tau", c.out_channels}, {"lambda", c.fc_inputs}, {"omega", c.fc_outputs}};
}

inline TileConfig tile_config_from_json(const nlohmann::json& j) {
  return {j.at("Tr").get<std::size_t>(),  j.at("Tc").get<std::size_t>(),     j.at("mu").get<std::size_t>(),
          j.at("tau").get<std::size_t>(), j.at("lambda").get<std::size_t>(), j.at("omega").get<std::size_t>()};
}

inline nlohmann::json to_json(const HardwareBudget& hw) {
  return {{"name", hw.name},
          {"bram18", hw.bram18_total},
          {"dsp", hw.dsp_total},
          {"portBytesPerCycle", hw.port_bytes_per_cycle},
          {"freqMHz", hw.freq_mhz}};
}

inline HardwareBudget hardware_budget_from_json(const nlohmann::json& j) {
  return {j.at("name").get<std::string>(), j.at("bram18").get<std::size_t>(), j.at("dsp").get<std::size_t>(),
          j.at("portBytesPerCycle").get<std::size_t>(), j.at("freqMHz").get<double>()};
}

inline nlohmann::json to_json(const CostReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& c : r.per_layer) {
    layers.push_back({{"layer", c.layer_index},
                      {"kind", std::string(to_string(c.kind))},
                      {"ops", c.ops},
                      {"tileOps", c.tile_ops},
                      {"tiles", c.tiles},
                      {"computeCycles", c.compute_cycles},
                      {"dmaCycles", c.dma_cycles},
                      {"latencyCycles", c.latency_cycles},
                      {"latencyMs", c.latency_ms},
                      {"gops", c.gops},
                      {"inputBytes", c.input_bytes},
                      {"weightBytes", c.weight_bytes},
                      {"outputBytes", c.output_bytes}});
  }
  return {{"network", r.network},
          {"hardware", to_json(r.hw)},
          {"config", to_json(r.cfg)},
          {"perLayer", layers},
          {"totals",
           {{"totalOps", r.totals.total_ops},
            {"latencyCycles", r.totals.latency_cycles},
            {"latencyMs", r.totals.latency_ms},
            {"achievedGops", r.totals.achieved_gops},
            {"peakGops", r.totals.peak_gops}}},
          {"resources", {{"bram18", r.resources.bram18}, {"dsp", r.resources.dsp}}},
          {"scope", "accelerator layers only; host-path time excluded"}};
}

inline CostReport cost_report_from_json(const nlohmann::json& j) {
  CostReport r;
  r.network = j.at("network").get<std::string>();
  r.hw = hardware_budget_from_json(j.at("hardware"));
  r.cfg = tile_config_from_json(j.at("config"));
  for (const auto& lj : j.at("perLayer")) {
    LayerCost c;
    c.layer_index = lj.at("layer").get<std::size_t>();
    c.kind = lj.at("kind").get<std::string>() == "fc" ? LayerKind::FC : LayerKind::Conv;
    c.ops = lj.at("ops").get<std::uint64_t>();
    c.tile_ops = lj.at("tileOps").get<std::uint64_t>();
    c.tiles = lj.at("tiles").get<std::uint64_t>();
    c.compute_cycles = lj.at("computeCycles").get<std::uint64_t>();
    c.dma_cycles = lj.at("dmaCycles").get<std::uint64_t>();
    c.latency_cycles = lj.at("latencyCycles").get<std::uint64_t>();
    c.latency_ms = lj.at("latencyMs").get<double>();
    c.gops = lj.at("gops").get<double>();
    c.input_bytes = lj.at("inputBytes").get<std::uint64_t>();
    c.weight_bytes = lj.at("weightBytes").get<std::uint64_t>();
    c.output_bytes = lj.at("outputBytes").get<std::uint64_t>();
    r.per_layer.push_back(c);
  }
  const auto& t = j.at("totals");
  r.totals = {t.at("totalOps").get<std::uint64_t>(), t.at("latencyCycles").get<std::uint64_t>(),
              t.at("latencyMs").get<double>(), t.at("achievedGops").get<double>(), t.at("peakGops").get<double>()};
  r.resources = {j.at("resources").at("bram18").get<std::size_t>(), j.at("resources").at("dsp").get<std::size_t>()};
  return r;
}

// Mirrors the published resource/performance table. FF/LUT are not modelled.
inline constexpr const char* kComparisonCsvHeader =
    "device,compute_unit,bram18,dsp,performance_gops,peak_gops,frequency_mhz,latency_ms";

inline std::string comparison_csv_row(const CostReport& r) {
  std::ostringstream os;
  os << r.hw.name << ',' << r.cfg.in_channels << 'x' << r.cfg.out_channels << ',' << r.resources.bram18 << ','
     << r.resources.dsp << ',' << format_double(r.totals.achieved_gops) << ',' << format_double(r.totals.peak_gops)
     << ',' << format_double(r.hw.freq_mhz) << ',' << format_double(r.totals.latency_ms);
  return os.str();
}

inline void print_layer_table(std::ostream& os, const CostReport& r) {
  os << std::left << std::setw(6) << "layer" << std::setw(6) << "kind" << std::right << std::setw(14) << "ops"
     << std::setw(10) << "tiles" << std::setw(14) << "compute_cyc" << std::setw(14) << "dma_cyc" << std::setw(14)
     << "latency_cyc" << std::setw(12) << "latency_ms" << std::setw(10) << "GOP/s" << '\n';
  for (const auto& c : r.per_layer) {
    os << std::left << std::setw(6) << c.layer_index << std::setw(6) << to_string(c.kind) << std::right
       << std::setw(14) << c.ops << std::setw(10) << c.tiles << std::setw(14) << c.compute_cycles << std::setw(14)
       << c.dma_cycles << std::setw(14) << c.latency_cycles << std::setw(12) << std::fixed << std::setprecision(4)
       << c.latency_ms << std::setw(10) << std::setprecision(2) << c.gops << '\n';
    os.unsetf(std::ios::fixed);
  }
  os << std::fixed << std::setprecision(4) << "total ops " << r.totals.total_ops << ", latency "
     << r.totals.latency_ms << " ms, achieved " << std::setprecision(2) << r.totals.achieved_gops
     << " GOP/s, peak " << r.totals.peak_gops << " GOP/s\n"
     << "resources: " << r.resources.bram18 << "/" << r.hw.bram18_total << " BRAM18, " << r.resources.dsp << "/"
     << r.hw.dsp_total << " DSP (accelerator layers only; host-path time excluded)\n";
  os.unsetf(std::ios::fixed);
}

}  // namespace cnnt
