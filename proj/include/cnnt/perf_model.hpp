#pragma once

// Analytical cycle, latency, throughput and resource model.
//
// Cycle currency: the compute unit retires one step (mu × tau MACs) per cycle.
// Each memory port moves port_bytes_per_cycle bytes per cycle; port A carries
// IFM loads and OFM stores, port B carries weight loads.
//
// Ping-pong latency of a layer with tiles 0..n-1:
//
//   fill    = max(in_0, w_0)                       first tile's loads
//   step_i  = max(compute_i, A_i, B_i)             transfers overlap compute
//             A_i = in_i·[i>0] + out_i·[i<n-1],  B_i = w_i·[i>0]
//   drain   = out_{n-1}                            last tile's store
//   latency = fill + Σ step_i + drain
//
// Tiles share at most two extents per tiled dimension (full and clamped), so
// the sum is evaluated over extent classes rather than tile by tile.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cnnt/errors.hpp"
#include "cnnt/netspec.hpp"
#include "cnnt/tiled_engine.hpp"

namespace cnnt {

inline constexpr std::size_t kBram18Bits = 18432;
inline constexpr std::size_t kWordBits = 16;

struct HardwareBudget {
  std::string name;
  std::size_t bram18_total = 0;
  std::size_t dsp_total = 0;
  std::size_t port_bytes_per_cycle = kDefaultPortBytesPerCycle;
  double freq_mhz = 0.0;

  friend bool operator==(const HardwareBudget&, const HardwareBudget&) = default;
};

inline void validate(const HardwareBudget& hw) {
  if (hw.bram18_total == 0 || hw.dsp_total == 0 || hw.port_bytes_per_cycle == 0 || !(hw.freq_mhz > 0.0)) {
    throw ConfigError("hardware budget fields must all be positive");
  }
}

struct ResourceUsage {
  std::size_t bram18 = 0;
  std::size_t dsp = 0;
  friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

inline bool fits(const ResourceUsage& u, const HardwareBudget& hw) {
  return u.bram18 <= hw.bram18_total && u.dsp <= hw.dsp_total;
}

// Every bank occupies at least one BRAM18; ping-pong doubles the count.
inline std::size_t bram18_blocks(const BufferSpec& b) {
  if (b.words == 0) return 0;
  const std::size_t bank_words = (b.words + b.banks - 1) / b.banks;
  const std::size_t per_bank = (bank_words * kWordBits + kBram18Bits - 1) / kBram18Bits;
  return (b.ping_pong ? 2 : 1) * b.banks * per_bank;
}

inline ResourceUsage resource_usage(const BufferModel& b, const TileConfig& cfg) {
  ResourceUsage u;
  u.dsp = cfg.in_channels * cfg.out_channels;
  for (const BufferSpec* s : {&b.conv_input, &b.conv_weights, &b.conv_output, &b.fc_input, &b.fc_weights, &b.fc_output}) {
    u.bram18 += bram18_blocks(*s);
  }
  return u;
}

inline ResourceUsage resource_usage(const TileConfig& cfg, const LayerEnvelope& env) {
  return resource_usage(make_buffers(cfg, env), cfg);
}

/// J_p = 2·Tr·Tc·mu·tau·K²: operations in one full conv tile.
inline std::uint64_t tile_ops(const TileConfig& cfg, std::size_t kernel) {
  return std::uint64_t{2} * cfg.tile_rows * cfg.tile_cols * cfg.in_channels * cfg.out_channels * kernel * kernel;
}

/// Compute-bound roofline, 2·mu·tau ops per cycle, in GOP/s.
inline double peak_gops(const TileConfig& cfg, double freq_mhz) {
  return 2.0 * static_cast<double>(cfg.in_channels * cfg.out_channels) * freq_mhz / 1000.0;
}

struct LayerCost {
  std::size_t layer_index = 0;
  LayerKind kind = LayerKind::Conv;
  std::uint64_t ops = 0;
  std::uint64_t tile_ops = 0;  // J_p for the layer's kernel (FC: 2·lambda·omega)
  std::uint64_t tiles = 0;
  std::uint64_t compute_cycles = 0;
  std::uint64_t dma_cycles = 0;  // max over ports of total port-busy cycles
  std::uint64_t latency_cycles = 0;
  double latency_ms = 0.0;
  double gops = 0.0;
  std::uint64_t input_bytes = 0;
  std::uint64_t weight_bytes = 0;
  std::uint64_t output_bytes = 0;

  friend bool operator==(const LayerCost&, const LayerCost&) = default;
};

struct NetworkCost {
  std::uint64_t total_ops = 0;
  std::uint64_t latency_cycles = 0;
  double latency_ms = 0.0;
  double achieved_gops = 0.0;
  double peak_gops = 0.0;

  friend bool operator==(const NetworkCost&, const NetworkCost&) = default;
};

struct CostReport {
  std::string network;
  HardwareBudget hw;
  TileConfig cfg;
  std::vector<LayerCost> per_layer;  // accelerator layers only
  NetworkCost totals;
  ResourceUsage resources;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

namespace detail {

struct ExtentClass {
  std::size_t size = 0;
  std::uint64_t count = 0;
  bool last = false;  // contains the final tile of its dimension
};

inline std::vector<ExtentClass> extent_classes(std::size_t total, std::size_t tile) {
  const std::uint64_t full = total / tile;
  const std::size_t rem = total % tile;
  std::vector<ExtentClass> out;
  if (rem == 0) {
    if (full > 1) out.push_back({tile, full - 1, false});
    out.push_back({tile, 1, true});
  } else {
    if (full > 0) out.push_back({tile, full, false});
    out.push_back({rem, 1, true});
  }
  return out;
}

struct TileCost {
  std::uint64_t compute = 0, in = 0, w = 0, out = 0;        // cycles
  std::uint64_t in_bytes = 0, w_bytes = 0, out_bytes = 0;
};

class LatencyAccumulator {
 public:
  explicit LatencyAccumulator(LayerCost& cost) : cost_(cost) {}

  void add(const TileCost& t, std::uint64_t count) {
    cost_.tiles += count;
    cost_.compute_cycles += count * t.compute;
    port_a_ += count * (t.in + t.out);
    port_b_ += count * t.w;
    steps_ += count * std::max({t.compute, t.in + t.out, t.w});
    cost_.input_bytes += count * t.in_bytes;
    cost_.weight_bytes += count * t.w_bytes;
    cost_.output_bytes += count * t.out_bytes;
  }

  void finish(const TileCost& first, const TileCost& last) {
    const auto full_step = [](const TileCost& t) { return std::max({t.compute, t.in + t.out, t.w}); };
    std::uint64_t steps = steps_;
    if (cost_.tiles == 1) {
      steps = first.compute;
    } else {
      steps -= full_step(first) + full_step(last);
      steps += std::max(first.compute, first.out);
      steps += std::max({last.compute, last.in, last.w});
    }
    cost_.dma_cycles = std::max(port_a_, port_b_);
    cost_.latency_cycles = std::max(first.in, first.w) + steps + last.out;
  }

 private:
  LayerCost& cost_;
  std::uint64_t port_a_ = 0, port_b_ = 0, steps_ = 0;
};

inline TileCost conv_tile_cost(const LayerSpec& l, std::size_t tr, std::size_t tc, std::size_t tq, std::size_t tp,
                               bool last_in, std::size_t pb) {
  TileCost t;
  t.compute = std::uint64_t{tr} * tc * l.kernel * l.kernel;
  t.in_bytes = std::uint64_t{halo_extent(tr, l.stride, l.kernel)} * halo_extent(tc, l.stride, l.kernel) * tp * kWordBytes;
  t.w_bytes = std::uint64_t{tp} * tq * l.kernel * l.kernel * kWordBytes;
  t.out_bytes = last_in ? std::uint64_t{tr} * tc * tq * kWordBytes : 0;
  t.in = transfer_cycles(t.in_bytes, pb);
  t.w = transfer_cycles(t.w_bytes, pb);
  t.out = transfer_cycles(t.out_bytes, pb);
  return t;
}

inline TileCost fc_tile_cost(std::size_t to, std::size_t tl, bool last_in, const TileConfig& cfg, std::size_t pb) {
  TileCost t;
  t.compute = std::uint64_t{(tl + cfg.in_channels - 1) / cfg.in_channels} *
              ((to + cfg.out_channels - 1) / cfg.out_channels);
  t.in_bytes = std::uint64_t{tl} * kWordBytes;
  t.w_bytes = std::uint64_t{tl} * to * kWordBytes;
  t.out_bytes = last_in ? std::uint64_t{to} * kWordBytes : 0;
  t.in = transfer_cycles(t.in_bytes, pb);
  t.w = transfer_cycles(t.w_bytes, pb);
  t.out = transfer_cycles(t.out_bytes, pb);
  return t;
}

inline void finish_rates(LayerCost& c, double freq_mhz) {
  c.latency_ms = static_cast<double>(c.latency_cycles) / (freq_mhz * 1e3);
  c.gops = c.latency_cycles == 0 ? 0.0
                                 : static_cast<double>(c.ops) * freq_mhz / (static_cast<double>(c.latency_cycles) * 1e3);
}

// Cost without the budget check; the caller guarantees feasibility.
inline LayerCost layer_cost_unchecked(const LayerSpec& l, const TileConfig& cfg, const HardwareBudget& hw) {
  LayerCost cost;
  cost.kind = l.kind;
  const std::size_t pb = hw.port_bytes_per_cycle;
  LatencyAccumulator acc(cost);
  if (l.kind == LayerKind::Conv) {
    cost.ops = conv_ops(l);
    cost.tile_ops = tile_ops(cfg, l.kernel);
    const auto rows = extent_classes(l.out_rows, cfg.tile_rows);
    const auto cols = extent_classes(l.out_cols, cfg.tile_cols);
    const auto outs = extent_classes(l.out_channels, cfg.out_channels);
    const auto ins = extent_classes(l.in_channels, cfg.in_channels);
    for (const auto& r : rows)
      for (const auto& c : cols)
        for (const auto& o : outs)
          for (const auto& i : ins)
            acc.add(conv_tile_cost(l, r.size, c.size, o.size, i.size, i.last, pb), r.count * c.count * o.count * i.count);
    const std::size_t tr0 = std::min(cfg.tile_rows, l.out_rows), tc0 = std::min(cfg.tile_cols, l.out_cols);
    const std::size_t tq0 = std::min(cfg.out_channels, l.out_channels), tp0 = std::min(cfg.in_channels, l.in_channels);
    const auto first = conv_tile_cost(l, tr0, tc0, tq0, tp0, ins.size() == 1 && ins[0].count == 1, pb);
    const auto last = conv_tile_cost(l, rows.back().size, cols.back().size, outs.back().size, ins.back().size, true, pb);
    acc.finish(first, last);
  } else if (l.kind == LayerKind::FC) {
    cost.ops = fc_ops(l);
    cost.tile_ops = std::uint64_t{2} * cfg.fc_inputs * cfg.fc_outputs;
    const auto outs = extent_classes(l.out_channels, cfg.fc_outputs);
    const auto ins = extent_classes(l.in_channels, cfg.fc_inputs);
    for (const auto& o : outs)
      for (const auto& i : ins) acc.add(fc_tile_cost(o.size, i.size, i.last, cfg, pb), o.count * i.count);
    const std::size_t to0 = std::min(cfg.fc_outputs, l.out_channels), tl0 = std::min(cfg.fc_inputs, l.in_channels);
    const auto first = fc_tile_cost(to0, tl0, ins.size() == 1 && ins[0].count == 1, cfg, pb);
    const auto last = fc_tile_cost(outs.back().size, ins.back().size, true, cfg, pb);
    acc.finish(first, last);
  } else {
    return cost;
  }
  finish_rates(cost, hw.freq_mhz);
  return cost;
}

inline void require_feasible(const TileConfig& cfg, const HardwareBudget& hw, const LayerEnvelope& env) {
  validate(cfg);
  validate(hw);
  const ResourceUsage u = resource_usage(cfg, env);
  if (!fits(u, hw)) {
    throw ConfigError("configuration exceeds budget: needs " + std::to_string(u.bram18) + " BRAM18 / " +
                      std::to_string(u.dsp) + " DSP, budget " + std::to_string(hw.bram18_total) + " / " +
                      std::to_string(hw.dsp_total));
  }
}

}  // namespace detail

inline LayerCost layer_cost(const LayerSpec& l, const TileConfig& cfg, const HardwareBudget& hw) {
  detail::require_feasible(cfg, hw, envelope_of(l));
  return detail::layer_cost_unchecked(l, cfg, hw);
}

inline CostReport network_report(const NetworkSpec& net, const TileConfig& cfg, const HardwareBudget& hw) {
  const LayerEnvelope env = envelope_of(net);
  detail::require_feasible(cfg, hw, env);
  CostReport rep;
  rep.network = net.name;
  rep.hw = hw;
  rep.cfg = cfg;
  rep.resources = resource_usage(cfg, env);
  rep.totals.peak_gops = peak_gops(cfg, hw.freq_mhz);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].on_accelerator()) continue;
    LayerCost c = detail::layer_cost_unchecked(net.layers[i], cfg, hw);
    c.layer_index = i;
    rep.totals.total_ops += c.ops;
    rep.totals.latency_cycles += c.latency_cycles;
    rep.per_layer.push_back(c);
  }
  rep.totals.latency_ms = static_cast<double>(rep.totals.latency_cycles) / (hw.freq_mhz * 1e3);
  rep.totals.achieved_gops = rep.totals.latency_cycles == 0
                                 ? 0.0
                                 : static_cast<double>(rep.totals.total_ops) * hw.freq_mhz /
                                       (static_cast<double>(rep.totals.latency_cycles) * 1e3);
  return rep;
}

}  // namespace cnnt
