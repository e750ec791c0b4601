#pragma once

// Functional simulator of the tiled accelerator template.
//
// Data moves DRAM -> on-chip buffers -> a single compute unit that takes
// `in_channels` input values and produces `out_channels` partial sums per
// compute step. Conv and FC layers have dedicated buffers. Input and weight
// buffers are ping-pong pairs; the slot used alternates tile by tile.
//
// Partial sums stay in Accum precision across input-channel tiles and are
// reduced to Q2.14 exactly once, at StoreOutput, so the tiled result is
// bit-identical to the untiled reference for any tile configuration.
//
// The host is assumed to lay the IFM out zero-padded in DRAM, so every input
// window load moves the full ((Tr-1)s+K)·((Tc-1)s+K)·mu halo window.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnnt/errors.hpp"
#include "cnnt/fixedpoint.hpp"
#include "cnnt/netspec.hpp"
#include "cnnt/reference_engine.hpp"
#include "cnnt/tensor.hpp"
#include "cnnt/weights_io.hpp"

namespace cnnt {

inline constexpr std::size_t kWordBytes = 2;
inline constexpr std::size_t kDefaultPortBytesPerCycle = 8;

struct TileConfig {
  std::size_t tile_rows = 1;     // Tr: output rows per tile
  std::size_t tile_cols = 1;     // Tc: output cols per tile
  std::size_t in_channels = 1;   // mu: input channels per compute step
  std::size_t out_channels = 1;  // tau: output channels per compute step
  std::size_t fc_inputs = 1;     // lambda: FC input neurons per outer tile
  std::size_t fc_outputs = 1;    // omega: FC output neurons per outer tile

  friend auto operator<=>(const TileConfig&, const TileConfig&) = default;
};

inline void validate(const TileConfig& c) {
  if (c.tile_rows == 0 || c.tile_cols == 0 || c.in_channels == 0 || c.out_channels == 0 || c.fc_inputs == 0 ||
      c.fc_outputs == 0) {
    throw ConfigError("tile factors must all be >= 1");
  }
  if (c.in_channels > c.fc_inputs) throw ConfigError("mu must not exceed lambda");
  if (c.out_channels > c.fc_outputs) throw ConfigError("tau must not exceed omega");
}

// --- tile schedules ---------------------------------------------------------

struct Extent {
  std::size_t begin = 0;
  std::size_t size = 0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

// Splits [0, total) into tiles of `tile`, the last one clamped.
inline std::vector<Extent> split_extent(std::size_t total, std::size_t tile) {
  std::vector<Extent> out;
  for (std::size_t b = 0; b < total; b += tile) out.push_back({b, std::min(tile, total - b)});
  return out;
}

struct TileCoords {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t out = 0;
  std::size_t in = 0;
  friend bool operator==(const TileCoords&, const TileCoords&) = default;
};

struct ConvTile {
  TileCoords coords;
  Extent rows, cols, out, in;
  bool first_in = false;
  bool last_in = false;
};

struct FcTile {
  TileCoords coords;
  Extent out, in;
  bool first_in = false;
  bool last_in = false;
};

/// Row tiles outermost, then column tiles, then output-channel tiles, with
/// input-channel tiles innermost so partial sums stay on chip.
inline std::vector<ConvTile> tile_schedule_conv(const LayerSpec& l, const TileConfig& cfg) {
  if (l.kind != LayerKind::Conv) throw std::domain_error("tile_schedule_conv: layer is not a convolution");
  const auto rows = split_extent(l.out_rows, cfg.tile_rows);
  const auto cols = split_extent(l.out_cols, cfg.tile_cols);
  const auto outs = split_extent(l.out_channels, cfg.out_channels);
  const auto ins = split_extent(l.in_channels, cfg.in_channels);
  std::vector<ConvTile> tiles;
  tiles.reserve(rows.size() * cols.size() * outs.size() * ins.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t o = 0; o < outs.size(); ++o)
        for (std::size_t i = 0; i < ins.size(); ++i)
          tiles.push_back({{r, c, o, i}, rows[r], cols[c], outs[o], ins[i], i == 0, i + 1 == ins.size()});
  return tiles;
}

/// Output-neuron tiles outer, input-neuron tiles inner.
inline std::vector<FcTile> tile_schedule_fc(const LayerSpec& l, const TileConfig& cfg) {
  if (l.kind != LayerKind::FC) throw std::domain_error("tile_schedule_fc: layer is not fully connected");
  const auto outs = split_extent(l.out_channels, cfg.fc_outputs);
  const auto ins = split_extent(l.in_channels, cfg.fc_inputs);
  std::vector<FcTile> tiles;
  tiles.reserve(outs.size() * ins.size());
  for (std::size_t o = 0; o < outs.size(); ++o)
    for (std::size_t i = 0; i < ins.size(); ++i)
      tiles.push_back({{0, 0, o, i}, outs[o], ins[i], i == 0, i + 1 == ins.size()});
  return tiles;
}

// --- buffers ----------------------------------------------------------------

struct BufferSpec {
  std::size_t words = 0;
  std::size_t banks = 1;
  bool ping_pong = true;
  friend bool operator==(const BufferSpec&, const BufferSpec&) = default;
};

struct BufferModel {
  BufferSpec conv_input, conv_weights, conv_output;
  BufferSpec fc_input, fc_weights, fc_output;
  friend bool operator==(const BufferModel&, const BufferModel&) = default;
};

// Largest kernel and stride the conv buffers must accommodate.
struct LayerEnvelope {
  std::size_t max_kernel = 1;
  std::size_t max_stride = 1;
};

inline LayerEnvelope envelope_of(std::span<const LayerSpec> layers) {
  LayerEnvelope e;
  for (const auto& l : layers) {
    if (l.kind != LayerKind::Conv) continue;
    e.max_kernel = std::max(e.max_kernel, l.kernel);
    e.max_stride = std::max(e.max_stride, l.stride);
  }
  return e;
}
inline LayerEnvelope envelope_of(const NetworkSpec& net) { return envelope_of(std::span<const LayerSpec>(net.layers)); }
inline LayerEnvelope envelope_of(const LayerSpec& l) { return envelope_of(std::span<const LayerSpec>(&l, 1)); }

inline std::size_t halo_extent(std::size_t tile, std::size_t stride, std::size_t kernel) {
  return (tile - 1) * stride + kernel;
}

// Input buffer banked along mu; weight and output buffers banked along tau
// (each weight word is mu lanes wide so one step reads mu·tau weights).
inline BufferModel make_buffers(const TileConfig& cfg, const LayerEnvelope& env) {
  const std::size_t k2 = env.max_kernel * env.max_kernel;
  BufferModel b;
  b.conv_input = {halo_extent(cfg.tile_rows, env.max_stride, env.max_kernel) *
                      halo_extent(cfg.tile_cols, env.max_stride, env.max_kernel) * cfg.in_channels,
                  cfg.in_channels};
  b.conv_weights = {cfg.in_channels * cfg.out_channels * k2, cfg.out_channels};
  b.conv_output = {cfg.tile_rows * cfg.tile_cols * cfg.out_channels, cfg.out_channels};
  b.fc_input = {cfg.fc_inputs, cfg.in_channels};
  b.fc_weights = {cfg.fc_inputs * cfg.fc_outputs, cfg.out_channels};
  b.fc_output = {cfg.fc_outputs, cfg.out_channels};
  return b;
}

// Words each buffer must hold for one layer under cfg (tiles clamped to the layer).
inline BufferModel required_buffers(const LayerSpec& l, const TileConfig& cfg) {
  BufferModel b{};
  if (l.kind == LayerKind::Conv) {
    const std::size_t tr = std::min(cfg.tile_rows, l.out_rows);
    const std::size_t tc = std::min(cfg.tile_cols, l.out_cols);
    const std::size_t tp = std::min(cfg.in_channels, l.in_channels);
    const std::size_t tq = std::min(cfg.out_channels, l.out_channels);
    b.conv_input.words = halo_extent(tr, l.stride, l.kernel) * halo_extent(tc, l.stride, l.kernel) * tp;
    b.conv_weights.words = tp * tq * l.kernel * l.kernel;
    b.conv_output.words = tr * tc * tq;
  } else if (l.kind == LayerKind::FC) {
    const std::size_t tl = std::min(cfg.fc_inputs, l.in_channels);
    const std::size_t to = std::min(cfg.fc_outputs, l.out_channels);
    b.fc_input.words = tl;
    b.fc_weights.words = tl * to;
    b.fc_output.words = to;
  }
  return b;
}

inline void check_fits(const BufferModel& have, const LayerSpec& l, const TileConfig& cfg, std::size_t index = 0) {
  const BufferModel need = required_buffers(l, cfg);
  auto check = [&](const BufferSpec& h, const BufferSpec& n, const char* name) {
    if (n.words > h.words) {
      throw ConfigError("layer " + std::to_string(index) + ": " + name + " buffer needs " + std::to_string(n.words) +
                        " words, capacity " + std::to_string(h.words));
    }
  };
  check(have.conv_input, need.conv_input, "conv input");
  check(have.conv_weights, need.conv_weights, "conv weight");
  check(have.conv_output, need.conv_output, "conv output");
  check(have.fc_input, need.fc_input, "fc input");
  check(have.fc_weights, need.fc_weights, "fc weight");
  check(have.fc_output, need.fc_output, "fc output");
}

// --- trace ------------------------------------------------------------------

enum class EventKind { LoadInput, LoadWeights, Compute, StoreOutput };
enum class Port { A, B, None };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::LoadInput: return "LoadInput";
    case EventKind::LoadWeights: return "LoadWeights";
    case EventKind::Compute: return "Compute";
    case EventKind::StoreOutput: return "StoreOutput";
  }
  return "?";
}

inline std::string_view to_string(Port p) {
  switch (p) {
    case Port::A: return "A";
    case Port::B: return "B";
    case Port::None: return "-";
  }
  return "?";
}

struct TraceEvent {
  EventKind kind = EventKind::Compute;
  TileCoords tile;
  std::uint64_t bytes = 0;   // words × 2 for transfers, 0 for compute
  std::uint64_t cycles = 1;
  Port port = Port::None;
  std::uint64_t macs = 0;    // compute events only
  int slot = 0;              // ping-pong half used by this tile

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

struct TraceTotals {
  std::uint64_t input_bytes = 0;
  std::uint64_t weight_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t compute_events = 0;
  std::uint64_t macs = 0;
};

inline TraceTotals totals(const Trace& trace) {
  TraceTotals t;
  for (const auto& e : trace) {
    switch (e.kind) {
      case EventKind::LoadInput: t.input_bytes += e.bytes; break;
      case EventKind::LoadWeights: t.weight_bytes += e.bytes; break;
      case EventKind::StoreOutput: t.output_bytes += e.bytes; break;
      case EventKind::Compute:
        ++t.compute_events;
        t.macs += e.macs;
        break;
    }
  }
  return t;
}

inline std::uint64_t transfer_cycles(std::uint64_t bytes, std::size_t port_bytes_per_cycle) {
  return (bytes + port_bytes_per_cycle - 1) / port_bytes_per_cycle;
}

inline nlohmann::json to_json(const TraceEvent& e, std::size_t layer_index) {
  return {{"layer", layer_index},
          {"kind", std::string(to_string(e.kind))},
          {"tile", {e.tile.row, e.tile.col, e.tile.out, e.tile.in}},
          {"bytes", e.bytes},
          {"cycles", e.cycles},
          {"port", std::string(to_string(e.port))},
          {"macs", e.macs},
          {"slot", e.slot}};
}

inline TraceEvent trace_event_from_json(const nlohmann::json& j) {
  TraceEvent e;
  const auto kind = j.at("kind").get<std::string>();
  for (EventKind k : {EventKind::LoadInput, EventKind::LoadWeights, EventKind::Compute, EventKind::StoreOutput}) {
    if (kind == to_string(k)) e.kind = k;
  }
  const auto& t = j.at("tile");
  e.tile = {t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>(),
            t.at(3).get<std::size_t>()};
  e.bytes = j.at("bytes").get<std::uint64_t>();
  e.cycles = j.at("cycles").get<std::uint64_t>();
  const auto port = j.at("port").get<std::string>();
  e.port = port == "A" ? Port::A : port == "B" ? Port::B : Port::None;
  e.macs = j.at("macs").get<std::uint64_t>();
  e.slot = j.at("slot").get<int>();
  return e;
}

/// One JSON object per line.
inline void write_trace_jsonl(std::ostream& os, const Trace& trace, std::size_t layer_index) {
  for (const auto& e : trace) os << to_json(e, layer_index).dump() << '\n';
}

// --- simulation -------------------------------------------------------------

struct SimOptions {
  std::size_t port_bytes_per_cycle = kDefaultPortBytesPerCycle;
  std::optional<BufferModel> buffers;  // defaults to buffers sized for the layer
};

struct TiledResult {
  QTensor ofm;
  Trace trace;
};

namespace detail {

class EventSink {
 public:
  EventSink(Trace& trace, std::size_t port_bytes) : trace_(trace), port_bytes_(port_bytes) {}

  void transfer(EventKind kind, const TileCoords& tile, std::uint64_t words, Port port, int slot) {
    const std::uint64_t bytes = words * kWordBytes;
    trace_.push_back({kind, tile, bytes, transfer_cycles(bytes, port_bytes_), port, 0, slot});
  }
  void compute(const TileCoords& tile, std::uint64_t macs, int slot) {
    trace_.push_back({EventKind::Compute, tile, 0, 1, Port::None, macs, slot});
  }

 private:
  Trace& trace_;
  std::size_t port_bytes_;
};

inline void check_port(std::size_t port_bytes) {
  if (port_bytes == 0) throw ConfigError("port width must be >= 1 byte per cycle");
}

}  // namespace detail

inline TiledResult run_conv_tiled(const QTensor& ifm, const QTensor& w, const LayerSpec& l, const TileConfig& cfg,
                                  std::span<const FixedQ> bias = {}, const SimOptions& opt = {}) {
  if (l.kind != LayerKind::Conv) throw std::domain_error("run_conv_tiled: layer is not a convolution");
  if (ifm.dims != l.input.dims()) throw std::domain_error("run_conv_tiled: IFM dims do not match layer");
  if (w.dims != expected_weight_dims(l)) throw std::domain_error("run_conv_tiled: weight dims do not match layer");
  if (!bias.empty() && bias.size() != l.out_channels) throw std::domain_error("bias length != output channels");
  validate(cfg);
  detail::check_port(opt.port_bytes_per_cycle);
  const BufferModel buffers = opt.buffers.value_or(make_buffers(cfg, envelope_of(l)));
  check_fits(buffers, l, cfg);

  const std::size_t K = l.kernel;
  const std::size_t s = l.stride;
  const auto pad = static_cast<std::int64_t>(l.pad);
  const auto in_rows = static_cast<std::int64_t>(l.input.rows);
  const auto in_cols = static_cast<std::int64_t>(l.input.cols);

  std::array<std::vector<FixedQ>, 2> in_buf, w_buf;
  for (auto& b : in_buf) b.resize(buffers.conv_input.words);
  for (auto& b : w_buf) b.resize(buffers.conv_weights.words);
  std::vector<Accum> out_buf(buffers.conv_output.words);

  TiledResult res;
  res.ofm = QTensor({l.out_rows, l.out_cols, l.out_channels});
  detail::EventSink sink(res.trace, opt.port_bytes_per_cycle);

  const auto tiles = tile_schedule_conv(l, cfg);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const ConvTile& tile = tiles[t];
    const int slot = static_cast<int>(t % 2);
    const std::size_t tr = tile.rows.size, tc = tile.cols.size, tq = tile.out.size, tp = tile.in.size;
    const std::size_t wr = halo_extent(tr, s, K), wc = halo_extent(tc, s, K);

    // Port A: halo window of the IFM, channel innermost.
    auto& ib = in_buf[slot];
    const auto r0 = static_cast<std::int64_t>(tile.rows.begin * s) - pad;
    const auto c0 = static_cast<std::int64_t>(tile.cols.begin * s) - pad;
    for (std::size_t a = 0; a < wr; ++a) {
      for (std::size_t b = 0; b < wc; ++b) {
        const std::int64_t r = r0 + static_cast<std::int64_t>(a);
        const std::int64_t c = c0 + static_cast<std::int64_t>(b);
        const bool inside = r >= 0 && c >= 0 && r < in_rows && c < in_cols;
        for (std::size_t ci = 0; ci < tp; ++ci) {
          ib[(a * wc + b) * tp + ci] =
              inside ? ifm.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), tile.in.begin + ci) : FixedQ{};
        }
      }
    }
    sink.transfer(EventKind::LoadInput, tile.coords, wr * wc * tp, Port::A, slot);

    // Port B: tq × tp × K × K weight block.
    auto& wb = w_buf[slot];
    for (std::size_t to = 0; to < tq; ++to)
      for (std::size_t ti = 0; ti < tp; ++ti)
        for (std::size_t i = 0; i < K; ++i)
          for (std::size_t j = 0; j < K; ++j)
            wb[((to * tp + ti) * K + i) * K + j] = w.at(tile.out.begin + to, tile.in.begin + ti, i, j);
    sink.transfer(EventKind::LoadWeights, tile.coords, tq * tp * K * K, Port::B, slot);

    if (tile.first_in) {
      for (std::size_t px = 0; px < tr * tc; ++px)
        for (std::size_t to = 0; to < tq; ++to)
          out_buf[px * tq + to] = bias.empty() ? Accum{} : widen(bias[tile.out.begin + to]);
    }

    // One compute step per output pixel and kernel position: tp × tq MACs.
    for (std::size_t r = 0; r < tr; ++r) {
      for (std::size_t c = 0; c < tc; ++c) {
        for (std::size_t i = 0; i < K; ++i) {
          for (std::size_t j = 0; j < K; ++j) {
            const FixedQ* in_vec = &ib[((r * s + i) * wc + (c * s + j)) * tp];
            Accum* acc = &out_buf[(r * tc + c) * tq];
            for (std::size_t to = 0; to < tq; ++to) {
              for (std::size_t ti = 0; ti < tp; ++ti) acc[to] = mac(acc[to], in_vec[ti], wb[((to * tp + ti) * K + i) * K + j]);
            }
            sink.compute(tile.coords, tp * tq, slot);
          }
        }
      }
    }

    if (tile.last_in) {
      for (std::size_t r = 0; r < tr; ++r)
        for (std::size_t c = 0; c < tc; ++c)
          for (std::size_t to = 0; to < tq; ++to)
            res.ofm.at(tile.rows.begin + r, tile.cols.begin + c, tile.out.begin + to) =
                reduce(out_buf[(r * tc + c) * tq + to]);
      sink.transfer(EventKind::StoreOutput, tile.coords, tr * tc * tq, Port::A, slot);
    }
  }
  return res;
}

inline TiledResult run_fc_tiled(const QTensor& ifm, const QTensor& w, const LayerSpec& l, const TileConfig& cfg,
                                std::span<const FixedQ> bias = {}, const SimOptions& opt = {}) {
  if (l.kind != LayerKind::FC) throw std::domain_error("run_fc_tiled: layer is not fully connected");
  if (ifm.size() != l.in_channels) throw std::domain_error("run_fc_tiled: IFM length != layer inputs");
  if (w.dims != expected_weight_dims(l)) throw std::domain_error("run_fc_tiled: weight dims do not match layer");
  if (!bias.empty() && bias.size() != l.out_channels) throw std::domain_error("bias length != output channels");
  validate(cfg);
  detail::check_port(opt.port_bytes_per_cycle);
  const BufferModel buffers = opt.buffers.value_or(make_buffers(cfg, envelope_of(l)));
  check_fits(buffers, l, cfg);

  const std::size_t mu = cfg.in_channels, tau = cfg.out_channels;
  std::array<std::vector<FixedQ>, 2> in_buf, w_buf;
  for (auto& b : in_buf) b.resize(buffers.fc_input.words);
  for (auto& b : w_buf) b.resize(buffers.fc_weights.words);
  std::vector<Accum> out_buf(buffers.fc_output.words);

  TiledResult res;
  res.ofm = QTensor({1, 1, l.out_channels});
  detail::EventSink sink(res.trace, opt.port_bytes_per_cycle);

  const auto tiles = tile_schedule_fc(l, cfg);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const FcTile& tile = tiles[t];
    const int slot = static_cast<int>(t % 2);
    const std::size_t to = tile.out.size, tl = tile.in.size;

    auto& ib = in_buf[slot];
    std::copy_n(ifm.data.begin() + static_cast<std::ptrdiff_t>(tile.in.begin), tl, ib.begin());
    sink.transfer(EventKind::LoadInput, tile.coords, tl, Port::A, slot);

    auto& wb = w_buf[slot];
    for (std::size_t o = 0; o < to; ++o)
      std::copy_n(w.data.begin() + static_cast<std::ptrdiff_t>((tile.out.begin + o) * l.in_channels + tile.in.begin),
                  tl, wb.begin() + static_cast<std::ptrdiff_t>(o * tl));
    sink.transfer(EventKind::LoadWeights, tile.coords, tl * to, Port::B, slot);

    if (tile.first_in) {
      for (std::size_t o = 0; o < to; ++o) out_buf[o] = bias.empty() ? Accum{} : widen(bias[tile.out.begin + o]);
    }

    // (lambda, omega) block fed to the compute unit as (mu, tau) sub-blocks.
    for (const Extent& ob : split_extent(to, tau)) {
      for (const Extent& sb : split_extent(tl, mu)) {
        for (std::size_t o = ob.begin; o < ob.begin + ob.size; ++o)
          for (std::size_t i = sb.begin; i < sb.begin + sb.size; ++i) out_buf[o] = mac(out_buf[o], ib[i], wb[o * tl + i]);
        sink.compute(tile.coords, ob.size * sb.size, slot);
      }
    }

    if (tile.last_in) {
      for (std::size_t o = 0; o < to; ++o) res.ofm.data[tile.out.begin + o] = reduce(out_buf[o]);
      sink.transfer(EventKind::StoreOutput, tile.coords, to, Port::A, slot);
    }
  }
  return res;
}

struct NetworkRun {
  std::vector<QTensor> outputs;  // one per layer
  std::vector<Trace> traces;     // one per layer; empty for host-path layers
};

/// Accelerator layers through the tiled engine, host layers through the
/// reference host path. All layers are checked against the buffers before any
/// layer executes.
inline NetworkRun run_network_tiled(const NetworkSpec& net, const QTensor& input, const NetworkWeights<FixedQ>& weights,
                                    const TileConfig& cfg, const SimOptions& opt = {}) {
  if (input.dims != net.input.dims()) throw std::domain_error("input tensor does not match network input shape");
  if (weights.size() != accelerator_layer_count(net)) throw std::domain_error("one weight set per accelerator layer required");
  validate(cfg);
  detail::check_port(opt.port_bytes_per_cycle);
  SimOptions layer_opt = opt;
  layer_opt.buffers = opt.buffers.value_or(make_buffers(cfg, envelope_of(net)));
  for (std::size_t i = 0; i < net.layers.size(); ++i) check_fits(*layer_opt.buffers, net.layers[i], cfg, i);

  NetworkRun run;
  run.outputs.reserve(net.layers.size());
  const QTensor* cur = &input;
  std::size_t wi = 0;
  for (const auto& l : net.layers) {
    if (l.on_accelerator()) {
      const auto& lw = weights[wi++];
      TiledResult r = l.kind == LayerKind::Conv ? run_conv_tiled(*cur, lw.weights, l, cfg, lw.bias, layer_opt)
                                                : run_fc_tiled(*cur, lw.weights, l, cfg, lw.bias, layer_opt);
      run.outputs.push_back(std::move(r.ofm));
      run.traces.push_back(std::move(r.trace));
    } else {
      run.outputs.push_back(host_layer(*cur, l));
      run.traces.emplace_back();
    }
    cur = &run.outputs.back();
  }
  return run;
}

}  // namespace cnnt
