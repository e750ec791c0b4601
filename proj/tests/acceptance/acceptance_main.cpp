// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "cnnt/cnnt.hpp"
#include "commands.hpp"
#include "oracles.hpp"
#include "random_cases.hpp"
#include "test_support.hpp"

using namespace cnnt;

namespace {

// A criterion returns an empty string on success, otherwise what went wrong.
using Criterion = std::function<std::string()>;

int failures = 0;

void run(int id, const char* title, const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string why;
  try {
    why = c();
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (why.empty()) {
    std::printf("PASS %d %s (%.2f s)\n", id, title, secs);
  } else {
    ++failures;
    std::printf("FAIL %d %s (%.2f s): %s\n", id, title, secs, why.c_str());
  }
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const HardwareBudget kUnbounded{"unbounded", 1u << 30, 1u << 30, kDefaultPortBytesPerCycle, 100.0};

std::string tiled_matches_reference() {
  Rng rng(20240601);
  const auto t0 = std::chrono::steady_clock::now();
  int conv = 0, fc = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto lc = testing_support::random_case(rng);
    const LayerSpec& l = lc.layer;
    const QTensor x = random_tensor(rng, l.input.dims());
    const QTensor w = random_tensor(rng, expected_weight_dims(l));
    const bool is_conv = l.kind == LayerKind::Conv;
    const QTensor ref = is_conv ? conv_forward(x, w, l) : fc_forward(x, w, l);
    const QTensor got = (is_conv ? run_conv_tiled(x, w, l, lc.cfg) : run_fc_tiled(x, w, l, lc.cfg)).ofm;
    if (got != ref) return fmt("case %d differs (%s layer)", n, is_conv ? "conv" : "fc");
    (is_conv ? conv : fc)++;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 60.0) return fmt("took %.1f s", secs);
  if (conv == 0 || fc == 0) return "sample lacks one layer kind";
  return {};
}

std::string op_counts_match_loop_nest() {
  for (std::size_t R = 1; R <= 8; ++R)
    for (std::size_t C = 1; C <= 8; ++C)
      for (std::size_t p = 1; p <= 8; ++p)
        for (std::size_t q = 1; q <= 8; ++q)
          for (std::size_t K = 1; K <= 8; ++K) {
            const LayerSpec l = LayerSpec::conv({R + K - 1, C + K - 1, p}, q, K);
            if (conv_ops(l) != 2 * oracle::conv_macs(R, C, p, q, K))
              return fmt("conv R=%zu C=%zu p=%zu q=%zu K=%zu", R, C, p, q, K);
          }
  for (std::size_t p = 1; p <= 8; ++p)
    for (std::size_t q = 1; q <= 8; ++q)
      if (fc_ops(LayerSpec::fc(p, q)) != 2 * oracle::fc_macs(p, q)) return fmt("fc p=%zu q=%zu", p, q);
  return {};
}

std::string peak_exceeds_reported() {
  const double expected[] = {97.344, 237.6, 367.4};
  std::size_t i = 0;
  for (const auto& b : board_presets()) {
    const double peak = peak_gops(b.published, b.hw.freq_mhz);
    if (std::abs(peak - expected[i]) > 1e-9) return fmt("%s peak %.4f, expected %.4f", b.hw.name.c_str(), peak, expected[i]);
    if (!(peak > b.reported_gops)) return fmt("%s peak %.3f not above %.1f", b.hw.name.c_str(), peak, b.reported_gops);
    ++i;
  }
  return {};
}

std::string published_configs_fit() {
  const std::size_t dsp[] = {288, 600, 1100};
  std::size_t i = 0;
  for (const auto& b : board_presets()) {
    for (const char* net : {"lenet5", "alexnet", "vgg16"}) {
      const ResourceUsage u = resource_usage(b.published, envelope_of(testing_support::preset(net)));
      if (u.dsp != dsp[i]) return fmt("%s uses %zu DSP, expected %zu", b.hw.name.c_str(), u.dsp, dsp[i]);
      if (!fits(u, b.hw))
        return fmt("%s with %s: %zu/%zu BRAM18, %zu/%zu DSP", b.hw.name.c_str(), net, u.bram18, b.hw.bram18_total, u.dsp,
                   b.hw.dsp_total);
    }
    ++i;
  }
  return {};
}

std::string heuristic_keeps_published_units() {
  std::vector<TileConfig> units;
  for (const auto& b : board_presets()) units.push_back(b.published);
  const auto kept = heuristic_filter(units);
  if (kept.size() != units.size()) return fmt("kept %zu of %zu", kept.size(), units.size());
  return {};
}

std::string quantize_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const double lo = -2.0, hi = 2.0 - std::ldexp(1.0, -14), half_ulp = std::ldexp(1.0, -15);
  constexpr int kPoints = 1000000;
  for (int i = 0; i < kPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kPoints - 1);
    if (std::abs(dequantize(quantize(x)) - x) > half_ulp) return fmt("round trip error at %.17g", x);
  }
  if (quantize(3.0).raw != kMaxRaw || quantize(-3.0).raw != kMinRaw) return "out-of-range values do not saturate";
  if (quantize(2.0).raw != kMaxRaw || quantize(-2.0).raw != kMinRaw) return "range edges wrong";
  if (quantize(0.5).raw != 8192) return "0.5 does not map to 8192";
  if (reduce(Accum{(std::int64_t{1} << 40)}).raw != kMaxRaw) return "reduce does not saturate";
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 5.0) return fmt("took %.2f s", secs);
  return {};
}

std::string report_bytes_match_trace() {
  Rng rng(77);
  for (int n = 0; n < 100; ++n) {
    const auto lc = testing_support::random_case(rng, 30000);
    const LayerSpec& l = lc.layer;
    const QTensor x = random_tensor(rng, l.input.dims()), w = random_tensor(rng, expected_weight_dims(l));
    const Trace t = (l.kind == LayerKind::Conv ? run_conv_tiled(x, w, l, lc.cfg) : run_fc_tiled(x, w, l, lc.cfg)).trace;
    const TraceTotals tt = totals(t);
    const LayerCost c = layer_cost(l, lc.cfg, kUnbounded);
    if (c.input_bytes != tt.input_bytes || c.weight_bytes != tt.weight_bytes || c.output_bytes != tt.output_bytes)
      return fmt("case %d: model %llu/%llu/%llu, trace %llu/%llu/%llu", n, (unsigned long long)c.input_bytes,
                 (unsigned long long)c.weight_bytes, (unsigned long long)c.output_bytes,
                 (unsigned long long)tt.input_bytes, (unsigned long long)tt.weight_bytes,
                 (unsigned long long)tt.output_bytes);
  }
  return {};
}

std::string limit_behavior() {
  {
    const LayerSpec l = LayerSpec::conv({66, 66, 8}, 8, 3);
    const TileConfig cfg{8, 8, 8, 8, 8, 8};
    const LayerCost c = layer_cost(l, cfg, kUnbounded);
    const double peak = peak_gops(cfg, kUnbounded.freq_mhz);
    if (c.gops > peak || c.gops < 0.95 * peak) return fmt("compute-bound layer at %.3f of peak", c.gops / peak);
  }
  {
    HardwareBudget hw = kUnbounded;
    hw.port_bytes_per_cycle = 1;
    const LayerSpec l = LayerSpec::conv({64, 64, 1}, 1, 1);
    const LayerCost c = layer_cost(l, TileConfig{8, 8, 1, 1, 1, 1}, hw);
    const double ratio = static_cast<double>(c.latency_cycles) /
                         static_cast<double>(c.input_bytes + c.weight_bytes + c.output_bytes);
    if (ratio < 0.95 || ratio > 1.05) return fmt("bandwidth-bound latency is %.3f of transfer bytes", ratio);
  }
  return {};
}

std::string explore_is_deterministic() {
  cli::ExploreArgs a;
  a.hw.board = "ultra96";
  std::ostringstream out1, out2, err;
  if (cli::cmd_explore(a, out1, err) != cli::kOk) return "explore failed: " + err.str();
  a.threads = 3;
  if (cli::cmd_explore(a, out2, err) != cli::kOk) return "explore failed: " + err.str();
  if (out1.str() != out2.str()) return "outputs differ between runs";
  std::istringstream is(out1.str());
  const auto rows = read_explore_csv(is);
  for (const auto& r : rows)
    if (r.cfg.in_channels == 12 && r.cfg.out_channels == 24) return {};
  return "no 12x24 row";
}

}  // namespace

int main() {
  run(1, "tiled engine matches reference on 1000 random layers", tiled_matches_reference);
  run(2, "op counts match the naive loop nest for every dim up to 8", op_counts_match_loop_nest);
  run(3, "peak throughput exceeds measured performance on every board", peak_exceeds_reported);
  run(4, "published configurations fit DSP and BRAM budgets", published_configs_fit);
  run(5, "ratio heuristic keeps all published compute units", heuristic_keeps_published_units);
  run(6, "quantization round trip and saturation", quantize_round_trip);
  run(7, "cost report transfer bytes equal simulator trace totals", report_bytes_match_trace);
  run(8, "compute-bound and bandwidth-bound limits", limit_behavior);
  run(9, "explore output is deterministic and contains 12x24", explore_is_deterministic);
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
