#pragma once

// Seeded generators for test data and random weights. The mapping from
// mt19937_64 output to values is spelled out here so that results do not
// depend on the standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <random>

#include "cnnt/netspec.hpp"
#include "cnnt/tensor.hpp"
#include "cnnt/weights_io.hpp"

namespace cnnt {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  FixedQ fixed(std::int32_t lo_raw = kMinRaw, std::int32_t hi_raw = kMaxRaw) {
    return FixedQ::from_raw(static_cast<std::int32_t>(range(lo_raw, hi_raw)));
  }

 private:
  std::mt19937_64 gen_;
};

inline QTensor random_tensor(Rng& rng, std::vector<std::size_t> dims, std::int32_t lo_raw = kMinRaw,
                             std::int32_t hi_raw = kMaxRaw) {
  QTensor t(std::move(dims));
  for (auto& v : t.data) v = rng.fixed(lo_raw, hi_raw);
  return t;
}

/// Uniform weights in ±1/sqrt(fan_in), zero bias. Keeps activations of deep
/// presets mostly inside the Q2.14 range.
inline NetworkWeights<FixedQ> random_weights(const NetworkSpec& net, std::uint64_t seed) {
  Rng rng(seed);
  NetworkWeights<FixedQ> out;
  for (const auto& l : net.layers) {
    if (!l.on_accelerator()) continue;
    const auto dims = expected_weight_dims(l);
    const std::size_t fan_in = l.kind == LayerKind::Conv ? l.in_channels * l.kernel * l.kernel : l.in_channels;
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    QTensor w(dims);
    for (auto& v : w.data) v = quantize(rng.uniform(-limit, limit));
    out.push_back({std::move(w), {}});
  }
  return out;
}

inline QTensor random_input(const NetworkSpec& net, std::uint64_t seed) {
  Rng rng(seed);
  QTensor t(net.input.dims());
  for (auto& v : t.data) v = quantize(rng.uniform(-1.0, 1.0));
  return t;
}

}  // namespace cnnt
