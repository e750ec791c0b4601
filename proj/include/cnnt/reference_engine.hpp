#pragma once

// Untiled golden model of the convolution and fully connected loop nests,
// plus the host-path layers. Instantiated for double (real arithmetic) and
// FixedQ (Q2.14 arithmetic: exact Accum MACs, one reduce per output element).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cnnt/fixedpoint.hpp"
#include "cnnt/netspec.hpp"
#include "cnnt/tensor.hpp"
#include "cnnt/weights_io.hpp"

namespace cnnt {

template <class T>
struct Arith;

template <>
struct Arith<double> {
  using acc_type = double;
  static double init(std::span<const double> bias, std::size_t co) { return bias.empty() ? 0.0 : bias[co]; }
  static double mac(double acc, double a, double b) { return acc + a * b; }
  static double finish(double acc) { return acc; }
  static double relu(double v) { return v < 0.0 ? 0.0 : v; }
  static double to_real(double v) { return v; }
  static double from_real(double v) { return v; }
};

template <>
struct Arith<FixedQ> {
  using acc_type = Accum;
  static Accum init(std::span<const FixedQ> bias, std::size_t co) { return bias.empty() ? Accum{} : widen(bias[co]); }
  static Accum mac(Accum acc, FixedQ a, FixedQ b) { return cnnt::mac(acc, a, b); }
  static FixedQ finish(Accum acc) { return reduce(acc); }
  static FixedQ relu(FixedQ v) { return relu_q(v); }
  static double to_real(FixedQ v) { return dequantize(v); }
  static FixedQ from_real(double v) { return quantize(v); }
};

// Counts MAC iterations of the loop nest, padding positions included.
struct MacCounter {
  std::uint64_t macs = 0;
};

namespace detail {

template <class T>
void check_bias(std::span<const T> bias, const LayerSpec& l) {
  if (!bias.empty() && bias.size() != l.out_channels) throw std::domain_error("bias length != output channels");
}

}  // namespace detail

template <class T>
Tensor<T> conv_forward(const Tensor<T>& ifm, const Tensor<T>& w, const LayerSpec& l, std::span<const T> bias = {},
                       MacCounter* counter = nullptr) {
  using A = Arith<T>;
  if (l.kind != LayerKind::Conv) throw std::domain_error("conv_forward: layer is not a convolution");
  if (ifm.dims != l.input.dims()) throw std::domain_error("conv_forward: IFM dims do not match layer");
  if (w.dims != expected_weight_dims(l)) throw std::domain_error("conv_forward: weight dims do not match layer");
  detail::check_bias(bias, l);

  const auto in_rows = static_cast<std::int64_t>(l.input.rows);
  const auto in_cols = static_cast<std::int64_t>(l.input.cols);
  const auto pad = static_cast<std::int64_t>(l.pad);
  Tensor<T> ofm({l.out_rows, l.out_cols, l.out_channels});
  std::uint64_t macs = 0;
  for (std::size_t row = 0; row < l.out_rows; ++row) {
    for (std::size_t col = 0; col < l.out_cols; ++col) {
      for (std::size_t co = 0; co < l.out_channels; ++co) {
        auto acc = A::init(bias, co);
        for (std::size_t ci = 0; ci < l.in_channels; ++ci) {
          for (std::size_t i = 0; i < l.kernel; ++i) {
            for (std::size_t j = 0; j < l.kernel; ++j) {
              ++macs;
              const std::int64_t r = static_cast<std::int64_t>(l.stride * row + i) - pad;
              const std::int64_t c = static_cast<std::int64_t>(l.stride * col + j) - pad;
              if (r < 0 || c < 0 || r >= in_rows || c >= in_cols) continue;  // zero padding
              acc = A::mac(acc, ifm.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ci),
                           w.at(co, ci, i, j));
            }
          }
        }
        ofm.at(row, col, co) = A::finish(acc);
      }
    }
  }
  if (counter) counter->macs += macs;
  return ofm;
}

template <class T>
Tensor<T> fc_forward(const Tensor<T>& ifm, const Tensor<T>& w, const LayerSpec& l, std::span<const T> bias = {},
                     MacCounter* counter = nullptr) {
  using A = Arith<T>;
  if (l.kind != LayerKind::FC) throw std::domain_error("fc_forward: layer is not fully connected");
  if (ifm.size() != l.in_channels) throw std::domain_error("fc_forward: IFM length != layer inputs");
  if (w.dims != expected_weight_dims(l)) throw std::domain_error("fc_forward: weight dims do not match layer");
  detail::check_bias(bias, l);

  Tensor<T> ofm({1, 1, l.out_channels});
  for (std::size_t co = 0; co < l.out_channels; ++co) {
    auto acc = A::init(bias, co);
    for (std::size_t ci = 0; ci < l.in_channels; ++ci) acc = A::mac(acc, ifm.data[ci], w.data[co * l.in_channels + ci]);
    ofm.data[co] = A::finish(acc);
  }
  if (counter) counter->macs += std::uint64_t{l.in_channels} * l.out_channels;
  return ofm;
}

inline RTensor softmax(const RTensor& t) {
  RTensor out = t;
  if (t.data.empty()) return out;
  const double peak = *std::max_element(t.data.begin(), t.data.end());
  double sum = 0.0;
  for (auto& v : out.data) sum += (v = std::exp(v - peak));
  for (auto& v : out.data) v /= sum;
  return out;
}

// Real-valued probabilities for reporting, computed on dequantized logits.
inline RTensor softmax(const QTensor& logits) { return softmax(dequantize(logits)); }

template <class T>
Tensor<T> host_layer(const Tensor<T>& ifm, const LayerSpec& l) {
  using A = Arith<T>;
  if (ifm.dims != l.input.dims()) throw std::domain_error("host_layer: input dims do not match layer");
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::FC: throw std::domain_error("host_layer: accelerator layer passed to host path");
    case LayerKind::MaxPool: {
      Tensor<T> out(l.output().dims());
      for (std::size_t r = 0; r < l.out_rows; ++r) {
        for (std::size_t c = 0; c < l.out_cols; ++c) {
          for (std::size_t ch = 0; ch < l.out_channels; ++ch) {
            T best = ifm.at(r * l.stride, c * l.stride, ch);
            for (std::size_t i = 0; i < l.kernel; ++i) {
              for (std::size_t j = 0; j < l.kernel; ++j) best = std::max(best, ifm.at(r * l.stride + i, c * l.stride + j, ch));
            }
            out.at(r, c, ch) = best;
          }
        }
      }
      return out;
    }
    case LayerKind::ReLU: {
      Tensor<T> out = ifm;
      for (auto& v : out.data) v = A::relu(v);
      return out;
    }
    case LayerKind::Flatten: return Tensor<T>(l.output().dims(), ifm.data);
    case LayerKind::SoftMax: {
      RTensor real;
      real.dims = ifm.dims;
      for (const T& v : ifm.data) real.data.push_back(A::to_real(v));
      real = softmax(real);
      Tensor<T> out;
      out.dims = ifm.dims;
      for (double v : real.data) out.data.push_back(A::from_real(v));
      return out;
    }
  }
  throw std::domain_error("host_layer: unknown layer kind");
}

inline std::size_t accelerator_layer_count(const NetworkSpec& net) {
  return static_cast<std::size_t>(std::count_if(net.layers.begin(), net.layers.end(),
                                                [](const LayerSpec& l) { return l.on_accelerator(); }));
}

/// Runs every layer in order and returns each layer's output.
template <class T>
std::vector<Tensor<T>> run_network_reference(const NetworkSpec& net, const Tensor<T>& input,
                                             const NetworkWeights<T>& weights) {
  if (input.dims != net.input.dims()) throw std::domain_error("input tensor does not match network input shape");
  if (weights.size() != accelerator_layer_count(net)) throw std::domain_error("one weight set per accelerator layer required");
  std::vector<Tensor<T>> outputs;
  outputs.reserve(net.layers.size());
  const Tensor<T>* cur = &input;
  std::size_t wi = 0;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::Conv) {
      const auto& lw = weights[wi++];
      outputs.push_back(conv_forward<T>(*cur, lw.weights, l, lw.bias));
    } else if (l.kind == LayerKind::FC) {
      const auto& lw = weights[wi++];
      outputs.push_back(fc_forward<T>(*cur, lw.weights, l, lw.bias));
    } else {
      outputs.push_back(host_layer<T>(*cur, l));
    }
    cur = &outputs.back();
  }
  return outputs;
}

}  // namespace cnnt
