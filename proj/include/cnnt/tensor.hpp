#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cnnt/fixedpoint.hpp"

namespace cnnt {

// Dense row-major tensor. Activations are rank 3 (rows, cols, channels) with
// the channel index innermost; conv weights are rank 4 (out, in, kr, kc) and
// FC weights rank 2 (out, in).
template <class T>
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> d, T fill = T{})
      : dims(std::move(d)), data(element_count(dims), fill) {}
  Tensor(std::vector<std::size_t> d, std::vector<T> values) : dims(std::move(d)), data(std::move(values)) {
    if (data.size() != element_count(dims)) throw std::invalid_argument("Tensor: data length does not match dims");
  }

  static std::size_t element_count(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>{});
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return dims.size(); }

  // Rank-3 activation access.
  T& at(std::size_t r, std::size_t c, std::size_t ch) { return data[(r * dims[1] + c) * dims[2] + ch]; }
  const T& at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * dims[1] + c) * dims[2] + ch];
  }

  // Rank-4 weight access.
  const T& at(std::size_t o, std::size_t i, std::size_t kr, std::size_t kc) const {
    return data[((o * dims[1] + i) * dims[2] + kr) * dims[3] + kc];
  }
  T& at(std::size_t o, std::size_t i, std::size_t kr, std::size_t kc) {
    return data[((o * dims[1] + i) * dims[2] + kr) * dims[3] + kc];
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using QTensor = Tensor<FixedQ>;
using RTensor = Tensor<double>;

inline RTensor dequantize(const QTensor& t) {
  RTensor out;
  out.dims = t.dims;
  out.data.reserve(t.size());
  for (FixedQ v : t.data) out.data.push_back(dequantize(v));
  return out;
}

inline QTensor quantize(const RTensor& t) {
  QTensor out;
  out.dims = t.dims;
  out.data.reserve(t.size());
  for (double v : t.data) out.data.push_back(quantize(v));
  return out;
}

}  // namespace cnnt
