#pragma once

// Network and layer description model, network-file ingestion, and the
// operation-count formulas for convolution and fully connected layers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cnnt/errors.hpp"

namespace cnnt {

enum class LayerKind { Conv, FC, MaxPool, ReLU, Flatten, SoftMax };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::FC: return "fc";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::SoftMax: return "softmax";
  }
  return "?";
}

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t channels = 1;

  std::size_t size() const { return rows * cols * channels; }
  std::vector<std::size_t> dims() const { return {rows, cols, channels}; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  Shape input;
  std::size_t out_rows = 1;
  std::size_t out_cols = 1;
  std::size_t in_channels = 1;   // FC: input neurons
  std::size_t out_channels = 1;  // FC: output neurons
  std::size_t kernel = 1;        // conv kernel extent, or pooling window
  std::size_t stride = 1;
  std::size_t pad = 0;

  bool on_accelerator() const { return kind == LayerKind::Conv || kind == LayerKind::FC; }

  Shape output() const {
    switch (kind) {
      case LayerKind::Conv:
      case LayerKind::MaxPool: return {out_rows, out_cols, out_channels};
      case LayerKind::FC: return {1, 1, out_channels};
      case LayerKind::Flatten: return {1, 1, input.size()};
      case LayerKind::ReLU:
      case LayerKind::SoftMax: return input;
    }
    return input;
  }

  static std::size_t window_count(std::size_t extent, std::size_t pad, std::size_t kernel, std::size_t stride) {
    if (extent + 2 * pad < kernel || stride == 0) return 0;
    return (extent + 2 * pad - kernel) / stride + 1;
  }

  static LayerSpec conv(Shape in, std::size_t out_channels, std::size_t kernel, std::size_t stride = 1,
                        std::size_t pad = 0) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.input = in;
    l.in_channels = in.channels;
    l.out_channels = out_channels;
    l.kernel = kernel;
    l.stride = stride;
    l.pad = pad;
    l.out_rows = window_count(in.rows, pad, kernel, stride);
    l.out_cols = window_count(in.cols, pad, kernel, stride);
    return l;
  }

  static LayerSpec fc(Shape in, std::size_t outputs) {
    LayerSpec l;
    l.kind = LayerKind::FC;
    l.input = in;
    l.in_channels = in.size();
    l.out_channels = outputs;
    return l;
  }
  static LayerSpec fc(std::size_t inputs, std::size_t outputs) { return fc(Shape{1, 1, inputs}, outputs); }

  static LayerSpec max_pool(Shape in, std::size_t window, std::size_t stride) {
    LayerSpec l;
    l.kind = LayerKind::MaxPool;
    l.input = in;
    l.in_channels = l.out_channels = in.channels;
    l.kernel = window;
    l.stride = stride;
    l.out_rows = window_count(in.rows, 0, window, stride);
    l.out_cols = window_count(in.cols, 0, window, stride);
    return l;
  }

  static LayerSpec host(LayerKind kind, Shape in) {
    LayerSpec l;
    l.kind = kind;
    l.input = in;
    l.in_channels = l.out_channels = in.channels;
    l.out_rows = in.rows;
    l.out_cols = in.cols;
    return l;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::string name;
  Shape input;
  std::vector<LayerSpec> layers;
  std::string notes;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Checks one layer's own invariants; `index` is used in the error message.
inline void validate_layer(const LayerSpec& l, std::size_t index) {
  auto fail = [&](const std::string& msg) { throw ParseError(index, msg); };
  const Shape& in = l.input;
  if (in.rows == 0 || in.cols == 0 || in.channels == 0) fail("input extents must be >= 1");
  switch (l.kind) {
    case LayerKind::Conv: {
      if (l.out_channels == 0 || l.kernel == 0 || l.stride == 0) fail("conv dimensions must be >= 1");
      if (l.in_channels != in.channels) fail("conv in_channels does not match input channels");
      if (l.kernel > in.rows + 2 * l.pad || l.kernel > in.cols + 2 * l.pad) fail("kernel larger than padded input");
      const bool full_extent = l.kernel == in.rows + 2 * l.pad && l.kernel == in.cols + 2 * l.pad;
      if (l.kernel % 2 == 0 && !full_extent) fail("kernel must be odd or span the whole padded input");
      if (l.out_rows != LayerSpec::window_count(in.rows, l.pad, l.kernel, l.stride) ||
          l.out_cols != LayerSpec::window_count(in.cols, l.pad, l.kernel, l.stride)) {
        fail("conv output extent inconsistent with input, kernel, stride and pad");
      }
      break;
    }
    case LayerKind::FC:
      if (l.out_channels == 0) fail("fc outputs must be >= 1");
      if (l.in_channels != in.size()) {
        fail("fc inputs (" + std::to_string(l.in_channels) + ") != flattened input size (" +
             std::to_string(in.size()) + ")");
      }
      break;
    case LayerKind::MaxPool:
      if (l.kernel == 0 || l.stride == 0) fail("pool window and stride must be >= 1");
      if (l.kernel > in.rows || l.kernel > in.cols) fail("pool window larger than input");
      if (l.out_rows != LayerSpec::window_count(in.rows, 0, l.kernel, l.stride) ||
          l.out_cols != LayerSpec::window_count(in.cols, 0, l.kernel, l.stride)) {
        fail("pool output extent inconsistent with input");
      }
      break;
    case LayerKind::ReLU:
    case LayerKind::Flatten:
    case LayerKind::SoftMax: break;
  }
}

// Checks every layer and that each layer's input is the previous layer's output.
inline void validate_network(const NetworkSpec& net) {
  Shape expected = net.input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (!(l.input == expected)) throw ParseError(i, "input shape does not chain from previous layer");
    validate_layer(l, i);
    expected = l.output();
  }
}

inline Shape output_shape(const NetworkSpec& net) {
  return net.layers.empty() ? net.input : net.layers.back().output();
}

// --- operation counts -------------------------------------------------------

/// 2·R·C·p·q·K²: one multiply and one add per MAC of the convolution loop nest.
inline std::uint64_t conv_ops(const LayerSpec& l) {
  if (l.kind != LayerKind::Conv) throw std::domain_error("conv_ops: layer is not a convolution");
  return std::uint64_t{2} * l.out_rows * l.out_cols * l.in_channels * l.out_channels * l.kernel * l.kernel;
}

/// 2·p·q.
inline std::uint64_t fc_ops(const LayerSpec& l) {
  if (l.kind != LayerKind::FC) throw std::domain_error("fc_ops: layer is not fully connected");
  return std::uint64_t{2} * l.in_channels * l.out_channels;
}

inline std::uint64_t layer_ops(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Conv: return conv_ops(l);
    case LayerKind::FC: return fc_ops(l);
    default: return 0;
  }
}

// Rough operation estimate for host-path layers: comparisons for pooling and
// ReLU, exp + sum + divide for SoftMax. Used only for the workload-share figure.
inline std::uint64_t host_ops(const LayerSpec& l) {
  const Shape out = l.output();
  switch (l.kind) {
    case LayerKind::MaxPool: return std::uint64_t{out.size()} * (l.kernel * l.kernel - 1);
    case LayerKind::ReLU: return l.input.size();
    case LayerKind::SoftMax: return std::uint64_t{3} * l.input.size();
    default: return 0;
  }
}

inline std::uint64_t total_ops(const NetworkSpec& net) {
  std::uint64_t total = 0;
  for (const auto& l : net.layers) total += layer_ops(l);
  return total;
}

// --- network file (JSON) ----------------------------------------------------

namespace detail {

inline LayerKind parse_kind(const std::string& s, std::size_t index) {
  for (LayerKind k : {LayerKind::Conv, LayerKind::FC, LayerKind::MaxPool, LayerKind::ReLU, LayerKind::Flatten,
                      LayerKind::SoftMax}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError(index, "unknown layer kind '" + s + "'");
}

inline std::size_t get_dim(const nlohmann::json& j, const char* key, std::size_t index) {
  if (!j.contains(key)) throw ParseError(index, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(index, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline std::size_t get_dim_or(const nlohmann::json& j, const char* key, std::size_t fallback, std::size_t index) {
  return j.contains(key) ? get_dim(j, key, index) : fallback;
}

inline void check_declared(const nlohmann::json& j, const char* key, std::size_t actual, std::size_t index) {
  if (j.contains(key) && get_dim(j, key, index) != actual) {
    throw ParseError(index, std::string("declared '") + key + "' = " + std::to_string(get_dim(j, key, index)) +
                                " but chaining gives " + std::to_string(actual));
  }
}

}  // namespace detail

inline NetworkSpec network_from_json(const nlohmann::json& doc) {
  constexpr auto npos = ParseError::npos;
  if (!doc.is_object()) throw ParseError(npos, "network document must be a JSON object");
  NetworkSpec net;
  net.name = doc.value("name", std::string{});
  net.notes = doc.value("notes", std::string{});
  if (!doc.contains("input") || !doc["input"].is_array() || doc["input"].size() != 3) {
    throw ParseError(npos, "'input' must be [rows, cols, channels]");
  }
  std::array<std::size_t, 3> in{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = doc["input"][i];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ParseError(npos, "'input' extents must be >= 1");
    in[i] = v.get<std::size_t>();
  }
  net.input = Shape{in[0], in[1], in[2]};
  if (!doc.contains("layers") || !doc["layers"].is_array()) throw ParseError(npos, "'layers' must be an array");

  Shape cur = net.input;
  std::size_t index = 0;
  for (const auto& lj : doc["layers"]) {
    if (!lj.is_object() || !lj.contains("kind") || !lj["kind"].is_string()) {
      throw ParseError(index, "layer must be an object with a string 'kind'");
    }
    const LayerKind kind = detail::parse_kind(lj["kind"].get<std::string>(), index);
    LayerSpec l;
    switch (kind) {
      case LayerKind::Conv:
        l = LayerSpec::conv(cur, detail::get_dim(lj, "out_channels", index), detail::get_dim(lj, "kernel", index),
                            detail::get_dim_or(lj, "stride", 1, index), detail::get_dim_or(lj, "pad", 0, index));
        detail::check_declared(lj, "in_channels", l.in_channels, index);
        detail::check_declared(lj, "out_rows", l.out_rows, index);
        detail::check_declared(lj, "out_cols", l.out_cols, index);
        break;
      case LayerKind::FC:
        l = LayerSpec::fc(cur, detail::get_dim(lj, "outputs", index));
        l.in_channels = detail::get_dim(lj, "inputs", index);  // checked against the flattened input below
        break;
      case LayerKind::MaxPool: {
        const std::size_t window = detail::get_dim(lj, "window", index);
        l = LayerSpec::max_pool(cur, window, detail::get_dim_or(lj, "stride", window, index));
        break;
      }
      default: l = LayerSpec::host(kind, cur); break;
    }
    validate_layer(l, index);
    net.layers.push_back(l);
    cur = l.output();
    ++index;
  }
  return net;
}

inline NetworkSpec parse_network(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(ParseError::npos, std::string("malformed network document: ") + e.what());
  }
  return network_from_json(doc);
}

inline NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

inline nlohmann::json to_json(const NetworkSpec& net) {
  nlohmann::json doc;
  doc["name"] = net.name;
  doc["input"] = {net.input.rows, net.input.cols, net.input.channels};
  if (!net.notes.empty()) doc["notes"] = net.notes;
  doc["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers) {
    nlohmann::json lj;
    lj["kind"] = std::string(to_string(l.kind));
    switch (l.kind) {
      case LayerKind::Conv:
        lj["in_channels"] = l.in_channels;
        lj["out_channels"] = l.out_channels;
        lj["kernel"] = l.kernel;
        lj["stride"] = l.stride;
        lj["pad"] = l.pad;
        lj["out_rows"] = l.out_rows;
        lj["out_cols"] = l.out_cols;
        break;
      case LayerKind::FC:
        lj["inputs"] = l.in_channels;
        lj["outputs"] = l.out_channels;
        break;
      case LayerKind::MaxPool:
        lj["window"] = l.kernel;
        lj["stride"] = l.stride;
        break;
      default: break;
    }
    doc["layers"].push_back(std::move(lj));
  }
  return doc;
}

inline std::string serialize_network(const NetworkSpec& net) { return to_json(net).dump(2); }

}  // namespace cnnt
