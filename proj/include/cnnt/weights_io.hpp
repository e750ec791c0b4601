#pragma once

// Binary weight container.
//
// Little-endian layout:
//   "CNTW"            4 bytes magic
//   version           u16 (currently 1)
//   tensor count      u16
//   per tensor:
//     rank            u8
//     extents         u32 × rank
//     payload         i16 × product(extents), raw Q2.14 values
//
// Weights for a network are stored in accelerator-layer order: each Conv/FC
// layer contributes its weight tensor (Conv q×p×K×K, FC q×p), optionally
// followed by a rank-1 bias tensor of extent q.

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cnnt/errors.hpp"
#include "cnnt/netspec.hpp"
#include "cnnt/tensor.hpp"

namespace cnnt {

inline constexpr std::array<char, 4> kContainerMagic{'C', 'N', 'T', 'W'};
inline constexpr std::uint16_t kContainerVersion = 1;

template <class T>
struct LayerWeights {
  Tensor<T> weights;
  std::vector<T> bias;  // empty means zero bias

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

// One entry per accelerator (Conv/FC) layer, in network order.
template <class T>
using NetworkWeights = std::vector<LayerWeights<T>>;

inline std::vector<std::size_t> expected_weight_dims(const LayerSpec& l) {
  if (l.kind == LayerKind::Conv) return {l.out_channels, l.in_channels, l.kernel, l.kernel};
  if (l.kind == LayerKind::FC) return {l.out_channels, l.in_channels};
  throw std::domain_error("layer kind has no weights");
}

inline NetworkWeights<double> dequantize(const NetworkWeights<FixedQ>& w) {
  NetworkWeights<double> out;
  for (const auto& lw : w) {
    LayerWeights<double> d{dequantize(lw.weights), {}};
    for (FixedQ b : lw.bias) d.bias.push_back(dequantize(b));
    out.push_back(std::move(d));
  }
  return out;
}

struct ContainerEntry {
  QTensor tensor;
  std::size_t offset = 0;  // byte offset of this tensor's header
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xFF));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const std::uint16_t v = static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_]) |
                                                       (static_cast<std::uint8_t>(bytes_[pos_ + 1]) << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(bytes_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw LoadError(pos_, std::string("truncated container while reading ") + what);
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_container(const std::vector<QTensor>& tensors) {
  if (tensors.size() > 0xFFFF) throw std::invalid_argument("container holds at most 65535 tensors");
  detail::ByteWriter w;
  w.raw(kContainerMagic.data(), kContainerMagic.size());
  w.u16(kContainerVersion);
  w.u16(static_cast<std::uint16_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.rank() > 0xFF) throw std::invalid_argument("tensor rank exceeds 255");
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.dims) {
      if (d > 0xFFFFFFFFu) throw std::invalid_argument("tensor extent exceeds u32");
      w.u32(static_cast<std::uint32_t>(d));
    }
    for (FixedQ v : t.data) w.u16(static_cast<std::uint16_t>(v.raw));
  }
  return w.bytes();
}

inline std::vector<ContainerEntry> decode_container(const std::string& bytes) {
  detail::ByteReader r(bytes);
  r.need(4, "magic");
  if (bytes.compare(0, 4, kContainerMagic.data(), 4) != 0) throw LoadError(0, "bad container magic");
  for (int i = 0; i < 4; ++i) r.u8("magic");
  const std::size_t version_at = r.offset();
  const std::uint16_t version = r.u16("version");
  if (version != kContainerVersion) {
    throw LoadError(version_at, "unsupported container version " + std::to_string(version));
  }
  const std::uint16_t count = r.u16("tensor count");
  std::vector<ContainerEntry> out;
  out.reserve(count);
  for (std::uint16_t t = 0; t < count; ++t) {
    ContainerEntry e;
    e.offset = r.offset();
    const std::uint8_t rank = r.u8("tensor rank");
    std::size_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      e.tensor.dims.push_back(r.u32("tensor extent"));
      n *= e.tensor.dims.back();
    }
    r.need(2 * n, "tensor payload");
    e.tensor.data.resize(n);
    for (auto& v : e.tensor.data) v.raw = static_cast<std::int16_t>(r.u16("tensor payload"));
    out.push_back(std::move(e));
  }
  if (r.offset() != bytes.size()) throw LoadError(r.offset(), "trailing bytes after last tensor");
  return out;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<QTensor> flatten_weights(const NetworkWeights<FixedQ>& w) {
  std::vector<QTensor> tensors;
  for (const auto& lw : w) {
    tensors.push_back(lw.weights);
    if (!lw.bias.empty()) tensors.emplace_back(std::vector<std::size_t>{lw.bias.size()}, lw.bias);
  }
  return tensors;
}

/// Pairs container tensors with the network's accelerator layers.
inline NetworkWeights<FixedQ> match_weights(const std::vector<ContainerEntry>& entries, const NetworkSpec& net,
                                            std::size_t end_offset) {
  NetworkWeights<FixedQ> out;
  std::size_t next = 0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const LayerSpec& l = net.layers[li];
    if (!l.on_accelerator()) continue;
    if (next >= entries.size()) {
      throw LoadError(end_offset, "container has no weight tensor for layer " + std::to_string(li));
    }
    const ContainerEntry& e = entries[next++];
    if (e.tensor.dims != expected_weight_dims(l)) {
      throw LoadError(e.offset, "dimension mismatch for weights of layer " + std::to_string(li));
    }
    LayerWeights<FixedQ> lw{e.tensor, {}};
    if (next < entries.size() && entries[next].tensor.rank() == 1) {
      const ContainerEntry& b = entries[next++];
      if (b.tensor.dims[0] != l.out_channels) {
        throw LoadError(b.offset, "dimension mismatch for bias of layer " + std::to_string(li));
      }
      lw.bias = b.tensor.data;
    }
    out.push_back(std::move(lw));
  }
  if (next != entries.size()) throw LoadError(entries[next].offset, "container has extra tensors");
  return out;
}

inline NetworkWeights<FixedQ> load_weights(const std::string& path, const NetworkSpec& net) {
  const std::string bytes = read_file_bytes(path);
  return match_weights(decode_container(bytes), net, bytes.size());
}

inline void write_weights(const std::string& path, const NetworkWeights<FixedQ>& w) {
  write_file_bytes(path, encode_container(flatten_weights(w)));
}

inline void write_tensor(const std::string& path, const QTensor& t) { write_file_bytes(path, encode_container({t})); }

inline QTensor load_tensor(const std::string& path) {
  const auto entries = decode_container(read_file_bytes(path));
  if (entries.size() != 1) throw LoadError(6, "expected exactly one tensor in container");
  return entries.front().tensor;
}

}  // namespace cnnt
