#pragma once

// Random (layer, tile config) pairs for the tiled-vs-reference properties.

#include <algorithm>

#include "cnnt/random.hpp"
#include "cnnt/tiled_engine.hpp"

namespace testing_support {

struct LayerCase {
  cnnt::LayerSpec layer;
  cnnt::TileConfig cfg;
};

inline std::size_t draw(cnnt::Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.range(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

// Conv layer with every dim ≤ 32, stride 1..4, pad 0..2, odd kernel (or a kernel
// spanning the padded input), capped at max_macs so large sweeps stay fast.
inline cnnt::LayerSpec random_conv(cnnt::Rng& rng, std::uint64_t max_macs) {
  for (;;) {
    const std::size_t rows = draw(rng, 1, 32), cols = draw(rng, 1, 32);
    const std::size_t p = draw(rng, 1, 32), q = draw(rng, 1, 32);
    const std::size_t s = draw(rng, 1, 4), pad = draw(rng, 0, 2);
    const std::size_t span = std::min(rows, cols) + 2 * pad;
    std::size_t K;
    if (rows == cols && rng.range(0, 9) == 0) {
      K = span;  // full-extent kernel, may be even
    } else {
      const std::size_t max_odd = std::min<std::size_t>(span % 2 ? span : span - 1, 7);
      if (max_odd < 1) continue;
      K = 2 * draw(rng, 0, (max_odd - 1) / 2) + 1;
    }
    const cnnt::LayerSpec l = cnnt::LayerSpec::conv({rows, cols, p}, q, K, s, pad);
    if (l.out_rows == 0 || l.out_cols == 0) continue;
    const std::uint64_t macs = std::uint64_t{l.out_rows} * l.out_cols * p * q * K * K;
    if (macs <= max_macs) return l;
  }
}

// FC layer fed by a (rows, cols, ch) tensor, each extent ≤ 32.
inline cnnt::LayerSpec random_fc(cnnt::Rng& rng, std::uint64_t max_macs) {
  for (;;) {
    const cnnt::Shape in{draw(rng, 1, 4), draw(rng, 1, 4), draw(rng, 1, 32)};
    const cnnt::LayerSpec l = cnnt::LayerSpec::fc(in, draw(rng, 1, 32));
    if (std::uint64_t{l.in_channels} * l.out_channels <= max_macs) return l;
  }
}

// Tile sizes from 1 to a bit beyond the layer extent, so both clamped edges and
// oversize tiles appear.
inline cnnt::TileConfig random_cfg(cnnt::Rng& rng, const cnnt::LayerSpec& l) {
  cnnt::TileConfig c;
  if (l.kind == cnnt::LayerKind::Conv) {
    c.tile_rows = draw(rng, 1, l.out_rows + 2);
    c.tile_cols = draw(rng, 1, l.out_cols + 2);
    c.in_channels = draw(rng, 1, l.in_channels + 2);
    c.out_channels = draw(rng, 1, l.out_channels + 2);
    c.fc_inputs = c.in_channels + draw(rng, 0, 4);
    c.fc_outputs = c.out_channels + draw(rng, 0, 4);
  } else {
    c.tile_rows = draw(rng, 1, 8);
    c.tile_cols = draw(rng, 1, 8);
    c.fc_inputs = draw(rng, 1, l.in_channels + 3);
    c.fc_outputs = draw(rng, 1, l.out_channels + 3);
    c.in_channels = draw(rng, 1, c.fc_inputs);
    c.out_channels = draw(rng, 1, c.fc_outputs);
  }
  return c;
}

inline LayerCase random_case(cnnt::Rng& rng, std::uint64_t max_macs = 150000) {
  LayerCase lc;
  lc.layer = rng.range(0, 3) == 0 ? random_fc(rng, max_macs) : random_conv(rng, max_macs);
  lc.cfg = random_cfg(rng, lc.layer);
  return lc;
}

}  // namespace testing_support
