#pragma once

// Board presets. Budgets are the reported utilisation divided by the reported
// percentage, snapped to the device's BRAM18/DSP totals. Frequencies, compute
// units and performance figures are the published measurements; the spatial
// and FC tile factors of the published configs are not published and are
// chosen here (Tr = Tc = 13, lambda = 8·mu, omega = 8·tau).

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "cnnt/perf_model.hpp"
#include "cnnt/tiled_engine.hpp"

namespace cnnt {

struct BoardPreset {
  HardwareBudget hw;
  TileConfig published;   // compute unit as published, other factors chosen
  double reported_gops;   // measured performance
  std::size_t reported_bram18;
  std::size_t reported_dsp;
};

inline TileConfig published_config(std::size_t mu, std::size_t tau) {
  return TileConfig{13, 13, mu, tau, 8 * mu, 8 * tau};
}

inline const std::array<BoardPreset, 3>& board_presets() {
  static const std::array<BoardPreset, 3> boards{{
      {{"ultra96", 432, 360, kDefaultPortBytesPerCycle, 169.0}, published_config(12, 24), 51.0, 332, 334},
      {{"zcu104", 624, 1728, kDefaultPortBytesPerCycle, 198.0}, published_config(20, 30), 107.0, 594, 586},
      {{"zcu102", 1824, 2520, kDefaultPortBytesPerCycle, 167.0}, published_config(20, 55), 230.0, 1700, 1700},
  }};
  return boards;
}

inline std::optional<BoardPreset> find_board(std::string_view name) {
  for (const auto& b : board_presets()) {
    if (b.hw.name == name) return b;
  }
  return std::nullopt;
}

inline std::string known_boards() {
  std::string s;
  for (const auto& b : board_presets()) s += (s.empty() ? "" : ", ") + b.hw.name;
  return s;
}

}  // namespace cnnt
