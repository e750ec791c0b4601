#pragma once

// Design-space exploration over tile configurations under a hardware budget.
//
// Enumeration is exhaustive over bounded ranges, in ascending (mu, tau, Tr, Tc)
// order. The FC tiles are not enumerated: for each candidate, lambda = m·mu and
// omega = m·tau with m the largest multiplier whose buffers still fit the
// budget (capped where the network's FC layers gain nothing from a larger m).

#include <algorithm>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cnnt/perf_model.hpp"
#include "cnnt/report_io.hpp"
#include "cnnt/tiled_engine.hpp"

namespace cnnt {

struct Range {
  std::size_t lo = 1;
  std::size_t hi = 0;
  bool empty() const { return hi < lo || hi == 0; }
};

struct ExploreBounds {
  Range tile_rows{1, 64};
  Range tile_cols{1, 64};
  Range in_channels{1, 64};
  Range out_channels{1, 128};
  bool square_tiles = false;  // Tc = Tr, tile_cols ignored
};

namespace detail {

inline std::size_t fc_multiplier_cap(const NetworkSpec& net, std::size_t mu, std::size_t tau) {
  std::size_t cap = 1;
  for (const auto& l : net.layers) {
    if (l.kind != LayerKind::FC) continue;
    cap = std::max({cap, (l.in_channels + mu - 1) / mu, (l.out_channels + tau - 1) / tau});
  }
  return cap;
}

inline TileConfig with_fc_multiplier(TileConfig c, std::size_t m) {
  c.fc_inputs = m * c.in_channels;
  c.fc_outputs = m * c.out_channels;
  return c;
}

}  // namespace detail

/// Largest feasible FC multiplier for the conv part of `cfg`, or nullopt if
/// even lambda = mu, omega = tau does not fit.
inline std::optional<TileConfig> derive_fc_tiles(const TileConfig& cfg, const NetworkSpec& net,
                                                 const LayerEnvelope& env, const HardwareBudget& hw) {
  auto ok = [&](std::size_t m) { return fits(resource_usage(detail::with_fc_multiplier(cfg, m), env), hw); };
  if (!ok(1)) return std::nullopt;
  const std::size_t cap = detail::fc_multiplier_cap(net, cfg.in_channels, cfg.out_channels);
  std::size_t lo = 1, hi = cap;  // invariant: ok(lo)
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (ok(mid)) lo = mid;
    else hi = mid - 1;
  }
  return detail::with_fc_multiplier(cfg, lo);
}

/// Calls `sink` with every feasible config in ascending (mu, tau, Tr, Tc) order.
template <class Sink>
void for_each_config(const HardwareBudget& hw, const NetworkSpec& net, const ExploreBounds& b, Sink&& sink) {
  validate(hw);
  if (b.in_channels.empty() || b.out_channels.empty() || b.tile_rows.empty() ||
      (!b.square_tiles && b.tile_cols.empty())) {
    return;
  }
  const LayerEnvelope env = envelope_of(net);
  for (std::size_t mu = b.in_channels.lo; mu <= b.in_channels.hi; ++mu) {
    for (std::size_t tau = b.out_channels.lo; tau <= b.out_channels.hi; ++tau) {
      if (mu * tau > hw.dsp_total) break;
      for (std::size_t tr = b.tile_rows.lo; tr <= b.tile_rows.hi; ++tr) {
        const std::size_t tc_lo = b.square_tiles ? tr : b.tile_cols.lo;
        const std::size_t tc_hi = b.square_tiles ? tr : b.tile_cols.hi;
        bool any = false;
        for (std::size_t tc = tc_lo; tc <= tc_hi; ++tc) {
          const auto cfg = derive_fc_tiles(TileConfig{tr, tc, mu, tau, mu, tau}, net, env, hw);
          if (!cfg) break;  // BRAM use is non-decreasing in Tc
          any = true;
          sink(*cfg);
        }
        if (!any) break;  // ... and in Tr
      }
    }
  }
}

inline std::vector<TileConfig> enumerate_configs(const HardwareBudget& hw, const NetworkSpec& net,
                                                 const ExploreBounds& b = {}) {
  std::vector<TileConfig> out;
  for_each_config(hw, net, b, [&](const TileConfig& c) { out.push_back(c); });
  return out;
}

struct ScoredConfig {
  TileConfig cfg;
  CostReport report;

  double score() const { return report.totals.achieved_gops; }
};

inline ScoredConfig evaluate(const TileConfig& cfg, const NetworkSpec& net, const HardwareBudget& hw) {
  return {cfg, network_report(net, cfg, hw)};
}

/// Higher achieved GOP/s first; ties broken by lower BRAM, lower DSP, then config order.
inline bool ranks_before(const ScoredConfig& a, const ScoredConfig& b) {
  if (a.score() != b.score()) return a.score() > b.score();
  if (a.report.resources.bram18 != b.report.resources.bram18) return a.report.resources.bram18 < b.report.resources.bram18;
  if (a.report.resources.dsp != b.report.resources.dsp) return a.report.resources.dsp < b.report.resources.dsp;
  return a.cfg < b.cfg;
}

inline const TileConfig& config_of(const TileConfig& c) { return c; }
inline const TileConfig& config_of(const ScoredConfig& s) { return s.cfg; }

/// Keeps items whose tau/mu ratio lies in [ratio_low, ratio_high].
template <class T>
std::vector<T> heuristic_filter(const std::vector<T>& items, double ratio_low = 1.5, double ratio_high = 3.0) {
  if (ratio_low > ratio_high) throw std::domain_error("heuristic_filter: ratio_low > ratio_high");
  std::vector<T> out;
  for (const auto& item : items) {
    const TileConfig& c = config_of(item);
    const double mu = static_cast<double>(c.in_channels), tau = static_cast<double>(c.out_channels);
    if (tau >= ratio_low * mu && tau <= ratio_high * mu) out.push_back(item);
  }
  return out;
}

inline bool dominates(const ScoredConfig& a, const ScoredConfig& b) {
  const auto& ra = a.report.resources;
  const auto& rb = b.report.resources;
  const bool no_worse = a.score() >= b.score() && ra.bram18 <= rb.bram18 && ra.dsp <= rb.dsp;
  const bool better = a.score() > b.score() || ra.bram18 < rb.bram18 || ra.dsp < rb.dsp;
  return no_worse && better;
}

/// Non-dominated records under (max GOP/s, min BRAM, min DSP), in rank order.
inline std::vector<ScoredConfig> pareto_front(const std::vector<ScoredConfig>& records) {
  std::vector<ScoredConfig> sorted = records;
  std::sort(sorted.begin(), sorted.end(), ranks_before);
  // A dominator always ranks earlier, and a dominated dominator implies a
  // dominating front member, so checking against the front so far suffices.
  std::vector<ScoredConfig> out;
  for (const auto& r : sorted) {
    if (std::none_of(out.begin(), out.end(), [&](const ScoredConfig& f) { return dominates(f, r); })) out.push_back(r);
  }
  return out;
}

// --- exploration driver -----------------------------------------------------

struct ExploreOptions {
  bool heuristic = false;
  double ratio_low = 1.5;
  double ratio_high = 3.0;
  bool best_per_unit = true;  // one row per (mu, tau) compute unit
  unsigned threads = 0;       // 0: hardware concurrency
};

struct ExploreResult {
  std::vector<ScoredConfig> ranked;
  std::vector<bool> pareto;  // parallel to ranked
};

inline ExploreResult explore(const NetworkSpec& net, const HardwareBudget& hw, const ExploreBounds& bounds,
                             const ExploreOptions& opt = {}) {
  if (opt.ratio_low > opt.ratio_high) throw std::domain_error("explore: ratio_low > ratio_high");
  // Group candidates by compute unit; enumeration order keeps groups contiguous.
  std::vector<std::vector<TileConfig>> groups;
  for_each_config(hw, net, bounds, [&](const TileConfig& c) {
    if (opt.heuristic && heuristic_filter(std::vector<TileConfig>{c}, opt.ratio_low, opt.ratio_high).empty()) return;
    if (groups.empty() || groups.back().front().in_channels != c.in_channels ||
        groups.back().front().out_channels != c.out_channels) {
      groups.emplace_back();
    }
    groups.back().push_back(c);
  });

  std::vector<std::vector<ScoredConfig>> results(groups.size());
  auto work = [&](std::size_t g) {
    for (const auto& c : groups[g]) {
      ScoredConfig s = evaluate(c, net, hw);
      if (!opt.best_per_unit) {
        results[g].push_back(std::move(s));
      } else if (results[g].empty() || ranks_before(s, results[g].front())) {
        results[g].assign(1, std::move(s));
      }
    }
  };
  unsigned n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(groups.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t g = t; g < groups.size(); g += n_threads) work(g);
    });
  }
  for (auto& th : pool) th.join();

  ExploreResult res;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(res.ranked));
  std::sort(res.ranked.begin(), res.ranked.end(), ranks_before);
  std::set<TileConfig> front;
  for (const auto& f : pareto_front(res.ranked)) front.insert(f.cfg);
  for (const auto& r : res.ranked) res.pareto.push_back(front.count(r.cfg) > 0);
  return res;
}

// --- exploration report -----------------------------------------------------

struct ExploreRow {
  TileConfig cfg;
  std::size_t bram18 = 0;
  std::size_t dsp = 0;
  double peak_gops = 0.0;
  double achieved_gops = 0.0;
  double latency_ms = 0.0;
  bool pareto = false;

  friend bool operator==(const ExploreRow&, const ExploreRow&) = default;
};

inline ExploreRow to_row(const ScoredConfig& s, bool pareto) {
  return {s.cfg,
          s.report.resources.bram18,
          s.report.resources.dsp,
          s.report.totals.peak_gops,
          s.report.totals.achieved_gops,
          s.report.totals.latency_ms,
          pareto};
}

inline std::vector<ExploreRow> to_rows(const ExploreResult& r) {
  std::vector<ExploreRow> rows;
  for (std::size_t i = 0; i < r.ranked.size(); ++i) rows.push_back(to_row(r.ranked[i], r.pareto[i]));
  return rows;
}

inline constexpr const char* kExploreCsvHeader =
    "Tr,Tc,mu,tau,lambda,omega,bram18,dsp,peakGops,achievedGops,latencyMs,pareto";

inline void write_explore_csv(std::ostream& os, const std::vector<ExploreRow>& rows) {
  os << kExploreCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.cfg.tile_rows << ',' << r.cfg.tile_cols << ',' << r.cfg.in_channels << ',' << r.cfg.out_channels << ','
       << r.cfg.fc_inputs << ',' << r.cfg.fc_outputs << ',' << r.bram18 << ',' << r.dsp << ','
       << format_double(r.peak_gops) << ',' << format_double(r.achieved_gops) << ',' << format_double(r.latency_ms)
       << ',' << (r.pareto ? 1 : 0) << '\n';
  }
}

inline std::vector<ExploreRow> read_explore_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kExploreCsvHeader) throw std::invalid_argument("unexpected exploration CSV header");
  std::vector<ExploreRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 12) throw std::invalid_argument("exploration CSV row needs 12 fields");
    auto u = [&](int i) { return static_cast<std::size_t>(std::stoull(f[i])); };
    rows.push_back({{u(0), u(1), u(2), u(3), u(4), u(5)},
                    u(6),
                    u(7),
                    parse_double(f[8]),
                    parse_double(f[9]),
                    parse_double(f[10]),
                    f[11] == "1"});
  }
  return rows;
}

inline nlohmann::json explore_to_json(const std::vector<ExploreRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = to_json(r.cfg);
    j["bram18"] = r.bram18;
    j["dsp"] = r.dsp;
    j["peakGops"] = r.peak_gops;
    j["achievedGops"] = r.achieved_gops;
    j["latencyMs"] = r.latency_ms;
    j["pareto"] = r.pareto;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<ExploreRow> explore_from_json(const nlohmann::json& arr) {
  std::vector<ExploreRow> rows;
  for (const auto& j : arr) {
    rows.push_back({tile_config_from_json(j), j.at("bram18").get<std::size_t>(), j.at("dsp").get<std::size_t>(),
                    j.at("peakGops").get<double>(), j.at("achievedGops").get<double>(),
                    j.at("latencyMs").get<double>(), j.at("pareto").get<bool>()});
  }
  return rows;
}

}  // namespace cnnt
