#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/graph.hpp"

namespace tradenet {

/// How an edge's weight is compared against a threshold.
enum class FlowMode {
  gross,  // the edge's own export value
  net,    // max(0, w(i,j) - w(j,i))
};

struct ConnectivityPoint {
  double threshold{0.0};
  double log_threshold{0.0};  // log10; -inf at threshold 0
  std::size_t component_count{0};
  std::size_t giant_size{0};
  double giant_fraction{0.0};
};

struct ConnectivityProfile {
  std::size_t nodes{0};
  std::vector<ConnectivityPoint> points;
};

/// Same network with each edge reweighted by its net flow.
inline TradeNetwork net_flow_network(const TradeNetwork& net) {
  std::vector<Edge> edges;
  edges.reserve(net.edge_count());
  for (const auto& e : net.edges()) {
    const double back = net.weight(e.target, e.source).value_or(0.0);
    edges.push_back({e.source, e.target, std::max(0.0, e.weight - back)});
  }
  return TradeNetwork(net.labels(), std::move(edges), net.period());
}

/// Component count and giant size after keeping edges with weight >= t, for
/// every t in `grid` (strictly increasing, nonnegative).
inline ConnectivityProfile sweep(const TradeNetwork& net, const std::vector<double>& grid,
                                 FlowMode mode = FlowMode::gross) {
  if (grid.empty()) throw ConfigError("connectivity: empty threshold grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw ConfigError("connectivity: thresholds must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ConfigError("connectivity: thresholds must be strictly increasing");
    }
  }
  const TradeNetwork base = mode == FlowMode::net ? net_flow_network(net) : net;
  ConnectivityProfile prof;
  prof.nodes = net.node_count();
  for (double t : grid) {
    const auto comps = weak_components(threshold_subgraph(base, t));
    ConnectivityPoint p;
    p.threshold = t;
    p.log_threshold = t > 0.0 ? std::log10(t) : -std::numeric_limits<double>::infinity();
    p.component_count = comps.count;
    p.giant_size = comps.giant_size;
    p.giant_fraction = prof.nodes ? static_cast<double>(comps.giant_size) / prof.nodes : 0.0;
    prof.points.push_back(p);
  }
  for (std::size_t i = 1; i < prof.points.size(); ++i) {
    const auto& a = prof.points[i - 1];
    const auto& b = prof.points[i];
    if (b.component_count < a.component_count || b.giant_size > a.giant_size) {
      throw NumericalError("connectivity: profile is not monotone in the threshold");
    }
  }
  return prof;
}

/// 0 followed by `points` log-uniform thresholds from the smallest positive
/// weight to the largest, endpoints exact.
inline std::vector<double> default_grid(const TradeNetwork& net, std::size_t points = 100) {
  if (points < 2) throw ConfigError("connectivity: grid needs at least 2 points");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : net.edges()) {
    if (e.weight > 0.0) {
      lo = std::min(lo, e.weight);
      hi = std::max(hi, e.weight);
    }
  }
  if (hi == 0.0) throw DataError("connectivity: network has no positive weight");
  std::vector<double> grid{0.0, lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 1; i + 1 < points; ++i) {
    const double t = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    if (t > grid.back() && t < hi) grid.push_back(t);
  }
  if (hi > grid.back()) grid.push_back(hi);
  return grid;
}

/// Smallest threshold whose giant component is smaller than at the first
/// grid point; nullopt when it never shrinks.
inline std::optional<double> inflection_threshold(const ConnectivityProfile& prof) {
  if (prof.points.size() < 2) return std::nullopt;
  const auto base = prof.points.front().giant_size;
  for (const auto& p : prof.points) {
    if (p.giant_size < base) return p.threshold;
  }
  return std::nullopt;
}

inline void write_profile_csv(std::ostream& out, const ConnectivityProfile& prof) {
  out << "threshold,log10_threshold,components,giant_size,giant_fraction\n";
  for (const auto& p : prof.points) {
    out << csv::format(p.threshold) << ',' << csv::format(p.log_threshold) << ','
        << p.component_count << ',' << p.giant_size << ',' << csv::format(p.giant_fraction) << '\n';
  }
}

}  // namespace tradenet
