#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/graph.hpp"
#include "tradenet/ingest.hpp"

namespace tradenet {

inline constexpr double kNotAValue = std::numeric_limits<double>::quiet_NaN();

namespace detail {

/// Pearson correlation of paired samples; NaN when either side is constant.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = x.size();
  if (n == 0 || n != y.size()) return kNotAValue;
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return kNotAValue;
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

/// Sample coefficient of variation (n-1 SD over mean); NaN for zero mean.
inline double coefficient_of_variation(const std::vector<double>& v) {
  const auto s = describe_values(v);
  if (s.count < 2 || s.mean == 0.0) return kNotAValue;
  return s.sd / s.mean;
}

inline bool linked(const TradeNetwork& net, NodeIndex a, NodeIndex b) {
  return net.has_edge(a, b) || net.has_edge(b, a);
}

/// Sorted neighbour lists of the undirected projection.
inline std::vector<std::vector<NodeIndex>> undirected_neighbours(const TradeNetwork& net) {
  std::vector<std::vector<NodeIndex>> nb(net.node_count());
  for (const auto& e : net.edges()) {
    nb[e.source].push_back(e.target);
    nb[e.target].push_back(e.source);
  }
  for (auto& v : nb) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return nb;
}

}  // namespace detail

inline double density(const TradeNetwork& net) {
  const auto n = net.node_count();
  if (n < 2) throw DataError("density needs at least two nodes");
  return static_cast<double>(net.edge_count()) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct Reciprocity {
  double edge{kNotAValue};  // edges whose reverse exists / edges
  double dyad{kNotAValue};  // mutual / (mutual + asymmetric)
  std::size_t mutual{0};
  std::size_t asymmetric{0};
};

inline Reciprocity reciprocity(const TradeNetwork& net) {
  Reciprocity r;
  std::size_t reciprocated = 0;
  for (const auto& e : net.edges()) {
    if (net.has_edge(e.target, e.source)) ++reciprocated;
  }
  r.mutual = reciprocated / 2;
  r.asymmetric = net.edge_count() - reciprocated;
  if (net.edge_count() == 0) return r;
  r.edge = static_cast<double>(reciprocated) / static_cast<double>(net.edge_count());
  r.dyad = static_cast<double>(r.mutual) / static_cast<double>(r.mutual + r.asymmetric);
  return r;
}

/// Global clustering coefficient. Undirected: 3 x triangles / connected
/// triples of the undirected projection. Directed: closed two-paths
/// i->j->k (i != k) with i->k, over all such two-paths.
inline double transitivity(const TradeNetwork& net, bool directed = false) {
  std::size_t closed = 0, triples = 0;
  if (!directed) {
    const auto nb = detail::undirected_neighbours(net);
    for (const auto& list : nb) {
      const auto d = list.size();
      triples += d < 2 ? 0 : d * (d - 1) / 2;
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) closed += detail::linked(net, list[a], list[b]);
      }
    }
  } else {
    for (NodeIndex j = 0; j < net.node_count(); ++j) {
      for (NodeIndex i : net.predecessors(j)) {
        for (NodeIndex k : net.successors(j)) {
          if (i == k) continue;
          ++triples;
          closed += net.has_edge(i, k);
        }
      }
    }
  }
  if (triples == 0) return kNotAValue;
  return static_cast<double>(closed) / static_cast<double>(triples);
}

/// Newman degree assortativity. Undirected (default): Pearson correlation
/// of projection degrees at both ends of every projection edge, each edge
/// counted in both orientations. Directed: out-degree of the source against
/// in-degree of the target over directed edges.
inline double assortativity_degree(const TradeNetwork& net, bool directed = false) {
  std::vector<double> x, y;
  if (!directed) {
    const auto nb = detail::undirected_neighbours(net);
    for (NodeIndex u = 0; u < nb.size(); ++u) {
      for (NodeIndex v : nb[u]) {
        x.push_back(static_cast<double>(nb[u].size()));
        y.push_back(static_cast<double>(nb[v].size()));
      }
    }
  } else {
    for (const auto& e : net.edges()) {
      x.push_back(static_cast<double>(net.out_degree(e.source)));
      y.push_back(static_cast<double>(net.in_degree(e.target)));
    }
  }
  return detail::pearson(x, y);
}

/// Pearson correlation between in-degree and out-degree across nodes.
inline double degree_correlation(const TradeNetwork& net) {
  std::vector<double> in, out;
  for (NodeIndex i = 0; i < net.node_count(); ++i) {
    in.push_back(static_cast<double>(net.in_degree(i)));
    out.push_back(static_cast<double>(net.out_degree(i)));
  }
  return detail::pearson(in, out);
}

struct StatsOptions {
  bool directed_transitivity{false};
  bool directed_assortativity{false};
};

struct StructuralSummary {
  std::size_t nodes{0};
  std::size_t edges{0};
  std::size_t components{0};
  double mean_out_degree{kNotAValue};
  double cv_out_degree{kNotAValue};
  double mean_in_degree{kNotAValue};
  double cv_in_degree{kNotAValue};
  double mean_weight{kNotAValue};  // millions of USD
  double cv_weight{kNotAValue};
  double degree_correlation{kNotAValue};
  double density{kNotAValue};
  double transitivity{kNotAValue};
  double edge_reciprocity{kNotAValue};
  double dyad_reciprocity{kNotAValue};
  double assortativity{kNotAValue};
};

inline StructuralSummary summarize(const TradeNetwork& net, const StatsOptions& opt = {}) {
  StructuralSummary s;
  s.nodes = net.node_count();
  if (s.nodes < 2) throw DataError("structural summary needs at least two nodes");
  s.edges = net.edge_count();
  s.components = weak_components(net).count;

  std::vector<double> out, in, w;
  for (NodeIndex i = 0; i < s.nodes; ++i) {
    out.push_back(static_cast<double>(net.out_degree(i)));
    in.push_back(static_cast<double>(net.in_degree(i)));
  }
  for (const auto& e : net.edges()) w.push_back(e.weight / 1000.0);

  s.mean_out_degree = static_cast<double>(s.edges) / static_cast<double>(s.nodes);
  s.mean_in_degree = s.mean_out_degree;
  s.cv_out_degree = detail::coefficient_of_variation(out);
  s.cv_in_degree = detail::coefficient_of_variation(in);
  const auto ws = describe_values(w);
  s.mean_weight = ws.mean;
  s.cv_weight = ws.count >= 2 && ws.mean != 0.0 ? ws.sd / ws.mean : kNotAValue;
  s.degree_correlation = degree_correlation(net);
  s.density = density(net);
  s.transitivity = transitivity(net, opt.directed_transitivity);
  const auto r = reciprocity(net);
  s.edge_reciprocity = r.edge;
  s.dyad_reciprocity = r.dyad;
  s.assortativity = assortativity_degree(net, opt.directed_assortativity);
  return s;
}

/// Finite numbers as JSON numbers, anything else as null.
inline nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nlohmann::ordered_json(nullptr);
  return nlohmann::ordered_json(v);
}

// NaN fields serialize as JSON null and CSV "NA".
inline nlohmann::ordered_json to_json(const StructuralSummary& s, int period,
                                      const StatsOptions& opt = {}) {
  const auto num = json_number;
  nlohmann::ordered_json j;
  j["period"] = period;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["components"] = s.components;
  j["mean_out_degree"] = num(s.mean_out_degree);
  j["cv_out_degree"] = num(s.cv_out_degree);
  j["mean_in_degree"] = num(s.mean_in_degree);
  j["cv_in_degree"] = num(s.cv_in_degree);
  j["mean_weight"] = num(s.mean_weight);
  j["cv_weight"] = num(s.cv_weight);
  j["degree_correlation"] = num(s.degree_correlation);
  j["density"] = num(s.density);
  j["transitivity"] = num(s.transitivity);
  j["edge_reciprocity"] = num(s.edge_reciprocity);
  j["dyad_reciprocity"] = num(s.dyad_reciprocity);
  j["assortativity"] = num(s.assortativity);
  j["weight_unit"] = "millions_usd";
  j["cv_unit"] = "ratio";
  j["degree_correlation_definition"] = "assumed: pearson(in_degree, out_degree) across nodes";
  j["transitivity_definition"] =
      opt.directed_transitivity ? "directed two-path closure" : "undirected projection";
  j["assortativity_definition"] =
      opt.directed_assortativity ? "directed out-in degree" : "undirected projection degree";
  return j;
}

inline void write_summary_csv(std::ostream& out, const StructuralSummary& s, int period) {
  out << "period,nodes,edges,components,mean_out_degree,cv_out_degree,mean_in_degree,"
         "cv_in_degree,mean_weight,cv_weight,degree_correlation,density,transitivity,"
         "edge_reciprocity,dyad_reciprocity,assortativity\n";
  out << period << ',' << s.nodes << ',' << s.edges << ',' << s.components;
  for (double v : {s.mean_out_degree, s.cv_out_degree, s.mean_in_degree, s.cv_in_degree,
                   s.mean_weight, s.cv_weight, s.degree_correlation, s.density, s.transitivity,
                   s.edge_reciprocity, s.dyad_reciprocity, s.assortativity}) {
    out << ',' << csv::format(v);
  }
  out << '\n';
}

}  // namespace tradenet
