#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tradenet/error.hpp"

namespace tradenet {

using NodeIndex = std::uint32_t;

struct NodeId {
  NodeIndex index{0};
  std::string iso3;
};

struct Edge {
  NodeIndex source{0};
  NodeIndex target{0};
  double weight{0.0};  // thousands of USD

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Raw flow observation keyed by country code, as read from the edge CSV.
struct EdgeRecord {
  std::string source;
  std::string target;
  double weight{0.0};
};

/// Directed weighted network over a fixed node universe. Immutable after
/// construction. Edges are kept sorted by (source, target) and indexed by a
/// hashed ordered-pair key so `has_edge` is O(1).
class TradeNetwork {
 public:
  TradeNetwork() = default;

  /// Builds from index-based edges. Throws DataError on self-loops, duplicate
  /// ordered pairs, out-of-range endpoints, negative or non-finite weights,
  /// or duplicate node labels.
  TradeNetwork(std::vector<std::string> labels, std::vector<Edge> edges, int period = 0)
      : labels_(std::move(labels)), edges_(std::move(edges)), period_(period) {
    const auto n = labels_.size();
    index_of_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_of_.emplace(labels_[i], static_cast<NodeIndex>(i)).second) {
        throw DataError("duplicate node code '" + labels_[i] + "'");
      }
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    lookup_.reserve(edges_.size());
    out_.assign(n, {});
    in_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& ed = edges_[e];
      if (ed.source >= n || ed.target >= n) {
        throw DataError("edge endpoint out of range");
      }
      if (ed.source == ed.target) {
        throw DataError("self-loop on '" + labels_[ed.source] + "'");
      }
      if (!(ed.weight >= 0.0) || ed.weight == std::numeric_limits<double>::infinity()) {
        throw DataError("invalid weight on edge " + labels_[ed.source] + "->" +
                        labels_[ed.target]);
      }
      if (!lookup_.emplace(key(ed.source, ed.target), e).second) {
        throw DataError("duplicate edge " + labels_[ed.source] + "->" + labels_[ed.target]);
      }
      out_[ed.source].push_back(ed.target);
      in_[ed.target].push_back(ed.source);
    }
  }

  /// Convenience for synthetic graphs: nodes labelled "v0", "v1", ...
  static TradeNetwork with_anonymous_nodes(std::size_t n, std::vector<Edge> edges,
                                           int period = 0) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "v" + std::to_string(i);
    return TradeNetwork(std::move(labels), std::move(edges), period);
  }

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  int period() const noexcept { return period_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(NodeIndex i) const { return labels_.at(i); }
  NodeId node(NodeIndex i) const { return NodeId{i, labels_.at(i)}; }

  std::optional<NodeIndex> index_of(std::string_view iso3) const {
    auto it = index_of_.find(std::string(iso3));
    if (it == index_of_.end()) return std::nullopt;
    return it->second;
  }

  /// Adjacency indicator Y(i, j).
  bool has_edge(NodeIndex i, NodeIndex j) const {
    return lookup_.count(key(i, j)) != 0;
  }

  std::optional<double> weight(NodeIndex i, NodeIndex j) const {
    auto it = lookup_.find(key(i, j));
    if (it == lookup_.end()) return std::nullopt;
    return edges_[it->second].weight;
  }

  const std::vector<NodeIndex>& successors(NodeIndex i) const { return out_.at(i); }
  const std::vector<NodeIndex>& predecessors(NodeIndex i) const { return in_.at(i); }
  std::size_t out_degree(NodeIndex i) const { return out_.at(i).size(); }
  std::size_t in_degree(NodeIndex i) const { return in_.at(i).size(); }

 private:
  static std::uint64_t key(NodeIndex i, NodeIndex j) noexcept {
    return (static_cast<std::uint64_t>(i) << 32) | j;
  }

  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  int period_{0};
  std::unordered_map<std::string, NodeIndex> index_of_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
  std::vector<std::vector<NodeIndex>> out_;
  std::vector<std::vector<NodeIndex>> in_;
};

/// Maps code-keyed flow records onto the node universe. Zero-weight records
/// still create edges.
inline TradeNetwork build_network(const std::vector<EdgeRecord>& records,
                                  const std::vector<std::string>& node_universe,
                                  int period = 0) {
  std::unordered_map<std::string_view, NodeIndex> idx;
  for (std::size_t i = 0; i < node_universe.size(); ++i) {
    idx.emplace(node_universe[i], static_cast<NodeIndex>(i));
  }
  std::vector<Edge> edges;
  edges.reserve(records.size());
  for (const auto& r : records) {
    auto s = idx.find(r.source);
    if (s == idx.end()) throw DataError("unknown country code '" + r.source + "'");
    auto t = idx.find(r.target);
    if (t == idx.end()) throw DataError("unknown country code '" + r.target + "'");
    if (r.source == r.target) throw DataError("self-loop record for '" + r.source + "'");
    if (r.weight < 0.0) {
      throw DataError("negative weight on " + r.source + "->" + r.target);
    }
    edges.push_back(Edge{s->second, t->second, r.weight});
  }
  return TradeNetwork(node_universe, std::move(edges), period);
}

/// Keeps exactly the edges with weight >= w_min over the same node set.
inline TradeNetwork threshold_subgraph(const TradeNetwork& net, double w_min) {
  std::vector<Edge> kept;
  for (const auto& e : net.edges()) {
    if (e.weight >= w_min) kept.push_back(e);
  }
  return TradeNetwork(net.labels(), std::move(kept), net.period());
}

struct ComponentLabeling {
  std::vector<NodeIndex> labels;  // smallest node index in the component
  std::size_t count{0};
  std::size_t giant_size{0};
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), NodeIndex{0});
  }
  NodeIndex find(NodeIndex x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Root is always the smaller index, so find() returns the component minimum.
  void unite(NodeIndex a, NodeIndex b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<NodeIndex> parent_;
};

}  // namespace detail

/// Weakly connected components, ignoring edge direction.
inline ComponentLabeling weak_components(const TradeNetwork& net) {
  const auto n = net.node_count();
  detail::DisjointSets sets(n);
  for (const auto& e : net.edges()) sets.unite(e.source, e.target);

  ComponentLabeling out;
  out.labels.resize(n);
  std::vector<std::size_t> sizes(n, 0);
  for (NodeIndex i = 0; i < n; ++i) {
    out.labels[i] = sets.find(i);
    if (sizes[out.labels[i]]++ == 0) ++out.count;
  }
  out.giant_size = n == 0 ? 0 : *std::max_element(sizes.begin(), sizes.end());
  return out;
}

}  // namespace tradenet
