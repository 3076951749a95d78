#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tradenet/attributes.hpp"
#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/graph.hpp"
#include "tradenet/ingest.hpp"
#include "tradenet/netstats.hpp"
#include "tradenet/random.hpp"

namespace tradenet::ergm {

enum class TermKind { edges, nodecov, absdiff, nodematch, nodefactor, mutual };

inline std::string_view kind_name(TermKind k) {
  switch (k) {
    case TermKind::edges: return "edges";
    case TermKind::nodecov: return "nodecov";
    case TermKind::absdiff: return "absdiff";
    case TermKind::nodematch: return "nodematch";
    case TermKind::nodefactor: return "nodefactor";
    case TermKind::mutual: return "mutual";
  }
  return "?";
}

inline TermKind parse_kind(std::string_view s) {
  for (auto k : {TermKind::edges, TermKind::nodecov, TermKind::absdiff, TermKind::nodematch,
                 TermKind::nodefactor, TermKind::mutual}) {
    if (kind_name(k) == s) return k;
  }
  throw ConfigError("unknown ERGM term kind '" + std::string(s) + "'");
}

inline bool needs_attribute(TermKind k) {
  return k != TermKind::edges && k != TermKind::mutual;
}

struct TermSpec {
  TermKind kind{TermKind::edges};
  std::string attribute;
  double tolerance{0.0};        // nodematch on numeric attributes
  std::optional<double> level;  // nodefactor; unset expands to every non-base level
};

struct ErgmModel {
  std::vector<TermSpec> terms;
  bool standardize_covariates{false};
};

/// A term bound to its attribute column: one column of the design matrix.
struct ModelStatistic {
  std::string name;
  TermKind kind{TermKind::edges};
  std::vector<double> values;  // per node; empty for edges/mutual
  bool categorical{false};
  double tolerance{0.0};
  double level{0.0};

  bool dyad_independent() const noexcept { return kind != TermKind::mutual; }
};

/// Value of the statistic's change when the edge i->j is added to `g`.
/// `Graph` needs `bool has_edge(NodeIndex, NodeIndex) const`.
template <class Graph>
double change_statistic(const ModelStatistic& s, const Graph& g, NodeIndex i, NodeIndex j) {
  switch (s.kind) {
    case TermKind::edges: return 1.0;
    case TermKind::nodecov: return s.values[i] + s.values[j];
    case TermKind::absdiff: return std::abs(s.values[i] - s.values[j]);
    case TermKind::nodematch:
      if (s.categorical) return s.values[i] == s.values[j] ? 1.0 : 0.0;
      return std::abs(s.values[i] - s.values[j]) <= s.tolerance ? 1.0 : 0.0;
    case TermKind::nodefactor:
      return (s.values[i] == s.level ? 1.0 : 0.0) + (s.values[j] == s.level ? 1.0 : 0.0);
    case TermKind::mutual: return g.has_edge(j, i) ? 1.0 : 0.0;
  }
  return 0.0;
}

/// Binds every term to its attribute column, expanding level-less
/// nodefactor terms to one statistic per level except the smallest.
inline std::vector<ModelStatistic> resolve(const ErgmModel& model, const AttributeTable& attrs) {
  if (model.terms.empty()) throw ConfigError("ERGM model has no terms");
  std::vector<ModelStatistic> out;
  for (const auto& t : model.terms) {
    ModelStatistic s;
    s.kind = t.kind;
    s.name = std::string(kind_name(t.kind));
    if (!needs_attribute(t.kind)) {
      out.push_back(std::move(s));
      continue;
    }
    if (t.attribute.empty()) throw ConfigError(s.name + " term needs an attribute");
    const auto* col = attrs.find(t.attribute);
    if (!col) throw ConfigError("ERGM term refers to unknown attribute '" + t.attribute + "'");
    if (t.kind == TermKind::nodefactor && !col->categorical) {
      throw ConfigError("nodefactor needs a categorical attribute, '" + t.attribute + "' is numeric");
    }
    if (t.tolerance < 0.0) throw ConfigError("nodematch tolerance must be >= 0");
    s.categorical = col->categorical;
    s.tolerance = t.tolerance;
    s.values.reserve(col->cells.size());
    for (std::size_t r = 0; r < col->cells.size(); ++r) {
      if (!col->cells[r]) {
        throw DataError("attribute '" + t.attribute + "' is missing for '" + attrs.row_ids()[r] +
                        "'; impute before modeling");
      }
      s.values.push_back(*col->cells[r]);
    }
    if (model.standardize_covariates && !col->categorical) {
      const auto sc = detail::column_scale(*col);
      for (auto& v : s.values) v = (v - sc.mean) / sc.sd;
      s.tolerance /= sc.sd;
    }
    s.name += "." + t.attribute;
    if (t.kind == TermKind::nodefactor) {
      std::set<double> levels(s.values.begin(), s.values.end());
      std::vector<double> wanted;
      if (t.level) {
        wanted.push_back(*t.level);
      } else {
        wanted.assign(std::next(levels.begin()), levels.end());
        if (wanted.empty()) {
          throw DataError("nodefactor." + t.attribute + " has a single level");
        }
      }
      for (double lv : wanted) {
        auto f = s;
        f.level = lv;
        f.name += "." + csv::format(lv);
        out.push_back(std::move(f));
      }
    } else {
      out.push_back(std::move(s));
    }
  }
  std::set<std::string> names;
  for (const auto& s : out) {
    if (!names.insert(s.name).second) throw ConfigError("duplicate ERGM term '" + s.name + "'");
  }
  return out;
}

/// Change statistic of a single term on dyad (i, j) of `net`.
inline double change_statistic(const TermSpec& term, const TradeNetwork& net,
                               const AttributeTable& attrs, NodeIndex i, NodeIndex j) {
  if (i == j) throw ConfigError("change statistic needs i != j");
  if (term.kind == TermKind::nodefactor && !term.level) {
    throw ConfigError("nodefactor change statistic needs a level");
  }
  const auto stats = resolve(ErgmModel{{term}, false}, attrs);
  return change_statistic(stats.front(), net, i, j);
}

/// Model matrix over ordered dyads in lexicographic (i, j) order.
struct DyadTable {
  std::vector<std::string> names;
  std::vector<std::pair<NodeIndex, NodeIndex>> dyads;
  Eigen::VectorXd response;
  Eigen::MatrixXd X;
};

inline DyadTable design_matrix(const std::vector<ModelStatistic>& stats, const TradeNetwork& net) {
  const auto n = net.node_count();
  const auto rows = n * (n > 0 ? n - 1 : 0);
  DyadTable t;
  for (const auto& s : stats) t.names.push_back(s.name);
  t.dyads.reserve(rows);
  t.response.resize(static_cast<Eigen::Index>(rows));
  t.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(stats.size()));
  Eigen::Index r = 0;
  for (NodeIndex i = 0; i < n; ++i) {
    for (NodeIndex j = 0; j < n; ++j) {
      if (i == j) continue;
      t.dyads.emplace_back(i, j);
      t.response[r] = net.has_edge(i, j) ? 1.0 : 0.0;
      for (std::size_t h = 0; h < stats.size(); ++h) {
        t.X(r, static_cast<Eigen::Index>(h)) = change_statistic(stats[h], net, i, j);
      }
      ++r;
    }
  }
  return t;
}

inline DyadTable design_matrix(const ErgmModel& model, const TradeNetwork& net,
                               const AttributeTable& attrs) {
  if (attrs.rows() != net.node_count()) {
    throw DataError("attribute table has " + std::to_string(attrs.rows()) + " rows for " +
                    std::to_string(net.node_count()) + " nodes");
  }
  return design_matrix(resolve(model, attrs), net);
}

// ---------------------------------------------------------------------------
// Estimation

/// Table-4 significance codes: p < 0.001 "***", < 0.01 "**", < 0.05 "*", < 0.1 ".".
inline std::string significance_code(double p) {
  if (!(p < 0.1)) return "";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return ".";
}

/// Two-sided normal p-value of a z statistic.
inline double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct TermEstimate {
  std::string name;
  double estimate{0.0};
  double std_error{0.0};
  double z{0.0};
  double p{1.0};
  std::string significance;
};

struct ErgmFit {
  std::vector<TermEstimate> terms;
  double log_pseudo_likelihood{0.0};
  std::size_t iterations{0};
  bool converged{false};

  std::vector<double> coefficients() const {
    std::vector<double> c;
    for (const auto& t : terms) c.push_back(t.estimate);
    return c;
  }
};

struct FitOptions {
  std::size_t max_iter{50};
  double tol{1e-8};
  /// Separation guard: |estimate| x max |statistic| beyond this aborts the fit.
  double effect_bound{40.0};
};

namespace detail {

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// y - logistic(eta), without cancellation when the fitted value is near y.
inline Eigen::VectorXd residual(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  Eigen::VectorXd r(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) r[i] = y[i] != 0.0 ? logistic(-eta[i]) : -logistic(eta[i]);
  return r;
}

/// logistic(eta) * (1 - logistic(eta)).
inline Eigen::VectorXd logistic_variance(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double e) { return logistic(e) * logistic(-e); });
}

inline double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) ll += y[r] * eta[r] - softplus(eta[r]);
  return ll;
}

/// Names every column that adds no rank to the columns before it.
inline std::vector<std::size_t> collinear_columns(const Eigen::MatrixXd& X) {
  std::vector<std::size_t> bad;
  std::vector<Eigen::Index> kept;
  Eigen::Index rank = 0;
  for (Eigen::Index h = 0; h < X.cols(); ++h) {
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
    for (std::size_t c = 0; c < kept.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = X.col(kept[c]);
    sub.col(sub.cols() - 1) = X.col(h);
    const auto r = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(sub).rank();
    if (r > rank) {
      kept.push_back(h);
      rank = r;
    } else {
      bad.push_back(static_cast<std::size_t>(h));
    }
  }
  return bad;
}

}  // namespace detail

/// Logistic regression of edge indicators on change statistics by Newton
/// (IRLS) with step halving. Exact MLE for dyad-independent models.
///
/// Newton runs on columns divided by their largest absolute value so that
/// the score tolerance means the same thing for edges as for covariates
/// measured in dollars; estimates and standard errors are mapped back.
inline ErgmFit fit_mple(const DyadTable& t, const FitOptions& opt = {}) {
  const auto p = t.X.cols();
  if (p == 0) throw ConfigError("ERGM model has no terms");
  if (t.X.rows() == 0) throw DataError("ERGM needs at least two nodes");
  if (const auto bad = detail::collinear_columns(t.X); !bad.empty()) {
    std::string msg = "design matrix is rank deficient; collinear terms:";
    for (auto h : bad) msg += " " + t.names[h];
    throw NumericalError(msg);
  }
  Eigen::VectorXd scale(p);
  for (Eigen::Index h = 0; h < p; ++h) {
    const double m = t.X.col(h).cwiseAbs().maxCoeff();
    scale[h] = m > 0 ? m : 1.0;
  }
  const Eigen::MatrixXd Xs = t.X * scale.cwiseInverse().asDiagonal();
  const auto& y = t.response;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(y.size());
  double ll = detail::bernoulli_loglik(y, eta);
  ErgmFit fit;
  for (std::size_t iter = 0; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd score = Xs.transpose() * detail::residual(y, eta);
    fit.iterations = iter;
    const Eigen::VectorXd w = detail::logistic_variance(eta);
    const Eigen::MatrixXd info = Xs.transpose() * w.asDiagonal() * Xs;
    Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) throw NumericalError("ERGM: singular information matrix");
    // A vanishing score alone is not enough: under separation the score
    // decays while the Newton step stays near one.
    if (score.cwiseAbs().maxCoeff() < opt.tol && step.cwiseAbs().maxCoeff() < 1e-6) {
      fit.converged = true;
      break;
    }
    if (iter == opt.max_iter) break;
    // Step halving guards the rare non-monotone Newton step.
    for (int halvings = 0;; ++halvings) {
      const Eigen::VectorXd cand = beta + step;
      const Eigen::VectorXd cand_eta = Xs * cand;
      const double cand_ll = detail::bernoulli_loglik(y, cand_eta);
      if (cand_ll >= ll - 1e-12 * std::abs(ll) || halvings == 30) {
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        break;
      }
      step *= 0.5;
    }
    for (Eigen::Index h = 0; h < p; ++h) {
      if (std::abs(beta[h]) > opt.effect_bound) {
        throw NumericalError("ERGM: estimate for '" + t.names[h] +
                             "' diverges (separation); remove or recode the term");
      }
    }
  }

  const Eigen::VectorXd w = detail::logistic_variance(eta);
  const Eigen::MatrixXd info = Xs.transpose() * w.asDiagonal() * Xs;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  if (!cov.allFinite()) throw NumericalError("ERGM: information matrix is not invertible");

  fit.log_pseudo_likelihood = ll;
  for (Eigen::Index h = 0; h < p; ++h) {
    TermEstimate e;
    e.name = t.names[h];
    e.estimate = beta[h] / scale[h];
    e.std_error = std::sqrt(std::max(0.0, cov(h, h))) / scale[h];
    e.z = e.estimate / e.std_error;
    e.p = two_sided_p(e.z);
    e.significance = significance_code(e.p);
    fit.terms.push_back(std::move(e));
  }
  return fit;
}

inline ErgmFit fit_mple(const ErgmModel& model, const TradeNetwork& net, const AttributeTable& attrs,
                        const FitOptions& opt = {}) {
  if (attrs.rows() != net.node_count()) {
    throw DataError("attribute table does not match the network's node count");
  }
  const auto stats = resolve(model, attrs);
  for (const auto& s : stats) {
    if (!s.dyad_independent()) {
      throw ConfigError("term '" + s.name + "' is dyad-dependent; estimation supports "
                        "dyad-independent terms only");
    }
  }
  return fit_mple(design_matrix(stats, net), opt);
}

// ---------------------------------------------------------------------------
// Simulation

/// Sufficient statistics g(y) of the model on a graph.
template <class Graph>
std::vector<double> model_statistics(const std::vector<ModelStatistic>& stats, const Graph& g,
                                     std::size_t n) {
  std::vector<double> out(stats.size(), 0.0);
  for (NodeIndex i = 0; i < n; ++i) {
    for (NodeIndex j = 0; j < n; ++j) {
      if (i == j || !g.has_edge(i, j)) continue;
      for (std::size_t h = 0; h < stats.size(); ++h) {
        if (stats[h].kind == TermKind::mutual) {
          out[h] += (i < j && g.has_edge(j, i)) ? 1.0 : 0.0;
        } else {
          out[h] += change_statistic(stats[h], g, i, j);
        }
      }
    }
  }
  return out;
}

/// Metropolis single-dyad toggle chain on a dense adjacency state.
class EdgeToggleSampler {
 public:
  EdgeToggleSampler(std::vector<ModelStatistic> stats, std::vector<double> theta,
                    const TradeNetwork& start, std::uint64_t seed)
      : stats_(std::move(stats)),
        theta_(std::move(theta)),
        n_(start.node_count()),
        adj_(n_ * n_, 0),
        rng_(seed),
        labels_(start.labels()),
        period_(start.period()) {
    if (theta_.size() != stats_.size()) {
      throw ConfigError("sampler: " + std::to_string(theta_.size()) + " coefficients for " +
                        std::to_string(stats_.size()) + " statistics");
    }
    if (n_ < 2) throw DataError("sampler needs at least two nodes");
    for (const auto& e : start.edges()) {
      adj_[e.source * n_ + e.target] = 1;
      ++edges_;
    }
  }

  bool has_edge(NodeIndex i, NodeIndex j) const { return adj_[i * n_ + j] != 0; }
  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_; }
  std::size_t accepted() const noexcept { return accepted_; }

  /// One proposal: a uniform ordered dyad, toggled with probability
  /// min(1, exp(theta . delta g)).
  void step() {
    const auto pair = uniform_index(rng_, n_ * (n_ - 1));
    const auto i = static_cast<NodeIndex>(pair / (n_ - 1));
    auto j = static_cast<NodeIndex>(pair % (n_ - 1));
    if (j >= i) ++j;
    const bool present = has_edge(i, j);
    double log_ratio = 0.0;
    for (std::size_t h = 0; h < stats_.size(); ++h) {
      log_ratio += theta_[h] * change_statistic(stats_[h], *this, i, j);
    }
    if (present) log_ratio = -log_ratio;
    if (log_ratio >= 0.0 || uniform01(rng_) < std::exp(log_ratio)) {
      adj_[i * n_ + j] = present ? 0 : 1;
      if (present) {
        --edges_;
      } else {
        ++edges_;
      }
      ++accepted_;
    }
  }

  void run(std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) step();
  }

  /// Current state; simulated edges carry unit weight.
  TradeNetwork network() const {
    std::vector<Edge> edges;
    for (NodeIndex i = 0; i < n_; ++i) {
      for (NodeIndex j = 0; j < n_; ++j) {
        if (has_edge(i, j)) edges.push_back({i, j, 1.0});
      }
    }
    return TradeNetwork(labels_, std::move(edges), period_);
  }

 private:
  std::vector<ModelStatistic> stats_;
  std::vector<double> theta_;
  std::size_t n_;
  std::vector<std::uint8_t> adj_;
  std::size_t edges_{0};
  std::size_t accepted_{0};
  Rng rng_;
  std::vector<std::string> labels_;
  int period_;
};

inline TradeNetwork simulate(const ErgmModel& model, const std::vector<double>& coefficients,
                             const AttributeTable& attrs, const TradeNetwork& net_template,
                             std::size_t steps, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("simulate: steps must be >= 1");
  EdgeToggleSampler s(resolve(model, attrs), coefficients, net_template, seed);
  s.run(steps);
  return s.network();
}

// ---------------------------------------------------------------------------
// Goodness of fit

struct GofStatistic {
  std::string name;
  double observed{0.0};
  double simulated_mean{0.0};
  double lower{0.0};  // 2.5% quantile
  double upper{0.0};  // 97.5% quantile
  /// Mid-rank of the observed value among the simulations, in [0, 1].
  double quantile{0.5};

  bool within_band() const noexcept { return observed >= lower && observed <= upper; }
};

struct GofReport {
  std::size_t replicates{0};
  std::size_t steps_per_replicate{0};
  std::vector<GofStatistic> statistics;
};

namespace detail {

inline double quantile_type7(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNotAValue;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline GofStatistic summarize_draws(std::string name, double observed, std::vector<double> draws) {
  GofStatistic g;
  g.name = std::move(name);
  g.observed = observed;
  std::vector<double> finite;
  for (double d : draws) {
    if (std::isfinite(d)) finite.push_back(d);
  }
  std::sort(finite.begin(), finite.end());
  if (finite.empty() || !std::isfinite(observed)) {
    g.simulated_mean = g.lower = g.upper = g.quantile = kNotAValue;
    return g;
  }
  double sum = 0.0;
  std::size_t below = 0, ties = 0;
  for (double d : finite) {
    sum += d;
    below += d < observed;
    ties += d == observed;
  }
  g.simulated_mean = sum / static_cast<double>(finite.size());
  g.lower = quantile_type7(finite, 0.025);
  g.upper = quantile_type7(finite, 0.975);
  g.quantile = (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) /
               static_cast<double>(finite.size());
  return g;
}

}  // namespace detail

/// Simulates `replicates` independent chains from the observed network at
/// `coefficients`, each run for `sweeps` x n(n-1) proposals, and compares
/// model statistics, density, edge reciprocity and transitivity.
inline GofReport goodness_of_fit(const ErgmModel& model, const std::vector<double>& coefficients,
                                 const AttributeTable& attrs, const TradeNetwork& net,
                                 std::size_t replicates, std::uint64_t seed, std::size_t sweeps = 10) {
  if (replicates < 1) throw ConfigError("goodness of fit needs at least one replicate");
  const auto stats = resolve(model, attrs);
  const auto n = net.node_count();
  GofReport rep;
  rep.replicates = replicates;
  rep.steps_per_replicate = std::max<std::size_t>(1, sweeps * n * (n - 1));

  const auto extra = [](const TradeNetwork& g) {
    return std::vector<double>{density(g), reciprocity(g).edge, transitivity(g)};
  };
  const auto obs_model = model_statistics(stats, net, n);
  const auto obs_extra = extra(net);

  std::vector<std::vector<double>> draws(stats.size() + 3);
  for (std::size_t r = 0; r < replicates; ++r) {
    EdgeToggleSampler s(stats, coefficients, net, derive_seed(seed, "ergm-gof", r));
    s.run(rep.steps_per_replicate);
    const auto sim = s.network();
    const auto m = model_statistics(stats, sim, n);
    const auto x = extra(sim);
    for (std::size_t h = 0; h < stats.size(); ++h) draws[h].push_back(m[h]);
    for (std::size_t h = 0; h < 3; ++h) draws[stats.size() + h].push_back(x[h]);
  }
  for (std::size_t h = 0; h < stats.size(); ++h) {
    rep.statistics.push_back(detail::summarize_draws(stats[h].name, obs_model[h], draws[h]));
  }
  const char* names[] = {"density", "edge_reciprocity", "transitivity"};
  for (std::size_t h = 0; h < 3; ++h) {
    rep.statistics.push_back(
        detail::summarize_draws(names[h], obs_extra[h], draws[stats.size() + h]));
  }
  return rep;
}

inline GofReport goodness_of_fit(const ErgmModel& model, const ErgmFit& fit,
                                 const AttributeTable& attrs, const TradeNetwork& net,
                                 std::size_t replicates, std::uint64_t seed, std::size_t sweeps = 10) {
  return goodness_of_fit(model, fit.coefficients(), attrs, net, replicates, seed, sweeps);
}

// ---------------------------------------------------------------------------
// Serialization

/// Model spec: {"standardize": bool, "terms": [{"kind", "attribute", "tolerance", "level"}]}.
inline ErgmModel parse_model(const nlohmann::json& j) {
  ErgmModel m;
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
    throw ConfigError("model spec needs a 'terms' array");
  }
  m.standardize_covariates = j.value("standardize", false);
  for (const auto& t : j["terms"]) {
    TermSpec s;
    s.kind = parse_kind(t.at("kind").get<std::string>());
    s.attribute = t.value("attribute", "");
    s.tolerance = t.value("tolerance", 0.0);
    if (t.contains("level")) s.level = t["level"].get<double>();
    m.terms.push_back(std::move(s));
  }
  return m;
}

/// edges + nodecov for each numeric column + nodefactor for each categorical one.
inline ErgmModel default_model(const AttributeTable& attrs) {
  ErgmModel m;
  m.terms.push_back({TermKind::edges, "", 0.0, std::nullopt});
  for (const auto& c : attrs.columns()) {
    if (!c.categorical) m.terms.push_back({TermKind::nodecov, c.name, 0.0, std::nullopt});
  }
  for (const auto& c : attrs.columns()) {
    if (c.categorical) m.terms.push_back({TermKind::nodefactor, c.name, 0.0, std::nullopt});
  }
  return m;
}

inline nlohmann::ordered_json to_json(const ErgmModel& m) {
  nlohmann::ordered_json j;
  j["standardize"] = m.standardize_covariates;
  j["terms"] = nlohmann::ordered_json::array();
  for (const auto& t : m.terms) {
    nlohmann::ordered_json e;
    e["kind"] = kind_name(t.kind);
    if (!t.attribute.empty()) e["attribute"] = t.attribute;
    if (t.kind == TermKind::nodematch) e["tolerance"] = t.tolerance;
    if (t.level) e["level"] = *t.level;
    j["terms"].push_back(e);
  }
  return j;
}

inline nlohmann::ordered_json to_json(const ErgmFit& f) {
  nlohmann::ordered_json j;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["log_pseudo_likelihood"] = f.log_pseudo_likelihood;
  j["terms"] = nlohmann::ordered_json::array();
  for (const auto& t : f.terms) {
    nlohmann::ordered_json e;
    e["variable"] = t.name;
    e["estimate"] = json_number(t.estimate);
    e["sd"] = json_number(t.std_error);
    e["z"] = json_number(t.z);
    e["p"] = json_number(t.p);
    e["significance"] = t.significance;
    j["terms"].push_back(std::move(e));
  }
  return j;
}

inline void write_fit_csv(std::ostream& out, const ErgmFit& f) {
  out << "variable,estimate,sd,z,p,significance\n";
  for (const auto& t : f.terms) {
    out << t.name << ',' << csv::format(t.estimate) << ',' << csv::format(t.std_error) << ','
        << csv::format(t.z) << ',' << csv::format(t.p) << ',' << t.significance << '\n';
  }
}

inline nlohmann::ordered_json to_json(const GofReport& r) {
  const auto num = json_number;
  nlohmann::ordered_json j;
  j["replicates"] = r.replicates;
  j["steps_per_replicate"] = r.steps_per_replicate;
  j["statistics"] = nlohmann::ordered_json::array();
  for (const auto& s : r.statistics) {
    nlohmann::ordered_json e;
    e["statistic"] = s.name;
    e["observed"] = num(s.observed);
    e["simulated_mean"] = num(s.simulated_mean);
    e["q025"] = num(s.lower);
    e["q975"] = num(s.upper);
    e["quantile"] = num(s.quantile);
    j["statistics"].push_back(std::move(e));
  }
  return j;
}

}  // namespace tradenet::ergm
