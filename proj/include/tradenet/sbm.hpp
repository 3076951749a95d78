#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/graph.hpp"
#include "tradenet/random.hpp"

namespace tradenet::sbm {

/// Every probability is clamped to [kClamp, 1 - kClamp] before a logarithm.
inline constexpr double kClamp = 1e-10;
/// Restarts whose smallest class proportion falls below this are abandoned.
inline constexpr double kDeadClass = 1e-8;
/// Slack allowed on the ELBO between successive EM iterations.
inline constexpr double kElboSlack = 1e-9;

struct SbmParams {
  Eigen::VectorXd theta;  // class proportions
  Eigen::MatrixXd C;      // C(p, q) = Pr(edge p -> q)
};

/// Variational class probabilities, n x K, rows summing to one.
struct Memberships {
  Eigen::MatrixXd tau;

  /// Row argmax; ties go to the smaller class.
  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(tau.rows()));
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index q = 1; q < tau.cols(); ++q) {
        if (tau(i, q) > tau(i, best)) best = q;
      }
      out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
  }
};

struct SbmFit {
  std::size_t K{1};
  SbmParams params;
  Memberships memberships;
  std::vector<std::size_t> labels;  // canonical hard labels
  std::vector<double> elbo_trace;
  double icl{0.0};
  std::size_t restarts_used{0};
  std::size_t best_restart{0};
  std::uint64_t best_restart_seed{0};
  bool converged{false};
  std::vector<std::string> warnings;
};

/// Dense 0/1 adjacency Y with zero diagonal.
inline Eigen::MatrixXd adjacency_matrix(const TradeNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.node_count());
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : net.edges()) Y(e.source, e.target) = 1.0;
  return Y;
}

namespace detail {

inline double clamp_prob(double p) { return std::clamp(p, kClamp, 1.0 - kClamp); }

inline double global_density(const Eigen::MatrixXd& Y) {
  const double n = static_cast<double>(Y.rows());
  return n > 1 ? Y.sum() / (n * (n - 1.0)) : 0.0;
}

/// Expected edge counts A = tau' Y tau and ordered-pair masses T between classes.
inline void block_masses(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& tau, Eigen::MatrixXd& A,
                         Eigen::MatrixXd& T) {
  const Eigen::RowVectorXd S = tau.colwise().sum();
  A = tau.transpose() * Y * tau;
  T = S.transpose() * S - tau.transpose() * tau;
}

inline void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("sbm: non-finite values in ") + what);
}

}  // namespace detail

/// Evidence lower bound:
///   sum_i tau_i . log theta
/// + sum_{i != j} sum_{q,l} tau_iq tau_jl [y_ij log C_ql + (1 - y_ij) log(1 - C_ql)]
/// - sum_{i,q} tau_iq log tau_iq.
inline double elbo(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& tau, const SbmParams& params) {
  detail::check_finite(tau, "tau");
  detail::check_finite(params.C, "C");
  detail::check_finite(params.theta, "theta");
  Eigen::MatrixXd A, T;
  detail::block_masses(Y, tau, A, T);
  const Eigen::MatrixXd C = params.C.unaryExpr(&detail::clamp_prob);
  const Eigen::MatrixXd logC = C.array().log();
  const Eigen::MatrixXd log1mC = (1.0 - C.array()).log();
  const double like = (A.cwiseProduct(logC) + (T - A).cwiseProduct(log1mC)).sum();
  const Eigen::VectorXd logTheta = params.theta.array().max(kClamp).log();
  const double prior = (tau * logTheta).sum();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    for (Eigen::Index q = 0; q < tau.cols(); ++q) {
      const double t = tau(i, q);
      if (t > 0.0) entropy -= t * std::log(t);
    }
  }
  return like + prior + entropy;
}

/// Closed-form maximizer of the ELBO in (theta, C) for fixed tau. Blocks with
/// no pair mass fall back to the global density.
inline SbmParams m_step(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& tau) {
  const auto n = static_cast<double>(tau.rows());
  SbmParams p;
  p.theta = tau.colwise().sum().transpose() / n;
  Eigen::MatrixXd A, T;
  detail::block_masses(Y, tau, A, T);
  const double rho = detail::global_density(Y);
  p.C.resize(A.rows(), A.cols());
  for (Eigen::Index q = 0; q < A.rows(); ++q) {
    for (Eigen::Index l = 0; l < A.cols(); ++l) {
      const double c = T(q, l) > 1e-300 ? A(q, l) / T(q, l) : rho;
      p.C(q, l) = detail::clamp_prob(c);
    }
  }
  return p;
}

/// Fixed-point E-step. Rows are updated in node order using the latest
/// values of every other row, so each update maximizes the ELBO over that
/// row exactly and the bound never decreases. Stops when the largest change
/// in a sweep is below inner_tol.
inline Memberships e_step(const Eigen::MatrixXd& Y, const SbmParams& params, Eigen::MatrixXd tau,
                          double inner_tol = 1e-8, std::size_t inner_max = 100) {
  const Eigen::Index n = tau.rows(), K = tau.cols();
  const Eigen::MatrixXd C = params.C.unaryExpr(&detail::clamp_prob);
  const Eigen::MatrixXd logC = C.array().log();
  const Eigen::MatrixXd log1mC = (1.0 - C.array()).log();
  const Eigen::VectorXd logTheta = params.theta.array().max(kClamp).log();

  Eigen::RowVectorXd S = tau.colwise().sum();
  Eigen::MatrixXd outMass = Y * tau;              // sum_j y_ij tau_j
  Eigen::MatrixXd inMass = Y.transpose() * tau;   // sum_j y_ji tau_j
  Eigen::VectorXd s(K), fresh(K);
  for (std::size_t sweep = 0; sweep < inner_max; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::RowVectorXd others = S - tau.row(i);
      const Eigen::RowVectorXd oe = outMass.row(i), ie = inMass.row(i);
      const Eigen::RowVectorXd on = others - oe, in = others - ie;
      s = logTheta + logC * oe.transpose() + log1mC * on.transpose() +
          logC.transpose() * ie.transpose() + log1mC.transpose() * in.transpose();
      const double top = s.maxCoeff();
      fresh = (s.array() - top).exp();
      fresh /= fresh.sum();
      const Eigen::RowVectorXd delta = fresh.transpose() - tau.row(i);
      const double change = delta.cwiseAbs().maxCoeff();
      if (change == 0.0) continue;
      max_change = std::max(max_change, change);
      tau.row(i) = fresh.transpose();
      S += delta;
      outMass += Y.col(i) * delta;
      inMass += Y.row(i).transpose() * delta;
    }
    if (max_change < inner_tol) break;
  }
  return Memberships{std::move(tau)};
}

// ---------------------------------------------------------------------------
// Initialization

namespace detail {

/// Lloyd's k-means with k-means++ seeding; returns labels of the best of
/// `starts` runs by within-cluster sum of squares.
inline std::vector<std::size_t> kmeans(const Eigen::MatrixXd& pts, std::size_t k, std::size_t starts,
                                       Rng& rng, std::size_t max_iter = 100) {
  const auto n = static_cast<std::size_t>(pts.rows());
  std::vector<std::size_t> best_labels(n, 0);
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts; ++s) {
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), pts.cols());
    centers.row(0) = pts.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
    std::vector<double> d2(n);
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t cc = 0; cc < c; ++cc) {
          m = std::min(m, (pts.row(static_cast<Eigen::Index>(i)) -
                           centers.row(static_cast<Eigen::Index>(cc))).squaredNorm());
        }
        d2[i] = m;
        total += m;
      }
      std::size_t pick = uniform_index(rng, n);
      if (total > 0.0) {
        double u = uniform01(rng) * total;
        for (std::size_t i = 0; i < n; ++i) {
          u -= d2[i];
          if (u < 0.0) {
            pick = i;
            break;
          }
        }
      }
      centers.row(static_cast<Eigen::Index>(c)) = pts.row(static_cast<Eigen::Index>(pick));
    }
    std::vector<std::size_t> labels(n, 0);
    double cost = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      bool moved = false;
      cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double d = (pts.row(static_cast<Eigen::Index>(i)) -
                            centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
          if (d < m) {
            m = d;
            arg = c;
          }
        }
        moved = moved || arg != labels[i] || it == 0;
        labels[i] = arg;
        cost += m;
      }
      if (!moved) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), pts.cols());
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sums.row(static_cast<Eigen::Index>(labels[i])) += pts.row(static_cast<Eigen::Index>(i));
        ++counts[labels[i]];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centers.row(static_cast<Eigen::Index>(c)) =
              sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        }
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_labels = labels;
    }
  }
  return best_labels;
}

inline Eigen::MatrixXd one_hot(const std::vector<std::size_t>& labels, std::size_t K) {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    tau(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
  }
  return tau;
}

}  // namespace detail

/// k-means (10 starts) on the top-K left singular vectors, scaled by their
/// singular values, of the density-centred adjacency matrix.
inline Eigen::MatrixXd spectral_init(const Eigen::MatrixXd& Y, std::size_t K, std::uint64_t seed) {
  Eigen::MatrixXd centred = Y.array() - detail::global_density(Y);
  centred.diagonal().setZero();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU);
  const auto k = static_cast<Eigen::Index>(K);
  const Eigen::MatrixXd emb = svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal();
  Rng rng(seed);
  return detail::one_hot(detail::kmeans(emb, K, 10, rng), K);
}

/// Rows drawn from a flat Dirichlet.
inline Eigen::MatrixXd random_init(std::size_t n, std::size_t K, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd tau(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    for (Eigen::Index q = 0; q < tau.cols(); ++q) tau(i, q) = -std::log1p(-uniform01(rng));
    tau.row(i) /= tau.row(i).sum();
  }
  return tau;
}

// ---------------------------------------------------------------------------
// Model selection

/// Integrated classification likelihood at hard labels: the complete-data
/// log-likelihood maximized at those labels, minus (K^2/2) log(n(n-1)) for C
/// and ((K-1)/2) log n for theta.
inline double icl(const Eigen::MatrixXd& Y, const std::vector<std::size_t>& labels, std::size_t K) {
  const auto n = labels.size();
  std::vector<double> size(K, 0.0);
  for (auto l : labels) size.at(l) += 1.0;
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      if (i != j && Y(i, j) != 0.0) {
        edges(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]),
              static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)])) += 1.0;
      }
    }
  }
  auto xlogy = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); };
  double ll = 0.0;
  for (std::size_t q = 0; q < K; ++q) {
    ll += xlogy(size[q], size[q] / static_cast<double>(n));
    for (std::size_t l = 0; l < K; ++l) {
      const double pairs = size[q] * size[l] - (q == l ? size[q] : 0.0);
      if (pairs <= 0.0) continue;
      const double e = edges(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l));
      const double c = e / pairs;
      ll += xlogy(e, c) + xlogy(pairs - e, 1.0 - c);
    }
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(K);
  return ll - 0.5 * kd * kd * std::log(nd * (nd - 1.0)) - 0.5 * (kd - 1.0) * std::log(nd);
}

inline double icl(const TradeNetwork& net, const SbmFit& fit) {
  return icl(adjacency_matrix(net), fit.labels, fit.K);
}

/// Relabels classes by descending hard-label size, ties by smallest member.
inline void canonicalize(SbmFit& fit) {
  const auto raw = fit.memberships.labels();
  const auto K = fit.K;
  std::vector<std::size_t> size(K, 0), first(K, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ++size[raw[i]];
    first[raw[i]] = std::min(first[raw[i]], i);
  }
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<std::size_t> new_of(K);
  for (std::size_t q = 0; q < K; ++q) new_of[order[q]] = q;

  const auto k = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd tau(fit.memberships.tau.rows(), k);
  Eigen::VectorXd theta(k);
  Eigen::MatrixXd C(k, k);
  for (std::size_t q = 0; q < K; ++q) {
    const auto nq = static_cast<Eigen::Index>(q), oq = static_cast<Eigen::Index>(order[q]);
    tau.col(nq) = fit.memberships.tau.col(oq);
    theta[nq] = fit.params.theta[oq];
    for (std::size_t l = 0; l < K; ++l) {
      C(nq, static_cast<Eigen::Index>(l)) = fit.params.C(oq, static_cast<Eigen::Index>(order[l]));
    }
  }
  fit.memberships.tau = std::move(tau);
  fit.params.theta = std::move(theta);
  fit.params.C = std::move(C);
  fit.labels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) fit.labels[i] = new_of[raw[i]];
}

struct FitOptions {
  std::size_t restarts{20};
  std::uint64_t seed{0};
  double tol{1e-6};  // relative ELBO change
  std::size_t max_iter{200};
  double inner_tol{1e-8};
  std::size_t inner_max{100};
};

/// Variational EM from one spectral and (restarts - 1) random starts; keeps
/// the highest final ELBO (ties to the smaller restart seed), canonicalizes the
/// labels and scores the result by ICL. Throws NumericalError if the ELBO
/// decreases by more than kElboSlack between iterations.
inline SbmFit fit(const Eigen::MatrixXd& Y, std::size_t K, const FitOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(Y.rows());
  if (K < 1 || K >= n) {
    throw ConfigError("sbm: class count must satisfy 1 <= K < n (K=" + std::to_string(K) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (opt.restarts < 1) throw ConfigError("sbm: restarts must be >= 1");

  std::optional<SbmFit> best;
  std::vector<std::string> warnings;
  std::size_t used = 0;
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    const auto seed = derive_seed(opt.seed, "sbm-restart", r);
    Eigen::MatrixXd tau = r == 0 ? spectral_init(Y, K, seed) : random_init(n, K, seed);
    SbmParams params = m_step(Y, tau);
    SbmFit cur;
    cur.K = K;
    bool dead = params.theta.minCoeff() < kDeadClass;
    if (!dead) cur.elbo_trace.push_back(elbo(Y, tau, params));
    for (std::size_t it = 0; !dead && it < opt.max_iter; ++it) {
      tau = e_step(Y, params, std::move(tau), opt.inner_tol, opt.inner_max).tau;
      params = m_step(Y, tau);
      if (params.theta.minCoeff() < kDeadClass) {
        dead = true;
        break;
      }
      const double value = elbo(Y, tau, params);
      const double prev = cur.elbo_trace.back();
      if (value < prev - kElboSlack) {
        throw NumericalError("sbm: ELBO decreased from " + csv::format(prev) + " to " +
                             csv::format(value));
      }
      cur.elbo_trace.push_back(value);
      if (std::abs(value - prev) <= opt.tol * std::abs(prev)) {
        cur.converged = true;
        break;
      }
    }
    if (dead) {
      warnings.push_back("restart " + std::to_string(r) + " abandoned: empty class");
      continue;
    }
    ++used;
    cur.params = std::move(params);
    cur.memberships.tau = std::move(tau);
    cur.best_restart = r;
    cur.best_restart_seed = seed;
    const double value = cur.elbo_trace.back();
    if (!best || value > best->elbo_trace.back() ||
        (value == best->elbo_trace.back() && seed < best->best_restart_seed)) {
      best = std::move(cur);
    }
  }
  if (!best) throw NumericalError("sbm: every restart collapsed to an empty class at K=" + std::to_string(K));
  best->restarts_used = used;
  best->warnings = std::move(warnings);
  canonicalize(*best);
  best->icl = icl(Y, best->labels, K);
  return *std::move(best);
}

inline SbmFit fit(const TradeNetwork& net, std::size_t K, const FitOptions& opt = {}) {
  return fit(adjacency_matrix(net), K, opt);
}

struct ClassSelection {
  std::vector<std::size_t> K;
  std::vector<double> icl;
  std::size_t recommended{1};  // ICL argmax, ties to the smaller K
  std::vector<SbmFit> fits;
};

/// Fits every K in k_range, each from its own derived seed.
inline ClassSelection select_classes(const Eigen::MatrixXd& Y, std::vector<std::size_t> k_range,
                                     const FitOptions& opt = {}) {
  if (k_range.empty()) throw ConfigError("sbm: empty class range");
  std::sort(k_range.begin(), k_range.end());
  k_range.erase(std::unique(k_range.begin(), k_range.end()), k_range.end());
  ClassSelection sel;
  for (auto K : k_range) {
    auto o = opt;
    o.seed = derive_seed(opt.seed, "sbm-classes", K);
    sel.fits.push_back(fit(Y, K, o));
    sel.K.push_back(K);
    sel.icl.push_back(sel.fits.back().icl);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.icl.size(); ++i) {
    if (sel.icl[i] > sel.icl[best]) best = i;
  }
  sel.recommended = sel.K[best];
  return sel;
}

inline ClassSelection select_classes(const TradeNetwork& net, std::vector<std::size_t> k_range,
                                     const FitOptions& opt = {}) {
  return select_classes(adjacency_matrix(net), std::move(k_range), opt);
}

/// Node order for a block-sorted adjacency plot: by class, then descending
/// out-strength, then index.
inline std::vector<NodeIndex> ordered_adjacency(const TradeNetwork& net, const SbmFit& fit) {
  const auto n = net.node_count();
  if (fit.labels.size() != n) throw DataError("sbm fit does not match the network");
  std::vector<double> strength(n, 0.0);
  for (const auto& e : net.edges()) strength[e.source] += e.weight;
  std::vector<NodeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), NodeIndex{0});
  std::sort(perm.begin(), perm.end(), [&](NodeIndex a, NodeIndex b) {
    if (fit.labels[a] != fit.labels[b]) return fit.labels[a] < fit.labels[b];
    if (strength[a] != strength[b]) return strength[a] > strength[b];
    return a < b;
  });
  return perm;
}

/// Hubert-Arabie adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw ConfigError("ARI: labelings differ in length");
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : joint) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double maxi = 0.5 * (sa + sb);
  if (maxi == expected) return 1.0;
  return (index - expected) / (maxi - expected);
}

// ---------------------------------------------------------------------------
// Output. Classes are numbered from 1 in every file.

inline nlohmann::ordered_json to_json(const SbmFit& f, const TradeNetwork& net) {
  nlohmann::ordered_json j;
  j["K"] = f.K;
  j["icl"] = f.icl;
  j["elbo"] = f.elbo_trace.empty() ? 0.0 : f.elbo_trace.back();
  j["converged"] = f.converged;
  j["restarts_used"] = f.restarts_used;
  j["best_restart"] = f.best_restart;
  j["best_restart_seed"] = f.best_restart_seed;
  j["theta"] = std::vector<double>(f.params.theta.data(), f.params.theta.data() + f.params.theta.size());
  auto C = nlohmann::ordered_json::array();
  for (Eigen::Index q = 0; q < f.params.C.rows(); ++q) {
    std::vector<double> row;
    for (Eigen::Index l = 0; l < f.params.C.cols(); ++l) row.push_back(f.params.C(q, l));
    C.push_back(row);
  }
  j["C"] = C;
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  std::vector<std::vector<std::string>> members(f.K);
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    labels[net.labels()[i]] = f.labels[i] + 1;
    members[f.labels[i]].push_back(net.labels()[i]);
  }
  j["labels"] = labels;
  j["classes"] = members;
  j["elbo_trace"] = f.elbo_trace;
  j["warnings"] = f.warnings;
  return j;
}

inline void write_classes_csv(std::ostream& out, const SbmFit& f, const TradeNetwork& net) {
  out << "iso3,class\n";
  for (std::size_t i = 0; i < f.labels.size(); ++i) out << net.labels()[i] << ',' << f.labels[i] + 1 << '\n';
}

inline void write_icl_csv(std::ostream& out, const ClassSelection& s) {
  out << "K,ICL\n";
  for (std::size_t i = 0; i < s.K.size(); ++i) out << s.K[i] << ',' << csv::format(s.icl[i]) << '\n';
}

inline void write_order_csv(std::ostream& out, const std::vector<NodeIndex>& perm, const SbmFit& f,
                            const TradeNetwork& net) {
  out << "position,iso3,class\n";
  for (std::size_t p = 0; p < perm.size(); ++p) {
    out << p << ',' << net.labels()[perm[p]] << ',' << f.labels[perm[p]] + 1 << '\n';
  }
}

}  // namespace tradenet::sbm
