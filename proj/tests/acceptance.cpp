// Acceptance checks. One line per criterion: PASS, FAIL or SKIP, with the
// measured quantity and wall time. Exit status is nonzero if anything fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tradenet/pipeline.hpp"
#include "tradenet/tradenet.hpp"

namespace fs = std::filesystem;
using namespace tradenet;
using ergm::ErgmModel;
using ergm::TermKind;
using ergm::TermSpec;

namespace {

struct Outcome {
  enum { pass, fail, skip } status;
  std::string detail;
};

int failures = 0;

void check(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Outcome::fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.status == Outcome::pass && limit_s > 0 && secs > limit_s) {
    o = {Outcome::fail, o.detail + "; over time limit"};
  }
  const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::fail ? "FAIL" : "SKIP";
  if (o.status == Outcome::fail) ++failures;
  std::printf("%s  %-34s %s (%.2fs", tag, name.c_str(), o.detail.c_str(), secs);
  if (limit_s > 0) std::printf(" / limit %.0fs", limit_s);
  std::printf(")\n");
  std::fflush(stdout);
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool same(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= tol;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? oracle::kNaN : static_cast<double>(num) / static_cast<double>(den);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- netstats -------------------------------------------------------------

Outcome netstats_oracle() {
  std::mt19937_64 rng(2024);
  int bad = 0;
  const int graphs = 1000;
  for (int t = 0; t < graphs; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto g = oracle::random_digraph(rng, n, 0.05 + 0.9 * ((t / 7) % 10) / 9.0, 0, 1e6);
    const auto s = summarize(g.network());
    const auto o = oracle::summarize(g);
    const bool ok =
        s.nodes == o.nodes && s.edges == o.edges && s.components == o.components &&
        s.mean_out_degree == ratio(o.edges, o.nodes) && s.mean_in_degree == ratio(o.edges, o.nodes) &&
        s.density == ratio(o.edges, o.nodes * (o.nodes - 1)) &&
        same(s.edge_reciprocity, ratio(o.reciprocated_edges, o.edges), 0) &&
        same(s.dyad_reciprocity, ratio(o.mutual_dyads, o.mutual_dyads + o.asym_dyads), 0) &&
        same(s.transitivity, ratio(o.closed_triples, o.triples), 0) && same(s.cv_out_degree, o.cv_out, 1e-12) &&
        same(s.cv_in_degree, o.cv_in, 1e-12) &&
        same(s.mean_weight, o.mean_weight, 1e-12 * std::max(1.0, o.mean_weight)) &&
        same(s.cv_weight, o.cv_weight, 1e-12) && same(s.degree_correlation, o.degree_correlation, 1e-12) &&
        same(s.assortativity, o.assortativity, 1e-12);
    bad += !ok;
  }
  return verdict(bad == 0, fmt("%.0f graphs, %.0f mismatches", graphs, bad));
}

Outcome arithmetic_186() {
  std::vector<Edge> e;
  for (NodeIndex i = 0; i < 186 && e.size() < 16357; ++i) {
    for (NodeIndex j = 0; j < 186 && e.size() < 16357; ++j) {
      if (i != j) e.push_back({i, j, 1.0});
    }
  }
  const auto s = summarize(TradeNetwork::with_anonymous_nodes(186, std::move(e)));
  // Checked as stated. 16357 / 34410 = 0.4753560..., which truncates to
  // 0.4753 but is 5.6e-5 away from it, so no correct count can meet 1e-12.
  const double exact = 16357.0 / 34410.0;
  const bool ok = std::abs(s.density - 0.4753) <= 1e-12 && std::abs(s.mean_out_degree - 87.94) <= 0.005;
  return verdict(ok, fmt("density %.10f (exact ratio err %.1e, target 0.4753 +- 1e-12)", s.density,
                         std::abs(s.density - exact)) +
                         fmt(", mean out-degree %.4f", s.mean_out_degree));
}

// --- connectivity -----------------------------------------------------------

Outcome connectivity_monotone() {
  std::mt19937_64 rng(77);
  int violations = 0, zero_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_digraph(rng, 6 + t % 20, 0.05 + 0.3 * (t % 4) / 3.0, 1, 1e6);
    const auto net = g.network();
    if (net.edge_count() == 0) {
      --t;
      continue;
    }
    std::vector<double> grid{0.0};  // 0 plus 49 log points over the weight range
    for (int k = 0; k < 49; ++k) grid.push_back(std::pow(10.0, 6.1 * k / 48.0));
    const auto p = sweep(net, grid);
    violations += p.points.size() != 50;
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      violations += p.points[i].component_count < p.points[i - 1].component_count;
      violations += p.points[i].giant_size > p.points[i - 1].giant_size;
    }
    const auto full = oracle::closure_components(g.y);
    zero_mismatch += p.points[0].component_count != full.count || p.points[0].giant_size != full.giant;
  }
  return verdict(violations == 0 && zero_mismatch == 0,
                 fmt("100 graphs x 50 points, %.0f monotonicity violations, %.0f threshold-0 mismatches",
                     violations, zero_mismatch));
}

// --- ergm -------------------------------------------------------------------

AttributeTable attrs_of(std::size_t n, std::vector<AttributeColumn> cols) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("N" + std::to_string(i));
  AttributeTable t(ids);
  for (auto& c : cols) t.add_column(std::move(c));
  return t;
}

AttributeColumn column(std::string name, const std::vector<double>& v, bool categorical = false) {
  AttributeColumn c{std::move(name), categorical, {}};
  for (double x : v) c.cells.push_back(x);
  return c;
}

TermSpec term(TermKind k, std::string attr = "", std::optional<double> level = std::nullopt) {
  return TermSpec{k, std::move(attr), 0.0, level};
}

Outcome ergm_exactness() {
  std::mt19937_64 rng(5150);
  // Edges only: logit of density.
  double worst_edges = 0;
  for (int t = 0; t < 20; ++t) {
    const auto net = oracle::random_digraph(rng, 4 + t % 10, 0.1 + 0.04 * t).network();
    const double d = density(net);
    if (d <= 0 || d >= 1) continue;
    ErgmModel m;
    m.terms.push_back(term(TermKind::edges));
    const auto f = ergm::fit_mple(m, net, attrs_of(net.node_count(), {}));
    worst_edges = std::max(worst_edges, std::abs(f.terms[0].estimate - std::log(d / (1 - d))));
  }

  std::normal_distribution<double> g(0, 1);
  double worst_beta = 0, worst_ll = 0, worst_exact = 0;
  int fixtures = 0;
  for (int attempt = 0; fixtures < 20 && attempt < 500; ++attempt) {
    const std::size_t n = 5;
    std::vector<double> x(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::round(100 * g(rng)) / 10;
      z[i] = std::round(100 * g(rng)) / 10;
    }
    const auto net = oracle::random_digraph(rng, n, 0.45).network();
    ErgmModel model;
    model.terms = {term(TermKind::edges), term(TermKind::nodecov, "x"),
                   attempt % 2 ? term(TermKind::absdiff, "z") : term(TermKind::nodecov, "z")};
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    std::vector<int> yi;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        X.push_back({1.0, x[i] + x[j], attempt % 2 ? std::abs(z[i] - z[j]) : z[i] + z[j]});
        const bool e = net.has_edge(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j));
        y.push_back(e);
        yi.push_back(e);
      }
    }
    const auto want = oracle::newton_logit(X, y);
    if (!want.converged ||
        std::any_of(want.beta.begin(), want.beta.end(), [](double b) { return std::abs(b) > 15; })) {
      continue;  // (quasi-)separated draw; no finite MLE to compare
    }
    const auto fit = ergm::fit_mple(model, net, attrs_of(n, {column("x", x), column("z", z)}));
    ++fixtures;
    for (std::size_t h = 0; h < 3; ++h) worst_beta = std::max(worst_beta, std::abs(fit.terms[h].estimate - want.beta[h]));
    worst_ll = std::max(worst_ll, std::abs(fit.log_pseudo_likelihood - want.loglik));
    worst_exact = std::max(worst_exact, std::abs(fit.log_pseudo_likelihood -
                                                 oracle::enumerated_loglik(X, yi, fit.coefficients())));
  }
  const bool ok = worst_edges <= 1e-8 && fixtures == 20 && worst_beta <= 1e-6 && worst_ll <= 1e-10 &&
                  worst_exact <= 1e-10;
  return verdict(ok, fmt("edges-only err %.1e, coef err %.1e, exact loglik err %.1e", worst_edges, worst_beta,
                         std::max(worst_ll, worst_exact)) +
                         (fixtures == 20 ? "" : ", too few fixtures"));
}

Outcome ergm_sampler() {
  struct Setting {
    double edges, mutual, cov;
  };
  const Setting settings[3] = {{-0.5, 0.0, 0.0}, {-1.0, 2.0, 0.0}, {0.3, -0.8, 0.7}};
  const double cov[3] = {-1.0, 0.5, 1.5};
  const std::pair<NodeIndex, NodeIndex> dyad[6] = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  const auto attrs = attrs_of(3, {column("x", {cov[0], cov[1], cov[2]})});
  ErgmModel model;
  model.terms = {term(TermKind::edges), term(TermKind::mutual), term(TermKind::nodecov, "x")};
  const auto stats = ergm::resolve(model, attrs);
  double worst = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& s = settings[k];
    const auto exact = oracle::exact_three_node(s.edges, s.mutual, s.cov, cov);
    ergm::EdgeToggleSampler chain(stats, {s.edges, s.mutual, s.cov}, TradeNetwork::with_anonymous_nodes(3, {}),
                                  derive_seed(99, "acceptance-sampler", k));
    std::vector<double> count(64, 0);
    const std::size_t steps = 1000000;
    for (std::size_t t = 0; t < steps; ++t) {
      chain.step();
      int state = 0;
      for (int d = 0; d < 6; ++d) state |= chain.has_edge(dyad[d].first, dyad[d].second) << d;
      count[static_cast<std::size_t>(state)] += 1;
    }
    double tv = 0;
    for (std::size_t g = 0; g < 64; ++g) tv += 0.5 * std::abs(count[g] / steps - exact[g]);
    worst = std::max(worst, tv);
  }
  return verdict(worst <= 0.02, fmt("worst total variation %.4f over 3 settings, 1e6 steps each", worst));
}

// --- sbm --------------------------------------------------------------------

Eigen::MatrixXd to_matrix(const oracle::Digraph& g) {
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::MatrixXd Y(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) Y(i, j) = g.y[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return Y;
}

struct SbmRun {
  int ari_ok = 0, icl_ok = 0;
  std::size_t fits = 0;
  double worst_drop = 0;
  std::string error;
};

SbmRun& sbm_recovery_run() {
  static SbmRun run = [] {
    SbmRun r;
    for (std::uint64_t s = 0; s < 10; ++s) {
      std::mt19937_64 rng(1000 + s);
      std::vector<std::size_t> z;
      const auto Y = to_matrix(oracle::planted_blocks(rng, 120, 3, 0.30, 0.05, &z));
      sbm::FitOptions opt;
      opt.restarts = 20;
      opt.seed = s;
      const auto sel = sbm::select_classes(Y, {1, 2, 3, 4, 5, 6}, opt);
      for (const auto& f : sel.fits) {
        ++r.fits;
        for (std::size_t k = 1; k < f.elbo_trace.size(); ++k) {
          r.worst_drop = std::max(r.worst_drop, f.elbo_trace[k - 1] - f.elbo_trace[k]);
        }
      }
      r.ari_ok += sbm::adjusted_rand_index(sel.fits[2].labels, z) >= 0.95;
      r.icl_ok += sel.recommended == 3;
    }
    return r;
  }();
  return run;
}

Outcome sbm_recovery() {
  const auto& r = sbm_recovery_run();
  return verdict(r.ari_ok >= 9 && r.icl_ok >= 8,
                 fmt("ARI >= 0.95 in %.0f/10 seeds, ICL argmax 3 in %.0f/10", r.ari_ok, r.icl_ok));
}

Outcome sbm_monotone() {
  // Fits from the recovery run plus a spread of small random graphs; fit()
  // itself throws if a step loses more than the slack.
  auto r = sbm_recovery_run();
  std::mt19937_64 rng(31337);
  for (int t = 0; t < 40; ++t) {
    const auto Y = to_matrix(oracle::random_digraph(rng, 10 + t, 0.1 + 0.02 * t));
    sbm::FitOptions opt;
    opt.restarts = 5;
    opt.seed = static_cast<std::uint64_t>(t);
    const auto f = sbm::fit(Y, 2 + t % 4, opt);
    ++r.fits;
    for (std::size_t k = 1; k < f.elbo_trace.size(); ++k) {
      r.worst_drop = std::max(r.worst_drop, f.elbo_trace[k - 1] - f.elbo_trace[k]);
    }
  }
  return verdict(r.worst_drop <= 1e-9, fmt("%.0f fits, largest single-step ELBO drop %.2e", r.fits, r.worst_drop));
}

// --- knn --------------------------------------------------------------------

AttributeTable random_table(std::mt19937_64& rng, std::size_t rows, std::size_t numeric_cols, bool categorical,
                            double p_missing) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<AttributeColumn> cols;
  for (std::size_t c = 0; c < numeric_cols; ++c) {
    AttributeColumn col{"x" + std::to_string(c), false, {}};
    for (std::size_t r = 0; r < rows; ++r) col.cells.push_back(std::round(100.0 * std::pow(10.0, c) * g(rng)) / 100.0);
    cols.push_back(col);
  }
  if (categorical) {
    AttributeColumn col{"flag", true, {}};
    for (std::size_t r = 0; r < rows; ++r) col.cells.push_back(u(rng) < 0.4 ? 1.0 : 0.0);
    cols.push_back(col);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto keep = static_cast<std::size_t>(u(rng) * static_cast<double>(numeric_cols));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c != keep && u(rng) < p_missing) cols[c].cells[r].reset();
    }
  }
  return attrs_of(rows, std::move(cols));
}

Outcome knn_oracle() {
  std::mt19937_64 rng(8080);
  int tables = 0, mismatches = 0, changed = 0;
  for (int t = 0; tables < 50; ++t) {
    const auto table = random_table(rng, 5 + t % 10, 2 + t % 3, t % 2 == 0, 0.2);
    const std::size_t k = 1 + t % 4;
    const auto want = oracle::knn_impute(table, k);
    if (!want.complete()) continue;  // some row has no donor for a column
    ++tables;
    const auto got = knn_impute(table, k);
    mismatches += !(got == want);
    for (std::size_t c = 0; c < table.cols(); ++c) {
      for (std::size_t r = 0; r < table.rows(); ++r) {
        const auto& before = table.columns()[c].cells[r];
        changed += before && got.columns()[c].cells[r] != before;
      }
    }
  }

  // CV selection against a from-scratch recomputation of every fold.
  std::normal_distribution<double> noise(0, 1);
  std::vector<AttributeColumn> cols(3);
  for (std::size_t c = 0; c < 3; ++c) cols[c] = AttributeColumn{"v" + std::to_string(c), false, {}};
  const double centres[3][3] = {{0, 0, 0}, {7, -3, 2}, {-5, 6, 8}};
  for (int r = 0; r < 60; ++r) {
    for (std::size_t c = 0; c < 3; ++c) cols[c].cells.push_back(centres[r % 3][c] + noise(rng));
  }
  cols[0].cells[7].reset();
  cols[2].cells[19].reset();
  const auto t = attrs_of(60, cols);
  const std::vector<std::size_t> grid{1, 2, 3, 5, 10};
  const std::uint64_t seed = 4242;
  const auto sel = select_k_by_cv(t, grid, 5, seed);
  const auto masks = cv_fold_masks(t, 5, seed);
  double worst = 0;
  std::vector<double> want;
  for (std::size_t k : grid) {
    double total = 0;
    for (const auto& mask : masks) {
      auto hidden = t;
      for (const auto& cell : mask) hidden.columns()[cell.col].cells[cell.row].reset();
      const auto imputed = oracle::knn_impute(hidden, k);
      double sse = 0;
      for (const auto& cell : mask) {
        const double d = (*imputed.columns()[cell.col].cells[cell.row] - *t.columns()[cell.col].cells[cell.row]) /
                         oracle::scale_of(t.columns()[cell.col]).sd;
        sse += d * d;
      }
      total += sse / static_cast<double>(mask.size());
    }
    want.push_back(total / static_cast<double>(masks.size()));
  }
  for (std::size_t g = 0; g < grid.size(); ++g) worst = std::max(worst, std::abs(sel.mean_mse[g] - want[g]));
  const auto best = grid[static_cast<std::size_t>(std::min_element(want.begin(), want.end()) - want.begin())];
  const bool ok = mismatches == 0 && changed == 0 && worst <= 1e-12 && sel.k == best;
  return verdict(ok, fmt("50 tables, %.0f mismatches, %.0f observed cells changed", mismatches, changed) +
                         fmt("; CV fold-MSE err %.1e, k=%.0f", worst, static_cast<double>(sel.k)));
}

// --- cli --------------------------------------------------------------------

int run_cli(const fs::path& config, const std::string& args) {
  const std::string cmd = std::string(TRADENET_CLI) + " --config " + config.string() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

Outcome cli_determinism() {
  const auto root = fs::temp_directory_path() / ("tradenet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  for (const auto& e : fs::directory_iterator(fs::path(TRADENET_TEST_DATA) / "toy")) {
    fs::copy(e.path(), root / e.path().filename());
  }
  const std::vector<std::string> stages{"ingest", "stats", "connectivity", "ergm", "sbm", "report"};
  std::vector<std::map<std::string, std::string>> snaps;
  int rc_bad = 0;
  for (const char* out : {"out_a", "out_b"}) {
    for (const auto& s : stages) rc_bad += run_cli(root / "config.json", "--out " + (root / out).string() + " " + s) != 0;
    snaps.push_back(snapshot(root / out));
  }
  // Each command rerun in place.
  std::size_t diffs = 0;
  for (const auto& s : stages) {
    rc_bad += run_cli(root / "config.json", "--out " + (root / "out_a").string() + " " + s) != 0;
    const auto again = snapshot(root / "out_a");
    for (const auto& [k, v] : snaps[0]) diffs += !again.count(k) || again.at(k) != v;
  }
  for (const auto& [k, v] : snaps[0]) diffs += !snaps[1].count(k) || snaps[1].at(k) != v;
  const auto files = snaps[0].size();
  fs::remove_all(root);
  return verdict(rc_bad == 0 && diffs == 0 && files > 0,
                 fmt("%.0f artifacts, %.0f differing, %.0f failed commands", files, diffs, rc_bad));
}

// --- wits -------------------------------------------------------------------

Outcome wits_reproduction() {
  const char* cfg_path = std::getenv("TRADENET_WITS_CONFIG");
  if (!cfg_path || !*cfg_path) return {Outcome::skip, "set TRADENET_WITS_CONFIG to a config over WITS 2018 flows"};
  auto cfg = pipeline::load_config(cfg_path);
  cfg.years = {2018};
  cfg.output_dir = fs::temp_directory_path() / ("tradenet_wits_" + std::to_string(::getpid()));
  fs::remove_all(cfg.output_dir);
  pipeline::cmd_ingest(cfg);
  pipeline::cmd_stats(cfg);
  const auto flow = nlohmann::json::parse(slurp(cfg.year_dir(2018) / "flow_summary.json"));
  const auto s = nlohmann::json::parse(slurp(cfg.year_dir(2018) / "structural_summary.json"));
  fs::remove_all(cfg.output_dir);
  const double mean = flow["mean"].get<double>(), median = flow["median"].get<double>();
  const double dens = s["density"].get<double>(), er = s["edge_reciprocity"].get<double>(),
               dr = s["dyad_reciprocity"].get<double>();
  const bool ok = std::abs(mean - 905674) <= 0.5 && std::abs(median - 7054) <= 0.5 && std::abs(dens - 0.47) <= 0.005 &&
                  std::abs(er - 0.62) <= 0.005 && std::abs(dr - 0.45) <= 0.005;
  return verdict(ok, fmt("mean %.1f, median %.1f", mean, median) +
                         fmt(", density %.4f, reciprocity %.4f/%.4f", dens, er, dr));
}

}  // namespace

int main() {
  check("netstats oracle equivalence", 60, netstats_oracle);
  check("186-node arithmetic identities", 1, arithmetic_186);
  check("connectivity monotonicity", 30, connectivity_monotone);
  check("ergm exactness", 20, ergm_exactness);
  check("ergm sampler correctness", 60, ergm_sampler);
  check("sbm recovery", 300, sbm_recovery);
  check("sbm monotone elbo", 0, sbm_monotone);
  check("knn imputer oracle", 0, knn_oracle);
  check("cli determinism", 0, cli_determinism);
  check("wits 2018 reproduction", 0, wits_reproduction);
  std::printf("%d failing\n", failures);
  return failures ? 1 : 0;
}
