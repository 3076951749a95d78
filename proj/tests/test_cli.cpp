#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kStages{"ingest", "stats", "connectivity", "ergm", "sbm", "report"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

/// Fresh copy of the toy fixture in a scratch directory.
class Workspace {
 public:
  explicit Workspace(const std::string& name)
      : root_(fs::temp_directory_path() / ("tradenet_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(root_);
    fs::create_directories(root_);
    for (const auto& e : fs::directory_iterator(fs::path(TRADENET_TEST_DATA) / "toy")) {
      fs::copy(e.path(), root_ / e.path().filename());
    }
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  const fs::path& root() const { return root_; }
  fs::path config() const { return root_ / "config.json"; }

  /// Runs the CLI; stderr goes to root/stderr.txt.
  int run(const std::string& args) const {
    const std::string cmd = std::string(TRADENET_CLI) + " --config " + config().string() + " " + args +
                            " > " + (root_ / "stdout.txt").string() + " 2> " + (root_ / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string err() const { return slurp(root_ / "stderr.txt"); }

  void run_all(const std::string& extra = "") const {
    for (const auto& s : kStages) ASSERT_EQ(run(extra + s), 0) << s << ": " << err();
  }

 private:
  fs::path root_;
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST(Cli, FullPipelineWritesEveryArtifact) {
  Workspace w("full");
  w.run_all();
  const auto out = w.root() / "out";
  for (const char* y : {"2018", "2020"}) {
    for (const char* f : {"network_edges.csv", "network_meta.json", "attributes_imputed.csv", "flow_summary.json",
                          "flow_summary.csv", "ingest_log.json", "structural_summary.json",
                          "structural_summary.csv", "connectivity_profile.csv", "connectivity.json",
                          "ergm_model.json", "ergm_fit.json", "ergm_fit.csv", "ergm_gof.json", "sbm_fit.json",
                          "sbm_classes.csv", "sbm_icl_curve.csv", "sbm_order.csv", "manifest_ingest.json",
                          "manifest_stats.json", "manifest_connectivity.json", "manifest_ergm.json",
                          "manifest_sbm.json"}) {
      EXPECT_TRUE(fs::exists(out / y / f)) << y << "/" << f;
    }
  }
  EXPECT_TRUE(fs::exists(out / "ergm_significance.csv"));
  EXPECT_TRUE(fs::exists(out / "report.md"));
  EXPECT_FALSE(fs::exists(out / ".tradenet.lock"));
}

TEST(Cli, IngestLogsUnknownCodesAndDroppedColumns) {
  Workspace w("ingest");
  ASSERT_EQ(w.run("ingest"), 0) << w.err();
  const auto log = nlohmann::json::parse(slurp(w.root() / "out/2018/ingest_log.json"));
  EXPECT_EQ(log["dropped_codes"], nlohmann::json::array({"EUN"}));
  EXPECT_EQ(log["dropped_rows"][0]["line"], 10);
  EXPECT_EQ(log["dropped_columns"][0]["column"], "tariff");
  EXPECT_EQ(log["nodes"], 5);
  EXPECT_EQ(log["edges"], 8);
  const auto attrs = slurp(w.root() / "out/2018/attributes_imputed.csv");
  EXPECT_EQ(attrs.find("tariff"), std::string::npos);
  EXPECT_EQ(attrs.find("NA"), std::string::npos);
}

TEST(Cli, StatsMatchHandCountsOnToy) {
  Workspace w("stats");
  ASSERT_EQ(w.run("ingest"), 0) << w.err();
  ASSERT_EQ(w.run("stats"), 0) << w.err();
  // 2018: 5 nodes, 8 edges, one mutual pair (CHN, USA), 7 connected pairs.
  const auto s = nlohmann::json::parse(slurp(w.root() / "out/2018/structural_summary.json"));
  EXPECT_EQ(s["nodes"], 5);
  EXPECT_EQ(s["edges"], 8);
  EXPECT_EQ(s["components"], 1);
  EXPECT_DOUBLE_EQ(s["density"].get<double>(), 0.4);
  EXPECT_DOUBLE_EQ(s["edge_reciprocity"].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(s["dyad_reciprocity"].get<double>(), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(s["mean_out_degree"].get<double>(), 1.6);
  // Weights are reported in millions: (480+120+130+110+64+8.5+29+9.3)/8.
  EXPECT_NEAR(s["mean_weight"].get<double>(), 950.8 / 8, 1e-9);
}

TEST(Cli, MissingUpstreamArtifactNamesTheStage) {
  Workspace w("missing");
  EXPECT_EQ(w.run("stats"), 3);
  EXPECT_NE(w.err().find("ingest"), std::string::npos) << w.err();
  ASSERT_EQ(w.run("ingest"), 0);
  EXPECT_EQ(w.run("report"), 3);
  EXPECT_NE(w.err().find("stats"), std::string::npos) << w.err();
}

TEST(Cli, ConfigErrorsExitTwo) {
  Workspace w("config");
  EXPECT_EQ(w.run("bogus"), 2);
  EXPECT_EQ(w.run(""), 2);
  auto cfg = nlohmann::json::parse(slurp(w.config()));
  cfg["unknown_key"] = 1;
  spit(w.config(), cfg.dump());
  EXPECT_EQ(w.run("ingest"), 2);
  cfg.erase("unknown_key");
  cfg["sbm"]["k_min"] = 5;
  cfg["sbm"]["k_max"] = 2;
  spit(w.config(), cfg.dump());
  EXPECT_EQ(w.run("ingest"), 2);
  cfg["sbm"]["k_min"] = 1;
  cfg["years"] = {2018, 2018};
  spit(w.config(), cfg.dump());
  EXPECT_EQ(w.run("ingest"), 2);
  cfg["years"] = {1990};
  spit(w.config(), cfg.dump());
  EXPECT_EQ(w.run("ingest"), 2);
  EXPECT_EQ(w.run("ingest --seed notanumber"), 2);
}

TEST(Cli, MissingInputFileIsAConfigError) {
  Workspace w("noinput");
  fs::remove(w.root() / "flows.csv");
  EXPECT_EQ(w.run("ingest"), 2);
  EXPECT_NE(w.err().find("flows.csv"), std::string::npos);
}

TEST(Cli, MalformedInputExitsThree) {
  Workspace w("badinput");
  spit(w.root() / "flows.csv", "reporter_iso3,partner_iso3,year,export_value_kusd\nCHN,USA,2018,-5\n");
  EXPECT_EQ(w.run("ingest"), 3);
}

TEST(Cli, RerunsAreByteIdentical) {
  Workspace a("det_a"), b("det_b");
  a.run_all();
  b.run_all();
  const auto sa = snapshot(a.root() / "out"), sb = snapshot(b.root() / "out");
  ASSERT_EQ(sa.size(), sb.size());
  for (const auto& [k, v] : sa) EXPECT_EQ(v, sb.at(k)) << k;
  // Same again in place, and the report alone.
  a.run_all();
  EXPECT_EQ(snapshot(a.root() / "out"), sa);
  ASSERT_EQ(a.run("report"), 0);
  EXPECT_EQ(slurp(a.root() / "out/report.md"), sa.at("report.md"));
}

TEST(Cli, SeedOverrideChangesOnlySeededArtifacts) {
  Workspace w("seed");
  w.run_all();
  const auto base = snapshot(w.root() / "out");
  w.run_all("--seed 7 ");
  const auto other = snapshot(w.root() / "out");
  EXPECT_EQ(base.at("2018/structural_summary.json"), other.at("2018/structural_summary.json"));
  EXPECT_EQ(base.at("2018/ergm_fit.json"), other.at("2018/ergm_fit.json"));
  EXPECT_NE(base.at("2018/manifest_ergm.json"), other.at("2018/manifest_ergm.json"));
  EXPECT_NE(base.at("2018/ergm_gof.json"), other.at("2018/ergm_gof.json"));
}

TEST(Cli, LockedOutputDirectoryIsRefused) {
  Workspace w("lock");
  fs::create_directories(w.root() / "out");
  spit(w.root() / "out/.tradenet.lock", "");
  EXPECT_EQ(w.run("ingest"), 2);
  EXPECT_NE(w.err().find("locked"), std::string::npos);
  fs::remove(w.root() / "out/.tradenet.lock");
  EXPECT_EQ(w.run("ingest"), 0);
}

TEST(Cli, OutOverride) {
  Workspace w("outdir");
  ASSERT_EQ(w.run("--out " + (w.root() / "elsewhere").string() + " ingest"), 0) << w.err();
  EXPECT_TRUE(fs::exists(w.root() / "elsewhere/2018/network_edges.csv"));
  EXPECT_FALSE(fs::exists(w.root() / "out"));
}

TEST(Cli, SbmRecommendsPlantedBlocks) {
  Workspace w("blocks");
  std::mt19937_64 rng(11);
  std::vector<std::size_t> z;
  const auto g = oracle::planted_blocks(rng, 30, 2, 0.7, 0.03, &z);
  std::ostringstream iso, flows, attrs;
  flows << "reporter_iso3,partner_iso3,year,export_value_kusd\n";
  attrs << "iso3,year,gdp_pc\n";
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::string code{'A', static_cast<char>('A' + i / 26), static_cast<char>('A' + i % 26)};
    iso << code << "\n";
    attrs << code << ",2018," << 1000 + 10 * i << "\n";
  }
  auto code = [](std::size_t i) { return std::string{'A', static_cast<char>('A' + i / 26), static_cast<char>('A' + i % 26)}; };
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      if (g.y[i][j]) flows << code(i) << "," << code(j) << ",2018,1000\n";
    }
  }
  spit(w.root() / "iso3.txt", iso.str());
  spit(w.root() / "flows.csv", flows.str());
  spit(w.root() / "attributes.csv", attrs.str());
  nlohmann::json cfg = {{"edges", "flows.csv"},       {"attributes", "attributes.csv"},
                        {"iso_universe", "iso3.txt"}, {"year", 2018},
                        {"sbm", {{"k_min", 1}, {"k_max", 3}, {"restarts", 5}}},
                        {"seed", 5}};
  spit(w.config(), cfg.dump());
  ASSERT_EQ(w.run("ingest"), 0) << w.err();
  ASSERT_EQ(w.run("sbm"), 0) << w.err();
  const auto fit = nlohmann::json::parse(slurp(w.root() / "out/2018/sbm_fit.json"));
  EXPECT_EQ(fit["recommended_k"], 2);
  EXPECT_EQ(fit["K"], 2);
  const auto classes = slurp(w.root() / "out/2018/sbm_classes.csv");
  EXPECT_EQ(classes.rfind("iso3,class\n", 0), 0u);
  EXPECT_EQ(classes.find(",0\n"), std::string::npos);
  const auto curve = slurp(w.root() / "out/2018/sbm_icl_curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 4);
}
