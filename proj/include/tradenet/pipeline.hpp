#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "tradenet/connectivity.hpp"
#include "tradenet/ergm.hpp"
#include "tradenet/ingest.hpp"
#include "tradenet/netstats.hpp"
#include "tradenet/sbm.hpp"

namespace tradenet::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// An upstream stage's artifact is absent.
class MissingArtifact : public DataError {
 public:
  MissingArtifact(const std::string& stage, const fs::path& file)
      : DataError("missing artifact " + file.string() + "; run the '" + stage + "' stage first") {}
};

struct KnnConfig {
  std::optional<std::size_t> k{1};  // nullopt selects k by cross-validation
  std::vector<std::size_t> grid{1, 2, 3, 5, 10};
  std::size_t folds{5};
  double mask_frac{0.10};
};

struct ConnectivityConfig {
  std::size_t points{100};
  FlowMode mode{FlowMode::gross};
};

struct ErgmConfig {
  std::optional<fs::path> model;  // default: edges + nodecov + nodefactor
  std::size_t gof_replicates{20};
  std::size_t gof_sweeps{10};
};

struct SbmConfig {
  std::size_t k_min{1};
  std::size_t k_max{12};
  std::size_t restarts{20};
  std::optional<std::size_t> selected_k;  // override of the ICL argmax
};

struct PipelineConfig {
  fs::path edges;
  fs::path attributes;
  fs::path iso_universe;
  std::vector<int> years;
  double max_missing_frac{0.30};
  std::optional<std::vector<std::string>> categorical;  // unset: "landlocked" when present
  KnnConfig knn;
  ConnectivityConfig connectivity;
  ErgmConfig ergm;
  SbmConfig sbm;
  fs::path output_dir{"out"};
  std::uint64_t seed{0};

  fs::path year_dir(int year) const { return output_dir / std::to_string(year); }
};

// ---------------------------------------------------------------------------
// Config

namespace detail {

template <class T>
T get_field(const nlohmann::json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: invalid value for '" + where + key + "'");
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("config: unknown key '" + where + k + "'");
  }
}

}  // namespace detail

/// Parses a config object; relative paths resolve against `base_dir`.
inline PipelineConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
  using detail::get_field;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::reject_unknown(j, {"edges", "attributes", "iso_universe", "year", "years",
                             "max_missing_frac", "categorical", "knn", "connectivity", "ergm",
                             "sbm", "output_dir", "seed"}, "");
  PipelineConfig c;
  auto path_of = [&](const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
    fs::path p = get_field<std::string>(j, key, "");
    return p.is_absolute() ? p : base_dir / p;
  };
  c.edges = path_of("edges");
  c.attributes = path_of("attributes");
  c.iso_universe = path_of("iso_universe");
  if (j.contains("years")) c.years = get_field<std::vector<int>>(j, "years", "");
  if (j.contains("year")) c.years.push_back(get_field<int>(j, "year", ""));
  if (c.years.empty()) throw ConfigError("config: set 'year' or 'years'");
  std::set<int> uniq(c.years.begin(), c.years.end());
  if (uniq.size() != c.years.size()) throw ConfigError("config: duplicate years");
  if (j.contains("max_missing_frac")) c.max_missing_frac = get_field<double>(j, "max_missing_frac", "");
  if (!(c.max_missing_frac >= 0.0 && c.max_missing_frac <= 1.0)) {
    throw ConfigError("config: max_missing_frac must lie in [0, 1]");
  }
  if (j.contains("categorical")) c.categorical = get_field<std::vector<std::string>>(j, "categorical", "");
  if (j.contains("knn")) {
    const auto& k = j["knn"];
    detail::reject_unknown(k, {"k", "grid", "folds", "mask_frac"}, "knn.");
    if (k.contains("k")) {
      if (k["k"].is_string()) {
        if (k["k"] != "cv") throw ConfigError("config: knn.k must be a positive integer or \"cv\"");
        c.knn.k.reset();
      } else {
        const auto v = get_field<long long>(k, "k", "knn.");
        if (v < 1) throw ConfigError("config: knn.k must be >= 1");
        c.knn.k = static_cast<std::size_t>(v);
      }
    }
    if (k.contains("grid")) c.knn.grid = get_field<std::vector<std::size_t>>(k, "grid", "knn.");
    if (k.contains("folds")) c.knn.folds = get_field<std::size_t>(k, "folds", "knn.");
    if (k.contains("mask_frac")) c.knn.mask_frac = get_field<double>(k, "mask_frac", "knn.");
  }
  if (j.contains("connectivity")) {
    const auto& k = j["connectivity"];
    detail::reject_unknown(k, {"points", "mode"}, "connectivity.");
    if (k.contains("points")) c.connectivity.points = get_field<std::size_t>(k, "points", "connectivity.");
    if (k.contains("mode")) {
      const auto m = get_field<std::string>(k, "mode", "connectivity.");
      if (m == "gross") c.connectivity.mode = FlowMode::gross;
      else if (m == "net") c.connectivity.mode = FlowMode::net;
      else throw ConfigError("config: connectivity.mode must be \"gross\" or \"net\"");
    }
  }
  if (j.contains("ergm")) {
    const auto& k = j["ergm"];
    detail::reject_unknown(k, {"model", "gof_replicates", "gof_sweeps"}, "ergm.");
    if (k.contains("model")) {
      fs::path p = get_field<std::string>(k, "model", "ergm.");
      c.ergm.model = p.is_absolute() ? p : base_dir / p;
    }
    if (k.contains("gof_replicates")) c.ergm.gof_replicates = get_field<std::size_t>(k, "gof_replicates", "ergm.");
    if (k.contains("gof_sweeps")) c.ergm.gof_sweeps = get_field<std::size_t>(k, "gof_sweeps", "ergm.");
  }
  if (j.contains("sbm")) {
    const auto& k = j["sbm"];
    detail::reject_unknown(k, {"k_min", "k_max", "restarts", "selected_k"}, "sbm.");
    if (k.contains("k_min")) c.sbm.k_min = get_field<std::size_t>(k, "k_min", "sbm.");
    if (k.contains("k_max")) c.sbm.k_max = get_field<std::size_t>(k, "k_max", "sbm.");
    if (k.contains("restarts")) c.sbm.restarts = get_field<std::size_t>(k, "restarts", "sbm.");
    if (k.contains("selected_k")) c.sbm.selected_k = get_field<std::size_t>(k, "selected_k", "sbm.");
    if (c.sbm.k_min < 1 || c.sbm.k_max < c.sbm.k_min) throw ConfigError("config: need 1 <= sbm.k_min <= sbm.k_max");
    if (c.sbm.restarts < 1) throw ConfigError("config: sbm.restarts must be >= 1");
  }
  if (j.contains("output_dir")) {
    fs::path p = get_field<std::string>(j, "output_dir", "");
    c.output_dir = p.is_absolute() ? p : base_dir / p;
  } else {
    c.output_dir = base_dir / "out";
  }
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", "");
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

/// Checks that the input files referenced by the config exist.
inline void validate_inputs(const PipelineConfig& c) {
  for (const auto* p : {&c.edges, &c.attributes, &c.iso_universe}) {
    if (!fs::exists(*p)) throw ConfigError("config: file not found: " + p->string());
  }
  if (c.ergm.model && !fs::exists(*c.ergm.model)) {
    throw ConfigError("config: ERGM model file not found: " + c.ergm.model->string());
  }
}

/// Effective configuration; its hash goes into every manifest.
inline ojson to_json(const PipelineConfig& c) {
  ojson j;
  j["edges"] = c.edges.generic_string();
  j["attributes"] = c.attributes.generic_string();
  j["iso_universe"] = c.iso_universe.generic_string();
  j["years"] = c.years;
  j["max_missing_frac"] = c.max_missing_frac;
  if (c.categorical) j["categorical"] = *c.categorical;
  ojson knn;
  if (c.knn.k) knn["k"] = *c.knn.k; else knn["k"] = "cv";
  knn["grid"] = c.knn.grid;
  knn["folds"] = c.knn.folds;
  knn["mask_frac"] = c.knn.mask_frac;
  j["knn"] = knn;
  j["connectivity"] = {{"points", c.connectivity.points},
                       {"mode", c.connectivity.mode == FlowMode::net ? "net" : "gross"}};
  ojson e;
  if (c.ergm.model) e["model"] = c.ergm.model->generic_string();
  e["gof_replicates"] = c.ergm.gof_replicates;
  e["gof_sweeps"] = c.ergm.gof_sweeps;
  j["ergm"] = e;
  ojson s;
  s["k_min"] = c.sbm.k_min;
  s["k_max"] = c.sbm.k_max;
  s["restarts"] = c.sbm.restarts;
  if (c.sbm.selected_k) s["selected_k"] = *c.sbm.selected_k;
  j["sbm"] = s;
  j["output_dir"] = c.output_dir.generic_string();
  j["seed"] = c.seed;
  return j;
}

/// Hash of the effective settings with each input path replaced by a hash of
/// the file's bytes, so moving a project or changing --out keeps the hash.
inline std::string config_hash(const PipelineConfig& c) {
  auto hex = [](std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
  };
  auto content = [&](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex(ss.str());
  };
  auto j = to_json(c);
  j.erase("output_dir");
  j["edges"] = content(c.edges);
  j["attributes"] = content(c.attributes);
  j["iso_universe"] = content(c.iso_universe);
  if (c.ergm.model) j["ergm"]["model"] = content(*c.ergm.model);
  return hex(j.dump());
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

inline std::string read_text(const fs::path& path, const std::string& stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(stage, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

/// Exclusive lock on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".tradenet.lock") {
    fs::create_directories(dir);
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw ConfigError("output directory " + dir.string() +
                        " is locked by another run (remove " + path_.string() + " if stale)");
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

inline void write_manifest(const PipelineConfig& c, const fs::path& dir, const std::string& stage,
                           const std::vector<std::string>& outputs) {
  ojson m;
  m["stage"] = stage;
  m["config_hash"] = config_hash(c);
  m["seed"] = c.seed;
  m["versions"] = {{"tradenet", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                 "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["outputs"] = outputs;
  write_json(dir / ("manifest_" + stage + ".json"), m);
}

// Canonical network format: network_edges.csv (source,target,weight sorted
// by node index) plus network_meta.json (period, ordered node codes,
// categorical attribute names).

inline void save_network(const fs::path& dir, const TradeNetwork& net,
                         const std::vector<std::string>& categorical) {
  write_text(dir / "network_edges.csv", render([&](std::ostream& o) {
               o << "source,target,weight\n";
               for (const auto& e : net.edges()) {
                 o << net.label(e.source) << ',' << net.label(e.target) << ',' << csv::format(e.weight) << '\n';
               }
             }));
  ojson meta;
  meta["period"] = net.period();
  meta["node_count"] = net.node_count();
  meta["edge_count"] = net.edge_count();
  meta["weight_unit"] = "thousands_usd";
  meta["nodes"] = net.labels();
  meta["categorical_attributes"] = categorical;
  write_json(dir / "network_meta.json", meta);
}

struct LoadedNetwork {
  TradeNetwork net;
  std::vector<std::string> categorical;
};

inline LoadedNetwork load_network(const fs::path& dir) {
  ojson meta;
  try {
    meta = ojson::parse(read_text(dir / "network_meta.json", "ingest"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt network_meta.json: " + std::string(e.what()));
  }
  const auto nodes = meta.at("nodes").get<std::vector<std::string>>();
  std::istringstream in(read_text(dir / "network_edges.csv", "ingest"));
  std::string line;
  std::vector<EdgeRecord> records;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (++lineno == 1) continue;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    const auto w = f.size() == 3 ? csv::parse_double(f[2]) : std::nullopt;
    if (!w) throw DataError("network_edges.csv line " + std::to_string(lineno) + ": malformed");
    records.push_back({f[0], f[1], *w});
  }
  return {build_network(records, nodes, meta.at("period").get<int>()),
          meta.value("categorical_attributes", std::vector<std::string>{})};
}

inline AttributeTable load_attributes(const fs::path& dir, const LoadedNetwork& ln) {
  std::istringstream in(read_text(dir / "attributes_imputed.csv", "ingest"));
  return read_attributes(in, ln.net.period(), ln.net.labels(), ln.categorical);
}

// ---------------------------------------------------------------------------
// Commands

inline ojson flow_summary_json(const FlowSummary& s, int year) {
  ojson j;
  j["period"] = year;
  j["count"] = s.count;
  j["mean"] = json_number(s.mean);
  j["median"] = json_number(s.median);
  j["sd"] = json_number(s.sd);
  j["min"] = json_number(s.min);
  j["max"] = json_number(s.max);
  j["unit"] = "thousands_usd";
  return j;
}

inline void cmd_ingest(const PipelineConfig& c) {
  validate_inputs(c);
  OutputLock lock(c.output_dir);
  const auto iso = read_iso_universe(c.iso_universe);
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    auto flows = read_flows(c.edges, year, iso);
    if (flows.records.empty()) {
      throw ConfigError("year " + std::to_string(year) + " has no recognized flows in " + c.edges.string());
    }
    const auto universe = observed_codes(flows.records);
    const auto net = build_network(flows.records, universe, year);

    std::vector<std::string> categorical;
    if (c.categorical) {
      categorical = *c.categorical;
    } else {
      std::ifstream probe(c.attributes);
      std::string header;
      std::getline(probe, header);
      for (const auto& f : csv::split(csv::strip_bom(header))) {
        if (f == "landlocked") categorical.push_back(f);
      }
    }
    const auto raw = read_attributes(c.attributes, year, universe, categorical);
    const auto kept = apply_missingness_rule(raw, c.max_missing_frac);

    ojson log;
    log["period"] = year;
    log["nodes"] = net.node_count();
    log["edges"] = net.edge_count();
    auto dropped = ojson::array();
    std::set<std::string> dropped_codes;
    for (const auto& d : flows.dropped) {
      dropped.push_back({{"line", d.line}, {"code", d.code}});
      dropped_codes.insert(d.code);
    }
    log["dropped_rows"] = dropped;
    log["dropped_codes"] = std::vector<std::string>(dropped_codes.begin(), dropped_codes.end());
    auto dropped_cols = ojson::array();
    for (const auto& col : raw.columns()) {
      if (!kept.find(col.name)) {
        dropped_cols.push_back({{"column", col.name}, {"missing_fraction", col.missing_fraction()}});
      }
    }
    log["dropped_columns"] = dropped_cols;
    log["max_missing_frac"] = c.max_missing_frac;

    std::size_t k = 1;
    if (c.knn.k) {
      k = *c.knn.k;
      log["knn"] = {{"k", k}, {"selection", "fixed"}};
    } else if (kept.complete()) {
      log["knn"] = {{"k", nullptr}, {"selection", "not needed: no missing cells"}};
    } else {
      const auto sel = select_k_by_cv(kept, c.knn.grid, c.knn.folds,
                                      derive_seed(c.seed, "ingest-knn-cv", static_cast<std::uint64_t>(year)),
                                      c.knn.mask_frac);
      k = sel.k;
      auto curve = ojson::array();
      for (std::size_t g = 0; g < sel.grid.size(); ++g) {
        curve.push_back({{"k", sel.grid[g]}, {"mse", sel.mean_mse[g]}});
      }
      log["knn"] = {{"k", k}, {"selection", "cross-validation"}, {"folds", c.knn.folds}, {"cv", curve}};
    }
    std::size_t imputed_cells = 0;
    for (const auto& col : kept.columns()) imputed_cells += col.missing_count();
    log["imputed_cells"] = imputed_cells;
    const auto imputed = knn_impute(kept, k);

    save_network(dir, net, categorical);
    write_text(dir / "attributes_imputed.csv",
               render([&](std::ostream& o) { write_attributes(o, imputed, year); }));
    const auto summary = describe_flows(net);
    write_json(dir / "flow_summary.json", flow_summary_json(summary, year));
    write_text(dir / "flow_summary.csv", render([&](std::ostream& o) {
                 o << "period,count,mean,median,sd,min,max\n" << year << ',' << summary.count;
                 for (double v : {summary.mean, summary.median, summary.sd, summary.min, summary.max}) {
                   o << ',' << csv::format(v);
                 }
                 o << '\n';
               }));
    write_json(dir / "ingest_log.json", log);
    write_manifest(c, dir, "ingest",
                   {"network_edges.csv", "network_meta.json", "attributes_imputed.csv",
                    "flow_summary.json", "flow_summary.csv", "ingest_log.json"});
  }
}

inline void cmd_stats(const PipelineConfig& c) {
  OutputLock lock(c.output_dir);
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    const auto ln = load_network(dir);
    const auto s = summarize(ln.net);
    write_json(dir / "structural_summary.json", to_json(s, year));
    write_text(dir / "structural_summary.csv",
               render([&](std::ostream& o) { write_summary_csv(o, s, year); }));
    write_manifest(c, dir, "stats", {"structural_summary.json", "structural_summary.csv"});
  }
}

inline void cmd_connectivity(const PipelineConfig& c) {
  OutputLock lock(c.output_dir);
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    const auto ln = load_network(dir);
    const auto grid = default_grid(ln.net, c.connectivity.points);
    const auto prof = sweep(ln.net, grid, c.connectivity.mode);
    write_text(dir / "connectivity_profile.csv",
               render([&](std::ostream& o) { write_profile_csv(o, prof); }));
    ojson j;
    j["period"] = year;
    j["mode"] = c.connectivity.mode == FlowMode::net ? "net" : "gross";
    j["grid_points"] = grid.size();
    j["nodes"] = prof.nodes;
    const auto inflection = inflection_threshold(prof);
    j["inflection_threshold"] = inflection ? ojson(*inflection) : ojson(nullptr);
    write_json(dir / "connectivity.json", j);
    write_manifest(c, dir, "connectivity", {"connectivity_profile.csv", "connectivity.json"});
  }
}

inline void cmd_ergm(const PipelineConfig& c) {
  if (c.ergm.model && !fs::exists(*c.ergm.model)) {
    throw ConfigError("config: ERGM model file not found: " + c.ergm.model->string());
  }
  OutputLock lock(c.output_dir);
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::string>> codes;
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    const auto ln = load_network(dir);
    const auto attrs = load_attributes(dir, ln);
    ergm::ErgmModel model;
    if (c.ergm.model) {
      try {
        model = ergm::parse_model(nlohmann::json::parse(read_text(*c.ergm.model, "config")));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("ERGM model spec: " + std::string(e.what()));
      }
    } else {
      model = ergm::default_model(attrs);
    }
    const auto fit = ergm::fit_mple(model, ln.net, attrs);
    std::vector<std::string> outputs{"ergm_model.json", "ergm_fit.json", "ergm_fit.csv"};
    write_json(dir / "ergm_model.json", ergm::to_json(model));
    write_json(dir / "ergm_fit.json", ergm::to_json(fit));
    write_text(dir / "ergm_fit.csv", render([&](std::ostream& o) { ergm::write_fit_csv(o, fit); }));
    if (c.ergm.gof_replicates > 0) {
      const auto gof = ergm::goodness_of_fit(model, fit, attrs, ln.net, c.ergm.gof_replicates,
                                             derive_seed(c.seed, "ergm-gof", static_cast<std::uint64_t>(year)),
                                             c.ergm.gof_sweeps);
      write_json(dir / "ergm_gof.json", ergm::to_json(gof));
      outputs.push_back("ergm_gof.json");
    }
    write_manifest(c, dir, "ergm", outputs);
    for (const auto& t : fit.terms) {
      if (!codes.count(t.name)) order.push_back(t.name);
      codes[t.name][year] = t.significance;
    }
  }
  if (c.years.size() > 1) {
    write_text(c.output_dir / "ergm_significance.csv", render([&](std::ostream& o) {
                 o << "variable";
                 for (int y : c.years) o << ',' << y;
                 o << '\n';
                 for (const auto& name : order) {
                   o << name;
                   for (int y : c.years) {
                     auto it = codes[name].find(y);
                     o << ',' << (it == codes[name].end() ? "NA" : it->second);
                   }
                   o << '\n';
                 }
               }));
  }
}

inline void cmd_sbm(const PipelineConfig& c) {
  OutputLock lock(c.output_dir);
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    const auto ln = load_network(dir);
    const auto n = ln.net.node_count();
    if (n < 2) throw DataError("sbm needs at least two nodes");
    const auto k_max = std::min(c.sbm.k_max, n - 1);
    if (c.sbm.k_min > k_max) throw ConfigError("config: sbm.k_min must be < node count");
    std::vector<std::size_t> range;
    for (auto k = c.sbm.k_min; k <= k_max; ++k) range.push_back(k);
    sbm::FitOptions opt;
    opt.restarts = c.sbm.restarts;
    opt.seed = derive_seed(c.seed, "sbm", static_cast<std::uint64_t>(year));
    const auto Y = sbm::adjacency_matrix(ln.net);
    const auto sel = sbm::select_classes(Y, range, opt);

    std::size_t chosen = sel.recommended;
    if (c.sbm.selected_k) chosen = *c.sbm.selected_k;
    sbm::SbmFit fit;
    const auto it = std::find(sel.K.begin(), sel.K.end(), chosen);
    if (it != sel.K.end()) {
      fit = sel.fits[static_cast<std::size_t>(it - sel.K.begin())];
    } else {
      auto o = opt;
      o.seed = derive_seed(opt.seed, "sbm-classes", chosen);
      fit = sbm::fit(Y, chosen, o);
    }
    auto j = sbm::to_json(fit, ln.net);
    j["period"] = year;
    j["recommended_k"] = sel.recommended;
    j["selected_k"] = chosen;
    j["k_range"] = range;
    write_json(dir / "sbm_fit.json", j);
    write_text(dir / "sbm_classes.csv", render([&](std::ostream& o) { sbm::write_classes_csv(o, fit, ln.net); }));
    write_text(dir / "sbm_icl_curve.csv", render([&](std::ostream& o) { sbm::write_icl_csv(o, sel); }));
    const auto perm = sbm::ordered_adjacency(ln.net, fit);
    write_text(dir / "sbm_order.csv", render([&](std::ostream& o) { sbm::write_order_csv(o, perm, fit, ln.net); }));
    write_manifest(c, dir, "sbm", {"sbm_fit.json", "sbm_classes.csv", "sbm_icl_curve.csv", "sbm_order.csv"});
  }
}

/// Markdown document assembled from stage artifacts only.
inline void cmd_report(const PipelineConfig& c) {
  OutputLock lock(c.output_dir);
  std::ostringstream r;
  r << "# Trade network analysis report\n\n";
  r << "Periods: ";
  for (std::size_t i = 0; i < c.years.size(); ++i) r << (i ? ", " : "") << c.years[i];
  r << "\n\nConfig hash: " << config_hash(c) << "\nSeed: " << c.seed << "\n";

  auto fenced = [&](const std::string& title, const std::string& body) {
    r << "\n### " << title << "\n\n```csv\n" << body << (body.empty() || body.back() == '\n' ? "" : "\n")
      << "```\n";
  };
  auto json_of = [](const fs::path& p, const std::string& stage) {
    try {
      return ojson::parse(read_text(p, stage));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corrupt " + p.string() + ": " + e.what());
    }
  };
  for (int year : c.years) {
    const auto dir = c.year_dir(year);
    r << "\n## " << year << "\n";

    const auto flows = json_of(dir / "flow_summary.json", "ingest");
    std::ostringstream t1;
    t1 << "metric,value\n";
    for (const char* k : {"count", "mean", "median", "sd", "min", "max"}) t1 << k << ',' << flows[k].dump() << '\n';
    fenced("Flow summary (thousands of USD)", t1.str());

    fenced("Structural statistics", read_text(dir / "structural_summary.csv", "stats"));

    const auto conn = json_of(dir / "connectivity.json", "connectivity");
    r << "\nConnectivity mode: " << conn["mode"].get<std::string>()
      << "; giant component first shrinks at threshold: " << conn["inflection_threshold"].dump() << "\n";
    fenced("Connectivity profile", read_text(dir / "connectivity_profile.csv", "connectivity"));

    fenced("ERGM estimates", read_text(dir / "ergm_fit.csv", "ergm"));

    const auto sbmj = json_of(dir / "sbm_fit.json", "sbm");
    fenced("ICL by class count", read_text(dir / "sbm_icl_curve.csv", "sbm"));
    std::ostringstream cls;
    cls << "class,size,theta\n";
    const auto& classes = sbmj["classes"];
    for (std::size_t q = 0; q < classes.size(); ++q) {
      cls << q + 1 << ',' << classes[q].size() << ',' << sbmj["theta"][q].dump() << '\n';
    }
    r << "\nRecommended K (ICL argmax): " << sbmj["recommended_k"].dump()
      << "; reported K: " << sbmj["selected_k"].dump() << "\n";
    fenced("Block model classes", cls.str());
  }
  if (c.years.size() > 1) {
    r << "\n## Significance across periods\n";
    fenced("ERGM significance codes", read_text(c.output_dir / "ergm_significance.csv", "ergm"));
  }
  write_text(c.output_dir / "report.md", r.str());
}

}  // namespace tradenet::pipeline
