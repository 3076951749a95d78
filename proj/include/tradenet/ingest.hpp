#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tradenet/attributes.hpp"
#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/graph.hpp"
#include "tradenet/random.hpp"

namespace tradenet {

inline constexpr std::string_view kFlowHeader =
    "reporter_iso3,partner_iso3,year,export_value_kusd";

// ---------------------------------------------------------------------------
// Readers

/// One iso3 per line; blank lines and '#' comments are ignored.
inline std::vector<std::string> read_iso_universe(std::istream& in) {
  std::vector<std::string> codes;
  std::string line;
  while (std::getline(in, line)) {
    auto s = csv::trim(csv::strip_bom(line));
    if (s.empty() || s.front() == '#') continue;
    codes.emplace_back(s);
  }
  return codes;
}

inline std::vector<std::string> read_iso_universe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ISO universe file " + path.string());
  return read_iso_universe(in);
}

struct DroppedFlow {
  std::size_t line{0};
  std::string code;
};

struct FlowReadResult {
  std::vector<EdgeRecord> records;
  std::vector<DroppedFlow> dropped;  // rows naming a code outside the universe
};

/// Reads the edge CSV, keeping rows for `year` whose two codes are both in
/// `iso_universe`. Every row is validated, including rows of other years.
inline FlowReadResult read_flows(std::istream& in, int year,
                                 const std::vector<std::string>& iso_universe) {
  const std::unordered_set<std::string> known(iso_universe.begin(), iso_universe.end());
  FlowReadResult out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = csv::trim(lineno == 1 ? csv::strip_bom(line) : std::string_view(line));
    if (view.empty()) continue;
    if (!header_seen) {
      auto fields = csv::split(view);
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + fields[i];
      if (joined != kFlowHeader) {
        throw DataError("line " + std::to_string(lineno) + ": expected header '" +
                        std::string(kFlowHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    auto f = csv::split(view);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw DataError(where + "expected 4 fields, got " + std::to_string(f.size()));
    if (f[0].empty() || f[1].empty()) throw DataError(where + "empty country code");
    auto y = csv::parse_int(f[2]);
    if (!y) throw DataError(where + "malformed year '" + f[2] + "'");
    auto w = csv::parse_double(f[3]);
    if (!w) throw DataError(where + "malformed export value '" + f[3] + "'");
    if (*w < 0.0) throw DataError(where + "negative export value");
    if (*y != year) continue;
    bool keep = true;
    for (const auto* code : {&f[0], &f[1]}) {
      if (!known.count(*code)) {
        out.dropped.push_back({lineno, *code});
        keep = false;
      }
    }
    if (keep) out.records.push_back({f[0], f[1], *w});
  }
  if (!header_seen) throw DataError("edge file is empty");
  return out;
}

inline FlowReadResult read_flows(const std::filesystem::path& path, int year,
                                 const std::vector<std::string>& iso_universe) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge file " + path.string());
  return read_flows(in, year, iso_universe);
}

/// Node universe of a flow extract: every code appearing in a record, sorted.
inline std::vector<std::string> observed_codes(const std::vector<EdgeRecord>& records) {
  std::set<std::string> codes;
  for (const auto& r : records) {
    codes.insert(r.source);
    codes.insert(r.target);
  }
  return {codes.begin(), codes.end()};
}

/// Reads the attribute CSV (`iso3,year,<attributes...>`) for one period.
/// Rows are aligned to `row_ids`; codes without a row get all-missing cells.
/// Empty fields and "NA" are missing.
inline AttributeTable read_attributes(std::istream& in, int year,
                                      const std::vector<std::string>& row_ids,
                                      const std::vector<std::string>& categorical = {}) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < row_ids.size(); ++i) row_of.emplace(row_ids[i], i);

  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> names;
  std::vector<AttributeColumn> cols;
  std::vector<bool> seen(row_ids.size(), false);
  while (std::getline(in, line)) {
    ++lineno;
    auto view = csv::trim(lineno == 1 ? csv::strip_bom(line) : std::string_view(line));
    if (view.empty()) continue;
    auto f = csv::split(view);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (names.empty()) {
      if (f.size() < 3 || f[0] != "iso3" || f[1] != "year") {
        throw DataError(where + "expected header 'iso3,year,<attributes...>'");
      }
      names.assign(f.begin() + 2, f.end());
      for (const auto& n : names) {
        AttributeColumn c;
        c.name = n;
        c.categorical = std::find(categorical.begin(), categorical.end(), n) != categorical.end();
        c.cells.assign(row_ids.size(), std::nullopt);
        cols.push_back(std::move(c));
      }
      continue;
    }
    if (f.size() != names.size() + 2) {
      throw DataError(where + "expected " + std::to_string(names.size() + 2) + " fields");
    }
    auto y = csv::parse_int(f[1]);
    if (!y) throw DataError(where + "malformed year '" + f[1] + "'");
    if (*y != year) continue;
    auto it = row_of.find(f[0]);
    if (it == row_of.end()) continue;
    if (seen[it->second]) throw DataError(where + "duplicate row for '" + f[0] + "'");
    seen[it->second] = true;
    for (std::size_t c = 0; c < names.size(); ++c) {
      const auto& s = f[c + 2];
      if (s.empty() || s == "NA") continue;
      auto v = csv::parse_double(s);
      if (!v) throw DataError(where + "malformed value '" + s + "' in column '" + names[c] + "'");
      if (cols[c].categorical && *v != std::round(*v)) {
        throw DataError(where + "categorical column '" + names[c] + "' needs integer codes");
      }
      cols[c].cells[it->second] = *v;
    }
  }
  if (names.empty()) throw DataError("attribute file is empty");
  for (const auto& c : categorical) {
    if (std::find(names.begin(), names.end(), c) == names.end()) {
      throw ConfigError("categorical attribute '" + c + "' not present in attribute file");
    }
  }
  AttributeTable table(row_ids);
  for (auto& c : cols) table.add_column(std::move(c));
  return table;
}

inline AttributeTable read_attributes(const std::filesystem::path& path, int year,
                                      const std::vector<std::string>& row_ids,
                                      const std::vector<std::string>& categorical = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute file " + path.string());
  return read_attributes(in, year, row_ids, categorical);
}

inline void write_attributes(std::ostream& out, const AttributeTable& table, int year) {
  out << "iso3,year";
  for (const auto& c : table.columns()) out << ',' << c.name;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.row_ids()[r] << ',' << year;
    for (const auto& c : table.columns()) {
      out << ',';
      if (c.cells[r]) out << csv::format(*c.cells[r]);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Flow summary

struct FlowSummary {
  std::size_t count{0};
  double mean{std::numeric_limits<double>::quiet_NaN()};
  double median{std::numeric_limits<double>::quiet_NaN()};
  double sd{std::numeric_limits<double>::quiet_NaN()};  // sample, n-1
  double min{std::numeric_limits<double>::quiet_NaN()};
  double max{std::numeric_limits<double>::quiet_NaN()};
};

inline FlowSummary describe_values(std::vector<double> w) {
  FlowSummary s;
  s.count = w.size();
  if (w.empty()) return s;
  std::sort(w.begin(), w.end());
  const auto n = w.size();
  s.min = w.front();
  s.max = w.back();
  s.median = n % 2 ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
  long double sum = 0;
  for (double x : w) sum += x;
  s.mean = static_cast<double>(sum / n);
  if (n > 1) {
    long double ss = 0;
    for (double x : w) ss += (x - s.mean) * static_cast<long double>(x - s.mean);
    s.sd = static_cast<double>(std::sqrt(ss / (n - 1)));
  }
  return s;
}

inline FlowSummary describe_flows(const TradeNetwork& net) {
  std::vector<double> w;
  w.reserve(net.edge_count());
  for (const auto& e : net.edges()) w.push_back(e.weight);
  return describe_values(std::move(w));
}

// ---------------------------------------------------------------------------
// Missingness and imputation

/// Drops every column whose missing fraction is >= max_missing_frac.
inline AttributeTable apply_missingness_rule(const AttributeTable& table,
                                             double max_missing_frac = 0.30) {
  if (!(max_missing_frac >= 0.0 && max_missing_frac <= 1.0)) {
    throw ConfigError("missingness threshold must lie in [0, 1]");
  }
  AttributeTable out(table.row_ids());
  for (const auto& c : table.columns()) {
    if (c.missing_fraction() < max_missing_frac) out.add_column(c);
  }
  if (out.cols() == 0) throw DataError("missingness rule dropped every attribute column");
  return out;
}

namespace detail {

struct ColumnScale {
  double mean{0.0};
  double sd{1.0};
};

/// Observed mean and sample SD; SD falls back to 1 when undefined or zero.
inline ColumnScale column_scale(const AttributeColumn& c) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : c.cells) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  ColumnScale s;
  if (n == 0) return s;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (const auto& v : c.cells) {
      if (v) ss += (*v - s.mean) * (*v - s.mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 0.0) s.sd = sd;
  }
  return s;
}

}  // namespace detail

/// k-nearest-neighbour imputation over z-standardized numeric columns.
///
/// Distance between two rows is Euclidean over the numeric dimensions
/// observed in both, scaled by sqrt(total dims / shared dims); rows sharing
/// no dimension are not neighbours. Each missing cell takes the mean of the
/// k nearest rows that observe that column (the mode, for categorical
/// columns, ties to the smaller code). Distance ties resolve to the smaller
/// row index. All distances use the input table, so the result does not
/// depend on cell order.
inline AttributeTable knn_impute(const AttributeTable& table, std::size_t k) {
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  if (table.complete()) return table;

  const auto nrows = table.rows();
  std::vector<std::size_t> dims;
  std::vector<detail::ColumnScale> scales;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (!table.columns()[c].categorical) {
      dims.push_back(c);
      scales.push_back(detail::column_scale(table.columns()[c]));
    }
  }
  const auto ndims = dims.size();
  // Standardized numeric matrix; NaN marks missing.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> z(nrows * ndims, nan);
  for (std::size_t r = 0; r < nrows; ++r) {
    bool any = false;
    for (std::size_t d = 0; d < ndims; ++d) {
      const auto& cell = table.columns()[dims[d]].cells[r];
      if (cell) {
        z[r * ndims + d] = (*cell - scales[d].mean) / scales[d].sd;
        any = true;
      }
    }
    if (!any) {
      throw DataError("knn: row '" + table.row_ids()[r] + "' has no observed numeric attribute");
    }
  }

  auto distance = [&](std::size_t a, std::size_t b) {
    double ss = 0.0;
    std::size_t shared = 0;
    for (std::size_t d = 0; d < ndims; ++d) {
      const double x = z[a * ndims + d], y = z[b * ndims + d];
      if (!std::isnan(x) && !std::isnan(y)) {
        ss += (x - y) * (x - y);
        ++shared;
      }
    }
    if (shared == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(ss * static_cast<double>(ndims) / static_cast<double>(shared));
  };

  AttributeTable out = table;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t r = 0; r < nrows; ++r) {
    bool needs = false;
    for (const auto& c : table.columns()) needs = needs || !c.cells[r];
    if (!needs) continue;

    std::vector<double> dist(nrows, std::numeric_limits<double>::infinity());
    for (std::size_t o = 0; o < nrows; ++o) {
      if (o != r) dist[o] = distance(r, o);
    }
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const auto& col = table.columns()[c];
      if (col.cells[r]) continue;
      cand.clear();
      for (std::size_t o = 0; o < nrows; ++o) {
        if (o != r && col.cells[o] && std::isfinite(dist[o])) cand.emplace_back(dist[o], o);
      }
      if (cand.empty()) {
        throw DataError("knn: no donor row for '" + col.name + "' of '" + table.row_ids()[r] + "'");
      }
      const auto take = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
      double filled;
      if (col.categorical) {
        std::map<double, std::size_t> votes;
        for (std::size_t t = 0; t < take; ++t) ++votes[*col.cells[cand[t].second]];
        filled = votes.begin()->first;
        std::size_t best = 0;
        for (const auto& [level, n] : votes) {
          if (n > best) {
            best = n;
            filled = level;
          }
        }
      } else {
        double sum = 0.0;
        for (std::size_t t = 0; t < take; ++t) sum += *col.cells[cand[t].second];
        filled = sum / static_cast<double>(take);
      }
      out.columns()[c].cells[r] = filled;
    }
  }
  return out;
}

struct CvCell {
  std::size_t row{0};
  std::size_t col{0};
};

/// Cells hidden in each CV fold: a random `mask_frac` of the observed numeric
/// cells (at least one), drawn per fold from a seed derived from `seed`. A
/// cell is skipped when hiding it would leave its row without any observed
/// numeric value or its column without any other observed value.
inline std::vector<std::vector<CvCell>> cv_fold_masks(const AttributeTable& table,
                                                      std::size_t folds, std::uint64_t seed,
                                                      double mask_frac = 0.10) {
  std::vector<CvCell> observed;
  std::vector<std::size_t> row_obs(table.rows(), 0), col_obs(table.cols(), 0);
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const auto& col = table.columns()[c];
    if (col.categorical) continue;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      if (col.cells[r]) {
        observed.push_back({r, c});
        ++row_obs[r];
        ++col_obs[c];
      }
    }
  }
  const auto target = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(mask_frac * static_cast<double>(observed.size()))));
  std::vector<std::vector<CvCell>> masks(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    Rng rng(derive_seed(seed, "knn-cv-fold", f));
    auto order = observed;
    shuffle(order.begin(), order.end(), rng);
    auto rows_left = row_obs;
    auto cols_left = col_obs;
    for (const auto& cell : order) {
      if (masks[f].size() == target) break;
      if (rows_left[cell.row] < 2 || cols_left[cell.col] < 2) continue;
      --rows_left[cell.row];
      --cols_left[cell.col];
      masks[f].push_back(cell);
    }
    std::sort(masks[f].begin(), masks[f].end(), [](const CvCell& a, const CvCell& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
  }
  return masks;
}

/// Pooled mean squared error, in units of each column's observed SD, of
/// re-imputing the hidden cells with `k` neighbours.
inline double cv_fold_error(const AttributeTable& table, const std::vector<CvCell>& mask,
                            std::size_t k) {
  if (mask.empty()) throw DataError("knn cv: fold masks no cells");
  AttributeTable hidden = table;
  for (const auto& cell : mask) hidden.columns()[cell.col].cells[cell.row].reset();
  const auto imputed = knn_impute(hidden, k);
  double sse = 0.0;
  for (const auto& cell : mask) {
    const auto& col = table.columns()[cell.col];
    const double scale = detail::column_scale(col).sd;
    const double diff = (*imputed.columns()[cell.col].cells[cell.row] - *col.cells[cell.row]) / scale;
    sse += diff * diff;
  }
  return sse / static_cast<double>(mask.size());
}

struct KSelection {
  std::size_t k{1};
  std::vector<std::size_t> grid;  // sorted, unique
  std::vector<double> mean_mse;   // aligned with grid
};

/// Chooses k by repeated random masking. Ties go to the smaller k.
inline KSelection select_k_by_cv(const AttributeTable& table, std::vector<std::size_t> k_grid,
                                 std::size_t folds, std::uint64_t seed, double mask_frac = 0.10) {
  if (k_grid.empty()) throw ConfigError("knn cv: empty k grid");
  if (folds < 1) throw ConfigError("knn cv: folds must be >= 1");
  if (std::find(k_grid.begin(), k_grid.end(), std::size_t{0}) != k_grid.end()) {
    throw ConfigError("knn cv: k must be >= 1");
  }
  if (table.rows() < 2) throw DataError("knn cv: table needs at least two rows");
  std::size_t rows_with_data = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    bool any = false;
    for (const auto& c : table.columns()) any = any || (!c.categorical && c.cells[r]);
    rows_with_data += any;
  }
  if (rows_with_data < folds) throw DataError("knn cv: fewer observed rows than folds");

  std::sort(k_grid.begin(), k_grid.end());
  k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
  const auto masks = cv_fold_masks(table, folds, seed, mask_frac);

  KSelection sel;
  sel.grid = k_grid;
  sel.mean_mse.assign(k_grid.size(), 0.0);
  for (std::size_t g = 0; g < k_grid.size(); ++g) {
    for (const auto& m : masks) sel.mean_mse[g] += cv_fold_error(table, m, k_grid[g]);
    sel.mean_mse[g] /= static_cast<double>(folds);
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < k_grid.size(); ++g) {
    if (sel.mean_mse[g] < sel.mean_mse[best]) best = g;
  }
  sel.k = k_grid[best];
  return sel;
}

}  // namespace tradenet
