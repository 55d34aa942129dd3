#ifndef MATCHLAB_GEO_HPP
#define MATCHLAB_GEO_HPP

// County graph, metric validation, catchments and (alpha, beta) bias.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "matchlab/common.hpp"

namespace matchlab {

struct County {
  std::int64_t node_id = 0;
  std::string name;
  std::int64_t fi_pop = 0;     // food-insecure individuals
  std::int64_t total_pop = 0;
};

/// Unvalidated region as read from files or built by a generator.
/// `dist` is row-major n x n in the order of `nodes`.
struct RegionData {
  std::vector<County> nodes;
  std::vector<std::int64_t> foodbanks;  // node ids
  std::vector<double> dist;
};

struct TriangleViolation {
  std::int64_t u = 0, v = 0, w = 0;  // d(u,w) > d(u,v) + d(v,w)
  double excess = 0.0;
};

struct ValidationReport {
  std::vector<std::string> issues;
  std::vector<TriangleViolation> triangles;  // first kMaxListed only
  std::size_t triangle_count = 0;

  static constexpr std::size_t kMaxListed = 64;

  bool ok() const noexcept { return issues.empty() && triangle_count == 0; }

  std::vector<std::string> lines() const {
    std::vector<std::string> out = issues;
    for (const auto& t : triangles) {
      out.push_back("triangle violation: d(" + std::to_string(t.u) + "," + std::to_string(t.w) +
                    ") exceeds d(" + std::to_string(t.u) + "," + std::to_string(t.v) + ")+d(" +
                    std::to_string(t.v) + "," + std::to_string(t.w) + ") by " +
                    format_real(t.excess));
    }
    if (triangle_count > triangles.size())
      out.push_back(std::to_string(triangle_count - triangles.size()) +
                    " further triangle violations not listed");
    return out;
  }
};

inline constexpr double kMetricTolerance = 1e-9;

namespace detail {

inline double tol_for(double magnitude, double rel) { return rel * std::max(1.0, magnitude); }

}  // namespace detail

/// Checks populations, the food-bank set, and that `dist` is a metric
/// (symmetric, zero diagonal, nonnegative, triangle inequality within a
/// relative tolerance).
inline ValidationReport validate_region(const RegionData& r, double rel_tol = kMetricTolerance) {
  ValidationReport rep;
  const std::size_t n = r.nodes.size();
  if (n == 0) {
    rep.issues.push_back("region has no nodes");
    return rep;
  }
  std::unordered_set<std::int64_t> ids;
  std::int64_t fi_total = 0;
  for (const auto& c : r.nodes) {
    if (!ids.insert(c.node_id).second)
      rep.issues.push_back("duplicate node_id " + std::to_string(c.node_id));
    if (c.fi_pop < 0) rep.issues.push_back("negative fi_pop at node " + std::to_string(c.node_id));
    if (c.total_pop < 0)
      rep.issues.push_back("negative total_pop at node " + std::to_string(c.node_id));
    fi_total += std::max<std::int64_t>(c.fi_pop, 0);
  }
  if (fi_total <= 0) rep.issues.push_back("total food-insecure population is zero");
  if (r.foodbanks.empty()) rep.issues.push_back("food bank set is empty");
  std::unordered_set<std::int64_t> banks;
  for (auto f : r.foodbanks) {
    if (!ids.count(f)) rep.issues.push_back("food bank " + std::to_string(f) + " is not a node");
    if (!banks.insert(f).second) rep.issues.push_back("duplicate food bank " + std::to_string(f));
  }
  if (r.dist.size() != n * n) {
    rep.issues.push_back("distance matrix has " + std::to_string(r.dist.size()) +
                         " cells, expected " + std::to_string(n * n));
    return rep;
  }
  auto d = [&](std::size_t i, std::size_t j) { return r.dist[i * n + j]; };
  bool cells_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) {
      rep.issues.push_back("nonzero diagonal at node " + std::to_string(r.nodes[i].node_id));
      cells_ok = false;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double x = d(i, j);
      if (!std::isfinite(x) || x < 0.0) {
        rep.issues.push_back("invalid distance d(" + std::to_string(r.nodes[i].node_id) + "," +
                             std::to_string(r.nodes[j].node_id) + ") = " + format_real(x));
        cells_ok = false;
      } else if (j > i && std::abs(x - d(j, i)) > detail::tol_for(x, rel_tol)) {
        rep.issues.push_back("asymmetric distance between " + std::to_string(r.nodes[i].node_id) +
                             " and " + std::to_string(r.nodes[j].node_id));
        cells_ok = false;
      }
    }
  }
  if (!cells_ok) return rep;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t w = u + 1; w < n; ++w) {
      const double direct = d(u, w);
      const double slack = detail::tol_for(direct, rel_tol);
      for (std::size_t v = 0; v < n; ++v) {
        double excess = direct - (d(u, v) + d(v, w));
        if (excess > slack) {
          if (rep.triangles.size() < ValidationReport::kMaxListed)
            rep.triangles.push_back(
                {r.nodes[u].node_id, r.nodes[v].node_id, r.nodes[w].node_id, excess});
          ++rep.triangle_count;
        }
      }
    }
  }
  return rep;
}

/// In-place Floyd-Warshall over a dense row-major matrix.
inline void shortest_path_closure(std::vector<double>& dist, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist[i * n + k];
      for (std::size_t j = 0; j < n; ++j) {
        double via = dik + dist[k * n + j];
        if (via < dist[i * n + j]) dist[i * n + j] = via;
      }
    }
}

struct MetricRepair {
  bool applied = false;
  bool symmetrized = false;     // min(d(u,v), d(v,u)) taken before closure
  std::size_t cells_changed = 0;
  double max_reduction = 0.0;
};

/// A validated, immutable region. Food banks are kept sorted by node id so
/// "lowest bank index" and "lowest node id" coincide.
class Region {
 public:
  /// Validates `data`; with `repair_metric`, an asymmetric or non-metric
  /// matrix is first replaced by its (symmetrized) shortest-path closure.
  static Region from(RegionData data, bool repair_metric = false) {
    MetricRepair repair;
    if (repair_metric) repair = repair_in_place(data);
    ValidationReport rep = validate_region(data);
    if (!rep.ok()) throw ValidationError("invalid region", rep.lines());
    return Region(std::move(data), repair);
  }

  std::size_t size() const noexcept { return data_.nodes.size(); }
  const std::vector<County>& nodes() const noexcept { return data_.nodes; }
  const County& node(NodeIndex i) const { return data_.nodes[i]; }
  double dist(NodeIndex i, NodeIndex j) const noexcept { return data_.dist[i * size() + j]; }
  std::span<const double> dist_row(NodeIndex i) const noexcept {
    return {data_.dist.data() + static_cast<std::size_t>(i) * size(), size()};
  }

  std::span<const NodeIndex> foodbanks() const noexcept { return banks_; }
  std::size_t bank_count() const noexcept { return banks_.size(); }
  NodeIndex bank_node(BankIndex b) const { return banks_[b]; }
  std::int64_t bank_id(BankIndex b) const { return data_.nodes[banks_[b]].node_id; }

  std::optional<NodeIndex> index_of(std::int64_t node_id) const {
    auto it = index_.find(node_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  NodeIndex require_index(std::int64_t node_id) const {
    auto i = index_of(node_id);
    if (!i) throw ValidationError("unknown node_id " + std::to_string(node_id));
    return *i;
  }

  std::int64_t total_fi() const noexcept { return total_fi_; }
  std::int64_t total_pop() const noexcept { return total_pop_; }
  /// Largest pairwise distance.
  double diameter() const noexcept { return *std::max_element(data_.dist.begin(), data_.dist.end()); }

  const MetricRepair& repair() const noexcept { return repair_; }
  const RegionData& data() const noexcept { return data_; }

 private:
  Region(RegionData data, MetricRepair repair) : data_(std::move(data)), repair_(repair) {
    for (NodeIndex i = 0; i < data_.nodes.size(); ++i) {
      index_.emplace(data_.nodes[i].node_id, i);
      total_fi_ += data_.nodes[i].fi_pop;
      total_pop_ += data_.nodes[i].total_pop;
    }
    std::vector<std::int64_t> ids = data_.foodbanks;
    std::sort(ids.begin(), ids.end());
    for (auto id : ids) banks_.push_back(index_.at(id));
  }

  static MetricRepair repair_in_place(RegionData& data) {
    MetricRepair rep;
    const std::size_t n = data.nodes.size();
    if (data.dist.size() != n * n) return rep;
    std::vector<double> before = data.dist;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double& a = data.dist[i * n + j];
        double& b = data.dist[j * n + i];
        if (a != b) {
          rep.symmetrized = true;
          a = b = std::min(a, b);
        }
      }
    }
    shortest_path_closure(data.dist, n);
    for (std::size_t c = 0; c < before.size(); ++c) {
      if (data.dist[c] != before[c]) {
        ++rep.cells_changed;
        rep.max_reduction = std::max(rep.max_reduction, before[c] - data.dist[c]);
      }
    }
    rep.applied = true;
    return rep;
  }

  RegionData data_;
  MetricRepair repair_;
  std::vector<NodeIndex> banks_;
  std::unordered_map<std::int64_t, NodeIndex> index_;
  std::int64_t total_fi_ = 0;
  std::int64_t total_pop_ = 0;
};

// ---------------------------------------------------------------------------
// Catchments

struct Catchment {
  std::vector<BankIndex> nearest;                // per node: f_v
  std::vector<std::int64_t> served_pop;          // per bank: N_f (food-insecure)
  std::vector<std::vector<NodeIndex>> served_set;  // per bank: S_f
  std::int64_t total = 0;                        // N

  std::size_t bank_count() const noexcept { return served_pop.size(); }
};

/// Assigns every node to its nearest food bank (ties to the lowest bank
/// node id) and aggregates the food-insecure population per bank.
inline Catchment compute_catchments(const Region& region) {
  Catchment c;
  const std::size_t n = region.size();
  const std::size_t nb = region.bank_count();
  c.nearest.resize(n);
  c.served_pop.assign(nb, 0);
  c.served_set.assign(nb, {});
  for (NodeIndex v = 0; v < n; ++v) {
    BankIndex best = 0;
    double best_d = region.dist(v, region.bank_node(0));
    for (BankIndex b = 1; b < nb; ++b) {
      double d = region.dist(v, region.bank_node(b));
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    c.nearest[v] = best;
    c.served_pop[best] += region.node(v).fi_pop;
    c.served_set[best].push_back(v);
    c.total += region.node(v).fi_pop;
  }
  std::vector<std::string> empty;
  for (BankIndex b = 0; b < nb; ++b)
    if (c.served_pop[b] <= 0)
      empty.push_back("food bank " + std::to_string(region.bank_id(b)) +
                      " serves zero food-insecure population");
  if (!empty.empty()) throw ValidationError("catchment has empty food banks", empty);
  return c;
}

// ---------------------------------------------------------------------------
// (alpha, beta) bias

struct Bias {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Tightest (alpha, beta) with weight_share/alpha <= prob <= beta*weight_share
/// for every entry, each floored at 1. Entries with both zero are ignored;
/// positive weight with zero probability gives alpha = inf, and positive
/// probability with zero weight gives beta = inf.
inline Bias bias_of(std::span<const double> probs, std::span<const double> weights) {
  if (probs.size() != weights.size()) throw std::invalid_argument("bias_of: size mismatch");
  double wsum = 0.0, psum = 0.0;
  for (double w : weights) wsum += w;
  for (double p : probs) psum += p;
  if (!(wsum > 0.0) || !(psum > 0.0)) throw std::invalid_argument("bias_of: zero total");
  Bias b;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double share = weights[i] / wsum;
    const double p = probs[i] / psum;
    if (share == 0.0 && p == 0.0) continue;
    b.alpha = std::max(b.alpha, p == 0.0 ? kInf : share / p);
    b.beta = std::max(b.beta, share == 0.0 ? kInf : p / share);
  }
  // Renormalization noise would otherwise make exact proportional selection
  // look biased, and f(alpha, beta) is very sensitive near 1.
  constexpr double kSnap = 1e-12;
  if (b.alpha < 1.0 + kSnap) b.alpha = 1.0;
  if (b.beta < 1.0 + kSnap) b.beta = 1.0;
  return b;
}

struct BankBias {
  Bias bias;
  std::vector<double> q;  // share of food-insecure population per bank
  std::vector<double> r;  // share of total population per bank
};

/// Bias of the induced food-bank distribution: sampling proportional to
/// food-insecure population (q) measured against total population (r).
inline BankBias estimate_alpha_beta(const Region& region, const Catchment& catchment) {
  const std::size_t nb = catchment.bank_count();
  BankBias out;
  out.q.resize(nb);
  out.r.resize(nb);
  double fi_total = 0.0, pop_total = 0.0;
  std::vector<double> fi(nb, 0.0), pop(nb, 0.0);
  for (BankIndex b = 0; b < nb; ++b) {
    for (NodeIndex v : catchment.served_set[b]) {
      fi[b] += static_cast<double>(region.node(v).fi_pop);
      pop[b] += static_cast<double>(region.node(v).total_pop);
    }
    fi_total += fi[b];
    pop_total += pop[b];
  }
  if (!(fi_total > 0.0) || !(pop_total > 0.0))
    throw ValidationError("alpha/beta: population fields must have positive totals");
  std::vector<std::string> issues;
  for (BankIndex b = 0; b < nb; ++b) {
    out.q[b] = fi[b] / fi_total;
    out.r[b] = pop[b] / pop_total;
    if (out.q[b] == 0.0 && out.r[b] > 0.0)
      issues.push_back("food bank " + std::to_string(region.bank_id(b)) +
                       " has zero food-insecure share: alpha unbounded");
    if (out.r[b] == 0.0 && out.q[b] > 0.0)
      issues.push_back("food bank " + std::to_string(region.bank_id(b)) +
                       " has zero total-population share: beta unbounded");
  }
  if (!issues.empty()) throw ValidationError("unbounded bias", issues);
  out.bias = bias_of(out.q, out.r);
  return out;
}

/// f(alpha, beta) = 2 ln((ab-1)/(ab-b)) / ln((ab-1)/(a-1)); the unit-ball
/// gap bound needs some eps > 0 with 1 + eps <= f. Boundary values are the
/// continuous limits: f(1,1) = inf, f(1,b) = 2, f(a,1) = 2/a.
inline double f_alpha_beta(double alpha, double beta) {
  if (!(alpha >= 1.0) || !(beta >= 1.0))
    throw std::invalid_argument("f_alpha_beta: alpha and beta must be >= 1");
  if (std::isinf(alpha) || std::isinf(beta)) return 0.0;
  if (alpha == 1.0 && beta == 1.0) return kInf;
  if (alpha == 1.0) return 2.0;
  if (beta == 1.0) return 2.0 / alpha;
  // ab - 1 and ab - b rewritten to avoid cancellation near alpha = 1.
  const double am1 = alpha - 1.0;
  const double ab_1 = alpha * (beta - 1.0) + am1;
  return 2.0 * std::log(ab_1 / (beta * am1)) / std::log(ab_1 / am1);
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3);
    first = false;
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline void expect_header(const std::vector<std::string>& got, std::vector<std::string> want,
                          const std::string& path) {
  std::vector<std::string> g;
  for (const auto& s : got) g.push_back(trim(s));
  if (g != want) {
    std::string w;
    for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
    throw ValidationError(path + ": expected header '" + w + "'");
  }
}

}  // namespace detail

/// Reads counties.csv, foodbanks.csv and distances.csv.
inline RegionData load_region_csv(const std::string& counties_path,
                                  const std::string& foodbanks_path,
                                  const std::string& distances_path) {
  RegionData data;
  auto counties = detail::read_csv(counties_path);
  if (counties.empty()) throw ValidationError(counties_path + ": empty file");
  detail::expect_header(counties[0], {"node_id", "name", "fi_pop", "total_pop"}, counties_path);
  for (std::size_t i = 1; i < counties.size(); ++i) {
    const auto& row = counties[i];
    if (row.size() != 4)
      throw ValidationError(counties_path + ": line " + std::to_string(i + 1) + " needs 4 fields");
    data.nodes.push_back({parse_int(row[0]), detail::trim(row[1]), parse_int(row[2]),
                          parse_int(row[3])});
  }

  auto banks = detail::read_csv(foodbanks_path);
  if (banks.empty()) throw ValidationError(foodbanks_path + ": empty file");
  detail::expect_header(banks[0], {"node_id"}, foodbanks_path);
  for (std::size_t i = 1; i < banks.size(); ++i) data.foodbanks.push_back(parse_int(banks[i][0]));

  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < data.nodes.size(); ++i) pos.emplace(data.nodes[i].node_id, i);
  const std::size_t n = data.nodes.size();
  auto rows = detail::read_csv(distances_path);
  if (rows.empty()) throw ValidationError(distances_path + ": empty file");
  std::vector<std::size_t> col_of;
  for (std::size_t j = 1; j < rows[0].size(); ++j) {
    auto id = parse_int(rows[0][j]);
    auto it = pos.find(id);
    if (it == pos.end())
      throw ValidationError(distances_path + ": column node_id " + std::to_string(id) +
                            " not in counties");
    col_of.push_back(it->second);
  }
  if (col_of.size() != n)
    throw ValidationError(distances_path + ": expected " + std::to_string(n) + " columns");
  data.dist.assign(n * n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(n, 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != n + 1)
      throw ValidationError(distances_path + ": line " + std::to_string(i + 1) + " needs " +
                            std::to_string(n + 1) + " fields");
    auto id = parse_int(row[0]);
    auto it = pos.find(id);
    if (it == pos.end())
      throw ValidationError(distances_path + ": row node_id " + std::to_string(id) +
                            " not in counties");
    if (seen[it->second]++) throw ValidationError(distances_path + ": duplicate row " + row[0]);
    for (std::size_t j = 0; j < n; ++j) data.dist[it->second * n + col_of[j]] = parse_real(row[j + 1]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw ValidationError(distances_path + ": missing row for node_id " +
                            std::to_string(data.nodes[i].node_id));
  return data;
}

/// Writes the three region files in the same format `load_region_csv` reads.
inline void write_region_csv(const RegionData& data, const std::string& counties_path,
                             const std::string& foodbanks_path,
                             const std::string& distances_path) {
  std::ofstream c(counties_path, std::ios::binary);
  c << "node_id,name,fi_pop,total_pop\n";
  for (const auto& n : data.nodes)
    c << n.node_id << ',' << n.name << ',' << n.fi_pop << ',' << n.total_pop << '\n';
  std::ofstream f(foodbanks_path, std::ios::binary);
  f << "node_id\n";
  for (auto id : data.foodbanks) f << id << '\n';
  std::ofstream d(distances_path, std::ios::binary);
  const std::size_t n = data.nodes.size();
  d << "node_id";
  for (const auto& node : data.nodes) d << ',' << node.node_id;
  d << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    d << data.nodes[i].node_id;
    for (std::size_t j = 0; j < n; ++j) d << ',' << format_real(data.dist[i * n + j]);
    d << '\n';
  }
  if (!c || !f || !d) throw std::runtime_error("failed writing region files");
}

}  // namespace matchlab

#endif  // MATCHLAB_GEO_HPP
