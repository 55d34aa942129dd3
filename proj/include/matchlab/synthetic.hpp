#ifndef MATCHLAB_SYNTHETIC_HPP
#define MATCHLAB_SYNTHETIC_HPP

// Seeded synthetic regions: counties as random points in a square with
// Euclidean (hence metric) distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "matchlab/geo.hpp"
#include "matchlab/rng.hpp"

namespace matchlab {

struct SyntheticSpec {
  std::size_t nodes = 30;
  std::size_t foodbanks = 5;
  std::uint64_t seed = 1;
  double side_miles = 300.0;
  std::int64_t fi_min = 500;
  std::int64_t fi_max = 20000;
  double pop_factor_min = 5.0;  // total_pop = fi_pop * factor
  double pop_factor_max = 10.0;
};

inline std::int64_t uniform_int(Xoshiro256ss& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  auto k = static_cast<std::int64_t>(std::floor(rng.uniform() * span));
  return lo + std::min<std::int64_t>(k, hi - lo);
}

inline RegionData euclidean_region(const SyntheticSpec& spec) {
  if (spec.nodes < 1 || spec.foodbanks < 1 || spec.foodbanks > spec.nodes)
    throw ValidationError("synthetic region needs 1 <= foodbanks <= nodes");
  if (spec.fi_min < 1 || spec.fi_max < spec.fi_min)
    throw ValidationError("synthetic region needs 1 <= fi_min <= fi_max");
  Xoshiro256ss rng(spec.seed);
  RegionData data;
  std::vector<double> xs(spec.nodes), ys(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    xs[i] = rng.uniform() * spec.side_miles;
    ys[i] = rng.uniform() * spec.side_miles;
    County c;
    c.node_id = static_cast<std::int64_t>(i + 1);
    c.name = "county" + std::to_string(i + 1);
    c.fi_pop = uniform_int(rng, spec.fi_min, spec.fi_max);
    double factor = spec.pop_factor_min + rng.uniform() * (spec.pop_factor_max - spec.pop_factor_min);
    c.total_pop = static_cast<std::int64_t>(std::llround(static_cast<double>(c.fi_pop) * factor));
    data.nodes.push_back(std::move(c));
  }
  // Partial Fisher-Yates for the bank subset.
  std::vector<std::size_t> idx(spec.nodes);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < spec.foodbanks; ++i) {
    auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                  static_cast<std::int64_t>(spec.nodes - 1)));
    std::swap(idx[i], idx[j]);
    data.foodbanks.push_back(data.nodes[idx[i]].node_id);
  }
  const std::size_t n = spec.nodes;
  data.dist.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      data.dist[i * n + j] = data.dist[j * n + i] = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
  return data;
}

}  // namespace matchlab

#endif  // MATCHLAB_SYNTHETIC_HPP
