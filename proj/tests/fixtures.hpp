#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "matchlab/geo.hpp"

namespace fixtures {

using matchlab::County;
using matchlab::RegionData;

/// Nodes at positions `miles` on a line, ids 1..n, distances |x_i - x_j|.
inline RegionData line_region(const std::vector<double>& miles, const std::vector<std::int64_t>& fi,
                              const std::vector<std::int64_t>& banks) {
  RegionData d;
  const std::size_t n = miles.size();
  for (std::size_t i = 0; i < n; ++i)
    d.nodes.push_back({static_cast<std::int64_t>(i + 1), "n" + std::to_string(i + 1), fi[i], fi[i] * 10});
  d.foodbanks = banks;
  d.dist.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d.dist[i * n + j] = std::abs(miles[i] - miles[j]);
  return d;
}

/// u(0), v(10), z(20) with F = {u, z}; fi (1, 1, 2) so N_u = N_z = 2.
inline RegionData uvz() { return line_region({0, 10, 20}, {1, 1, 2}, {1, 3}); }
inline constexpr std::int64_t U = 1, V = 2, Z = 3;

/// Two nodes, each its own food bank.
inline RegionData two_banks(std::int64_t fi0, std::int64_t fi1, std::int64_t pop0, std::int64_t pop1) {
  RegionData d;
  d.nodes = {{1, "a", fi0, pop0}, {2, "b", fi1, pop1}};
  d.foodbanks = {1, 2};
  d.dist = {0, 10, 10, 0};
  return d;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("matchlab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace fixtures
