#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "levylab/gauges.hpp"
#include "levylab/resolution_set.hpp"
#include "levylab/spectrum.hpp"

namespace levylab {

struct Cube {
  int generation;
  std::int64_t index;  // cube [index, index+1) * c^{-generation}
};

struct DyadicCover {
  int base = 2;
  int depth = 0;
  int root_generation = 0;
  std::vector<Cube> cubes;
  double cost = 0.0;
};

struct NetMeasureResult {
  double value = 0.0;
  DyadicCover cover;
};

// Cheapest cover by c-adic cubes of generations root..J, where the root is the
// first generation with c^{-j} <= epsilon_g. Ties select the coarser cube.
NetMeasureResult net_measure_dp(const ResolutionSet& set, const GaugeFunction& g, int c, int J);

// Minimum over the explicit list of every admissible cover (no pruning). Intended
// for small trees; throws std::length_error past 2^22 covers in one subtree.
double net_measure_exhaustive(const ResolutionSet& set, const GaugeFunction& g, int c, int J);

// First generation whose cube diameter is admissible for g.
int root_generation(const GaugeFunction& g, int c);

// Number of generation-j c-adic cells meeting the set.
std::uint64_t count_cells(const ResolutionSet& set, int c, int j);

// Regression of log_c N_j on j over [j1, j2] (scales with N_j > 0); needs >= 3 scales.
LineFit box_dimension(const ResolutionSet& set, int c, std::pair<int, int> j_range);

// Regression of log_c (number of components with length in [c^{-j}, c^{-j+1})) on j.
LineFit cover_dimension(const ResolutionSet& set, int c, std::pair<int, int> j_range);

// Sum over components of n g(len/n) with n = max(1, ceil(len c^J)).
double hausdorff_g_upper_bound(const ResolutionSet& set, const GaugeFunction& g, int J, int c = 2);

// Cost of covering the set with all generation-J cubes it meets.
double grid_cover_cost(const ResolutionSet& set, const GaugeFunction& g, int c, int J);

}  // namespace levylab
