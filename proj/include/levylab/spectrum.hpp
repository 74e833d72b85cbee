#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace levylab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// counts[j][k]: number of distinct generation-j dyadic cells holding at least one
// record of magnitude index k. The coarse exponent of (j, k) is
// min(unit * (k + offset) / j, cap).
struct CoverCountTable {
  int dim = 1;
  double unit = 1.0;
  double offset = 0.0;
  double cap = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::uint64_t>> counts;

  double exponent(int j, int k) const;
  int j_max() const { return static_cast<int>(counts.size()) - 1; }
};

// Cellwise sum of tables from independent replicates (same dim, unit, offset, cap).
CoverCountTable pool_cover_counts(const std::vector<CoverCountTable>& tables);

struct SpectrumBin {
  double h = 0.0;
  bool defined = false;
  double dim_hat = 0.0;  // clipped to [0, dim]
  double dim_raw = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n_points = 0;  // (j, k) pairs used
  std::uint64_t mass = 0;    // total cell count over those pairs
};

struct SpectrumEstimate {
  double width = 0.05;
  int j1 = 0;
  int j2 = 0;
  std::vector<SpectrumBin> bins;
};

std::vector<double> bin_centers(double lo, double hi, double width);

// For each bin centre h, collects the pairs (j, k), j in [j1, j2], with
// |exponent(j,k) - h| <= max(width/2, unit/(2j)) and regresses log2 counts[j][k]
// on the effective generation unit*(k+offset)/h. Bins with fewer than 3 pairs are
// undefined.
SpectrumEstimate estimate_spectrum(const CoverCountTable& table, const std::vector<double>& centers,
                                   double width, int j1, int j2);

}  // namespace levylab
