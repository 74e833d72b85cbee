#include "levylab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levylab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

double CoverCountTable::exponent(int j, int k) const {
  return std::min(unit * (k + offset) / j, cap);
}

CoverCountTable pool_cover_counts(const std::vector<CoverCountTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("pool_cover_counts: no tables");
  CoverCountTable out = tables.front();
  for (std::size_t t = 1; t < tables.size(); ++t) {
    const auto& x = tables[t];
    if (x.dim != out.dim || x.unit != out.unit || x.offset != out.offset || x.cap != out.cap)
      throw std::invalid_argument("pool_cover_counts: incompatible tables");
    if (x.counts.size() > out.counts.size()) out.counts.resize(x.counts.size());
    for (std::size_t j = 0; j < x.counts.size(); ++j) {
      auto& row = out.counts[j];
      if (x.counts[j].size() > row.size()) row.resize(x.counts[j].size(), 0);
      for (std::size_t k = 0; k < x.counts[j].size(); ++k) row[k] += x.counts[j][k];
    }
  }
  return out;
}

std::vector<double> bin_centers(double lo, double hi, double width) {
  std::vector<double> c;
  const int n = static_cast<int>(std::floor((hi - lo) / width + 1e-9));
  for (int i = 0; i <= n; ++i) c.push_back(lo + i * width);
  return c;
}

SpectrumEstimate estimate_spectrum(const CoverCountTable& table, const std::vector<double>& centers,
                                   double width, int j1, int j2) {
  if (j1 < 1 || j2 < j1) throw std::invalid_argument("estimate_spectrum: bad j range");
  if (j2 > table.j_max()) throw std::invalid_argument("estimate_spectrum: j range beyond table");
  SpectrumEstimate est;
  est.width = width;
  est.j1 = j1;
  est.j2 = j2;
  for (double h : centers) {
    SpectrumBin bin;
    bin.h = h;
    std::vector<double> x, y;
    if (h > 0) {
      for (int j = j1; j <= j2; ++j) {
        const double tol = std::max(0.5 * width, table.unit / (2.0 * j));
        const auto& row = table.counts[j];
        for (int k = 0; k < static_cast<int>(row.size()); ++k) {
          if (row[k] == 0) continue;
          if (std::abs(table.exponent(j, k) - h) > tol + 1e-12) continue;
          x.push_back(table.unit * (k + table.offset) / h);
          y.push_back(std::log2(static_cast<double>(row[k])));
          bin.mass += row[k];
        }
      }
    }
    bin.n_points = x.size();
    bool spread = false;
    for (double v : x) spread |= v != x.front();
    if (x.size() >= 3 && spread) {
      const LineFit f = fit_line(x, y);
      bin.defined = true;
      bin.dim_raw = f.slope;
      bin.dim_hat = std::clamp(f.slope, 0.0, static_cast<double>(table.dim));
      bin.intercept = f.intercept;
      bin.r2 = f.r2;
    }
    est.bins.push_back(bin);
  }
  return est;
}

}  // namespace levylab
