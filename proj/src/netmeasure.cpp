#include "levylab/netmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace levylab {

namespace {

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : x;
}

struct Solver {
  const std::vector<Interval>& iv;
  const GaugeFunction& g;
  int c;
  int J;
  bool full_cube_shortcut;
  std::vector<Cube> chosen;

  double solve(int gen, std::int64_t idx, std::size_t ia, std::size_t ib) {
    const double diam = std::pow(static_cast<double>(c), -gen);
    const double a = static_cast<double>(idx) * diam, b = static_cast<double>(idx + 1) * diam;
    // intervals with hi > a and lo < b meet [a, b)
    auto first = std::upper_bound(iv.begin() + ia, iv.begin() + ib, a,
                                  [](double v, const Interval& x) { return v < x.hi; });
    auto last = std::lower_bound(first, iv.begin() + ib, b,
                                 [](const Interval& x, double v) { return x.lo < v; });
    if (first == last) return 0.0;
    const double own = g(diam);
    const bool covered = (last - first == 1) && first->lo <= a && first->hi >= b;
    if (gen == J || (covered && full_cube_shortcut)) {
      chosen.push_back({gen, idx});
      return own;
    }
    const std::size_t mark = chosen.size();
    const auto na = static_cast<std::size_t>(first - iv.begin());
    const auto nb = static_cast<std::size_t>(last - iv.begin());
    double children = 0.0;
    for (int k = 0; k < c; ++k) children += solve(gen + 1, idx * c + k, na, nb);
    if (own <= children) {
      chosen.resize(mark);
      chosen.push_back({gen, idx});
      return own;
    }
    return children;
  }
};

struct Enumerator {
  const std::vector<Interval>& iv;
  const GaugeFunction& g;
  int c;
  int J;

  bool meets(double a, double b) const {
    for (const auto& x : iv)
      if (x.hi > a && x.lo < b) return true;
    return false;
  }

  // Costs of all covers of the set inside cube (gen, idx); empty cube -> {0}.
  std::vector<double> covers(int gen, std::int64_t idx) const {
    const double diam = std::pow(static_cast<double>(c), -gen);
    const double a = static_cast<double>(idx) * diam, b = static_cast<double>(idx + 1) * diam;
    if (!meets(a, b)) return {0.0};
    std::vector<double> out{g(diam)};
    if (gen == J) return out;
    std::vector<double> acc{0.0};
    for (int k = 0; k < c; ++k) {
      const auto child = covers(gen + 1, idx * c + k);
      if (acc.size() * child.size() > (std::size_t{1} << 22))
        throw std::length_error("net_measure_exhaustive: too many covers");
      std::vector<double> next;
      next.reserve(acc.size() * child.size());
      for (double x : acc)
        for (double y : child) next.push_back(x + y);
      acc = std::move(next);
    }
    out.insert(out.end(), acc.begin(), acc.end());
    return out;
  }
};

}  // namespace

double net_measure_exhaustive(const ResolutionSet& set, const GaugeFunction& g, int c, int J) {
  if (c < 2) throw std::invalid_argument("net_measure_exhaustive: base must be >= 2");
  const int root = root_generation(g, c);
  if (J < root) throw std::invalid_argument("net_measure_exhaustive: depth below the first admissible generation");
  if (g.is_zero()) return 0.0;
  Enumerator e{set.intervals(), g, c, J};
  const double root_diam = std::pow(static_cast<double>(c), -root);
  const auto n_root = static_cast<std::int64_t>(std::ceil(snap(set.horizon() / root_diam)));
  double total = 0.0;
  for (std::int64_t k = 0; k < n_root; ++k) {
    const auto all = e.covers(root, k);
    total += *std::min_element(all.begin(), all.end());
  }
  return total;
}

int root_generation(const GaugeFunction& g, int c) {
  int j = 0;
  while (std::pow(static_cast<double>(c), -j) > g.epsilon() * (1 + 1e-12)) ++j;
  return j;
}

NetMeasureResult net_measure_dp(const ResolutionSet& set, const GaugeFunction& g, int c, int J) {
  if (c < 2) throw std::invalid_argument("net_measure_dp: base must be >= 2");
  const int root = root_generation(g, c);
  if (J < root) throw std::invalid_argument("net_measure_dp: depth below the first admissible generation");
  NetMeasureResult out;
  out.cover.base = c;
  out.cover.depth = J;
  out.cover.root_generation = root;
  if (g.is_zero()) return out;
  // Intervals beyond [0, T] are clipped by construction; root cells cover [0, T].
  Solver s{set.intervals(), g, c, J, g.ratio_nonincreasing(1), {}};
  const double root_diam = std::pow(static_cast<double>(c), -root);
  const auto n_root = static_cast<std::int64_t>(std::ceil(snap(set.horizon() / root_diam)));
  for (std::int64_t k = 0; k < n_root; ++k) out.value += s.solve(root, k, 0, set.size());
  out.cover.cubes = std::move(s.chosen);
  out.cover.cost = out.value;
  return out;
}

std::uint64_t count_cells(const ResolutionSet& set, int c, int j) {
  const double scale = std::pow(static_cast<double>(c), j);
  std::uint64_t n = 0;
  long double last = -1;
  for (const auto& x : set.intervals()) {
    const double lo = snap(x.lo * scale), hi = snap(x.hi * scale);
    long double kmin = std::floor(lo), kmax = std::ceil(hi) - 1;
    kmin = std::max(kmin, last + 1);
    if (kmax >= kmin) {
      n += static_cast<std::uint64_t>(kmax - kmin + 1);
      last = kmax;
    }
  }
  return n;
}

LineFit box_dimension(const ResolutionSet& set, int c, std::pair<int, int> j_range) {
  if (set.empty()) throw std::invalid_argument("box_dimension: empty set");
  std::vector<double> x, y;
  for (int j = j_range.first; j <= j_range.second; ++j) {
    const auto n = count_cells(set, c, j);
    if (n == 0) continue;
    x.push_back(j);
    y.push_back(std::log(static_cast<double>(n)) / std::log(static_cast<double>(c)));
  }
  if (x.size() < 3) throw std::invalid_argument("box_dimension: fewer than 3 usable scales");
  return fit_line(x, y);
}

LineFit cover_dimension(const ResolutionSet& set, int c, std::pair<int, int> j_range) {
  std::map<int, std::uint64_t> hist;
  const double lc = std::log(static_cast<double>(c));
  for (const auto& x : set.intervals()) {
    const int j = static_cast<int>(std::ceil(snap(-std::log(x.length()) / lc)));
    ++hist[j];
  }
  std::vector<double> xs, ys;
  for (int j = j_range.first; j <= j_range.second; ++j) {
    auto it = hist.find(j);
    if (it == hist.end()) continue;
    xs.push_back(j);
    ys.push_back(std::log(static_cast<double>(it->second)) / lc);
  }
  if (xs.size() < 3) throw std::invalid_argument("cover_dimension: fewer than 3 usable scales");
  return fit_line(xs, ys);
}

double hausdorff_g_upper_bound(const ResolutionSet& set, const GaugeFunction& g, int J, int c) {
  if (g.is_zero()) return 0.0;
  const double scale = std::pow(static_cast<double>(c), J);
  double s = 0.0;
  for (const auto& x : set.intervals()) {
    const double len = x.length();
    const double n = std::max(1.0, std::ceil(snap(len * scale)));
    s += n * g(len / n);
  }
  return s;
}

double grid_cover_cost(const ResolutionSet& set, const GaugeFunction& g, int c, int J) {
  return static_cast<double>(count_cells(set, c, J)) * g(std::pow(static_cast<double>(c), -J));
}

}  // namespace levylab
