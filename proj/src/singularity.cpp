#include "levylab/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace levylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_window(double size, std::pair<int, int> w) {
  return size <= 1.0 && size >= std::exp2(-w.second) && size <= std::exp2(-w.first);
}

}  // namespace

ResolutionSet build_limsup_set(const JumpSet& jumps, const SizeFunction& phi,
                               std::pair<int, int> j_window) {
  std::vector<Interval> stack;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double s = jumps.sizes[i];
    if (!in_window(s, j_window)) continue;
    const double r = phi(s);
    if (!(r > 0)) continue;
    Interval x{jumps.times[i] - r, jumps.times[i] + r};
    // Centres arrive sorted, so every stacked interval starts left of x's centre;
    // pop all stacked intervals that reach into x.
    while (!stack.empty() && stack.back().hi > x.lo) {
      x.lo = std::min(x.lo, stack.back().lo);
      x.hi = std::max(x.hi, stack.back().hi);
      stack.pop_back();
    }
    stack.push_back(x);
  }
  ResolutionSet out(jumps.T);
  for (Interval x : stack) {
    x.lo = std::max(x.lo, 0.0);
    x.hi = std::min(x.hi, jumps.T);
    if (x.hi > x.lo) out.push_back_sorted(x);
  }
  out.j_lo = j_window.first;
  out.j_hi = j_window.second;
  std::ostringstream os;
  os << "jumps=" << std::hex << jumps.hash();
  out.provenance = os.str();
  return out;
}

ResolutionSet build_limsup_set_by_shells(std::shared_ptr<const LevyModel> model, double T,
                                         std::uint64_t seed, std::uint64_t replicate,
                                         const SizeFunction& phi, std::pair<int, int> j_window) {
  ResolutionSet acc(T);
  for (int k = std::max(0, j_window.first); k <= j_window.second; ++k) {
    const JumpSet shell = sample_shell(model, T, k, seed, replicate);
    acc = acc.unite(build_limsup_set(shell, phi, j_window));
  }
  acc.j_lo = j_window.first;
  acc.j_hi = j_window.second;
  return acc;
}

CoverCountTable levy_cover_counts(const JumpSet& jumps, int j_max, double cap) {
  CoverCountTable table;
  table.dim = 1;
  table.unit = 1.0;
  table.offset = 0.5;
  table.cap = cap;
  int k_max = 0;
  for (double s : jumps.sizes)
    if (s <= 1.0) k_max = std::max(k_max, RadialMeasure::shell_of(s));
  table.counts.assign(j_max + 1, std::vector<std::uint64_t>(k_max + 1, 0));
  std::vector<std::vector<long long>> last(j_max + 1, std::vector<long long>(k_max + 1, -1));
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double s = jumps.sizes[i];
    if (s > 1.0) continue;
    const int k = RadialMeasure::shell_of(s);
    const double u = jumps.times[i] / jumps.T;
    for (int j = 0; j <= j_max; ++j) {
      const auto cell = std::min(static_cast<long long>(std::ldexp(u, j)), (1LL << j) - 1);
      if (cell != last[j][k]) {
        last[j][k] = cell;
        ++table.counts[j][k];
      }
    }
  }
  return table;
}

std::size_t ExponentField::flagged() const {
  return static_cast<std::size_t>(std::count(insufficient.begin(), insufficient.end(), 1));
}

double ExponentField::median_h() const {
  std::vector<double> v;
  for (std::size_t i = 0; i < h_hat.size(); ++i)
    if (!insufficient[i]) v.push_back(h_hat[i]);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + mid));
}

ExponentField approximation_exponents(const JumpSet& jumps, std::size_t M, double size_lo,
                                      double size_hi, int cover_j_max) {
  if (M < 1024) throw std::invalid_argument("approximation_exponents: grid M must be >= 2^10");
  if (!(size_lo > 0) || !(size_hi > size_lo) || size_hi > 1.0)
    throw std::invalid_argument("approximation_exponents: size window must lie in (0, 1]");
  if (size_lo < effective_cutoff(jumps.eps_min) * (1 - 1e-12))
    throw std::invalid_argument("approximation_exponents: size window below the simulated cutoff");

  ExponentField f;
  f.T = jumps.T;
  f.size_lo = size_lo;
  f.size_hi = size_hi;
  f.cap = jumps.model ? jumps.model->holder_cap() : kInf;

  struct Group {
    std::vector<double> t;
    std::vector<double> L;  // log(1/size)
    double L_min = kInf;
  };
  std::map<int, Group> groups;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double s = jumps.sizes[i];
    if (s < size_lo || s > size_hi) continue;
    Group& g = groups[RadialMeasure::shell_of(s)];
    g.t.push_back(jumps.times[i]);
    g.L.push_back(-std::log(s));
    g.L_min = std::min(g.L_min, g.L.back());
  }

  f.t.resize(M);
  f.alpha_hat.resize(M);
  f.h_hat.resize(M);
  f.insufficient.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double t = (static_cast<double>(m) + 0.5) * f.T / static_cast<double>(M);
    double best = kInf;
    for (const auto& [shell, g] : groups) {
      const std::size_t pos = static_cast<std::size_t>(std::lower_bound(g.t.begin(), g.t.end(), t) - g.t.begin());
      for (std::size_t i = pos; i < g.t.size(); ++i) {
        const double d = g.t[i] - t;
        if (d >= 1.0) break;
        if (d == 0.0) continue;
        const double ld = -std::log(d);
        if (g.L_min / ld >= best) break;
        best = std::min(best, g.L[i] / ld);
      }
      for (std::size_t i = pos; i-- > 0;) {
        const double d = t - g.t[i];
        if (d >= 1.0) break;
        if (d == 0.0) continue;
        const double ld = -std::log(d);
        if (g.L_min / ld >= best) break;
        best = std::min(best, g.L[i] / ld);
      }
    }
    f.t[m] = t;
    f.alpha_hat[m] = best;
    f.insufficient[m] = std::isinf(best) ? 1 : 0;
    f.h_hat[m] = std::min(best, f.cap);
  }
  if (cover_j_max > 0) f.cover = levy_cover_counts(jumps, cover_j_max, f.cap);
  return f;
}

SpectrumEstimate estimate_spectrum(const ExponentField& field, const std::vector<double>& centers,
                                   double width, int j1, int j2) {
  if (field.cover.counts.empty())
    throw std::invalid_argument("estimate_spectrum: exponent field has no cover-count table");
  return estimate_spectrum(field.cover, centers, width, j1, j2);
}

std::vector<ResolutionSet> modulus_approximants(const JumpSet& jumps, const Modulus& w, int q_max,
                                                std::pair<int, int> j_window) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  std::vector<ResolutionSet> out;
  for (int q = 1; q <= q_max; ++q) {
    const double scale = std::pow(w.kappa1(), q);
    out.push_back(build_limsup_set(jumps, [&](double r) { return w.inverse(r / scale); }, j_window));
  }
  return out;
}

ResolutionSet modulus_exceptional_set(const JumpSet& jumps, const Modulus& w, int q_max,
                                      std::pair<int, int> j_window) {
  ResolutionSet out = intersect_independent(modulus_approximants(jumps, w, q_max, j_window));
  for (std::size_t i = 0; i < jumps.size(); ++i)
    if (in_window(jumps.sizes[i], j_window) && out.contains(jumps.times[i]))
      out.excluded_points.push_back(jumps.times[i]);
  std::sort(out.excluded_points.begin(), out.excluded_points.end());
  out.j_lo = j_window.first;
  out.j_hi = j_window.second;
  return out;
}

ResolutionSet intersect_independent(const std::vector<ResolutionSet>& sets) {
  if (sets.empty()) throw std::invalid_argument("intersect_independent: no sets");
  ResolutionSet acc = sets.front();
  for (std::size_t i = 1; i < sets.size(); ++i) acc = acc.intersect(sets[i]);
  return acc;
}

}  // namespace levylab
