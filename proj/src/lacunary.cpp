#include "levylab/lacunary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "levylab/rng.hpp"

namespace levylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t axis_coord(std::uint64_t flat, int j, int c) {
  return (flat >> (static_cast<unsigned>(j) * c)) & ((std::uint64_t{1} << j) - 1);
}

void corner(std::uint64_t flat, int j, int d, double* out) {
  for (int c = 0; c < d; ++c) out[c] = std::ldexp(static_cast<double>(axis_coord(flat, j, c)), -j);
}

double wrap_diff(double a, double b) {
  double x = std::abs(a - b);
  x -= std::floor(x);
  return std::min(x, 1.0 - x);
}

}  // namespace

std::uint64_t LacunaryModel::m(int i, int j) const {
  if (i < 1 || i > directions()) throw std::invalid_argument("direction index out of range");
  std::uint64_t v = 0;
  if (const auto* p = std::get_if<PowerCount>(&counts)) {
    v = static_cast<std::uint64_t>(std::floor(std::exp2(p->eta * j)));
  } else if (const auto* c = std::get_if<ConstantCount>(&counts)) {
    v = c->m;
  } else {
    const auto& t = std::get<TableCount>(counts).table;
    v = j < static_cast<int>(t.size()) ? t[j] : 0;
  }
  const double cap = std::exp2(static_cast<double>(d) * j);
  if (static_cast<double>(v) > cap) v = static_cast<std::uint64_t>(cap);
  return v;
}

std::string LacunaryModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "lacunary(d=" << d << ",h_low=" << h_low << ",counts=";
  if (const auto* p = std::get_if<PowerCount>(&counts)) os << "power(" << p->eta << ")";
  else if (const auto* c = std::get_if<ConstantCount>(&counts)) os << "constant(" << c->m << ")";
  else {
    os << "table(";
    for (auto v : std::get<TableCount>(counts).table) os << v << ";";
    os << ")";
  }
  os << ",seed=" << seed << ")";
  return os.str();
}

std::uint64_t CoefficientSupport::occupied_at(int j) const {
  std::uint64_t n = 0;
  for (const auto& dir : cubes) n += dir[j].size();
  return n;
}

std::size_t CoefficientSupport::total() const {
  std::size_t n = 0;
  for (const auto& dir : cubes)
    for (const auto& v : dir) n += v.size();
  return n;
}

CoefficientSupport sample_support(const LacunaryModel& model, int j_max, std::uint64_t replicate) {
  if (j_max < 4) throw std::invalid_argument("sample_support: j_max must be >= 4");
  if (model.d < 1 || model.d * j_max > 62) throw std::invalid_argument("sample_support: d * j_max too large");
  const int nd = model.directions();
  double draws = 0;
  for (int i = 1; i <= nd; ++i)
    for (int j = 0; j <= j_max; ++j) draws += static_cast<double>(model.m(i, j));
  if (draws > kMaxSupportDraws) throw std::length_error("sample_support: more than 1e8 coefficients requested");

  CoefficientSupport s;
  s.d = model.d;
  s.j_max = j_max;
  s.cubes.assign(nd, std::vector<std::vector<std::uint64_t>>(j_max + 1));
  s.drawn.assign(nd, std::vector<std::uint64_t>(j_max + 1, 0));
  for (int i = 1; i <= nd; ++i) {
    for (int j = 0; j <= j_max; ++j) {
      const std::uint64_t m = model.m(i, j);
      s.drawn[i - 1][j] = m;
      if (m == 0) continue;
      Engine eng = substream(model.seed, tag::support + replicate, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j));
      auto& out = s.cubes[i - 1][j];
      out.reserve(m);
      for (std::uint64_t n = 0; n < m; ++n) {
        std::uint64_t flat = 0;
        for (int c = 0; c < model.d; ++c) {
          // uniform position X in [0,1); its generation-j cube is the top j bits
          const std::uint64_t k = j == 0 ? 0 : (eng() >> (64 - j));
          flat |= k << (static_cast<unsigned>(j) * c);
        }
        out.push_back(flat);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
  }
  return s;
}

double occupancy_probability(int d, int j, std::uint64_t m) {
  const double p = std::exp2(-static_cast<double>(d) * j);
  if (p >= 1.0) return m > 0 ? 1.0 : 0.0;
  return -std::expm1(static_cast<double>(m) * std::log1p(-p));
}

ExponentEstimate h_g_lacunary(const LacunaryModel& model, const GaugeFunction& g) {
  const GaugeFunction gd = normalize_d(g, model.d);
  if (gd.is_zero()) return ExponentEstimate::point(kInf);
  const int d = model.d;
  if (const auto* p = std::get_if<PowerCount>(&model.counts); p && gd.power_exponent()) {
    const double hbar = d * model.h_low / p->eta;
    return ExponentEstimate::point(hbar * *gd.power_exponent() / d);
  }
  if (std::holds_alternative<TableCount>(model.counts)) {
    // finitely many coefficients: the series is a finite sum
    return ExponentEstimate::point(kInf);
  }
  if (std::holds_alternative<ConstantCount>(model.counts)) {
    if (std::get<ConstantCount>(model.counts).m == 0) return ExponentEstimate::point(kInf);
    // sum_j g_d(2^{-h_low j / h}) converges for every h or for none
    std::vector<double> t;
    for (int j = 16; j <= 64; ++j) t.push_back(std::log2(gd(std::exp2(-j))));
    const Verdict v = classify_series(t, 16).verdict;
    if (v == Verdict::Converges) return ExponentEstimate::point(kInf);
    if (v == Verdict::Diverges) return ExponentEstimate::point(0.0);
    return {0.0, kInf};
  }
  const double eps = gd.epsilon();
  auto classify = [&](double h) {
    const int j0 = std::max(8, static_cast<int>(std::ceil(h / model.h_low * std::log2(1.0 / eps))));
    std::vector<double> t;
    for (int j = j0; j <= j0 + 48; ++j) {
      const double r = std::exp2(-model.h_low * j / h);
      const double gv = r > 0 ? gd(r) : 0.0;
      double logm = std::log2(static_cast<double>(model.directions()));
      logm += std::log2(static_cast<double>(std::max<std::uint64_t>(model.m(1, j), 0)));
      t.push_back((gv > 0 ? std::log2(gv) : -kInf) + logm);
    }
    return classify_series(t, j0).verdict;
  };
  constexpr double h_min = 0.01, h_max = 50.0;
  if (classify(h_min) == Verdict::Diverges) return ExponentEstimate::point(0.0);
  if (classify(h_max) == Verdict::Converges) return ExponentEstimate::point(kInf);
  return locate_threshold(classify, h_min, h_max, Verdict::Converges);
}

ExponentEstimate hbar_exponent(const LacunaryModel& model) {
  if (const auto* p = std::get_if<PowerCount>(&model.counts))
    return ExponentEstimate::point(model.d * model.h_low / p->eta);
  return h_g_lacunary(model, GaugeFunction::power(model.d, model.d));
}

double torus_distance(const double* x, const double* y, int d) {
  double m = 0.0;
  for (int c = 0; c < d; ++c) m = std::max(m, wrap_diff(x[c], y[c]));
  return m;
}

double TorusExponentField::median_h() const {
  std::vector<double> v;
  for (std::size_t i = 0; i < h_hat.size(); ++i)
    if (!insufficient[i]) v.push_back(h_hat[i]);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> TorusExponentField::point(std::size_t index) const {
  std::vector<double> x(d);
  for (int c = 0; c < d; ++c) {
    x[c] = (static_cast<double>(index % M) + 0.5) / static_cast<double>(M);
    index /= M;
  }
  return x;
}

namespace {

CoverCountTable lacunary_cover_counts(const CoefficientSupport& s, const LacunaryModel& model,
                                      int j_max, double cap) {
  CoverCountTable table;
  table.dim = s.d;
  table.unit = model.h_low;
  table.offset = 0.0;
  table.cap = cap;
  table.counts.assign(j_max + 1, std::vector<std::uint64_t>(s.j_max + 1, 0));
  std::vector<std::uint64_t> buf;
  for (int j = 1; j <= j_max; ++j) {
    for (int k = j; k <= s.j_max; ++k) {
      buf.clear();
      for (const auto& dir : s.cubes)
        for (std::uint64_t flat : dir[k]) {
          std::uint64_t anc = 0;
          for (int c = 0; c < s.d; ++c)
            anc |= (axis_coord(flat, k, c) >> (k - j)) << (static_cast<unsigned>(j) * c);
          buf.push_back(anc);
        }
      std::sort(buf.begin(), buf.end());
      table.counts[j][k] = static_cast<std::uint64_t>(std::unique(buf.begin(), buf.end()) - buf.begin());
    }
  }
  return table;
}

}  // namespace

TorusExponentField torus_exponents(const CoefficientSupport& support, const LacunaryModel& model,
                                   std::size_t M, std::pair<int, int> gen_window, int cover_j_max) {
  if (M < 2) throw std::invalid_argument("torus_exponents: grid too small");
  if (std::ldexp(1.0, -gen_window.second) < 1.0 / static_cast<double>(M) && model.d == 1 &&
      static_cast<double>(M) < std::ldexp(1.0, gen_window.second))
    throw std::invalid_argument("torus_exponents: grid coarser than the deepest generation");
  const int d = support.d;
  TorusExponentField f;
  f.d = d;
  f.M = M;
  f.h_low = model.h_low;
  f.h_bar = hbar_exponent(model).value();
  f.gen_window = gen_window;
  std::size_t n_points = 1;
  for (int c = 0; c < d; ++c) n_points *= M;
  f.alpha_hat.assign(n_points, kInf);

  const int g_lo = std::max(0, gen_window.first), g_hi = std::min(support.j_max, gen_window.second);
  for (int j = g_lo; j <= g_hi; ++j) {
    if (j == 0) continue;  // log2(1/dist) with the single generation-0 corner carries no scale
    const double L = model.h_low * j;
    if (d == 1) {
      std::vector<double> pos;
      for (const auto& dir : support.cubes)
        for (std::uint64_t flat : dir[j]) pos.push_back(std::ldexp(static_cast<double>(flat), -j));
      if (pos.empty()) continue;
      std::sort(pos.begin(), pos.end());
      pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
      const std::size_t n = pos.size();
      for (std::size_t m = 0; m < M; ++m) {
        const double x = (static_cast<double>(m) + 0.5) / static_cast<double>(M);
        const std::size_t p = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), x) - pos.begin());
        double best_dist = kInf;
        for (int off = -2; off <= 1; ++off) {
          const std::size_t q = (p + n + static_cast<std::size_t>(off + static_cast<int>(n) * 4)) % n;
          const double dist = wrap_diff(x, pos[q]);
          if (dist > 0 && dist < 0.5) best_dist = std::min(best_dist, dist);
        }
        if (std::isfinite(best_dist)) f.alpha_hat[m] = std::min(f.alpha_hat[m], L / -std::log2(best_dist));
      }
    } else {
      std::vector<double> corners;
      for (const auto& dir : support.cubes)
        for (std::uint64_t flat : dir[j]) {
          const std::size_t at = corners.size();
          corners.resize(at + d);
          corner(flat, j, d, corners.data() + at);
        }
      const std::size_t n = corners.size() / d;
      for (std::size_t idx = 0; idx < n_points; ++idx) {
        const auto x = f.point(idx);
        double best_dist = kInf;
        for (std::size_t q = 0; q < n; ++q) {
          const double dist = torus_distance(x.data(), corners.data() + q * d, d);
          if (dist > 0 && dist < 0.5) best_dist = std::min(best_dist, dist);
        }
        if (std::isfinite(best_dist)) f.alpha_hat[idx] = std::min(f.alpha_hat[idx], L / -std::log2(best_dist));
      }
    }
  }
  f.h_hat.resize(n_points);
  f.insufficient.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    f.insufficient[i] = std::isinf(f.alpha_hat[i]) ? 1 : 0;
    f.h_hat[i] = std::clamp(f.alpha_hat[i], f.h_low, f.h_bar);
  }
  if (cover_j_max > 0) f.cover = lacunary_cover_counts(support, model, cover_j_max, f.h_bar);
  return f;
}

SpectrumEstimate lacunary_spectrum(const TorusExponentField& field, const std::vector<double>& centers,
                                   double width, int j1, int j2) {
  if (field.cover.counts.empty())
    throw std::invalid_argument("lacunary_spectrum: field has no cover-count table");
  return estimate_spectrum(field.cover, centers, width, j1, j2);
}

double TorusRaster::volume() const {
  if (cells.empty()) return 0.0;
  std::size_t n = 0;
  for (auto v : cells) n += v;
  return static_cast<double>(n) / static_cast<double>(cells.size());
}

TorusRaster TorusRaster::intersect(const TorusRaster& other) const {
  if (d != other.d || depth != other.depth) throw std::invalid_argument("raster shapes differ");
  TorusRaster out = *this;
  for (std::size_t i = 0; i < cells.size(); ++i) out.cells[i] = cells[i] & other.cells[i];
  return out;
}

LineFit TorusRaster::box_dimension(std::pair<int, int> j_range) const {
  std::vector<double> x, y;
  const std::size_t side = std::size_t{1} << depth;
  for (int j = j_range.first; j <= std::min(j_range.second, depth); ++j) {
    const int shift = depth - j;
    const std::size_t coarse_side = std::size_t{1} << j;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(std::pow(coarse_side, d)), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!cells[i]) continue;
      std::size_t rest = i, coarse = 0, mul = 1;
      for (int c = 0; c < d; ++c) {
        coarse += ((rest % side) >> shift) * mul;
        rest /= side;
        mul *= coarse_side;
      }
      seen[coarse] = 1;
    }
    std::size_t n = 0;
    for (auto v : seen) n += v;
    if (n == 0) continue;
    x.push_back(j);
    y.push_back(std::log2(static_cast<double>(n)));
  }
  if (x.size() < 3) throw std::invalid_argument("raster box dimension: fewer than 3 usable scales");
  return fit_line(x, y);
}

TorusRaster lacunary_limsup_set(const CoefficientSupport& support,
                                const std::function<double(double)>& phi,
                                std::pair<int, int> gen_window, int depth) {
  const int d = support.d;
  if (d * depth > 28) throw std::length_error("raster depth too large");
  TorusRaster r;
  r.d = d;
  r.depth = depth;
  const std::int64_t N = std::int64_t{1} << depth;
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= static_cast<std::size_t>(N);
  r.cells.assign(total, 0);
  std::vector<double> x(d);
  std::vector<std::int64_t> lo(d), hi(d);
  const int g_lo = std::max(0, gen_window.first), g_hi = std::min(support.j_max, gen_window.second);
  for (int j = g_lo; j <= g_hi; ++j) {
    const double rho = phi(std::ldexp(1.0, -j));
    if (!(rho > 0)) continue;
    for (const auto& dir : support.cubes)
      for (std::uint64_t flat : dir[j]) {
        corner(flat, j, d, x.data());
        bool all = true;
        for (int c = 0; c < d; ++c) {
          // centres (m + 1/2)/N strictly within rho of x[c]
          lo[c] = static_cast<std::int64_t>(std::floor(N * (x[c] - rho) - 0.5)) + 1;
          hi[c] = static_cast<std::int64_t>(std::ceil(N * (x[c] + rho) - 0.5)) - 1;
          if (rho < 0.5 && hi[c] - lo[c] + 1 < N) all = false;
          else { lo[c] = 0; hi[c] = N - 1; }
        }
        (void)all;
        if (d == 1) {
          for (std::int64_t m = lo[0]; m <= hi[0]; ++m) r.cells[static_cast<std::size_t>(((m % N) + N) % N)] = 1;
        } else {
          for (std::int64_t a = lo[0]; a <= hi[0]; ++a)
            for (std::int64_t b = lo[1]; b <= hi[1]; ++b) {
              std::size_t idx = static_cast<std::size_t>(((a % N) + N) % N) +
                                static_cast<std::size_t>(((b % N) + N) % N) * static_cast<std::size_t>(N);
              if (d > 2) throw std::invalid_argument("raster supports d <= 2");
              r.cells[idx] = 1;
            }
        }
      }
  }
  return r;
}

std::vector<TorusRaster> lacunary_modulus_approximants(const CoefficientSupport& support,
                                                       const LacunaryModel& model, const Modulus& w,
                                                       int q_max, std::pair<int, int> gen_window,
                                                       int depth) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  if (!w.is_little_o_power(model.h_low))
    throw std::invalid_argument("modulus is not o(delta^h_low) on its grid");
  std::vector<TorusRaster> out;
  for (int q = 1; q <= q_max; ++q) {
    const double scale = std::pow(w.kappa1(), q);
    const double h = model.h_low;
    out.push_back(lacunary_limsup_set(
        support, [&](double r) { return w.inverse(std::pow(r, h) / scale); }, gen_window, depth));
  }
  return out;
}

TorusRaster lacunary_modulus_set(const CoefficientSupport& support, const LacunaryModel& model,
                                 const Modulus& w, int q_max, std::pair<int, int> gen_window,
                                 int depth) {
  auto parts = lacunary_modulus_approximants(support, model, w, q_max, gen_window, depth);
  TorusRaster acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc.intersect(parts[i]);
  return acc;
}

namespace {

double profile_value(bool wavelet_axis, double u) {
  const double g = std::exp(-0.5 * u * u);
  return wavelet_axis ? (1.0 - u * u) * g : g;
}

}  // namespace

std::vector<double> synthesize_partial_sum(const CoefficientSupport& support,
                                           const LacunaryModel& model, const std::string& profile,
                                           int j_max, std::size_t M) {
  if (profile != "mexican_hat") throw std::invalid_argument("unknown profile '" + profile + "'");
  const int d = support.d;
  if (d > 2) throw std::invalid_argument("synthesis supports d <= 2");
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= M;
  std::vector<double> field(total, 0.0);
  const double Md = static_cast<double>(M);
  std::vector<double> x(d);
  for (int i = 1; i <= static_cast<int>(support.cubes.size()); ++i) {
    for (int j = 0; j <= std::min(j_max, support.j_max); ++j) {
      const double amp = std::exp2(-model.h_low * j);
      const double scale = std::ldexp(1.0, j);
      const double reach = std::min(8.0, 0.5 * scale);  // in units of 2^{-j}
      for (std::uint64_t flat : support.cubes[i - 1][j]) {
        corner(flat, j, d, x.data());
        std::vector<std::vector<std::pair<std::size_t, double>>> axis(d);
        for (int c = 0; c < d; ++c) {
          const bool wav = (i >> c) & 1;
          const auto m_lo = static_cast<std::int64_t>(std::ceil((x[c] - reach / scale) * Md - 0.5));
          const auto m_hi = static_cast<std::int64_t>(std::floor((x[c] + reach / scale) * Md - 0.5));
          for (std::int64_t m = m_lo; m <= m_hi && m - m_lo < static_cast<std::int64_t>(M); ++m) {
            const double p = (static_cast<double>(m) + 0.5) / Md;
            const double u = (p - x[c]) * scale;
            if (std::abs(u) > reach) continue;
            const auto wrapped = static_cast<std::size_t>(((m % static_cast<std::int64_t>(M)) +
                                                           static_cast<std::int64_t>(M)) %
                                                          static_cast<std::int64_t>(M));
            axis[c].emplace_back(wrapped, profile_value(wav, u));
          }
        }
        if (d == 1) {
          for (const auto& [m, v] : axis[0]) field[m] += amp * v;
        } else {
          for (const auto& [a, va] : axis[0])
            for (const auto& [b, vb] : axis[1]) field[a + b * M] += amp * va * vb;
        }
      }
    }
  }
  return field;
}

double partial_sum_bound(const CoefficientSupport& support, const LacunaryModel& model, int j_max) {
  double s = 0.0;
  for (int j = 0; j <= std::min(j_max, support.j_max); ++j)
    s += static_cast<double>(support.occupied_at(j)) * std::exp2(-model.h_low * j);
  return s;
}

}  // namespace levylab
