#include "levylab/measures.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace levylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double quad(const std::function<double(double)>& f, double a, double b, int shell) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  // integrate on [0, 1]; the error heuristics misbehave on very short raw intervals
  const double w = b - a;
  auto h = [&](double t) { return f(a + w * t); };
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, 0.0, 1.0, 15, 1e-11, &err);
  v *= w;
  err *= w;
  if (!std::isfinite(v) || err > 1e-7 * std::abs(v) + 1e-300) {
    std::ostringstream os;
    os << "quadrature did not converge on shell " << shell << " (value " << v << ", error "
       << err << ")";
    throw QuadratureError(os.str(), shell);
  }
  return v;
}

// sum_{k=lo}^{hi} k^{-b}, exact for short ranges, Euler-Maclaurin beyond.
double power_sum(double lo, double hi, double b) {
  if (hi < lo) return 0.0;
  const double exact_limit = 2e6;
  double s = 0.0;
  if (hi - lo < exact_limit) {
    for (double k = hi; k >= lo; k -= 1.0) s += std::pow(k, -b);
    return s;
  }
  const double m = lo + 1000.0;
  for (double k = m - 1.0; k >= lo; k -= 1.0) s += std::pow(k, -b);
  auto f = [b](double x) { return std::pow(x, -b); };
  auto f1 = [b](double x) { return -b * std::pow(x, -b - 1.0); };
  auto f3 = [b](double x) { return -b * (b + 1.0) * (b + 2.0) * std::pow(x, -b - 3.0); };
  const double integral =
      b == 1.0 ? std::log(hi / m) : (std::pow(hi, 1.0 - b) - std::pow(m, 1.0 - b)) / (1.0 - b);
  s += integral + 0.5 * (f(m) + f(hi)) + (f1(hi) - f1(m)) / 12.0 - (f3(hi) - f3(m)) / 720.0;
  return s;
}

// Atom index range [k_lo, k_hi] of AtomSeries atoms inside (lo, hi].
std::pair<double, double> atom_range(const AtomSeries& s, double lo, double hi) {
  auto r = [&](double k) { return std::pow(k, -s.a); };
  double k_lo = std::max(1.0, std::ceil(std::pow(hi, -1.0 / s.a)));
  double k_hi = lo > 0 ? std::ceil(std::pow(lo, -1.0 / s.a)) : kInf;
  if (k_lo < 9e15) {
    while (k_lo > 1.0 && r(k_lo - 1.0) <= hi) k_lo -= 1.0;
    while (r(k_lo) > hi) k_lo += 1.0;
  }
  if (std::isfinite(k_hi) && k_hi < 9e15) {
    while (r(k_hi) <= lo) k_hi -= 1.0;
    while (r(k_hi + 1.0) > lo) k_hi += 1.0;
  }
  return {k_lo, k_hi};
}

double shell_table_mass(int j) {
  const double jj = std::max(1, j);
  return std::exp2(2.0 * j) / (jj * jj);
}

}  // namespace

PiecewiseDensity PiecewiseDensity::builtin(const std::string& name,
                                           const std::vector<double>& p) {
  PiecewiseDensity d;
  d.name = name;
  d.params = p;
  if (name == "power") {
    if (p.size() != 2 || p[0] <= 0 || p[1] <= 0 || p[1] >= 2)
      throw std::invalid_argument("density 'power' needs {c > 0, alpha in (0,2)}");
    const double c = p[0], a = p[1];
    d.density = [c, a](double r) { return c * std::pow(r, -1.0 - a); };
  } else if (name == "power_log") {
    if (p.size() != 3 || p[0] <= 0 || p[1] <= 0 || p[1] >= 2)
      throw std::invalid_argument("density 'power_log' needs {c > 0, alpha in (0,2), p}");
    const double c = p[0], a = p[1], e = p[2];
    d.density = [c, a, e](double r) {
      return c * std::pow(r, -1.0 - a) * std::pow(1.0 + std::log(1.0 / r), e);
    };
  } else if (name == "shell_table_2j_over_j2") {
    if (!p.empty()) throw std::invalid_argument("density 'shell_table_2j_over_j2' takes no parameters");
    d.density = [](double r) {
      const int j = RadialMeasure::shell_of(r);
      return shell_table_mass(j) / std::exp2(-j - 1.0);
    };
  } else {
    throw std::invalid_argument("unknown built-in density '" + name + "'");
  }
  return d;
}

RadialMeasure::RadialMeasure() : v_(FiniteAtoms{}), r_max_(1.0), zero_(true) {}

RadialMeasure::RadialMeasure(Variant v, double r_max) : v_(std::move(v)), r_max_(r_max) {
  if (!(r_max_ > 0)) throw std::invalid_argument("r_max must be positive");
  std::visit(overloaded{
                 [&](const PowerLaw& p) {
                   if (!(p.c > 0) || !(p.alpha > 0 && p.alpha < 2))
                     throw std::invalid_argument("PowerLaw needs c > 0 and alpha in (0,2)");
                 },
                 [&](const AtomSeries& s) {
                   if (!(s.a > 0)) throw std::invalid_argument("AtomSeries needs a > 0");
                   // integral of r^2 sums k^{-2a-b}
                   if (!(2 * s.a + s.b > 1))
                     throw std::invalid_argument("AtomSeries violates the integrability of r^2");
                   r_max_ = 1.0;
                 },
                 [&](const FiniteAtoms& f) {
                   if (f.radius.size() != f.weight.size())
                     throw std::invalid_argument("FiniteAtoms: radius/weight size mismatch");
                   for (std::size_t i = 0; i < f.radius.size(); ++i)
                     if (!(f.radius[i] > 0) || !(f.weight[i] > 0))
                       throw std::invalid_argument("FiniteAtoms: atoms must be strictly positive");
                   zero_ = f.radius.empty();
                   r_max_ = f.radius.empty() ? 1.0
                                             : std::max(1.0, *std::max_element(f.radius.begin(),
                                                                               f.radius.end()));
                 },
                 [&](const PiecewiseDensity& d) {
                   if (!d.density) throw std::invalid_argument("PiecewiseDensity without density");
                   r_max_ = 1.0;
                 },
             },
             v_);
}

RadialMeasure RadialMeasure::power_law(double c, double alpha, double r_max) {
  return RadialMeasure(PowerLaw{c, alpha}, r_max);
}
RadialMeasure RadialMeasure::atom_series(double a, double b) {
  return RadialMeasure(AtomSeries{a, b});
}
RadialMeasure RadialMeasure::finite(std::vector<double> radius, std::vector<double> weight) {
  return RadialMeasure(FiniteAtoms{std::move(radius), std::move(weight)});
}
RadialMeasure RadialMeasure::density(const std::string& name, const std::vector<double>& params) {
  return RadialMeasure(PiecewiseDensity::builtin(name, params));
}

std::string RadialMeasure::kind() const {
  return std::visit(overloaded{[](const PowerLaw&) { return std::string("power_law"); },
                               [](const AtomSeries&) { return std::string("atom_series"); },
                               [](const FiniteAtoms&) { return std::string("finite"); },
                               [](const PiecewiseDensity&) { return std::string("density"); }},
                    v_);
}

std::string RadialMeasure::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const PowerLaw& p) {
                   os << "power_law(c=" << p.c << ",alpha=" << p.alpha << ",r_max=" << r_max_ << ")";
                 },
                 [&](const AtomSeries& s) { os << "atom_series(a=" << s.a << ",b=" << s.b << ")"; },
                 [&](const FiniteAtoms& f) {
                   os << "finite(";
                   for (std::size_t i = 0; i < f.radius.size(); ++i)
                     os << (i ? ";" : "") << f.radius[i] << ":" << f.weight[i];
                   os << ")";
                 },
                 [&](const PiecewiseDensity& d) {
                   os << "density(" << d.name;
                   for (double p : d.params) os << "," << p;
                   os << ")";
                 },
             },
             v_);
  return os.str();
}

int RadialMeasure::shell_of(double size) {
  if (size > 1.0) return -1;
  int j = static_cast<int>(std::floor(-std::log2(size)));
  // guard against rounding at shell edges
  while (j > 0 && size > std::exp2(-j)) --j;
  while (size <= std::exp2(-j - 1)) ++j;
  return j;
}

bool RadialMeasure::is_zero() const { return zero_; }

bool RadialMeasure::has_infinite_mass() const {
  return std::visit(overloaded{[](const PowerLaw&) { return true; },
                               [](const AtomSeries& s) { return s.b <= 1.0; },
                               [](const FiniteAtoms&) { return false; },
                               [](const PiecewiseDensity&) { return true; }},
                    v_);
}

bool RadialMeasure::has_flat_shells() const {
  if (auto* s = std::get_if<AtomSeries>(&v_)) return s->b == 1.0;
  return false;
}

double RadialMeasure::shell_mass(int j) const {
  if (j < 0) throw std::invalid_argument("shell index must be nonnegative");
  if (zero_) return 0.0;
  const double lo = std::exp2(-j - 1.0);
  const double hi = std::min(std::exp2(-static_cast<double>(j)), r_max_);
  return std::visit(
      overloaded{
          [&](const PowerLaw& p) {
            if (!(hi > lo)) return 0.0;
            return p.c / p.alpha * (std::pow(lo, -p.alpha) - std::pow(hi, -p.alpha));
          },
          [&](const AtomSeries& s) {
            auto [k_lo, k_hi] = atom_range(s, lo, hi);
            return power_sum(k_lo, k_hi, s.b);
          },
          [&](const FiniteAtoms& f) {
            double m = 0.0;
            for (std::size_t i = 0; i < f.radius.size(); ++i)
              if (f.radius[i] > lo && f.radius[i] <= hi) m += f.weight[i];
            return m;
          },
          [&](const PiecewiseDensity& d) { return quad(d.density, lo, hi, j); },
      },
      v_);
}

double RadialMeasure::log2_shell_mass(int j) const {
  if (const auto* p = std::get_if<PowerLaw>(&v_); p && r_max_ >= 1.0) {
    return std::log2(p->c / p->alpha) + p->alpha * j + std::log2(std::exp2(p->alpha) - 1.0);
  }
  if (const auto* d = std::get_if<PiecewiseDensity>(&v_);
      d && d->name == "shell_table_2j_over_j2") {
    const double jj = std::max(1, j);
    return 2.0 * j - 2.0 * std::log2(jj);
  }
  const double m = shell_mass(j);
  return m > 0 ? std::log2(m) : -kInf;
}

double RadialMeasure::big_mass() const {
  if (zero_ || r_max_ <= 1.0) return 0.0;
  return std::visit(overloaded{
                        [&](const PowerLaw& p) {
                          return p.c / p.alpha * (1.0 - std::pow(r_max_, -p.alpha));
                        },
                        [&](const FiniteAtoms& f) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < f.radius.size(); ++i)
                            if (f.radius[i] > 1.0) m += f.weight[i];
                          return m;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    v_);
}

double RadialMeasure::integrate(const std::function<double(double)>& f, double lo,
                                double hi) const {
  if (zero_ || !(hi > lo)) return 0.0;
  if (!(lo > 0)) throw std::invalid_argument("integrate: lower limit must be positive");
  hi = std::min(hi, r_max_);
  return std::visit(
      overloaded{
          [&](const PowerLaw& p) {
            auto g = [&](double r) { return f(r) * p.c * std::pow(r, -1.0 - p.alpha); };
            double s = 0.0;
            if (hi > 1.0) s += quad(g, std::max(lo, 1.0), hi, -1);
            for (int j = 0; std::exp2(-j) > lo; ++j) {
              const double a = std::max(lo, std::exp2(-j - 1.0));
              const double b = std::min(hi, std::exp2(-static_cast<double>(j)));
              if (b > a) s += quad(g, a, b, j);
            }
            return s;
          },
          [&](const AtomSeries& s) {
            auto [k_lo, k_hi] = atom_range(s, lo, hi);
            if (k_hi - k_lo > 5e7) throw std::length_error("integrate: too many atoms in range");
            double acc = 0.0;
            for (double k = k_hi; k >= k_lo; k -= 1.0) acc += f(std::pow(k, -s.a)) * std::pow(k, -s.b);
            return acc;
          },
          [&](const FiniteAtoms& fa) {
            double acc = 0.0;
            for (std::size_t i = 0; i < fa.radius.size(); ++i)
              if (fa.radius[i] > lo && fa.radius[i] <= hi) acc += f(fa.radius[i]) * fa.weight[i];
            return acc;
          },
          [&](const PiecewiseDensity& d) {
            auto g = [&](double r) { return f(r) * d.density(r); };
            double s = 0.0;
            for (int j = 0; std::exp2(-j) > lo; ++j) {
              const double a = std::max(lo, std::exp2(-j - 1.0));
              const double b = std::min(hi, std::exp2(-static_cast<double>(j)));
              if (b > a) s += quad(g, a, b, j);
            }
            return s;
          },
      },
      v_);
}

namespace {

ShellSampler categorical(std::vector<double> values, std::vector<double> weights) {
  std::partial_sum(weights.begin(), weights.end(), weights.begin());
  auto vals = std::make_shared<const std::vector<double>>(std::move(values));
  auto cum = std::make_shared<const std::vector<double>>(std::move(weights));
  return ShellSampler([vals, cum](Engine& eng) {
    const double u = uniform_open_closed(eng) * cum->back();
    auto it = std::lower_bound(cum->begin(), cum->end(), u);
    if (it == cum->end()) --it;
    return (*vals)[static_cast<std::size_t>(it - cum->begin())];
  });
}

ShellSampler power_sampler(const PowerLaw& p, double lo, double hi) {
  const double a = std::pow(lo, -p.alpha), b = std::pow(hi, -p.alpha), alpha = p.alpha;
  return ShellSampler([a, b, alpha](Engine& eng) {
    const double u = uniform_open_closed(eng);
    return std::pow(a - u * (a - b), -1.0 / alpha);
  });
}

}  // namespace

ShellSampler RadialMeasure::shell_sampler(int j) const {
  if (zero_ || shell_mass(j) <= 0) return {};
  const double lo = std::exp2(-j - 1.0);
  const double hi = std::min(std::exp2(-static_cast<double>(j)), r_max_);
  return std::visit(
      overloaded{
          [&](const PowerLaw& p) { return power_sampler(p, lo, hi); },
          [&](const AtomSeries& s) {
            auto [k_lo, k_hi] = atom_range(s, lo, hi);
            const double a = s.a, b = s.b;
            if (k_hi - k_lo < 4e6) {
              std::vector<double> r, w;
              for (double k = k_lo; k <= k_hi; k += 1.0) {
                r.push_back(std::pow(k, -a));
                w.push_back(std::pow(k, -b));
              }
              return categorical(std::move(r), std::move(w));
            }
            // Continuous inverse CDF of x^{-b} on [k_lo, k_hi + 1), floored.
            const double x0 = k_lo, x1 = k_hi + 1.0;
            return ShellSampler([a, b, x0, x1, k_hi](Engine& eng) {
              const double u = uniform_open_closed(eng);
              double x;
              if (b == 1.0) x = x0 * std::pow(x1 / x0, u);
              else {
                const double e = 1.0 - b;
                const double A = std::pow(x0, e), B = std::pow(x1, e);
                x = std::pow(A + u * (B - A), 1.0 / e);
              }
              return std::pow(std::min(std::floor(x), k_hi), -a);
            });
          },
          [&](const FiniteAtoms& f) {
            std::vector<double> r, w;
            for (std::size_t i = 0; i < f.radius.size(); ++i)
              if (f.radius[i] > lo && f.radius[i] <= hi) {
                r.push_back(f.radius[i]);
                w.push_back(f.weight[i]);
              }
            return categorical(std::move(r), std::move(w));
          },
          [&](const PiecewiseDensity& d) {
            constexpr int kCells = 128;
            auto edges = std::make_shared<std::vector<double>>();
            std::vector<double> mass;
            for (int c = 0; c <= kCells; ++c) edges->push_back(lo + (hi - lo) * c / kCells);
            for (int c = 0; c < kCells; ++c) mass.push_back(quad(d.density, (*edges)[c], (*edges)[c + 1], j));
            std::vector<double> idx(kCells);
            std::iota(idx.begin(), idx.end(), 0.0);
            ShellSampler pick = categorical(std::move(idx), std::move(mass));
            return ShellSampler([pick, edges](Engine& eng) {
              const auto c = static_cast<std::size_t>(pick(eng));
              const double u = uniform_open_closed(eng);
              return (*edges)[c + 1] - u * ((*edges)[c + 1] - (*edges)[c]);
            });
          },
      },
      v_);
}

ShellSampler RadialMeasure::big_sampler() const {
  if (big_mass() <= 0) return {};
  if (const auto* p = std::get_if<PowerLaw>(&v_)) return power_sampler(*p, 1.0, r_max_);
  const auto& f = std::get<FiniteAtoms>(v_);
  std::vector<double> r, w;
  for (std::size_t i = 0; i < f.radius.size(); ++i)
    if (f.radius[i] > 1.0) {
      r.push_back(f.radius[i]);
      w.push_back(f.weight[i]);
    }
  return categorical(std::move(r), std::move(w));
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::Holds: return "holds";
    case Condition::Fails: return "fails";
    default: return "inconclusive";
  }
}

double shell_mass(const RadialMeasure& m, int j) { return m.shell_mass(j); }

ConditionResult jaffard_condition(const RadialMeasure& m, int j_max) {
  if (j_max < 8) throw std::invalid_argument("jaffard_condition: j_max must be >= 8");
  ConditionResult out;
  const bool analytic = m.is_zero() || std::holds_alternative<PowerLaw>(m.variant()) ||
                        std::holds_alternative<FiniteAtoms>(m.variant());
  std::vector<double> terms;
  for (int j = 0; j <= j_max; ++j) {
    const double lc = m.log2_shell_mass(j);
    if (std::isinf(lc)) { terms.push_back(-kInf); continue; }
    const double c = std::exp2(lc);
    const double log_term = c < 1e12 ? std::log1p(c) : lc * std::log(2.0);
    terms.push_back(-j + 0.5 * (lc + std::log2(log_term)));
  }
  const SeriesClass sc = classify_series(terms, 0);
  out.partial_sum = sc.partial_sum;
  out.last_ratio = sc.last_ratio;
  if (analytic) {
    out.condition = Condition::Holds;
    return out;
  }
  out.condition = sc.verdict == Verdict::Converges  ? Condition::Holds
                  : sc.verdict == Verdict::Diverges ? Condition::Fails
                                                    : Condition::Inconclusive;
  return out;
}

ExponentEstimate bg_index(const RadialMeasure& m, bool allow_analytic) {
  if (m.is_zero()) return ExponentEstimate::point(0.0);
  if (allow_analytic) {
    if (const auto* p = std::get_if<PowerLaw>(&m.variant())) return ExponentEstimate::point(p->alpha);
    if (const auto* s = std::get_if<AtomSeries>(&m.variant()))
      return ExponentEstimate::point(std::clamp((1.0 - s->b) / s->a, 0.0, 2.0));
    if (std::holds_alternative<FiniteAtoms>(m.variant())) return ExponentEstimate::point(0.0);
  }
  constexpr int kShells = 48;
  std::vector<double> lc(kShells + 1);
  for (int j = 0; j <= kShells; ++j) lc[j] = m.log2_shell_mass(j);
  auto classify = [&](double gamma) {
    std::vector<double> t(kShells + 1);
    for (int j = 0; j <= kShells; ++j) t[j] = lc[j] - gamma * j;
    return classify_series(t, 0).verdict;
  };
  return locate_threshold(classify, 0.0, 2.0, Verdict::Diverges);
}

LevyModel::LevyModel(int dim, std::vector<double> a, double q, RadialMeasure m)
    : d(dim), drift(std::move(a)), gaussian(q), jumps(std::move(m)) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (drift.empty()) drift.assign(d, 0.0);
  if (static_cast<int>(drift.size()) != d) throw std::invalid_argument("drift size != d");
  if (!(gaussian >= 0)) throw std::invalid_argument("gaussian coefficient must be >= 0");
}

double LevyModel::beta_prime() const {
  if (gaussian != 0.0) return 2.0;
  return bg_index(jumps).value();
}

double LevyModel::holder_cap() const {
  const double bp = beta_prime();
  return bp == 0.0 ? kInf : 1.0 / bp;
}

namespace {

// E[cos(x u_1)] for u uniform on the unit sphere of R^d.
double sphere_cos_mean(int d, double x) {
  if (x == 0.0) return 1.0;
  if (d == 1) return std::cos(x);
  if (d == 2) return std::cyl_bessel_j(0.0, x);
  if (d == 3) return std::sin(x) / x;
  const double nu = 0.5 * d - 1.0;
  return std::tgamma(0.5 * d) * std::pow(2.0 / x, nu) * std::cyl_bessel_j(nu, x);
}

}  // namespace

std::complex<double> LevyModel::psi(const std::vector<double>& lambda, double eps) const {
  if (static_cast<int>(lambda.size()) != d) throw std::invalid_argument("lambda size != d");
  double dot = 0.0, norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    dot += drift[i] * lambda[i];
    norm2 += lambda[i] * lambda[i];
  }
  const double ln = std::sqrt(norm2);
  const int dim = d;
  const double jump_part =
      ln == 0.0 ? 0.0
                : jumps.integrate([dim, ln](double r) { return 1.0 - sphere_cos_mean(dim, ln * r); },
                                  eps, jumps.r_max());
  return {0.5 * gaussian * norm2 + jump_part, dot};
}

std::string LevyModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "levy(d=" << d << ",drift=[";
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << drift[i];
  os << "],q=" << gaussian << ",jumps=" << jumps.describe() << ")";
  return os.str();
}

}  // namespace levylab
