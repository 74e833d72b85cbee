#include "levylab/gauges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace levylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGridPoints = 4096;
constexpr int kGridPerOctave = 64;
constexpr double kTol = 1e-12;

}  // namespace

std::vector<double> gauge_grid(double epsilon) {
  std::vector<double> r(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) r[i] = epsilon * std::exp2(-static_cast<double>(i) / kGridPerOctave);
  return r;
}

GaugeFunction::GaugeFunction(std::string name, std::function<double(double)> g, double epsilon,
                             int d, std::optional<double> exponent_hint)
    : name_(std::move(name)), g_(std::move(g)), eps_(epsilon), d_(d), hint_(exponent_hint) {
  if (!(epsilon > 0) || epsilon > 1) throw std::invalid_argument("gauge window must lie in (0,1]");
  if (d < 1) throw std::invalid_argument("gauge dimension must be >= 1");
  const auto grid = gauge_grid(eps_);
  double prev = g_(grid[0]);
  if (!(prev > 0)) throw std::invalid_argument("gauge '" + name_ + "' is not positive at epsilon");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = g_(grid[i]);
    if (!(v > 0)) {
      std::ostringstream os;
      os << "gauge '" << name_ << "' is not positive at r=" << grid[i];
      throw std::invalid_argument(os.str());
    }
    if (v > prev * (1.0 + kTol)) {
      std::ostringstream os;
      os << "gauge '" << name_ << "' is not nondecreasing near r=" << grid[i];
      throw std::invalid_argument(os.str());
    }
    prev = v;
  }
  in_dd_ = ratio_nonincreasing(d_);
}

bool GaugeFunction::ratio_nonincreasing(int d) const {
  if (zero_) return true;
  if (power_) return *power_ <= d;
  const auto grid = gauge_grid(eps_);
  double prev = std::log(g_(grid[0])) - d * std::log(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = std::log(g_(grid[i])) - d * std::log(grid[i]);
    if (v < prev - kTol) return false;
    prev = v;
  }
  return true;
}

GaugeFunction GaugeFunction::power(double s, int d) {
  if (!(s > 0)) throw std::invalid_argument("power gauge needs s > 0");
  std::ostringstream os;
  os << "Id^" << s;
  GaugeFunction g(os.str(), [s](double r) { return std::pow(r, s); }, 1.0, d, s);
  g.power_ = s;
  g.in_dd_ = s <= d;
  return g;
}

GaugeFunction GaugeFunction::zero(int d) {
  GaugeFunction g;
  g.name_ = "zero";
  g.g_ = [](double) { return 0.0; };
  g.d_ = d;
  g.zero_ = true;
  g.in_dd_ = true;
  return g;
}

GaugeFunction GaugeFunction::power_log(double s, double p, double epsilon, int d) {
  std::ostringstream os;
  os << "Id^" << s << "*log(1/r)^" << p;
  return GaugeFunction(os.str(),
                       [s, p](double r) { return std::pow(r, s) * std::pow(std::log(1.0 / r), p); },
                       epsilon, d, s);
}

GaugeFunction normalize_d(const GaugeFunction& g, int d) {
  if (g.is_zero()) return GaugeFunction::zero(d);
  if (g.normalized_ && g.d_ == d) return g;
  if (g.power_) {
    if (*g.power_ > d) return GaugeFunction::zero(d);
    GaugeFunction out = g;
    out.d_ = d;
    out.in_dd_ = true;
    return out;
  }
  if (g.ratio_nonincreasing(d)) {
    GaugeFunction out = g;
    out.d_ = d;
    out.in_dd_ = true;
    return out;
  }

  constexpr int kSub = 4;
  constexpr int kHalvings = 64;
  const auto f = g.g_;
  auto log_ratio = [f, d](double rho) { return std::log(f(rho)) - d * std::log(rho); };

  // Zero detection: 20 consecutive halvings each shrinking the infimum by <= 0.9.
  double running = log_ratio(g.eps_);
  double at_last_halving = running;
  int streak = 0;
  for (int k = 1; k <= kSub * kHalvings; ++k) {
    const double rho = g.eps_ * std::exp2(-static_cast<double>(k) / kSub);
    if (rho < 1e-290) break;
    running = std::min(running, log_ratio(rho));
    if (k % kSub == 0) {
      if (running <= at_last_halving + std::log(0.9)) {
        if (++streak >= 20) return GaugeFunction::zero(d);
      } else {
        streak = 0;
      }
      at_last_halving = running;
    }
  }

  GaugeFunction out;
  out.name_ = g.name_ + "_normalized";
  out.eps_ = g.eps_;
  out.d_ = d;
  out.hint_ = g.hint_;
  out.in_dd_ = true;
  out.normalized_ = true;
  // Grid anchored at epsilon with a fixed floor, so that the candidate sets are
  // nested in r and g_d(r)/r^d is exactly monotone on the grid.
  const double eps = g.eps_;
  out.g_ = [log_ratio, d, eps](double r) {
    double best = log_ratio(r);
    const int first = std::max(0, static_cast<int>(std::ceil(kSub * std::log2(eps / r) - 1e-9)));
    for (int k = first;; ++k) {
      const double rho = eps * std::exp2(-static_cast<double>(k) / kSub);
      if (rho < 1e-290) break;
      if (rho <= r) best = std::min(best, log_ratio(rho));
    }
    return std::exp(best + d * std::log(r));
  };
  return out;
}

ExponentEstimate critical_exponent_h_g(const GaugeFunction& g, const RadialMeasure& m,
                                       bool allow_fast_path) {
  const GaugeFunction g1 = normalize_d(g, 1);
  const auto infinite = ExponentEstimate::point(kInf);
  if (g1.is_zero() || m.is_zero() || !m.has_infinite_mass()) return infinite;

  if (allow_fast_path && g1.power_exponent()) {
    const double s = *g1.power_exponent();
    if (const auto* p = std::get_if<PowerLaw>(&m.variant())) return ExponentEstimate::point(s / p->alpha);
    if (const auto* a = std::get_if<AtomSeries>(&m.variant()); a && a->b < 1.0)
      return ExponentEstimate::point(s * a->a / (1.0 - a->b));
  }

  if (m.has_flat_shells()) {
    // Bounded shell masses: sum_j g1(2^{-j/h}) c_j converges for all h or for none.
    std::vector<double> t;
    for (int j = 16; j <= 64; ++j) t.push_back(std::log2(g1(std::exp2(-j))));
    const Verdict v = classify_series(t, 16).verdict;
    if (v == Verdict::Converges) return infinite;
    if (v == Verdict::Diverges) return ExponentEstimate::point(0.0);
    return {0.0, kInf};
  }

  const double eps = g1.epsilon();
  auto classify = [&](double h) {
    const int j0 = std::max(8, static_cast<int>(std::ceil(h * std::log2(1.0 / eps))));
    std::vector<double> t;
    for (int j = j0; j <= j0 + 48; ++j) {
      const double r = std::exp2(-static_cast<double>(j) / h);
      // Arguments below the normal range would read as a vanishing tail.
      if (r < 1e-290) break;
      const double gv = g1(r);
      t.push_back((gv > 0 ? std::log2(gv) : -kInf) + m.log2_shell_mass(j));
    }
    return classify_series(t, j0).verdict;
  };
  constexpr double h_min = 0.05, h_max = 20.0;
  if (classify(h_min) == Verdict::Diverges) return ExponentEstimate::point(0.0);
  if (classify(h_max) == Verdict::Converges) return infinite;
  ExponentEstimate e = locate_threshold(classify, h_min, h_max, Verdict::Converges);
  if (e.hi >= h_max) e.hi = kInf;
  if (e.lo <= h_min) e.lo = 0.0;
  return e;
}

LogExponent gauge_log_exponent(const GaugeFunction& g) {
  // g_1 when it is nonzero; a gauge whose normalization vanishes (e.g. r/log(1/r))
  // is read directly.
  const GaugeFunction n1 = normalize_d(g, 1);
  if (n1.is_zero() && g.is_zero()) return NotInClassD{kInf, kInf};
  const GaugeFunction& g1 = n1.is_zero() ? g : n1;
  if (auto p = g1.power_exponent()) return *p <= 1.0 ? LogExponent{*p} : LogExponent{NotInClassD{*p, *p}};

  std::vector<double> ratio, L;
  for (int j = 16; j <= 48; ++j) {
    ratio.push_back(std::log2(g1(std::exp2(-j))) / -j);
    L.push_back(j * std::log(2.0));
  }
  const double lo = *std::min_element(ratio.begin(), ratio.end());
  const double hi = *std::max_element(ratio.begin(), ratio.end());

  // ratio = gamma + A ln(L)/L + B/L, exact for C r^gamma (log 1/r)^p.
  double M[3][4] = {};
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double x[3] = {1.0, std::log(L[i]) / L[i], 1.0 / L[i]};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) M[a][b] += x[a] * x[b];
      M[a][3] += x[a] * ratio[i];
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    std::swap(M[c], M[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = M[r][c] / M[c][c];
      for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
    }
  }
  const double coef[3] = {M[0][3] / M[0][0], M[1][3] / M[1][1], M[2][3] / M[2][2]};
  double resid = 0.0;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double fit = coef[0] + coef[1] * std::log(L[i]) / L[i] + coef[2] / L[i];
    resid = std::max(resid, std::abs(fit - ratio[i]));
  }
  const bool fit_ok = resid <= 1e-4 && coef[0] >= -1e-9 && coef[0] <= 1.0 + 1e-9;
  if (fit_ok) return std::clamp(coef[0], 0.0, 1.0);
  if (hi - lo <= 0.02) return ratio.back();
  return NotInClassD{lo, hi};
}

Modulus::Modulus(std::string name, std::function<double(double)> w,
                 std::function<double(double)> inverse, double delta0)
    : name_(std::move(name)), w_(std::move(w)), inv_(std::move(inverse)), delta0_(delta0) {
  if (!(delta0_ > 0)) throw std::invalid_argument("modulus: delta0 must be positive");
  k1_ = kInf;
  k2_ = 0.0;
  for (int i = 0; i <= 320; ++i) {
    const double d = delta0_ * std::exp2(-i / 8.0);
    const double a = w_(d), b = w_(2 * d);
    if (!(a > 0) || !(b > a)) throw std::invalid_argument("modulus '" + name_ + "' is not increasing");
    k1_ = std::min(k1_, b / a);
    k2_ = std::max(k2_, b / a);
  }
  if (!(k1_ > 1.0) || !std::isfinite(k2_))
    throw std::invalid_argument("modulus '" + name_ + "' violates the doubling bounds");
  for (int i = 0; i <= 320; i += 4) {
    const double d = delta0_ * std::exp2(-i / 8.0);
    const double back = this->inverse(w_(d));
    if (std::abs(back - d) > 1e-9 * d)
      throw std::invalid_argument("modulus '" + name_ + "': inverse round trip failed");
  }
}

Modulus Modulus::power(double p, double delta0) {
  std::ostringstream os;
  os << "delta^" << p;
  Modulus m(os.str(), [p](double d) { return std::pow(d, p); },
            [p](double r) { return std::pow(r, 1.0 / p); }, delta0);
  m.power_ = p;
  return m;
}

double Modulus::inverse(double r) const {
  if (inv_) return inv_(r);
  if (!(r > 0)) return 0.0;
  double lo = std::log(1e-300), hi = std::log(2.0 * delta0_);
  while (w_(std::exp(hi)) < r && hi < 700) hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (w_(std::exp(mid)) < r) lo = mid; else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

bool Modulus::is_little_o_power(double h) const {
  auto ratio = [&](double d) { return std::log(w_(d)) - h * std::log(d); };
  const double top = ratio(delta0_);
  double prev = kInf;
  for (int i = 240; i <= 320; ++i) {
    const double v = ratio(delta0_ * std::exp2(-i / 8.0));
    if (v > prev + 1e-12) return false;
    prev = v;
  }
  return prev <= top + std::log(1e-2);
}

Verdict modulus_divergence_test(const GaugeFunction& g, const Modulus& w, const RadialMeasure& m) {
  const GaugeFunction g1 = normalize_d(g, 1);
  if (g1.is_zero() || m.is_zero()) return Verdict::Converges;
  std::vector<double> t;
  const int j0 = 8;
  for (int j = j0; j <= j0 + 48; ++j) {
    const double r = std::min(w.inverse(std::exp2(-j)), g1.epsilon());
    const double gv = r > 0 ? g1(r) : 0.0;
    t.push_back((gv > 0 ? std::log2(gv) : -kInf) + m.log2_shell_mass(j));
  }
  return classify_series(t, j0).verdict;
}

}  // namespace levylab
