#include "levylab/series_classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace levylab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "converges";
    case Verdict::Diverges: return "diverges";
    default: return "inconclusive";
  }
}

double ExponentEstimate::value() const {
  if (std::isinf(lo) && std::isinf(hi) && lo == hi) return lo;
  if (std::isinf(hi)) return hi;
  return 0.5 * (lo + hi);
}

namespace {

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

SeriesClass classify_series(const std::vector<double>& log2_terms, int j_first) {
  const std::size_t n = log2_terms.size();
  if (n < kTailTerms + 1) throw std::invalid_argument("classify_series: need at least 9 terms");

  SeriesClass out;
  for (double lt : log2_terms) out.partial_sum += std::exp2(lt);

  const std::size_t first = n - (kTailTerms + 1);
  bool all_zero = true, any_zero = false, zero_suffix = true;
  for (std::size_t i = first; i < n; ++i) {
    const bool zero = std::isinf(log2_terms[i]) && log2_terms[i] < 0;
    if (zero) any_zero = true;
    else {
      all_zero = false;
      if (any_zero) zero_suffix = false;
    }
  }
  bool decreasing = true;
  for (std::size_t i = first + 1; i < n && !std::isinf(log2_terms[i]); ++i)
    decreasing = decreasing && log2_terms[i] < log2_terms[i - 1];
  if (all_zero || (any_zero && zero_suffix && decreasing)) {
    out.verdict = Verdict::Converges;
    out.last_ratio = 0.0;
    return out;
  }
  if (any_zero) {
    // Intermittent zeros: compare block sums of the two tail halves.
    double a = 0, b = 0;
    for (std::size_t i = first; i < first + 4; ++i) a += std::exp2(log2_terms[i]);
    for (std::size_t i = n - 4; i < n; ++i) b += std::exp2(log2_terms[i]);
    out.last_ratio = a > 0 ? b / a : std::numeric_limits<double>::infinity();
    return out;
  }

  const double mean_log2_ratio = (log2_terms[n - 1] - log2_terms[first]) / kTailTerms;
  out.last_ratio = std::exp2(log2_terms[n - 1] - log2_terms[n - 2]);
  const double g = std::exp2(mean_log2_ratio);
  if (g <= 0.95) { out.verdict = Verdict::Converges; return out; }
  if (g >= 1.05) { out.verdict = Verdict::Diverges; return out; }

  // Polynomial stage on the two halves of a 16-term tail (or what is available).
  const std::size_t span = std::min<std::size_t>(n, 2 * kTailTerms);
  const std::size_t start = n - span, half = span / 2;
  auto decay = [&](std::size_t a, std::size_t b) {
    std::vector<double> x, y;
    for (std::size_t i = a; i < b; ++i) {
      x.push_back(std::log(static_cast<double>(j_first + static_cast<int>(i))));
      y.push_back(log2_terms[i] * std::log(2.0));
    }
    return -slope(x, y);
  };
  if (j_first + static_cast<int>(start) < 1) return out;
  const double p1 = decay(start, start + half);
  const double p2 = decay(start + half, n);
  const double scale = std::max(std::abs(p2), 0.05);
  if (std::abs(p1 - p2) > 0.1 * scale) return out;
  if (p2 <= 1.0 + 1e-9) out.verdict = Verdict::Diverges;
  else if (p2 >= 1.1) out.verdict = Verdict::Converges;
  return out;
}

ExponentEstimate locate_threshold(const std::function<Verdict(double)>& classify, double x_lo,
                                  double x_hi, Verdict verdict_low, double tol) {
  const Verdict verdict_high =
      verdict_low == Verdict::Converges ? Verdict::Diverges : Verdict::Converges;
  const Verdict at_lo = classify(x_lo);
  const Verdict at_hi = classify(x_hi);
  if (at_lo == verdict_high) return {x_lo, x_lo};
  if (at_hi == verdict_low) return {x_hi, x_hi};

  // Upper edge of the region classified verdict_low.
  double a = x_lo, b = x_hi;
  if (at_lo == verdict_low) {
    while (b - a > tol) {
      const double m = 0.5 * (a + b);
      if (classify(m) == verdict_low) a = m; else b = m;
    }
  } else {
    b = x_lo;
  }
  const double edge_low = at_lo == verdict_low ? 0.5 * (a + b) : x_lo;

  // Lower edge of the region classified verdict_high.
  a = edge_low;
  b = x_hi;
  if (at_hi == verdict_high) {
    while (b - a > tol) {
      const double m = 0.5 * (a + b);
      if (classify(m) == verdict_high) b = m; else a = m;
    }
  }
  const double edge_high = at_hi == verdict_high ? 0.5 * (a + b) : x_hi;
  return {edge_low, std::max(edge_low, edge_high)};
}

}  // namespace levylab
