#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace levylab {

enum class Verdict { Converges, Diverges, Inconclusive };

std::string to_string(Verdict v);

struct SeriesClass {
  Verdict verdict = Verdict::Inconclusive;
  double partial_sum = 0.0;
  double last_ratio = std::numeric_limits<double>::quiet_NaN();
};

// Classifies sum_j t_j from the base-2 logarithms of terms j = j_first, j_first+1, ...
// (-inf encodes a zero term). Needs at least 9 terms. A run of zeros that lasts to
// the end of the tail (underflow of a decaying term) counts as convergent.
//
// Stage 1: geometric mean of the last 8 consecutive ratios, <= 0.95 converges,
// >= 1.05 diverges. Stage 2: if the local log-log decay exponent p of the tail is
// stable across both halves, p <= 1 diverges and p >= 1.1 converges.
SeriesClass classify_series(const std::vector<double>& log2_terms, int j_first);

inline constexpr int kTailTerms = 8;

// Threshold interval of a monotone classification in x. verdict_low is the
// verdict expected for small x; the other definite verdict is expected for large x.
struct ExponentEstimate {
  double lo = 0.0;
  double hi = 0.0;
  bool is_point() const { return lo == hi || hi - lo <= 2e-3; }
  double value() const;
  static ExponentEstimate point(double v) { return {v, v}; }
};

ExponentEstimate locate_threshold(const std::function<Verdict(double)>& classify, double x_lo,
                                  double x_hi, Verdict verdict_low, double tol = 1e-3);

}  // namespace levylab
