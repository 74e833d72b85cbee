#include "levylab/resolution_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace levylab {

ResolutionSet ResolutionSet::from_intervals(std::vector<Interval> v, double T) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  ResolutionSet out(T);
  for (Interval x : v) {
    x.lo = std::max(x.lo, 0.0);
    x.hi = std::min(x.hi, T);
    if (!(x.hi > x.lo)) continue;
    if (!out.iv_.empty() && x.lo < out.iv_.back().hi) {
      out.iv_.back().hi = std::max(out.iv_.back().hi, x.hi);
    } else {
      out.iv_.push_back(x);
    }
  }
  return out;
}

double ResolutionSet::measure() const {
  double s = 0.0;
  for (const auto& x : iv_) s += x.length();
  return s;
}

bool ResolutionSet::contains(double t) const {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), t,
                             [](double v, const Interval& x) { return v < x.lo; });
  if (it == iv_.begin()) return false;
  --it;
  if (!(t > it->lo && t < it->hi)) return false;
  return !std::binary_search(excluded_points.begin(), excluded_points.end(), t);
}

ResolutionSet ResolutionSet::unite(const ResolutionSet& other) const {
  if (T_ != other.T_) throw std::invalid_argument("unite: horizons differ");
  ResolutionSet out(T_);
  out.iv_.reserve(iv_.size() + other.iv_.size());
  std::size_t a = 0, b = 0;
  while (a < iv_.size() || b < other.iv_.size()) {
    const Interval& x = (b == other.iv_.size() || (a < iv_.size() && iv_[a].lo <= other.iv_[b].lo))
                            ? iv_[a++]
                            : other.iv_[b++];
    if (!out.iv_.empty() && x.lo < out.iv_.back().hi)
      out.iv_.back().hi = std::max(out.iv_.back().hi, x.hi);
    else
      out.iv_.push_back(x);
  }
  out.j_lo = std::min(j_lo, other.j_lo);
  out.j_hi = std::max(j_hi, other.j_hi);
  return out;
}

ResolutionSet ResolutionSet::intersect(const ResolutionSet& other) const {
  if (T_ != other.T_) throw std::invalid_argument("intersect: horizons differ");
  ResolutionSet out(T_);
  std::size_t a = 0, b = 0;
  while (a < iv_.size() && b < other.iv_.size()) {
    const double lo = std::max(iv_[a].lo, other.iv_[b].lo);
    const double hi = std::min(iv_[a].hi, other.iv_[b].hi);
    if (hi > lo) out.iv_.push_back({lo, hi});
    if (iv_[a].hi < other.iv_[b].hi) ++a; else ++b;
  }
  out.j_lo = std::max(j_lo, other.j_lo);
  out.j_hi = std::min(j_hi, other.j_hi);
  return out;
}

bool ResolutionSet::is_subset_of(const ResolutionSet& other, double tol) const {
  std::size_t b = 0;
  for (const auto& x : iv_) {
    while (b < other.iv_.size() && other.iv_[b].hi < x.hi - tol) ++b;
    if (b == other.iv_.size()) return false;
    if (other.iv_[b].lo > x.lo + tol) return false;
  }
  return true;
}

double lebesgue_measure(const ResolutionSet& s) { return s.measure(); }

}  // namespace levylab
