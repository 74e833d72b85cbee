#pragma once

#include <string>
#include <vector>

namespace levylab {

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

// Finite union of disjoint open intervals inside [0, T], sorted by left endpoint.
// Intervals that only share an endpoint stay separate (the endpoint is not covered).
class ResolutionSet {
 public:
  explicit ResolutionSet(double T = 1.0) : T_(T) {}

  // Sorts, clips to [0, T] and merges overlapping intervals.
  static ResolutionSet from_intervals(std::vector<Interval> v, double T);

  double horizon() const { return T_; }
  const std::vector<Interval>& intervals() const { return iv_; }
  std::size_t size() const { return iv_.size(); }
  bool empty() const { return iv_.empty(); }
  double measure() const;
  bool contains(double t) const;

  ResolutionSet unite(const ResolutionSet& other) const;
  ResolutionSet intersect(const ResolutionSet& other) const;
  bool is_subset_of(const ResolutionSet& other, double tol = 0.0) const;

  // Size window (j_lo, j_hi) of the contributing records.
  int j_lo = 0;
  int j_hi = 0;
  std::string provenance;
  // Points removed from the set (jump times); measure zero, kept for reporting.
  std::vector<double> excluded_points;

  // Appends an interval lying strictly to the right of the current content.
  void push_back_sorted(Interval v) { iv_.push_back(v); }

 private:
  double T_;
  std::vector<Interval> iv_;
};

double lebesgue_measure(const ResolutionSet& s);

}  // namespace levylab
