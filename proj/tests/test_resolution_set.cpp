#include <doctest/doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "levylab/singularity.hpp"

using namespace levylab;

namespace {

JumpSet manual_jumps(std::vector<double> times, std::vector<double> sizes, double T = 1.0) {
  JumpSet js;
  js.T = T;
  js.eps_min = std::ldexp(1.0, -30);
  js.model = std::make_shared<const LevyModel>(1, std::vector<double>{0.0}, 0.0,
                                               RadialMeasure::finite({0.5}, {1.0}));
  js.times = std::move(times);
  js.sizes = std::move(sizes);
  js.directions.assign(js.times.size(), 1.0);
  return js;
}

// Independent oracle: measure of a union of intervals by sorting endpoints.
double union_length(std::vector<Interval> v, double T) {
  std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
  double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
  for (auto iv : v) {
    iv.lo = std::max(iv.lo, 0.0);
    iv.hi = std::min(iv.hi, T);
    if (iv.hi <= iv.lo) continue;
    if (iv.lo > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = iv.lo;
      cur_hi = iv.hi;
    } else {
      cur_hi = std::max(cur_hi, iv.hi);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

TEST_CASE("interval algebra") {
  auto a = ResolutionSet::from_intervals({{0.5, 0.7}, {0.1, 0.3}, {0.25, 0.4}, {-1.0, 0.05}}, 1.0);
  REQUIRE(a.size() == 3);
  CHECK(a.intervals()[0].lo == 0.0);
  CHECK(a.intervals()[0].hi == 0.05);
  CHECK(a.intervals()[1].lo == 0.1);
  CHECK(a.intervals()[1].hi == 0.4);
  CHECK(a.measure() == doctest::Approx(0.05 + 0.3 + 0.2));
  CHECK(a.contains(0.2));
  CHECK_FALSE(a.contains(0.45));
  CHECK_FALSE(a.contains(0.5));  // open interval

  auto touching = ResolutionSet::from_intervals({{0.1, 0.2}, {0.2, 0.3}}, 1.0);
  CHECK(touching.size() == 2);
  CHECK_FALSE(touching.contains(0.2));

  auto b = ResolutionSet::from_intervals({{0.35, 0.6}}, 1.0);
  auto u = a.unite(b), x = a.intersect(b);
  CHECK(u.measure() == doctest::Approx(a.measure() + b.measure() - x.measure()));
  CHECK(x.measure() == doctest::Approx(0.05 + 0.1));
  CHECK(x.is_subset_of(a));
  CHECK(x.is_subset_of(b));
  CHECK(a.is_subset_of(u));
  CHECK_FALSE(u.is_subset_of(a));
  CHECK_THROWS(a.unite(ResolutionSet(2.0)));
}

TEST_CASE("lebesgue measure examples") {
  CHECK(lebesgue_measure(ResolutionSet(1.0)) == 0.0);
  CHECK(lebesgue_measure(ResolutionSet::from_intervals({{-1.0, 5.0}}, 3.0)) == 3.0);
}

TEST_CASE("random unions match the sorted-endpoint oracle") {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> u(-0.1, 1.1), len(0.0, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Interval> v;
    for (int i = 0; i < 30; ++i) {
      const double lo = u(eng);
      v.push_back({lo, lo + len(eng)});
    }
    auto s = ResolutionSet::from_intervals(v, 1.0);
    CHECK(s.measure() == doctest::Approx(union_length(v, 1.0)).epsilon(1e-12));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.intervals()[i - 1].hi <= s.intervals()[i].lo);
    CHECK(s.measure() <= 1.0);
  }
}

TEST_CASE("limsup set examples") {
  auto one = build_limsup_set(manual_jumps({0.5}, {0.25}), [](double r) { return r; }, {0, 10});
  REQUIRE(one.size() == 1);
  CHECK(one.intervals()[0].lo == 0.25);
  CHECK(one.intervals()[0].hi == 0.75);

  auto two = build_limsup_set(manual_jumps({0.3, 0.5}, {0.125, 0.25}), [](double r) { return r; }, {0, 10});
  REQUIRE(two.size() == 1);
  CHECK(two.measure() == doctest::Approx(0.75 - 0.175));

  // Records outside the size window do not contribute.
  auto none = build_limsup_set(manual_jumps({0.5}, {0.25}), [](double r) { return r; }, {4, 10});
  CHECK(none.empty());
}

TEST_CASE("limsup set is monotone in phi and in the window") {
  auto m = std::make_shared<const LevyModel>(1, std::vector<double>{0.0}, 0.0, RadialMeasure::power_law(1, 1.2));
  auto js = sample_jumps(m, 1.0, std::ldexp(1.0, -15), 5);
  for (double a : {0.3, 0.5, 0.8}) {
    auto small = build_limsup_set(js, [a](double r) { return std::pow(r, 1 / a); }, {4, 14});
    auto large = build_limsup_set(js, [a](double r) { return std::pow(r, 1 / (a + 0.1)); }, {4, 14});
    CHECK(small.is_subset_of(large));
  }
  auto phi = [](double r) { return std::sqrt(r); };
  double prev = 0.0;
  for (int j_hi = 6; j_hi <= 14; ++j_hi) {
    const double mu = build_limsup_set(js, phi, {4, j_hi}).measure();
    CHECK(mu >= prev);
    prev = mu;
  }
}

TEST_CASE("shell-streamed limsup set equals the direct construction") {
  auto m = std::make_shared<const LevyModel>(1, std::vector<double>{0.0}, 0.0, RadialMeasure::power_law(1, 1.0));
  auto phi = [](double r) { return r * r; };
  const std::pair<int, int> w{3, 12};
  auto direct = build_limsup_set(sample_jumps(m, 1.0, std::ldexp(1.0, -13), 7, 2), phi, w);
  auto streamed = build_limsup_set_by_shells(m, 1.0, 7, 2, phi, w);
  REQUIRE(direct.size() == streamed.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(direct.intervals()[i].lo == streamed.intervals()[i].lo);
    CHECK(direct.intervals()[i].hi == streamed.intervals()[i].hi);
  }
}

TEST_CASE("intersections") {
  auto a = ResolutionSet::from_intervals({{0.1, 0.3}, {0.6, 0.9}}, 1.0);
  auto i = intersect_independent({a, a});
  CHECK(i.measure() == doctest::Approx(a.measure()));
  CHECK(i.size() == a.size());
  auto b = ResolutionSet::from_intervals({{0.3, 0.6}}, 1.0);
  CHECK(intersect_independent({a, b}).empty());
}
