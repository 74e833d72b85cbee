#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "levylab/levy_sim.hpp"

using namespace levylab;

namespace {

std::shared_ptr<const LevyModel> model(RadialMeasure m, double q = 0.0, double a = 0.0, int d = 1) {
  return std::make_shared<const LevyModel>(d, std::vector<double>(d, a), q, std::move(m));
}

struct Moments {
  double mean = 0, var = 0;
};

template <class F>
Moments moments(int n, F f) {
  double s = 0, s2 = 0;
  for (int r = 0; r < n; ++r) {
    const double x = f(r);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  return {mean, (s2 - n * mean * mean) / (n - 1)};
}

}  // namespace

TEST_CASE("single atom: sizes and Poisson count") {
  auto m = model(RadialMeasure::finite({0.5}, {3.0}));
  const int n = 4000;
  auto mo = moments(n, [&](int r) {
    auto js = sample_jumps(m, 1.0, 0.25, 11, r);
    for (double s : js.sizes) REQUIRE(s == 0.5);
    for (double dir : js.directions) REQUIRE(std::abs(dir) == 1.0);
    return double(js.size());
  });
  CHECK(std::abs(mo.mean - 3.0) <= 3 * std::sqrt(3.0 / n));
  CHECK(mo.var / mo.mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("power law shell 0 count has mean c_0 = 1") {
  auto m = model(RadialMeasure::power_law(1, 1));
  const int n = 10000;
  auto mo = moments(n, [&](int r) { return double(sample_shell(m, 1.0, 0, 5, r).size()); });
  CHECK(std::abs(mo.mean - 1.0) <= 3 * std::sqrt(1.0 / n));
  CHECK(mo.var / mo.mean >= 0.9);
  CHECK(mo.var / mo.mean <= 1.1);
}

TEST_CASE("sizes stay inside their shell and above the cutoff") {
  auto m = model(RadialMeasure::power_law(1, 1.4));
  auto js = sample_jumps(m, 2.0, 1e-3, 3);
  REQUIRE(!js.empty());
  for (std::size_t i = 0; i < js.size(); ++i) {
    CHECK(js.sizes[i] >= effective_cutoff(1e-3));
    CHECK(js.sizes[i] <= 1.0);
    CHECK(js.times[i] > 0.0);
    CHECK(js.times[i] <= 2.0);
    if (i) CHECK(js.times[i - 1] <= js.times[i]);
  }
}

TEST_CASE("cutoff at r_max gives an empty jump set") {
  auto js = sample_jumps(model(RadialMeasure::power_law(1, 1)), 1.0, 1.0, 1);
  CHECK(js.empty());
}

TEST_CASE("resource guard") {
  auto m = model(RadialMeasure::power_law(1, 1.9));
  CHECK(expected_count(*m, 1.0, std::ldexp(1.0, -40)) > kMaxExpectedJumps);
  CHECK_THROWS_AS(sample_jumps(m, 1.0, std::ldexp(1.0, -40), 1), ResourceError);
}

TEST_CASE("determinism and refinement") {
  auto m = model(RadialMeasure::atom_series(1, 1));
  auto a = sample_jumps(m, 1.0, std::ldexp(1.0, -12), 77);
  auto b = sample_jumps(m, 1.0, std::ldexp(1.0, -12), 77);
  CHECK(a.hash() == b.hash());
  CHECK(a.times == b.times);
  CHECK(a.sizes == b.sizes);
  CHECK(sample_jumps(m, 1.0, std::ldexp(1.0, -12), 78).hash() != a.hash());

  auto coarse = sample_jumps(model(RadialMeasure::power_law(1, 1.2)), 1.0, std::ldexp(1.0, -6), 9);
  auto fine = sample_jumps(model(RadialMeasure::power_law(1, 1.2)), 1.0, std::ldexp(1.0, -14), 9);
  std::vector<std::pair<double, double>> kept;
  for (std::size_t i = 0; i < fine.size(); ++i)
    if (fine.sizes[i] >= std::ldexp(1.0, -6)) kept.emplace_back(fine.times[i], fine.sizes[i]);
  std::vector<std::pair<double, double>> all;
  for (std::size_t i = 0; i < coarse.size(); ++i) all.emplace_back(coarse.times[i], coarse.sizes[i]);
  CHECK(kept == all);

  auto part = sample_jumps(model(RadialMeasure::power_law(1, 1.2)), 1.0, std::ldexp(1.0, -14), 9, 0,
                           std::make_pair(3, 7));
  std::size_t in_range = 0;
  for (double s : fine.sizes) in_range += (RadialMeasure::shell_of(s) >= 3 && RadialMeasure::shell_of(s) <= 7);
  CHECK(part.size() == in_range);
}

TEST_CASE("compensation sums") {
  auto zero = sample_jumps(model(RadialMeasure::power_law(1, 1)), 1.0, 1e-3, 1);
  CHECK(compensation_sum(zero, [](double) { return 0.0; }, 1.0) == 0.0);

  const int n = 2000;
  auto atom = model(RadialMeasure::finite({0.5}, {3.0}));
  auto mo = moments(n, [&](int r) {
    return compensation_sum(sample_jumps(atom, 1.0, 0.25, 21, r), [](double x) { return x; }, 1.0);
  });
  CHECK(std::abs(mo.mean - 1.5) <= 3 * std::sqrt(mo.var / n));

  // phi(r) = r^2 under r^{-2} dr: mean 1 - eps, variance integral r^4 r^{-2} dr = (1 - eps^3)/3.
  auto pl = model(RadialMeasure::power_law(1, 1));
  const double eps = std::ldexp(1.0, -10);
  auto mo2 = moments(n, [&](int r) {
    return compensation_sum(sample_jumps(pl, 1.0, eps, 22, r), [](double x) { return x * x; }, 1.0);
  });
  CHECK(std::abs(mo2.mean - (1 - eps)) <= 3 * std::sqrt((1 - eps * eps * eps) / 3 / n));

  // Only records with time <= n contribute.
  auto js = sample_jumps(pl, 2.0, eps, 23);
  double manual = 0.0;
  for (std::size_t i = 0; i < js.size(); ++i)
    if (js.times[i] <= 0.7) manual += js.sizes[i];
  CHECK(compensation_sum(js, [](double x) { return x; }, 0.7) == doctest::Approx(manual));
}

TEST_CASE("pure drift path is a straight line") {
  auto m = model(RadialMeasure(), 0.0, 2.0);
  auto p = assemble_path(sample_jumps(m, 1.0, 0.5, 1), 101);
  for (std::size_t k = 0; k < p.t.size(); ++k) CHECK(p.values[k] == doctest::Approx(-2.0 * p.t[k]));
}

TEST_CASE("brownian increments have variance q dt") {
  const double q = 1.5;
  auto m = model(RadialMeasure(), q);
  const std::size_t N = 4001;
  auto p = assemble_path(sample_jumps(m, 2.0, 0.5, 8), N);
  double chi2 = 0.0;
  for (std::size_t k = 1; k < N; ++k) {
    const double dx = p.values[k] - p.values[k - 1], dt = p.t[k] - p.t[k - 1];
    chi2 += dx * dx / (q * dt);
  }
  const double dof = double(N - 1);
  CHECK(std::abs(chi2 - dof) <= 5 * std::sqrt(2 * dof));
}

TEST_CASE("compound Poisson path steps by +-1/2") {
  auto m = model(RadialMeasure::finite({0.5}, {3.0}));
  auto js = sample_jumps(m, 5.0, 0.25, 4);
  REQUIRE(js.size() > 0);
  auto p = assemble_path(js, 5001);
  for (double c : p.compensation_drift) CHECK(c == 0.0);
  for (std::size_t k = 1; k < p.t.size(); ++k) {
    const double twice = 2 * (p.values[k] - p.values[k - 1]);
    CHECK(std::abs(twice - std::round(twice)) < 1e-12);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < js.size(); ++i) total += js.sizes[i] * js.directions[i];
  CHECK(p.values.back() == doctest::Approx(total));
}

TEST_CASE("right-continuous grid convention") {
  JumpSet js;
  js.T = 1.0;
  js.eps_min = 0.25;
  js.model = model(RadialMeasure::finite({0.5}, {1.0}));
  js.times = {0.5};
  js.sizes = {0.5};
  js.directions = {1.0};
  auto p = assemble_path(js, 3);
  CHECK(p.values[0] == 0.0);
  CHECK(p.values[1] == 0.5);
  CHECK(p.values[2] == 0.5);
}

TEST_CASE("isotropic compensation drift vanishes") {
  for (int d : {1, 2, 3}) {
    auto m = LevyModel(d, std::vector<double>(d, 0.0), 0.0, RadialMeasure::power_law(1, 1.5));
    for (double c : compensation_drift(m, 1e-4)) CHECK(c == 0.0);
  }
}

TEST_CASE("characteristic function") {
  const int reps = 4000;
  auto g = empirical_char_function(model(RadialMeasure(), 1.0), 1.0, {1.0}, reps, 0.5, 3, 1);
  CHECK(g.target.real() == doctest::Approx(std::exp(-0.5)));
  CHECK(std::abs(g.empirical - g.target) <= 4 / std::sqrt(double(reps)));

  auto cp = empirical_char_function(model(RadialMeasure::finite({0.5}, {3.0})), 1.0, {2 * M_PI}, reps,
                                    0.25, 4, 1);
  CHECK(cp.target.real() == doctest::Approx(std::exp(-3 * (1 - std::cos(M_PI)))));
  CHECK(std::abs(cp.empirical - cp.target) <= 4 / std::sqrt(double(reps)));

  auto z = empirical_char_function(model(RadialMeasure::power_law(1, 1.2), 0.5), 1.0, {0.0}, 1000,
                                   1e-2, 5, 1);
  CHECK(z.empirical == std::complex<double>(1.0, 0.0));
}
