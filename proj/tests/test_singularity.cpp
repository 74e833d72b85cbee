#include <doctest/doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "levylab/singularity.hpp"

using namespace levylab;

namespace {

std::shared_ptr<const LevyModel> levy(double alpha, double q = 0.0) {
  return std::make_shared<const LevyModel>(1, std::vector<double>{0.0}, q, RadialMeasure::power_law(1, alpha));
}

JumpSet single(double time, double size) {
  JumpSet js;
  js.T = 1.0;
  js.eps_min = std::ldexp(1.0, -30);
  js.model = std::make_shared<const LevyModel>(1, std::vector<double>{0.0}, 0.0, RadialMeasure::finite({0.5}, {1.0}));
  js.times = {time};
  js.sizes = {size};
  js.directions = {1.0};
  return js;
}

}  // namespace

TEST_CASE("single-record exponent is the ratio of dyadic logs") {
  const std::size_t M = 1024;
  const std::size_t m0 = 600;
  const double t0 = (m0 + 0.5) / M;
  auto f = approximation_exponents(single(t0 - 1.0 / 16, std::ldexp(1.0, -8)), M, std::ldexp(1.0, -9), 1.0);
  CHECK(f.t[m0] == t0);
  CHECK(f.alpha_hat[m0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.h_hat[m0] == doctest::Approx(2.0).epsilon(1e-14));  // cap is infinite for beta' = 0
  CHECK(std::isinf(f.cap));
}

TEST_CASE("points without candidates are flagged") {
  auto f = approximation_exponents(single(0.5, 0.25), 1024, 0.5, 1.0);
  CHECK(f.flagged() == 1024);
  for (std::size_t m = 0; m < f.t.size(); ++m) {
    CHECK(f.insufficient[m]);
    CHECK(std::isinf(f.alpha_hat[m]));
  }
  CHECK_THROWS(approximation_exponents(single(0.5, 0.25), 512, 0.1, 1.0));
}

TEST_CASE("h_hat never exceeds the cap") {
  auto js = sample_jumps(levy(1.2, 1.0), 1.0, std::ldexp(1.0, -14), 3);
  auto f = approximation_exponents(js, 4096, std::ldexp(1.0, -14), 1.0);
  CHECK(f.cap == doctest::Approx(0.5));
  for (std::size_t m = 0; m < f.t.size(); ++m) {
    CHECK(f.h_hat[m] <= f.cap);
    CHECK(f.alpha_hat[m] >= 0.0);
    CHECK(f.h_hat[m] == std::min(f.alpha_hat[m], f.cap));
  }
}

TEST_CASE("exponent field agrees with limsup set membership") {
  auto js = sample_jumps(levy(1.2), 1.0, std::ldexp(1.0, -13), 17);
  const std::pair<int, int> w{2, 12};
  const double lo = std::ldexp(1.0, -w.second), hi = std::ldexp(1.0, -w.first);
  const std::size_t M = 1 << 14;
  auto f = approximation_exponents(js, M, lo, hi);
  std::mt19937_64 eng(3);
  std::uniform_int_distribution<std::size_t> pick(0, M - 1);
  int checked = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t m = pick(eng);
    if (f.insufficient[m]) continue;
    const double a = f.alpha_hat[m];
    auto above = build_limsup_set(js, [a](double r) { return std::pow(r, 1 / (a * (1 + 1e-9))); }, w);
    auto below = build_limsup_set(js, [a](double r) { return std::pow(r, 1 / (a * (1 - 1e-9))); }, w);
    CHECK(above.contains(f.t[m]));
    CHECK_FALSE(below.contains(f.t[m]));
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("spectrum estimator on synthetic tables") {
  CoverCountTable t;
  t.unit = 1.0;
  t.offset = 0.0;
  t.counts.assign(21, std::vector<std::uint64_t>(21, 0));
  // A single level k ~ j/2 occupying 2^{0.6 j} cells: dimension 0.6 at h = 0.5
  // (effective generation k/h ~ j).
  for (int j = 1; j <= 20; ++j) t.counts[j][j / 2] = std::llround(std::exp2(0.6 * 2 * (j / 2)));
  auto est = estimate_spectrum(t, {0.5, 0.9}, 0.05, 8, 20);
  REQUIRE(est.bins.size() == 2);
  CHECK(est.bins[0].defined);
  CHECK(est.bins[0].dim_hat == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(est.bins[0].r2 > 0.999);
  CHECK_FALSE(est.bins[1].defined);

  // Full occupation: every cell at every generation, dimension 1.
  CoverCountTable full = t;
  for (int j = 1; j <= 20; ++j) {
    std::fill(full.counts[j].begin(), full.counts[j].end(), 0);
    full.counts[j][j / 2] = std::uint64_t(1) << (2 * (j / 2));
  }
  auto est_full = estimate_spectrum(full, {0.5}, 0.05, 8, 20);
  CHECK(est_full.bins[0].dim_hat == doctest::Approx(1.0).epsilon(1e-9));

  auto pooled = pool_cover_counts({t, t, t});
  CHECK(pooled.counts[10][5] == 3 * t.counts[10][5]);
  CoverCountTable other = t;
  other.unit = 2.0;
  CHECK_THROWS(pool_cover_counts({t, other}));
}

TEST_CASE("fit_line recovers exact lines") {
  auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("modulus exceptional sets") {
  auto js = sample_jumps(levy(1.0), 1.0, std::ldexp(1.0, -15), 9);
  auto w = Modulus::power(2.0);
  const std::pair<int, int> win{4, 14};
  auto approx = modulus_approximants(js, w, 4, win);
  REQUIRE(approx.size() == 4);
  auto phi1 = [&w](double r) { return w.inverse(r / w.kappa1()); };
  auto direct = build_limsup_set(js, phi1, win);
  auto single_q = modulus_exceptional_set(js, w, 1, win);
  CHECK(single_q.measure() == doctest::Approx(direct.measure()).epsilon(1e-12));
  CHECK(single_q.size() == direct.size());
  for (int q = 1; q < 4; ++q) {
    auto a = modulus_exceptional_set(js, w, q, win), b = modulus_exceptional_set(js, w, q + 1, win);
    CHECK(b.is_subset_of(a));
    CHECK(approx[q].is_subset_of(approx[q - 1]));
  }
  for (double p : modulus_exceptional_set(js, w, 2, win).excluded_points) {
    bool is_jump = false;
    for (double t : js.times) is_jump |= (t == p);
    CHECK(is_jump);
  }
  CHECK_THROWS(modulus_exceptional_set(js, w, 0, win));
}
