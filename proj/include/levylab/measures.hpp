#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "levylab/rng.hpp"
#include "levylab/series_classifier.hpp"

namespace levylab {

// sigma(dr) = c r^{-1-alpha} dr on (0, r_max].
struct PowerLaw {
  double c = 1.0;
  double alpha = 1.0;
};

// Atoms r_k = k^{-a} with weights w_k = k^{-b}, k >= 1.
struct AtomSeries {
  double a = 1.0;
  double b = 1.0;
};

// Finitely many atoms (r_k, w_k).
struct FiniteAtoms {
  std::vector<double> radius;
  std::vector<double> weight;
};

// Named built-in density on (0, 1].
struct PiecewiseDensity {
  std::string name;
  std::vector<double> params;
  std::function<double(double)> density;
  // Built-ins: "power" {c, alpha}, "power_log" {c, alpha, p}, "shell_table_2j_over_j2" {}.
  static PiecewiseDensity builtin(const std::string& name, const std::vector<double>& params);
};

class ShellSampler;

class RadialMeasure {
 public:
  using Variant = std::variant<PowerLaw, AtomSeries, FiniteAtoms, PiecewiseDensity>;

  RadialMeasure();  // zero measure
  explicit RadialMeasure(Variant v, double r_max = 1.0);

  static RadialMeasure power_law(double c, double alpha, double r_max = 1.0);
  static RadialMeasure atom_series(double a, double b);
  static RadialMeasure finite(std::vector<double> radius, std::vector<double> weight);
  static RadialMeasure density(const std::string& name, const std::vector<double>& params);

  const Variant& variant() const { return v_; }
  double r_max() const { return r_max_; }
  std::string kind() const;
  std::string describe() const;

  // sigma((2^{-j-1}, 2^{-j}] intersected with (0, r_max]).
  double shell_mass(int j) const;
  double log2_shell_mass(int j) const;
  // sigma((1, r_max]).
  double big_mass() const;
  bool is_zero() const;
  bool has_infinite_mass() const;
  // Shells with bounded masses of constant order (flat in j).
  bool has_flat_shells() const;

  // integral of f over (lo, hi] with respect to sigma.
  double integrate(const std::function<double(double)>& f, double lo, double hi) const;

  // Shell index (2^{-j-1}, 2^{-j}] of a size in (0, 1]; -1 for sizes above 1.
  static int shell_of(double size);

  ShellSampler shell_sampler(int j) const;
  ShellSampler big_sampler() const;

 private:
  Variant v_;
  double r_max_ = 1.0;
  bool zero_ = false;
};

// Inverse-CDF sampler of sigma restricted to one shell.
class ShellSampler {
 public:
  ShellSampler() = default;
  explicit ShellSampler(std::function<double(Engine&)> f) : f_(std::move(f)) {}
  double operator()(Engine& eng) const { return f_(eng); }
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::function<double(Engine&)> f_;
};

struct QuadratureError : std::runtime_error {
  int shell;
  QuadratureError(const std::string& what, int j) : std::runtime_error(what), shell(j) {}
};

enum class Condition { Holds, Fails, Inconclusive };
std::string to_string(Condition c);

struct ConditionResult {
  Condition condition = Condition::Inconclusive;
  double partial_sum = 0.0;
  double last_ratio = 0.0;
};

double shell_mass(const RadialMeasure& m, int j);

// sum_j 2^{-j} sqrt(c_j log(1 + c_j)) < infinity.
ConditionResult jaffard_condition(const RadialMeasure& m, int j_max);

// Blumenthal-Getoor index.
ExponentEstimate bg_index(const RadialMeasure& m, bool allow_analytic = true);

// Levy triplet with the isotropic direction convention. For d > 1 the Gaussian
// part is q times the identity.
struct LevyModel {
  int d = 1;
  std::vector<double> drift{0.0};
  double gaussian = 0.0;
  RadialMeasure jumps;

  LevyModel() = default;
  LevyModel(int dim, std::vector<double> a, double q, RadialMeasure m);

  ExponentEstimate beta() const { return bg_index(jumps); }
  double beta_prime() const;
  // 1/beta', +inf when beta' = 0.
  double holder_cap() const;
  // Characteristic exponent with jumps restricted to sizes > eps.
  std::complex<double> psi(const std::vector<double>& lambda, double eps) const;
  std::string describe() const;
};

}  // namespace levylab
