#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "levylab/measures.hpp"
#include "levylab/series_classifier.hpp"

namespace levylab {

class GaugeFunction {
 public:
  // Validates on a 2^12-point geometric grid of (0, epsilon] that g > 0 and g is
  // nondecreasing; throws std::invalid_argument on a relative violation > 1e-12.
  GaugeFunction(std::string name, std::function<double(double)> g, double epsilon, int d = 1,
                std::optional<double> exponent_hint = std::nullopt);

  static GaugeFunction power(double s, int d = 1);
  static GaugeFunction zero(int d = 1);
  // r^s (log(1/r))^p on (0, epsilon].
  static GaugeFunction power_log(double s, double p, double epsilon, int d = 1);

  double operator()(double r) const { return zero_ ? 0.0 : g_(r); }
  const std::string& name() const { return name_; }
  double epsilon() const { return eps_; }
  int dim() const { return d_; }
  bool is_zero() const { return zero_; }
  std::optional<double> exponent_hint() const { return hint_; }
  // Set when g = Id^s exactly.
  std::optional<double> power_exponent() const { return power_; }
  // r -> g(r)/r^dim nonincreasing on the validation grid.
  bool in_class_d() const { return in_dd_; }
  bool ratio_nonincreasing(int d) const;

 private:
  GaugeFunction() = default;
  std::string name_;
  std::function<double(double)> g_;
  double eps_ = 1.0;
  int d_ = 1;
  std::optional<double> hint_;
  std::optional<double> power_;
  bool zero_ = false;
  bool in_dd_ = false;
  bool normalized_ = false;

  friend GaugeFunction normalize_d(const GaugeFunction&, int);
};

// Geometric validation grid eps * 2^{-i/64}, i = 0..4095.
std::vector<double> gauge_grid(double epsilon);

// g_d(r) = r^d inf_{rho <= r} g(rho)/rho^d.
GaugeFunction normalize_d(const GaugeFunction& g, int d);

ExponentEstimate critical_exponent_h_g(const GaugeFunction& g, const RadialMeasure& m,
                                       bool allow_fast_path = true);

struct NotInClassD {
  double liminf;
  double limsup;
};
using LogExponent = std::variant<double, NotInClassD>;

LogExponent gauge_log_exponent(const GaugeFunction& g);

class Modulus {
 public:
  // Validates doubling bounds on the grid delta0 * 2^{-i/8}, i = 0..320, and the
  // inverse round trip. inverse may be empty (bisection on a log scale).
  Modulus(std::string name, std::function<double(double)> w,
          std::function<double(double)> inverse = {}, double delta0 = 0.5);

  static Modulus power(double p, double delta0 = 0.5);

  double operator()(double delta) const { return w_(delta); }
  double inverse(double r) const;
  double kappa1() const { return k1_; }
  double kappa2() const { return k2_; }
  double delta0() const { return delta0_; }
  const std::string& name() const { return name_; }
  // w(delta) = o(delta^h) on the grid.
  bool is_little_o_power(double h) const;
  std::optional<double> power_exponent() const { return power_; }

 private:
  std::string name_;
  std::function<double(double)> w_;
  std::function<double(double)> inv_;
  double delta0_;
  double k1_ = 0, k2_ = 0;
  std::optional<double> power_;
};

Verdict modulus_divergence_test(const GaugeFunction& g, const Modulus& w, const RadialMeasure& m);

}  // namespace levylab
