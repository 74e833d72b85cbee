#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "levylab/gauges.hpp"
#include "levylab/series_classifier.hpp"
#include "levylab/spectrum.hpp"

namespace levylab {

// m_{i,j} = floor(2^{eta j})
struct PowerCount {
  double eta = 0.5;
};
struct ConstantCount {
  std::uint64_t m = 1;
};
// m_{i,j} = table[j] for j < table.size(), 0 beyond.
struct TableCount {
  std::vector<std::uint64_t> table;
};
using CountGenerator = std::variant<PowerCount, ConstantCount, TableCount>;

struct LacunaryModel {
  int d = 1;
  double h_low = 0.5;
  CountGenerator counts = PowerCount{};
  std::uint64_t seed = 0;

  int directions() const { return (1 << d) - 1; }
  // Generator value clipped to [0, 2^{dj}].
  std::uint64_t m(int i, int j) const;
  std::string describe() const;
};

struct CoefficientSupport {
  int d = 1;
  int j_max = 0;
  // cubes[i-1][j]: sorted distinct flat cube indices, flat = sum_c k_c 2^{j c}
  std::vector<std::vector<std::vector<std::uint64_t>>> cubes;
  // drawn[i-1][j] = m_{i,j}
  std::vector<std::vector<std::uint64_t>> drawn;

  std::uint64_t occupied(int i, int j) const { return cubes[i - 1][j].size(); }
  std::uint64_t occupied_at(int j) const;
  std::size_t total() const;
};

inline constexpr double kMaxSupportDraws = 1e8;

CoefficientSupport sample_support(const LacunaryModel& model, int j_max, std::uint64_t replicate = 0);

// P((i, lambda) in M) for a fixed cube of generation j.
double occupancy_probability(int d, int j, std::uint64_t m);

ExponentEstimate hbar_exponent(const LacunaryModel& model);
ExponentEstimate h_g_lacunary(const LacunaryModel& model, const GaugeFunction& g);

// Torus distance with the max-coordinate quotient metric.
double torus_distance(const double* x, const double* y, int d);

struct TorusExponentField {
  int d = 1;
  std::size_t M = 0;  // points per axis; point index -> coordinates (m_c + 1/2)/M
  std::vector<double> alpha_hat;
  std::vector<double> h_hat;
  std::vector<std::uint8_t> insufficient;
  double h_low = 0.0;
  double h_bar = 0.0;
  std::pair<int, int> gen_window{0, 0};
  CoverCountTable cover;

  double median_h() const;
  std::vector<double> point(std::size_t index) const;
};

// alpha_hat(x) = min over coefficients of generation in gen_window of
// h_low * gen / log2(1/dist(x, x_lambda)), skipping dist = 0 and dist >= 1/2.
TorusExponentField torus_exponents(const CoefficientSupport& support, const LacunaryModel& model,
                                   std::size_t M, std::pair<int, int> gen_window,
                                   int cover_j_max = 0);

SpectrumEstimate lacunary_spectrum(const TorusExponentField& field, const std::vector<double>& centers,
                                   double width, int j1, int j2);

// Dyadic indicator of depth `depth` on the torus; a cell is marked when its centre
// lies in the set.
struct TorusRaster {
  int d = 1;
  int depth = 0;
  std::vector<std::uint8_t> cells;

  double volume() const;
  LineFit box_dimension(std::pair<int, int> j_range) const;
  TorusRaster intersect(const TorusRaster& other) const;
};

// L_phi approximant: points within phi(2^{-gen}) of a coefficient with gen in window.
TorusRaster lacunary_limsup_set(const CoefficientSupport& support,
                                const std::function<double(double)>& phi,
                                std::pair<int, int> gen_window, int depth);

std::vector<TorusRaster> lacunary_modulus_approximants(const CoefficientSupport& support,
                                                       const LacunaryModel& model, const Modulus& w,
                                                       int q_max, std::pair<int, int> gen_window,
                                                       int depth);

TorusRaster lacunary_modulus_set(const CoefficientSupport& support, const LacunaryModel& model,
                                 const Modulus& w, int q_max, std::pair<int, int> gen_window,
                                 int depth);

// Visualization-only partial sum with a non-orthonormal bump. profile is
// "mexican_hat" (wavelet axes) with a Gaussian on scaling axes. Returns M^d samples.
std::vector<double> synthesize_partial_sum(const CoefficientSupport& support,
                                           const LacunaryModel& model, const std::string& profile,
                                           int j_max, std::size_t M);

// Triangle-inequality bound sum_j (#occupied at j) 2^{-h_low j} ||profile||_inf.
double partial_sum_bound(const CoefficientSupport& support, const LacunaryModel& model, int j_max);

}  // namespace levylab
