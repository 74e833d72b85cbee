#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "levylab/gauges.hpp"
#include "levylab/levy_sim.hpp"
#include "levylab/resolution_set.hpp"
#include "levylab/spectrum.hpp"

namespace levylab {

using SizeFunction = std::function<double(double)>;

// Union of (time - phi(size), time + phi(size)) over records with size <= 1 and
// size in [2^{-j_hi}, 2^{-j_lo}], clipped to [0, T].
ResolutionSet build_limsup_set(const JumpSet& jumps, const SizeFunction& phi,
                               std::pair<int, int> j_window);

// Same set, sampled and merged one shell at a time (bounded memory). Equal to
// build_limsup_set on sample_jumps(model, T, 2^{-j_hi-1}, seed, replicate).
ResolutionSet build_limsup_set_by_shells(std::shared_ptr<const LevyModel> model, double T,
                                         std::uint64_t seed, std::uint64_t replicate,
                                         const SizeFunction& phi, std::pair<int, int> j_window);

// Cover counts per (generation j <= j_max, size shell k) for records with size <= 1.
CoverCountTable levy_cover_counts(const JumpSet& jumps, int j_max, double cap);

struct ExponentField {
  double T = 1.0;
  std::vector<double> t;
  std::vector<double> alpha_hat;  // +inf where no record qualified
  std::vector<double> h_hat;
  std::vector<std::uint8_t> insufficient;
  double size_lo = 0.0;
  double size_hi = 1.0;
  double cap = 0.0;
  CoverCountTable cover;

  std::size_t flagged() const;
  double median_h() const;  // over unflagged points
};

// alpha_hat(t) = min over records s with size in [size_lo, size_hi] and
// 0 < |t - s| < 1 of log(size)/log|t - s|; h_hat = min(alpha_hat, 1/beta').
// Grid points are the cell centres (m + 1/2) T / M. cover_j_max > 0 also fills
// the cover-count table used by estimate_spectrum.
ExponentField approximation_exponents(const JumpSet& jumps, std::size_t M, double size_lo,
                                      double size_hi, int cover_j_max = 0);

SpectrumEstimate estimate_spectrum(const ExponentField& field, const std::vector<double>& centers,
                                   double width, int j1, int j2);

// phi_q(r) = w^{-1}(r / kappa1^q), q = 1..q_max.
std::vector<ResolutionSet> modulus_approximants(const JumpSet& jumps, const Modulus& w, int q_max,
                                                std::pair<int, int> j_window);

// Intersection over q of the approximants; in-window jump times inside the result
// are recorded as excluded points.
ResolutionSet modulus_exceptional_set(const JumpSet& jumps, const Modulus& w, int q_max,
                                      std::pair<int, int> j_window);

ResolutionSet intersect_independent(const std::vector<ResolutionSet>& sets);

}  // namespace levylab
