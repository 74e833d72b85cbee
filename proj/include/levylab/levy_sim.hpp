#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "levylab/measures.hpp"

namespace levylab {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JumpRecord {
  double time;
  double size;
  const double* direction;  // d components
};

// Realization of the jump measure on [0, T], sorted by (time, size descending).
// Stored column-wise: times, sizes, directions (d values per record).
struct JumpSet {
  double T = 1.0;
  double eps_min = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  int d = 1;
  int shell_first = 0;  // -1 denotes the big-jump shell (1, r_max]
  int shell_last = -2;  // empty range when shell_last < shell_first
  std::shared_ptr<const LevyModel> model;
  std::vector<double> times;
  std::vector<double> sizes;
  std::vector<double> directions;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  JumpRecord operator[](std::size_t i) const {
    return {times[i], sizes[i], directions.data() + i * static_cast<std::size_t>(d)};
  }
  // FNV-1a over the model description and the raw columns.
  std::uint64_t hash() const;
};

// Deepest shell j with 2^{-j-1} >= eps_min; -1 when no shell of (0, 1] qualifies.
int deepest_shell(double eps_min);
// Smallest simulated size bound: 2^{-deepest_shell-1} (1 when no shell qualifies).
double effective_cutoff(double eps_min);
// T * sigma over the simulated window.
double expected_count(const LevyModel& model, double T, double eps_min);

// One shell (j = -1 for (1, r_max]) from its own substream (seed, shell, replicate).
JumpSet sample_shell(std::shared_ptr<const LevyModel> model, double T, int j, std::uint64_t seed,
                     std::uint64_t replicate = 0);

// All shells with 2^{-j-1} >= eps_min, optionally restricted to shells in
// [shells->first, shells->second]. Restricting yields exactly the records of the
// unrestricted set whose shell lies in the range.
JumpSet sample_jumps(std::shared_ptr<const LevyModel> model, double T, double eps_min,
                     std::uint64_t seed, std::uint64_t replicate = 0,
                     std::optional<std::pair<int, int>> shells = std::nullopt);

inline constexpr double kMaxExpectedJumps = 1e9;

// sum of phi(size) over records with time <= n and size <= 1.
double compensation_sum(const JumpSet& jumps, const std::function<double(double)>& phi, double n);

struct PathSample {
  int d = 1;
  std::vector<double> t;
  // N x d, row-major
  std::vector<double> values;
  std::vector<double> drift;
  std::vector<double> gaussian;
  std::vector<double> big_jumps;
  std::vector<double> small_jumps;
  bool include_compensation = true;
  // integral of x pi(dx) over the compensated band; zero under isotropy.
  std::vector<double> compensation_drift;
};

PathSample assemble_path(const JumpSet& jumps, std::size_t N, bool include_compensation = true);

// Mean of x over eps <= |x| < 1 under the isotropic convention (per unit time).
std::vector<double> compensation_drift(const LevyModel& model, double eps);

struct CharFunctionResult {
  std::complex<double> empirical;
  std::complex<double> target;
  double abs_error = 0.0;
  double tolerance = 0.0;
  double eps_effective = 0.0;
};

CharFunctionResult empirical_char_function(std::shared_ptr<const LevyModel> model, double t,
                                           const std::vector<double>& lambda, int replicates,
                                           double eps_min, std::uint64_t seed, int workers = 0);

}  // namespace levylab
