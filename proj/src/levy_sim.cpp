#include "levylab/levy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"

namespace levylab {

namespace {

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void draw_direction(Engine& eng, int d, double* out) {
  if (d == 1) {
    out[0] = (eng() >> 63) ? 1.0 : -1.0;
    return;
  }
  std::normal_distribution<double> normal;
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      out[i] = normal(eng);
      n2 += out[i] * out[i];
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < d; ++i) out[i] *= inv;
}

double shell_intensity(const LevyModel& m, int j) {
  return j < 0 ? m.jumps.big_mass() : m.jumps.shell_mass(j);
}

}  // namespace

std::uint64_t JumpSet::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  if (model) {
    const std::string s = model->describe();
    fnv(h, s.data(), s.size());
  }
  fnv(h, &T, sizeof T);
  fnv(h, &eps_min, sizeof eps_min);
  fnv(h, &seed, sizeof seed);
  fnv(h, &replicate, sizeof replicate);
  fnv(h, times.data(), times.size() * sizeof(double));
  fnv(h, sizes.data(), sizes.size() * sizeof(double));
  fnv(h, directions.data(), directions.size() * sizeof(double));
  return h;
}

int deepest_shell(double eps_min) {
  if (!(eps_min > 0)) throw std::invalid_argument("eps_min must be positive");
  int j = static_cast<int>(std::floor(-std::log2(eps_min))) - 1;
  while (j >= 0 && std::exp2(-j - 1.0) < eps_min) --j;
  while (std::exp2(-j - 2.0) >= eps_min) ++j;
  return std::max(j, -1);
}

double effective_cutoff(double eps_min) {
  const int j = deepest_shell(eps_min);
  return j < 0 ? 1.0 : std::exp2(-j - 1.0);
}

double expected_count(const LevyModel& model, double T, double eps_min) {
  double total = eps_min <= 1.0 ? model.jumps.big_mass() : 0.0;
  const int last = deepest_shell(eps_min);
  for (int j = 0; j <= last; ++j) total += model.jumps.shell_mass(j);
  return T * total;
}

JumpSet sample_shell(std::shared_ptr<const LevyModel> model, double T, int j, std::uint64_t seed,
                     std::uint64_t replicate) {
  JumpSet s;
  s.T = T;
  s.seed = seed;
  s.replicate = replicate;
  s.d = model->d;
  s.shell_first = s.shell_last = j;
  s.eps_min = j < 0 ? 1.0 : std::exp2(-j - 1.0);
  s.model = model;
  const double mean = T * shell_intensity(*model, j);
  if (!(mean > 0)) return s;
  if (mean > kMaxExpectedJumps) throw ResourceError("expected jump count exceeds 1e9");

  Engine eng = substream(seed, tag::shell, static_cast<std::uint64_t>(j + 1), replicate);
  const auto n = static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(eng));
  if (n == 0) return s;

  // Sorted uniform times from normalized exponential spacings.
  std::exponential_distribution<double> expo(1.0);
  s.times.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += expo(eng);
    s.times[i] = acc;
  }
  const double total = acc + expo(eng);
  for (double& t : s.times) t = T * (t / total);

  const ShellSampler draw = j < 0 ? model->jumps.big_sampler() : model->jumps.shell_sampler(j);
  s.sizes.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.sizes[i] = draw(eng);

  s.directions.resize(n * static_cast<std::size_t>(s.d));
  for (std::size_t i = 0; i < n; ++i) draw_direction(eng, s.d, s.directions.data() + i * s.d);
  return s;
}

JumpSet sample_jumps(std::shared_ptr<const LevyModel> model, double T, double eps_min,
                     std::uint64_t seed, std::uint64_t replicate,
                     std::optional<std::pair<int, int>> shells) {
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  if (!(eps_min > 0)) throw std::invalid_argument("eps_min must be positive");
  const double expected = expected_count(*model, T, eps_min);
  if (expected > kMaxExpectedJumps)
    throw ResourceError("expected jump count exceeds 1e9; raise eps_min");

  JumpSet out;
  out.T = T;
  out.eps_min = eps_min;
  out.seed = seed;
  out.replicate = replicate;
  out.d = model->d;
  out.model = model;

  int first = eps_min <= 1.0 && model->jumps.big_mass() > 0 ? -1 : 0;
  int last = eps_min < model->jumps.r_max() ? deepest_shell(eps_min) : -2;
  if (shells) {
    first = std::max(first, shells->first);
    last = std::min(last, shells->second);
  }
  out.shell_first = first;
  out.shell_last = last;

  std::vector<JumpSet> parts;
  std::size_t total = 0;
  for (int j = first; j <= last; ++j) {
    parts.push_back(sample_shell(model, T, j, seed, replicate));
    total += parts.back().size();
  }
  if (parts.size() == 1) {
    out.times = std::move(parts[0].times);
    out.sizes = std::move(parts[0].sizes);
    out.directions = std::move(parts[0].directions);
    return out;
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> ref;
  ref.reserve(total);
  for (std::uint32_t p = 0; p < parts.size(); ++p)
    for (std::uint32_t i = 0; i < parts[p].size(); ++i) ref.emplace_back(p, i);
  std::stable_sort(ref.begin(), ref.end(), [&](const auto& a, const auto& b) {
    const double ta = parts[a.first].times[a.second], tb = parts[b.first].times[b.second];
    if (ta != tb) return ta < tb;
    return parts[a.first].sizes[a.second] > parts[b.first].sizes[b.second];
  });
  out.times.resize(total);
  out.sizes.resize(total);
  out.directions.resize(total * static_cast<std::size_t>(out.d));
  for (std::size_t k = 0; k < total; ++k) {
    const auto& part = parts[ref[k].first];
    const std::size_t i = ref[k].second;
    out.times[k] = part.times[i];
    out.sizes[k] = part.sizes[i];
    std::memcpy(out.directions.data() + k * out.d, part.directions.data() + i * out.d,
                sizeof(double) * out.d);
  }
  return out;
}

double compensation_sum(const JumpSet& jumps, const std::function<double(double)>& phi, double n) {
  double s = 0.0;
  for (std::size_t i = 0; i < jumps.size() && jumps.times[i] <= n; ++i)
    if (jumps.sizes[i] <= 1.0) s += phi(jumps.sizes[i]);
  return s;
}

std::vector<double> compensation_drift(const LevyModel& model, double eps) {
  // Directions are uniform on the sphere, so the mean direction is exactly 0 and
  // the drift is 0 * integral of r sigma(dr) over [eps, 1).
  const double radial = eps < 1.0 ? model.jumps.integrate([](double r) { return r; }, eps, 1.0) : 0.0;
  std::vector<double> out(model.d, 0.0);
  for (double& v : out) v *= radial;
  return out;
}

PathSample assemble_path(const JumpSet& jumps, std::size_t N, bool include_compensation) {
  if (N < 2) throw std::invalid_argument("assemble_path needs N >= 2");
  const LevyModel& m = *jumps.model;
  const int d = m.d;
  PathSample p;
  p.d = d;
  p.include_compensation = include_compensation;
  p.t.resize(N);
  for (std::size_t k = 0; k < N; ++k) p.t[k] = jumps.T * static_cast<double>(k) / static_cast<double>(N - 1);
  const std::size_t cells = N * static_cast<std::size_t>(d);
  p.drift.assign(cells, 0.0);
  p.gaussian.assign(cells, 0.0);
  p.big_jumps.assign(cells, 0.0);
  p.small_jumps.assign(cells, 0.0);
  p.compensation_drift = include_compensation ? compensation_drift(m, effective_cutoff(jumps.eps_min))
                                              : std::vector<double>(d, 0.0);

  for (std::size_t k = 0; k < N; ++k)
    for (int c = 0; c < d; ++c) p.drift[k * d + c] = -m.drift[c] * p.t[k];

  if (m.gaussian > 0) {
    Engine eng = substream(jumps.seed, tag::brownian, jumps.replicate);
    std::normal_distribution<double> normal;
    for (std::size_t k = 1; k < N; ++k) {
      const double sd = std::sqrt(m.gaussian * (p.t[k] - p.t[k - 1]));
      for (int c = 0; c < d; ++c) p.gaussian[k * d + c] = p.gaussian[(k - 1) * d + c] + sd * normal(eng);
    }
  }

  std::vector<double> big(d, 0.0), small(d, 0.0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < N; ++k) {
    while (i < jumps.size() && jumps.times[i] <= p.t[k]) {
      auto& acc = jumps.sizes[i] >= 1.0 ? big : small;
      for (int c = 0; c < d; ++c) acc[c] += jumps.sizes[i] * jumps.directions[i * d + c];
      ++i;
    }
    for (int c = 0; c < d; ++c) {
      p.big_jumps[k * d + c] = big[c];
      p.small_jumps[k * d + c] = small[c] - p.t[k] * p.compensation_drift[c];
    }
  }

  p.values.resize(cells);
  for (std::size_t x = 0; x < cells; ++x)
    p.values[x] = p.drift[x] + p.gaussian[x] + p.big_jumps[x] + p.small_jumps[x];
  return p;
}

CharFunctionResult empirical_char_function(std::shared_ptr<const LevyModel> model, double t,
                                           const std::vector<double>& lambda, int replicates,
                                           double eps_min, std::uint64_t seed, int workers) {
  if (replicates < 1000) throw std::invalid_argument("empirical_char_function needs >= 1000 replicates");
  if (static_cast<int>(lambda.size()) != model->d) throw std::invalid_argument("lambda size != d");
  std::vector<std::complex<double>> slot(replicates);
  parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
    const JumpSet js = sample_jumps(model, t, eps_min, seed, r);
    const PathSample p = assemble_path(js, 2, true);
    double phase = 0.0;
    for (int c = 0; c < model->d; ++c) phase += lambda[c] * p.values[model->d + c];
    slot[r] = std::polar(1.0, phase);
  });
  CharFunctionResult out;
  std::complex<double> sum = 0.0;
  for (const auto& z : slot) sum += z;
  out.empirical = sum / static_cast<double>(replicates);
  out.eps_effective = effective_cutoff(eps_min);
  out.target = std::exp(-t * model->psi(lambda, out.eps_effective));
  out.abs_error = std::abs(out.empirical - out.target);
  out.tolerance = 4.0 / std::sqrt(static_cast<double>(replicates));
  return out;
}

}  // namespace levylab
