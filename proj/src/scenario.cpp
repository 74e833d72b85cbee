#include "levylab/scenario.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "levylab/io.hpp"
#include "levylab/lacunary.hpp"
#include "levylab/levy_sim.hpp"
#include "levylab/netmeasure.hpp"
#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"
#include "levylab/singularity.hpp"

namespace levylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kKinds = {"levy_spectrum", "limsup_dichotomy",  "net_measure",
                                         "intersection",  "modulus",           "lacunary_spectrum",
                                         "lacunary_modulus", "char_function"};

// Typed, tracked access to one TOML table; finish() rejects keys never read.
class Section {
 public:
  Section(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return t_ && t_->contains(key); }
  void touch(const std::string& key) { used_.insert(key); }

  double num(const std::string& key, std::optional<double> def = std::nullopt) {
    const toml::node* n = get(key, def.has_value());
    if (!n) return *def;
    if (auto v = n->value<double>()) return *v;
    fail(key, "expected a number");
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt) {
    const toml::node* n = get(key, def.has_value());
    if (!n) return *def;
    if (n->is_integer()) return *n->value<std::int64_t>();
    fail(key, "expected an integer");
  }

  std::string str(const std::string& key, std::optional<std::string> def = std::nullopt) {
    const toml::node* n = get(key, def.has_value());
    if (!n) return *def;
    if (auto v = n->value<std::string>()) return *v;
    fail(key, "expected a string");
  }

  std::vector<double> nums(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
    const toml::node* n = get(key, def.has_value());
    if (!n) return *def;
    const toml::array* a = n->as_array();
    if (!a) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *a) {
      auto v = e.value<double>();
      if (!v) fail(key, "expected an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::pair<int, int> int_pair(const std::string& key, std::optional<std::pair<int, int>> def = std::nullopt) {
    const toml::node* n = get(key, def.has_value());
    if (!n) return *def;
    const toml::array* a = n->as_array();
    if (!a || a->size() != 2 || !(*a)[0].is_integer() || !(*a)[1].is_integer())
      fail(key, "expected [integer, integer]");
    std::pair<int, int> p{static_cast<int>(*(*a)[0].value<std::int64_t>()),
                          static_cast<int>(*(*a)[1].value<std::int64_t>())};
    if (p.first > p.second) fail(key, "range is reversed");
    return p;
  }

  std::vector<std::pair<double, double>> num_pairs(const std::string& key) {
    const toml::node* n = get(key, false);
    const toml::array* a = n->as_array();
    if (!a) fail(key, "expected an array of [lo, hi] pairs");
    std::vector<std::pair<double, double>> out;
    for (const auto& e : *a) {
      const toml::array* p = e.as_array();
      if (!p || p->size() != 2) fail(key, "expected an array of [lo, hi] pairs");
      auto lo = (*p)[0].value<double>(), hi = (*p)[1].value<double>();
      if (!lo || !hi) fail(key, "expected numbers");
      out.emplace_back(*lo, *hi);
    }
    return out;
  }

  Section sub(const std::string& key, bool required) {
    const toml::node* n = get(key, !required);
    if (!n) return Section(nullptr, path_ + "." + key);
    if (!n->is_table()) fail(key, "expected a table");
    return Section(n->as_table(), path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      const std::string key(k.str());
      if (!used_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("'" + qualified(key) + "': " + what);
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const toml::node* get(const std::string& key, bool optional) {
    used_.insert(key);
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n && !optional) throw ConfigError("missing required key '" + qualified(key) + "'");
    return n;
  }

  const toml::table* t_;
  std::string path_;
  std::set<std::string> used_;
};

struct ExpectSpec {
  std::string metric;
  std::string basis;
  std::optional<double> value, tolerance, min, max;
};

struct Ctx {
  std::filesystem::path dir;
  int workers;
  std::uint64_t seed;
  Report* report;

  void metric(const std::string& name, double v) { report->measured[name] = v; }
  void note(const std::string& s) { report->notes.push_back(s); }
  template <class Fn>
  void artifact(const std::string& name, Fn&& fn) {
    io::to_file(dir / name, std::forward<Fn>(fn));
    report->artifacts.push_back(name);
  }
};

using Pipeline = std::function<void(Ctx&)>;

void bound(bool ok, const std::string& what) {
  if (!ok) throw ResourceError("resource bound exceeded: " + what);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string fmt_h(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", h);
  return buf;
}

RadialMeasure parse_measure(Section s) {
  const std::string type = s.str("type");
  RadialMeasure m;
  if (type == "power_law") {
    const double c = s.num("c", 1.0), alpha = s.num("alpha"), r_max = s.num("r_max", 1.0);
    require(c > 0 && alpha > 0 && alpha < 2 && r_max >= 1.0, "model.measure: need c > 0, alpha in (0,2), r_max >= 1");
    m = RadialMeasure::power_law(c, alpha, r_max);
  } else if (type == "atom_series") {
    const double a = s.num("a"), b = s.num("b");
    require(a > 0, "model.measure: atom_series needs a > 0");
    m = RadialMeasure::atom_series(a, b);
  } else if (type == "finite") {
    auto r = s.nums("radius"), w = s.nums("weight");
    require(r.size() == w.size() && !r.empty(), "model.measure: radius and weight must match");
    m = RadialMeasure::finite(std::move(r), std::move(w));
  } else if (type == "density") {
    const std::string name = s.str("name");
    try {
      m = RadialMeasure::density(name, s.nums("params", std::vector<double>{}));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model.measure: ") + e.what());
    }
  } else if (type == "zero") {
    m = RadialMeasure();
  } else {
    s.fail("type", "unknown measure type '" + type + "'");
  }
  s.finish();
  return m;
}

std::shared_ptr<const LevyModel> parse_levy(Section s) {
  const int d = static_cast<int>(s.integer("d", 1));
  require(d >= 1 && d <= 3, "model.d must be in [1, 3]");
  auto drift = s.nums("drift", std::vector<double>(d, 0.0));
  const double q = s.num("gaussian", 0.0);
  RadialMeasure m = parse_measure(s.sub("measure", true));
  s.finish();
  try {
    return std::make_shared<const LevyModel>(d, std::move(drift), q, std::move(m));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

LacunaryModel parse_lacunary(Section s, std::uint64_t seed) {
  LacunaryModel m;
  m.d = static_cast<int>(s.integer("d", 1));
  m.h_low = s.num("h_low");
  require(m.d >= 1 && m.d <= 2, "model.d must be 1 or 2");
  require(m.h_low > 0, "model.h_low must be positive");
  Section c = s.sub("counts", true);
  const std::string type = c.str("type");
  if (type == "power") {
    const double eta = c.num("eta");
    require(eta > 0 && eta < m.d, "model.counts.eta must lie in (0, d)");
    m.counts = PowerCount{eta};
  } else if (type == "constant") {
    const auto v = c.integer("m");
    require(v >= 0, "model.counts.m must be >= 0");
    m.counts = ConstantCount{static_cast<std::uint64_t>(v)};
  } else if (type == "table") {
    TableCount t;
    for (double v : c.nums("values")) {
      require(v >= 0 && v == std::floor(v), "model.counts.values must be nonnegative integers");
      t.table.push_back(static_cast<std::uint64_t>(v));
    }
    m.counts = t;
  } else {
    c.fail("type", "unknown count generator '" + type + "'");
  }
  c.finish();
  s.finish();
  m.seed = seed;
  return m;
}

GaugeFunction parse_gauge(Section s, int d) {
  const std::string type = s.str("type");
  std::optional<GaugeFunction> g;
  try {
    if (type == "power") g = GaugeFunction::power(s.num("s"), d);
    else if (type == "power_log")
      g = GaugeFunction::power_log(s.num("s"), s.num("p"), s.num("epsilon", 0.5), d);
    else if (type == "zero") g = GaugeFunction::zero(d);
    else s.fail("type", "unknown gauge type '" + type + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("gauge: ") + e.what());
  }
  s.finish();
  return *g;
}

Modulus parse_modulus(Section s) {
  const std::string type = s.str("type");
  if (type != "power") s.fail("type", "unknown modulus type '" + type + "'");
  const double p = s.num("p"), delta0 = s.num("delta0", 0.5);
  s.finish();
  try {
    return Modulus::power(p, delta0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("modulus: ") + e.what());
  }
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) s += x, ++n;
  return n ? s / static_cast<double>(n) : kNaN;
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) s += (x - m) * (x - m), ++n;
  return n > 1 ? std::sqrt(s / static_cast<double>(n - 1) / static_cast<double>(n)) : kNaN;
}

// slope of dim_hat against h over defined bins with h in [lo, hi]
LineFit spectrum_slope(const SpectrumEstimate& s, double lo, double hi, std::size_t* used) {
  std::vector<double> x, y;
  for (const auto& b : s.bins)
    if (b.defined && b.h >= lo - 1e-12 && b.h <= hi + 1e-12) x.push_back(b.h), y.push_back(b.dim_raw);
  *used = x.size();
  if (x.size() < 2) return {kNaN, kNaN, kNaN};
  return fit_line(x, y);
}

void report_spectrum(Ctx& ctx, const SpectrumEstimate& s, std::pair<double, double> slope_range) {
  for (const auto& b : s.bins) {
    ctx.metric("dim_hat@" + fmt_h(b.h), b.defined ? b.dim_hat : kNaN);
    ctx.metric("r2@" + fmt_h(b.h), b.defined ? b.r2 : kNaN);
  }
  std::size_t used = 0;
  const LineFit f = spectrum_slope(s, slope_range.first, slope_range.second, &used);
  ctx.metric("slope", f.slope);
  ctx.metric("slope_intercept", f.intercept);
  ctx.metric("slope_bins", static_cast<double>(used));
  if (used < 2) ctx.note("spectrum slope undefined: fewer than 2 defined bins in range");
}

// ---- pipelines ----

Pipeline levy_spectrum(std::shared_ptr<const LevyModel> model, Section& k) {
  const double T = k.num("T", 1.0);
  const int j_max = static_cast<int>(k.integer("j_max", 14));
  const auto M = static_cast<std::size_t>(k.integer("M", 16384));
  const auto shells = k.int_pair("exponent_shells", std::pair<int, int>{j_max, j_max});
  const auto j_range = k.int_pair("j_range", std::pair<int, int>{8, j_max});
  const auto bins = k.nums("bins", std::vector<double>{0.1, 1.0, 0.1});
  const auto slope_r = k.nums("slope_range", std::vector<double>{0.3, 0.7});
  const int reps = static_cast<int>(k.integer("replicates", 1));
  require(T > 0, "knobs.T must be positive");
  require(bins.size() == 3 && bins[2] > 0 && bins[1] >= bins[0], "knobs.bins must be [lo, hi, width]");
  require(slope_r.size() == 2, "knobs.slope_range must be [lo, hi]");
  require(shells.first >= 0 && shells.second <= j_max, "knobs.exponent_shells must lie in [0, j_max]");
  require(j_range.first >= 1 && j_range.second <= j_max, "knobs.j_range must lie in [1, j_max]");
  bound(M >= 1024 && M <= (std::size_t{1} << 24), "knobs.M must be in [2^10, 2^24]");
  bound(j_max >= 1 && j_max <= 40, "knobs.j_max must be in [1, 40]");
  bound(reps >= 1 && reps <= 1000, "knobs.replicates must be in [1, 1000]");
  bound(T * expected_count(*model, 1.0, std::ldexp(1.0, -j_max - 1)) <= kMaxExpectedJumps,
        "expected jump count above 1e9");
  return [=](Ctx& ctx) {
    const auto centers = bin_centers(bins[0], bins[1], bins[2]);
    const double eps = std::ldexp(1.0, -j_max - 1);
    std::vector<double> med(reps), flagged(reps);
    std::vector<CoverCountTable> tables(reps);
    parallel_for(static_cast<std::size_t>(reps), ctx.workers, [&](std::size_t r) {
      const JumpSet js = sample_jumps(model, T, eps, ctx.seed, r);
      ExponentField f = approximation_exponents(js, M, std::ldexp(1.0, -shells.second - 1),
                                                std::ldexp(1.0, -shells.first), j_range.second);
      med[r] = f.median_h();
      flagged[r] = static_cast<double>(f.flagged()) / static_cast<double>(M);
      tables[r] = std::move(f.cover);
      if (r == 0) {
        ctx.artifact("jumps.csv", [&](std::ostream& os) { io::write_jumps(os, js); });
        ctx.artifact("exponents.csv", [&](std::ostream& os) { io::write_exponent_field(os, f); });
      }
    });
    // cover counts pooled over replicates
    const SpectrumEstimate avg =
        estimate_spectrum(pool_cover_counts(tables), centers, bins[2], j_range.first, j_range.second);
    ctx.artifact("spectrum.csv", [&](std::ostream& os) { io::write_spectrum(os, avg); });
    ctx.metric("median_h", median(med));
    ctx.metric("flagged_fraction", mean(flagged));
    ctx.metric("holder_cap", model->holder_cap());
    double top = kNaN;
    for (const auto& b : avg.bins)
      if (b.defined) top = std::isnan(top) ? b.h : std::max(top, b.h);
    ctx.metric("max_defined_h", top);
    report_spectrum(ctx, avg, {slope_r[0], slope_r[1]});
  };
}

Pipeline limsup_dichotomy(std::shared_ptr<const LevyModel> model, GaugeFunction phi, Section& k) {
  const double T = k.num("T", 1.0);
  const auto win = k.int_pair("j_window", std::pair<int, int>{10, 20});
  const int reps = static_cast<int>(k.integer("replicates", 10));
  require(T > 0, "knobs.T must be positive");
  require(win.first >= 0, "knobs.j_window must be nonnegative");
  bound(reps >= 1 && reps <= 100000, "knobs.replicates must be in [1, 1e5]");
  bound(win.second <= 40, "knobs.j_window upper end must be <= 40");
  bound(T * expected_count(*model, 1.0, std::ldexp(1.0, -win.second - 1)) <= kMaxExpectedJumps,
        "expected jump count above 1e9");
  return [=](Ctx& ctx) {
    std::vector<double> meas(reps);
    const SizeFunction f = [phi](double r) { return phi(r); };
    parallel_for(static_cast<std::size_t>(reps), ctx.workers, [&](std::size_t r) {
      const ResolutionSet s = build_limsup_set_by_shells(model, T, ctx.seed, r, f, win);
      meas[r] = s.measure();
      if (r == 0) ctx.artifact("limsup_set.csv", [&](std::ostream& os) { io::write_resolution_set(os, s); });
    });
    const double lo = std::nextafter(std::ldexp(1.0, -win.second), 0.0);
    const double hi = std::min(1.0, std::ldexp(1.0, -win.first));
    const double cover = 2.0 * T * model->jumps.integrate(f, lo, hi);
    ctx.metric("mean_measure", mean(meas));
    ctx.metric("measure_stderr", stderr_of(meas));
    ctx.metric("mean_measure_over_T", mean(meas) / T);
    ctx.metric("covering_sum", cover);
    ctx.metric("measure_over_covering_sum", cover > 0 ? mean(meas) / cover : kNaN);
  };
}

ResolutionSet fixture_set(std::uint64_t seed, std::uint64_t index, double T) {
  Engine eng = substream(seed, tag::fixture, index);
  std::uniform_int_distribution<int> n_iv(1, 4);
  std::uniform_real_distribution<double> u(0.0, T);
  std::vector<Interval> v;
  const int n = n_iv(eng);
  for (int i = 0; i < n; ++i) {
    double a = u(eng), b = u(eng);
    if (a > b) std::swap(a, b);
    if (b > a) v.push_back({a, b});
  }
  return ResolutionSet::from_intervals(v, T);
}

Pipeline net_measure(GaugeFunction g, Section& k) {
  const double T = k.num("T", 1.0);
  const int c = static_cast<int>(k.integer("c", 2));
  const int J = static_cast<int>(k.integer("J", 4));
  std::vector<std::pair<double, double>> given;
  if (k.has("intervals")) given = k.num_pairs("intervals");
  const std::int64_t fixture = k.integer("fixture_index", 0);
  require(T > 0, "knobs.T must be positive");
  require(c >= 2 && c <= 16, "knobs.c must be in [2, 16]");
  require(J >= root_generation(g, c), "knobs.J below the first admissible generation");
  bound(std::pow(c, J) * T <= 1e8, "c^J T above 1e8 cells");
  for (const auto& [a, b] : given) require(a < b, "knobs.intervals entries must satisfy lo < hi");
  return [=](Ctx& ctx) {
    ResolutionSet set(T);
    if (!given.empty()) {
      std::vector<Interval> v;
      for (const auto& [a, b] : given) v.push_back({a, b});
      set = ResolutionSet::from_intervals(v, T);
    } else {
      set = fixture_set(ctx.seed, static_cast<std::uint64_t>(fixture), T);
    }
    const NetMeasureResult r = net_measure_dp(set, g, c, J);
    ctx.artifact("set.csv", [&](std::ostream& os) { io::write_resolution_set(os, set); });
    ctx.artifact("cover.csv", [&](std::ostream& os) { io::write_cover(os, r.cover, g); });
    ctx.metric("value", r.value);
    ctx.metric("cover_cubes", static_cast<double>(r.cover.cubes.size()));
    ctx.metric("grid_cover_cost", grid_cover_cost(set, g, c, J));
    ctx.metric("hausdorff_g_upper_bound", hausdorff_g_upper_bound(set, g, J, c));
    try {
      const double oracle = net_measure_exhaustive(set, g, c, J);
      ctx.metric("oracle", oracle);
      ctx.metric("oracle_abs_diff", std::abs(oracle - r.value));
    } catch (const std::length_error&) {
      ctx.note("exhaustive oracle skipped: tree too large");
    }
  };
}

Pipeline intersection(std::shared_ptr<const LevyModel> model, Section& k) {
  const double T = k.num("T", 1.0);
  const double alpha = k.num("alpha", 0.5);
  const int K = static_cast<int>(k.integer("K", 3));
  const auto win = k.int_pair("j_window", std::pair<int, int>{4, 14});
  const auto dim_range = k.int_pair("dim_range", std::pair<int, int>{14, 26});
  const int c = static_cast<int>(k.integer("c", 2));
  require(T > 0 && alpha > 0, "knobs.T and knobs.alpha must be positive");
  require(c >= 2, "knobs.c must be >= 2");
  bound(K >= 1 && K <= 64, "knobs.K must be in [1, 64]");
  bound(win.second <= 40, "knobs.j_window upper end must be <= 40");
  bound(K * T * expected_count(*model, 1.0, std::ldexp(1.0, -win.second - 1)) <= kMaxExpectedJumps,
        "expected jump count above 1e9");
  return [=](Ctx& ctx) {
    std::vector<ResolutionSet> sets(K);
    const SizeFunction phi = [alpha](double r) { return std::pow(r, 1.0 / alpha); };
    parallel_for(static_cast<std::size_t>(K), ctx.workers, [&](std::size_t r) {
      sets[r] = build_limsup_set_by_shells(model, T, ctx.seed, r, phi, win);
    });
    const ResolutionSet x = intersect_independent(sets);
    ctx.artifact("intersection.csv", [&](std::ostream& os) { io::write_resolution_set(os, x); });
    const double beta = model->beta().value();
    ctx.metric("target_dimension", std::min(1.0, alpha * beta));
    ctx.metric("codimension_heuristic", std::max(0.0, K * std::min(1.0, alpha * beta) - (K - 1)));
    ctx.metric("measure", x.measure());
    ctx.metric("components", static_cast<double>(x.size()));
    auto fit = [&](const char* name, auto&& fn) {
      try {
        const LineFit f = fn();
        ctx.metric(name, f.slope);
        ctx.metric(std::string(name) + "_r2", f.r2);
      } catch (const std::invalid_argument& e) {
        ctx.metric(name, kNaN);
        ctx.note(std::string(name) + ": " + e.what());
      }
    };
    fit("cover_dimension", [&] { return cover_dimension(x, c, dim_range); });
    fit("box_dimension", [&] { return box_dimension(x, c, dim_range); });
  };
}

Pipeline modulus(std::shared_ptr<const LevyModel> model, Modulus w, GaugeFunction g, Section& k) {
  const double T = k.num("T", 1.0);
  const int q_max = static_cast<int>(k.integer("q_max", 5));
  const auto win = k.int_pair("j_window", std::pair<int, int>{10, 20});
  const int reps = static_cast<int>(k.integer("replicates", 5));
  require(T > 0, "knobs.T must be positive");
  require(q_max >= 1, "knobs.q_max must be >= 1");
  bound(q_max <= 64, "knobs.q_max must be <= 64");
  bound(reps >= 1 && reps <= 10000, "knobs.replicates must be in [1, 1e4]");
  bound(win.second <= 40, "knobs.j_window upper end must be <= 40");
  bound(T * expected_count(*model, 1.0, std::ldexp(1.0, -win.second - 1)) <= 1e8,
        "expected jump count above 1e8 per replicate");
  return [=](Ctx& ctx) {
    std::vector<std::vector<double>> per_q(q_max, std::vector<double>(reps));
    std::vector<double> meas(reps);
    parallel_for(static_cast<std::size_t>(reps), ctx.workers, [&](std::size_t r) {
      const JumpSet js = sample_jumps(model, T, std::ldexp(1.0, -win.second - 1), ctx.seed, r,
                                      std::pair<int, int>{win.first, win.second});
      const auto parts = modulus_approximants(js, w, q_max, win);
      for (int q = 0; q < q_max; ++q) per_q[q][r] = parts[q].measure();
      ResolutionSet s = intersect_independent(parts);
      meas[r] = s.measure();
      if (r == 0) ctx.artifact("exceptional_set.csv", [&](std::ostream& os) { io::write_resolution_set(os, s); });
    });
    for (int q = 0; q < q_max; ++q) ctx.metric("measure_q" + std::to_string(q + 1), mean(per_q[q]));
    ctx.metric("mean_measure", mean(meas));
    ctx.metric("mean_measure_over_T", mean(meas) / T);
    const Verdict v = modulus_divergence_test(g, w, model->jumps);
    ctx.metric("divergence", v == Verdict::Diverges ? 1.0 : v == Verdict::Converges ? 0.0 : kNaN);
    if (v == Verdict::Inconclusive) ctx.note("modulus divergence test inconclusive");
  };
}

Pipeline lacunary_spectrum_pipeline(LacunaryModel model, Section& k) {
  const int j_max = static_cast<int>(k.integer("j_max", 26));
  const auto M = static_cast<std::size_t>(k.integer("M", 16384));
  const auto gen = k.int_pair("gen_window", std::pair<int, int>{7, 14});
  const auto j_range = k.int_pair("j_range", std::pair<int, int>{8, 13});
  const auto bins = k.nums("bins", std::vector<double>{0.4, 1.5, 0.1});
  const auto slope_r = k.nums("slope_range", std::vector<double>{0.8, 1.3});
  const int occ_reps = static_cast<int>(k.integer("occupancy_replicates", 0));
  const int occ_j = static_cast<int>(k.integer("occupancy_generation", 10));
  const auto synth_M = static_cast<std::size_t>(k.integer("synthesis_M", 1024));
  require(bins.size() == 3 && bins[2] > 0, "knobs.bins must be [lo, hi, width]");
  require(slope_r.size() == 2, "knobs.slope_range must be [lo, hi]");
  require(j_range.second < j_max && j_range.first >= 1, "knobs.j_range must lie in [1, j_max)");
  require(occ_j >= 0 && occ_j <= j_max, "knobs.occupancy_generation must lie in [0, j_max]");
  bound(j_max >= 4 && model.d * j_max <= 40, "knobs.j_max out of range");
  bound(M >= 2 && std::pow(static_cast<double>(M), model.d) <= 1 << 24, "knobs.M^d above 2^24");
  bound(occ_reps >= 0 && occ_reps <= 100000, "knobs.occupancy_replicates must be <= 1e5");
  bound(synth_M >= 1 && std::pow(static_cast<double>(synth_M), model.d) <= 1 << 22, "knobs.synthesis_M too large");
  return [=](Ctx& ctx) {
    const CoefficientSupport sup = sample_support(model, j_max);
    const TorusExponentField f = torus_exponents(sup, model, M, gen, j_range.second);
    const auto s = lacunary_spectrum(f, bin_centers(bins[0], bins[1], bins[2]), bins[2], j_range.first,
                                     j_range.second);
    ctx.artifact("support.csv", [&](std::ostream& os) { io::write_support(os, sup); });
    ctx.artifact("exponents.csv", [&](std::ostream& os) { io::write_torus_field(os, f); });
    ctx.artifact("spectrum.csv", [&](std::ostream& os) { io::write_spectrum(os, s); });
    const auto field = synthesize_partial_sum(sup, model, "mexican_hat", j_max, synth_M);
    ctx.artifact("partial_sum.csv", [&](std::ostream& os) { io::write_samples(os, field, model.d, synth_M); });
    double sup_norm = 0;
    for (double v : field) sup_norm = std::max(sup_norm, std::abs(v));
    ctx.metric("partial_sum_sup", sup_norm);
    ctx.metric("partial_sum_bound", partial_sum_bound(sup, model, j_max));
    ctx.metric("h_bar", f.h_bar);
    ctx.metric("median_h", f.median_h());
    bool empty_below = true;
    for (const auto& b : s.bins)
      if (b.h < model.h_low - 1e-12 && b.defined) empty_below = false;
    ctx.metric("empty_below_h_low", empty_below ? 1.0 : 0.0);
    report_spectrum(ctx, s, {slope_r[0], slope_r[1]});
    const double slope = ctx.report->measured["slope"];
    ctx.metric("slope_relative_error", std::abs(slope - model.d / f.h_bar) / (model.d / f.h_bar));
    if (occ_reps > 0) {
      // cube 0 of direction 1 at generation occ_j, across replicates
      std::vector<int> hit(occ_reps);
      parallel_for(static_cast<std::size_t>(occ_reps), ctx.workers, [&](std::size_t r) {
        const CoefficientSupport s2 = sample_support(model, std::max(4, occ_j), r + 1);
        const auto& cubes = s2.cubes[0][occ_j];
        hit[r] = std::binary_search(cubes.begin(), cubes.end(), std::uint64_t{0}) ? 1 : 0;
      });
      const double p = occupancy_probability(model.d, occ_j, model.m(1, occ_j));
      const double obs = static_cast<double>(std::accumulate(hit.begin(), hit.end(), 0)) / occ_reps;
      const double sd = std::sqrt(p * (1 - p) / occ_reps);
      ctx.metric("occupancy_expected", p);
      ctx.metric("occupancy_observed", obs);
      ctx.metric("occupancy_z", sd > 0 ? (obs - p) / sd : (obs == p ? 0.0 : kNaN));
    }
  };
}

Pipeline lacunary_modulus_pipeline(LacunaryModel model, Modulus w, Section& k) {
  const int j_max = static_cast<int>(k.integer("j_max", 20));
  const int q_max = static_cast<int>(k.integer("q_max", 3));
  const auto gen = k.int_pair("gen_window", std::pair<int, int>{4, j_max});
  const int depth = static_cast<int>(k.integer("depth", 16));
  const auto dim_range = k.int_pair("dim_range", std::pair<int, int>{4, 12});
  require(q_max >= 1, "knobs.q_max must be >= 1");
  require(w.is_little_o_power(model.h_low), "modulus: w must be o(delta^h_low)");
  bound(j_max >= 4 && model.d * j_max <= 40, "knobs.j_max out of range");
  bound(depth >= 1 && model.d * depth <= 28, "knobs.depth * d must be <= 28");
  bound(q_max <= 64, "knobs.q_max must be <= 64");
  return [=](Ctx& ctx) {
    const CoefficientSupport sup = sample_support(model, j_max);
    const auto parts = lacunary_modulus_approximants(sup, model, w, q_max, gen, depth);
    TorusRaster acc = parts.front();
    for (std::size_t q = 0; q < parts.size(); ++q) {
      if (q) acc = acc.intersect(parts[q]);
      ctx.metric("volume_q" + std::to_string(q + 1), parts[q].volume());
    }
    ctx.artifact("modulus_set.csv", [&](std::ostream& os) { io::write_raster(os, acc); });
    ctx.metric("volume", acc.volume());
    try {
      const LineFit f = acc.box_dimension(dim_range);
      ctx.metric("box_dimension", f.slope);
    } catch (const std::invalid_argument& e) {
      ctx.metric("box_dimension", kNaN);
      ctx.note(std::string("box_dimension: ") + e.what());
    }
  };
}

Pipeline char_function(std::shared_ptr<const LevyModel> model, Section& k) {
  const double t = k.num("t", 1.0);
  auto lambda = k.nums("lambda", std::vector<double>(model->d, 1.0));
  const int reps = static_cast<int>(k.integer("replicates", 10000));
  const double eps = k.num("eps_min", std::ldexp(1.0, -10));
  require(t > 0, "knobs.t must be positive");
  require(static_cast<int>(lambda.size()) == model->d, "knobs.lambda must have d components");
  require(eps > 0, "knobs.eps_min must be positive");
  bound(reps >= 1000 && reps <= 1000000, "knobs.replicates must be in [1e3, 1e6]");
  bound(reps * t * expected_count(*model, 1.0, eps) <= 1e10, "total jump count above 1e10");
  return [=](Ctx& ctx) {
    const CharFunctionResult r = empirical_char_function(model, t, lambda, reps, eps, ctx.seed, ctx.workers);
    ctx.metric("empirical_re", r.empirical.real());
    ctx.metric("empirical_im", r.empirical.imag());
    ctx.metric("target_re", r.target.real());
    ctx.metric("target_im", r.target.imag());
    ctx.metric("abs_error", r.abs_error);
    ctx.metric("tolerance", r.tolerance);
    ctx.metric("error_over_tolerance", r.abs_error / r.tolerance);
    ctx.metric("eps_effective", r.eps_effective);
  };
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    default: return "inconclusive";
  }
}

nlohmann::json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

struct Scenario::Impl {
  toml::table doc;
  std::string kind;
  std::uint64_t seed = 0;
  std::string model_description;
  std::vector<ExpectSpec> expect;
  // Rebuilt per run so that a seed override reaches seeded models.
  std::function<Pipeline(std::uint64_t)> make;
};

namespace {

std::shared_ptr<Scenario::Impl> build(toml::table doc) {
  auto impl = std::make_shared<Scenario::Impl>();
  Section root(&doc, "");
  const auto version = root.integer("spec_version");
  if (version != kScenarioVersion)
    throw ConfigError("unsupported spec_version " + std::to_string(version));
  impl->kind = root.str("kind");
  if (std::find(kKinds.begin(), kKinds.end(), impl->kind) == kKinds.end())
    root.fail("kind", "unknown kind '" + impl->kind + "'");
  const auto seed = root.integer("seed", 0);
  require(seed >= 0, "seed must be nonnegative");
  impl->seed = static_cast<std::uint64_t>(seed);

  if (const toml::node* e = doc.get("expect")) {
    const toml::array* arr = e->as_array();
    require(arr && arr->is_array_of_tables(), "'expect' must be an array of tables");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      Section s((*arr)[i].as_table(), "expect[" + std::to_string(i) + "]");
      ExpectSpec x;
      x.metric = s.str("metric");
      x.basis = s.str("basis");
      require(x.basis == "reference" || x.basis == "derived" || x.basis == "trivial",
              s.path() + ".basis must be reference, derived or trivial");
      if (s.has("value")) x.value = s.num("value");
      if (s.has("tolerance")) x.tolerance = s.num("tolerance");
      if (s.has("min")) x.min = s.num("min");
      if (s.has("max")) x.max = s.num("max");
      require(x.value.has_value() == x.tolerance.has_value(), s.path() + ": value and tolerance go together");
      require(x.value || x.min || x.max, s.path() + ": needs value/tolerance, min or max");
      s.finish();
      impl->expect.push_back(x);
    }
  }

  const std::string kind = impl->kind;
  const bool lacunary = kind == "lacunary_spectrum" || kind == "lacunary_modulus";
  const bool needs_gauge = kind == "limsup_dichotomy" || kind == "net_measure";
  const bool needs_modulus = kind == "modulus" || kind == "lacunary_modulus";

  // Parse once eagerly for validation; the factory re-parses with the run seed.
  auto factory = [doc, kind, lacunary, needs_gauge, needs_modulus](std::uint64_t run_seed,
                                                                   std::string* describe) -> Pipeline {
    Section r(&doc, "");
    r.integer("spec_version");
    r.str("kind");
    r.integer("seed", 0);
    r.touch("expect");
    Section knobs = r.sub("knobs", false);
    std::shared_ptr<const LevyModel> levy;
    std::optional<LacunaryModel> lac;
    if (kind != "net_measure") {
      if (lacunary) lac = parse_lacunary(r.sub("model", true), run_seed);
      else levy = parse_levy(r.sub("model", true));
    } else {
      r.sub("model", false).finish();
    }
    const int d = lac ? lac->d : (levy ? levy->d : 1);
    std::optional<GaugeFunction> g;
    Section gs = r.sub("gauge", needs_gauge);
    if (gs.present()) {
      g = parse_gauge(gs, kind == "lacunary_modulus" ? d : 1);
      if (!needs_gauge && kind != "modulus") throw ConfigError("'gauge' is not used by kind " + kind);
    }
    std::optional<Modulus> w;
    Section ms = r.sub("modulus", needs_modulus);
    if (ms.present()) {
      if (!needs_modulus) throw ConfigError("'modulus' is not used by kind " + kind);
      w = parse_modulus(ms);
    }
    if (describe) *describe = lac ? lac->describe() : (levy ? levy->describe() : std::string("none"));
    Pipeline p;
    if (kind == "levy_spectrum") p = levy_spectrum(levy, knobs);
    else if (kind == "limsup_dichotomy") p = limsup_dichotomy(levy, *g, knobs);
    else if (kind == "net_measure") p = net_measure(*g, knobs);
    else if (kind == "intersection") p = intersection(levy, knobs);
    else if (kind == "modulus") p = modulus(levy, *w, g ? *g : GaugeFunction::power(1.0), knobs);
    else if (kind == "lacunary_spectrum") p = lacunary_spectrum_pipeline(*lac, knobs);
    else if (kind == "lacunary_modulus") p = lacunary_modulus_pipeline(*lac, *w, knobs);
    else p = char_function(levy, knobs);
    knobs.finish();
    r.finish();
    return p;
  };
  factory(impl->seed, &impl->model_description);
  impl->make = [factory](std::uint64_t s) { return factory(s, nullptr); };
  impl->doc = std::move(doc);
  return impl;
}

toml::table parse_doc(const std::string& text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }
}

Outcome judge(const ExpectSpec& x, double v) {
  if (std::isnan(v)) return Outcome::Inconclusive;
  bool ok = true;
  if (x.value) ok = ok && std::abs(v - *x.value) <= *x.tolerance;
  if (x.min) ok = ok && v >= *x.min;
  if (x.max) ok = ok && v <= *x.max;
  return ok ? Outcome::Pass : Outcome::Fail;
}

}  // namespace

std::vector<std::string> scenario_kinds() { return kKinds; }

bool Report::all_pass() const {
  return std::none_of(expectations.begin(), expectations.end(),
                      [](const ExpectationResult& e) { return e.outcome == Outcome::Fail; });
}

std::string Report::to_json() const {
  nlohmann::json j;
  j["spec_version"] = kScenarioVersion;
  j["kind"] = kind;
  j["seed"] = seed;
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : measured) m[k] = num_json(v);
  j["measured"] = m;
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : expectations) {
    nlohmann::json x;
    x["metric"] = e.metric;
    x["basis"] = e.basis;
    nlohmann::json expected = nlohmann::json::object();
    if (e.value) expected["value"] = *e.value, expected["tolerance"] = *e.tolerance;
    if (e.min) expected["min"] = *e.min;
    if (e.max) expected["max"] = *e.max;
    x["expected"] = expected;
    x["measured"] = num_json(e.measured);
    x["outcome"] = outcome_name(e.outcome);
    ex.push_back(x);
  }
  j["expectations"] = ex;
  j["notes"] = notes;
  j["artifacts"] = artifacts;
  j["all_pass"] = all_pass();
  return j.dump(2);
}

Scenario Scenario::from_string(const std::string& text, const std::string& source) {
  Scenario s;
  s.impl_ = build(parse_doc(text, source));
  return s;
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

const std::string& Scenario::kind() const { return impl_->kind; }
std::uint64_t Scenario::seed() const { return impl_->seed; }

std::string Scenario::echo(std::optional<std::uint64_t> seed_override) const {
  toml::table t = impl_->doc;
  if (seed_override) t.insert_or_assign("seed", static_cast<std::int64_t>(*seed_override));
  std::ostringstream os;
  os << t << '\n';
  return os.str();
}

Report Scenario::run(const RunOptions& opts) const {
  const std::uint64_t seed = opts.seed.value_or(impl_->seed);
  std::filesystem::create_directories(opts.out_dir);
  Report rep;
  rep.kind = impl_->kind;
  rep.seed = seed;
  io::to_file(opts.out_dir / "config.echo", [&](std::ostream& os) { os << echo(seed); });
  Ctx ctx{opts.out_dir, resolve_workers(opts.workers), seed, &rep};
  impl_->make(seed)(ctx);
  std::sort(rep.artifacts.begin(), rep.artifacts.end());
  for (const auto& x : impl_->expect) {
    ExpectationResult r;
    r.metric = x.metric;
    r.basis = x.basis;
    r.value = x.value;
    r.tolerance = x.tolerance;
    r.min = x.min;
    r.max = x.max;
    auto it = rep.measured.find(x.metric);
    if (it == rep.measured.end()) {
      r.measured = kNaN;
      r.outcome = Outcome::Fail;
      rep.notes.push_back("expectation on unknown metric '" + x.metric + "'");
    } else {
      r.measured = it->second;
      r.outcome = judge(x, it->second);
    }
    rep.expectations.push_back(r);
  }
  io::to_file(opts.out_dir / "summary.json", [&](std::ostream& os) { os << rep.to_json() << '\n'; });
  return rep;
}

namespace {

std::string error_json(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  return j.dump();
}

}  // namespace

int cli_run(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
            std::ostream& err) {
  try {
    const Scenario s = Scenario::from_file(config);
    const Report r = s.run(opts);
    for (const auto& e : r.expectations)
      out << outcome_name(e.outcome) << "  " << e.metric << " = " << e.measured << " [" << e.basis << "]\n";
    out << (r.all_pass() ? "all expectations pass" : "some expectations failed") << " ("
        << (opts.out_dir / "summary.json").string() << ")\n";
    return r.all_pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    err << error_json("config", e.what()) << '\n';
    return 3;
  } catch (const ResourceError& e) {
    err << error_json("resource", e.what()) << '\n';
    return 2;
  } catch (const std::length_error& e) {
    err << error_json("resource", e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << error_json("runtime", e.what()) << '\n';
    return 4;
  }
}

int cli_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = Scenario::from_file(config);
    out << "ok: kind=" << s.kind() << " seed=" << s.seed() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << error_json("config", e.what()) << '\n';
    return 3;
  } catch (const ResourceError& e) {
    err << error_json("resource", e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << error_json("runtime", e.what()) << '\n';
    return 4;
  }
}

int cli_list_kinds(std::ostream& out) {
  for (const auto& k : kKinds) out << k << '\n';
  return 0;
}

}  // namespace levylab
