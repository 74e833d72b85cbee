#include "levylab/io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace levylab::io {

namespace {

struct Precise {
  explicit Precise(std::ostream& os) : os_(os), flags_(os.flags()), prec_(os.precision()) {
    os_ << std::setprecision(17);
  }
  ~Precise() {
    os_.flags(flags_);
    os_.precision(prec_);
  }
  std::ostream& os_;
  std::ios::fmtflags flags_;
  std::streamsize prec_;
};

void header(std::ostream& os, const nlohmann::json& j) { os << "# " << j.dump() << '\n'; }

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

void open_for_write(const std::filesystem::path& path, std::ofstream& out) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
}

void write_jumps(std::ostream& os, const JumpSet& jumps) {
  Precise p(os);
  header(os, {{"model", jumps.model ? jumps.model->describe() : ""},
              {"hash", hex(jumps.hash())},
              {"T", jumps.T},
              {"eps_min", jumps.eps_min},
              {"seed", jumps.seed},
              {"replicate", jumps.replicate}});
  os << "time,size";
  for (int c = 0; c < jumps.d; ++c) os << ",direction" << c;
  os << '\n';
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const auto r = jumps[i];
    os << r.time << ',' << r.size;
    for (int c = 0; c < jumps.d; ++c) os << ',' << r.direction[c];
    os << '\n';
  }
}

void write_path(std::ostream& os, const PathSample& path) {
  Precise p(os);
  header(os, {{"d", path.d}, {"points", path.t.size()}, {"compensated", path.include_compensation}});
  os << "t";
  for (int c = 0; c < path.d; ++c) os << ",x" << c;
  os << '\n';
  for (std::size_t i = 0; i < path.t.size(); ++i) {
    os << path.t[i];
    for (int c = 0; c < path.d; ++c) os << ',' << path.values[i * path.d + c];
    os << '\n';
  }
}

void write_resolution_set(std::ostream& os, const ResolutionSet& set) {
  Precise p(os);
  header(os, {{"T", set.horizon()},
              {"j_lo", set.j_lo},
              {"j_hi", set.j_hi},
              {"provenance", set.provenance},
              {"measure", set.measure()},
              {"excluded_points", set.excluded_points.size()}});
  os << "left,right\n";
  for (const auto& iv : set.intervals()) os << iv.lo << ',' << iv.hi << '\n';
}

void write_exponent_field(std::ostream& os, const ExponentField& field) {
  Precise p(os);
  header(os, {{"T", field.T},
              {"size_lo", field.size_lo},
              {"size_hi", field.size_hi},
              {"cap", field.cap},
              {"flagged", field.flagged()}});
  os << "t,alpha_hat,h_hat,flag\n";
  for (std::size_t i = 0; i < field.t.size(); ++i)
    os << field.t[i] << ',' << field.alpha_hat[i] << ',' << field.h_hat[i] << ','
       << static_cast<int>(field.insufficient[i]) << '\n';
}

void write_torus_field(std::ostream& os, const TorusExponentField& field) {
  Precise p(os);
  header(os, {{"d", field.d},
              {"M", field.M},
              {"h_low", field.h_low},
              {"h_bar", field.h_bar},
              {"gen_window", {field.gen_window.first, field.gen_window.second}}});
  for (int c = 0; c < field.d; ++c) os << 'x' << c << ',';
  os << "alpha_hat,h_hat,flag\n";
  for (std::size_t i = 0; i < field.h_hat.size(); ++i) {
    for (double v : field.point(i)) os << v << ',';
    os << field.alpha_hat[i] << ',' << field.h_hat[i] << ',' << static_cast<int>(field.insufficient[i])
       << '\n';
  }
}

void write_spectrum(std::ostream& os, const SpectrumEstimate& spectrum) {
  Precise p(os);
  header(os, {{"width", spectrum.width}, {"j1", spectrum.j1}, {"j2", spectrum.j2}});
  os << "h,dim_hat,r2,n_points,defined\n";
  for (const auto& b : spectrum.bins) {
    os << b.h << ',';
    if (b.defined) os << b.dim_hat << ',' << b.r2;
    else os << "nan,nan";
    os << ',' << b.n_points << ',' << (b.defined ? 1 : 0) << '\n';
  }
}

void write_cover(std::ostream& os, const DyadicCover& cover, const GaugeFunction& g) {
  Precise p(os);
  header(os, {{"base", cover.base},
              {"depth", cover.depth},
              {"root_generation", cover.root_generation},
              {"cost", cover.cost},
              {"gauge", g.name()}});
  os << "generation,index,diameter,g_cost\n";
  for (const auto& c : cover.cubes) {
    const double diam = std::pow(static_cast<double>(cover.base), -c.generation);
    os << c.generation << ',' << c.index << ',' << diam << ',' << g(diam) << '\n';
  }
}

void write_support(std::ostream& os, const CoefficientSupport& support) {
  header(os, {{"d", support.d}, {"j_max", support.j_max}, {"records", support.total()}});
  os << "i,j";
  for (int c = 0; c < support.d; ++c) os << ",k" << c;
  os << '\n';
  for (std::size_t i = 0; i < support.cubes.size(); ++i)
    for (int j = 0; j <= support.j_max; ++j)
      for (std::uint64_t flat : support.cubes[i][j]) {
        os << i + 1 << ',' << j;
        for (int c = 0; c < support.d; ++c)
          os << ',' << ((flat >> (static_cast<unsigned>(j) * c)) & ((std::uint64_t{1} << j) - 1));
        os << '\n';
      }
}

void write_raster(std::ostream& os, const TorusRaster& raster) {
  Precise p(os);
  header(os, {{"d", raster.d}, {"depth", raster.depth}, {"volume", raster.volume()}});
  // run-length listing of marked cells by flat index
  os << "first_cell,last_cell\n";
  std::size_t i = 0;
  while (i < raster.cells.size()) {
    if (!raster.cells[i]) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k + 1 < raster.cells.size() && raster.cells[k + 1]) ++k;
    os << i << ',' << k << '\n';
    i = k + 1;
  }
}

void write_samples(std::ostream& os, const std::vector<double>& values, int d, std::size_t M) {
  Precise p(os);
  header(os, {{"d", d}, {"M", M}});
  for (int c = 0; c < d; ++c) os << 'x' << c << ',';
  os << "value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t rest = i;
    for (int c = 0; c < d; ++c) {
      os << (static_cast<double>(rest % M) + 0.5) / static_cast<double>(M) << ',';
      rest /= M;
    }
    os << values[i] << '\n';
  }
}

}  // namespace levylab::io
