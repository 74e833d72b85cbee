#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "levylab/lacunary.hpp"
#include "levylab/levy_sim.hpp"
#include "levylab/netmeasure.hpp"
#include "levylab/resolution_set.hpp"
#include "levylab/singularity.hpp"
#include "levylab/spectrum.hpp"

namespace levylab::io {

// Every writer emits a '#'-prefixed JSON header line followed by a CSV header row.
// Doubles are printed with 17 significant digits so that outputs are bit-exact.

void write_jumps(std::ostream& os, const JumpSet& jumps);
void write_path(std::ostream& os, const PathSample& path);
void write_resolution_set(std::ostream& os, const ResolutionSet& set);
void write_exponent_field(std::ostream& os, const ExponentField& field);
void write_torus_field(std::ostream& os, const TorusExponentField& field);
void write_spectrum(std::ostream& os, const SpectrumEstimate& spectrum);
void write_cover(std::ostream& os, const DyadicCover& cover, const GaugeFunction& g);
void write_support(std::ostream& os, const CoefficientSupport& support);
void write_raster(std::ostream& os, const TorusRaster& raster);
void write_samples(std::ostream& os, const std::vector<double>& values, int d, std::size_t M);

void open_for_write(const std::filesystem::path& path, std::ofstream& out);

// Opens path for writing and calls fn(stream); throws on I/O failure.
template <class Fn>
void to_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out;
  open_for_write(path, out);
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace levylab::io
