#include "talbot/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace talbot {

namespace {

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  return out;
}

}  // namespace

std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

void write_bands_csv(const std::string& path, const BandDiagram& bands) {
  std::ofstream out = open_out(path);
  out << "q,alpha,re_E,im_E,beta\n";
  for (std::size_t j = 0; j < bands.q.size(); ++j)
    for (std::size_t a = 0; a < bands.energies[j].size(); ++a)
      out << format_sci(bands.q[j]) << ',' << a << ','
          << format_sci(bands.energies[j][a].real()) << ','
          << format_sci(bands.energies[j][a].imag()) << ',' << bands.beta[a]
          << '\n';
}

void write_singularities_csv(const std::string& path,
                             const SingularityReport& report) {
  std::ofstream out = open_out(path);
  out << "n,E,q_loc,defective,angle\n";
  for (const auto& e : report.entries)
    out << e.n << ',' << format_sci(e.energy) << ',' << format_sci(e.q_loc)
        << ',' << (e.defective ? 1 : 0) << ',' << format_sci(e.coalescence_angle)
        << '\n';
}

void write_trace_csv(const std::string& path, const PropagationTrace& trace) {
  std::ofstream out = open_out(path);
  out << "z,delta,delta_half,norm\n";
  for (std::size_t k = 0; k < trace.z.size(); ++k)
    out << format_sci(trace.z[k]) << ',' << format_sci(trace.deviation[k]) << ','
        << format_sci(trace.deviation_half[k]) << ',' << format_sci(trace.norm[k])
        << '\n';
}

void write_snapshots_csv(const std::string& path, const PropagationTrace& trace,
                         int grid_points) {
  std::ofstream out = open_out(path);
  out << "z,x,re_psi,im_psi\n";
  if (trace.snapshots.empty()) return;
  int max_mode = 0;
  for (const Wavefield& s : trace.snapshots)
    max_mode = std::max(max_mode, s.max_abs_mode());
  while (grid_points / 2 <= max_mode) grid_points *= 2;
  const Grid grid = Grid::make(trace.initial.period, grid_points);
  const auto xs = grid.xs();
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
    const std::string z = format_sci(trace.z[trace.snapshot_at[i]]);
    const std::vector<cplx> s = to_samples(trace.snapshots[i], grid);
    for (int j = 0; j < grid.points; ++j)
      out << z << ',' << format_sci(xs[j]) << ',' << format_sci(s[j].real())
          << ',' << format_sci(s[j].imag()) << '\n';
  }
}

}  // namespace talbot
