#pragma once

// CSV emitters.  Numbers are written as fixed 17-significant-digit
// scientific notation so outputs diff byte-stably across runs.

#include <string>

#include "talbot/band.hpp"
#include "talbot/propagation.hpp"

namespace talbot {

std::string format_sci(double x);

// columns: q, alpha, re_E, im_E, beta
void write_bands_csv(const std::string& path, const BandDiagram& bands);

// columns: n, E, q_loc, defective, angle
void write_singularities_csv(const std::string& path,
                             const SingularityReport& report);

// columns: z, delta, delta_half, norm
void write_trace_csv(const std::string& path, const PropagationTrace& trace);

// columns: z, x, re_psi, im_psi (one block of rows per stored snapshot)
void write_snapshots_csv(const std::string& path, const PropagationTrace& trace,
                         int grid_points = 512);

}  // namespace talbot
