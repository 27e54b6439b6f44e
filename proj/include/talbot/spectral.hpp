#pragma once

// Spectral application of the Schrodinger operator H = -d^2/dx^2 + V(x) to a
// band-limited field: derivatives are exact in mode space, the potential
// product is taken pointwise on the grid.

#include <vector>

#include "talbot/potential.hpp"

namespace talbot {

std::vector<cplx> derivative_samples(const Wavefield& field, const Grid& grid);

std::vector<cplx> apply_hamiltonian(const Wavefield& field,
                                    const ComplexPotential& pot,
                                    const Grid& grid);

double sample_rms(const std::vector<cplx>& samples);

}  // namespace talbot
