#pragma once

// Darboux (supersymmetric) synthesis of gapless complex crystals, and Jordan
// chains at defective degeneracies.
//
// Given a solution phi of H_in phi = E phi, the superpotential W = phi'/phi
// factorizes H_in = (d/dx + W)(-d/dx + W) + E, and intertwining the factors
// produces the isospectral partner
//
//     V_out = -V_in + 2 E + 2 W^2.
//
// Seeding the free particle with phi = cos(k0 x + i rho), k0 = pi/a, yields
// the gapless PT crystal with one defective degeneracy; a second step at
// 9 k0^2 adds a defective degeneracy at the next odd zone-edge energy.  A
// nonzero rho keeps phi free of zeros so the partner potential stays finite.
//
// At a defective degeneracy (E, q) the truncated Bloch matrix has a
// one-dimensional kernel u and a Jordan associated vector v with
// (H - E) v = u; the pair seeds the linear-in-z secular growth probed by the
// propagation module.

#include <functional>

#include "talbot/band.hpp"
#include "talbot/grid.hpp"
#include "talbot/potential.hpp"

namespace talbot {

// Closed-form factorization seed: phi, its derivative, the energy it solves
// for, and the natural period of phi (2a for the built-in seeds, which are
// antiperiodic over one lattice period).
struct SeedSolution {
  double energy = 0.0;
  double period = 0.0;
  std::function<cplx(double)> value;
  std::function<cplx(double)> derivative;
};

// phi_1 = cos(k0 x + i rho) at E = k0^2.
SeedSolution cosine_seed(double a, double rho);

// phi_2 = 3 k0 sin(3 k0 x + 3 i rho) - k0 tan(k0 x + i rho) cos(3 k0 x + 3 i rho)
// at E = 9 k0^2; solves the partner Hamiltonian of the first step.
SeedSolution second_seed(double a, double rho);

struct SusyStep {
  double seed_energy = 0.0;
  Grid grid;                        // construction grid over the seed period
  std::vector<cplx> seed;           // phi on the grid
  std::vector<cplx> superpotential; // W = phi'/phi on the grid
  ComplexPotential input;
  ComplexPotential output;
};

// One Darboux step.  Verifies that the seed solves H_in phi = E phi to 1e-8
// (SeedNotSolution) and does not vanish on the grid (SeedVanishes), then
// extracts the partner potential's Fourier coefficients by quadrature.
SusyStep darboux_partner(const ComplexPotential& v_in, const SeedSolution& seed,
                         int grid_points = 512);

// Maps an eigenstate of the input Hamiltonian to one of the partner:
// xi = -psi' + W psi.  Fields must live on the step's construction grid.
Wavefield susy_map_state(const Wavefield& psi, const SusyStep& step);

// Cascades two Darboux steps from the free particle; the result carries
// defective degeneracies at (pi/a)^2 and (3 pi/a)^2 and nothing at the zone
// center.
ComplexPotential synthesize_two_singularities(double a, double rho);

struct JordanChain {
  double energy = 0.0;
  double q = 0.0;
  Wavefield u;  // (H - E) u = 0, unit mode-space norm
  Wavefield v;  // (H - E) v = u, gauge <u, v> = 0
  double residual_u = 0.0;
  double residual_v = 0.0;
};

// Builds the Jordan chain of a defective degeneracy reported by
// detect_singularities.  q must be a zone-center or zone-edge wave number;
// NotDefective is raised when the kernel of H(q) - E is not one-dimensional.
JordanChain jordan_chain(const ComplexPotential& pot, double energy, double q,
                         int n_trunc = 0, int grid_points = 512);

}  // namespace talbot
