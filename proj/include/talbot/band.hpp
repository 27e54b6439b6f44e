#pragma once

// Truncated Bloch matrices, band diagrams and degeneracy classification.
//
// At reduced wave number q the plane-wave block is
//
//     H_{n,l}(q) = (q + 2*pi*n/a)^2 delta_{n,l} + V_{n-l},
//
// whose eigenvalues are the band energies E_alpha(q).  A gapless crystal
// tiles the free-space parabola: E_alpha(q) = (2*pi*beta_alpha/a - |q|)^2
// with beta = 0, 1, -1, 2, -2, ...  Degeneracies of the folded parabola sit
// at E_n = (n*pi/a)^2, at the zone center for even n and at the -pi/a edge
// for odd n.  Each one is classified by the rank of H(q_loc) - E_n: kernel
// dimension 2 is an ordinary (diabolic) crossing, dimension 1 a defective
// degeneracy where the pair of eigenvectors has coalesced.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talbot/potential.hpp"

namespace talbot {

struct BlochBlock {
  double q = 0.0;
  int n_trunc = 0;  // mode indices n in [-n_trunc, n_trunc]
  double period = 0.0;
  Eigen::MatrixXcd matrix;
};

// Builds H(q).  Requires |q| <= pi/a and n_trunc >= 2 * pot.n_max()
// (TruncationTooSmall otherwise).
BlochBlock bloch_matrix(const ComplexPotential& pot, double q, int n_trunc);

struct BandDiagram {
  std::vector<double> q;               // q grid in [-pi/a, pi/a)
  std::vector<std::vector<cplx>> energies;  // per q, sorted by real part
  std::vector<int> beta;               // folding index per band
  double parabola_max_dev = 0.0;       // max |Re E - folded parabola|
  double period = 0.0;
};

int folding_index(int alpha);  // 0, 1, -1, 2, -2, ...
double folded_energy(double a, double q, int alpha);

struct BandOptions {
  int n_trunc = 0;   // 0 = automatic
  int threads = 1;
};

// Band diagram over q_count wave numbers and bands alpha = 0..alpha_max.
// Throws ComplexSpectrum if any reported eigenvalue has |Im E| > 1e-8.
BandDiagram band_diagram(const ComplexPotential& pot, int q_count, int alpha_max,
                         const BandOptions& opts = {});

struct SingularityRecord {
  int n = 0;                 // degeneracy label, E_n = (n*pi/a)^2
  double energy = 0.0;
  double q_loc = 0.0;        // 0 for even n, -pi/a for odd n
  bool defective = false;
  int kernel_dim = 0;        // of H(q_loc) - E_n at the rank threshold
  double coalescence_angle = 0.0;  // between the degenerate pair's eigenvectors
};

struct SingularityReport {
  double period = 0.0;
  std::vector<SingularityRecord> entries;

  std::vector<int> defective_labels() const;
};

// Examines E_n for n = 1..n_energy_max.  The rank test uses the singular
// value threshold sigma < 1e-8 * sigma_max; the coalescence angle is a
// diagnostic computed on the pair's two-dimensional invariant subspace
// (pi/2 reported for a clean diabolic crossing).
SingularityReport detect_singularities(const ComplexPotential& pot,
                                       int n_energy_max,
                                       const BandOptions& opts = {});

struct SelfImagingCheck {
  bool allowed = false;
  std::string reason;
  std::optional<SingularityRecord> blocking;
};

// Commensurate self-imaging condition for input period (N/M)a: an odd N
// only requires the zone-center energies to be free of defective
// degeneracies; an even N requires the whole report to be clean.
SelfImagingCheck self_imaging_allowed(const SingularityReport& report, int N);

}  // namespace talbot
