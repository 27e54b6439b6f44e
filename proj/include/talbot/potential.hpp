#pragma once

// Complex periodic potentials stored canonically as Fourier coefficients
//
//     V(x) = sum_n V_n exp( 2*pi*i * n * x / a ),
//
// which is what the Bloch-matrix builder consumes directly.  Closed-form
// families are sampled once by periodic quadrature at construction and the
// resulting coefficients must decay below 1e-12 of the peak at the stored
// truncation, otherwise construction fails.
//
// Built-in families:
//   Free            V = 0
//   Exp             V0 * exp(2*pi*i*x/a), single harmonic, all of whose
//                   band degeneracies are defective
//   OneSingularity  (2*pi/a)^2 / (1 + cos(2*pi*x/a + 2*i*rho)), a gapless
//                   PT crystal with a single defective degeneracy at
//                   E = (pi/a)^2
//   TwoSingularity  adds (4*pi/a)^2 / (1 - cos(4*pi*x/a + 4*i*rho)) plus a
//                   doubled second term; defective at (pi/a)^2 and (3*pi/a)^2
//   Mathieu         V0 * sin(2*pi*x/a), the Hermitian contrast case
//   Custom          caller-supplied coefficients

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "talbot/grid.hpp"

namespace talbot {

enum class PotentialFamily { Free, Exp, OneSingularity, TwoSingularity, Mathieu, Custom };

const char* family_name(PotentialFamily f);

struct ComplexPotential {
  double period = 0.0;          // lattice period a
  std::map<int, cplx> coeffs;   // V_n, n in [-n_max, n_max]
  PotentialFamily family = PotentialFamily::Custom;
  double param = 0.0;           // V0 or rho, family-dependent

  cplx coeff(int n) const;
  int n_max() const;                       // largest stored |n|
  double max_abs_coeff() const;
  // Largest |n| whose coefficient still matters at the given relative level.
  int significant_n_max(double rel_tol = 1e-13) const;
  bool one_sided(double rel_tol = 1e-12) const;  // V_n = 0 for n <= 0
  cplx value(double x) const;              // Fourier-series evaluation
};

// --- closed forms -----------------------------------------------------------

cplx one_singularity_value(double a, double rho, double x);
cplx two_singularity_value(double a, double rho, double x);

// Fourier coefficients of a period-`a` function by the periodic rectangle
// rule (spectrally accurate for smooth periodic integrands).
std::map<int, cplx> fourier_coefficients(const std::function<cplx(double)>& f,
                                         double a, int n_max, int samples = 0);

// --- constructors ------------------------------------------------------------

ComplexPotential free_potential(double a);
ComplexPotential exp_potential(double a, double v0);
ComplexPotential one_singularity_potential(double a, double rho, int n_max = 48);
ComplexPotential two_singularity_potential(double a, double rho, int n_max = 48);
ComplexPotential mathieu_potential(double a, double v0);
ComplexPotential custom_potential(double a, std::map<int, cplx> coeffs);

// Hermitian contrast: keeps Re V(x) only (coefficients (V_n + conj(V_-n))/2).
ComplexPotential real_part_potential(const ComplexPotential& pot);

// --- operations --------------------------------------------------------------

// Samples V on a grid whose length is an integer multiple of the lattice
// period; throws IncommensurateGrid otherwise.
std::vector<cplx> potential_samples(const ComplexPotential& pot, const Grid& grid);

// PT symmetry about x = 0, V(-x) = conj(V(x)), holds iff every Fourier
// coefficient is real: true iff max_n |Im V_n| <= tol * max_n |V_n|.
bool check_pt_symmetry(const ComplexPotential& pot, double tol = 1e-10);

// V(x) real for all x, i.e. V_{-n} = conj(V_n).
bool is_hermitian(const ComplexPotential& pot, double tol = 1e-10);

}  // namespace talbot
