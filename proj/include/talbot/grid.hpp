#pragma once

// Periodic sampling grids and Fourier-mode wavefields.
//
// A Wavefield of period L with rational tilt t is the Bloch-type series
//
//     psi(x) = sum_n psi_n exp( 2*pi*i * (n + t) * x / L ),
//
// so an untilted field (t = 0) is exactly L-periodic while a tilted one
// satisfies psi(x + L) = exp(2*pi*i*t) psi(x).  Mean-square power over one
// period is sum_n |psi_n|^2 regardless of the tilt (cross terms integrate
// to zero), which is the Parseval identity the tests rely on.

#include <complex>
#include <map>
#include <vector>

#include "talbot/errors.hpp"
#include "talbot/rational.hpp"

namespace talbot {

using cplx = std::complex<double>;

// Uniform sampling of one period [0, L): x_j = j * L / points.
struct Grid {
  double length = 0.0;
  int points = 0;

  // points must be a power of two >= 64 so spectral transforms stay exact
  // and cheap on every grid the library hands out.
  static Grid make(double length, int points);

  std::vector<double> xs() const;
  double dx() const { return length / points; }
};

struct Wavefield {
  double period = 0.0;
  std::map<int, cplx> modes;  // harmonic index on the period-L lattice
  Rational tilt{0, 1};        // Bloch offset in units of 2*pi/period

  double power() const;                 // sum |psi_n|^2
  Wavefield normalized() const;         // scaled to unit mean-square power
  int max_abs_mode() const;             // 0 for the empty field
  cplx mode(int n) const;
  double wavenumber(int n) const;       // 2*pi*(n + tilt)/period

  // Drops modes with |psi_n| < rel_tol * max|psi_n|.
  Wavefield pruned(double rel_tol) const;
};

// Mode-space l2 inner product <a, b> = sum conj(a_n) b_n (tilts must match).
cplx inner(const Wavefield& a, const Wavefield& b);

// Mean-square distance sum |a_n - b_n|^2 between two fields on one lattice.
double mode_distance_sq(const Wavefield& a, const Wavefield& b);

// Evaluates the Fourier series of `field` on `grid`.
// Throws GridMismatch if grid.length != field.period and UnderResolved if
// the grid cannot represent the highest occupied mode (points/2 <= max |n|).
std::vector<cplx> to_samples(const Wavefield& field, const Grid& grid);

// Inverse of to_samples for band-limited data: projects samples onto the
// tilted harmonic basis.  Exact (to rounding) when the underlying field is
// resolved by the grid.
Wavefield to_modes(const std::vector<cplx>& samples, const Grid& grid,
                   const Rational& tilt = Rational(0, 1));

}  // namespace talbot
