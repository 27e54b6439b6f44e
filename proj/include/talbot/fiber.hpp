#pragma once

// Mapping between a recirculating dispersive fiber loop with phase and
// amplitude modulators and the normalized propagation model.
//
// Per round trip n the pulse envelope obeys
//
//     i dpsi/dn = -D psi_tt + [ d_PM(t) + i d_AM(t) + i (g - l) ] psi,
//
// with D the total loop dispersion.  Scaling x = Omega_m * t and
// z = n * D * Omega_m^2 turns this into the normalized equation with lattice
// period a = 2*pi and
//
//     V(x) = [ d_PM(x) + i d_AM(x) + i (g - l) ] / (D Omega_m^2),
//
// so the real and imaginary parts of a target crystal map directly onto the
// two modulator drives.  The revival budget follows from the same scaling:
// z_T round trips n_T = z_T T_m^2 / (4 pi^2 D).

#include <map>

#include "talbot/potential.hpp"

namespace talbot {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct FiberParams {
  double wavelength = 1560e-9;         // m
  double dispersion_ps_nm_km = 50.0;   // fiber dispersion, ps/(nm km)
  double loop_length = 100.0;          // m
  double modulation_frequency = 3e9;   // Hz
  double gain = 0.0;                   // per round trip
  double loss = 0.0;                   // per round trip
  int N = 3;                           // pulse spacing T_p = (N/M) T_m
  int M = 2;
  int pulse_count = 100;
  double group_index = 1.45;           // for the loop transit time
  double modulator_bandwidth = 40e9;   // Hz

  double modulation_period() const { return 1.0 / modulation_frequency; }
  double dispersion_si() const;        // s/m^2
  double total_dispersion() const;     // s^2
  double round_trip_time() const;      // s
};

void validate(const FiberParams& p);

// D = lambda^2 * D_f * L_f / (4 pi c), with D_f in SI units (s/m^2).
double total_dispersion(double wavelength, double dispersion_si, double loop_length);

// ps/(nm km) -> s/m^2
double dispersion_to_si(double ps_nm_km);

// Fourier coefficients of the two real drive profiles, on the modulation
// period's harmonic lattice.
struct DriveCoefficients {
  std::map<int, cplx> pm;
  std::map<int, cplx> am;
};

// Drive profiles -> normalized potential (a = 2 pi).  Profiles must be real
// (Hermitian-symmetric coefficients) and fit inside the modulator bandwidth.
ComplexPotential normalized_potential(const FiberParams& p,
                                      const DriveCoefficients& drives);

// Inverse map: the drives realizing a target potential.  Throws
// BandwidthExceeded when a significant harmonic (above 1e-6 of the drive
// peak) lands beyond the modulator bandwidth.
DriveCoefficients drives_for_potential(const ComplexPotential& pot,
                                       const FiberParams& p);

struct RoundTripBudget {
  double round_trips = 0.0;    // n_T
  double pulse_spacing = 0.0;  // T_p = (N/M) T_m
};

// n_T = z_T * T_m^2 / (4 pi^2 D), with z_T in normalized units.
RoundTripBudget roundtrips_for_revival(double z_T, const FiberParams& p);

struct FiberDesign {
  FiberParams params;
  double total_dispersion = 0.0;      // s^2
  double potential_scale = 0.0;       // 1 / (D Omega_m^2)
  double depth_scale = 0.0;           // 4 pi^2 D / T_m^2, drive depth per unit V
  double z_T = 0.0;                   // normalized revival distance
  double round_trips = 0.0;
  double pulse_spacing = 0.0;
  double round_trip_time = 0.0;
  int pulse_capacity = 0;             // floor(T_rt / T_p)
  bool capacity_ok = false;           // pulse_count fits without overlap
};

// Assembles the full budget for a normalized revival distance z_T
// (z_T = 2 pi N^2 for an untilted commensurate input with a = 2 pi).
FiberDesign build_design(const FiberParams& p, double z_T);

}  // namespace talbot
