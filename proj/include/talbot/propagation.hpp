#pragma once

// Evolution of commensurate periodic wavefields under
//
//     i dpsi/dz = -psi_xx + V(x) psi
//
// and the deviation diagnostics that detect self-imaging.
//
// An input of period (N/M)a propagates on the period L = N a mode lattice,
// which splits into N decoupled residue blocks; block n0 evolves under the
// Bloch matrix at q = (2*pi/a)(n0/N + p) where p is the Bloch tilt.  Each
// block is advanced by the dense matrix exponential exp(-i H q z), exact in
// z up to truncation and valid for defective (Jordan) blocks, so revival
// checks carry no step-size error.  An independent split-step integrator
// cross-validates every trace.
//
// The deviation functional
//
//     Delta(z) = (1/L) int |psi(x,z) - psi(x,0)|^2 dx = sum_n |psi_n(z) - psi_n(0)|^2
//
// vanishes exactly at a revival; Delta_half compares against the input
// shifted by half its own period.

#include <optional>
#include <string>

#include "talbot/potential.hpp"
#include "talbot/susy.hpp"

namespace talbot {

enum class ProfileKind { GaussianTrain, JordanV, Custom };

struct ZSampling {
  enum class Mode { Revivals, Trace, List };
  Mode mode = Mode::Revivals;
  int revival_count = 2;        // Revivals: trace to revival_count * z_T
  int samples_per_period = 512; // Revivals: samples per z_T
  double z_max = 0.0;           // Trace
  int samples = 0;              // Trace
  std::vector<double> values;   // List
  int snapshot_stride = 1;      // keep every k-th field snapshot
};

struct Scenario {
  ComplexPotential potential;
  int N = 3;               // input period = (N/M) * lattice period, coprime
  int M = 2;
  Rational tilt{0, 1};     // Bloch tilt p in units of 2*pi/a
  ProfileKind profile = ProfileKind::GaussianTrain;
  double width_over_period = 0.1;    // Gaussian width / input period
  double peak_over_period = 0.0;     // train peak position / input period
  std::map<int, cplx> custom_modes;  // Custom profile, on the L = N a lattice
  ZSampling z;
  int block_truncation = 0;  // 0 = automatic
  int threads = 1;
};

// Tilt admissibility: 1/p integer, coprime with N, and 2 N p not an integer.
bool tilt_conditions_ok(int N, const Rational& p, std::string* why = nullptr);

void validate_scenario(const Scenario& s);

// Exact periodization of exp(-x^2/w^2) with period (N/M)a, built in mode
// space on the L = N a lattice (support only at multiples of M) and
// normalized to unit mean-square power.
Wavefield gaussian_train(int N, int M, double a, double width);

// Revival period: N^2 a^2 / (2 pi) untilted, N^2 a^2 / (2 pi p^2) tilted.
// Throws TiltConditionsViolated when p != 0 fails the admissibility check.
double predict_revival(int N, int M, double a, const Rational& p);

// The scenario's normalized initial field, tilt applied.
Wavefield initial_field(const Scenario& s);

struct PropagationTrace {
  std::vector<double> z;
  std::vector<double> deviation;       // Delta(z)
  std::vector<double> deviation_half;  // against the half-period-shifted input
  std::vector<double> norm;            // mean-square power
  std::vector<std::size_t> snapshot_at;  // indices into z
  std::vector<Wavefield> snapshots;
  Wavefield initial;
  double talbot_period = 0.0;
  bool hermitian = false;

  std::size_t index_at(double z_value) const;  // sample lookup, 1e-9 tolerance
};

PropagationTrace propagate(const Scenario& s);

// Symmetric high-order operator splitting: exact dispersion in mode space
// alternated with pointwise complex-potential factors in sample space.
// Runs at dz and dz/2 and demands agreement below conv_tol
// (StepNotConverged otherwise); returns the finer result.
Wavefield split_step_oracle(const Wavefield& field, const ComplexPotential& pot,
                            double z, double dz, int grid_points = 512,
                            double conv_tol = 1e-8);

// Evolves the Jordan associated vector v and verifies the closed form
// psi(z) = exp(-i E z) (v - i z u) at ten z samples (NotSecular on failure).
// Returns the fitted linear growth rate of ||psi(z)||, asymptotically ||u||.
double secular_growth_test(const ComplexPotential& pot, const JordanChain& chain,
                           double z_max = 200.0);

// First sampled z > 0 with Delta(z) < epsilon after the initial departure
// transient (the contiguous below-epsilon prefix as the field first leaves
// its input state).  Requires a norm-conserving (Hermitian) trace.
std::optional<double> recurrence_search(const PropagationTrace& trace,
                                        double epsilon);

}  // namespace talbot
