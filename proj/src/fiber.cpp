#include "talbot/fiber.hpp"

#include <cmath>
#include <numbers>

namespace talbot {

namespace {
constexpr double kPi = std::numbers::pi;
}

double FiberParams::dispersion_si() const {
  return dispersion_to_si(dispersion_ps_nm_km);
}

double FiberParams::total_dispersion() const {
  return talbot::total_dispersion(wavelength, dispersion_si(), loop_length);
}

double FiberParams::round_trip_time() const {
  return loop_length * group_index / kSpeedOfLight;
}

void validate(const FiberParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ValidationError(std::string("fiber: ") + name +
                                          " must be positive");
  };
  positive(p.wavelength, "wavelength");
  positive(p.dispersion_ps_nm_km, "dispersion");
  positive(p.loop_length, "loop length");
  positive(p.modulation_frequency, "modulation frequency");
  positive(p.group_index, "group index");
  positive(p.modulator_bandwidth, "modulator bandwidth");
  if (p.gain < 0.0 || p.loss < 0.0)
    throw ValidationError("fiber: gain and loss must be non-negative");
  if (p.N < 1 || p.M < 1)
    throw ValidationError("fiber: N and M must be positive");
  if (p.pulse_count < 1)
    throw ValidationError("fiber: pulse count must be positive");
}

double dispersion_to_si(double ps_nm_km) {
  // ps/(nm km) = 1e-12 s / (1e-9 m * 1e3 m) = 1e-6 s/m^2
  return ps_nm_km * 1e-6;
}

double total_dispersion(double wavelength, double dispersion_si,
                        double loop_length) {
  if (wavelength < 0.0 || dispersion_si < 0.0 || loop_length < 0.0)
    throw ValidationError("total_dispersion: inputs must be non-negative");
  return wavelength * wavelength * dispersion_si * loop_length /
         (4.0 * kPi * kSpeedOfLight);
}

namespace {

double max_abs(const std::map<int, cplx>& coeffs) {
  double m = 0.0;
  for (const auto& [n, c] : coeffs) m = std::max(m, std::abs(c));
  return m;
}

void check_real_profile(const std::map<int, cplx>& coeffs, const char* name) {
  const double peak = max_abs(coeffs);
  if (peak == 0.0) return;
  for (const auto& [n, c] : coeffs) {
    auto it = coeffs.find(-n);
    const cplx other = (it == coeffs.end()) ? cplx(0.0) : it->second;
    if (std::abs(c - std::conj(other)) > 1e-10 * peak)
      throw ValidationError(std::string("fiber: ") + name +
                            " drive profile is not real");
  }
}

void check_bandwidth(const std::map<int, cplx>& coeffs, const FiberParams& p,
                     const char* name) {
  const double peak = max_abs(coeffs);
  if (peak == 0.0) return;
  for (const auto& [n, c] : coeffs) {
    if (std::abs(c) < 1e-6 * peak) continue;
    if (std::abs(n) * p.modulation_frequency > p.modulator_bandwidth)
      throw BandwidthExceeded(
          std::string("fiber: ") + name + " drive needs harmonic " +
          std::to_string(std::abs(n)) + " at " +
          std::to_string(std::abs(n) * p.modulation_frequency / 1e9) +
          " GHz, beyond the modulator bandwidth");
  }
}

}  // namespace

ComplexPotential normalized_potential(const FiberParams& p,
                                      const DriveCoefficients& drives) {
  validate(p);
  check_real_profile(drives.pm, "phase");
  check_real_profile(drives.am, "amplitude");
  check_bandwidth(drives.pm, p, "phase");
  check_bandwidth(drives.am, p, "amplitude");

  const double omega = 2.0 * kPi * p.modulation_frequency;
  const double scale = 1.0 / (p.total_dispersion() * omega * omega);

  std::map<int, cplx> coeffs;
  auto add = [&](int n, cplx v) {
    if (v != cplx(0.0)) coeffs[n] += v;
  };
  for (const auto& [n, c] : drives.pm) add(n, scale * c);
  for (const auto& [n, c] : drives.am) add(n, scale * cplx(0.0, 1.0) * c);
  add(0, scale * cplx(0.0, p.gain - p.loss));
  return custom_potential(2.0 * kPi, std::move(coeffs));
}

DriveCoefficients drives_for_potential(const ComplexPotential& pot,
                                       const FiberParams& p) {
  validate(p);
  const double omega = 2.0 * kPi * p.modulation_frequency;
  const double scale = p.total_dispersion() * omega * omega;  // depth per unit V

  DriveCoefficients d;
  auto set = [](std::map<int, cplx>& m, int n, cplx v) {
    if (std::abs(v) > 0.0) m[n] = v;
  };
  // Re V and Im V of the target, as coefficients of real profiles
  std::map<int, bool> seen;
  for (const auto& [n, c] : pot.coeffs) seen[n] = seen[-n] = true;
  for (const auto& [n, ignored] : seen) {
    const cplx vn = pot.coeff(n);
    const cplx vmn = pot.coeff(-n);
    const cplx re = 0.5 * (vn + std::conj(vmn));
    const cplx im = cplx(0.0, -0.5) * (vn - std::conj(vmn));
    set(d.pm, n, scale * re);
    set(d.am, n, scale * im);
  }
  // steady gain/loss offset handled by g - l, not by the modulator
  auto it = d.am.find(0);
  if (it != d.am.end()) {
    it->second -= (p.gain - p.loss);
    if (it->second == cplx(0.0)) d.am.erase(it);
  } else if (p.gain != p.loss) {
    d.am[0] = -(p.gain - p.loss);
  }

  check_bandwidth(d.pm, p, "phase");
  check_bandwidth(d.am, p, "amplitude");
  return d;
}

RoundTripBudget roundtrips_for_revival(double z_T, const FiberParams& p) {
  validate(p);
  if (z_T < 0.0)
    throw ValidationError("roundtrips_for_revival: z_T must be non-negative");
  const double tm = p.modulation_period();
  RoundTripBudget b;
  b.round_trips = z_T * tm * tm / (4.0 * kPi * kPi * p.total_dispersion());
  b.pulse_spacing = static_cast<double>(p.N) / p.M * tm;
  return b;
}

FiberDesign build_design(const FiberParams& p, double z_T) {
  validate(p);
  FiberDesign d;
  d.params = p;
  d.total_dispersion = p.total_dispersion();
  const double omega = 2.0 * kPi * p.modulation_frequency;
  d.potential_scale = 1.0 / (d.total_dispersion * omega * omega);
  const double tm = p.modulation_period();
  d.depth_scale = 4.0 * kPi * kPi * d.total_dispersion / (tm * tm);
  d.z_T = z_T;
  const RoundTripBudget b = roundtrips_for_revival(z_T, p);
  d.round_trips = b.round_trips;
  d.pulse_spacing = b.pulse_spacing;
  d.round_trip_time = p.round_trip_time();
  d.pulse_capacity = static_cast<int>(d.round_trip_time / d.pulse_spacing);
  d.capacity_ok = p.pulse_count * d.pulse_spacing <= d.round_trip_time;
  return d;
}

}  // namespace talbot
