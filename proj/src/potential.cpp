#include "talbot/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace talbot {

namespace {

constexpr double kPi = std::numbers::pi;

// Construction-time truncation adequacy: the outermost stored coefficient
// must sit below 1e-12 of the peak.
void check_decay(const ComplexPotential& pot) {
  const int nm = pot.n_max();
  if (nm == 0) return;
  const double peak = pot.max_abs_coeff();
  const double edge = std::max(std::abs(pot.coeff(nm)), std::abs(pot.coeff(-nm)));
  if (edge > 1e-12 * peak)
    throw TruncationTooSmall(
        "potential coefficients do not decay below 1e-12 of the peak at the "
        "stored truncation; increase n_max");
}

}  // namespace

const char* family_name(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::Free: return "free";
    case PotentialFamily::Exp: return "exp";
    case PotentialFamily::OneSingularity: return "one_ss";
    case PotentialFamily::TwoSingularity: return "two_ss";
    case PotentialFamily::Mathieu: return "mathieu";
    case PotentialFamily::Custom: return "custom";
  }
  return "custom";
}

cplx ComplexPotential::coeff(int n) const {
  auto it = coeffs.find(n);
  return it == coeffs.end() ? cplx(0.0) : it->second;
}

int ComplexPotential::n_max() const {
  int m = 0;
  for (const auto& [n, c] : coeffs) m = std::max(m, std::abs(n));
  return m;
}

double ComplexPotential::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [n, c] : coeffs) m = std::max(m, std::abs(c));
  return m;
}

int ComplexPotential::significant_n_max(double rel_tol) const {
  const double peak = max_abs_coeff();
  int m = 0;
  for (const auto& [n, c] : coeffs)
    if (std::abs(c) > rel_tol * peak) m = std::max(m, std::abs(n));
  return m;
}

bool ComplexPotential::one_sided(double rel_tol) const {
  const double peak = max_abs_coeff();
  for (const auto& [n, c] : coeffs)
    if (n <= 0 && std::abs(c) > rel_tol * peak) return false;
  return true;
}

cplx ComplexPotential::value(double x) const {
  cplx v = 0.0;
  for (const auto& [n, c] : coeffs)
    v += c * std::polar(1.0, 2.0 * kPi * n * x / period);
  return v;
}

cplx one_singularity_value(double a, double rho, double x) {
  const double k = 2.0 * kPi / a;
  const cplx arg(k * x, 2.0 * rho);
  return cplx(k * k) / (1.0 + std::cos(arg));
}

cplx two_singularity_value(double a, double rho, double x) {
  const double k = 2.0 * kPi / a;
  const cplx arg2(2.0 * k * x, 4.0 * rho);
  const cplx arg1(k * x, 2.0 * rho);
  return cplx(4.0 * k * k) / (1.0 - std::cos(arg2)) +
         cplx(2.0 * k * k) / (1.0 + std::cos(arg1));
}

std::map<int, cplx> fourier_coefficients(const std::function<cplx(double)>& f,
                                         double a, int n_max, int samples) {
  if (samples <= 0) samples = std::max(1024, 8 * n_max);
  std::vector<cplx> fx(samples);
  for (int j = 0; j < samples; ++j) fx[j] = f(a * j / samples);

  std::map<int, cplx> out;
  for (int n = -n_max; n <= n_max; ++n) {
    cplx acc = 0.0;
    const double step = -2.0 * kPi * n / samples;
    for (int j = 0; j < samples; ++j) acc += fx[j] * std::polar(1.0, step * j);
    out[n] = acc / static_cast<double>(samples);
  }
  return out;
}

ComplexPotential free_potential(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  return ComplexPotential{a, {}, PotentialFamily::Free, 0.0};
}

ComplexPotential exp_potential(double a, double v0) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  return ComplexPotential{a, {{1, cplx(v0)}}, PotentialFamily::Exp, v0};
}

ComplexPotential one_singularity_potential(double a, double rho, int n_max) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  if (rho == 0.0)
    throw SeedVanishes("one_singularity_potential: rho must be nonzero");
  ComplexPotential pot{
      a,
      fourier_coefficients([a, rho](double x) { return one_singularity_value(a, rho, x); },
                           a, n_max),
      PotentialFamily::OneSingularity, rho};
  check_decay(pot);
  return pot;
}

ComplexPotential two_singularity_potential(double a, double rho, int n_max) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  if (rho == 0.0)
    throw SeedVanishes("two_singularity_potential: rho must be nonzero");
  ComplexPotential pot{
      a,
      fourier_coefficients([a, rho](double x) { return two_singularity_value(a, rho, x); },
                           a, n_max),
      PotentialFamily::TwoSingularity, rho};
  check_decay(pot);
  return pot;
}

ComplexPotential mathieu_potential(double a, double v0) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  // sin expands to (e^{i.} - e^{-i.}) / (2i)
  const cplx half(0.0, -0.5);
  return ComplexPotential{a,
                          {{1, half * v0}, {-1, -half * v0}},
                          PotentialFamily::Mathieu,
                          v0};
}

ComplexPotential custom_potential(double a, std::map<int, cplx> coeffs) {
  if (!(a > 0.0)) throw std::invalid_argument("potential: period must be positive");
  return ComplexPotential{a, std::move(coeffs), PotentialFamily::Custom, 0.0};
}

ComplexPotential real_part_potential(const ComplexPotential& pot) {
  std::map<int, cplx> re;
  for (const auto& [n, c] : pot.coeffs) {
    const cplx v = 0.5 * (c + std::conj(pot.coeff(-n)));
    if (v != cplx(0.0)) re[n] = v;
    if (n != 0 && !pot.coeffs.count(-n)) {
      const cplx w = 0.5 * std::conj(c);
      if (w != cplx(0.0)) re[-n] = w;
    }
  }
  ComplexPotential out{pot.period, std::move(re), PotentialFamily::Custom, 0.0};
  return out;
}

std::vector<cplx> potential_samples(const ComplexPotential& pot, const Grid& grid) {
  const double ratio = grid.length / pot.period;
  const long long r = std::llround(ratio);
  if (r < 1 || std::abs(ratio - r) > 1e-9)
    throw IncommensurateGrid(
        "potential_samples: grid length is not an integer multiple of the "
        "lattice period");

  std::vector<cplx> s(grid.points, cplx(0.0));
  const double step = 2.0 * kPi * r / grid.points;
  for (const auto& [n, c] : pot.coeffs) {
    const double phase_step = step * n;
    for (int j = 0; j < grid.points; ++j)
      s[j] += c * std::polar(1.0, phase_step * j);
  }
  return s;
}

bool check_pt_symmetry(const ComplexPotential& pot, double tol) {
  double max_im = 0.0, max_abs = 0.0;
  for (const auto& [n, c] : pot.coeffs) {
    max_im = std::max(max_im, std::abs(c.imag()));
    max_abs = std::max(max_abs, std::abs(c));
  }
  if (max_abs == 0.0) return true;  // the zero potential is PT symmetric
  return max_im <= tol * max_abs;
}

bool is_hermitian(const ComplexPotential& pot, double tol) {
  const double peak = pot.max_abs_coeff();
  if (peak == 0.0) return true;
  for (const auto& [n, c] : pot.coeffs)
    if (std::abs(c - std::conj(pot.coeff(-n))) > tol * peak) return false;
  return true;
}

}  // namespace talbot
